#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qmult/phase.hpp"
#include "qmult/seqcore.hpp"

namespace qmult {

// Default cap on the number of elementary steps of an exact enumeration.
inline constexpr std::uint64_t kDefaultWorkBudget = 1'000'000'000ULL;
// Largest supported order s; the carry state space is (s+1)^(2^s).
inline constexpr std::size_t kMaxGowersOrder = 4;

// One entry per vertex omega of {0,1}^s, indexed so that bit (i-1) of the
// index is omega_i. For s = 2 the order is 00, 10, 01, 11. Entries lie in
// [0, s].
class CarryVector {
  public:
    explicit CarryVector(std::size_t s = 1);
    CarryVector(std::size_t s, std::vector<unsigned> entries);

    std::size_t order() const { return s_; }
    std::size_t size() const { return entries_.size(); }
    unsigned operator[](std::size_t omega) const { return entries_[omega]; }
    const std::vector<unsigned>& entries() const { return entries_; }
    bool is_zero() const;

    // Injective packing, 3 bits per entry.
    std::uint64_t key() const;
    std::string to_string() const;  // "r00,r10,r01,r11"

    // Every carry vector of order s, in increasing key order.
    static std::vector<CarryVector> all(std::size_t s);

    auto operator<=>(const CarryVector& o) const = default;

  private:
    std::size_t s_;
    std::vector<unsigned> entries_;
};

// Calls visit(n) for every (n_0, ..., n_s) with all vertices
// n_0 + sum_i omega_i n_i in [0, N), in lexicographic order.
void enumerate_parallelepipeds(std::size_t s, std::uint64_t N,
                               const std::function<void(std::span<const std::int64_t>)>& visit);

// |Pi(N)|.
std::uint64_t count_parallelepipeds(std::size_t s, std::uint64_t N);

// ||f||_{U^s[N]} by literally visiting every parallelepiped.
double gowers_norm_bruteforce(const Sequence& f, std::size_t s, std::uint64_t N,
                              std::uint64_t budget = kDefaultWorkBudget);

// E_{n in Pi(N)} prod_omega C^|omega| f(omega . n + r_omega), exact. The sum
// over (n_0, n_s) is collapsed into a product of two sums over n_0, so the
// cost is about (2N)^(s-1) N 2^s instead of |Pi(N)| 2^s.
std::complex<double> parallelepiped_average_n(const Sequence& f, const CarryVector& r, std::uint64_t N,
                                              std::uint64_t budget = kDefaultWorkBudget);

// A(f, r, L) = parallelepiped_average_n(f, r, q^L).
std::complex<double> parallelepiped_average(const Sequence& f, const CarryVector& r, std::size_t L,
                                            std::uint64_t budget = kDefaultWorkBudget);

// ||f||_{U^s[N]} through parallelepiped_average_n with r = 0.
double gowers_norm(const Sequence& f, std::size_t s, std::uint64_t N,
                   std::uint64_t budget = kDefaultWorkBudget);

// delta(r, e)_omega = floor((omega . e + r_omega) / q^l), e in [q^l]^(s+1).
CarryVector carry_map(const CarryVector& r, std::span<const std::uint64_t> e, unsigned q, std::size_t l);

// W(f, r, r') = E_e prod_omega C^|omega| f((omega . e + r_omega) mod q^l)
// [delta(r, e) = r'], keyed by r'.
using WeightRow = std::map<CarryVector, std::complex<double>>;
WeightRow weight_row(const QMultSeq& f, const CarryVector& r, std::size_t l,
                     std::uint64_t budget = kDefaultWorkBudget);

struct WeightMap {
    std::size_t s = 0;
    std::size_t l = 0;
    std::map<CarryVector, WeightRow> rows;
};
WeightMap weight_map(const QMultSeq& f, std::size_t s, std::size_t l,
                     std::uint64_t budget = kDefaultWorkBudget);

// K(s, q) with |A(f, r, L) - sum_r' W(f, r, r') A(S^l f, r', L - l)|
// <= K q^-(L-l) for 1 <= l <= L. The two sides are averages of the same
// function over Pi(q^L) and over Pi(q^(L-l)) x [q^l]^(s+1), whose symmetric
// difference only contains tuples with a vertex of the coarse tuple within s
// of the boundary; the error is at most 2 |sym. diff.| / |coarse set|.
// Exact counts of that ratio, scaled by q^(L-l), increase towards s(s+1)
// from below for every q, so K = s(s+1).
double recursion_error_constant(std::size_t s, unsigned q);

struct RecursiveAverage {
    std::complex<double> value;
    double error_bound = 0.0;
};

// One step of the carry recursion with the shorter averages evaluated
// exactly. l = 0 reproduces parallelepiped_average with zero error.
RecursiveAverage recursive_average(const QMultSeq& f, const CarryVector& r, std::size_t L, std::size_t l,
                                   std::uint64_t budget = kDefaultWorkBudget);

// recursive_average for every carry vector of order s, sharing the shorter
// averages.
std::map<CarryVector, RecursiveAverage> recursive_averages(const QMultSeq& f, std::size_t s, std::size_t L,
                                                           std::size_t l,
                                                           std::uint64_t budget = kDefaultWorkBudget);

enum class BoxCondition { None, SumBelowQL };
const char* to_string(BoxCondition c);

// E_{e in [q^L]^(s+1)} prod_omega C^|omega| f(omega . e + r_omega) by a digit
// dynamic program over carry vectors. SumBelowQL conditions on
// e_0 + ... + e_s + r_{1...1} < q^L and returns the conditional average;
// an empty event throws InvalidArgument.
std::complex<double> box_average_exact(const QMultSeq& f, const CarryVector& r, std::size_t L,
                                       BoxCondition condition);

// Block lengths L_i for the epsilon ledger; each must be at least l0.
struct BlockPolicy {
    std::vector<std::size_t> lengths;
    std::size_t l0 = 2;

    static BlockPolicy constant(std::size_t length, std::size_t blocks, std::size_t l0 = 2);
};

struct EpsilonLedger {
    std::vector<std::size_t> breakpoints;  // K_0 = 0, ..., K_M
    std::vector<std::size_t> lengths;      // L_i
    std::vector<double> epsilons;          // 1 - ||S^{K_i} f||_{U^s[q^{L_i}]}
    std::vector<double> cumulative;        // partial sums of epsilons
    std::complex<double> average;          // A(f, 0, K_M)
};

EpsilonLedger epsilon_ledger(const QMultSeq& f, std::size_t s, const BlockPolicy& policy,
                             std::uint64_t budget = kDefaultWorkBudget);

struct LinearPhaseFit {
    Phase alpha;
    Phase beta;
    double residual = 0.0;  // E_{n<q^L} |f(n) - e(alpha n + beta)|
};

// Best linear phase e(alpha n + beta) for f on [q^L]: alpha from the sup of
// linear correlations, beta from the argument of the correlation, then a
// least-squares polish of the residual phases kept only if it lowers the
// residual.
LinearPhaseFit fit_linear_phase(const Sequence& f, std::size_t L);

struct UniformityReport {
    std::size_t L = 0;
    std::uint64_t N = 0;
    std::vector<std::pair<std::size_t, double>> norms;  // (s, ||f||_{U^s[N]})
    double linear_sup = 0.0;  // sup_alpha |E_{n<N} f(n) e(-n alpha)|
};

UniformityReport uniformity_report(const Sequence& f, std::size_t s_max, std::size_t L, std::size_t beam = 64,
                                   std::uint64_t budget = kDefaultWorkBudget);

}  // namespace qmult
