#pragma once

#include <complex>
#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "qmult/poly_phase.hpp"
#include "qmult/seqcore.hpp"

namespace qmult {

// s_q(n + j m) = residues[j] mod Q.
struct ModResidues {
    std::int64_t Q = 2;
    std::vector<std::int64_t> residues;
};

// alpha s_q(n + j m) mod 1 in [cells[j].first, cells[j].second).
struct IrrationalCells {
    double alpha = 0.0;
    std::vector<std::pair<double, double>> cells;
};

struct PatternSpec {
    unsigned q = 2;
    std::variant<ModResidues, IrrationalCells> kind;

    std::size_t k() const;
};

// Checks 2 <= q, 1 <= k <= 64, gcd(Q, q-1) = 1 when k >= 2 and
// 0 <= r_j < Q, or
// 0 <= a < b <= 1 for every cell.
void validate(const PatternSpec& spec);

struct CountPoint {
    std::uint64_t N = 0;
    std::uint64_t count = 0;
    double density = 0.0;
};

struct CountReport {
    std::uint64_t N = 0;
    std::uint64_t count = 0;
    // count / N^2 for progressions with k >= 2, count / N for k = 1.
    double density = 0.0;
    bool zero = true;
    // Counts for N' = 2, 4, 8, ... below N, then N itself.
    std::vector<CountPoint> series;
};

// Number of (n, m) with m >= 1, n + (k-1) m < N and every constraint met.
// For k = 1 only n is counted. The budget caps visited (n, m) pairs.
CountReport count_ap_patterns(const PatternSpec& spec, std::uint64_t N, std::uint64_t budget = 4'000'000'000ULL);

// count_ap_patterns restricted to IrrationalCells specs.
CountReport count_ap_cells(const PatternSpec& spec, std::uint64_t N, std::uint64_t budget = 4'000'000'000ULL);

struct BirkhoffPoint {
    std::uint64_t N = 0;
    std::complex<double> average;
};

// E_{n<N'} f(n) e(x0 + p(n) theta) for N' = 2, 4, 8, ... below N, then N:
// the weighted ergodic average of F(x) = e(x) along the rotation by theta
// sampled at p(n). p must have integer coefficients and be nonnegative on
// [0, N).
std::vector<BirkhoffPoint> weighted_birkhoff_demo(const Sequence& f, const PolyPhase& p, double theta, double x0,
                                                  std::uint64_t N);

}  // namespace qmult
