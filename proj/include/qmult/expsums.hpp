#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <vector>

#include "qmult/phase.hpp"
#include "qmult/poly_phase.hpp"
#include "qmult/seqcore.hpp"

namespace qmult {

enum class NormMethod { Direct, Product, BeamSearch, Grid };

const char* to_string(NormMethod m);

struct ScalePoint {
    std::size_t level = 0;  // N = q^level
    std::uint64_t N = 0;
    double value = 0.0;
    std::vector<double> argmax;  // maximizing phase coefficients, when any
};

struct NormReport {
    std::vector<ScalePoint> scales;
    double fitted_exponent = 0.0;
    double fit_residual = 0.0;
    NormMethod method = NormMethod::Direct;
};

// Returned by fit_gelfond_exponent when every measured value is zero.
inline constexpr double kDegenerateExponent = -std::numeric_limits<double>::infinity();

// E_{n<N} f(n) e(p(n)).
std::complex<double> phase_correlation(const Sequence& f, const PolyPhase& p, std::uint64_t N);

// E_{n<N} f(n+M) e(p(n)).
std::complex<double> shifted_correlation(const Sequence& f, std::uint64_t M, const PolyPhase& p,
                                         std::uint64_t N);

// |E_{a<q} f(a q^l) e(-a q^l alpha)|.
double digit_factor(const QMultSeq& f, std::size_t l, Phase alpha);

// |E_{n<q^K} f(n) e(-n alpha)| through its per-digit factorization.
double linear_correlation_product(const QMultSeq& f, Phase alpha, std::size_t K);

// prod_{j<n} |cos pi (2^j alpha + tau)|, the normalized generalized
// Thue-Morse trigonometric product.
double trig_product_gtm(Phase tau, Phase alpha, std::size_t n);

// A candidate alpha = sum_i digits[i-1] q^{-i} on the grid of denominator
// q^K, with the product of all K digit factors.
struct DigitCandidate {
    std::vector<unsigned> digits;  // d_1 .. d_K
    std::vector<double> factors;   // factor for level l = 0 .. K-1
    double score = 1.0;

    Phase alpha(unsigned q) const;
};

// One beam pass over the base-q digits of alpha. Level l depends only on
// the digits d_{l+1}, ..., d_K, so digits are fixed from d_K downwards and
// every partial score is an exact partial product. Returns the final beam,
// best first. beam >= q^K makes the pass exhaustive.
std::vector<DigitCandidate> beam_search_digits(const QMultSeq& f, std::size_t K, std::size_t beam);

struct LinearSup {
    Phase alpha;            // maximizer found
    double value = 0.0;     // linear_correlation_product(f, alpha, K)
    Phase grid_alpha;       // best q-adic grid point
    double grid_value = 0.0;
};

// Lower bound on sup_alpha |E_{n<q^K} f(n) e(-n alpha)|. The result for
// width w is the best over all widths <= min(w, q^K), each followed by a
// local continuous refinement around its leading candidates, so the
// reported value never decreases as the beam grows. Cost grows
// quadratically in the effective width.
LinearSup sup_linear_correlation(const QMultSeq& f, std::size_t K, std::size_t beam = 64);

struct PolySup {
    PolyPhase p;
    double value = 0.0;
};

// Lower bound on sup over real polynomials of degree <= d of
// |E_{n<N} f(n) e(p(n))|, by coordinate descent over the coefficients
// (highest degree first). Each coordinate step samples grid_density points
// of [0, 1), plus the same grid shifted by an irrational offset, then
// refines the best samples by golden-section search.
PolySup sup_poly_correlation(const Sequence& f, std::size_t degree, std::uint64_t N,
                             std::size_t grid_density = 256);

// prod_{t<L} E_{a<q} f(a q^t), the Delange main term at N = q^L.
std::complex<double> cesaro_mean(const QMultSeq& f, std::size_t L);

// sum_{t<T} (1 - Re E_{a<q} f(a q^t)).
double delange_criterion(const QMultSeq& f, std::size_t T);

// max_x |cos pi (x + tau) cos pi (2x + tau)| over a 2^16 grid with local
// refinement.
double mrs_factor_bound(Phase tau);

// 1/2 log|cos pi (1/3 + tau) cos pi (2/3 + tau)|, valid for 0.43 < tau < 0.57.
double beta_closed_form(double tau);

// Gelfond exponent 1 + beta(tau) / ln 2 implied by beta_closed_form.
double gtm_gelfond_exponent(double tau);

struct GelfondOptions {
    std::size_t order = 1;
    std::size_t min_level = 8;
    std::size_t max_level = 18;
    std::size_t beam = 64;
    std::size_t grid_density = 64;
    // Levels below this are measured but left out of the fit.
    std::size_t min_fit_level = 6;
};

// Measures sup correlations at N = q^L and fits the slope of
// log(N * value) against log N.
NormReport fit_gelfond_exponent(const Sequence& f, const GelfondOptions& options);

}  // namespace qmult
