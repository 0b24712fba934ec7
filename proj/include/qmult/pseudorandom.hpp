#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "qmult/seqcore.hpp"

namespace qmult {

// E_{n<N} f(n + r) conj(f(n)).
std::complex<double> gamma_finite(const Sequence& f, std::uint64_t r, std::uint64_t N);

struct GammaSeries {
    std::complex<double> value;
    // Upper bound on |gamma_r - value|.
    double tail_bound = 0.0;
};

// gamma_r = lim E_{n<N} f(n + r) conj(f(n)) for q-multiplicative f, by a
// digit recursion over the carry of n + r: once the carry has died out above
// the digits of r, the remaining factors are 1, so gamma_r is the total
// weight absorbed by then. Truncating after depth digits leaves the
// non-absorbed probability mass (r / q^depth once depth exceeds the digits
// of r) as the error bound. For r = 1 this is
// sum_l sum_{a=1}^{q-1} q^-(l+1) f(a q^l) conj(f(a q^l - 1)).
GammaSeries gamma_series(const QMultSeq& f, std::uint64_t r, std::size_t depth);

struct GammaMethod {
    enum class Kind { Finite, Series };
    Kind kind = Kind::Finite;
    std::uint64_t N = std::uint64_t{1} << 16;  // Finite
    std::size_t depth = 30;                    // Series

    static GammaMethod finite(std::uint64_t N) { return {Kind::Finite, N, 0}; }
    static GammaMethod series(std::size_t depth) { return {Kind::Series, 0, depth}; }
};

struct CorrelationSeries {
    std::vector<std::complex<double>> gamma;  // r = 0 .. R-1
    std::vector<double> error_estimate;
    GammaMethod method;
};

// gamma_r for r < R. Finite errors are 2r/N when f is q-multiplicative and
// N a power of its base, otherwise the measured change from N/2 to N.
// Series errors are the tail bounds.
CorrelationSeries correlation_series(const Sequence& f, std::uint64_t R, const GammaMethod& method);

struct DensityPoint {
    std::uint64_t R = 0;
    double density = 0.0;  // E_{r<R} |gamma_r|^2
};

struct BertrandiasReport {
    double value = 0.0;                // density at R
    std::vector<DensityPoint> ladder;  // R' = q, q^2, ... below R, then R
    // c in E_{r<R}|gamma_r|^2 ~ R^-c, fitted over ladder points with
    // R' >= fit_min_R; 0 when fewer than two such points are positive.
    double decay_exponent = 0.0;
};

BertrandiasReport bertrandias_density(const Sequence& f, std::uint64_t R, const GammaMethod& method,
                                      std::uint64_t fit_min_R = 16);

}  // namespace qmult
