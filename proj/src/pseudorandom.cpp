#include "qmult/pseudorandom.hpp"

#include <cmath>

#include "qmult/errors.hpp"
#include "qmult/fit.hpp"
#include "qmult/parallel.hpp"
#include "qmult/summation.hpp"

namespace qmult {

namespace {

std::complex<double> correlation(std::span<const Phase> fp, std::uint64_t r, std::uint64_t N) {
    return deterministic_sum<std::complex<double>>(N, [&](std::uint64_t n) { return unit(fp[n + r] - fp[n]); }) /
           static_cast<double>(N);
}

bool is_power_of(unsigned q, std::uint64_t N) {
    while (N > 1 && N % q == 0) N /= q;
    return N == 1;
}

}  // namespace

std::complex<double> gamma_finite(const Sequence& f, std::uint64_t r, std::uint64_t N) {
    if (N < 1) throw InvalidArgument("gamma_finite needs N >= 1");
    const auto fp = f.phases(N + r);
    return correlation(fp, r, N);
}

GammaSeries gamma_series(const QMultSeq& f, std::uint64_t r, std::size_t depth) {
    if (depth < 1) throw InvalidArgument("gamma_series needs depth >= 1");
    const unsigned q = f.base();
    const double inv_q = 1.0 / q;
    // Weight and probability of the carry states 0 and 1.
    std::complex<double> weight[2] = {1.0, 0.0};
    double mass[2] = {1.0, 0.0};
    ComplexCompensatedSum absorbed;
    std::uint64_t rest = r;
    for (std::size_t t = 0; t < depth; ++t) {
        if (rest == 0) {
            absorbed.add(weight[0]);
            weight[0] = 0.0;
            mass[0] = 0.0;
        }
        const auto digit = static_cast<unsigned>(rest % q);
        rest /= q;
        const auto row = f.row(t);
        std::complex<double> next_weight[2] = {0.0, 0.0};
        double next_mass[2] = {0.0, 0.0};
        for (unsigned c = 0; c < 2; ++c) {
            if (mass[c] == 0.0) continue;
            for (unsigned a = 0; a < q; ++a) {
                const unsigned sum = a + digit + c;
                const unsigned b = sum % q, carry = sum / q;
                next_weight[carry] += weight[c] * unit(row[b] - row[a]) * inv_q;
                next_mass[carry] += mass[c] * inv_q;
            }
        }
        for (unsigned c = 0; c < 2; ++c) {
            weight[c] = next_weight[c];
            mass[c] = next_mass[c];
        }
    }
    if (rest == 0) {
        absorbed.add(weight[0]);
        mass[0] = 0.0;
    }
    return {absorbed.value(), mass[0] + mass[1]};
}

CorrelationSeries correlation_series(const Sequence& f, std::uint64_t R, const GammaMethod& method) {
    if (R < 1) throw InvalidArgument("correlation series need R >= 1");
    CorrelationSeries out;
    out.method = method;
    out.gamma.resize(R);
    out.error_estimate.resize(R);
    if (method.kind == GammaMethod::Kind::Series) {
        const auto* table = f.qmult();
        if (!table) throw InvalidArgument("the series method needs a q-multiplicative table");
        if (method.depth < 1) throw InvalidArgument("series depth must be >= 1");
        parallel_for(R, [&](std::size_t r) {
            const auto g = gamma_series(*table, r, method.depth);
            out.gamma[r] = g.value;
            out.error_estimate[r] = g.tail_bound;
        });
        return out;
    }
    const std::uint64_t N = method.N;
    if (N < 2) throw InvalidArgument("finite correlations need N >= 2");
    const auto fp = f.phases(N + R);
    const bool exact_scale = f.qmult() && is_power_of(f.base(), N);
    parallel_for(R, [&](std::size_t r) {
        out.gamma[r] = correlation(fp, r, N);
        out.error_estimate[r] = exact_scale ? 2.0 * static_cast<double>(r) / static_cast<double>(N)
                                            : std::abs(out.gamma[r] - correlation(fp, r, N / 2));
    });
    return out;
}

BertrandiasReport bertrandias_density(const Sequence& f, std::uint64_t R, const GammaMethod& method,
                                      std::uint64_t fit_min_R) {
    if (R < 1) throw InvalidArgument("density needs R >= 1");
    const auto series = correlation_series(f, R, method);
    std::vector<std::uint64_t> rungs;
    for (std::uint64_t x = f.base(); x < R; x *= f.base()) rungs.push_back(x);
    rungs.push_back(R);

    BertrandiasReport report;
    CompensatedSum acc;
    std::size_t rung = 0;
    for (std::uint64_t r = 0; r < R; ++r) {
        acc.add(std::norm(series.gamma[r]));
        if (r + 1 == rungs[rung]) {
            report.ladder.push_back({r + 1, acc.value() / static_cast<double>(r + 1)});
            ++rung;
        }
    }
    report.value = report.ladder.back().density;

    std::vector<double> x, y;
    for (const auto& p : report.ladder) {
        if (p.R < fit_min_R || p.density <= 0.0) continue;
        x.push_back(std::log(static_cast<double>(p.R)));
        y.push_back(std::log(p.density));
    }
    if (x.size() >= 2) report.decay_exponent = -least_squares(x, y).slope;
    return report;
}

}  // namespace qmult
