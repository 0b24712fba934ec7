#include "qmult/expsums.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qmult/errors.hpp"
#include "qmult/fit.hpp"
#include "qmult/summation.hpp"

namespace qmult {

const char* to_string(NormMethod m) {
    switch (m) {
        case NormMethod::Direct: return "direct";
        case NormMethod::Product: return "product";
        case NormMethod::BeamSearch: return "beam";
        case NormMethod::Grid: return "grid";
    }
    return "?";
}

std::complex<double> phase_correlation(const Sequence& f, const PolyPhase& p, std::uint64_t N) {
    if (N == 0) throw InvalidArgument("phase_correlation needs N >= 1");
    const auto fp = f.phases(N);
    const PolyPhaseEvaluator poly(p);
    const auto total = deterministic_sum<std::complex<double>>(
        N, [&](std::uint64_t n) { return unit(fp[n] + poly(n)); });
    return total / static_cast<double>(N);
}

std::complex<double> shifted_correlation(const Sequence& f, std::uint64_t M, const PolyPhase& p,
                                         std::uint64_t N) {
    if (N == 0) throw InvalidArgument("shifted_correlation needs N >= 1");
    const PolyPhaseEvaluator poly(p);
    const auto total = deterministic_sum<std::complex<double>>(
        N, [&](std::uint64_t n) { return unit(f.phase(n + M) + poly(n)); });
    return total / static_cast<double>(N);
}

namespace {

// q^l mod 2^64; scaling a Phase by it is exact modulo 1.
std::uint64_t wrapped_power(unsigned q, std::size_t l) {
    std::uint64_t r = 1;
    for (std::size_t i = 0; i < l; ++i) r *= q;
    return r;
}

double factor_at(std::span<const Phase> row, Phase x) {
    std::complex<double> acc = 0.0;
    for (std::size_t a = 0; a < row.size(); ++a) acc += unit(row[a] - x * a);
    return std::abs(acc) / static_cast<double>(row.size());
}

// q^k, or 0 when it does not fit below 2^62.
std::uint64_t exact_power(unsigned q, std::size_t k) {
    std::uint64_t r = 1;
    for (std::size_t i = 0; i < k; ++i) {
        if (r > (std::uint64_t{1} << 62) / q) return 0;
        r *= q;
    }
    return r;
}

}  // namespace

double digit_factor(const QMultSeq& f, std::size_t l, Phase alpha) {
    return factor_at(f.row(l), alpha * wrapped_power(f.base(), l));
}

double linear_correlation_product(const QMultSeq& f, Phase alpha, std::size_t K) {
    double product = 1.0;
    std::uint64_t ql = 1;
    for (std::size_t l = 0; l < K && product != 0.0; ++l) {
        product *= factor_at(f.row(l), alpha * ql);
        ql *= f.base();
    }
    return product;
}

double trig_product_gtm(Phase tau, Phase alpha, std::size_t n) {
    double product = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
        // |cos pi x| only depends on x mod 1
        const Phase x = alpha * (j < 64 ? std::uint64_t{1} << j : 0) + tau;
        product *= std::abs(std::cos(std::numbers::pi * x.value()));
    }
    return product;
}

Phase DigitCandidate::alpha(unsigned q) const {
    const std::uint64_t den = exact_power(q, digits.size());
    if (den == 0) throw InvalidArgument("alpha grid q^K exceeds 2^62");
    std::uint64_t num = 0;
    for (unsigned d : digits) num = num * q + d;
    return Phase::ratio(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
}

std::vector<DigitCandidate> beam_search_digits(const QMultSeq& f, std::size_t K, std::size_t beam) {
    if (beam == 0) throw InvalidArgument("beam width must be >= 1");
    const unsigned q = f.base();
    if (exact_power(q, K) == 0) throw InvalidArgument("alpha grid q^K exceeds 2^62");

    struct State {
        DigitCandidate cand;
        std::uint64_t tail = 0;  // sum_{i>l} d_i q^{K-i}
    };
    std::vector<State> current(1);
    current[0].cand.digits.assign(K, 0);
    current[0].cand.factors.assign(K, 1.0);

    struct Expansion {
        std::size_t parent;
        unsigned digit;
        double factor;
        double score;
        std::uint64_t tail;
    };
    std::vector<Expansion> expansions;
    for (std::size_t step = 0; step < K; ++step) {
        const std::size_t l = K - 1 - step;
        const std::uint64_t place = exact_power(q, K - l - 1);
        const std::int64_t den = static_cast<std::int64_t>(place * q);
        const auto row = f.row(l);
        expansions.clear();
        for (std::size_t i = 0; i < current.size(); ++i) {
            for (unsigned d = 0; d < q; ++d) {
                const std::uint64_t tail = current[i].tail + d * place;
                const double factor = factor_at(row, Phase::ratio(static_cast<std::int64_t>(tail), den));
                expansions.push_back({i, d, factor, current[i].cand.score * factor, tail});
            }
        }
        const std::size_t keep = std::min(beam, expansions.size());
        auto better = [](const Expansion& a, const Expansion& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.tail < b.tail;
        };
        std::partial_sort(expansions.begin(), expansions.begin() + keep, expansions.end(), better);
        std::vector<State> next;
        next.reserve(keep);
        for (std::size_t k = 0; k < keep; ++k) {
            const auto& e = expansions[k];
            State s = current[e.parent];
            s.cand.digits[l] = e.digit;
            s.cand.factors[l] = e.factor;
            s.cand.score = e.score;
            s.tail = e.tail;
            next.push_back(std::move(s));
        }
        current = std::move(next);
    }
    std::vector<DigitCandidate> out;
    out.reserve(current.size());
    for (auto& s : current) out.push_back(std::move(s.cand));
    return out;
}

namespace {

template <class F>
double golden_maximize(F&& g, double lo, double hi, int iterations, double* arg) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double gc = g(c), gd = g(d);
    for (int i = 0; i < iterations; ++i) {
        if (gc >= gd) {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d);
        }
    }
    if (gc >= gd) {
        *arg = c;
        return gc;
    }
    *arg = d;
    return gd;
}

// Best product value within one grid step of alpha0.
std::pair<Phase, double> refine_linear(const QMultSeq& f, std::size_t K, Phase alpha0, double value0) {
    const std::uint64_t qk = exact_power(f.base(), K);
    if (qk == 0) return {alpha0, value0};
    const double step = std::ldexp(1.0, 64) / static_cast<double>(qk) / 32.0;
    auto at = [&](double offset) {
        const auto shift = static_cast<std::int64_t>(std::llround(offset));
        return alpha0 + Phase::from_raw(static_cast<std::uint64_t>(shift));
    };
    auto g = [&](double offset) { return linear_correlation_product(f, at(offset), K); };
    double best_offset = 0.0, best = value0;
    for (int k = -32; k <= 32; ++k) {
        const double v = g(k * step);
        if (v > best) {
            best = v;
            best_offset = k * step;
        }
    }
    double arg = best_offset;
    const double v = golden_maximize(g, best_offset - step, best_offset + step, 60, &arg);
    if (v > best) {
        best = v;
        best_offset = arg;
    }
    return {at(best_offset), best};
}

}  // namespace

LinearSup sup_linear_correlation(const QMultSeq& f, std::size_t K, std::size_t beam) {
    if (beam == 0) throw InvalidArgument("beam width must be >= 1");
    LinearSup best;
    if (K == 0) {
        best.value = best.grid_value = 1.0;
        return best;
    }
    const std::uint64_t grid = exact_power(f.base(), K);
    if (grid == 0) throw InvalidArgument("alpha grid q^K exceeds 2^62");
    const std::size_t widest = static_cast<std::size_t>(std::min<std::uint64_t>(beam, grid));
    best.value = -1.0;
    best.grid_value = -1.0;
    for (std::size_t w = 1; w <= widest; ++w) {
        const auto cands = beam_search_digits(f, K, w);
        if (cands.front().score > best.grid_value) {
            best.grid_value = cands.front().score;
            best.grid_alpha = cands.front().alpha(f.base());
        }
        const std::size_t refine = std::min<std::size_t>(4, cands.size());
        for (std::size_t i = 0; i < refine; ++i) {
            const auto [alpha, value] = refine_linear(f, K, cands[i].alpha(f.base()), cands[i].score);
            if (value > best.value) {
                best.value = value;
                best.alpha = alpha;
            }
        }
    }
    return best;
}

constexpr double kGridOffset = 0.6180339887498949;

PolySup sup_poly_correlation(const Sequence& f, std::size_t degree, std::uint64_t N,
                             std::size_t grid_density) {
    if (degree < 1) throw InvalidArgument("sup_poly_correlation needs degree >= 1");
    if (N == 0) throw InvalidArgument("sup_poly_correlation needs N >= 1");
    if (grid_density < 2) throw InvalidArgument("grid density must be >= 2");
    const auto fp = f.phases(N);
    std::vector<double> coeffs(degree + 1, 0.0);
    std::vector<Phase> base(N);
    std::vector<std::uint64_t> power(N);

    auto objective = [&](double c) {
        const Phase cp(c);
        const auto s = deterministic_sum<std::complex<double>>(
            N, [&](std::uint64_t n) { return unit(base[n] + cp * power[n]); });
        return std::abs(s) / static_cast<double>(N);
    };

    double best = std::abs(phase_correlation(f, PolyPhase(coeffs), N));
    for (int pass = 0; pass < 8; ++pass) {
        const double before = best;
        for (std::size_t j = degree; j >= 1; --j) {
            PolyPhase others(coeffs);
            others.coeffs[j] = 0.0;
            const PolyPhaseEvaluator eval_others(others);
            for (std::uint64_t n = 0; n < N; ++n) {
                base[n] = fp[n] + eval_others(n);
                std::uint64_t pw = 1;
                for (std::size_t i = 0; i < j; ++i) pw *= n;
                power[n] = pw;
            }
            // The plain grid catches rational optima; a second grid shifted by an
            // irrational offset avoids points where q-adic structure makes
            // every sample vanish.
            std::vector<std::pair<double, double>> samples;
            samples.reserve(2 * grid_density);
            for (double offset : {0.0, kGridOffset}) {
                for (std::size_t k = 0; k < grid_density; ++k) {
                    const double c = (static_cast<double>(k) + offset) / static_cast<double>(grid_density);
                    samples.emplace_back(objective(c), c);
                }
            }
            const std::size_t starts = std::min<std::size_t>(4, samples.size());
            std::partial_sort(samples.begin(), samples.begin() + starts, samples.end(),
                              [](const auto& a, const auto& b) {
                                  return a.first != b.first ? a.first > b.first : a.second < b.second;
                              });
            double arg = coeffs[j], value = best;
            const double width = 1.0 / static_cast<double>(grid_density);
            for (std::size_t i = 0; i < starts; ++i) {
                if (samples[i].first > value) {
                    value = samples[i].first;
                    arg = samples[i].second;
                }
                double refined_arg = samples[i].second;
                const double refined = golden_maximize(objective, refined_arg - width, refined_arg + width, 40,
                                                       &refined_arg);
                if (refined > value) {
                    value = refined;
                    arg = refined_arg - std::floor(refined_arg);
                }
            }
            if (value > best) {
                best = value;
                coeffs[j] = arg;
            }
        }
        if (best - before <= 1e-12) break;
    }
    return {PolyPhase(coeffs), best};
}

std::complex<double> cesaro_mean(const QMultSeq& f, std::size_t L) {
    std::complex<double> product = 1.0;
    for (std::size_t t = 0; t < L; ++t) {
        std::complex<double> mean = 0.0;
        for (Phase p : f.row(t)) mean += unit(p);
        product *= mean / static_cast<double>(f.base());
    }
    return product;
}

double delange_criterion(const QMultSeq& f, std::size_t T) {
    if (T < 1) throw InvalidArgument("delange_criterion needs T >= 1");
    CompensatedSum total;
    for (std::size_t t = 0; t < T; ++t) {
        double re = 0.0;
        for (Phase p : f.row(t)) re += unit(p).real();
        total.add(1.0 - re / static_cast<double>(f.base()));
    }
    return total.value();
}

double mrs_factor_bound(Phase tau) {
    const double t = tau.value();
    auto h = [t](double x) {
        return std::abs(std::cos(std::numbers::pi * (x + t)) * std::cos(std::numbers::pi * (2 * x + t)));
    };
    constexpr std::size_t grid = std::size_t{1} << 16;
    std::vector<std::pair<double, double>> samples(grid);
    for (std::size_t k = 0; k < grid; ++k) {
        const double x = static_cast<double>(k) / grid;
        samples[k] = {h(x), x};
    }
    std::partial_sort(samples.begin(), samples.begin() + 8, samples.end(), std::greater<>());
    double best = samples.front().first;
    for (std::size_t i = 0; i < 8; ++i) {
        double arg = 0.0;
        const double x = samples[i].second;
        best = std::max(best, golden_maximize(h, x - 1.0 / grid, x + 1.0 / grid, 80, &arg));
    }
    return best;
}

double beta_closed_form(double tau) {
    if (!(tau > 0.43 && tau < 0.57))
        throw InvalidArgument("beta_closed_form is only valid for 0.43 < tau < 0.57");
    const double pi = std::numbers::pi;
    return 0.5 * std::log(std::abs(std::cos(pi * (1.0 / 3.0 + tau)) * std::cos(pi * (2.0 / 3.0 + tau))));
}

double gtm_gelfond_exponent(double tau) { return 1.0 + beta_closed_form(tau) / std::numbers::ln2; }

NormReport fit_gelfond_exponent(const Sequence& f, const GelfondOptions& options) {
    if (options.order < 1) throw InvalidArgument("Gelfond order must be >= 1");
    if (options.max_level < options.min_level || options.max_level - options.min_level + 1 < 3)
        throw InvalidArgument("Gelfond fit needs at least 3 levels");
    const unsigned q = f.base();
    NormReport report;
    const QMultSeq* table = options.order == 1 ? f.qmult() : nullptr;
    report.method = table ? NormMethod::BeamSearch : NormMethod::Grid;

    for (std::size_t L = options.min_level; L <= options.max_level; ++L) {
        const std::uint64_t N = exact_power(q, L);
        if (N == 0) throw InvalidArgument("q^L exceeds 2^62");
        ScalePoint point{L, N, 0.0, {}};
        if (table) {
            const auto sup = sup_linear_correlation(*table, L, options.beam);
            point.value = sup.value;
            point.argmax = {sup.alpha.value()};
        } else {
            const auto sup = sup_poly_correlation(f, options.order, N, options.grid_density);
            point.value = sup.value;
            point.argmax = sup.p.coeffs;
        }
        report.scales.push_back(std::move(point));
    }

    std::vector<double> x, y;
    for (const auto& s : report.scales) {
        if (s.level < options.min_fit_level || s.value <= 0.0) continue;
        x.push_back(std::log(static_cast<double>(s.N)));
        y.push_back(std::log(static_cast<double>(s.N) * s.value));
    }
    if (x.size() < 2) {
        report.fitted_exponent = kDegenerateExponent;
        report.fit_residual = 0.0;
        return report;
    }
    const auto fit = least_squares(x, y);
    report.fitted_exponent = fit.slope;
    report.fit_residual = fit.rms_residual;
    return report;
}

}  // namespace qmult
