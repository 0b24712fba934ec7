#include "qmult/gowers.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "qmult/errors.hpp"
#include "qmult/expsums.hpp"
#include "qmult/fit.hpp"
#include "qmult/parallel.hpp"
#include "qmult/summation.hpp"

namespace qmult {

namespace {

void check_order(std::size_t s) {
    if (s < 1 || s > kMaxGowersOrder)
        throw InvalidArgument("order s must be in [1, " + std::to_string(kMaxGowersOrder) + "], got " +
                              std::to_string(s));
}

void check_budget(const std::string& what, double work, std::uint64_t budget) {
    if (work > static_cast<double>(budget)) throw BudgetExceeded(what, work, static_cast<double>(budget));
}

std::uint64_t checked_power(unsigned q, std::size_t L) {
    std::uint64_t r = 1;
    for (std::size_t i = 0; i < L; ++i) {
        if (r > (std::uint64_t{1} << 62) / q) throw InvalidArgument("q^L exceeds 2^62");
        r *= q;
    }
    return r;
}

bool odd_weight(std::size_t omega) { return std::popcount(omega) % 2 == 1; }

// Walks (n_1, ..., n_{s-1}) with all subset sums spanning at most N - 1,
// calling leaf(offsets, lo, hi) where offsets[w] = w . n' and [lo, hi] is
// the range of n_0 keeping every offset vertex inside [0, N). When
// fixed_first is set, n_1 is pinned to that value.
template <class Leaf>
class OffsetWalker {
  public:
    OffsetWalker(std::size_t s, std::int64_t N, Leaf& leaf)
        : s_(s), N_(N), offsets_(std::size_t{1} << (s - 1)), leaf_(leaf) {}

    void run(const std::int64_t* fixed_first) {
        offsets_[0] = 0;
        walk(1, 1, 0, 0, fixed_first);
    }

  private:
    void walk(std::size_t i, std::size_t size, std::int64_t mn, std::int64_t mx, const std::int64_t* fixed) {
        if (i == s_) {
            leaf_(std::span<const std::int64_t>(offsets_.data(), size), -mn, N_ - 1 - mx);
            return;
        }
        const std::int64_t bound = N_ - 1 - (mx - mn);
        std::int64_t lo = -bound, hi = bound;
        if (i == 1 && fixed) {
            if (*fixed < lo || *fixed > hi) return;
            lo = hi = *fixed;
        }
        for (std::int64_t n = lo; n <= hi; ++n) {
            for (std::size_t j = 0; j < size; ++j) offsets_[size + j] = offsets_[j] + n;
            walk(i + 1, 2 * size, std::min(mn, mn + n), std::max(mx, mx + n), nullptr);
        }
    }

    std::size_t s_;
    std::int64_t N_;
    std::vector<std::int64_t> offsets_;
    Leaf& leaf_;
};

template <class Leaf>
void walk_offsets(std::size_t s, std::int64_t N, Leaf& leaf, const std::int64_t* fixed_first = nullptr) {
    OffsetWalker<Leaf> walker(s, N, leaf);
    walker.run(fixed_first);
}

std::vector<std::complex<double>> values(const Sequence& f, std::uint64_t count) {
    const auto phases = f.phases(count);
    std::vector<std::complex<double>> out(count);
    for (std::uint64_t n = 0; n < count; ++n) out[n] = unit(phases[n]);
    return out;
}

}  // namespace

CarryVector::CarryVector(std::size_t s) : s_(s), entries_(std::size_t{1} << s, 0) { check_order(s); }

CarryVector::CarryVector(std::size_t s, std::vector<unsigned> entries) : s_(s), entries_(std::move(entries)) {
    check_order(s);
    if (entries_.size() != (std::size_t{1} << s))
        throw InvalidArgument("carry vector of order " + std::to_string(s) + " needs " +
                              std::to_string(std::size_t{1} << s) + " entries, got " +
                              std::to_string(entries_.size()));
    for (unsigned c : entries_)
        if (c > s) throw InvalidArgument("carry entries must lie in [0, s]");
}

bool CarryVector::is_zero() const {
    return std::all_of(entries_.begin(), entries_.end(), [](unsigned c) { return c == 0; });
}

std::uint64_t CarryVector::key() const {
    std::uint64_t k = 0;
    for (std::size_t w = entries_.size(); w-- > 0;) k = (k << 3) | entries_[w];
    return k;
}

std::string CarryVector::to_string() const {
    std::string out;
    for (std::size_t w = 0; w < entries_.size(); ++w) {
        if (w) out += ',';
        out += std::to_string(entries_[w]);
    }
    return out;
}

std::vector<CarryVector> CarryVector::all(std::size_t s) {
    check_order(s);
    const std::size_t size = std::size_t{1} << s;
    std::vector<CarryVector> out;
    std::vector<unsigned> e(size, 0);
    while (true) {
        out.emplace_back(s, e);
        std::size_t i = 0;
        while (i < size && e[i] == s) e[i++] = 0;
        if (i == size) break;
        ++e[i];
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.key() < b.key(); });
    return out;
}

void enumerate_parallelepipeds(std::size_t s, std::uint64_t N,
                               const std::function<void(std::span<const std::int64_t>)>& visit) {
    check_order(s);
    if (N == 0) throw InvalidArgument("parallelepipeds need N >= 1");
    const auto n_max = static_cast<std::int64_t>(N) - 1;
    std::vector<std::int64_t> tuple(s + 1);
    std::vector<std::int64_t> vertices(std::size_t{1} << s);
    std::function<void(std::size_t, std::size_t, std::int64_t, std::int64_t)> walk =
        [&](std::size_t i, std::size_t size, std::int64_t mn, std::int64_t mx) {
            if (i > s) {
                visit(tuple);
                return;
            }
            for (std::int64_t n = -mn; n <= n_max - mx; ++n) {
                tuple[i] = n;
                for (std::size_t j = 0; j < size; ++j) vertices[size + j] = vertices[j] + n;
                walk(i + 1, 2 * size, std::min(mn, mn + n), std::max(mx, mx + n));
            }
        };
    for (std::int64_t n0 = 0; n0 <= n_max; ++n0) {
        tuple[0] = n0;
        vertices[0] = n0;
        walk(1, 1, n0, n0);
    }
}

std::uint64_t count_parallelepipeds(std::size_t s, std::uint64_t N) {
    check_order(s);
    if (N == 0) throw InvalidArgument("parallelepipeds need N >= 1");
    std::uint64_t count = 0;
    auto leaf = [&](std::span<const std::int64_t>, std::int64_t lo, std::int64_t hi) {
        const auto len = static_cast<std::uint64_t>(hi - lo + 1);
        count += len * len;
    };
    walk_offsets(s, static_cast<std::int64_t>(N), leaf);
    return count;
}

double gowers_norm_bruteforce(const Sequence& f, std::size_t s, std::uint64_t N, std::uint64_t budget) {
    check_order(s);
    if (N == 0) throw InvalidArgument("Gowers norm needs N >= 1");
    const std::uint64_t count = count_parallelepipeds(s, N);
    check_budget("brute-force Gowers norm", static_cast<double>(count) * static_cast<double>(1u << s), budget);
    const auto F = values(f, N);
    const std::size_t size = std::size_t{1} << s;
    ComplexCompensatedSum acc;
    enumerate_parallelepipeds(s, N, [&](std::span<const std::int64_t> n) {
        std::complex<double> prod = 1.0;
        for (std::size_t w = 0; w < size; ++w) {
            std::int64_t v = n[0];
            for (std::size_t i = 0; i < s; ++i)
                if (w >> i & 1) v += n[i + 1];
            const auto z = F[static_cast<std::size_t>(v)];
            prod *= odd_weight(w) ? std::conj(z) : z;
        }
        acc.add(prod);
    });
    const auto inner = acc.value() / static_cast<double>(count);
    if (std::abs(inner.imag()) > 1e-10 || inner.real() < -1e-12)
        throw InternalError("Gowers inner average is not a nonnegative real: " + std::to_string(inner.real()) +
                            " + " + std::to_string(inner.imag()) + "i");
    return std::pow(std::max(inner.real(), 0.0), 1.0 / static_cast<double>(size));
}

std::complex<double> parallelepiped_average_n(const Sequence& f, const CarryVector& r, std::uint64_t N,
                                              std::uint64_t budget) {
    if (N == 0) throw InvalidArgument("parallelepiped average needs N >= 1");
    const std::size_t s = r.order();
    const double width = 2.0 * static_cast<double>(N) - 1.0;
    check_budget("parallelepiped average",
                 std::pow(width, static_cast<double>(s - 1)) * static_cast<double>(N) * static_cast<double>(1u << s),
                 budget);
    const auto F = values(f, N + s);
    std::vector<std::complex<double>> Fc(F.size());
    std::transform(F.begin(), F.end(), Fc.begin(), [](auto z) { return std::conj(z); });

    const std::size_t half = std::size_t{1} << (s - 1);
    const auto n = static_cast<std::int64_t>(N);
    const std::size_t slots = s == 1 ? 1 : static_cast<std::size_t>(2 * n - 1);
    std::vector<std::complex<double>> sums(slots);
    std::vector<std::uint64_t> counts(slots);

    parallel_for(slots, [&](std::size_t slot) {
        ComplexCompensatedSum acc;
        std::uint64_t count = 0;
        std::vector<const std::complex<double>*> low(half), high(half);
        auto leaf = [&](std::span<const std::int64_t> offsets, std::int64_t lo, std::int64_t hi) {
            for (std::size_t w = 0; w < half; ++w) {
                low[w] = (odd_weight(w) ? Fc : F).data() + offsets[w] + r[w];
                high[w] = (odd_weight(w) ? F : Fc).data() + offsets[w] + r[w | half];
            }
            ComplexCompensatedSum s0, s1;
            for (std::int64_t x = lo; x <= hi; ++x) {
                std::complex<double> p0 = low[0][x], p1 = high[0][x];
                for (std::size_t w = 1; w < half; ++w) {
                    p0 *= low[w][x];
                    p1 *= high[w][x];
                }
                s0.add(p0);
                s1.add(p1);
            }
            acc.add(s0.value() * s1.value());
            const auto len = static_cast<std::uint64_t>(hi - lo + 1);
            count += len * len;
        };
        if (s == 1) {
            walk_offsets(s, n, leaf);
        } else {
            const std::int64_t first = static_cast<std::int64_t>(slot) - (n - 1);
            walk_offsets(s, n, leaf, &first);
        }
        sums[slot] = acc.value();
        counts[slot] = count;
    });

    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    return pairwise_reduce<std::complex<double>>(sums) / static_cast<double>(total);
}

std::complex<double> parallelepiped_average(const Sequence& f, const CarryVector& r, std::size_t L,
                                            std::uint64_t budget) {
    return parallelepiped_average_n(f, r, checked_power(f.base(), L), budget);
}

double gowers_norm(const Sequence& f, std::size_t s, std::uint64_t N, std::uint64_t budget) {
    const auto inner = parallelepiped_average_n(f, CarryVector(s), N, budget);
    if (std::abs(inner.imag()) > 1e-10 || inner.real() < -1e-12)
        throw InternalError("Gowers inner average is not a nonnegative real: " + std::to_string(inner.real()) +
                            " + " + std::to_string(inner.imag()) + "i");
    return std::pow(std::max(inner.real(), 0.0), 1.0 / static_cast<double>(std::size_t{1} << s));
}

CarryVector carry_map(const CarryVector& r, std::span<const std::uint64_t> e, unsigned q, std::size_t l) {
    const std::size_t s = r.order();
    if (e.size() != s + 1) throw InvalidArgument("carry_map needs s + 1 digits");
    const std::uint64_t Q = checked_power(q, l);
    for (auto d : e)
        if (d >= Q) throw InvalidArgument("carry_map digits must be below q^l");
    std::vector<unsigned> out(r.size());
    for (std::size_t w = 0; w < r.size(); ++w) {
        std::uint64_t v = e[0] + r[w];
        for (std::size_t i = 0; i < s; ++i)
            if (w >> i & 1) v += e[i + 1];
        out[w] = static_cast<unsigned>(v / Q);
    }
    return CarryVector(s, std::move(out));
}

WeightRow weight_row(const QMultSeq& f, const CarryVector& r, std::size_t l, std::uint64_t budget) {
    const std::size_t s = r.order();
    const std::uint64_t Q = checked_power(f.base(), l);
    const double tuples = std::pow(static_cast<double>(Q), static_cast<double>(s + 1));
    check_budget("weight map row", tuples * static_cast<double>(r.size()), budget);
    const auto fp = f.phases(Q);
    std::map<CarryVector, ComplexCompensatedSum> acc;
    std::vector<std::uint64_t> e(s + 1, 0);
    std::vector<unsigned> carries(r.size());
    while (true) {
        Phase total;
        for (std::size_t w = 0; w < r.size(); ++w) {
            std::uint64_t v = e[0] + r[w];
            for (std::size_t i = 0; i < s; ++i)
                if (w >> i & 1) v += e[i + 1];
            const Phase p = fp[v % Q];
            total += odd_weight(w) ? -p : p;
            carries[w] = static_cast<unsigned>(v / Q);
        }
        acc[CarryVector(s, carries)].add(unit(total));
        std::size_t i = 0;
        while (i <= s && e[i] == Q - 1) e[i++] = 0;
        if (i > s) break;
        ++e[i];
    }
    WeightRow row;
    for (auto& [key, sum] : acc) row.emplace(key, sum.value() / tuples);
    return row;
}

WeightMap weight_map(const QMultSeq& f, std::size_t s, std::size_t l, std::uint64_t budget) {
    WeightMap map{s, l, {}};
    for (const auto& r : CarryVector::all(s)) map.rows.emplace(r, weight_row(f, r, l, budget));
    return map;
}

double recursion_error_constant(std::size_t s, unsigned q) {
    check_order(s);
    if (q < 2) throw InvalidArgument("base must be >= 2");
    return static_cast<double>(s * (s + 1));
}

std::map<CarryVector, RecursiveAverage> recursive_averages(const QMultSeq& f, std::size_t s, std::size_t L,
                                                           std::size_t l, std::uint64_t budget) {
    if (l > L) throw InvalidArgument("recursion needs l <= L");
    std::map<CarryVector, RecursiveAverage> out;
    const auto all = CarryVector::all(s);
    if (l == 0) {
        for (const auto& r : all) out.emplace(r, RecursiveAverage{parallelepiped_average(f, r, L, budget), 0.0});
        return out;
    }
    const Sequence coarse = shift(f, l);
    const double bound = recursion_error_constant(s, f.base()) *
                         std::pow(static_cast<double>(f.base()), -static_cast<double>(L - l));
    std::map<CarryVector, std::complex<double>> shorter;
    for (const auto& r : all) {
        const auto row = weight_row(f, r, l, budget);
        ComplexCompensatedSum acc;
        for (const auto& [next, w] : row) {
            auto it = shorter.find(next);
            if (it == shorter.end())
                it = shorter.emplace(next, parallelepiped_average(coarse, next, L - l, budget)).first;
            acc.add(w * it->second);
        }
        out.emplace(r, RecursiveAverage{acc.value(), bound});
    }
    return out;
}

RecursiveAverage recursive_average(const QMultSeq& f, const CarryVector& r, std::size_t L, std::size_t l,
                                   std::uint64_t budget) {
    if (l > L) throw InvalidArgument("recursion needs l <= L");
    if (l == 0) return {parallelepiped_average(f, r, L, budget), 0.0};
    const Sequence coarse = shift(f, l);
    ComplexCompensatedSum acc;
    for (const auto& [next, w] : weight_row(f, r, l, budget))
        acc.add(w * parallelepiped_average(coarse, next, L - l, budget));
    const double bound = recursion_error_constant(r.order(), f.base()) *
                         std::pow(static_cast<double>(f.base()), -static_cast<double>(L - l));
    return {acc.value(), bound};
}

const char* to_string(BoxCondition c) { return c == BoxCondition::None ? "none" : "sum-below-qL"; }

std::complex<double> box_average_exact(const QMultSeq& f, const CarryVector& r, std::size_t L,
                                       BoxCondition condition) {
    const std::size_t s = r.order();
    const std::size_t size = r.size();
    const unsigned q = f.base();
    const std::size_t tuples = static_cast<std::size_t>(std::pow(q, s + 1) + 0.5);
    const double inv_tuples = 1.0 / static_cast<double>(tuples);

    // Vertex sums omega . d for every digit tuple d in [q]^(s+1).
    std::vector<unsigned> vertex_sums(tuples * size);
    for (std::size_t t = 0; t < tuples; ++t) {
        std::vector<unsigned> d(s + 1);
        for (std::size_t i = 0, x = t; i <= s; ++i, x /= q) d[i] = static_cast<unsigned>(x % q);
        for (std::size_t w = 0; w < size; ++w) {
            unsigned v = d[0];
            for (std::size_t i = 0; i < s; ++i)
                if (w >> i & 1) v += d[i + 1];
            vertex_sums[t * size + w] = v;
        }
    }

    struct Mass {
        std::complex<double> weight;
        double probability = 0.0;
    };
    auto decode = [size](std::uint64_t key, std::vector<unsigned>& c) {
        for (std::size_t w = 0; w < size; ++w, key >>= 3) c[w] = static_cast<unsigned>(key & 7);
    };

    std::vector<std::pair<std::uint64_t, Mass>> states{{r.key(), Mass{1.0, 1.0}}};
    std::vector<unsigned> c(size);
    for (std::size_t t = 0; t < L; ++t) {
        const auto row = f.row(t);
        std::unordered_map<std::uint64_t, std::size_t> index;
        std::vector<std::pair<std::uint64_t, Mass>> next;
        for (const auto& [key, mass] : states) {
            decode(key, c);
            for (std::size_t d = 0; d < tuples; ++d) {
                Phase total;
                std::uint64_t next_key = 0;
                for (std::size_t w = size; w-- > 0;) {
                    const unsigned x = vertex_sums[d * size + w] + c[w];
                    const Phase p = row[x % q];
                    total += odd_weight(w) ? -p : p;
                    next_key = (next_key << 3) | (x / q);
                }
                auto [it, fresh] = index.emplace(next_key, next.size());
                if (fresh) next.push_back({next_key, Mass{}});
                auto& m = next[it->second].second;
                m.weight += mass.weight * unit(total) * inv_tuples;
                m.probability += mass.probability * inv_tuples;
            }
        }
        std::sort(next.begin(), next.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        states = std::move(next);
    }

    ComplexCompensatedSum value;
    CompensatedSum probability;
    for (const auto& [key, mass] : states) {
        decode(key, c);
        if (condition == BoxCondition::SumBelowQL && c[size - 1] != 0) continue;
        Phase total;
        for (std::size_t w = 0; w < size; ++w) {
            const Phase p = f.scaled_phase(c[w], L);
            total += odd_weight(w) ? -p : p;
        }
        value.add(mass.weight * unit(total));
        probability.add(mass.probability);
    }
    if (probability.value() <= 0.0)
        throw InvalidArgument("the conditioning event e_0 + ... + e_s + r_{1..1} < q^L is empty");
    return value.value() / probability.value();
}

BlockPolicy BlockPolicy::constant(std::size_t length, std::size_t blocks, std::size_t l0) {
    return BlockPolicy{std::vector<std::size_t>(blocks, length), l0};
}

EpsilonLedger epsilon_ledger(const QMultSeq& f, std::size_t s, const BlockPolicy& policy, std::uint64_t budget) {
    check_order(s);
    if (policy.lengths.empty()) throw InvalidArgument("epsilon ledger needs at least one block");
    if (policy.l0 < 1) throw InvalidArgument("minimal block length l0 must be >= 1");
    for (auto len : policy.lengths)
        if (len < policy.l0)
            throw InvalidArgument("block length " + std::to_string(len) + " is below l0 = " +
                                  std::to_string(policy.l0));
    EpsilonLedger ledger;
    ledger.breakpoints.push_back(0);
    double running = 0.0;
    for (auto len : policy.lengths) {
        const std::size_t K = ledger.breakpoints.back();
        const double norm = gowers_norm(shift(f, K), s, checked_power(f.base(), len), budget);
        const double eps = std::clamp(1.0 - norm, 0.0, 1.0);
        running += eps;
        ledger.lengths.push_back(len);
        ledger.epsilons.push_back(eps);
        ledger.cumulative.push_back(running);
        ledger.breakpoints.push_back(K + len);
    }
    ledger.average = parallelepiped_average(f, CarryVector(s), ledger.breakpoints.back(), budget);
    return ledger;
}

namespace {

double linear_residual(std::span<const Phase> fp, Phase alpha, Phase beta) {
    return deterministic_sum<double>(fp.size(),
                                     [&](std::uint64_t n) {
                                         const double d = (alpha * n + beta - fp[n]).centered();
                                         return 2.0 * std::abs(std::sin(std::numbers::pi * d));
                                     }) /
           static_cast<double>(fp.size());
}

}  // namespace

LinearPhaseFit fit_linear_phase(const Sequence& f, std::size_t L) {
    if (L < 1) throw InvalidArgument("fit_linear_phase needs L >= 1");
    const std::uint64_t N = checked_power(f.base(), L);
    const auto fp = f.phases(N);

    Phase alpha;
    if (const auto* table = f.qmult()) {
        alpha = sup_linear_correlation(*table, L).alpha;
    } else {
        const auto density = static_cast<std::size_t>(std::clamp<std::uint64_t>(4 * N, 256, 16384));
        alpha = -Phase(sup_poly_correlation(f, 1, N, density).p.coeffs[1]);
    }
    const auto corr = deterministic_sum<std::complex<double>>(
        N, [&](std::uint64_t n) { return unit(fp[n] - alpha * n); });
    Phase beta(std::arg(corr) / (2 * std::numbers::pi));
    double residual = linear_residual(fp, alpha, beta);

    std::vector<double> x(N), y(N);
    for (int iteration = 0; iteration < 4; ++iteration) {
        for (std::uint64_t n = 0; n < N; ++n) {
            x[n] = static_cast<double>(n);
            y[n] = (fp[n] - alpha * n - beta).centered();
        }
        const auto line = least_squares(x, y);
        const Phase a = alpha + Phase(line.slope), b = beta + Phase(line.intercept);
        const double r = linear_residual(fp, a, b);
        if (!(r < residual)) break;
        alpha = a;
        beta = b;
        residual = r;
    }
    return {alpha, beta, residual};
}

UniformityReport uniformity_report(const Sequence& f, std::size_t s_max, std::size_t L, std::size_t beam,
                                   std::uint64_t budget) {
    if (s_max < 2 || s_max > kMaxGowersOrder)
        throw InvalidArgument("s_max must be in [2, " + std::to_string(kMaxGowersOrder) + "]");
    UniformityReport report;
    report.L = L;
    report.N = checked_power(f.base(), L);
    for (std::size_t s = 2; s <= s_max; ++s) report.norms.emplace_back(s, gowers_norm(f, s, report.N, budget));
    if (const auto* table = f.qmult())
        report.linear_sup = sup_linear_correlation(*table, L, beam).value;
    else
        report.linear_sup = sup_poly_correlation(f, 1, report.N).value;
    return report;
}

}  // namespace qmult
