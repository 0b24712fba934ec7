#include "qmult/seqcore.hpp"

#include <bit>
#include <cmath>
#include <numeric>

#include "qmult/errors.hpp"

namespace qmult {

QMultSeq::QMultSeq(unsigned q, std::vector<Row> table, TailPolicy tail)
    : q_(q), table_(std::move(table)), tail_(tail), zero_row_(q) {
    if (q_ < 2) throw InvalidArgument("q-multiplicative sequence needs base q >= 2");
    if (table_.empty()) throw InvalidArgument("phase table needs at least one level");
    for (std::size_t t = 0; t < table_.size(); ++t) {
        if (table_[t].size() != q_)
            throw InvalidArgument("phase table row " + std::to_string(t) + " has " +
                                  std::to_string(table_[t].size()) + " entries, expected " +
                                  std::to_string(q_));
        if (table_[t][0] != Phase{})
            throw InvalidArgument("phase table row " + std::to_string(t) +
                                  ": f(0) must be 1 (phase 0)");
    }
    if (tail_.kind == TailKind::Periodic && (tail_.period == 0 || tail_.period > table_.size()))
        throw InvalidArgument("periodic tail needs 1 <= period <= levels");
}

QMultSeq QMultSeq::strong(unsigned q, Row row) {
    return QMultSeq(q, std::vector<Row>{std::move(row)}, TailPolicy::repeat_last());
}

std::span<const Phase> QMultSeq::row(std::size_t t) const {
    const std::size_t T = table_.size();
    if (t < T) return table_[t];
    switch (tail_.kind) {
        case TailKind::Ones: return zero_row_;
        case TailKind::RepeatLast: return table_.back();
        case TailKind::Periodic: return table_[T - tail_.period + (t - T) % tail_.period];
    }
    return zero_row_;
}

Phase QMultSeq::phase(std::uint64_t n) const {
    Phase acc;
    for (std::size_t t = 0; n != 0; ++t) {
        acc += row(t)[n % q_];
        n /= q_;
    }
    return acc;
}

Phase QMultSeq::scaled_phase(std::uint64_t c, std::size_t level) const {
    Phase acc;
    for (std::size_t t = level; c != 0; ++t) {
        acc += row(t)[c % q_];
        c /= q_;
    }
    return acc;
}

std::vector<Phase> QMultSeq::phases(std::uint64_t count) const {
    std::vector<Phase> out(count);
    std::uint64_t block = 1;  // q^t
    for (std::size_t t = 0; block < count; ++t) {
        const auto r = row(t);
        const std::uint64_t hi = block > count / q_ ? count : block * q_;
        for (std::uint64_t n = block; n < hi; ++n) out[n] = r[n / block] + out[n % block];
        if (block > count / q_) break;
        block *= q_;
    }
    return out;
}

std::complex<double> eval(const QMultSeq& f, std::uint64_t n) { return f(n); }

QMultSeq shift(const QMultSeq& f, std::size_t l) {
    if (l == 0) return f;
    const std::size_t T = f.levels();
    std::size_t new_levels = T > l ? T - l : 1;
    if (f.tail().kind == TailKind::Periodic) new_levels = std::max(new_levels, f.tail().period);
    std::vector<QMultSeq::Row> table(new_levels);
    for (std::size_t t = 0; t < new_levels; ++t) {
        const auto r = f.row(t + l);
        table[t].assign(r.begin(), r.end());
    }
    return QMultSeq(f.base(), std::move(table), f.tail());
}

std::uint64_t sum_of_digits(unsigned q, std::uint64_t n) {
    if (q < 2) throw InvalidArgument("sum_of_digits needs q >= 2");
    std::uint64_t s = 0;
    for (; n != 0; n /= q) s += n % q;
    return s;
}

DigitalSeq rudin_shapiro() {
    return DigitalSeq("rudin-shapiro", 2, [](std::uint64_t n) {
        const unsigned blocks = std::popcount(n & (n >> 1));
        return Phase::ratio(blocks, 2);
    });
}

unsigned Sequence::base() const {
    return std::visit([](const auto& f) { return f.base(); }, repr_);
}

Phase Sequence::phase(std::uint64_t n) const {
    return std::visit([n](const auto& f) { return f.phase(n); }, repr_);
}

std::vector<Phase> Sequence::phases(std::uint64_t count) const {
    if (const auto* f = qmult()) return f->phases(count);
    const auto& d = std::get<DigitalSeq>(repr_);
    std::vector<Phase> out(count);
    for (std::uint64_t n = 0; n < count; ++n) out[n] = d.phase(n);
    return out;
}

Sequence twist(const Sequence& f, const PolyPhase& p) {
    PolyPhaseEvaluator poly(p);
    return DigitalSeq("twisted", f.base(), [f, poly](std::uint64_t n) { return f.phase(n) + poly(n); });
}

Sequence poly_phase_sequence(const PolyPhase& p, unsigned base) {
    PolyPhaseEvaluator poly(p);
    return DigitalSeq("e(" + p.to_string() + ")", base, [poly](std::uint64_t n) { return poly(n); });
}

std::string PolyPhase::to_string() const {
    std::string out;
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
        if (j) out += ";";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", coeffs[j]);
        out += buf;
    }
    return out;
}

QMultSeq random_qmult(unsigned q, std::size_t levels, std::uint64_t seed) {
    if (q < 2) throw InvalidArgument("random: q must be >= 2");
    if (levels < 1) throw InvalidArgument("random: levels must be >= 1");
    SplitMix64 rng(seed);
    std::vector<QMultSeq::Row> table(levels, QMultSeq::Row(q));
    for (auto& row : table)
        for (unsigned a = 1; a < q; ++a) row[a] = Phase::from_raw(rng.next());
    return QMultSeq(q, std::move(table));
}

namespace {

void require_unit_interval(const char* what, double x) {
    if (!(x >= 0.0 && x < 1.0))
        throw InvalidArgument(std::string(what) + " = " + std::to_string(x) + " is outside [0,1)");
}

void require_base(unsigned q) {
    if (q < 2) throw InvalidArgument("q = " + std::to_string(q) + " must be >= 2");
}

QMultSeq::Row linear_row(unsigned q, Phase step) {
    QMultSeq::Row row(q);
    for (unsigned a = 0; a < q; ++a) row[a] = step * a;
    return row;
}

}  // namespace

void validate(const SeqSpec& spec) {
    std::visit(
        [](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, GenThueMorse>) {
                require_unit_interval("tau", s.tau);
            } else if constexpr (std::is_same_v<T, DigitSumPhase>) {
                require_base(s.q);
                require_unit_interval("alpha", s.alpha);
            } else if constexpr (std::is_same_v<T, DigitSumModQ>) {
                require_base(s.q);
                if (s.Q < 1) throw InvalidArgument("Q must be >= 1");
                if (s.p < 0 || s.p >= s.Q) throw InvalidArgument("p must satisfy 0 <= p < Q");
            } else if constexpr (std::is_same_v<T, Strong>) {
                require_base(s.q);
                if (s.phases.size() != s.q - 1)
                    throw InvalidArgument("strong: expected " + std::to_string(s.q - 1) +
                                          " phases, got " + std::to_string(s.phases.size()));
                for (double x : s.phases) require_unit_interval("phase", x);
            } else if constexpr (std::is_same_v<T, RandomSeq>) {
                require_base(s.q);
                if (s.levels < 1) throw InvalidArgument("random: levels must be >= 1");
            } else if constexpr (std::is_same_v<T, PeriodicSeq>) {
                require_base(s.q);
                if (s.p < 0 || s.p >= static_cast<std::int64_t>(s.q) - 1)
                    throw InvalidArgument("periodic: p must satisfy 0 <= p < q-1");
            }
        },
        spec);
}

Sequence build(const SeqSpec& spec) {
    validate(spec);
    return std::visit(
        [](const auto& s) -> Sequence {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ThueMorse>) {
                return QMultSeq::strong(2, {Phase{}, Phase::ratio(1, 2)});
            } else if constexpr (std::is_same_v<T, GenThueMorse>) {
                return QMultSeq::strong(2, {Phase{}, Phase(s.tau)});
            } else if constexpr (std::is_same_v<T, DigitSumPhase>) {
                return QMultSeq::strong(s.q, linear_row(s.q, Phase(s.alpha)));
            } else if constexpr (std::is_same_v<T, DigitSumModQ>) {
                return QMultSeq::strong(s.q, linear_row(s.q, Phase::ratio(s.p, s.Q)));
            } else if constexpr (std::is_same_v<T, Strong>) {
                QMultSeq::Row row(s.q);
                for (unsigned a = 1; a < s.q; ++a) row[a] = Phase(s.phases[a - 1]);
                return QMultSeq::strong(s.q, std::move(row));
            } else if constexpr (std::is_same_v<T, RandomSeq>) {
                return random_qmult(s.q, s.levels, s.seed);
            } else if constexpr (std::is_same_v<T, PeriodicSeq>) {
                return QMultSeq::strong(
                    s.q, linear_row(s.q, Phase::ratio(s.p, static_cast<std::int64_t>(s.q) - 1)));
            } else {
                return rudin_shapiro();
            }
        },
        spec);
}

}  // namespace qmult
