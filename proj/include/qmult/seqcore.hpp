#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qmult/phase.hpp"
#include "qmult/poly_phase.hpp"

namespace qmult {

enum class TailKind { Ones, RepeatLast, Periodic };

// How the phase table continues past its last stored level.
struct TailPolicy {
    TailKind kind = TailKind::RepeatLast;
    std::size_t period = 1;

    static TailPolicy ones() { return {TailKind::Ones, 1}; }
    static TailPolicy repeat_last() { return {TailKind::RepeatLast, 1}; }
    static TailPolicy periodic(std::size_t p) { return {TailKind::Periodic, p}; }
    bool operator==(const TailPolicy&) const = default;
};

// A q-multiplicative sequence f, given by the phases of f(a q^t) for
// 0 <= a < q and 0 <= t < levels, continued by a tail policy.
class QMultSeq {
  public:
    using Row = std::vector<Phase>;

    QMultSeq(unsigned q, std::vector<Row> table, TailPolicy tail = TailPolicy::repeat_last());

    // f(a q^t) = e(row[a]) at every level.
    static QMultSeq strong(unsigned q, Row row);
    static QMultSeq ones(unsigned q) { return strong(q, Row(q)); }

    unsigned base() const { return q_; }
    std::size_t levels() const { return table_.size(); }
    const TailPolicy& tail() const { return tail_; }

    // Phases of f(a q^t), 0 <= a < q, with the tail policy applied.
    std::span<const Phase> row(std::size_t t) const;
    Phase digit_phase(std::size_t t, unsigned a) const { return row(t)[a]; }

    Phase phase(std::uint64_t n) const;
    std::complex<double> operator()(std::uint64_t n) const { return unit(phase(n)); }

    // Phase of f(c * q^level) without forming q^level.
    Phase scaled_phase(std::uint64_t c, std::size_t level) const;

    // phase(n) for every n < count, in O(count).
    std::vector<Phase> phases(std::uint64_t count) const;
    bool operator==(const QMultSeq&) const = default;

  private:
    unsigned q_;
    std::vector<Row> table_;
    TailPolicy tail_;
    Row zero_row_;
};

std::complex<double> eval(const QMultSeq& f, std::uint64_t n);

// S^l f, i.e. n -> f(q^l n).
QMultSeq shift(const QMultSeq& f, std::size_t l);

std::uint64_t sum_of_digits(unsigned q, std::uint64_t n);

// A unimodular sequence evaluated directly, without a digit table.
class DigitalSeq {
  public:
    using PhaseFn = std::function<Phase(std::uint64_t)>;

    DigitalSeq(std::string name, unsigned base, PhaseFn fn)
        : name_(std::move(name)), base_(base), fn_(std::move(fn)) {}

    const std::string& name() const { return name_; }
    unsigned base() const { return base_; }
    Phase phase(std::uint64_t n) const { return fn_(n); }

  private:
    std::string name_;
    unsigned base_;
    PhaseFn fn_;
};

// Parity of the number of occurrences of the block 11 in binary n.
DigitalSeq rudin_shapiro();

// Either representation, with a uniform evaluation surface.
class Sequence {
  public:
    Sequence(QMultSeq f) : repr_(std::move(f)) {}
    Sequence(DigitalSeq f) : repr_(std::move(f)) {}

    unsigned base() const;
    Phase phase(std::uint64_t n) const;
    std::complex<double> operator()(std::uint64_t n) const { return unit(phase(n)); }
    std::vector<Phase> phases(std::uint64_t count) const;

    // Non-null when the sequence carries a q-multiplicative table.
    const QMultSeq* qmult() const { return std::get_if<QMultSeq>(&repr_); }

  private:
    std::variant<QMultSeq, DigitalSeq> repr_;
};

// n -> f(n) e(p(n)).
Sequence twist(const Sequence& f, const PolyPhase& p);

// n -> e(p(n)) as a base-q sequence.
Sequence poly_phase_sequence(const PolyPhase& p, unsigned base = 2);

// Named constructors.
struct ThueMorse {
    bool operator==(const ThueMorse&) const = default;
};
struct GenThueMorse {
    double tau = 0.5;
    bool operator==(const GenThueMorse&) const = default;
};
struct DigitSumPhase {
    unsigned q = 2;
    double alpha = 0.0;
    bool operator==(const DigitSumPhase&) const = default;
};
struct DigitSumModQ {
    unsigned q = 2;
    std::int64_t p = 1;
    std::int64_t Q = 2;
    bool operator==(const DigitSumModQ&) const = default;
};
struct Strong {
    unsigned q = 2;
    std::vector<double> phases;  // phases of f(1), ..., f(q-1)
    bool operator==(const Strong&) const = default;
};
struct RandomSeq {
    unsigned q = 2;
    std::size_t levels = 32;
    std::uint64_t seed = 0;
    bool operator==(const RandomSeq&) const = default;
};
struct PeriodicSeq {
    unsigned q = 3;
    std::int64_t p = 1;  // f(n) = e(n p / (q - 1))
    bool operator==(const PeriodicSeq&) const = default;
};
struct RudinShapiro {
    bool operator==(const RudinShapiro&) const = default;
};

using SeqSpec = std::variant<ThueMorse, GenThueMorse, DigitSumPhase, DigitSumModQ, Strong,
                             RandomSeq, PeriodicSeq, RudinShapiro>;

// Throws InvalidArgument on parameters outside their ranges.
void validate(const SeqSpec& spec);
Sequence build(const SeqSpec& spec);

// Seeded 64-bit mixer behind RandomSeq: the SplitMix64 output function
// applied to state += 0x9e3779b97f4a7c15. Each phase of the table is one
// output word read as a fixed-point fraction of a turn, drawn row by row
// for a = 1..q-1.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    // Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  private:
    std::uint64_t state_;
};

QMultSeq random_qmult(unsigned q, std::size_t levels, std::uint64_t seed);

}  // namespace qmult
