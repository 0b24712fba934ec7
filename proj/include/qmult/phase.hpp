#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace qmult {

// A point of R/Z measured in turns, stored as a 64-bit fixed-point fraction
// (units of 2^-64 turn). Addition and integer scaling wrap modulo 2^64, so
// "phases add mod 1" holds exactly and digit products never drift.
class Phase {
  public:
    constexpr Phase() = default;

    // Normalizes any finite real into [0, 1).
    explicit Phase(double turns) : raw_(from_turns(turns)) {}

    static constexpr Phase from_raw(std::uint64_t raw) {
        Phase p;
        p.raw_ = raw;
        return p;
    }

    // Exact rational a/b mod 1, rounded to the nearest 2^-64.
    static Phase ratio(std::int64_t num, std::int64_t den);

    constexpr std::uint64_t raw() const { return raw_; }

    // Value in [0, 1).
    double value() const;

    // Value in [-1/2, 1/2), the signed representative.
    double centered() const {
        return std::ldexp(static_cast<double>(static_cast<std::int64_t>(raw_)), -64);
    }

    constexpr Phase operator+(Phase o) const { return from_raw(raw_ + o.raw_); }
    constexpr Phase operator-(Phase o) const { return from_raw(raw_ - o.raw_); }
    constexpr Phase operator-() const { return from_raw(0 - raw_); }
    constexpr Phase& operator+=(Phase o) {
        raw_ += o.raw_;
        return *this;
    }
    constexpr Phase& operator-=(Phase o) {
        raw_ -= o.raw_;
        return *this;
    }
    // k * phase mod 1, exact for every integer k.
    constexpr Phase operator*(std::uint64_t k) const { return from_raw(raw_ * k); }

    constexpr bool operator==(const Phase&) const = default;

  private:
    static std::uint64_t from_turns(double turns);

    std::uint64_t raw_ = 0;
};

constexpr Phase operator*(std::uint64_t k, Phase p) { return p * k; }

// e(x) = exp(2 pi i x). Quarter turns map to exact values.
std::complex<double> unit(Phase p);

inline std::complex<double> unit(double turns) { return unit(Phase(turns)); }

}  // namespace qmult
