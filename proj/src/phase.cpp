#include "qmult/phase.hpp"

namespace qmult {

std::uint64_t Phase::from_turns(double turns) {
    if (!std::isfinite(turns)) return 0;
    const long double t = turns;
    const long double scaled = std::nearbyintl(std::ldexp(t - std::floor(t), 64));
    if (scaled >= std::ldexp(1.0L, 64)) return 0;
    return static_cast<std::uint64_t>(scaled);
}

Phase Phase::ratio(std::int64_t num, std::int64_t den) {
    long double frac = std::fmod(static_cast<long double>(num), static_cast<long double>(den)) /
                       static_cast<long double>(den);
    if (frac < 0) frac += 1.0L;
    long double scaled = std::nearbyintl(std::ldexp(frac, 64));
    if (scaled >= std::ldexp(1.0L, 64)) return Phase{};
    return from_raw(static_cast<std::uint64_t>(scaled));
}

double Phase::value() const {
    double v = std::ldexp(static_cast<double>(raw_), -64);
    if (v >= 1.0) v = std::nextafter(1.0, 0.0);
    return v;
}

std::complex<double> unit(Phase p) {
    constexpr std::uint64_t quarter = std::uint64_t{1} << 62;
    if (p.raw() % quarter == 0) {
        switch (p.raw() / quarter) {
            case 0: return {1.0, 0.0};
            case 1: return {0.0, 1.0};
            case 2: return {-1.0, 0.0};
            default: return {0.0, -1.0};
        }
    }
    const double angle = 2.0 * std::numbers::pi * p.centered();
    return {std::cos(angle), std::sin(angle)};
}

}  // namespace qmult
