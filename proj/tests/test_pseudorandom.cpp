#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qmult/errors.hpp"
#include "qmult/pseudorandom.hpp"

using namespace qmult;

namespace {

QMultSeq thue_morse() { return *build(ThueMorse{}).qmult(); }
Sequence alternating() {
    return DigitalSeq("alternating", 2, [](std::uint64_t n) { return Phase(n % 2 ? 0.5 : 0.0); });
}

}  // namespace

TEST_CASE("finite correlations") {
    for (std::uint64_t r : {0, 1, 7}) CHECK(gamma_finite(QMultSeq::ones(2), r, 100) == std::complex<double>(1.0));
    CHECK(gamma_finite(alternating(), 1, 1000) == std::complex<double>(-1.0));
    CHECK(std::abs(gamma_finite(thue_morse(), 1, 1 << 20) + 1.0 / 3) < std::ldexp(1.0, -16));
    for (const auto& f : {Sequence(thue_morse()), build(RandomSeq{3, 12, 1}), build(RudinShapiro{})})
        CHECK(gamma_finite(f, 0, 777) == std::complex<double>(1.0));
    CHECK_THROWS_AS(gamma_finite(thue_morse(), 1, 0), InvalidArgument);
}

TEST_CASE("reversed correlations differ by the boundary only") {
    const auto f = build(RandomSeq{2, 16, 3});
    for (std::uint64_t r : {1, 5, 40})
        for (std::uint64_t N : {100, 1000, 4096}) {
            std::complex<double> reversed = 0;
            for (std::uint64_t n = r; n < N; ++n) reversed += f(n - r) * std::conj(f(n));
            reversed /= static_cast<double>(N);
            CHECK(std::abs(gamma_finite(f, r, N) - std::conj(reversed)) <= 2.0 * r / N + 1e-12);
        }
}

TEST_CASE("correlation series") {
    const auto ones = gamma_series(QMultSeq::ones(2), 0, 10);
    CHECK(ones.value == std::complex<double>(1.0));
    CHECK(ones.tail_bound == 0.0);
    const auto ones5 = gamma_series(QMultSeq::ones(2), 5, 30);
    CHECK(std::abs(ones5.value - 1.0) <= ones5.tail_bound);
    CHECK(ones5.tail_bound < 1e-8);

    const auto tm = gamma_series(thue_morse(), 1, 30);
    CHECK(std::abs(tm.value + 1.0 / 3) < 1e-8);
    CHECK(tm.tail_bound == doctest::Approx(std::ldexp(1.0, -30)));

    // Closed form for r = 1 with a = 1 .. q-1.
    const auto f = *build(RandomSeq{3, 30, 9}).qmult();
    std::complex<double> closed = 0;
    for (std::size_t l = 0; l < 25; ++l)
        for (std::uint64_t a = 1; a < 3; ++a) {
            const std::uint64_t x = a * static_cast<std::uint64_t>(std::pow(3, l));
            closed += std::pow(3.0, -double(l + 1)) * f(x) * std::conj(f(x - 1));
        }
    CHECK(std::abs(gamma_series(f, 1, 25).value - closed) < 1e-12);
    CHECK_THROWS_AS(gamma_series(f, 1, 0), InvalidArgument);
}

TEST_CASE("series and finite sums agree") {
    for (const auto& table : {thue_morse(), *build(RandomSeq{2, 24, 4}).qmult(), *build(RandomSeq{3, 16, 5}).qmult(),
                              *build(GenThueMorse{0.3}).qmult()}) {
        const unsigned q = table.base();
        const std::size_t L = q == 2 ? 12 : 8;
        const auto N = static_cast<std::uint64_t>(std::pow(q, L));
        for (std::uint64_t r = 0; r < 64; ++r) {
            // Truncating at the scale of the finite sum is exact up to the tail.
            const auto truncated = gamma_series(table, r, L);
            CHECK(std::abs(gamma_finite(table, r, N) - truncated.value) <= truncated.tail_bound + 1e-12);
        }
        const std::size_t big = q == 2 ? 18 : 11;
        const auto M = static_cast<std::uint64_t>(std::pow(q, big));
        const auto series = correlation_series(table, 64, GammaMethod::series(30));
        const auto finite = correlation_series(table, 64, GammaMethod::finite(M));
        for (std::uint64_t r = 0; r < 64; ++r)
            CHECK(std::abs(series.gamma[r] - finite.gamma[r]) <= series.error_estimate[r] + finite.error_estimate[r]);
    }
}

TEST_CASE("Bertrandias density") {
    const auto ones = bertrandias_density(QMultSeq::ones(2), 256, GammaMethod::finite(1024));
    for (const auto& p : ones.ladder) CHECK(p.density == 1.0);

    const auto periodic = bertrandias_density(build(PeriodicSeq{3, 1}), 4096, GammaMethod::finite(4096));
    for (const auto& p : periodic.ladder) CHECK(p.density == 1.0);
    CHECK(periodic.decay_exponent == 0.0);

    const auto tm = bertrandias_density(thue_morse(), 4096, GammaMethod::series(30));
    CHECK(tm.ladder.size() == 12);
    MESSAGE("Thue-Morse decay exponent " << tm.decay_exponent);
    CHECK(tm.decay_exponent > 0.1);
    CHECK(tm.ladder.back().density < tm.ladder[3].density);

    CHECK_THROWS_AS(correlation_series(build(RudinShapiro{}), 4, GammaMethod::series(10)), InvalidArgument);
}
