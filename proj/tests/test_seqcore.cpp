#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bitset>
#include <string>

#include "qmult/errors.hpp"
#include "qmult/seqcore.hpp"
#include "qmult/seqspec.hpp"

using namespace qmult;

namespace {

QMultSeq thue_morse() { return *build(ThueMorse{}).qmult(); }

bool same_phase(Phase a, Phase b) { return a.raw() == b.raw(); }

}  // namespace

TEST_CASE("phase arithmetic wraps exactly") {
    CHECK(Phase(0.25).raw() == (std::uint64_t{1} << 62));
    CHECK(Phase(1.25) == Phase(0.25));
    CHECK(Phase(-0.25) == Phase(0.75));
    CHECK(Phase(0.75) + Phase(0.5) == Phase(0.25));
    CHECK(Phase::ratio(1, 3) * 3 == Phase{} + Phase::from_raw(Phase::ratio(1, 3).raw() * 3));
    CHECK(Phase(0.999999999999).value() < 1.0);
    CHECK(unit(Phase(0.5)) == std::complex<double>(-1.0, 0.0));
    CHECK(unit(Phase(0.25)) == std::complex<double>(0.0, 1.0));
    CHECK(std::abs(unit(Phase(0.1)) - std::polar(1.0, 2 * std::numbers::pi * 0.1)) < 1e-15);
}

TEST_CASE("eval examples") {
    CHECK(eval(thue_morse(), 3) == std::complex<double>(1.0, 0.0));
    CHECK(eval(thue_morse(), 7) == std::complex<double>(-1.0, 0.0));
    const auto r = random_qmult(3, 8, 11);
    CHECK(eval(r, 0) == std::complex<double>(1.0, 0.0));
    const auto m3 = *build(DigitSumModQ{2, 1, 3}).qmult();
    CHECK(std::abs(eval(m3, 7) - 1.0) < 1e-15);
    CHECK(std::abs(eval(m3, 6) - unit(Phase::ratio(2, 3))) < 1e-15);
}

TEST_CASE("sum of digits") {
    CHECK(sum_of_digits(2, 3) == 2);
    CHECK(sum_of_digits(10, 999) == 27);
    CHECK(sum_of_digits(2, 0) == 0);
    CHECK_THROWS_AS(sum_of_digits(1, 5), InvalidArgument);
}

TEST_CASE("table invariants are enforced") {
    CHECK_THROWS_AS(QMultSeq(1, {{Phase{}}}), InvalidArgument);
    CHECK_THROWS_AS(QMultSeq(2, {}), InvalidArgument);
    CHECK_THROWS_AS(QMultSeq(2, {{Phase(0.1), Phase(0.2)}}), InvalidArgument);
    CHECK_THROWS_AS(QMultSeq(2, {{Phase{}, Phase(0.2)}}, TailPolicy::periodic(2)), InvalidArgument);
}

TEST_CASE("tail policies") {
    std::vector<QMultSeq::Row> table{{Phase{}, Phase(0.1)}, {Phase{}, Phase(0.2)}, {Phase{}, Phase(0.3)}};
    const QMultSeq ones(2, table, TailPolicy::ones());
    const QMultSeq last(2, table, TailPolicy::repeat_last());
    const QMultSeq periodic(2, table, TailPolicy::periodic(2));
    CHECK(ones.digit_phase(5, 1) == Phase{});
    CHECK(last.digit_phase(5, 1) == Phase(0.3));
    // rows 1,2 repeat: t=3 -> row 1, t=4 -> row 2
    CHECK(periodic.digit_phase(3, 1) == Phase(0.2));
    CHECK(periodic.digit_phase(4, 1) == Phase(0.3));
    CHECK(periodic.digit_phase(7, 1) == Phase(0.2));
}

TEST_CASE("multiplicativity holds exactly on phases") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto f = random_qmult(2 + seed % 3, 20, seed);
        const unsigned q = f.base();
        SplitMix64 rng(seed + 100);
        for (int trial = 0; trial < 500; ++trial) {
            const unsigned t = rng.next() % 10;
            std::uint64_t qt = 1;
            for (unsigned i = 0; i < t; ++i) qt *= q;
            const std::uint64_t m = rng.next() % qt;
            const std::uint64_t n = qt * (rng.next() % 5000);
            REQUIRE(same_phase(f.phase(m + n), f.phase(m) + f.phase(n)));
            REQUIRE(std::abs(std::abs(f(m + n)) - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("bulk phases agree with pointwise evaluation") {
    for (unsigned q : {2u, 3u, 5u}) {
        const auto f = random_qmult(q, 4, q);
        const auto ph = f.phases(1000);
        for (std::uint64_t n = 0; n < ph.size(); ++n) REQUIRE(same_phase(ph[n], f.phase(n)));
    }
    const auto ph = thue_morse().phases(1);
    CHECK(ph.size() == 1);
}

TEST_CASE("digit-sum phase matches sum_of_digits") {
    const double alpha = 0.414;
    const auto f = *build(DigitSumPhase{3, alpha}).qmult();
    std::uint64_t limit = 1;
    for (int i = 0; i < 12; ++i) limit *= 3;
    for (std::uint64_t n = 0; n < limit; n += 7)
        REQUIRE(same_phase(f.phase(n), Phase(alpha) * sum_of_digits(3, n)));
}

TEST_CASE("shift") {
    const auto f = random_qmult(2, 16, 42);
    CHECK(shift(f, 0) == f);
    const auto t = thue_morse();
    const auto t5 = shift(t, 5);
    for (std::uint64_t n = 0; n < 256; ++n) REQUIRE(same_phase(t5.phase(n), t.phase(n)));
    CHECK(same_phase(shift(f, 3).phase(1), f.phase(8)));

    std::vector<QMultSeq::Row> table;
    SplitMix64 rng(9);
    for (int t = 0; t < 6; ++t) table.push_back({Phase{}, Phase::from_raw(rng.next()), Phase::from_raw(rng.next())});
    for (auto tail : {TailPolicy::ones(), TailPolicy::repeat_last(), TailPolicy::periodic(4)}) {
        const QMultSeq g(3, table, tail);
        for (std::size_t l : {1u, 2u, 5u, 6u, 9u}) {
            const auto h = shift(g, l);
            std::uint64_t ql = 1;
            for (std::size_t i = 0; i < l; ++i) ql *= 3;
            for (std::uint64_t n = 0; n < 2000; ++n) REQUIRE(same_phase(h.phase(n), g.phase(ql * n)));
        }
    }
}

TEST_CASE("named families") {
    CHECK(*build(GenThueMorse{0.5}).qmult() == thue_morse());
    // strong with phase_a = a p/(q-1) is e(n p/(q-1))
    const unsigned q = 5;
    const std::int64_t p = 3;
    Strong spec{q, {}};
    for (unsigned a = 1; a < q; ++a) spec.phases.push_back(std::fmod(a * p / double(q - 1), 1.0));
    const auto f = build(spec);
    for (std::uint64_t n = 0; n < 3000; ++n)
        REQUIRE(std::abs(f(n) - unit(Phase::ratio(static_cast<std::int64_t>(n) * p, q - 1))) < 1e-12);
    const auto per = build(PeriodicSeq{3, 1});
    for (std::uint64_t n = 0; n < 100; ++n) REQUIRE(per(n) == std::complex<double>(n % 2 ? -1.0 : 1.0, 0.0));
    CHECK_THROWS_AS(build(PeriodicSeq{3, 2}), InvalidArgument);
    CHECK_THROWS_AS(build(GenThueMorse{1.5}), InvalidArgument);
    CHECK_THROWS_AS(build(Strong{3, {0.1}}), InvalidArgument);
}

TEST_CASE("rudin-shapiro by string scan") {
    const auto rs = build(RudinShapiro{});
    CHECK(rs.qmult() == nullptr);
    CHECK(rs(3) == std::complex<double>(-1.0, 0.0));
    for (std::uint64_t n = 0; n < 4096; ++n) {
        const std::string bits = std::bitset<16>(n).to_string();
        int count = 0;
        for (std::size_t i = 0; i + 1 < bits.size(); ++i) count += bits[i] == '1' && bits[i + 1] == '1';
        REQUIRE(rs(n) == std::complex<double>(count % 2 ? -1.0 : 1.0, 0.0));
    }
}

TEST_CASE("twist multiplies by a polynomial phase") {
    const Sequence f = thue_morse();
    const PolyPhase p({0.1, 0.2, 0.3});
    const auto g = twist(f, p);
    for (std::uint64_t n = 0; n < 100; ++n) {
        const double turns = 0.1 + 0.2 * n + 0.3 * double(n) * double(n);
        REQUIRE(std::abs(g(n) - f(n) * std::polar(1.0, 2 * std::numbers::pi * std::fmod(turns, 1.0))) < 1e-9);
    }
}

TEST_CASE("sequence spec mini-language") {
    CHECK(std::holds_alternative<ThueMorse>(parse_seq_spec("tm")));
    CHECK(std::get<GenThueMorse>(parse_seq_spec("gtm:tau=0.3")).tau == 0.3);
    const auto ds = std::get<DigitSumPhase>(parse_seq_spec("digitsum:q=3,alpha=0.414"));
    CHECK(ds.q == 3);
    CHECK(ds.alpha == 0.414);
    CHECK(parse_seq_spec("dsmod:q=2,p=1,Q=3") == SeqSpec{DigitSumModQ{2, 1, 3}});
    CHECK(parse_seq_spec("strong:q=5,phases=0.2;0.4;0.6;0.8") == SeqSpec{Strong{5, {0.2, 0.4, 0.6, 0.8}}});
    CHECK(parse_seq_spec("random:q=2,levels=32,seed=7") == SeqSpec{RandomSeq{2, 32, 7}});
    CHECK(std::holds_alternative<RudinShapiro>(parse_seq_spec("rudin-shapiro")));

    CHECK_THROWS_AS(parse_seq_spec("gtm:tau=1.5"), InvalidArgument);
    CHECK_THROWS_AS(parse_seq_spec("gtm:theta=0.5"), InvalidArgument);
    CHECK_THROWS_AS(parse_seq_spec("nosuch"), InvalidArgument);
    CHECK_THROWS_AS(parse_seq_spec("random:q=two"), InvalidArgument);
    CHECK_THROWS_AS(parse_seq_spec("digitsum:q=3,alpha"), InvalidArgument);
    CHECK_THROWS_AS(parse_seq_spec("gtm:tau=0.1,tau=0.2"), InvalidArgument);

    for (const char* text : {"tm", "gtm:tau=0.3", "digitsum:q=3,alpha=0.414", "dsmod:q=2,p=1,Q=3",
                             "strong:q=5,phases=0.2;0.4;0.6;0.8", "random:q=2,levels=32,seed=7",
                             "periodic:q=3,p=1", "rudin-shapiro"}) {
        const auto spec = parse_seq_spec(text);
        CHECK(parse_seq_spec(format_seq_spec(spec)) == spec);
    }
}
