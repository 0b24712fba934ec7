#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qmult/cli.hpp"
#include "qmult/parallel.hpp"

using namespace qmult;
using namespace qmult::cli;

namespace {

std::vector<std::string> words(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

RunConfig parse(const std::string& line) { return parse_args(words(line)); }

std::string csv_text(const Table& t) {
    std::ostringstream os;
    write_csv(t, os);
    return os.str();
}

const std::vector<std::string> kSmallRuns = {
    "norms --seq tm --s 2 --L 6",
    "norms --seq random:q=3,levels=8,seed=2 --s 2 --L 3 --mode dp",
    "norms --seq tm --s 3 --L 5 --mode recursive --l 1 --r 0,1,0,0,1,0,0,1",
    "supcorr --seq gtm:tau=0.3 --L 8",
    "supcorr --seq rudin-shapiro --deg 2 --L 5 --grid 32",
    "gelfond --seq tm --Lmin 6 --Lmax 10",
    "patterns --q 2 --Q 3 --k 3 --residues 0,1,2 --N 256",
    "patterns --alpha 0.6180339887498949 --cells 0:0.5,0.5:1 --N 128",
    "gamma --seq tm --R 32",
    "gamma --seq rudin-shapiro --R 16 --method finite:N=4096",
    "cesaro --seq digitsum:q=3,alpha=0.414 --L 10",
    "ergodic-demo --seq tm --N 4096",
    "ledger --seq random:q=2,levels=16,seed=5 --s 2 --blocks 2",
};

}  // namespace

TEST_CASE("argument parsing") {
    const auto c = parse("norms --seq tm --s 2 --L 8 --mode dp");
    CHECK(c.command == Command::Norms);
    CHECK(c.s == 2);
    CHECK(c.L == 8);
    CHECK(c.mode == NormMode::Dp);
    CHECK(c.format == Format::Csv);

    CHECK_THROWS_WITH_AS(parse("gelfond --seq gtm:tau=1.5"), doctest::Contains("--seq"), UsageError);
    CHECK_THROWS_WITH_AS(parse("patterns --q 3 --Q 4 --k 2 --residues 0,1 --N 64"), doctest::Contains("--Q"),
                         UsageError);
    const auto p = parse("patterns --q 2 --Q 4 --k 2 --residues 0,1 --N 64");
    CHECK(p.pattern->k() == 2);
    CHECK(p.N == 64);

    CHECK_THROWS_AS(parse("frobnicate --seq tm"), UsageError);
    CHECK_THROWS_WITH_AS(parse("norms --seq tm --bogus 3"), doctest::Contains("--bogus"), UsageError);
    CHECK_THROWS_WITH_AS(parse("norms --seq tm --s 9"), doctest::Contains("--s"), UsageError);
    CHECK_THROWS_WITH_AS(parse("norms --seq nope"), doctest::Contains("--seq"), UsageError);
    CHECK_THROWS_WITH_AS(parse("norms --seq tm --s 2 --r 0,1,0"), doctest::Contains("--r"), UsageError);
    CHECK_THROWS_WITH_AS(parse("norms --seq rudin-shapiro --mode dp"), doctest::Contains("--seq"), UsageError);
    CHECK_THROWS_WITH_AS(parse("gamma --method series:N=3"), doctest::Contains("--method"), UsageError);
    CHECK_THROWS_WITH_AS(parse("patterns --q 2 --Q 3 --k 2 --residues 0,1,2"), doctest::Contains("--k"), UsageError);
    CHECK_THROWS_WITH_AS(parse("ergodic-demo --poly 0;0.5"), doctest::Contains("--poly"), UsageError);
    CHECK_THROWS_WITH_AS(parse("gelfond --Lmin 8 --Lmax 9"), doctest::Contains("--Lmax"), UsageError);
    CHECK_THROWS_AS(parse("norms --help"), HelpRequested);

    // The global seed fills in a random sequence without one.
    CHECK(parse("gamma --seq random:q=2 --seed 11").seq_text.find("seed=11") != std::string::npos);
    CHECK(parse("gamma --seq random:q=2,seed=3 --seed 11").seq_text.find("seed=3") != std::string::npos);

    CHECK(parse("gamma --seq tm").method.kind == GammaMethod::Kind::Series);
    CHECK(parse("gamma --seq rudin-shapiro").method.kind == GammaMethod::Kind::Finite);
    CHECK(parse("norms --budget 1e6").budget == 1000000);
    CHECK(parse("norms --threads auto").threads == 0);
}

TEST_CASE("config hash") {
    CHECK(config_hash(parse("norms --seq tm --s 2")) == config_hash(parse("norms --s 2 --seq tm")));
    CHECK(config_hash(parse("norms --seq tm --s 2")) != config_hash(parse("norms --seq tm --s 3")));
    CHECK(config_hash(parse("norms --seq tm")).size() == 16);
    // Execution knobs do not change the result record.
    CHECK(config_hash(parse("norms --threads 1")) == config_hash(parse("norms --threads 4")));
}

TEST_CASE("csv quoting round trip") {
    Table t;
    t.columns = {"a", "b,c", "d"};
    t.rows = {{"1", "x\"y", ""}, {"line\nbreak", "0,1", "-inf"}, {"", "", ""}};
    const auto text = csv_text(t);
    CHECK(text.rfind("a,\"b,c\",d\n1,\"x\"\"y\",\n", 0) == 0);
    std::istringstream in(text);
    CHECK(read_csv(in) == t);

    std::istringstream crlf("x,y\r\n1,2\r\n");
    const auto u = read_csv(crlf);
    CHECK(u.rows.size() == 1);
    CHECK(u.rows[0][1] == "2");
    std::istringstream ragged("x,y\n1\n");
    CHECK_THROWS_AS(read_csv(ragged), InvalidArgument);
    std::istringstream open_quote("x\n\"1\n");
    CHECK_THROWS_AS(read_csv(open_quote), InvalidArgument);
}

TEST_CASE("reals round trip bit-exactly") {
    const double xs[] = {0.1, 1.0 / 3, -2.5e-300, 6.02214076e23, 5e-324, 1 - 0x1p-53, -0.0};
    for (double x : xs) {
        const double y = parse_real(format_real(x));
        CHECK(std::memcmp(&x, &y, sizeof x) == 0);
    }
    CHECK(std::isinf(parse_real(format_real(-HUGE_VAL))));

    auto config = parse("gamma --seq random:q=3,levels=12,seed=9 --R 40 --format json");
    const auto table = run(config);
    std::ostringstream os;
    write_json(table, config, os);
    std::istringstream in(os.str());
    const auto back = read_json(in);
    CHECK(back == table);

    const auto series = correlation_series(build(config.seq), 40, config.method);
    for (std::size_t r = 0; r < 40; ++r) {
        const double re = parse_real(back.rows[r][back.column("re")]);
        const double im = parse_real(back.rows[r][back.column("im")]);
        CHECK(re == series.gamma[r].real());
        CHECK(im == series.gamma[r].imag());
    }
}

TEST_CASE("every command output re-parses and is deterministic") {
    for (const auto& line : kSmallRuns) {
        CAPTURE(line);
        const auto config = parse(line);
        set_thread_count(1);
        const auto one = run(config);
        set_thread_count(4);
        const auto four = run(config);
        set_thread_count(0);
        CHECK(csv_text(one) == csv_text(four));
        CHECK(!one.rows.empty());

        std::istringstream csv(csv_text(one));
        const auto back = read_csv(csv);
        CHECK(back.columns == one.columns);
        CHECK(back.rows == one.rows);

        std::ostringstream js;
        write_json(one, config, js);
        std::istringstream jin(js.str());
        CHECK(read_json(jin) == one);

        // runtime_ms stays empty unless timing was asked for.
        for (const auto& col : one.columns)
            if (col == "runtime_ms")
                for (const auto& row : one.rows) CHECK(row[one.column(col)].empty());
    }
    auto timed = parse("supcorr --seq tm --L 4 --timing");
    const auto t = run(timed);
    for (const auto& row : t.rows) CHECK(parse_real(row[t.column("runtime_ms")]) >= 0.0);
}

TEST_CASE("command values") {
    const auto norms = run(parse("norms --seq tm --s 2 --L 6"));
    const double value = parse_real(norms.rows[0][norms.column("value")]);
    const double norm = parse_real(norms.rows[0][norms.column("norm")]);
    CHECK(norm == doctest::Approx(std::pow(value, 0.25)).epsilon(1e-14));
    CHECK(value == doctest::Approx(parallelepiped_average(build(ThueMorse{}), CarryVector(2), 6).real()).epsilon(1e-15));

    const auto patterns = run(parse("patterns --q 3 --Q 2 --k 1 --residues 0 --N 9"));
    CHECK(patterns.rows.back()[patterns.column("count")] == "5");

    const auto gamma = run(parse("gamma --seq tm --R 2"));
    CHECK(parse_real(gamma.rows[1][gamma.column("re")]) == doctest::Approx(-1.0 / 3).epsilon(1e-8));
}

TEST_CASE("entry point, exit codes and files") {
    std::ostringstream out, err;
    CHECK(main_entry(words("gamma --seq tm --R 4"), out, err) == 0);
    CHECK(out.str().rfind("r,re,im,err\n", 0) == 0);
    CHECK(main_entry(words("gamma --seq tm --R 0"), out, err) == 2);
    CHECK(main_entry(words("nope"), out, err) == 2);
    CHECK(main_entry(words("norms --seq tm --s 3 --L 12"), out, err) == 3);
    CHECK(err.str().find("--mode dp") != std::string::npos);
    CHECK(main_entry(words("norms --seq tm --L 4 --out /proc/no/such/dir/x.csv"), out, err) == 4);
    std::ostringstream help;
    CHECK(main_entry(words("--help"), help, err) == 0);
    CHECK(help.str().find("ergodic-demo") != std::string::npos);

    const auto dir = std::filesystem::temp_directory_path() / "qmult_cli_test";
    std::filesystem::remove_all(dir);
    ::setenv(kOutputDirEnv, dir.c_str(), 1);
    CHECK(*output_path(parse("gamma")) == dir / "gamma.csv");
    CHECK(*output_path(parse("gamma --format json --out sub/g.json")) == dir / "sub/g.json");
    CHECK(*output_path(parse("gamma --out /tmp/abs.csv")) == std::filesystem::path("/tmp/abs.csv"));
    CHECK(main_entry(words("patterns --q 2 --Q 3 --residues 0,1 --N 64"), out, err) == 0);
    ::unsetenv(kOutputDirEnv);
    CHECK(!output_path(parse("gamma")));

    std::ifstream csv(dir / "patterns.csv");
    const auto table = read_csv(csv);
    CHECK(table.rows.back()[0] == "64");
    std::ifstream meta(dir / "patterns.csv.meta.json");
    std::stringstream text;
    text << meta.rdbuf();
    CHECK(text.str().find(config_hash(parse("patterns --q 2 --Q 3 --residues 0,1 --N 64"))) != std::string::npos);
    CHECK(text.str().find("runtime_ms") != std::string::npos);
    std::filesystem::remove_all(dir);
}
