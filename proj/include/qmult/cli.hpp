#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qmult/errors.hpp"
#include "qmult/gowers.hpp"
#include "qmult/patterns.hpp"
#include "qmult/poly_phase.hpp"
#include "qmult/pseudorandom.hpp"
#include "qmult/seqcore.hpp"

namespace qmult::cli {

inline constexpr const char* kVersion = "0.1.0";
// Default output directory when --out is absent or relative.
inline constexpr const char* kOutputDirEnv = "QMULT_OUTPUT_DIR";

enum class Command { Norms, Supcorr, Gelfond, Patterns, Gamma, Cesaro, ErgodicDemo, Ledger };
enum class Format { Csv, Json };
enum class NormMode { Brute, Dp, Recursive };

const char* to_string(Command c);
const char* to_string(Format f);
const char* to_string(NormMode m);

// A malformed command line; the message names the offending flag.
class UsageError : public InvalidArgument {
  public:
    using InvalidArgument::InvalidArgument;
};

// --help was given; the message is the help text.
class HelpRequested : public Error {
  public:
    using Error::Error;
};

// Fully resolved run configuration: every per-command default is filled in
// by parse_args, so config_pairs reproduces the run exactly.
struct RunConfig {
    Command command = Command::Norms;
    std::string seq_text = "tm";
    SeqSpec seq = ThueMorse{};

    // norms
    std::size_t s = 2;
    std::size_t L = 8;
    NormMode mode = NormMode::Brute;
    std::optional<CarryVector> r;
    std::size_t step = 1;  // recursion split l
    BoxCondition condition = BoxCondition::SumBelowQL;

    // supcorr, gelfond
    std::size_t deg = 1;
    std::size_t beam = 64;
    std::size_t grid = 256;
    std::size_t Lmin = 8;
    std::size_t Lmax = 18;

    // patterns
    std::optional<PatternSpec> pattern;
    std::uint64_t N = 1024;

    // gamma
    std::uint64_t R = 4096;
    GammaMethod method = GammaMethod::series(30);

    // cesaro
    std::size_t T = 64;  // levels of the Delange series

    // ergodic-demo
    PolyPhase poly = PolyPhase({0.0, 0.0, 1.0});
    double theta = 0.6180339887498949;
    double x0 = 0.0;

    // ledger
    std::size_t block = 3;
    std::size_t blocks = 3;
    std::size_t l0 = 2;

    Format format = Format::Csv;
    std::optional<std::filesystem::path> out;
    unsigned threads = 0;  // 0 = hardware concurrency
    std::uint64_t budget = 0;
    std::uint64_t seed = 0;
    bool timing = false;
};

// Throws UsageError (unknown command or flag, malformed value, parameter out
// of range) or HelpRequested. argv excludes the program name.
RunConfig parse_args(const std::vector<std::string>& argv);

// Canonical (key, value) listing of the resolved config, in a fixed order.
std::vector<std::pair<std::string, std::string>> config_pairs(const RunConfig& config);

// FNV-1a 64 of the canonical "key=value\n" text, as 16 hex digits.
std::string config_hash(const RunConfig& config);

// Reals with 17 significant digits, so doubles round-trip exactly.
std::string format_real(double x);
double parse_real(const std::string& text);

// Result rows as already formatted cells, plus scalar summaries.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::pair<std::string, std::string>> summary;

    std::size_t column(const std::string& name) const;  // throws if absent
    bool operator==(const Table&) const = default;
};

// Executes the command. Thread count is applied by the caller. runtime_ms
// cells stay empty unless config.timing.
Table run(const RunConfig& config);

// RFC 4180: header row, CRLF-free '\n' line ends, fields quoted when they
// contain ',', '"' or a line break.
void write_csv(const Table& table, std::ostream& os);
Table read_csv(std::istream& is);  // summary left empty

// {"command", "config", "columns", "rows", "summary"} with every value a string.
void write_json(const Table& table, const RunConfig& config, std::ostream& os);
Table read_json(std::istream& is);

// Destination file for the run: --out, resolved against $QMULT_OUTPUT_DIR when
// relative; otherwise <dir>/<command>.<ext>; nullopt means stdout.
std::optional<std::filesystem::path> output_path(const RunConfig& config);

// Writes the table to path (or os when path is nullopt); files also get a
// <path>.meta.json sidecar with config, hash, versions and runtime.
// I/O failures throw IoError naming the path.
void emit_results(const Table& table, const RunConfig& config, const std::optional<std::filesystem::path>& path,
                  std::ostream& os, double runtime_ms);

// Full command-line entry point; returns the exit code (0 ok, 2 usage,
// 3 budget exceeded, 4 I/O error, 1 other failure).
int main_entry(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace qmult::cli
