#include "qmult/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "qmult/expsums.hpp"
#include "qmult/parallel.hpp"
#include "qmult/seqspec.hpp"

namespace qmult::cli {

namespace {

using Clock = std::chrono::steady_clock;
using json = nlohmann::ordered_json;

constexpr std::uint64_t kPatternBudget = 4'000'000'000ULL;

const std::vector<std::pair<Command, const char*>> kCommands = {
    {Command::Norms, "norms"},     {Command::Supcorr, "supcorr"},
    {Command::Gelfond, "gelfond"}, {Command::Patterns, "patterns"},
    {Command::Gamma, "gamma"},     {Command::Cesaro, "cesaro"},
    {Command::ErgodicDemo, "ergodic-demo"}, {Command::Ledger, "ledger"},
};

std::string join(const std::vector<std::string>& parts, char sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        const auto pos = text.find(sep, start);
        parts.push_back(text.substr(start, pos - start));
        if (pos == std::string::npos) return parts;
        start = pos + 1;
    }
}

[[noreturn]] void usage(const std::string& flag, const std::string& what) {
    throw UsageError(flag + ": " + what);
}

std::uint64_t parse_uint(const std::string& flag, const std::string& text) {
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
        // Accept integral scientific notation such as 1e9.
        char* end = nullptr;
        const double x = std::strtod(text.c_str(), &end);
        if (text.empty() || *end != '\0' || !(x >= 0) || x != std::floor(x) || x >= 0x1p64)
            usage(flag, "expected a nonnegative integer, got '" + text + "'");
        return static_cast<std::uint64_t>(x);
    }
    errno = 0;
    const auto v = std::strtoull(text.c_str(), nullptr, 10);
    if (errno == ERANGE) usage(flag, "integer out of range: " + text);
    return v;
}

std::int64_t parse_int(const std::string& flag, const std::string& text) {
    char* end = nullptr;
    errno = 0;
    const auto v = std::strtoll(text.c_str(), &end, 10);
    if (text.empty() || *end != '\0' || errno == ERANGE) usage(flag, "expected an integer, got '" + text + "'");
    return v;
}

double parse_double(const std::string& flag, const std::string& text) {
    char* end = nullptr;
    const double x = std::strtod(text.c_str(), &end);
    if (text.empty() || *end != '\0' || !std::isfinite(x)) usage(flag, "expected a finite real, got '" + text + "'");
    return x;
}

std::uint64_t ipow(std::uint64_t q, std::size_t L) {
    std::uint64_t n = 1;
    for (std::size_t i = 0; i < L; ++i) {
        if (n > (std::uint64_t{1} << 62) / q) throw InvalidArgument("q^L exceeds 2^62");
        n *= q;
    }
    return n;
}

std::string real_list(const std::vector<double>& xs) {
    std::vector<std::string> parts;
    for (double x : xs) parts.push_back(format_real(x));
    return join(parts, ';');
}

GammaMethod parse_method(const std::string& text) {
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
    const auto eq = rest.find('=');
    const std::string key = rest.substr(0, eq);
    const std::string value = eq == std::string::npos ? "" : rest.substr(eq + 1);
    if (name == "finite" && key == "N") {
        const auto N = parse_uint("--method", value);
        if (N == 0) usage("--method", "N must be positive");
        return GammaMethod::finite(N);
    }
    if (name == "series" && key == "depth") {
        const auto depth = parse_uint("--method", value);
        if (depth == 0 || depth > 64) usage("--method", "depth must be in [1, 64]");
        return GammaMethod::series(depth);
    }
    usage("--method", "expected finite:N=<int> or series:depth=<int>, got '" + text + "'");
}

std::string method_text(const GammaMethod& m) {
    return m.kind == GammaMethod::Kind::Finite ? "finite:N=" + std::to_string(m.N)
                                               : "series:depth=" + std::to_string(m.depth);
}

std::string carry_text(const CarryVector& r) { return r.to_string(); }

std::string pattern_residues(const ModResidues& m) {
    std::vector<std::string> parts;
    for (auto r : m.residues) parts.push_back(std::to_string(r));
    return join(parts, ',');
}

std::string pattern_cells(const IrrationalCells& c) {
    std::vector<std::string> parts;
    for (const auto& [a, b] : c.cells) parts.push_back(format_real(a) + ":" + format_real(b));
    return join(parts, ',');
}

const QMultSeq& require_table(const RunConfig& config, const Sequence& f) {
    if (!f.qmult()) usage("--seq", std::string(to_string(config.command)) +
                                       " needs a q-multiplicative sequence, got '" + config.seq_text + "'");
    return *f.qmult();
}

std::uint64_t budget_or(const RunConfig& config, std::uint64_t fallback) {
    return config.budget ? config.budget : fallback;
}

void check_budget(const char* what, double work, double budget) {
    if (work > budget) throw BudgetExceeded(what, work, budget);
}

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

const char* to_string(Command c) {
    for (const auto& [cmd, name] : kCommands)
        if (cmd == c) return name;
    return "?";
}

const char* to_string(Format f) { return f == Format::Csv ? "csv" : "json"; }

const char* to_string(NormMode m) {
    switch (m) {
        case NormMode::Brute: return "brute";
        case NormMode::Dp: return "dp";
        case NormMode::Recursive: return "recursive";
    }
    return "?";
}

std::string format_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_real(const std::string& text) {
    char* end = nullptr;
    const double x = std::strtod(text.c_str(), &end);
    if (text.empty() || *end != '\0') throw InvalidArgument("not a real number: '" + text + "'");
    return x;
}

RunConfig parse_args(const std::vector<std::string>& argv) {
    CLI::App app{"Numerical experiments on q-multiplicative sequences", "qmult"};
    app.require_subcommand(1, 1);

    // Values are captured as text and converted below, so every error can
    // name its flag and be checked against the resolved command.
    std::map<std::string, std::map<std::string, std::string>> values;
    std::map<std::string, bool> timing;
    const std::map<std::string, std::vector<std::string>> own = {
        {"norms", {"seq", "s", "L", "mode", "r", "l", "condition"}},
        {"supcorr", {"seq", "deg", "L", "beam", "grid"}},
        {"gelfond", {"seq", "deg", "Lmin", "Lmax", "beam", "grid"}},
        {"patterns", {"q", "Q", "k", "residues", "alpha", "cells", "N"}},
        {"gamma", {"seq", "R", "method"}},
        {"cesaro", {"seq", "L", "T"}},
        {"ergodic-demo", {"seq", "poly", "theta", "x0", "N"}},
        {"ledger", {"seq", "s", "block", "blocks", "l0"}},
    };
    const std::map<std::string, std::string> about = {
        {"norms", "Parallelepiped averages and U^s norms (brute, dp, recursive)"},
        {"supcorr", "Sup of polynomial-phase correlations per level"},
        {"gelfond", "Fitted Gelfond exponent over a range of levels"},
        {"patterns", "Counts of digit-sum patterns along arithmetic progressions"},
        {"gamma", "Correlation coefficients gamma_r"},
        {"cesaro", "Cesaro means at q^L and the Delange series"},
        {"ergodic-demo", "Weighted averages along a polynomial orbit of a rotation"},
        {"ledger", "Block-wise Gowers deficits of shifted sequences"},
    };
    std::map<std::string, CLI::App*> subs;
    for (const auto& [cmd, name] : kCommands) {
        auto* sub = app.add_subcommand(name, about.at(name));
        subs[name] = sub;
        auto& v = values[name];
        for (const auto& key : own.at(name)) sub->add_option("--" + key, v[key]);
        for (const char* key : {"threads", "budget", "seed", "format", "out"}) sub->add_option(std::string("--") + key, v[key]);
        sub->add_flag("--timing", timing[name], "Fill runtime_ms and record timings");
    }

    std::vector<const char*> args{"qmult"};
    for (const auto& a : argv) args.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(args.size()), args.data());
    } catch (const CLI::CallForHelp& e) {
        std::ostringstream help;
        app.exit(e, help, help);
        throw HelpRequested(help.str());
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    RunConfig c;
    std::string name;
    for (const auto& [cmd, n] : kCommands)
        if (subs[n]->parsed()) {
            c.command = cmd;
            name = n;
        }
    const auto& v = values[name];
    const auto given = [&](const std::string& key) { return subs[name]->count("--" + key) > 0; };
    const auto text = [&](const std::string& key) { return v.at(key); };
    const auto uint_or = [&](const std::string& key, std::uint64_t fallback) {
        return given(key) ? parse_uint("--" + key, text(key)) : fallback;
    };
    const auto real_or = [&](const std::string& key, double fallback) {
        return given(key) ? parse_double("--" + key, text(key)) : fallback;
    };
    const auto range = [](const std::string& flag, std::uint64_t x, std::uint64_t lo, std::uint64_t hi) {
        if (x < lo || x > hi)
            usage(flag, "value " + std::to_string(x) + " out of [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return x;
    };

    // Common flags.
    c.seed = uint_or("seed", 0);
    c.timing = timing[name];
    if (given("threads")) {
        c.threads = text("threads") == "auto" ? 0 : static_cast<unsigned>(range("--threads", parse_uint("--threads", text("threads")), 1, 1024));
    }
    c.budget = uint_or("budget", 0);
    if (given("budget") && c.budget == 0) usage("--budget", "must be positive");
    if (given("format")) {
        if (text("format") == "csv") c.format = Format::Csv;
        else if (text("format") == "json") c.format = Format::Json;
        else usage("--format", "expected csv or json, got '" + text("format") + "'");
    }
    if (given("out")) {
        if (text("out").empty()) usage("--out", "empty path");
        c.out = text("out");
    }

    std::optional<Sequence> seq;
    if (own.at(name).front() == "seq") {
        std::string s = given("seq") ? text("seq") : "tm";
        if (s.rfind("random", 0) == 0 && s.find("seed=") == std::string::npos)
            s += (s.find(':') == std::string::npos ? ":seed=" : ",seed=") + std::to_string(c.seed);
        try {
            c.seq = parse_seq_spec(s);
            validate(c.seq);
            seq = build(c.seq);
        } catch (const InvalidArgument& e) {
            usage("--seq", e.what());
        }
        c.seq_text = format_seq_spec(c.seq);
    }
    const auto need_table = [&] {
        if (!seq->qmult()) usage("--seq", name + " needs a q-multiplicative sequence, got '" + c.seq_text + "'");
        return seq->qmult();
    };

    switch (c.command) {
        case Command::Norms: {
            c.s = range("--s", uint_or("s", 2), 1, kMaxGowersOrder);
            c.L = range("--L", uint_or("L", 8), 0, 40);
            if (given("mode")) {
                const auto& m = text("mode");
                if (m == "brute") c.mode = NormMode::Brute;
                else if (m == "dp") c.mode = NormMode::Dp;
                else if (m == "recursive") c.mode = NormMode::Recursive;
                else usage("--mode", "expected brute, dp or recursive, got '" + m + "'");
            }
            if (given("r")) {
                std::vector<unsigned> entries;
                for (const auto& part : split(text("r"), ','))
                    entries.push_back(static_cast<unsigned>(range("--r", parse_uint("--r", part), 0, c.s)));
                if (entries.size() != (std::size_t{1} << c.s))
                    usage("--r", "expected " + std::to_string(std::size_t{1} << c.s) + " entries, got " + std::to_string(entries.size()));
                c.r = CarryVector(c.s, entries);
            }
            c.step = range("--l", uint_or("l", 1), 0, c.L);
            if (given("condition")) {
                const auto& m = text("condition");
                if (m == "none") c.condition = BoxCondition::None;
                else if (m == "sum-below-qL") c.condition = BoxCondition::SumBelowQL;
                else usage("--condition", "expected none or sum-below-qL, got '" + m + "'");
            }
            if (given("l") && c.mode != NormMode::Recursive) usage("--l", "only used with --mode recursive");
            if (given("condition") && c.mode != NormMode::Dp) usage("--condition", "only used with --mode dp");
            if (c.mode != NormMode::Brute) need_table();
            try {
                ipow(seq->base(), c.L);
            } catch (const InvalidArgument&) {
                usage("--L", "q^L exceeds 2^62");
            }
            break;
        }
        case Command::Supcorr:
            c.deg = range("--deg", uint_or("deg", 1), 1, 6);
            c.L = range("--L", uint_or("L", 12), 1, 40);
            c.beam = range("--beam", uint_or("beam", 64), 1, 1u << 20);
            c.grid = range("--grid", uint_or("grid", 256), 2, 1u << 24);
            if (std::pow(double(seq->base()), double(c.L)) > 0x1p62) usage("--L", "q^L exceeds 2^62");
            break;
        case Command::Gelfond:
            c.deg = range("--deg", uint_or("deg", 1), 1, 6);
            c.Lmin = range("--Lmin", uint_or("Lmin", 8), 1, 40);
            c.Lmax = range("--Lmax", uint_or("Lmax", 18), 1, 40);
            c.beam = range("--beam", uint_or("beam", 64), 1, 1u << 20);
            c.grid = range("--grid", uint_or("grid", 64), 2, 1u << 24);
            if (c.Lmax < c.Lmin + 2) usage("--Lmax", "need at least three levels from --Lmin");
            if (std::pow(double(seq->base()), double(c.Lmax)) > 0x1p62) usage("--Lmax", "q^L exceeds 2^62");
            break;
        case Command::Patterns: {
            PatternSpec spec;
            spec.q = static_cast<unsigned>(range("--q", uint_or("q", 2), 2, 1u << 16));
            if (given("alpha") || given("cells")) {
                if (given("residues") || given("Q")) usage(given("Q") ? "--Q" : "--residues", "cannot be combined with --alpha/--cells");
                if (!given("alpha") || !given("cells")) usage(given("alpha") ? "--cells" : "--alpha", "required with the other");
                IrrationalCells cells;
                cells.alpha = parse_double("--alpha", text("alpha"));
                for (const auto& part : split(text("cells"), ',')) {
                    const auto pieces = split(part, ':');
                    if (pieces.size() != 2) usage("--cells", "expected a:b, got '" + part + "'");
                    cells.cells.emplace_back(parse_double("--cells", pieces[0]), parse_double("--cells", pieces[1]));
                }
                spec.kind = cells;
            } else {
                if (!given("residues")) usage("--residues", "required (or --alpha with --cells)");
                ModResidues mod;
                mod.Q = parse_int("--Q", given("Q") ? text("Q") : "3");
                for (const auto& part : split(text("residues"), ',')) mod.residues.push_back(parse_int("--residues", part));
                spec.kind = mod;
            }
            if (given("k") && parse_uint("--k", text("k")) != spec.k())
                usage("--k", "is " + text("k") + " but " + std::to_string(spec.k()) + " constraints were given");
            try {
                validate(spec);
            } catch (const InvalidArgument& e) {
                usage(std::holds_alternative<ModResidues>(spec.kind) ? "--Q" : "--cells", e.what());
            }
            c.pattern = spec;
            c.N = range("--N", uint_or("N", 1024), 1, std::uint64_t{1} << 26);
            break;
        }
        case Command::Gamma:
            c.R = range("--R", uint_or("R", 4096), 1, std::uint64_t{1} << 24);
            c.method = given("method") ? parse_method(text("method"))
                                       : (seq->qmult() ? GammaMethod::series(30) : GammaMethod::finite(65536));
            if (c.method.kind == GammaMethod::Kind::Series) need_table();
            break;
        case Command::Cesaro:
            need_table();
            c.L = range("--L", uint_or("L", 16), 0, 62);
            c.T = range("--T", uint_or("T", 64), 1, 1u << 20);
            break;
        case Command::ErgodicDemo:
            if (given("poly")) {
                std::vector<double> coeffs;
                for (const auto& part : split(text("poly"), ';')) {
                    const double x = parse_double("--poly", part);
                    if (x != std::floor(x)) usage("--poly", "coefficients must be integers, got '" + part + "'");
                    coeffs.push_back(x);
                }
                c.poly = PolyPhase(coeffs);
            }
            c.theta = real_or("theta", c.theta);
            c.x0 = real_or("x0", 0.0);
            c.N = range("--N", uint_or("N", 65536), 1, std::uint64_t{1} << 36);
            break;
        case Command::Ledger:
            need_table();
            c.s = range("--s", uint_or("s", 2), 1, kMaxGowersOrder);
            c.l0 = range("--l0", uint_or("l0", 2), 1, 40);
            c.block = range("--block", uint_or("block", 3), c.l0, 40);
            c.blocks = range("--blocks", uint_or("blocks", 3), 1, 64);
            break;
    }
    return c;
}

std::vector<std::pair<std::string, std::string>> config_pairs(const RunConfig& c) {
    std::vector<std::pair<std::string, std::string>> p;
    p.emplace_back("command", to_string(c.command));
    const auto add = [&](const char* key, std::string value) { p.emplace_back(key, std::move(value)); };
    const auto num = [](auto x) { return std::to_string(x); };
    if (c.command != Command::Patterns) add("seq", c.seq_text);
    switch (c.command) {
        case Command::Norms:
            add("s", num(c.s));
            add("L", num(c.L));
            add("mode", to_string(c.mode));
            add("r", carry_text(c.r.value_or(CarryVector(c.s))));
            if (c.mode == NormMode::Recursive) add("l", num(c.step));
            if (c.mode == NormMode::Dp) add("condition", to_string(c.condition));
            break;
        case Command::Supcorr:
            add("deg", num(c.deg));
            add("L", num(c.L));
            add("beam", num(c.beam));
            add("grid", num(c.grid));
            break;
        case Command::Gelfond:
            add("deg", num(c.deg));
            add("Lmin", num(c.Lmin));
            add("Lmax", num(c.Lmax));
            add("beam", num(c.beam));
            add("grid", num(c.grid));
            break;
        case Command::Patterns: {
            const auto& spec = *c.pattern;
            add("q", num(spec.q));
            add("k", num(spec.k()));
            if (const auto* mod = std::get_if<ModResidues>(&spec.kind)) {
                add("Q", num(mod->Q));
                add("residues", pattern_residues(*mod));
            } else {
                const auto& cells = std::get<IrrationalCells>(spec.kind);
                add("alpha", format_real(cells.alpha));
                add("cells", pattern_cells(cells));
            }
            add("N", num(c.N));
            break;
        }
        case Command::Gamma:
            add("R", num(c.R));
            add("method", method_text(c.method));
            break;
        case Command::Cesaro:
            add("L", num(c.L));
            add("T", num(c.T));
            break;
        case Command::ErgodicDemo:
            add("poly", real_list(c.poly.coeffs));
            add("theta", format_real(c.theta));
            add("x0", format_real(c.x0));
            add("N", num(c.N));
            break;
        case Command::Ledger:
            add("s", num(c.s));
            add("block", num(c.block));
            add("blocks", num(c.blocks));
            add("l0", num(c.l0));
            break;
    }
    add("budget", num(c.budget));
    add("seed", num(c.seed));
    add("format", to_string(c.format));
    return p;
}

std::string config_hash(const RunConfig& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& [k, v] : config_pairs(config))
        for (char ch : k + "=" + v + "\n") {
            h ^= static_cast<unsigned char>(ch);
            h *= 0x100000001b3ULL;
        }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::size_t Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw InvalidArgument("no column '" + name + "'");
}

Table run(const RunConfig& c) {
    const auto start = Clock::now();
    Table t;
    const auto ms = [&] { return c.timing ? format_real(elapsed_ms(start)) : std::string(); };
    const auto num = [](auto x) { return std::to_string(x); };
    const auto complex_cells = [](std::complex<double> z) {
        return std::vector<std::string>{format_real(z.real()), format_real(z.imag())};
    };
    const Sequence f = c.command == Command::Patterns ? Sequence(QMultSeq::ones(2)) : build(c.seq);
    const unsigned q = f.base();

    switch (c.command) {
        case Command::Norms: {
            t.columns = {"s", "L", "method", "r", "value", "im", "norm", "error_bound", "runtime_ms"};
            const CarryVector r = c.r.value_or(CarryVector(c.s));
            const auto budget = budget_or(c, kDefaultWorkBudget);
            std::complex<double> value;
            double bound = 0.0;
            std::string method = to_string(c.mode);
            switch (c.mode) {
                case NormMode::Brute:
                    value = parallelepiped_average(f, r, c.L, budget);
                    break;
                case NormMode::Recursive: {
                    const auto rec = recursive_average(require_table(c, f), r, c.L, c.step, budget);
                    value = rec.value;
                    bound = rec.error_bound;
                    break;
                }
                case NormMode::Dp:
                    value = box_average_exact(require_table(c, f), r, c.L, c.condition);
                    method += std::string(":") + to_string(c.condition);
                    break;
            }
            // The U^s norm only applies to the Pi average at r = 0.
            std::string norm;
            if (r.is_zero() && c.mode != NormMode::Dp)
                norm = format_real(std::pow(std::max(value.real(), 0.0), 1.0 / double(std::size_t{1} << c.s)));
            t.rows.push_back({num(c.s), num(c.L), method, carry_text(r), format_real(value.real()),
                              format_real(value.imag()), norm, format_real(bound), ms()});
            break;
        }
        case Command::Supcorr: {
            t.columns = {"L", "N", "value", "alpha_star", "runtime_ms"};
            const bool linear = c.deg == 1 && f.qmult();
            const auto budget = budget_or(c, kDefaultWorkBudget);
            if (!linear)
                check_budget("supcorr coordinate search", 16.0 * c.deg * c.grid * 2.0 * std::pow(double(q), double(c.L)),
                             double(budget));
            for (std::size_t L = 1; L <= c.L; ++L) {
                const auto row_start = Clock::now();
                std::string value, alpha;
                if (linear) {
                    const auto sup = sup_linear_correlation(*f.qmult(), L, c.beam);
                    value = format_real(sup.value);
                    alpha = format_real(sup.alpha.value());
                } else {
                    const auto sup = sup_poly_correlation(f, c.deg, ipow(q, L), c.grid);
                    value = format_real(sup.value);
                    alpha = real_list(sup.p.coeffs);
                }
                t.rows.push_back({num(L), num(ipow(q, L)), value, alpha,
                                  c.timing ? format_real(elapsed_ms(row_start)) : std::string()});
            }
            break;
        }
        case Command::Gelfond: {
            t.columns = {"L", "N", "value", "alpha_star", "runtime_ms"};
            GelfondOptions options;
            options.order = c.deg;
            options.min_level = c.Lmin;
            options.max_level = c.Lmax;
            options.beam = c.beam;
            options.grid_density = c.grid;
            if (c.deg != 1 || !f.qmult())
                check_budget("gelfond coordinate search",
                             16.0 * c.deg * c.grid * 4.0 * std::pow(double(q), double(c.Lmax)),
                             double(budget_or(c, kDefaultWorkBudget)));
            const auto report = fit_gelfond_exponent(f, options);
            const auto total = ms();
            for (const auto& p : report.scales)
                t.rows.push_back({num(p.level), num(p.N), format_real(p.value), real_list(p.argmax), total});
            t.summary = {{"exponent", format_real(report.fitted_exponent)},
                         {"fit_residual", format_real(report.fit_residual)},
                         {"method", to_string(report.method)}};
            break;
        }
        case Command::Patterns: {
            t.columns = {"N", "count", "density"};
            const auto report = count_ap_patterns(*c.pattern, c.N, budget_or(c, kPatternBudget));
            for (const auto& p : report.series) t.rows.push_back({num(p.N), num(p.count), format_real(p.density)});
            t.summary = {{"count", num(report.count)},
                         {"density", format_real(report.density)},
                         {"zero", report.zero ? "true" : "false"}};
            break;
        }
        case Command::Gamma: {
            t.columns = {"r", "re", "im", "err"};
            if (c.method.kind == GammaMethod::Kind::Finite)
                check_budget("gamma finite sums", double(c.R) * double(c.method.N) * 2.0,
                             double(budget_or(c, kDefaultWorkBudget)));
            const auto series = correlation_series(f, c.R, c.method);
            double density = 0.0;
            for (std::uint64_t r = 0; r < c.R; ++r) {
                auto row = complex_cells(series.gamma[r]);
                row.insert(row.begin(), num(r));
                row.push_back(format_real(series.error_estimate[r]));
                t.rows.push_back(std::move(row));
                density += std::norm(series.gamma[r]);
            }
            t.summary = {{"density", format_real(density / double(c.R))}};
            break;
        }
        case Command::Cesaro: {
            t.columns = {"L", "N", "re", "im", "abs"};
            const auto& table = require_table(c, f);
            for (std::size_t L = 0; L <= c.L; ++L) {
                const auto m = cesaro_mean(table, L);
                const double N = std::pow(double(q), double(L));
                auto row = complex_cells(m);
                row.insert(row.begin(), {num(L), N < 0x1p64 ? num(static_cast<std::uint64_t>(N)) : format_real(N)});
                row.push_back(format_real(std::abs(m)));
                t.rows.push_back(std::move(row));
            }
            t.summary = {{"delange", format_real(delange_criterion(table, c.T))}};
            break;
        }
        case Command::ErgodicDemo: {
            t.columns = {"N", "re", "im", "abs"};
            check_budget("ergodic average", double(c.N) * double(c.poly.coeffs.size()),
                         double(budget_or(c, kDefaultWorkBudget)));
            for (const auto& p : weighted_birkhoff_demo(f, c.poly, c.theta, c.x0, c.N)) {
                auto row = complex_cells(p.average);
                row.insert(row.begin(), num(p.N));
                row.push_back(format_real(std::abs(p.average)));
                t.rows.push_back(std::move(row));
            }
            break;
        }
        case Command::Ledger: {
            t.columns = {"i", "breakpoint", "length", "epsilon", "cumulative"};
            const auto ledger = epsilon_ledger(require_table(c, f), c.s, BlockPolicy::constant(c.block, c.blocks, c.l0),
                                               budget_or(c, kDefaultWorkBudget));
            for (std::size_t i = 0; i < ledger.epsilons.size(); ++i)
                t.rows.push_back({num(i), num(ledger.breakpoints[i]), num(ledger.lengths[i]),
                                  format_real(ledger.epsilons[i]), format_real(ledger.cumulative[i])});
            t.summary = {{"final_breakpoint", num(ledger.breakpoints.back())},
                         {"average_re", format_real(ledger.average.real())},
                         {"average_im", format_real(ledger.average.imag())}};
            break;
        }
    }
    return t;
}

void write_csv(const Table& table, std::ostream& os) {
    const auto field = [&](const std::string& s) {
        if (s.find_first_of(",\"\r\n") == std::string::npos) {
            os << s;
            return;
        }
        os << '"';
        for (char ch : s) {
            if (ch == '"') os << '"';
            os << ch;
        }
        os << '"';
    };
    const auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os << ',';
            field(cells[i]);
        }
        os << '\n';
    };
    line(table.columns);
    for (const auto& row : table.rows) line(row);
}

Table read_csv(std::istream& is) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string cell;
    bool quoted = false, any = false;
    char ch;
    const auto end_record = [&] {
        record.push_back(std::move(cell));
        records.push_back(std::move(record));
        record.clear();
        cell.clear();
        any = false;
    };
    while (is.get(ch)) {
        if (quoted) {
            if (ch == '"') {
                if (is.peek() == '"') {
                    is.get(ch);
                    cell += '"';
                } else {
                    quoted = false;
                }
            } else {
                cell += ch;
            }
            continue;
        }
        any = true;
        if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            record.push_back(std::move(cell));
            cell.clear();
        } else if (ch == '\n') {
            end_record();
        } else if (ch != '\r') {
            cell += ch;
        }
    }
    if (quoted) throw InvalidArgument("csv: unterminated quoted field");
    if (any) end_record();
    if (records.empty()) throw InvalidArgument("csv: missing header row");
    Table t;
    t.columns = std::move(records.front());
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (records[i].size() != t.columns.size())
            throw InvalidArgument("csv: record " + std::to_string(i) + " has " + std::to_string(records[i].size()) +
                                  " fields, header has " + std::to_string(t.columns.size()));
        t.rows.push_back(std::move(records[i]));
    }
    return t;
}

void write_json(const Table& table, const RunConfig& config, std::ostream& os) {
    json doc;
    doc["command"] = to_string(config.command);
    json cfg = json::object();
    for (const auto& [k, v] : config_pairs(config)) cfg[k] = v;
    doc["config"] = cfg;
    doc["config_hash"] = config_hash(config);
    doc["columns"] = table.columns;
    doc["rows"] = table.rows;
    json summary = json::object();
    for (const auto& [k, v] : table.summary) summary[k] = v;
    doc["summary"] = summary;
    os << doc.dump(2) << '\n';
}

Table read_json(std::istream& is) {
    try {
        const auto doc = json::parse(is);
        Table t;
        t.columns = doc.at("columns").get<std::vector<std::string>>();
        t.rows = doc.at("rows").get<std::vector<std::vector<std::string>>>();
        for (const auto& [k, v] : doc.at("summary").items()) t.summary.emplace_back(k, v.get<std::string>());
        for (const auto& row : t.rows)
            if (row.size() != t.columns.size()) throw InvalidArgument("json: row width differs from columns");
        return t;
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("json: ") + e.what());
    }
}

std::optional<std::filesystem::path> output_path(const RunConfig& config) {
    const char* env = std::getenv(kOutputDirEnv);
    const std::filesystem::path dir = env && *env ? env : "";
    if (config.out) return config.out->is_absolute() || dir.empty() ? *config.out : dir / *config.out;
    if (dir.empty()) return std::nullopt;
    return dir / (std::string(to_string(config.command)) + "." + to_string(config.format));
}

void emit_results(const Table& table, const RunConfig& config, const std::optional<std::filesystem::path>& path,
                  std::ostream& os, double runtime_ms) {
    const auto write = [&](std::ostream& out) {
        if (config.format == Format::Csv) write_csv(table, out);
        else write_json(table, config, out);
    };
    if (!path) {
        write(os);
        return;
    }
    const auto open = [](const std::filesystem::path& p) {
        std::error_code ec;
        if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + p.string() + " for writing: " + std::strerror(errno));
        return out;
    };
    {
        auto out = open(*path);
        write(out);
        out.flush();
        if (!out) throw IoError("write failed for " + path->string());
    }

    json meta;
    json cfg = json::object();
    for (const auto& [k, v] : config_pairs(config)) cfg[k] = v;
    cfg["threads"] = config.threads ? std::to_string(config.threads) : "auto";
    cfg["timing"] = config.timing ? "true" : "false";
    meta["output"] = path->string();
    meta["config"] = cfg;
    meta["config_hash"] = config_hash(config);
    meta["versions"] = {{"qmult", kVersion}, {"cli11", CLI11_VERSION},
                        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                        {"compiler", __VERSION__}};
    meta["threads_used"] = std::to_string(thread_count());
    meta["runtime_ms"] = format_real(runtime_ms);
    meta["rows"] = std::to_string(table.rows.size());
    json summary = json::object();
    for (const auto& [k, v] : table.summary) summary[k] = v;
    meta["summary"] = summary;
    auto sidecar_path = *path;
    sidecar_path += ".meta.json";
    auto out = open(sidecar_path);
    out << meta.dump(2) << '\n';
    out.flush();
    if (!out) throw IoError("write failed for " + sidecar_path.string());
}

int main_entry(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    RunConfig config;
    try {
        config = parse_args(argv);
    } catch (const HelpRequested& h) {
        out << h.what();
        return 0;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n(run with --help for the list of commands and flags)\n";
        return 2;
    }
    try {
        set_thread_count(config.threads);
        const auto start = Clock::now();
        const auto table = run(config);
        emit_results(table, config, output_path(config), out, elapsed_ms(start));
        return 0;
    } catch (const BudgetExceeded& e) {
        err << "budget exceeded: " << e.what();
        if (config.command == Command::Norms && config.mode == NormMode::Brute)
            err << "; try --mode dp or --mode recursive, or raise --budget";
        else
            err << "; raise --budget or reduce the problem size";
        err << '\n';
        return 3;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return 4;
    } catch (const InvalidArgument& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace qmult::cli
