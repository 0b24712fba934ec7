#include "qmult/seqspec.hpp"

#include <charconv>
#include <cstdio>
#include <map>
#include <set>

#include "qmult/errors.hpp"

namespace qmult {
namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

class KeyValues {
  public:
    KeyValues(std::string name, std::string_view body) : name_(std::move(name)) {
        if (body.empty()) return;
        std::size_t pos = 0;
        while (pos <= body.size()) {
            const auto comma = body.find(',', pos);
            const auto item = body.substr(pos, comma == std::string_view::npos ? body.npos : comma - pos);
            const auto eq = item.find('=');
            if (eq == std::string_view::npos)
                throw InvalidArgument("sequence '" + name_ + "': expected key=value, got '" +
                                      std::string(item) + "'");
            const auto key = trim(item.substr(0, eq));
            if (!values_.emplace(key, trim(item.substr(eq + 1))).second)
                throw InvalidArgument("sequence '" + name_ + "': duplicate key '" + key + "'");
            if (comma == std::string_view::npos) break;
            pos = comma + 1;
        }
    }

    void allow(std::initializer_list<const char*> keys) const {
        std::set<std::string> ok(keys.begin(), keys.end());
        for (const auto& [k, v] : values_)
            if (!ok.count(k)) throw InvalidArgument("sequence '" + name_ + "': unknown key '" + k + "'");
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    double real(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : parse_real(key, it->second);
    }

    template <class Int>
    Int integer(const std::string& key, Int fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        Int out{};
        const auto& s = it->second;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        if (ec != std::errc{} || ptr != s.data() + s.size())
            throw InvalidArgument("sequence '" + name_ + "': " + key + " = '" + s +
                                  "' is not a valid integer");
        return out;
    }

    std::vector<double> list(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) return {};
        std::vector<double> out;
        std::string_view s = it->second;
        std::size_t pos = 0;
        while (true) {
            const auto semi = s.find(';', pos);
            out.push_back(parse_real(key, trim(s.substr(pos, semi == s.npos ? s.npos : semi - pos))));
            if (semi == s.npos) break;
            pos = semi + 1;
        }
        return out;
    }

  private:
    double parse_real(const std::string& key, const std::string& s) const {
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (s.empty() || end != s.c_str() + s.size())
            throw InvalidArgument("sequence '" + name_ + "': " + key + " = '" + s +
                                  "' is not a number");
        return v;
    }

    std::string name_;
    std::map<std::string, std::string> values_;
};

std::string real_text(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

SeqSpec parse_seq_spec(std::string_view text) {
    const auto colon = text.find(':');
    const std::string name = trim(text.substr(0, colon));
    const std::string_view body = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
    KeyValues kv(name, body);

    SeqSpec spec;
    if (name == "tm" || name == "thue-morse") {
        kv.allow({});
        spec = ThueMorse{};
    } else if (name == "gtm") {
        kv.allow({"tau"});
        spec = GenThueMorse{kv.real("tau", 0.5)};
    } else if (name == "digitsum") {
        kv.allow({"q", "alpha"});
        spec = DigitSumPhase{kv.integer<unsigned>("q", 2), kv.real("alpha", 0.0)};
    } else if (name == "dsmod") {
        kv.allow({"q", "p", "Q"});
        spec = DigitSumModQ{kv.integer<unsigned>("q", 2), kv.integer<std::int64_t>("p", 1),
                            kv.integer<std::int64_t>("Q", 2)};
    } else if (name == "strong") {
        kv.allow({"q", "phases"});
        spec = Strong{kv.integer<unsigned>("q", 2), kv.list("phases")};
    } else if (name == "random") {
        kv.allow({"q", "levels", "seed"});
        spec = RandomSeq{kv.integer<unsigned>("q", 2), kv.integer<std::size_t>("levels", 32),
                         kv.integer<std::uint64_t>("seed", 0)};
    } else if (name == "periodic") {
        kv.allow({"q", "p"});
        spec = PeriodicSeq{kv.integer<unsigned>("q", 3), kv.integer<std::int64_t>("p", 1)};
    } else if (name == "rudin-shapiro" || name == "rs") {
        kv.allow({});
        spec = RudinShapiro{};
    } else {
        throw InvalidArgument("unknown sequence name '" + name + "'");
    }
    validate(spec);
    return spec;
}

std::string format_seq_spec(const SeqSpec& spec) {
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ThueMorse>) {
                return "tm";
            } else if constexpr (std::is_same_v<T, GenThueMorse>) {
                return "gtm:tau=" + real_text(s.tau);
            } else if constexpr (std::is_same_v<T, DigitSumPhase>) {
                return "digitsum:q=" + std::to_string(s.q) + ",alpha=" + real_text(s.alpha);
            } else if constexpr (std::is_same_v<T, DigitSumModQ>) {
                return "dsmod:q=" + std::to_string(s.q) + ",p=" + std::to_string(s.p) +
                       ",Q=" + std::to_string(s.Q);
            } else if constexpr (std::is_same_v<T, Strong>) {
                std::string out = "strong:q=" + std::to_string(s.q) + ",phases=";
                for (std::size_t i = 0; i < s.phases.size(); ++i)
                    out += (i ? ";" : "") + real_text(s.phases[i]);
                return out;
            } else if constexpr (std::is_same_v<T, RandomSeq>) {
                return "random:q=" + std::to_string(s.q) + ",levels=" + std::to_string(s.levels) +
                       ",seed=" + std::to_string(s.seed);
            } else if constexpr (std::is_same_v<T, PeriodicSeq>) {
                return "periodic:q=" + std::to_string(s.q) + ",p=" + std::to_string(s.p);
            } else {
                return "rudin-shapiro";
            }
        },
        spec);
}

}  // namespace qmult
