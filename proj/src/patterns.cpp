#include "qmult/patterns.hpp"

#include <cmath>
#include <numeric>

#include "qmult/errors.hpp"
#include "qmult/parallel.hpp"
#include "qmult/summation.hpp"

namespace qmult {

std::size_t PatternSpec::k() const {
    return std::visit(
        [](const auto& kind) {
            using T = std::decay_t<decltype(kind)>;
            if constexpr (std::is_same_v<T, ModResidues>)
                return kind.residues.size();
            else
                return kind.cells.size();
        },
        this->kind);
}

void validate(const PatternSpec& spec) {
    if (spec.q < 2) throw InvalidArgument("base q must be >= 2");
    const std::size_t k = spec.k();
    if (k < 1 || k > 64) throw InvalidArgument("progression length k must be in [1, 64]");
    if (const auto* mod = std::get_if<ModResidues>(&spec.kind)) {
        if (mod->Q < 1) throw InvalidArgument("modulus Q must be >= 1");
        // s_q(n) = n mod (q - 1) makes some residue patterns of progressions
        // unreachable otherwise; a single term has no such obstruction.
        if (k >= 2 && std::gcd(mod->Q, static_cast<std::int64_t>(spec.q) - 1) != 1)
            throw InvalidArgument("modulus Q = " + std::to_string(mod->Q) + " must be coprime to q - 1 = " +
                                  std::to_string(spec.q - 1));
        for (auto r : mod->residues)
            if (r < 0 || r >= mod->Q) throw InvalidArgument("residues must lie in [0, Q)");
    } else {
        const auto& cells = std::get<IrrationalCells>(spec.kind);
        if (!std::isfinite(cells.alpha)) throw InvalidArgument("alpha must be finite");
        for (const auto& [a, b] : cells.cells)
            if (!(0.0 <= a && a < b && b <= 1.0))
                throw InvalidArgument("cells must be intervals [a, b) with 0 <= a < b <= 1");
    }
}

namespace {

// Bit j of mask[n] is set when n satisfies constraint j.
std::vector<std::uint64_t> constraint_masks(const PatternSpec& spec, std::uint64_t N) {
    std::vector<std::uint64_t> mask(N, 0);
    const std::size_t k = spec.k();
    for (std::uint64_t n = 0; n < N; ++n) {
        const std::uint64_t digits = sum_of_digits(spec.q, n);
        std::uint64_t bits = 0;
        if (const auto* mod = std::get_if<ModResidues>(&spec.kind)) {
            const auto residue = static_cast<std::int64_t>(digits % static_cast<std::uint64_t>(mod->Q));
            for (std::size_t j = 0; j < k; ++j)
                if (mod->residues[j] == residue) bits |= std::uint64_t{1} << j;
        } else {
            const auto& cells = std::get<IrrationalCells>(spec.kind);
            const long double x = static_cast<long double>(cells.alpha) * static_cast<long double>(digits);
            const double frac = static_cast<double>(x - std::floor(x));
            for (std::size_t j = 0; j < k; ++j)
                if (cells.cells[j].first <= frac && frac < cells.cells[j].second) bits |= std::uint64_t{1} << j;
        }
        mask[n] = bits;
    }
    return mask;
}

std::vector<std::uint64_t> ladder(std::uint64_t N) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t x = 2; x < N; x *= 2) out.push_back(x);
    out.push_back(N);
    return out;
}

double density_of(std::uint64_t count, std::uint64_t N, std::size_t k) {
    const auto n = static_cast<double>(N);
    return static_cast<double>(count) / (k == 1 ? n : n * n);
}

}  // namespace

CountReport count_ap_patterns(const PatternSpec& spec, std::uint64_t N, std::uint64_t budget) {
    validate(spec);
    if (N < 1) throw InvalidArgument("pattern counts need N >= 1");
    if (N > (std::uint64_t{1} << 26)) throw BudgetExceeded("digit-sum table", static_cast<double>(N), 67108864.0);
    const std::size_t k = spec.k();
    const auto mask = constraint_masks(spec, N);
    const auto rungs = ladder(N);

    std::vector<std::uint64_t> totals(rungs.size(), 0);
    if (k == 1) {
        for (std::size_t i = 0, rung = 0; i < N; ++i) {
            while (i >= rungs[rung]) ++rung;
            if (mask[i] & 1)
                for (std::size_t j = rung; j < rungs.size(); ++j) ++totals[j];
        }
    } else {
        const std::uint64_t steps = k - 1;
        const std::uint64_t m_max = (N - 1) / steps;  // n = 0 needs (k-1) m <= N - 1
        const double pairs = static_cast<double>(m_max) * static_cast<double>(N) -
                             static_cast<double>(steps) * static_cast<double>(m_max) * (m_max + 1) / 2.0;
        if (pairs > static_cast<double>(budget)) throw BudgetExceeded("progression count", pairs, double(budget));
        // Slot m - 1 holds the counts of progressions with difference m per rung.
        std::vector<std::vector<std::uint64_t>> per_m(m_max, std::vector<std::uint64_t>(rungs.size(), 0));
        parallel_for(m_max, [&](std::size_t slot) {
            const std::uint64_t m = slot + 1;
            auto& counts = per_m[slot];
            std::size_t rung = 0;
            std::uint64_t running = 0;
            for (std::uint64_t n = 0; n + steps * m < N; ++n) {
                const std::uint64_t end = n + steps * m;
                while (end >= rungs[rung]) counts[rung++] = running;
                bool ok = true;
                for (std::uint64_t j = 0; j < k && ok; ++j) ok = mask[n + j * m] >> j & 1;
                running += ok;
            }
            for (; rung < rungs.size(); ++rung) counts[rung] = running;
        });
        for (const auto& counts : per_m)
            for (std::size_t j = 0; j < rungs.size(); ++j) totals[j] += counts[j];
    }

    CountReport report;
    report.N = N;
    report.count = totals.back();
    report.density = density_of(report.count, N, k);
    report.zero = report.count == 0;
    for (std::size_t j = 0; j < rungs.size(); ++j)
        report.series.push_back({rungs[j], totals[j], density_of(totals[j], rungs[j], k)});
    return report;
}

CountReport count_ap_cells(const PatternSpec& spec, std::uint64_t N, std::uint64_t budget) {
    if (!std::holds_alternative<IrrationalCells>(spec.kind))
        throw InvalidArgument("count_ap_cells needs an irrational-cells pattern");
    return count_ap_patterns(spec, N, budget);
}

std::vector<BirkhoffPoint> weighted_birkhoff_demo(const Sequence& f, const PolyPhase& p, double theta, double x0,
                                                  std::uint64_t N) {
    if (N < 1) throw InvalidArgument("ergodic averages need N >= 1");
    if (!std::isfinite(theta) || !std::isfinite(x0)) throw InvalidArgument("theta and x0 must be finite");
    std::vector<std::int64_t> coeffs;
    for (double c : p.coeffs) {
        if (c != std::floor(c) || std::abs(c) > 9007199254740992.0)
            throw InvalidArgument("p must have integer coefficients, got " + p.to_string());
        coeffs.push_back(static_cast<std::int64_t>(c));
    }
    const Phase rotation(theta), start(x0);
    const auto fp = f.phases(N);
    const auto rungs = ladder(N);
    std::vector<BirkhoffPoint> out;
    ComplexCompensatedSum acc;
    std::size_t rung = 0;
    for (std::uint64_t n = 0; n < N; ++n) {
        // p(n) modulo 2^64 gives the phase exactly; the sign check only
        // needs an approximate value.
        long double approx = 0, power = 1;
        std::uint64_t wrapped = 0, wpower = 1;
        for (auto c : coeffs) {
            approx += static_cast<long double>(c) * power;
            wrapped += static_cast<std::uint64_t>(c) * wpower;
            power *= static_cast<long double>(n);
            wpower *= n;
        }
        if (approx < -0.5L)
            throw InvalidArgument("p must be nonnegative on [0, N); p(" + std::to_string(n) + ") < 0");
        acc.add(unit(fp[n] + start + rotation * wrapped));
        if (n + 1 == rungs[rung]) {
            out.push_back({n + 1, acc.value() / static_cast<double>(n + 1)});
            ++rung;
        }
    }
    return out;
}

}  // namespace qmult
