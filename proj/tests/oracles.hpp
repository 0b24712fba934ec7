#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <bit>
#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "qmult/gowers.hpp"
#include "qmult/seqcore.hpp"

namespace oracle {

inline std::complex<double> value_at(const qmult::Sequence& f, std::int64_t n, bool conjugate) {
    const auto z = f(static_cast<std::uint64_t>(n));
    return conjugate ? std::conj(z) : z;
}

// E over [q^L]^(s+1) of prod_omega C^|omega| f(omega . e + r_omega), optionally
// conditioned on e_0 + ... + e_s + r_{1..1} < q^L. The sum over (e_0, e_s) is
// done with prefix sums over e_0 + e_s for each fixed (e_1, ..., e_{s-1}).
// Both conditioning modes from one pass: {unconditioned, conditioned}.
inline std::pair<std::complex<double>, std::complex<double>> box_averages(const qmult::Sequence& f,
                                                                          const qmult::CarryVector& r,
                                                                          std::size_t L) {
    const std::size_t s = r.order();
    const std::size_t half = std::size_t{1} << (s - 1);
    std::int64_t Q = 1;
    for (std::size_t i = 0; i < L; ++i) Q *= f.base();
    std::vector<std::complex<double>> F(static_cast<std::size_t>((s + 1) * Q + s + 1));
    for (std::size_t n = 0; n < F.size(); ++n) F[n] = f(n);

    std::complex<long double> total = 0, total_below = 0;
    long double count = 0, count_below = 0;
    std::vector<std::int64_t> mid(s > 1 ? s - 1 : 0, 0);
    std::vector<std::complex<double>> G0(Q), prefix(2 * Q);
    while (true) {
        std::vector<std::int64_t> offset(half, 0);
        std::int64_t mid_sum = 0;
        for (std::size_t w = 0; w < half; ++w)
            for (std::size_t i = 0; i + 1 < s; ++i)
                if (w >> i & 1) offset[w] += mid[i];
        for (auto e : mid) mid_sum += e;
        for (std::int64_t x = 0; x < Q; ++x) {
            std::complex<double> p = 1.0;
            for (std::size_t w = 0; w < half; ++w) {
                const auto z = F[x + offset[w] + r[w]];
                p *= std::popcount(w) % 2 ? std::conj(z) : z;
            }
            G0[x] = p;
        }
        prefix[0] = 0.0;
        for (std::int64_t y = 0; y + 1 < 2 * Q; ++y) {
            std::complex<double> p = 1.0;
            for (std::size_t w = 0; w < half; ++w) {
                const auto z = F[y + offset[w] + r[w | half]];
                p *= std::popcount(w) % 2 ? z : std::conj(z);
            }
            prefix[y + 1] = prefix[y] + p;
        }
        const std::int64_t cap = static_cast<std::int64_t>(Q) - mid_sum - r[2 * half - 1];
        for (std::int64_t x = 0; x < Q; ++x) {
            const std::int64_t hi = x + Q;  // exclusive bound on y = e_0 + e_s
            total += std::complex<long double>(G0[x] * (prefix[hi] - prefix[x]));
            count += static_cast<long double>(Q);
            const std::int64_t hi_below = std::min(hi, cap);
            if (hi_below <= x) continue;
            total_below += std::complex<long double>(G0[x] * (prefix[hi_below] - prefix[x]));
            count_below += static_cast<long double>(hi_below - x);
        }
        std::size_t i = 0;
        while (i < mid.size() && mid[i] == Q - 1) mid[i++] = 0;
        if (i == mid.size()) break;
        ++mid[i];
    }
    return {std::complex<double>(total / count), std::complex<double>(total_below / count_below)};
}

inline std::complex<double> box_average(const qmult::Sequence& f, const qmult::CarryVector& r, std::size_t L,
                                        bool below) {
    const auto [none, conditioned] = box_averages(f, r, L);
    return below ? conditioned : none;
}

// A(f, r, N) by scanning n_1, ..., n_s over (-N, N) and filtering.
inline std::complex<double> parallelepiped_average(const qmult::Sequence& f, const qmult::CarryVector& r,
                                                   std::int64_t N) {
    const std::size_t s = r.order();
    const std::size_t size = std::size_t{1} << s;
    std::complex<long double> total = 0;
    long double count = 0;
    std::vector<std::int64_t> n(s + 1, 0);
    for (std::int64_t i = 1; i <= static_cast<std::int64_t>(s); ++i) n[i] = -(N - 1);
    while (true) {
        bool inside = true;
        std::complex<double> prod = 1.0;
        for (std::size_t w = 0; w < size && inside; ++w) {
            std::int64_t v = n[0];
            for (std::size_t i = 0; i < s; ++i)
                if (w >> i & 1) v += n[i + 1];
            if (v < 0 || v >= N) inside = false;
            else prod *= value_at(f, v + r[w], std::popcount(w) % 2 == 1);
        }
        if (inside) {
            total += std::complex<long double>(prod);
            count += 1;
        }
        std::size_t i = 0;
        while (i <= s && n[i] == N - 1) {
            n[i] = i == 0 ? 0 : -(N - 1);
            ++i;
        }
        if (i > s) break;
        ++n[i];
    }
    return std::complex<double>(total / count);
}

// 2 |sym. diff.| / |coarse set| * q^(L-l) for the recursion at level l:
// fine tuples Pi(q^L) against Pi(q^(L-l)) x [q^l]^(s+1), in coordinates
// n = q^l m + e.
inline double recursion_boundary_ratio(std::size_t s, unsigned q, std::size_t L, std::size_t l) {
    std::int64_t Q = 1, M = 1;
    for (std::size_t i = 0; i < l; ++i) Q *= q;
    for (std::size_t i = l; i < L; ++i) M *= q;
    const std::int64_t N = Q * M;
    const std::size_t size = std::size_t{1} << s;
    const auto S = static_cast<std::int64_t>(s);
    auto vertex = [&](const std::vector<std::int64_t>& v, std::size_t w) {
        std::int64_t x = v[0];
        for (std::size_t i = 0; i < s; ++i)
            if (w >> i & 1) x += v[i + 1];
        return x;
    };
    std::uint64_t coarse = 0, sym = 0;
    std::vector<std::int64_t> m(s + 1), n(s + 1), e(s + 1);
    m[0] = -S;
    for (std::size_t i = 1; i <= s; ++i) m[i] = -S - M;
    while (true) {
        // A tuple can only be in either set if every coarse vertex lies in [-s, M).
        bool near = true, in_coarse = true;
        for (std::size_t w = 0; w < size; ++w) {
            const auto v = vertex(m, w);
            near = near && v >= -S && v < M;
            in_coarse = in_coarse && v >= 0 && v < M;
        }
        if (near) {
            std::fill(e.begin(), e.end(), 0);
            while (true) {
                for (std::size_t i = 0; i <= s; ++i) n[i] = Q * m[i] + e[i];
                bool in_fine = true;
                for (std::size_t w = 0; w < size && in_fine; ++w) {
                    const auto v = vertex(n, w);
                    in_fine = v >= 0 && v < N;
                }
                coarse += in_coarse;
                sym += in_coarse != in_fine;
                std::size_t i = 0;
                while (i <= s && e[i] == Q - 1) e[i++] = 0;
                if (i > s) break;
                ++e[i];
            }
        }
        std::size_t i = 0;
        while (i <= s && m[i] == (i == 0 ? M - 1 : M + S)) {
            m[i] = i == 0 ? -S : -S - M;
            ++i;
        }
        if (i > s) break;
        ++m[i];
    }
    return 2.0 * static_cast<double>(sym) / static_cast<double>(coarse) * static_cast<double>(M);
}

}  // namespace oracle
