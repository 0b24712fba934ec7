#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "qmult/parallel.hpp"

namespace qmult {

// Neumaier-compensated running sum.
class CompensatedSum {
  public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

class ComplexCompensatedSum {
  public:
    void add(std::complex<double> z) {
        re_.add(z.real());
        im_.add(z.imag());
    }
    void add(double x) { re_.add(x); }
    std::complex<double> value() const { return {re_.value(), im_.value()}; }

  private:
    CompensatedSum re_;
    CompensatedSum im_;
};

namespace detail {
template <class T>
struct accumulator_for;
template <>
struct accumulator_for<double> {
    using type = CompensatedSum;
};
template <>
struct accumulator_for<std::complex<double>> {
    using type = ComplexCompensatedSum;
};
}  // namespace detail

// Fixed-shape pairwise reduction: the tree depends only on values.size().
template <class T>
T pairwise_reduce(std::span<const T> values) {
    if (values.empty()) return T{};
    if (values.size() == 1) return values[0];
    const std::size_t half = values.size() / 2;
    typename detail::accumulator_for<T>::type acc;
    acc.add(pairwise_reduce(values.first(half)));
    acc.add(pairwise_reduce(values.subspan(half)));
    return acc.value();
}

inline constexpr std::uint64_t kSummationBlock = 4096;

// Sum of term(i) over i in [0, count). The index range is cut into fixed
// blocks, each block is summed with compensation, and block results are
// combined by pairwise_reduce. Blocks may run on any thread; the result is
// bit-identical for every thread count.
template <class T, class Term>
T deterministic_sum(std::uint64_t count, Term&& term) {
    const std::uint64_t blocks = (count + kSummationBlock - 1) / kSummationBlock;
    std::vector<T> partial(blocks);
    parallel_for(blocks, [&](std::size_t b) {
        typename detail::accumulator_for<T>::type acc;
        const std::uint64_t lo = b * kSummationBlock;
        const std::uint64_t hi = std::min(count, lo + kSummationBlock);
        for (std::uint64_t i = lo; i < hi; ++i) acc.add(term(i));
        partial[b] = acc.value();
    });
    return pairwise_reduce<T>(partial);
}

}  // namespace qmult
