#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qmult/phase.hpp"

namespace qmult {

// p(n) = sum_j coeffs[j] * n^j, coefficients in turns.
struct PolyPhase {
    std::vector<double> coeffs;

    PolyPhase() = default;
    explicit PolyPhase(std::vector<double> c) : coeffs(std::move(c)) {}

    static PolyPhase zero() { return PolyPhase{{0.0}}; }
    static PolyPhase linear(double alpha) { return PolyPhase{{0.0, alpha}}; }
    static PolyPhase monomial(std::size_t degree, double coeff) {
        std::vector<double> c(degree + 1, 0.0);
        c[degree] = coeff;
        return PolyPhase{std::move(c)};
    }

    std::size_t degree() const { return coeffs.empty() ? 0 : coeffs.size() - 1; }

    // p(n) mod 1. Each coefficient is reduced to a fixed-point Phase and
    // multiplied by n^j mod 2^64, so the result is exact given the rounded
    // coefficients.
    Phase at(std::uint64_t n) const {
        Phase acc;
        std::uint64_t power = 1;
        for (double c : coeffs) {
            acc += Phase(c) * power;
            power *= n;
        }
        return acc;
    }

    std::string to_string() const;
};

// Coefficients pre-converted to Phase for hot loops.
class PolyPhaseEvaluator {
  public:
    explicit PolyPhaseEvaluator(const PolyPhase& p) {
        coeffs_.reserve(p.coeffs.size());
        for (double c : p.coeffs) coeffs_.emplace_back(c);
    }

    Phase operator()(std::uint64_t n) const {
        Phase acc;
        std::uint64_t power = 1;
        for (Phase c : coeffs_) {
            acc += c * power;
            power *= n;
        }
        return acc;
    }

  private:
    std::vector<Phase> coeffs_;
};

}  // namespace qmult
