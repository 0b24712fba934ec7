#pragma once

#include <span>

namespace qmult {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms_residual = 0.0;
};

// Ordinary least squares y = slope * x + intercept. Needs >= 2 distinct x.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace qmult
