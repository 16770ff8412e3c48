#pragma once

#include <span>

namespace ssgm {

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double max_abs_residual = 0.0;
};

/// Ordinary least squares y = intercept + slope * x (centered formulas).
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace ssgm
