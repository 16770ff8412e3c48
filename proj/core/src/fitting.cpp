#include "ssgm/fitting.hpp"

#include <cmath>

#include "ssgm/error.hpp"

namespace ssgm {

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw DomainError("fit_line: need >= 2 matching points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw NumericalError("fit_line: abscissae are all equal");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = std::abs(y[i] - (fit.intercept + fit.slope * x[i]));
    if (r > fit.max_abs_residual) fit.max_abs_residual = r;
  }
  return fit;
}

}  // namespace ssgm
