#pragma once

#include <algorithm>
#include <cmath>

#include "ssgm/process_spec.hpp"
#include "ssgm/quadrature.hpp"

namespace ssgm::detail {

/// F(x) = (1-x)^beta g(x) on [0,1), evaluated through the complement
/// y = 1 - x so that the x -> 1 end keeps full precision.
struct WeightFunction {
  double beta;
  GFunction g;

  double at_complement(double y) const {
    if (y <= 0.0) return 0.0;
    if (beta == 0.0) return g.at_complement(y);
    if (beta == 1.0) return y * g.at_complement(y);
    return std::pow(y, beta) * g.at_complement(y);
  }

  double operator()(double x) const { return at_complement(1.0 - x); }

  double derivative(double x) const {
    const double y = 1.0 - x;
    return -beta * std::pow(y, beta - 1.0) * g.at_complement(y) +
           std::pow(y, beta) * g.derivative(x);
  }

  /// Power gamma of the substitution 1 - x = y^gamma. Products of up to two
  /// F factors times the Jacobian vanish at y = 0 like y^{>= 1}.
  double substitution_power() const { return std::max(2.0, 4.0 / (2.0 * beta + 1.0)); }
};

/// int_0^1 phi(y^gamma) gamma y^{gamma-1} dy, i.e. int_0^1 psi(x) dx with
/// psi(x) = phi(1 - x), phi taking the complement 1 - x. The integrand is
/// taken as 0 at y = 0 and wherever y^gamma underflows.
template <class Phi>
QuadResult integrate_complement(Phi&& phi, double gamma, const QuadOptions& opts) {
  return integrate_simpson(
      [&](double y) {
        const double yg = std::pow(y, gamma);
        if (yg == 0.0) return 0.0;
        return gamma * std::pow(y, gamma - 1.0) * phi(yg);
      },
      0.0, 1.0, opts);
}

}  // namespace ssgm::detail
