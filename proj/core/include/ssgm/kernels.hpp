#pragma once

#include <functional>
#include <string>

#include "ssgm/extended_real.hpp"
#include "ssgm/process_spec.hpp"

namespace ssgm {

// Closed-form covariances. All functions take times s, t >= 0 and throw
// DomainError on invalid parameters.

/// (s v t)^{2H+c} (s ^ t)^{-c} for s ^ t > 0, zero on the axes. For c = -inf
/// returns t^{2H} on the diagonal and 0 elsewhere.
double eval_canonical(double hurst, ExtendedReal c, double s, double t);
double eval_white_noise(double hurst, double s, double t);
double eval_fbm(double hurst, double s, double t);
double eval_subfbm(double hurst, double s, double t);
double eval_bifbm(double htilde, double ktilde, double s, double t);

/// Riemann-Liouville covariance
///   Gamma(H+1/2)^{-2} int_0^{s^t} ((s-r)(t-r))^{H-1/2} dr
/// by adaptive Simpson after r = (s^t)(1 - w^{2/(2H+1)}), which makes the
/// integrand bounded at r = s^t. `tol` is an absolute tolerance on the result.
double eval_rl(double hurst, double s, double t, double tol = 1e-10);

/// Covariance of t^{H-1/2} int_0^t F(u/t) dB_u with F(x) = (1-x)^beta g(x):
///   (st)^{H-1/2} int_0^{s^t} F(u/s) F(u/t) du.
double eval_volterra_g(double hurst, double beta, const GFunction& g, double s, double t,
                       double tol = 1e-10);

/// int_0^1 F(x)^2 dx for F(x) = (1-x)^beta g(x).
double volterra_g_energy(double beta, const GFunction& g, double tol = 1e-12);

/// Normalized shape function with R(s, s(1+u)) = R(1,1) s^{2H} l(u) and
/// l(0) = 1. Defined for FBm, SubFBm, BiFBm and RiemannLiouville; other
/// families raise DomainError.
double eval_l(const ProcessSpec& spec, double u, double tol = 1e-12);

/// Volterra kernel of the canonical family,
///   sqrt(-2(c+H)) t^{H-1/2} (s/t)^{-c-H-1/2},  0 <= s <= t, c < -H.
double volterra_kernel(double hurst, double c, double s, double t);

/// |int_0^{s^t} K(u,s) K(u,t) du - R_{H,c}(s,t)| with the integral done by
/// quadrature over volterra_kernel values.
double isometry_residual(double hurst, double c, double s, double t, double tol = 1e-12);

/// An evaluatable covariance function bound to a process specification.
///
/// Evaluation is pure and safe to call concurrently.
class CovKernel {
 public:
  explicit CovKernel(ProcessSpec spec, double quad_tol = 1e-10);

  double operator()(double s, double t) const;

  const ProcessSpec& spec() const { return spec_; }
  double hurst() const { return spec_.hurst(); }
  /// R(1,1).
  double r11() const { return r11_; }
  double quad_tol() const { return quad_tol_; }
  std::string id() const { return spec_.to_inline(); }

 private:
  ProcessSpec spec_;
  double quad_tol_;
  double r11_ = 0.0;
};

/// Closed-form R(1,1) per family (quadrature for VolterraG).
double unit_variance(const ProcessSpec& spec);

}  // namespace ssgm
