#include "ssgm/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ssgm/error.hpp"
#include "ssgm/quadrature.hpp"
#include "weight.hpp"

namespace ssgm {
namespace {

void check_time(double s, double t) {
  if (!(std::isfinite(s) && std::isfinite(t) && s >= 0.0 && t >= 0.0)) {
    throw DomainError("times must be finite and >= 0 (got s = " + format_double(s) +
                      ", t = " + format_double(t) + ")");
  }
}

void check_hurst(double hurst) {
  if (!(std::isfinite(hurst) && hurst > 0.0)) {
    throw DomainError("H must be > 0 (got " + format_double(hurst) + ")");
  }
}

void check_unit_hurst(double hurst, const char* family) {
  if (!(hurst > 0.0 && hurst < 1.0)) {
    throw DomainError(std::string(family) + ": H must be in (0,1) (got " + format_double(hurst) +
                      ")");
  }
}

// (1+x)^a - 1 without cancellation.
double pow1p_m1(double x, double a) { return std::expm1(a * std::log1p(x)); }

double rl_gamma_sq(double hurst) {
  const double g = std::tgamma(hurst + 0.5);
  return g * g;
}

// 2H int_0^1 ((v+u)v)^{H-1/2} dv after v = w^q, q = 2/(2H+1).
double rl_shape(double hurst, double u, double tol) {
  const double q = 2.0 / (2.0 * hurst + 1.0);
  const double e = hurst - 0.5;
  QuadOptions opts;
  opts.abs_tol = tol / (2.0 * hurst * q);
  const QuadResult r = integrate_simpson(
      [&](double w) { return std::pow(std::pow(w, q) + u, e); }, 0.0, 1.0, opts);
  return 2.0 * hurst * q * r.value;
}

}  // namespace

double eval_canonical(double hurst, ExtendedReal c, double s, double t) {
  check_hurst(hurst);
  check_time(s, t);
  if (c.is_finite() && !(c.value() <= -hurst)) {
    throw DomainError("canonical: c = " + c.to_string() + " exceeds -H = " + format_double(-hurst));
  }
  const double lo = std::min(s, t);
  const double hi = std::max(s, t);
  if (lo == 0.0) return 0.0;
  if (!c.is_finite()) return s == t ? std::pow(t, 2.0 * hurst) : 0.0;
  const double cv = c.value();
  return std::pow(hi, 2.0 * hurst + cv) * std::pow(lo, -cv);
}

double eval_white_noise(double hurst, double s, double t) {
  return eval_canonical(hurst, ExtendedReal::negative_infinity(), s, t);
}

double eval_fbm(double hurst, double s, double t) {
  check_unit_hurst(hurst, "fbm");
  check_time(s, t);
  if (std::min(s, t) == 0.0) return 0.0;
  const double a = 2.0 * hurst;
  return 0.5 * (std::pow(s, a) + std::pow(t, a) - std::pow(std::abs(s - t), a));
}

double eval_subfbm(double hurst, double s, double t) {
  check_unit_hurst(hurst, "sfbm");
  check_time(s, t);
  if (std::min(s, t) == 0.0) return 0.0;
  const double a = 2.0 * hurst;
  return std::pow(s, a) + std::pow(t, a) -
         0.5 * (std::pow(s + t, a) + std::pow(std::abs(s - t), a));
}

double eval_bifbm(double htilde, double ktilde, double s, double t) {
  if (!(htilde > 0.0 && htilde < 1.0)) throw DomainError("bfbm: Htilde must be in (0,1)");
  if (!(ktilde > 0.0 && ktilde <= 1.0)) throw DomainError("bfbm: Ktilde must be in (0,1]");
  check_time(s, t);
  if (std::min(s, t) == 0.0) return 0.0;
  const double a = 2.0 * htilde;
  return std::pow(2.0, -ktilde) * (std::pow(std::pow(s, a) + std::pow(t, a), ktilde) -
                                   std::pow(std::abs(s - t), a * ktilde));
}

double eval_rl(double hurst, double s, double t, double tol) {
  check_hurst(hurst);
  check_time(s, t);
  if (!(tol > 0.0)) throw DomainError("rl: tol must be > 0");
  const double lo = std::min(s, t);
  const double hi = std::max(s, t);
  if (lo == 0.0) return 0.0;
  const double gsq = rl_gamma_sq(hurst);
  if (s == t) return std::pow(t, 2.0 * hurst) / (2.0 * hurst * gsq);

  // r = lo (1 - w^q): (lo - r)^{H-1/2} dr/dw = -q lo^{H+1/2} w^0, leaving
  // (hi - r)^{H-1/2} = (hi - lo + lo w^q)^{H-1/2}, bounded on [0,1].
  const double q = 2.0 / (2.0 * hurst + 1.0);
  const double e = hurst - 0.5;
  const double gap = hi - lo;
  const double scale = q * std::pow(lo, hurst + 0.5) / gsq;
  QuadOptions opts;
  opts.abs_tol = tol / scale;
  const QuadResult r = integrate_simpson(
      [&](double w) { return std::pow(gap + lo * std::pow(w, q), e); }, 0.0, 1.0, opts);
  return scale * r.value;
}

double volterra_g_energy(double beta, const GFunction& g, double tol) {
  const detail::WeightFunction f{beta, g};
  QuadOptions opts;
  opts.abs_tol = tol;
  return detail::integrate_complement(
             [&](double y) {
               const double v = f.at_complement(y);
               return v * v;
             },
             f.substitution_power(), opts)
      .value;
}

double eval_volterra_g(double hurst, double beta, const GFunction& g, double s, double t,
                       double tol) {
  check_hurst(hurst);
  check_time(s, t);
  if (!(beta > -0.5)) throw DomainError("volterra-g: beta must be > -1/2");
  const double lo = std::min(s, t);
  const double hi = std::max(s, t);
  if (lo == 0.0) return 0.0;
  // (st)^{H-1/2} lo int_0^1 F(x) F(x lo/hi) dx, written in y = 1 - x.
  const detail::WeightFunction f{beta, g};
  const double prefactor = std::pow(s * t, hurst - 0.5) * lo;
  QuadOptions opts;
  opts.abs_tol = tol / prefactor;
  const double gap = hi - lo;
  const QuadResult r = detail::integrate_complement(
      [&](double y) { return f.at_complement(y) * f.at_complement((gap + lo * y) / hi); },
      f.substitution_power(), opts);
  return prefactor * r.value;
}

double unit_variance(const ProcessSpec& spec) {
  const double h = spec.hurst();
  switch (spec.family()) {
    case Family::CanonicalMarkov:
    case Family::WhiteNoise:
    case Family::FBm:
    case Family::BiFBm:
      return 1.0;
    case Family::SubFBm:
      return 2.0 - std::pow(2.0, 2.0 * h - 1.0);
    case Family::RiemannLiouville:
      return 1.0 / (2.0 * h * rl_gamma_sq(h));
    case Family::VolterraG:
      return volterra_g_energy(spec.beta(), spec.g());
  }
  return 0.0;
}

double eval_l(const ProcessSpec& spec, double u, double tol) {
  if (!(std::isfinite(u) && u >= 0.0)) throw DomainError("l: u must be finite and >= 0");
  const double h = spec.hurst();
  switch (spec.family()) {
    case Family::FBm: {
      if (u == 0.0) return 1.0;
      const double a = 2.0 * h;
      // (1+u)^a - u^a
      const double diff =
          u > 1.0 ? std::pow(u, a) * pow1p_m1(1.0 / u, a) : std::pow(1.0 + u, a) - std::pow(u, a);
      return 0.5 * (1.0 + diff);
    }
    case Family::SubFBm: {
      if (u == 0.0) return 1.0;
      const double a = 2.0 * h;
      // (1+u)^a - ((2+u)^a + u^a)/2, a negated half second difference.
      const double second =
          u > 1.0 ? std::pow(u, a) * (pow1p_m1(2.0 / u, a) - 2.0 * pow1p_m1(1.0 / u, a))
                  : std::pow(2.0 + u, a) - 2.0 * std::pow(1.0 + u, a) + std::pow(u, a);
      return (1.0 - 0.5 * second) / unit_variance(spec);
    }
    case Family::BiFBm: {
      if (u == 0.0) return 1.0;
      const double a = 2.0 * spec.htilde();
      const double k = spec.ktilde();
      double bracket;
      if (u > 1.0) {
        // (1 + (1+u)^a)^k - u^{ak} = u^{ak} [(1 + u^{-a} + ((1+1/u)^a - 1))^k - 1]
        const double inner = std::pow(u, -a) + pow1p_m1(1.0 / u, a);
        bracket = std::pow(u, a * k) * std::expm1(k * std::log1p(inner));
      } else {
        bracket = std::pow(1.0 + std::pow(1.0 + u, a), k) - std::pow(u, a * k);
      }
      return std::pow(2.0, -k) * bracket;
    }
    case Family::RiemannLiouville:
      if (u == 0.0) return 1.0;
      return rl_shape(h, u, tol);
    default:
      throw DomainError("l: family " + std::string(family_name(spec.family())) +
                        " has no l-form representation");
  }
}

double volterra_kernel(double hurst, double c, double s, double t) {
  check_hurst(hurst);
  if (!(std::isfinite(c) && c < -hurst)) {
    throw DomainError("volterra kernel: requires c < -H (got c = " + format_double(c) +
                      ", H = " + format_double(hurst) + ")");
  }
  if (!(t > 0.0 && s >= 0.0 && s <= t && std::isfinite(t))) {
    throw DomainError("volterra kernel: requires 0 <= s <= t, t > 0 (got s = " +
                      format_double(s) + ", t = " + format_double(t) + ")");
  }
  const double coef = std::sqrt(-2.0 * (c + hurst));
  const double e = -c - hurst - 0.5;
  if (s == 0.0) {
    if (e > 0.0) return 0.0;
    if (e < 0.0) return std::numeric_limits<double>::infinity();
  }
  return coef * std::pow(t, hurst - 0.5) * std::pow(s / t, e);
}

double isometry_residual(double hurst, double c, double s, double t, double tol) {
  check_hurst(hurst);
  if (!(std::isfinite(c) && c < -hurst)) {
    throw DomainError("isometry: requires c < -H");
  }
  if (!(s > 0.0 && t > 0.0)) throw DomainError("isometry: requires s, t > 0");
  const double lo = std::min(s, t);
  // K(u,s) K(u,t) ~ u^{2e}; u = lo w^gamma with gamma (2e+1) = 1 flattens the
  // singularity when 2e < 0.
  const double e = -c - hurst - 0.5;
  const double gamma = 2.0 * e < 0.0 ? 1.0 / (2.0 * e + 1.0) : 1.0;
  const double w_floor = gamma > 1.0 ? std::pow(1e-300 / lo, 1.0 / gamma) : 0.0;
  QuadOptions opts;
  opts.abs_tol = tol;
  const QuadResult q = integrate_simpson(
      [&](double w) {
        const double ww = std::max(w, w_floor);
        const double u = lo * std::pow(ww, gamma);
        const double jac = lo * gamma * std::pow(ww, gamma - 1.0);
        return jac * volterra_kernel(hurst, c, u, s) * volterra_kernel(hurst, c, u, t);
      },
      0.0, 1.0, opts);
  return std::abs(q.value - eval_canonical(hurst, ExtendedReal(c), s, t));
}

CovKernel::CovKernel(ProcessSpec spec, double quad_tol) : spec_(std::move(spec)), quad_tol_(quad_tol) {
  if (!(quad_tol_ > 0.0)) throw DomainError("kernel: quadrature tolerance must be > 0");
  r11_ = unit_variance(spec_);
}

double CovKernel::operator()(double s, double t) const {
  const double h = spec_.hurst();
  switch (spec_.family()) {
    case Family::CanonicalMarkov:
      return eval_canonical(h, spec_.c(), s, t);
    case Family::WhiteNoise:
      return eval_white_noise(h, s, t);
    case Family::FBm:
      return eval_fbm(h, s, t);
    case Family::SubFBm:
      return eval_subfbm(h, s, t);
    case Family::BiFBm:
      return eval_bifbm(spec_.htilde(), spec_.ktilde(), s, t);
    case Family::RiemannLiouville:
      return eval_rl(h, s, t, quad_tol_);
    case Family::VolterraG:
      return eval_volterra_g(h, spec_.beta(), spec_.g(), s, t, quad_tol_);
  }
  return 0.0;
}

}  // namespace ssgm
