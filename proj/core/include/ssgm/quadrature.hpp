#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ssgm/error.hpp"

namespace ssgm {

struct QuadResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
};

struct QuadOptions {
  double abs_tol = 1e-10;
  std::size_t max_evaluations = std::size_t{1} << 20;
};

namespace detail {

struct SimpsonPanel {
  double a, m, b;
  double fa, fm, fb;
  double whole;
  double tol;
  int depth;
};

inline double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] to an absolute tolerance.
///
/// Panels are refined depth-first with the tolerance halved per split; an
/// accepted panel contributes its Richardson-corrected value. Panels that
/// reach a width below machine resolution are accepted and their error
/// estimate is folded into abs_error_estimate. Throws NumericalError when
/// the evaluation budget is exhausted.
template <class Func>
QuadResult integrate_simpson(Func&& f, double a, double b, const QuadOptions& opts = {}) {
  if (a == b) return {};
  if (!(opts.abs_tol > 0.0)) throw DomainError("quadrature: abs_tol must be positive");

  std::size_t evals = 0;
  auto eval = [&](double x) {
    ++evals;
    const double y = f(x);
    if (!std::isfinite(y)) {
      throw NumericalError("quadrature: non-finite integrand at x = " + std::to_string(x));
    }
    return y;
  };

  const double m = 0.5 * (a + b);
  const double fa = eval(a), fm = eval(m), fb = eval(b);

  std::vector<detail::SimpsonPanel> stack;
  stack.push_back({a, m, b, fa, fm, fb, detail::simpson(a, b, fa, fm, fb), opts.abs_tol, 0});

  QuadResult out;
  // Fixed traversal order (left panel first) keeps the summation order, and
  // therefore the result, deterministic.
  while (!stack.empty()) {
    const detail::SimpsonPanel p = stack.back();
    stack.pop_back();

    const double lm = 0.5 * (p.a + p.m);
    const double rm = 0.5 * (p.m + p.b);
    const double flm = eval(lm);
    const double frm = eval(rm);
    const double left = detail::simpson(p.a, p.m, p.fa, flm, p.fm);
    const double right = detail::simpson(p.m, p.b, p.fm, frm, p.fb);
    const double delta = left + right - p.whole;

    const bool unresolvable = !(lm > p.a && p.m > lm && rm > p.m && p.b > rm) || p.depth >= 200;
    if (std::abs(delta) <= 15.0 * p.tol || unresolvable) {
      out.value += left + right + delta / 15.0;
      out.abs_error_estimate += std::abs(delta) / 15.0;
      continue;
    }
    if (evals >= opts.max_evaluations) {
      throw NumericalError("quadrature: evaluation budget of " +
                           std::to_string(opts.max_evaluations) +
                           " exhausted before reaching abs_tol " + std::to_string(opts.abs_tol));
    }
    const double half = 0.5 * p.tol;
    stack.push_back({p.m, rm, p.b, p.fm, frm, p.fb, right, half, p.depth + 1});
    stack.push_back({p.a, lm, p.m, p.fa, flm, p.fm, left, half, p.depth + 1});
  }
  return out;
}

}  // namespace ssgm
