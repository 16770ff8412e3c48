#include "ssgm/markov.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <Eigen/QR>

#include "ssgm/error.hpp"
#include "ssgm/fitting.hpp"
#include "ssgm/gram.hpp"
#include "ssgm/parallel.hpp"

namespace ssgm {
namespace {

constexpr double kFloor = 1e-300;

std::vector<double> log_of(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](double x) { return std::log(x); });
  return out;
}

// Max |log((a t^p + b t^q) / y)| after relative least squares for (a, b).
double two_term_residual(const std::vector<double>& t, const std::vector<double>& y, double p,
                         double q) {
  const auto n = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd m(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    m(i, 0) = std::pow(t[k], p) / y[k];
    m(i, 1) = std::pow(t[k], q) / y[k];
  }
  if (!m.allFinite()) return std::numeric_limits<double>::infinity();
  const Eigen::Vector2d ab = m.colPivHouseholderQr().solve(Eigen::VectorXd::Ones(n));
  const Eigen::VectorXd fit = m * ab;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(fit(i) > 0.0)) return 1e3;
    worst = std::max(worst, std::abs(std::log(fit(i))));
  }
  return worst;
}

// Nelder-Mead on two variables with the standard coefficients.
template <class F>
std::pair<Eigen::Vector2d, double> nelder_mead(const F& f, Eigen::Vector2d start, double step,
                                               int max_iter) {
  std::array<Eigen::Vector2d, 3> x{start, start + Eigen::Vector2d(step, 0.0),
                                   start + Eigen::Vector2d(0.0, step)};
  std::array<double, 3> fx{f(x[0]), f(x[1]), f(x[2])};
  for (int it = 0; it < max_iter; ++it) {
    std::array<int, 3> idx{0, 1, 2};
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fx[a] < fx[b]; });
    const int best = idx[0], mid = idx[1], worst = idx[2];
    if (std::abs(fx[worst] - fx[best]) <= 1e-16 &&
        (x[worst] - x[best]).cwiseAbs().maxCoeff() <= 1e-10) {
      break;
    }
    const Eigen::Vector2d centroid = 0.5 * (x[best] + x[mid]);
    const Eigen::Vector2d xr = centroid + (centroid - x[worst]);
    const double fr = f(xr);
    if (fr < fx[best]) {
      const Eigen::Vector2d xe = centroid + 2.0 * (centroid - x[worst]);
      const double fe = f(xe);
      if (fe < fr) {
        x[worst] = xe;
        fx[worst] = fe;
      } else {
        x[worst] = xr;
        fx[worst] = fr;
      }
    } else if (fr < fx[mid]) {
      x[worst] = xr;
      fx[worst] = fr;
    } else {
      const Eigen::Vector2d xc = centroid + 0.5 * (x[worst] - centroid);
      const double fc = f(xc);
      if (fc < fx[worst]) {
        x[worst] = xc;
        fx[worst] = fc;
      } else {
        for (int k : {mid, worst}) {
          x[k] = x[best] + 0.5 * (x[k] - x[best]);
          fx[k] = f(x[k]);
        }
      }
    }
  }
  const auto it = std::min_element(fx.begin(), fx.end());
  return {x[static_cast<std::size_t>(it - fx.begin())], *it};
}

struct Prediction {
  double constant;
  double coefficient;
  double exponent;
};

std::optional<Prediction> predicted_pair(const ProcessSpec& spec) {
  const double h = spec.hurst();
  switch (spec.family()) {
    case Family::RiemannLiouville:
      return Prediction{0.0, 4.0 * h / (2.0 * h + 1.0), h - 0.5};
    case Family::SubFBm: {
      const double r11 = 2.0 - std::pow(2.0, 2.0 * h - 1.0);
      return Prediction{1.0 / r11, h * (1.0 - 2.0 * h) / r11, 2.0 * h - 2.0};
    }
    case Family::BiFBm: {
      const double ht = spec.htilde();
      const double k = spec.ktilde();
      const double scale = std::pow(2.0, -k);
      if (ht == 0.5) return Prediction{0.0, scale * 2.0 * k, k - 1.0};
      if (ht < 0.5) return Prediction{0.0, scale * k, 2.0 * ht * k - 2.0 * ht};
      return Prediction{0.0, scale * 2.0 * ht * k, 2.0 * ht * k - 1.0};
    }
    case Family::FBm:
      return Prediction{0.5, h, 2.0 * h - 1.0};
    case Family::CanonicalMarkov:
      if (!spec.c().is_finite()) return std::nullopt;
      return Prediction{0.0, 1.0, 2.0 * h + spec.c().value()};
    default:
      return std::nullopt;
  }
}

}  // namespace

double doob_numerator(const CovKernel& kernel, double s, double t, double u) {
  return kernel(s, u) * kernel(t, t) - kernel(s, t) * kernel(t, u);
}

DoobResidual doob_residual(const CovKernel& kernel, const TimeGrid& grid) {
  if (grid.size() < 3) throw DomainError("doob_residual: grid needs at least 3 times");
  if (grid.front() <= 0.0) throw DomainError("doob_residual: grid times must be > 0");
  const Eigen::MatrixXd r = build_gram(kernel, grid).entries;
  const auto d = static_cast<Eigen::Index>(grid.size());
  std::vector<double> row_max(static_cast<std::size_t>(d), 0.0);
  std::vector<double> row_sum(static_cast<std::size_t>(d), 0.0);
  parallel_for(static_cast<std::size_t>(d), [&](std::size_t begin, std::size_t end) {
    for (auto i = static_cast<Eigen::Index>(begin); i < static_cast<Eigen::Index>(end); ++i) {
      double mx = 0.0, sum = 0.0;
      for (Eigen::Index j = i + 1; j < d; ++j) {
        for (Eigen::Index k = j + 1; k < d; ++k) {
          const double lhs = r(i, k) * r(j, j);
          const double rhs = r(i, j) * r(j, k);
          const double rel =
              std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), kFloor});
          mx = std::max(mx, rel);
          sum += rel;
        }
      }
      row_max[static_cast<std::size_t>(i)] = mx;
      row_sum[static_cast<std::size_t>(i)] = sum;
    }
  });
  DoobResidual out;
  out.triples = static_cast<std::size_t>(d * (d - 1) * (d - 2) / 6);
  double total = 0.0;
  for (std::size_t i = 0; i < row_max.size(); ++i) {
    out.max = std::max(out.max, row_max[i]);
    total += row_sum[i];
  }
  out.mean = total / static_cast<double>(out.triples);
  return out;
}

CanonicalFit fit_canonical(const CovKernel& kernel, const TimeGrid& t_grid) {
  if (t_grid.size() < 10) throw DomainError("fit_canonical: need at least 10 times");
  if (t_grid.front() <= 0.0 || t_grid.back() > 1.0) {
    throw DomainError("fit_canonical: times must lie in (0,1]");
  }
  const double r11 = kernel(1.0, 1.0);
  if (!(r11 > 0.0)) throw DomainError("fit_canonical: R(1,1) must be > 0");
  std::vector<double> t, y;
  bool all_zero = true;
  for (double s : t_grid.times()) {
    const double v = kernel(s, 1.0);
    if (v < -1e-12 * r11) {
      throw DomainError("fit_canonical: R(t,1) < 0 at t = " + std::to_string(s));
    }
    if (s < 1.0 && std::abs(v) > 1e-12 * r11) all_zero = false;
    t.push_back(s);
    y.push_back(v);
  }
  CanonicalFit fit;
  if (all_zero) {
    fit.r11 = r11;
    fit.c = ExtendedReal::negative_infinity();
    return fit;
  }
  for (double v : y) {
    if (!(v > 0.0)) throw DomainError("fit_canonical: R(t,1) vanishes on part of the grid");
  }
  const LineFit line = fit_line(log_of(t), log_of(y));
  fit.r11 = std::exp(line.intercept);
  fit.c = ExtendedReal(-line.slope);
  fit.regression_residual = line.max_abs_residual;
  return fit;
}

double multiplicative_check(const CovKernel& kernel, const std::vector<double>& xs,
                            const std::vector<double>& ys) {
  const double r11 = kernel(1.0, 1.0);
  if (!(r11 > 0.0)) throw DomainError("multiplicative_check: R(1,1) must be > 0");
  auto g = [&](double x) { return x == 0.0 ? 1.0 : kernel(std::exp(-x), 1.0) / r11; };
  double worst = 0.0;
  for (double x : xs) {
    for (double y : ys) {
      if (x < 0.0 || y < 0.0) throw DomainError("multiplicative_check: x, y must be >= 0");
      worst = std::max(worst, std::abs(g(x + y) - g(x) * g(y)));
    }
  }
  return worst;
}

FactorizationResult gf_factorize(const CovKernel& kernel, const TimeGrid& grid) {
  if (grid.size() < 2) throw DomainError("gf_factorize: grid needs at least 2 times");
  const Eigen::MatrixXd r = build_gram(kernel, grid).entries;
  if (!(r.minCoeff() > 0.0)) {
    throw DomainError("gf_factorize: R must be strictly positive on the grid");
  }
  const auto d = static_cast<Eigen::Index>(grid.size());
  FactorizationResult out{grid, {}, {}, 0.0, true};
  for (Eigen::Index j = 0; j < d; ++j) {
    out.f_values.push_back(r(0, j));
    out.g_values.push_back(r(j, j) / r(0, j));
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      const double model = out.g_values[static_cast<std::size_t>(i)] * out.f_values[static_cast<std::size_t>(j)];
      out.max_residual = std::max(out.max_residual, std::abs(r(i, j) - model) / std::abs(r(i, j)));
    }
  }
  for (std::size_t j = 1; j < out.g_values.size(); ++j) {
    const double prev = out.g_values[j - 1] / out.f_values[j - 1];
    const double cur = out.g_values[j] / out.f_values[j];
    if (cur < prev * (1.0 - 1e-12)) out.ratio_nondecreasing = false;
  }
  return out;
}

AsymReport sqrt_diag_profile(const CovKernel& kernel, const std::vector<double>& t_values) {
  if (t_values.size() < 8) throw DomainError("sqrt_diag_profile: need at least 8 times");
  for (std::size_t i = 0; i < t_values.size(); ++i) {
    if (t_values[i] < 1.0 || (i > 0 && !(t_values[i] > t_values[i - 1]))) {
      throw DomainError("sqrt_diag_profile: times must be increasing and >= 1");
    }
  }
  if (t_values.back() / t_values.front() < 1e4 * (1.0 - 1e-9)) {
    throw DomainError("sqrt_diag_profile: times must span at least 4 decades");
  }
  AsymReport rep;
  rep.kernel = kernel.id();
  std::vector<double> y;
  bool zero = true, positive = true;
  for (double t : t_values) {
    const double v = kernel(std::sqrt(t), t);
    y.push_back(v);
    if (v != 0.0) zero = false;
    if (!(v > 0.0)) positive = false;
  }
  if (zero) {
    rep.zero_profile = true;
    rep.fit_ok = false;
    rep.note = "profile vanishes identically";
    return rep;
  }
  if (!positive) {
    rep.fit_ok = false;
    rep.note = "profile is not strictly positive; log-log fit skipped";
    return rep;
  }
  const LineFit one = fit_line(log_of(t_values), log_of(y));
  rep.coefficient = std::exp(one.intercept);
  rep.exponent = one.slope;
  rep.fit_residual = one.max_abs_residual;
  rep.implied_c = 2.0 * (one.slope - 2.0 * kernel.hurst());

  auto objective = [&](const Eigen::Vector2d& pq) {
    return two_term_residual(t_values, y, pq(0), pq(1));
  };
  Eigen::Vector2d best(one.slope, one.slope - 1.0);
  double best_val = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 80; ++i) {
    const double p = one.slope - 1.0 + 2.0 * i / 80.0;
    for (int j = 0; j < 60; ++j) {
      const double q = p - 3.0 + (3.0 - 0.02) * j / 59.0;
      const double v = two_term_residual(t_values, y, p, q);
      if (v < best_val) {
        best_val = v;
        best = Eigen::Vector2d(p, q);
      }
    }
  }
  const auto refined = nelder_mead(objective, best, 0.01, 4000);
  const double two = std::min(best_val, refined.second);
  rep.two_term_residual = two;
  rep.two_power_flag = rep.fit_residual > 1e-9 && rep.fit_residual >= 100.0 * two;
  return rep;
}

AsymReport asym_coeff_estimate(const ProcessSpec& spec, const std::vector<double>& u_values,
                               double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("asym: alpha must lie in (0,1)");
  const auto pred = predicted_pair(spec);
  switch (spec.family()) {
    case Family::RiemannLiouville:
    case Family::SubFBm:
    case Family::BiFBm:
    case Family::FBm:
      break;
    case Family::CanonicalMarkov:
      if (spec.c().is_finite()) break;
      [[fallthrough]];
    default:
      throw DomainError("asym: family " + std::string(family_name(spec.family())) +
                        " has no l-form expansion");
  }
  const std::size_t n = u_values.size();
  if (n < 5) throw DomainError("asym: need at least 5 u values");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(u_values[i] > u_values[i - 1]) || !(u_values[0] > 0.0)) {
      throw DomainError("asym: u values must be positive and increasing");
    }
  }
  AsymReport rep;
  rep.kernel = spec.to_inline();
  rep.alpha = alpha;
  if (pred) {
    rep.predicted_constant = pred->constant;
    rep.predicted_coefficient = pred->coefficient;
    rep.predicted_exponent = pred->exponent;
  }

  std::vector<double> l(n);
  for (std::size_t i = 0; i < n; ++i) l[i] = eval_l(spec, u_values[i]);

  // Aitken delta-squared on (first, middle, last), in the difference form.
  const double y0 = l[0], y1 = l[n / 2], y2 = l[n - 1];
  const double d1 = y1 - y0;
  const double d2 = y2 - y1;
  const double curvature = d2 - d1;
  double constant = y2;
  if (curvature != 0.0 && std::isfinite(d2 * d2 / curvature)) constant = y2 - d2 * d2 / curvature;
  rep.constant_term = constant;

  std::vector<double> lu, lr;
  double largest = 0.0;
  bool one_sign = true;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = l[i] - constant;
    largest = std::max(largest, std::abs(r));
    if (r == 0.0 || (r > 0.0) != (l[n - 1] - constant > 0.0)) one_sign = false;
    lu.push_back(std::log(u_values[i]));
    lr.push_back(std::log(std::abs(r)));
  }
  const double noise = 1e-12 * std::max(1.0, std::abs(constant));
  if (largest <= noise || !one_sign) {
    rep.fit_ok = false;
    rep.note = "remainder below numerical noise; constant term only";
  } else {
    const LineFit line = fit_line(lu, lr);
    const double sign = l[n - 1] - constant > 0.0 ? 1.0 : -1.0;
    rep.coefficient = sign * std::exp(line.intercept);
    rep.exponent = line.slope;
    rep.fit_residual = line.max_abs_residual;
    rep.t_exponent = (1.0 - alpha) * line.slope;
  }
  const double scale = std::max(1.0, std::abs(rep.coefficient));
  rep.power_law_consistent = rep.fit_ok && std::abs(constant) <= 1e-6 * scale &&
                             std::abs(rep.coefficient - 1.0) <= 1e-2;
  return rep;
}

std::string_view verdict_name(MarkovVerdict v) {
  switch (v) {
    case MarkovVerdict::MarkovCanonical: return "MarkovCanonical";
    case MarkovVerdict::MarkovWhiteNoise: return "MarkovWhiteNoise";
    case MarkovVerdict::NotMarkov: return "NotMarkov";
    case MarkovVerdict::Indeterminate: return "Indeterminate";
    case MarkovVerdict::Degenerate: return "Degenerate";
  }
  return "unknown";
}

TimeGrid standard_grid() { return TimeGrid::geometric(0.05, 5.0, 20); }

MarkovReport markov_test(const CovKernel& kernel, const TimeGrid& grid,
                         const MarkovThresholds& thresholds) {
  MarkovReport rep;
  rep.kernel = kernel.id();
  const Eigen::MatrixXd gram = build_gram(kernel, grid).entries;
  if (gram.cwiseAbs().maxCoeff() == 0.0 || !(kernel(1.0, 1.0) > 0.0)) {
    rep.verdict = MarkovVerdict::Degenerate;
    return rep;
  }
  rep.doob = doob_residual(kernel, grid);
  try {
    rep.fit = fit_canonical(kernel, TimeGrid::geometric(0.01, 1.0, 20));
  } catch (const Error& e) {
    rep.fit_error = e.what();
  }
  std::vector<double> xs;
  for (int k = 0; k <= 12; ++k) xs.push_back(0.25 * k);
  rep.mult_residual = multiplicative_check(kernel, xs, xs);
  try {
    rep.factorization = gf_factorize(kernel, grid);
  } catch (const Error& e) {
    rep.factorization_error = e.what();
  }
  try {
    const TimeGrid profile = TimeGrid::geometric(1e4, 1e10, 61);
    rep.profile = sqrt_diag_profile(kernel, {profile.times().begin(), profile.times().end()});
  } catch (const Error& e) {
    // Profile is diagnostic only.
  }

  if (rep.doob.max > thresholds.not_markov) {
    rep.verdict = MarkovVerdict::NotMarkov;
  } else if (rep.doob.max <= thresholds.markov && rep.fit) {
    if (!rep.fit->c.is_finite()) {
      rep.verdict = MarkovVerdict::MarkovWhiteNoise;
    } else if (rep.fit->c.value() <= -kernel.hurst() + thresholds.c_slack &&
               rep.fit->regression_residual <= thresholds.c_slack) {
      rep.verdict = MarkovVerdict::MarkovCanonical;
    }
  }
  return rep;
}

}  // namespace ssgm
