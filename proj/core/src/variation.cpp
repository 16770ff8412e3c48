#include "ssgm/variation.hpp"

#include <cmath>
#include <numbers>

#include "ssgm/error.hpp"
#include "ssgm/fitting.hpp"
#include "ssgm/parallel.hpp"
#include "ssgm/samplers.hpp"
#include "ssgm/time_grid.hpp"
#include "weight.hpp"

namespace ssgm {
namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

double abs_pow(double x, double p) {
  const double a = std::abs(x);
  if (p == 1.0) return a;
  if (p == 2.0) return a * a;
  return std::pow(a, p);
}

double mean_of(const std::vector<double>& v) {
  return pairwise_sum(v.data(), v.size()) / static_cast<double>(v.size());
}

double standard_error(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
  const double var = pairwise_sum(sq.data(), sq.size()) / static_cast<double>(v.size() - 1);
  return std::sqrt(var / static_cast<double>(v.size()));
}

}  // namespace

double pvariation_sum(std::span<const double> path, double p) {
  if (!(p >= 1.0)) throw DomainError("pvariation_sum: p must be >= 1");
  if (path.size() < 2 || !is_pow2(path.size() - 1)) {
    throw DomainError("pvariation_sum: path must hold n+1 values with n a power of two");
  }
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) s += abs_pow(path[k + 1] - path[k], p);
  return s;
}

std::string_view variation_verdict_name(VariationVerdict v) {
  switch (v) {
    case VariationVerdict::VanishingTo0: return "VanishingTo0";
    case VariationVerdict::FiniteLimit: return "FiniteLimit";
    case VariationVerdict::Diverging: return "Diverging";
  }
  return "unknown";
}

VariationReport pvariation_trichotomy(const ProcessSpec& spec, double p,
                                      const std::vector<std::size_t>& n_list,
                                      std::size_t n_paths, std::uint64_t seed) {
  if (!(p >= 1.0)) throw DomainError("variation: p must be >= 1");
  if (n_list.size() < 2) throw DomainError("variation: need at least two n values");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (!is_pow2(n_list[i]) || (i > 0 && n_list[i] <= n_list[i - 1])) {
      throw DomainError("variation: n values must be increasing powers of two");
    }
  }
  if (n_paths < 2) throw DomainError("variation: need at least 2 paths");

  VariationReport rep{.spec = spec, .p = p, .n_values = n_list, .mean_sums = {}, .se_sums = {}};
  rep.seed = seed;
  rep.n_paths = n_paths;
  rep.theoretical_slope = 1.0 - p * spec.hurst();
  if (spec.family() == Family::VolterraG) rep.sigma_j_sq = volterra_g_energy(spec.beta(), spec.g());

  const std::size_t n_max = n_list.back();
  const PathEnsemble ens = sample_auto(spec, TimeGrid::dyadic(n_max), static_cast<Eigen::Index>(n_paths),
                                       seed, static_cast<int>(std::max<std::size_t>(64, n_max)));
  std::vector<double> sums(n_paths);
  for (std::size_t n : n_list) {
    const std::size_t stride = n_max / n;
    for (std::size_t i = 0; i < n_paths; ++i) {
      std::vector<double> sub(n + 1);
      for (std::size_t k = 0; k <= n; ++k)
        sub[k] = ens.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k * stride));
      sums[i] = pvariation_sum(sub, p);
    }
    const double m = mean_of(sums);
    rep.mean_sums.push_back(m);
    rep.se_sums.push_back(standard_error(sums, m));
  }

  const std::size_t start = std::min(n_list.size() / 2, n_list.size() - 2);
  std::vector<double> lx, ly;
  for (std::size_t i = start; i < n_list.size(); ++i) {
    if (!(rep.mean_sums[i] > 0.0)) throw NumericalError("variation: mean S_n is not positive");
    lx.push_back(std::log(static_cast<double>(n_list[i])));
    ly.push_back(std::log(rep.mean_sums[i]));
  }
  rep.slope_estimate = fit_line(lx, ly).slope;
  rep.limit_estimate = rep.mean_sums.back();
  if (rep.slope_estimate <= -0.1) {
    rep.verdict = VariationVerdict::VanishingTo0;
  } else if (rep.slope_estimate >= 0.1) {
    rep.verdict = VariationVerdict::Diverging;
  } else {
    rep.verdict = VariationVerdict::FiniteLimit;
  }
  return rep;
}

double ErgodicFunction::operator()(double x) const {
  return kind == Kind::Square ? x * x : ssgm::abs_pow(x, p);
}

double gaussian_abs_moment(double sigma_sq, double p) {
  if (!(sigma_sq >= 0.0) || !(p > -1.0)) throw DomainError("gaussian_abs_moment: bad arguments");
  return std::pow(sigma_sq, 0.5 * p) * std::pow(2.0, 0.5 * p) * std::tgamma(0.5 * (p + 1.0)) /
         std::sqrt(std::numbers::pi);
}

ErgodicResult ergodic_average(const ProcessSpec& spec, const ErgodicFunction& f, std::size_t n,
                              std::size_t n_paths, std::uint64_t seed) {
  if (spec.family() != Family::VolterraG) throw DomainError("ergodic: spec must be volterra-g");
  if (n < 1 || n_paths < 1) throw DomainError("ergodic: n and n_paths must be >= 1");
  if (f.kind == ErgodicFunction::Kind::AbsPow && !(f.p > 0.0)) {
    throw DomainError("ergodic: AbsPow exponent must be > 0");
  }
  ErgodicResult res;
  res.proven_regime = spec.proven_regime();
  res.sigma_j_sq = volterra_g_energy(spec.beta(), spec.g());
  res.target = f.kind == ErgodicFunction::Kind::Square ? res.sigma_j_sq
                                                       : gaussian_abs_moment(res.sigma_j_sq, f.p);

  const PathEnsemble ens =
      sample_volterra_zg(spec.hurst(), spec.beta(), spec.g(), TimeGrid::integers(n),
                         kErgodicInnerSteps, static_cast<Eigen::Index>(n_paths), seed);
  std::vector<double> per_path(n_paths), terms(n);
  for (std::size_t i = 0; i < n_paths; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    for (std::size_t k = 0; k < n; ++k) {
      terms[k] = f(ens.values(row, static_cast<Eigen::Index>(k + 1)) -
                   ens.values(row, static_cast<Eigen::Index>(k)));
    }
    per_path[i] = mean_of(terms);
  }
  res.average = mean_of(per_path);
  res.standard_error = standard_error(per_path, res.average);
  return res;
}

IncrementVariance increment_variance(double hurst, double beta, const GFunction& g, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("increment_variance: t must be > 0");
  const ProcessSpec spec = ProcessSpec::volterra_g(hurst, beta, g);  // validates
  const detail::WeightFunction f{beta, g};
  const double e = hurst - 0.5;
  const double a = std::pow(t + 1.0, e);
  const double b = std::pow(t, e);
  const double gamma = f.substitution_power();

  // s = t x over [0, t]; y = 1 - x is the complement.
  QuadOptions inner;
  inner.abs_tol = 0.5e-10 / t;
  const QuadResult first = detail::integrate_complement(
      [&](double y) {
        const double diff = a * f.at_complement((1.0 + t * y) / (t + 1.0)) - b * f.at_complement(y);
        return diff * diff;
      },
      gamma, inner);

  // s over [t, t+1]: complement of s/(t+1) runs over [0, 1/(t+1)].
  const double width = 1.0 / (t + 1.0);
  const double scale = a * a * (t + 1.0);
  QuadOptions tail;
  tail.abs_tol = 0.5e-10 / std::max(scale * width, 1e-300);
  const QuadResult second = integrate_simpson(
      [&](double w) {
        const double wg = std::pow(w, gamma);
        if (wg == 0.0) return 0.0;
        const double v = f.at_complement(width * wg);
        return v * v * gamma * std::pow(w, gamma - 1.0);
      },
      0.0, 1.0, tail);

  IncrementVariance out;
  out.value.value = t * first.value + scale * width * second.value;
  out.value.abs_error_estimate = t * first.abs_error_estimate + scale * width * second.abs_error_estimate;
  out.limit = volterra_g_energy(spec.beta(), spec.g());
  return out;
}

double int_limit_residual(double beta, const GFunction& g, double t) {
  if (!(t >= 2.0) || !std::isfinite(t)) throw DomainError("int_limit_residual: t must be >= 2");
  if (!(beta > -0.5)) throw DomainError("int_limit_residual: beta must be > -1/2");
  const detail::WeightFunction f{beta, g};
  QuadOptions opts;
  opts.abs_tol = 1e-11;
  const QuadResult r = detail::integrate_complement(
      [&](double y) {
        const double fy = f.at_complement(y);
        return fy * (fy - f.at_complement(y + (1.0 - y) / t)) * t + 0.5 * fy * fy;
      },
      f.substitution_power(), opts);
  return r.value;
}

}  // namespace ssgm
