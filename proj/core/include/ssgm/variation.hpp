#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ssgm/kernels.hpp"
#include "ssgm/process_spec.hpp"
#include "ssgm/quadrature.hpp"

namespace ssgm {

/// sum_k |Z_{(k+1)/n} - Z_{k/n}|^p for a path given at k/n, k = 0..n, with n a
/// power of two and p >= 1.
double pvariation_sum(std::span<const double> path, double p);

enum class VariationVerdict { VanishingTo0, FiniteLimit, Diverging };
std::string_view variation_verdict_name(VariationVerdict v);

struct VariationReport {
  ProcessSpec spec;
  double p = 2.0;
  std::vector<std::size_t> n_values;
  std::vector<double> mean_sums;
  std::vector<double> se_sums;
  double slope_estimate = 0.0;
  double theoretical_slope = 0.0;  // 1 - pH
  VariationVerdict verdict = VariationVerdict::FiniteLimit;
  double limit_estimate = 0.0;     // mean S_n at the largest n
  std::optional<double> sigma_j_sq{};
  std::uint64_t seed = 0;
  std::size_t n_paths = 0;
};

/// Samples n_paths paths on the finest dyadic grid of n_list and evaluates
/// S_n on every coarser n by subsampling. The slope of log mean S_n against
/// log n is fitted over the top half of n_list; slope <= -0.1 is
/// VanishingTo0, >= 0.1 Diverging, otherwise FiniteLimit.
VariationReport pvariation_trichotomy(const ProcessSpec& spec, double p,
                                      const std::vector<std::size_t>& n_list,
                                      std::size_t n_paths, std::uint64_t seed);

struct ErgodicFunction {
  enum class Kind { AbsPow, Square };
  Kind kind = Kind::Square;
  double p = 2.0;

  static ErgodicFunction square() { return {Kind::Square, 2.0}; }
  static ErgodicFunction abs_pow(double p) { return {Kind::AbsPow, p}; }
  double operator()(double x) const;
};

struct ErgodicResult {
  double average = 0.0;
  double standard_error = 0.0;
  /// E f(J) for J ~ N(0, sigma_j_sq).
  double target = 0.0;
  double sigma_j_sq = 0.0;
  bool proven_regime = true;
};

/// Inner cells per unit time for integer-time ergodic runs.
inline constexpr int kErgodicInnerSteps = 64;

/// (1/n) sum_{k<n} f(Z_{k+1} - Z_k) along one long discretized path per
/// sample, averaged over paths.
ErgodicResult ergodic_average(const ProcessSpec& spec, const ErgodicFunction& f, std::size_t n,
                              std::size_t n_paths, std::uint64_t seed);

/// E|J|^p = sigma^p 2^{p/2} Gamma((p+1)/2) / sqrt(pi).
double gaussian_abs_moment(double sigma_sq, double p);

struct IncrementVariance {
  QuadResult value;  // E[(Z_{t+1} - Z_t)^2]
  double limit = 0.0;  // int_0^1 F^2
};

/// Quadrature of
///   int_0^t [(t+1)^{H-1/2} F(s/(t+1)) - t^{H-1/2} F(s/t)]^2 ds
///   + int_t^{t+1} [(t+1)^{H-1/2} F(s/(t+1))]^2 ds.
IncrementVariance increment_variance(double hurst, double beta, const GFunction& g, double t);

/// t int_0^1 F(s)[F(s) - F((1-1/t)s)] ds + (1/2) int_0^1 F(s)^2 ds, t >= 2.
double int_limit_residual(double beta, const GFunction& g, double t);

}  // namespace ssgm
