#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ssgm/extended_real.hpp"
#include "ssgm/kernels.hpp"
#include "ssgm/time_grid.hpp"

namespace ssgm {

struct DoobResidual {
  double max = 0.0;
  double mean = 0.0;
  std::size_t triples = 0;
};

/// Relative violation of R(s,u)R(t,t) = R(s,t)R(t,u) over all grid triples
/// s < t < u, each normalized by max(|R(s,u)R(t,t)|, |R(s,t)R(t,u)|, 1e-300).
/// Requires d >= 3 and positive times.
DoobResidual doob_residual(const CovKernel& kernel, const TimeGrid& grid);

/// Signed R(s,u)R(t,t) - R(s,t)R(t,u) for one triple.
double doob_numerator(const CovKernel& kernel, double s, double t, double u);

struct CanonicalFit {
  double r11 = 0.0;
  ExtendedReal c{0.0};
  /// Max |log R(t,1) - fitted line|; 0 on the white-noise branch.
  double regression_residual = 0.0;
};

/// Fits R(t,1) = r11 t^{-c} on t_grid within (0,1] (>= 10 points). Returns
/// c = -inf when R(t,1) vanishes for every t < 1. Throws DomainError when
/// R(t,1) < 0 somewhere, or R(1,1) <= 0.
CanonicalFit fit_canonical(const CovKernel& kernel, const TimeGrid& t_grid);

/// max |g(x+y) - g(x) g(y)| with g(x) = R(e^{-x},1) / R(1,1).
double multiplicative_check(const CovKernel& kernel, const std::vector<double>& xs,
                            const std::vector<double>& ys);

struct FactorizationResult {
  TimeGrid grid;
  std::vector<double> g_values;
  std::vector<double> f_values;
  double max_residual = 0.0;
  /// G/F non-decreasing along the grid.
  bool ratio_nondecreasing = false;
};

/// R(s,t) = G(s^t) F(s v t) with F(t_j) = R(t_1, t_j), G(t_j) = R(t_j,t_j)/F(t_j).
/// Throws DomainError unless R > 0 on grid x grid.
FactorizationResult gf_factorize(const CovKernel& kernel, const TimeGrid& grid);

/// Shared by sqrt_diag_profile and asym_coeff_estimate. Fields that do not
/// apply to a given report stay empty.
struct AsymReport {
  std::string kernel;
  double alpha = 0.5;

  // One-term power fit y ~ coefficient * x^exponent (after removing
  // constant_term, for asym_coeff_estimate).
  double constant_term = 0.0;
  double coefficient = 0.0;
  double exponent = 0.0;
  double fit_residual = 0.0;
  bool fit_ok = true;
  std::string note;

  // sqrt_diag_profile only.
  std::optional<double> two_term_residual;
  bool two_power_flag = false;
  bool zero_profile = false;
  std::optional<double> implied_c;  // 2 (exponent - 2H) for a single power

  // asym_coeff_estimate only.
  std::optional<double> predicted_constant;
  std::optional<double> predicted_coefficient;
  std::optional<double> predicted_exponent;
  /// l(t^{1-alpha} - 1) ~ coefficient * t^{(1-alpha) exponent}.
  std::optional<double> t_exponent;
  /// Consistent with l(t^{1-alpha}-1) = t^{(2H+c)(1-alpha)}: no constant term
  /// and unit coefficient.
  std::optional<bool> power_law_consistent;
};

/// Log-log fits of R(sqrt t, t) against t with one and two power terms.
/// two_power_flag is set when the two-term fit lowers the max log residual
/// by at least 100x and the one-term residual exceeds 1e-9.
AsymReport sqrt_diag_profile(const CovKernel& kernel, const std::vector<double>& t_values);

/// Tail extrapolation of l(u) on geometric u_values: the constant term by
/// Aitken's delta-squared on the first, middle and last samples, then a
/// log-log fit of the remainder. Reports the predicted pair where known.
AsymReport asym_coeff_estimate(const ProcessSpec& spec, const std::vector<double>& u_values,
                               double alpha = 0.5);

enum class MarkovVerdict { MarkovCanonical, MarkovWhiteNoise, NotMarkov, Indeterminate, Degenerate };

std::string_view verdict_name(MarkovVerdict v);

struct MarkovThresholds {
  double markov = 1e-8;       // doob max <= markov
  double not_markov = 1e-4;   // doob max > not_markov
  double c_slack = 1e-6;
};

struct MarkovReport {
  std::string kernel;
  DoobResidual doob;
  std::optional<CanonicalFit> fit;
  std::string fit_error;
  double mult_residual = 0.0;
  std::optional<FactorizationResult> factorization;
  std::string factorization_error;
  std::optional<AsymReport> profile;
  MarkovVerdict verdict = MarkovVerdict::Indeterminate;
};

/// Full pipeline: Doob residual on `grid`, canonical fit on a 20-point
/// geometric grid in (0,1], multiplicative check on x, y in {0, 0.25, ..., 3},
/// G-F factorization on `grid`, and the sqrt-diagonal profile on [1e4, 1e10].
MarkovReport markov_test(const CovKernel& kernel, const TimeGrid& grid,
                         const MarkovThresholds& thresholds = {});

/// The 20-point geometric grid on [0.05, 5] used throughout the test suites.
TimeGrid standard_grid();

}  // namespace ssgm
