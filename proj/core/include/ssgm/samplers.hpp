#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "ssgm/kernels.hpp"
#include "ssgm/process_spec.hpp"
#include "ssgm/time_grid.hpp"

namespace ssgm {

enum class Scheme { TimeChange, Cholesky, VolterraDiscrete, WhiteNoise };

std::string_view scheme_name(Scheme scheme);
Scheme parse_scheme(std::string_view name);

/// n_paths x d sample paths plus everything needed to reproduce them.
struct PathEnsemble {
  ProcessSpec spec;
  TimeGrid grid;
  Eigen::MatrixXd values;  // row = path, column = grid point
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::Cholesky;
  int inner_steps = 0;     // VolterraDiscrete: cells per unit time
  double jitter = 0.0;     // Cholesky: final relative diagonal jitter
  bool proven_regime = true;

  Eigen::Index n_paths() const { return values.rows(); }
};

/// X_t = t^{2H+c} W(t^{-2H-2c}) with W sampled exactly at the time-changed
/// points. c must be finite and <= -H; c = -H uses a single draw W(1).
PathEnsemble sample_timechange(double hurst, double c, const TimeGrid& grid,
                               Eigen::Index n_paths, std::uint64_t seed);

/// Independent N(0, t^{2H}) values per grid point.
PathEnsemble sample_whitenoise(double hurst, const TimeGrid& grid, Eigen::Index n_paths,
                               std::uint64_t seed);

/// Generic Gaussian sampler through a pivoted factorization of the Gram
/// matrix. Jitter delta * (trace/d) * I is added only if needed, with delta
/// escalating from 1e-12 by x10 up to 1e-6; NumericalError beyond.
PathEnsemble sample_cholesky(const CovKernel& kernel, const TimeGrid& grid, Eigen::Index n_paths,
                             std::uint64_t seed);

/// Largest grid handled by sample_cholesky.
inline constexpr std::size_t kMaxCholeskyPoints = 4096;

/// Z_t = t^{H-1/2} sum_k F(m_k / t) dB_k over the cells of [0, t], with
/// F(x) = (1-x)^beta g(x) and m_k the cell midpoints. Cells are the union of
/// a uniform mesh with `inner_steps` cells per unit time and the grid times.
/// inner_steps == 0 selects the automatic policy (256, doubled while the
/// Richardson estimate of the Var(Z_1) discretization error exceeds 1%).
PathEnsemble sample_volterra_zg(double hurst, double beta, const GFunction& g,
                                const TimeGrid& grid, int inner_steps, Eigen::Index n_paths,
                                std::uint64_t seed);

/// Inner-step count chosen by the automatic policy for Z^{H,beta,g}.
int auto_inner_steps(double beta, const GFunction& g);

/// Volterra discretization of the canonical family with exact cell weights
/// int_cell K(u,t) du / |cell|. Requires c < -H.
PathEnsemble sample_volterra_canonical(double hurst, double c, const TimeGrid& grid,
                                       int inner_steps, Eigen::Index n_paths,
                                       std::uint64_t seed);

/// Family-appropriate exact sampler: time change for finite canonical, white
/// noise for c = -inf, Volterra discretization for VolterraG, Cholesky
/// otherwise.
PathEnsemble sample_auto(const ProcessSpec& spec, const TimeGrid& grid, Eigen::Index n_paths,
                         std::uint64_t seed, int inner_steps = 0);

struct EmpiricalCov {
  TimeGrid grid;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;  // unbiased sample covariance
  Eigen::MatrixXd se;   // delta-method standard errors of cov
  Eigen::Index n_paths = 0;
};

/// Requires n_paths >= 2. Reductions are pairwise over paths in path order.
EmpiricalCov empirical_cov(const PathEnsemble& ensemble);

struct SelfSimReport {
  double a = 1.0;
  /// max over entries of |cov_a - a^{2H} cov| / (4 * combined SE).
  double max_deviation = 0.0;
  Eigen::Index worst_i = 0;
  Eigen::Index worst_j = 0;
};

/// Samples on `grid` with `seed` and on a*grid with an independent derived
/// seed, and compares the two empirical covariances under H-scaling.
SelfSimReport selfsim_check(const ProcessSpec& spec, double a, const TimeGrid& grid,
                            Eigen::Index n_paths, std::uint64_t seed);

// Ensemble export.

/// Raw little-endian float64 values, column-major (one grid point after
/// another, paths contiguous).
void write_ensemble_binary(std::ostream& os, const PathEnsemble& ensemble);
/// JSON sidecar describing the binary file.
std::string ensemble_sidecar_json(const PathEnsemble& ensemble);
/// Header of grid times, then one row per path.
void write_ensemble_csv(std::ostream& os, const PathEnsemble& ensemble);

}  // namespace ssgm
