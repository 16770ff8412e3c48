#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "ssgm/kernels.hpp"
#include "ssgm/time_grid.hpp"

namespace ssgm {

using KernelFn = std::function<double(double, double)>;

/// Symmetric covariance matrix entries(i, j) = R(t_i, t_j).
struct GramMatrix {
  TimeGrid grid;
  Eigen::MatrixXd entries;
};

/// Evaluates only i <= j and mirrors. Kernel failures are rethrown with the
/// offending (i, j) and times in the message.
GramMatrix build_gram(const CovKernel& kernel, const TimeGrid& grid);
GramMatrix build_gram(const KernelFn& kernel, const TimeGrid& grid);

struct PosDefReport {
  bool psd = false;
  /// Smallest eigenvalue of the Gram matrix (symmetric eigensolver).
  double min_eigenvalue = 0.0;
  /// Smallest pivot of the pivoted LDL^T factorization.
  double min_pivot = 0.0;
  /// Present iff !psd: coefficients a with sum a_k a_l R(t_k, t_l) < 0.
  std::optional<Eigen::VectorXd> witness;
  double witness_form = 0.0;
};

/// PSD iff the pivoted factorization completes with every pivot
/// >= -tol * max_diagonal (and no indefinite 2x2 block survives in the
/// numerically-zero tail).
PosDefReport psd_check(const GramMatrix& gram, double tol = 1e-10);

/// (s v t)^alpha / (s ^ t)^beta for s ^ t > 0, zero on the axes.
double alpha_beta_kernel(double alpha, double beta, double s, double t);

class MinorQuery {
 public:
  /// Throws DomainError unless every grid time is > 0.
  MinorQuery(double alpha, double beta, TimeGrid grid);

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  const TimeGrid& grid() const { return grid_; }

 private:
  double alpha_;
  double beta_;
  TimeGrid grid_;
};

/// Closed-form determinant of the (alpha, beta) Gram matrix,
///   t_d^{alpha-beta} prod_{i<d} (t_i^{alpha+beta} - t_{i+1}^{alpha+beta}) / t_i^{2 beta}.
double lindstrom_minor(const MinorQuery& q);

/// prod_i sum_j f_i(x_j) mu(x_j, x_i) for the chain Moebius function:
/// f_1(x_1) * prod_{i>1} (f_i(x_i) - f_i(x_{i-1})). `values(i, j)` holds
/// f_i(x_j) for j <= i; the upper triangle is ignored.
double chain_det(const Eigen::MatrixXd& values, const TimeGrid& grid);

/// Direct determinant via full-pivot LU.
double direct_determinant(const Eigen::MatrixXd& m);

/// |lindstrom_minor - direct_determinant| / prod_i ||row_i||_2. Requires d <= 12.
double minor_residual(const MinorQuery& q);

/// CSV: header row of grid times, then one row per matrix row, 17
/// significant digits, LF line endings.
void write_gram_csv(std::ostream& os, const GramMatrix& gram);

}  // namespace ssgm
