#include "ssgm/gram.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "ssgm/csv.hpp"
#include "ssgm/error.hpp"
#include "ssgm/extended_real.hpp"
#include "ssgm/parallel.hpp"
#include "ssgm/pivoted_ldlt.hpp"

namespace ssgm {
namespace {

template <class F>
GramMatrix build(const F& kernel, const TimeGrid& grid) {
  const auto d = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd m(d, d);
  parallel_for(static_cast<std::size_t>(d), [&](std::size_t begin, std::size_t end) {
    for (auto i = static_cast<Eigen::Index>(begin); i < static_cast<Eigen::Index>(end); ++i) {
      for (Eigen::Index j = i; j < d; ++j) {
        const double s = grid[static_cast<std::size_t>(i)];
        const double t = grid[static_cast<std::size_t>(j)];
        double v;
        try {
          v = kernel(s, t);
        } catch (const DomainError& e) {
          throw DomainError("R(t_" + std::to_string(i) + ", t_" + std::to_string(j) + ") at (" +
                            format_double(s) + ", " + format_double(t) + "): " + e.what());
        } catch (const Error& e) {
          throw NumericalError("R(t_" + std::to_string(i) + ", t_" + std::to_string(j) +
                               ") at (" + format_double(s) + ", " + format_double(t) +
                               "): " + e.what());
        }
        if (!std::isfinite(v)) {
          throw NumericalError("R(t_" + std::to_string(i) + ", t_" + std::to_string(j) +
                               ") is not finite at (" + format_double(s) + ", " +
                               format_double(t) + ")");
        }
        m(i, j) = v;
      }
    }
  });
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < i; ++j) m(i, j) = m(j, i);
  return GramMatrix{grid, std::move(m)};
}

double quadratic_form(const Eigen::MatrixXd& m, const Eigen::VectorXd& a) {
  return a.dot(m * a);
}

}  // namespace

GramMatrix build_gram(const CovKernel& kernel, const TimeGrid& grid) { return build(kernel, grid); }

GramMatrix build_gram(const KernelFn& kernel, const TimeGrid& grid) { return build(kernel, grid); }

PosDefReport psd_check(const GramMatrix& gram, double tol) {
  if (!(tol >= 0.0)) throw DomainError("psd_check: tol must be >= 0");
  const Eigen::MatrixXd& a = gram.entries;
  const Eigen::Index d = a.rows();
  PosDefReport report;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  if (eig.info() != Eigen::Success) throw NumericalError("psd_check: eigensolver failed");
  report.min_eigenvalue = eig.eigenvalues()(0);

  const double max_diag = a.diagonal().cwiseAbs().maxCoeff();
  const double small = tol * max_diag;
  const PivotedLdlt f = pivoted_ldlt(a, small);

  report.min_pivot = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < f.rank; ++k) report.min_pivot = std::min(report.min_pivot, f.pivots(k));
  for (Eigen::Index k = 0; k < f.schur.rows(); ++k)
    report.min_pivot = std::min(report.min_pivot, f.schur(k, k));

  // Search the unfactored tail for a negative direction.
  const Eigen::Index r = f.rank;
  const Eigen::Index m = d - r;
  std::optional<Eigen::VectorXd> y;
  for (Eigen::Index i = 0; i < m && !y; ++i) {
    if (f.schur(i, i) < -small) {
      y = Eigen::VectorXd::Zero(d);
      (*y)(r + i) = 1.0;
    }
  }
  for (Eigen::Index i = 0; i < m && !y; ++i) {
    for (Eigen::Index j = i + 1; j < m && !y; ++j) {
      const double sij = f.schur(i, j);
      if (f.schur(i, i) + f.schur(j, j) - 2.0 * std::abs(sij) < -2.0 * small) {
        y = Eigen::VectorXd::Zero(d);
        (*y)(r + i) = 1.0;
        (*y)(r + j) = sij > 0.0 ? -1.0 : 1.0;
      }
    }
  }
  if (!y) {
    report.psd = true;
    return report;
  }

  Eigen::VectorXd w = f.pull_back(*y);
  w /= w.norm();
  double form = quadratic_form(a, w);
  if (!(form < 0.0) && report.min_eigenvalue < 0.0) {
    w = eig.eigenvectors().col(0);
    form = quadratic_form(a, w);
  }
  report.witness = std::move(w);
  report.witness_form = form;
  return report;
}

double alpha_beta_kernel(double alpha, double beta, double s, double t) {
  const double lo = std::min(s, t);
  const double hi = std::max(s, t);
  if (lo <= 0.0) return 0.0;
  return std::pow(hi, alpha) * std::pow(lo, -beta);
}

MinorQuery::MinorQuery(double alpha, double beta, TimeGrid grid)
    : alpha_(alpha), beta_(beta), grid_(std::move(grid)) {
  if (!std::isfinite(alpha) || !std::isfinite(beta)) {
    throw DomainError("minor query: alpha and beta must be finite");
  }
  if (grid_.front() <= 0.0) throw DomainError("minor query: every grid time must be > 0");
}

double lindstrom_minor(const MinorQuery& q) {
  const auto t = q.grid().times();
  const double a = q.alpha();
  const double b = q.beta();
  const std::size_t d = t.size();
  double det = std::pow(t[d - 1], a) * std::pow(t[d - 1], -b);
  for (std::size_t i = 0; i + 1 < d; ++i) {
    det *= (std::pow(t[i], a + b) - std::pow(t[i + 1], a + b)) / std::pow(t[i], 2.0 * b);
  }
  return det;
}

double chain_det(const Eigen::MatrixXd& values, const TimeGrid& grid) {
  const auto d = static_cast<Eigen::Index>(grid.size());
  if (values.rows() != d || values.cols() != d) throw DomainError("chain_det: dimension mismatch");
  double det = values(0, 0);
  for (Eigen::Index i = 1; i < d; ++i) det *= values(i, i) - values(i, i - 1);
  return det;
}

double direct_determinant(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw DomainError("direct_determinant: matrix must be square");
  if (m.rows() == 0) return 1.0;
  return m.fullPivLu().determinant();
}

double minor_residual(const MinorQuery& q) {
  const auto t = q.grid().times();
  const auto d = static_cast<Eigen::Index>(t.size());
  if (d > 12) throw DomainError("minor_residual: d must be <= 12");
  Eigen::MatrixXd m(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      m(i, j) = alpha_beta_kernel(q.alpha(), q.beta(), t[static_cast<std::size_t>(i)],
                                  t[static_cast<std::size_t>(j)]);
  double scale = 1.0;
  for (Eigen::Index i = 0; i < d; ++i) scale *= m.row(i).norm();
  return std::abs(lindstrom_minor(q) - direct_determinant(m)) / scale;
}

void write_gram_csv(std::ostream& os, const GramMatrix& gram) {
  write_csv_row(os, gram.grid.times());
  std::vector<double> row(static_cast<std::size_t>(gram.entries.cols()));
  for (Eigen::Index i = 0; i < gram.entries.rows(); ++i) {
    for (Eigen::Index j = 0; j < gram.entries.cols(); ++j)
      row[static_cast<std::size_t>(j)] = gram.entries(i, j);
    write_csv_row(os, row);
  }
}

}  // namespace ssgm
