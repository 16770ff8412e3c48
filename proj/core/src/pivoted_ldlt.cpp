#include "ssgm/pivoted_ldlt.hpp"

#include <utility>

#include "ssgm/error.hpp"

namespace ssgm {

PivotedLdlt pivoted_ldlt(const Eigen::MatrixXd& a, double small) {
  if (a.rows() != a.cols()) throw DomainError("pivoted_ldlt: matrix must be square");
  const Eigen::Index d = a.rows();
  PivotedLdlt f;
  f.order.resize(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < d; ++i) f.order[static_cast<std::size_t>(i)] = i;
  Eigen::MatrixXd w = a;
  f.lower = Eigen::MatrixXd::Identity(d, d);
  f.pivots = Eigen::VectorXd::Zero(d);

  Eigen::Index k = 0;
  for (; k < d; ++k) {
    Eigen::Index p = k;
    for (Eigen::Index i = k + 1; i < d; ++i) {
      if (w(i, i) > w(p, p)) p = i;
    }
    if (p != k) {
      w.row(k).swap(w.row(p));
      w.col(k).swap(w.col(p));
      f.lower.block(k, 0, 1, k).swap(f.lower.block(p, 0, 1, k));
      std::swap(f.order[static_cast<std::size_t>(k)], f.order[static_cast<std::size_t>(p)]);
    }
    const double pivot = w(k, k);
    if (pivot <= small) {
      f.negative_pivot = pivot < -small;
      break;
    }
    f.pivots(k) = pivot;
    const Eigen::Index rest = d - k - 1;
    if (rest > 0) {
      Eigen::VectorXd col = w.col(k).tail(rest) / pivot;
      f.lower.col(k).tail(rest) = col;
      w.bottomRightCorner(rest, rest).noalias() -= pivot * col * col.transpose();
    }
  }
  f.rank = k;
  f.schur = w.bottomRightCorner(d - k, d - k);
  return f;
}

Eigen::VectorXd PivotedLdlt::pull_back(const Eigen::VectorXd& y) const {
  const Eigen::Index d = lower.rows();
  if (y.size() != d) throw DomainError("pull_back: dimension mismatch");
  // Solve L^T z = y, then undo the permutation.
  Eigen::MatrixXd l = lower;
  l.bottomRightCorner(d - rank, d - rank).setIdentity();
  const Eigen::VectorXd z = l.transpose().triangularView<Eigen::UnitUpper>().solve(y);
  Eigen::VectorXd a(d);
  for (Eigen::Index k = 0; k < d; ++k) a(order[static_cast<std::size_t>(k)]) = z(k);
  return a;
}

}  // namespace ssgm
