#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

namespace ssgm {

/// Symmetric LDL^T factorization with diagonal pivoting,
///   P A P^T = L D L^T,
/// choosing at each step the largest remaining diagonal entry.
///
/// Elimination stops early once the largest remaining diagonal entry is at
/// most `small` in absolute value; the untouched trailing block is then kept
/// in `schur`. A negative pivot below -small also stops elimination.
struct PivotedLdlt {
  /// order[k] is the row of A that became row k of P A P^T.
  std::vector<Eigen::Index> order;
  Eigen::MatrixXd lower;     // unit lower triangular, first `rank` columns valid
  Eigen::VectorXd pivots;    // D, first `rank` entries valid
  Eigen::Index rank = 0;     // number of eliminated columns
  Eigen::MatrixXd schur;     // trailing (d - rank) block in pivoted order
  bool negative_pivot = false;

  /// Vector a with a^T A a equal to y^T diag(pivots, schur) y, for y given in
  /// pivoted coordinates.
  Eigen::VectorXd pull_back(const Eigen::VectorXd& y) const;
};

PivotedLdlt pivoted_ldlt(const Eigen::MatrixXd& a, double small);

}  // namespace ssgm
