#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

/// Dense linear-algebra predicates shared by the certificate checks: sign
/// tests for symmetric matrices, range-inclusion factorizations, and layered
/// least-squares solves used when completing reduced-order models.
///
/// Error contract used across the library:
///  - shape mismatches throw std::invalid_argument naming the offending input,
///  - non-finite entries throw std::domain_error.
namespace dissim {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

inline void require_finite(const Matrix& m, const std::string& name) {
  if (!m.allFinite()) throw std::domain_error(name + " contains a non-finite entry");
}

inline void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                          const std::string& name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw std::invalid_argument(name + ": expected " + std::to_string(rows) + "x" +
                                std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()));
  }
}

/// Rank of a matrix from its singular values with the conventional
/// max(rows, cols) * eps * sigma_max cutoff.
inline Eigen::Index svd_rank(const Eigen::JacobiSVD<Matrix>& svd, Eigen::Index rows,
                             Eigen::Index cols) {
  if (svd.singularValues().size() == 0) return 0;
  const double cutoff = static_cast<double>(std::max(rows, cols)) *
                        std::numeric_limits<double>::epsilon() * svd.singularValues()(0);
  Eigen::Index rank = 0;
  while (rank < svd.singularValues().size() && svd.singularValues()(rank) > cutoff) ++rank;
  return rank;
}

}  // namespace detail

/// Outcome of a one-sided definiteness test on a symmetrized matrix.
struct SymVerdict {
  bool is_satisfied = false;
  /// Most positive eigenvalue of (S + S^T)/2; negative when the test holds
  /// strictly, so more negative means a larger feasibility margin.
  double margin = 0.0;
  /// Threshold the margin was compared against.
  double tolerance = 0.0;
};

/// Largest singular value of the symmetrized input, used to scale the default
/// tolerance of check_nsd.
inline double symmetric_scale(const Matrix& s) {
  if (s.size() == 0) return 0.0;
  const Matrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Tests whether (S + S^T)/2 is negative semidefinite up to `tolerance`.
/// The margin is the most positive eigenvalue; the test passes when
/// margin <= tolerance. Pass a negative `tolerance` (the default) to use the
/// scale-relative value 1e-8 * sigma_max(symmetrized S).
inline SymVerdict check_nsd(const Matrix& s, double tolerance = -1.0) {
  detail::require(s.rows() == s.cols(), "check_nsd: matrix must be square, got " +
                                            std::to_string(s.rows()) + "x" +
                                            std::to_string(s.cols()));
  detail::require_finite(s, "check_nsd: input");
  SymVerdict verdict;
  if (s.size() == 0) {
    verdict.margin = 0.0;
    verdict.tolerance = tolerance < 0.0 ? 0.0 : tolerance;
    verdict.is_satisfied = true;
    return verdict;
  }
  const Matrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  verdict.margin = es.eigenvalues().maxCoeff();
  verdict.tolerance =
      tolerance < 0.0 ? 1e-8 * es.eigenvalues().cwiseAbs().maxCoeff() : tolerance;
  verdict.is_satisfied = verdict.margin <= verdict.tolerance;
  return verdict;
}

/// Tests whether (S + S^T)/2 is positive semidefinite; the margin is the most
/// negative eigenvalue negated, so the same pass rule margin <= tolerance
/// applies.
inline SymVerdict check_psd(const Matrix& s, double tolerance = -1.0) {
  return check_nsd(-s, tolerance);
}

/// Result of a range-inclusion factorization target = basis * factor.
struct FactorResult {
  Matrix factor;          ///< least-squares minimizer, minimum Frobenius norm
  double residual = 0.0;  ///< Frobenius norm of basis * factor - target
  bool feasible = false;  ///< residual <= tolerance * (1 + ||target||_F)
  double tolerance = 0.0;
};

/// Solves target = basis * factor in the least-squares sense with the
/// minimum-norm factor, and reports whether the fit is exact up to
/// tolerance * (1 + ||target||_F). Default tolerance 1e-8.
inline FactorResult image_factor(const Matrix& target, const Matrix& basis,
                                 double tolerance = 1e-8) {
  detail::require(basis.rows() == target.rows(),
                  "image_factor: basis has " + std::to_string(basis.rows()) +
                      " rows but target has " + std::to_string(target.rows()));
  detail::require_finite(target, "image_factor: target");
  detail::require_finite(basis, "image_factor: basis");
  FactorResult result;
  result.tolerance = tolerance;
  if (basis.cols() == 0 || basis.rows() == 0) {
    result.factor = Matrix::Zero(basis.cols(), target.cols());
    result.residual = target.norm();
  } else {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(basis);
    result.factor = cod.solve(target);
    result.residual = (basis * result.factor - target).norm();
  }
  result.feasible = result.residual <= tolerance * (1.0 + target.norm());
  return result;
}

/// Solution of min ||[P, B] [Y_top; Y_bottom] - T||_F where ties are broken
/// lexicographically: first the residual, then ||Y_bottom||_F, then
/// ||Y_top||_F. The minimizer of this layered problem is unique.
struct LayeredSolve {
  Matrix y_top;
  Matrix y_bottom;
  double residual = 0.0;
};

/// Layered least squares for two-block coefficient fits. Among all
/// least-squares minimizers of ||P * Y_top + B * Y_bottom - T||_F it selects
/// the one with the smallest ||Y_bottom||_F and, within those, the smallest
/// ||Y_top||_F.
inline LayeredSolve solve_layered_least_squares(const Matrix& p, const Matrix& b,
                                                const Matrix& t) {
  detail::require(p.rows() == t.rows(), "solve_layered_least_squares: P has " +
                                            std::to_string(p.rows()) + " rows but T has " +
                                            std::to_string(t.rows()));
  detail::require(b.rows() == t.rows(), "solve_layered_least_squares: B has " +
                                            std::to_string(b.rows()) + " rows but T has " +
                                            std::to_string(t.rows()));
  detail::require_finite(p, "solve_layered_least_squares: P");
  detail::require_finite(b, "solve_layered_least_squares: B");
  detail::require_finite(t, "solve_layered_least_squares: T");

  const Eigen::Index c1 = p.cols();
  const Eigen::Index c2 = b.cols();
  const Eigen::Index cols = c1 + c2;
  LayeredSolve out;
  if (cols == 0) {
    out.y_top = Matrix::Zero(0, t.cols());
    out.y_bottom = Matrix::Zero(0, t.cols());
    out.residual = t.norm();
    return out;
  }

  Matrix m(t.rows(), cols);
  if (c1 > 0) m.leftCols(c1) = p;
  if (c2 > 0) m.rightCols(c2) = b;

  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeFullV);
  const Eigen::Index rank = detail::svd_rank(svd, m.rows(), cols);

  // Minimum-norm least-squares base point.
  Matrix y = Matrix::Zero(cols, t.cols());
  if (rank > 0) {
    y = svd.matrixV().leftCols(rank) *
        svd.singularValues().head(rank).cwiseInverse().asDiagonal() *
        (svd.matrixU().leftCols(rank).transpose() * t);
  }

  const Eigen::Index null_dim = cols - rank;
  if (null_dim > 0) {
    const Matrix null_basis = svd.matrixV().rightCols(null_dim);
    // Stage two: spend the null-space freedom on shrinking the bottom block.
    Matrix z = Matrix::Zero(null_dim, t.cols());
    Matrix inner_basis = Matrix::Identity(null_dim, null_dim);
    if (c2 > 0) {
      const Matrix n_bottom = null_basis.bottomRows(c2);
      Eigen::JacobiSVD<Matrix> svd_bottom(n_bottom, Eigen::ComputeThinU | Eigen::ComputeFullV);
      const Eigen::Index rank_bottom = detail::svd_rank(svd_bottom, c2, null_dim);
      if (rank_bottom > 0) {
        z = -(svd_bottom.matrixV().leftCols(rank_bottom) *
              svd_bottom.singularValues().head(rank_bottom).cwiseInverse().asDiagonal() *
              (svd_bottom.matrixU().leftCols(rank_bottom).transpose() * y.bottomRows(c2)));
      }
      inner_basis = svd_bottom.matrixV().rightCols(null_dim - rank_bottom);
    }
    // Stage three: spend what is left on shrinking the top block.
    if (c1 > 0 && inner_basis.cols() > 0) {
      const Matrix n_top = null_basis.topRows(c1) * inner_basis;
      Eigen::JacobiSVD<Matrix> svd_top(n_top, Eigen::ComputeThinU | Eigen::ComputeFullV);
      const Eigen::Index rank_top = detail::svd_rank(svd_top, c1, inner_basis.cols());
      if (rank_top > 0) {
        const Matrix top_now = y.topRows(c1) + null_basis.topRows(c1) * z;
        z += inner_basis * (-(svd_top.matrixV().leftCols(rank_top) *
                              svd_top.singularValues().head(rank_top).cwiseInverse().asDiagonal() *
                              (svd_top.matrixU().leftCols(rank_top).transpose() * top_now)));
      }
    }
    y += null_basis * z;
  }

  out.y_top = y.topRows(c1);
  out.y_bottom = y.bottomRows(c2);
  out.residual = (m * y - t).norm();
  return out;
}

/// Completed drift pair for a candidate projection: A P = P Ahat - B Q.
struct PairEmbedding {
  Matrix a_hat;
  Matrix q;
  double residual = 0.0;
  bool feasible = false;
  double tolerance = 0.0;
};

/// Solves A P = P Ahat - B Q for (Ahat, Q) by layered least squares:
/// the residual is minimized first, then ||Q||_F, then ||Ahat||_F, which
/// pins a unique completion even when B has a large column space.
inline PairEmbedding solve_pair_embedding(const Matrix& a, const Matrix& b, const Matrix& p,
                                          double tolerance = 1e-8) {
  detail::require(a.rows() == a.cols(), "solve_pair_embedding: A must be square, got " +
                                            std::to_string(a.rows()) + "x" +
                                            std::to_string(a.cols()));
  detail::require(p.rows() == a.rows(), "solve_pair_embedding: P has " +
                                            std::to_string(p.rows()) + " rows but A is " +
                                            std::to_string(a.rows()) + "x" +
                                            std::to_string(a.cols()));
  detail::require(b.rows() == a.rows(), "solve_pair_embedding: B has " +
                                            std::to_string(b.rows()) + " rows but A is " +
                                            std::to_string(a.rows()) + "x" +
                                            std::to_string(a.cols()));
  const Matrix target = a * p;
  const LayeredSolve solve = solve_layered_least_squares(p, b, target);
  PairEmbedding out;
  out.a_hat = solve.y_top;
  out.q = -solve.y_bottom;
  out.residual = solve.residual;
  out.tolerance = tolerance;
  out.feasible = solve.residual <= tolerance * (1.0 + target.norm());
  return out;
}

}  // namespace dissim
