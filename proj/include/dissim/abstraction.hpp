#pragma once

#include <dissim/storage.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dissim {

/// Options steering the mechanical reduction. Absent optional blocks select
/// the mechanical default noted on each field.
struct AbstractionOptions {
  /// Internal-output matching map H (q2 x qhat2); default identity, which
  /// forces Chat2 = C2 P.
  std::optional<Matrix> h;
  /// Abstract internal-input compression What (pz x phat); default W, so the
  /// abstraction keeps the concrete coupling width.
  std::optional<Matrix> w_hat;
  /// Abstract input map Bhat (nhat x mhat); default the least-squares
  /// embedding factor of B through P.
  std::optional<Matrix> b_hat;
  /// Abstract diffusion column (nhat x 1); default zero, which minimizes the
  /// offset gain since abstract noise only ever adds to it.
  std::optional<Matrix> g_hat;
  /// Abstract nonlinearity feed-through L2 (m x lout); default the layered
  /// least-squares completion of E = P Ehat + B (L2 - L1).
  std::optional<Matrix> l2;

  enum class JumpMode { none, optimize };
  /// none: jump-free abstraction. optimize: pick one abstract jump channel by
  /// the closed-form offset minimization over `lambda_grid`.
  JumpMode jump_mode = JumpMode::none;
  std::vector<double> lambda_grid = {1.0};
  int refine_rounds = 0;
  /// Young split used by the jump matching objective; negative selects
  /// kappa_hat / 4.
  double pi_prime = -1.0;
};

/// Output of the mechanical reduction: the abstract system, the completed
/// certificate, and the least-squares residuals of each construction step.
struct AbstractionResult {
  JumpDiffusionSystem abstraction;
  StorageCertificate certificate;
  double drift_residual = 0.0;      ///< ||A P - P Ahat + B Q||_F
  double output2_residual = 0.0;    ///< ||C2 P - H Chat2||_F
  double input_residual = 0.0;      ///< ||P Dhat - Z What||_F
  double nonlin_residual = 0.0;     ///< ||E - P Ehat - B (L2 - L1)||_F
  double b_hat_residual = 0.0;      ///< ||B - P Bhat||_F for the default Bhat
  JumpMatchResult jump;             ///< populated when jump_mode == optimize
  std::vector<std::string> notes;
};

/// Mechanically constructs a reduced-order abstraction for the concrete
/// system from a certificate whose concrete-side blocks (Mhat, K, P, Z, W,
/// L1, X, Lambda, auxiliary system, kappa_hat, kappa_bar) are already fixed:
///
///   1. (Ahat, Q) from the layered solve of A P = P Ahat - B Q,
///   2. Chat1 = C1 P,
///   3. Chat2 from H Chat2 = C2 P (least squares in H),
///   4. Fhat = F P, keeping the concrete nonlinearity kind,
///   5. (Ehat, L2) from the layered solve of E = P Ehat + B (L2 - L1),
///      unless L2 is overridden, in which case Ehat solves the remainder,
///   6. Dhat from P Dhat = Z What,
///   7. Bhat, Ghat, and the jump channel per the options.
///
/// The completed certificate carries (Q, H, What, L2) next to the supplied
/// blocks. Residuals report how exactly each structural equation could be
/// met; callers decide which of them must vanish.
inline AbstractionResult build_abstraction(const JumpDiffusionSystem& sys,
                                           const StorageCertificate& base,
                                           const AbstractionOptions& options = {}) {
  sys.validate();
  base.validate_concrete(sys);
  const Eigen::Index n = sys.state_dim();
  const Eigen::Index n_hat = base.p.cols();
  detail::require(base.p.rows() == n, "build_abstraction: P has " +
                                          std::to_string(base.p.rows()) + " rows, expected " +
                                          std::to_string(n));
  detail::require(n_hat > 0, "build_abstraction: P must have at least one column");
  {
    Eigen::JacobiSVD<Matrix> svd(base.p);
    detail::require(detail::svd_rank(svd, base.p.rows(), base.p.cols()) == n_hat,
                    "build_abstraction: P must have full column rank");
  }

  AbstractionResult result;
  result.certificate = base;
  JumpDiffusionSystem& abs = result.abstraction;

  // Drift pair.
  const PairEmbedding pair = solve_pair_embedding(sys.a, sys.b, base.p);
  abs.a = pair.a_hat;
  result.certificate.q = pair.q;
  result.drift_residual = pair.residual;
  if (!pair.feasible) {
    result.notes.push_back("drift embedding is inexact (residual " +
                           std::to_string(pair.residual) + ")");
  }

  // Outputs.
  abs.c1 = sys.c1 * base.p;
  const Matrix h = options.h.value_or(
      Matrix(Matrix::Identity(sys.internal_output_dim(), sys.internal_output_dim())));
  detail::require(h.rows() == sys.internal_output_dim(),
                  "build_abstraction: H has " + std::to_string(h.rows()) +
                      " rows, expected " + std::to_string(sys.internal_output_dim()));
  const FactorResult c2_solve = image_factor(Matrix(sys.c2 * base.p), h);
  abs.c2 = c2_solve.factor;
  result.certificate.h = h;
  result.output2_residual = c2_solve.residual;
  if (!c2_solve.feasible) {
    result.notes.push_back("internal output matching is inexact (residual " +
                           std::to_string(c2_solve.residual) + ")");
  }

  // Nonlinearity: same kind, argument map pushed through P.
  abs.f = sys.f * base.p;
  abs.phi = sys.phi;
  if (options.l2.has_value()) {
    result.certificate.l2 = *options.l2;
    detail::require_shape(result.certificate.l2, sys.input_dim(), sys.phi.output_dimension(),
                          "build_abstraction: L2 override");
    const Matrix remainder = sys.e - sys.b * (result.certificate.l2 - base.l1);
    const FactorResult e_solve = image_factor(remainder, base.p);
    abs.e = e_solve.factor;
    result.nonlin_residual = e_solve.residual;
  } else {
    const LayeredSolve e_solve = solve_layered_least_squares(base.p, sys.b, sys.e);
    abs.e = e_solve.y_top;
    result.certificate.l2 = base.l1 + e_solve.y_bottom;
    result.nonlin_residual = e_solve.residual;
  }
  if (result.nonlin_residual > 1e-8 * (1.0 + sys.e.norm())) {
    result.notes.push_back("nonlinearity injection matching is inexact (residual " +
                           std::to_string(result.nonlin_residual) + ")");
  }

  // Internal input.
  const Matrix w_hat = options.w_hat.value_or(base.w);
  detail::require(w_hat.rows() == base.z.cols(),
                  "build_abstraction: What has " + std::to_string(w_hat.rows()) +
                      " rows, expected " + std::to_string(base.z.cols()));
  result.certificate.w_hat = w_hat;
  const FactorResult d_solve = image_factor(Matrix(base.z * w_hat), base.p);
  abs.d = d_solve.factor;
  result.input_residual = d_solve.residual;
  if (!d_solve.feasible) {
    result.notes.push_back("internal input matching is inexact (residual " +
                           std::to_string(d_solve.residual) + ")");
  }

  // Input map.
  if (options.b_hat.has_value()) {
    abs.b = *options.b_hat;
    detail::require(abs.b.rows() == n_hat, "build_abstraction: Bhat override has " +
                                               std::to_string(abs.b.rows()) +
                                               " rows, expected " + std::to_string(n_hat));
  } else {
    const FactorResult b_solve = image_factor(sys.b, base.p);
    abs.b = b_solve.factor;
    result.b_hat_residual = b_solve.residual;
  }

  // Noise: abstract diffusion defaults to zero because it can only increase
  // the offset gain.
  abs.g = options.g_hat.value_or(Matrix(Matrix::Zero(n_hat, 1)));
  detail::require_shape(abs.g, n_hat, 1, "build_abstraction: Ghat");

  // Jumps.
  if (options.jump_mode == AbstractionOptions::JumpMode::optimize) {
    const double pi_prime =
        options.pi_prime < 0.0 ? base.kappa_hat / 4.0 : options.pi_prime;
    result.jump = jump_matching(sys, base.m_hat, base.p, pi_prime, options.lambda_grid,
                                options.refine_rounds);
    if (result.jump.r_hat.norm() > 0.0) {
      abs.jump_resets = {result.jump.r_hat};
      abs.jump_rates = {result.jump.lambda_hat};
    } else {
      result.notes.push_back("jump matching found no useful abstract jump channel");
    }
  }

  abs.validate("abstraction");
  result.certificate.validate_pair(sys, abs);
  return result;
}

}  // namespace dissim
