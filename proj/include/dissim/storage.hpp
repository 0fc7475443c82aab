#pragma once

#include <dissim/matrix_analysis.hpp>
#include <dissim/rng.hpp>
#include <dissim/system.hpp>

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace dissim {

/// Quadratic storage certificate tying a concrete jump-diffusion system to a
/// reduced-order abstraction through the embedding P:
///
///   V(x, xhat, theta) = (x - P xhat)^T Mhat (x - P xhat) + theta^T Lambda theta
///
/// together with the interface gains (K, Q, L1, L2), the internal-input
/// factorization D = Z W, the output matching map H, the abstract input
/// compression What, the supply-rate weight X on the auxiliary output, and
/// the decay rates kappa_hat (projected error) and kappa_bar (auxiliary
/// state). The auxiliary filter turns coupling mismatches into the
/// supply-rate output.
struct StorageCertificate {
  Matrix m_hat;   ///< n x n, symmetric positive definite
  Matrix k;       ///< m x n interface feedback gain
  Matrix p;       ///< n x nhat abstract-state embedding, full column rank
  Matrix q;       ///< m x nhat interface feed-forward gain
  Matrix h;       ///< q2 x qhat2 internal-output matching map
  Matrix z;       ///< n x pz internal-input image factor, D = Z W
  Matrix w;       ///< pz x p internal-input compression
  Matrix w_hat;   ///< pz x phat abstract internal-input compression
  Matrix l1;      ///< m x lout concrete nonlinearity feed-through
  Matrix l2;      ///< m x lout_hat abstract nonlinearity feed-through
  Matrix x;       ///< q_theta x q_theta supply-rate weight, symmetric
  Matrix lambda;  ///< l_theta x l_theta auxiliary weight, SPD when l_theta > 0
  double kappa_hat = 0.0;
  double kappa_bar = 0.0;
  AuxiliarySystem aux;

  Eigen::Index abstract_state_dim() const { return p.cols(); }

  /// Validates every block that involves only the concrete system. Throws
  /// std::invalid_argument naming the offending block.
  void validate_concrete(const JumpDiffusionSystem& sys, const std::string& label = "certificate") const {
    const Eigen::Index n = sys.state_dim();
    const Eigen::Index pz = z.cols();
    detail::require_shape(m_hat, n, n, label + ": Mhat");
    detail::require_finite(m_hat, label + ": Mhat");
    detail::require((m_hat - m_hat.transpose()).norm() <= 1e-10 * (1.0 + m_hat.norm()),
                    label + ": Mhat must be symmetric");
    {
      Eigen::SelfAdjointEigenSolver<Matrix> es(m_hat, Eigen::EigenvaluesOnly);
      detail::require(es.eigenvalues().minCoeff() > 0.0,
                      label + ": Mhat must be positive definite");
    }
    detail::require_shape(k, sys.input_dim(), n, label + ": K");
    detail::require_shape(z, n, pz, label + ": Z");
    detail::require_shape(w, pz, sys.internal_input_dim(), label + ": W");
    detail::require_shape(l1, sys.input_dim(), sys.phi.output_dimension(), label + ": L1");
    aux.validate(label + ": auxiliary system");
    detail::require(aux.split == pz,
                    label + ": auxiliary input split " + std::to_string(aux.split) +
                        " must equal the Z width " + std::to_string(pz));
    detail::require(aux.input_dim() - aux.split == sys.internal_output_dim(),
                    label + ": auxiliary output-mismatch width " +
                        std::to_string(aux.input_dim() - aux.split) + " must equal the C2 rows " +
                        std::to_string(sys.internal_output_dim()));
    detail::require_shape(x, aux.output_dim(), aux.output_dim(), label + ": X");
    detail::require_finite(x, label + ": X");
    detail::require((x - x.transpose()).norm() <= 1e-10 * (1.0 + x.norm()),
                    label + ": X must be symmetric");
    const Eigen::Index ltheta = aux.state_dim();
    detail::require_shape(lambda, ltheta, ltheta, label + ": Lambda");
    detail::require(std::isfinite(kappa_hat) && kappa_hat > 0.0,
                    label + ": kappa_hat must be positive");
    if (ltheta > 0) {
      detail::require((lambda - lambda.transpose()).norm() <= 1e-10 * (1.0 + lambda.norm()),
                      label + ": Lambda must be symmetric");
      Eigen::SelfAdjointEigenSolver<Matrix> es(lambda, Eigen::EigenvaluesOnly);
      detail::require(es.eigenvalues().minCoeff() > 0.0,
                      label + ": Lambda must be positive definite when the auxiliary state is nonempty");
      detail::require(std::isfinite(kappa_bar) && kappa_bar > 0.0,
                      label + ": kappa_bar must be positive when the auxiliary state is nonempty");
    }
  }

  /// Validates the blocks that tie the concrete system to the abstraction.
  void validate_pair(const JumpDiffusionSystem& sys, const JumpDiffusionSystem& abstraction,
                     const std::string& label = "certificate") const {
    validate_concrete(sys, label);
    abstraction.validate(label + ": abstraction");
    const Eigen::Index n = sys.state_dim();
    const Eigen::Index nhat = abstraction.state_dim();
    detail::require_shape(p, n, nhat, label + ": P");
    detail::require_finite(p, label + ": P");
    {
      Eigen::JacobiSVD<Matrix> svd(p);
      detail::require(detail::svd_rank(svd, p.rows(), p.cols()) == nhat,
                      label + ": P must have full column rank");
    }
    detail::require_shape(q, sys.input_dim(), nhat, label + ": Q");
    detail::require_shape(h, sys.internal_output_dim(), abstraction.internal_output_dim(),
                          label + ": H");
    detail::require_shape(w_hat, z.cols(), abstraction.internal_input_dim(), label + ": What");
    detail::require_shape(l2, sys.input_dim(), abstraction.phi.output_dimension(), label + ": L2");
  }
};

/// Scalar gains entering the dissipation inequality and the moment bound.
struct GainSummary {
  double alpha_slope = 0.0;   ///< output lower bound: alpha(r) = alpha_slope * r
  double kappa_tilde = 0.0;   ///< effective decay rate after the Young splits
  double psi_slope = 0.0;     ///< abstract-input gain: psi(r) = psi_slope * r
  double c_tilde = 0.0;       ///< diffusion and jump second-moment offset
  double c_prime = 0.0;       ///< jump-mismatch offset
  double pi = 0.0;            ///< Young split spent on the abstract input term
  double pi_prime = 0.0;      ///< Young split spent on the jump mismatch term

  double offset() const { return c_tilde + c_prime; }
};

/// Interface gain Rtilde = (B^T Mhat B)^(-1) B^T Mhat P Bhat. Requires B to
/// have full column rank so the Gram matrix is invertible.
inline Matrix compute_rtilde(const JumpDiffusionSystem& sys,
                             const JumpDiffusionSystem& abstraction,
                             const StorageCertificate& cert) {
  const Matrix gram = sys.b.transpose() * cert.m_hat * sys.b;
  Eigen::FullPivLU<Matrix> lu(gram);
  detail::require(gram.size() == 0 || lu.isInvertible(),
                  "compute_rtilde: B^T Mhat B is singular; B must have full column rank");
  return lu.solve(sys.b.transpose() * cert.m_hat * cert.p * abstraction.b);
}

/// Storage value V(x, xhat, theta) of the certificate's quadratic form.
inline double storage_value(const Vector& x, const Vector& x_hat, const Vector& theta,
                            const StorageCertificate& cert) {
  const Vector error = x - cert.p * x_hat;
  double value = error.dot(cert.m_hat * error);
  if (theta.size() > 0) value += theta.dot(cert.lambda * theta);
  return value;
}

/// Interface input fed to the concrete system:
///
///   u = K (x - P xhat) + Q xhat + Rtilde uhat + L1 phi(t, F x) - L2 phihat(t, Fhat xhat)
///
/// The interface never reads the internal input w. This overload takes a
/// precomputed Rtilde so simulation loops avoid refactorizations.
inline Vector interface_input(double t, const Vector& x, const Vector& x_hat,
                              const Vector& u_hat, const JumpDiffusionSystem& sys,
                              const JumpDiffusionSystem& abstraction,
                              const StorageCertificate& cert, const Matrix& r_tilde) {
  Vector u = cert.k * (x - cert.p * x_hat) + cert.q * x_hat + r_tilde * u_hat;
  if (sys.phi.output_dimension() > 0) u += cert.l1 * sys.phi(t, sys.f * x);
  if (abstraction.phi.output_dimension() > 0) {
    u -= cert.l2 * abstraction.phi(t, abstraction.f * x_hat);
  }
  return u;
}

inline Vector interface_input(double t, const Vector& x, const Vector& x_hat,
                              const Vector& u_hat, const JumpDiffusionSystem& sys,
                              const JumpDiffusionSystem& abstraction,
                              const StorageCertificate& cert) {
  return interface_input(t, x, x_hat, u_hat, sys, abstraction, cert,
                         compute_rtilde(sys, abstraction, cert));
}

/// Auxiliary input u_theta = [W w - What what; C2 x - H Chat2 xhat].
inline Vector auxiliary_input(const Vector& x, const Vector& x_hat, const Vector& w,
                              const Vector& w_hat_input, const JumpDiffusionSystem& sys,
                              const JumpDiffusionSystem& abstraction,
                              const StorageCertificate& cert) {
  Vector u_theta(cert.aux.input_dim());
  u_theta.head(cert.aux.split) = cert.w * w - cert.w_hat * w_hat_input;
  u_theta.tail(cert.aux.input_dim() - cert.aux.split) =
      sys.c2 * x - cert.h * (abstraction.c2 * x_hat);
  return u_theta;
}

/// Extended generator of the storage function along the paired dynamics,
/// evaluated exactly for the quadratic form (jump differences enter in closed
/// form, not linearized):
///
///   L V = 2 (x - P xhat)^T Mhat (f - P fhat)
///       + G^T Mhat G + Ghat^T P^T Mhat P Ghat
///       + 2 (x - P xhat)^T Mhat sum_i lambda_i R_i
///       + sum_i lambda_i R_i^T Mhat R_i
///       - 2 (x - P xhat)^T Mhat P sum_i lambdahat_i Rhat_i
///       + sum_i lambdahat_i Rhat_i^T P^T Mhat P Rhat_i
///       + 2 theta^T Lambda (Atheta theta + Btheta u_theta)
///
/// with f, fhat the concrete and abstract drifts at the given arguments.
inline double generator_value(double t, const Vector& x, const Vector& x_hat,
                              const Vector& theta, const Vector& u, const Vector& u_hat,
                              const Vector& w, const Vector& w_hat_input,
                              const JumpDiffusionSystem& sys,
                              const JumpDiffusionSystem& abstraction,
                              const StorageCertificate& cert) {
  const Vector error = x - cert.p * x_hat;
  Vector f = sys.a * x + sys.b * u + sys.d * w;
  if (sys.phi.output_dimension() > 0) f += sys.e * sys.phi(t, sys.f * x);
  Vector f_hat = abstraction.a * x_hat + abstraction.b * u_hat + abstraction.d * w_hat_input;
  if (abstraction.phi.output_dimension() > 0) {
    f_hat += abstraction.e * abstraction.phi(t, abstraction.f * x_hat);
  }
  double value = 2.0 * error.dot(cert.m_hat * (f - cert.p * f_hat));

  value += (sys.g.transpose() * cert.m_hat * sys.g)(0, 0);
  const Matrix p_gram = cert.p.transpose() * cert.m_hat * cert.p;
  value += (abstraction.g.transpose() * p_gram * abstraction.g)(0, 0);

  for (std::size_t i = 0; i < sys.jump_resets.size(); ++i) {
    const Vector& reset = sys.jump_resets[i];
    const double rate = sys.jump_rates[i];
    value += rate * (2.0 * error.dot(cert.m_hat * reset) + reset.dot(cert.m_hat * reset));
  }
  for (std::size_t i = 0; i < abstraction.jump_resets.size(); ++i) {
    const Vector& reset = abstraction.jump_resets[i];
    const double rate = abstraction.jump_rates[i];
    value += rate * (-2.0 * error.dot(cert.m_hat * (cert.p * reset)) +
                     reset.dot(p_gram * reset));
  }

  if (cert.aux.state_dim() > 0) {
    const Vector u_theta = auxiliary_input(x, x_hat, w, w_hat_input, sys, abstraction, cert);
    value += 2.0 * theta.dot(cert.lambda * (cert.aux.a_theta * theta + cert.aux.b_theta * u_theta));
  }
  return value;
}

/// Block inequality certifying the dissipation property. Row and column
/// blocks are sized [n, pz, lout, l_theta]; the returned matrix is the
/// left-hand side minus the right-hand side, so the certificate holds when it
/// is negative semidefinite.
inline Matrix assumption_lmi_difference(const JumpDiffusionSystem& sys,
                                        const StorageCertificate& cert) {
  const Eigen::Index n = sys.state_dim();
  const Eigen::Index pz = cert.z.cols();
  const Eigen::Index lout = sys.phi.output_dimension();
  const Eigen::Index ltheta = cert.aux.state_dim();
  const Eigen::Index total = n + pz + lout + ltheta;
  const Eigen::Index off_z = n;
  const Eigen::Index off_phi = n + pz;
  const Eigen::Index off_theta = n + pz + lout;

  const Matrix closed = sys.a + sys.b * cert.k;
  const Matrix b1 = cert.aux.b1();
  const Matrix b2 = cert.aux.b2();
  const Matrix d1 = cert.aux.d1();
  const Matrix d2 = cert.aux.d2();
  const Matrix xd1 = cert.x * d1;
  const Matrix xd2 = cert.x * d2;
  const Matrix c2t_d2t = sys.c2.transpose() * d2.transpose();

  Matrix upper = Matrix::Zero(total, total);  // strictly upper block triangle
  Matrix diag = Matrix::Zero(total, total);   // block diagonal

  // Left-hand side: generator terms.
  diag.block(0, 0, n, n) = closed.transpose() * cert.m_hat + cert.m_hat * closed;
  upper.block(0, off_z, n, pz) = cert.m_hat * cert.z;
  upper.block(0, off_phi, n, lout) = cert.m_hat * (sys.b * cert.l1 + sys.e);
  upper.block(0, off_theta, n, ltheta) = sys.c2.transpose() * b2.transpose() * cert.lambda;
  upper.block(off_z, off_theta, pz, ltheta) = b1.transpose() * cert.lambda;
  diag.block(off_theta, off_theta, ltheta, ltheta) =
      cert.aux.a_theta.transpose() * cert.lambda + cert.lambda * cert.aux.a_theta;

  // Right-hand side: decay and supply terms, subtracted.
  diag.block(0, 0, n, n) -= -cert.kappa_hat * cert.m_hat + c2t_d2t * xd2 * sys.c2 -
                            sys.f.transpose() * sys.phi.m11() * sys.f;
  upper.block(0, off_z, n, pz) -= c2t_d2t * xd1;
  upper.block(0, off_phi, n, lout) -= -sys.f.transpose() * sys.phi.m12();
  upper.block(0, off_theta, n, ltheta) -= c2t_d2t * cert.x * cert.aux.c_theta;
  diag.block(off_z, off_z, pz, pz) -= d1.transpose() * xd1;
  upper.block(off_z, off_theta, pz, ltheta) -= d1.transpose() * cert.x * cert.aux.c_theta;
  diag.block(off_phi, off_phi, lout, lout) -= -sys.phi.m22();
  diag.block(off_theta, off_theta, ltheta, ltheta) -=
      cert.aux.c_theta.transpose() * cert.x * cert.aux.c_theta - cert.kappa_bar * cert.lambda;

  return upper + upper.transpose() + diag;
}

/// Verdicts for the three certificate feasibility conditions.
struct AssumptionReport {
  SymVerdict lmi;            ///< block dissipation inequality
  SymVerdict supply_direct;  ///< D2^T X D2 negative semidefinite
  double coupling_residual = 0.0;  ///< ||D - Z W||_F
  double coupling_tolerance = 0.0;
  bool coupling_ok = false;
  bool is_satisfied = false;
};

/// Checks the certificate feasibility conditions on the concrete system: the
/// block inequality, the direct-term sign condition D2^T X D2 <= 0, and the
/// internal-input factorization D = Z W. A negative tolerance selects the
/// scale-relative default of each sub-check.
inline AssumptionReport check_assumption1(const JumpDiffusionSystem& sys,
                                          const StorageCertificate& cert,
                                          double tolerance = -1.0) {
  sys.validate();
  cert.validate_concrete(sys);
  AssumptionReport report;
  report.lmi = check_nsd(assumption_lmi_difference(sys, cert), tolerance);
  const Matrix d2 = cert.aux.d2();
  report.supply_direct = check_nsd(Matrix(d2.transpose() * cert.x * d2), tolerance);
  report.coupling_residual = (sys.d - cert.z * cert.w).norm();
  report.coupling_tolerance = (tolerance < 0.0 ? 1e-8 : tolerance) * (1.0 + sys.d.norm());
  report.coupling_ok = report.coupling_residual <= report.coupling_tolerance;
  report.is_satisfied =
      report.lmi.is_satisfied && report.supply_direct.is_satisfied && report.coupling_ok;
  return report;
}

/// One named residual of the structural matching equations.
struct StructuralResidual {
  std::string name;
  double residual = 0.0;
  double scale = 0.0;  ///< Frobenius norm of the matched quantity
  bool ok = false;
};

/// Residual report for the six structural equations tying the abstraction to
/// the concrete system through (P, Q, H, Z, What, L1, L2).
struct StructuralReport {
  std::vector<StructuralResidual> equations;
  double tolerance = 0.0;
  bool is_satisfied = false;

  const StructuralResidual& equation(const std::string& name) const {
    for (const auto& eq : equations)
      if (eq.name == name) return eq;
    throw std::invalid_argument("StructuralReport: unknown equation " + name);
  }
};

/// Evaluates the structural matching equations:
///
///   drift:               A P = P Ahat - B Q
///   output:              C1 P = Chat1
///   internal output:     C2 P = H Chat2
///   nonlinearity input:  F P = Fhat
///   nonlinearity output: E = P Ehat + B (L2 - L1)
///   internal input:      P Dhat = Z What
///
/// Each residual passes when it is at most tolerance * (1 + scale) with the
/// scale the Frobenius norm of the equation's left side.
inline StructuralReport check_structural_equations(const JumpDiffusionSystem& sys,
                                                   const JumpDiffusionSystem& abstraction,
                                                   const StorageCertificate& cert,
                                                   double tolerance = 1e-8) {
  sys.validate();
  cert.validate_pair(sys, abstraction);
  StructuralReport report;
  report.tolerance = tolerance;
  const auto add = [&](const std::string& name, const Matrix& difference, double scale) {
    StructuralResidual res;
    res.name = name;
    res.residual = difference.norm();
    res.scale = scale;
    res.ok = res.residual <= tolerance * (1.0 + scale);
    report.equations.push_back(std::move(res));
  };
  add("drift", sys.a * cert.p - cert.p * abstraction.a + sys.b * cert.q, (sys.a * cert.p).norm());
  add("output", sys.c1 * cert.p - abstraction.c1, (sys.c1 * cert.p).norm());
  add("internal_output", sys.c2 * cert.p - cert.h * abstraction.c2, (sys.c2 * cert.p).norm());
  add("nonlinearity_input", sys.f * cert.p - abstraction.f, (sys.f * cert.p).norm());
  add("nonlinearity_output", sys.e - cert.p * abstraction.e - sys.b * (cert.l2 - cert.l1),
      sys.e.norm());
  add("internal_input", cert.p * abstraction.d - cert.z * cert.w_hat,
      (cert.p * abstraction.d).norm());
  report.is_satisfied = true;
  for (const auto& eq : report.equations) report.is_satisfied = report.is_satisfied && eq.ok;
  return report;
}

/// Scalar gains of the dissipation inequality. The Young splits default to
/// pi = pi_prime = kappa_hat / 4 and must satisfy pi + pi_prime < kappa_hat.
inline GainSummary gain_summary(const JumpDiffusionSystem& sys,
                                const JumpDiffusionSystem& abstraction,
                                const StorageCertificate& cert, double pi = -1.0,
                                double pi_prime = -1.0) {
  cert.validate_pair(sys, abstraction);
  GainSummary gains;
  gains.pi = pi < 0.0 ? cert.kappa_hat / 4.0 : pi;
  gains.pi_prime = pi_prime < 0.0 ? cert.kappa_hat / 4.0 : pi_prime;
  detail::require(gains.pi > 0.0 && gains.pi_prime > 0.0,
                  "gain_summary: the Young splits pi and pi_prime must be positive");
  detail::require(gains.pi + gains.pi_prime < cert.kappa_hat,
                  "gain_summary: pi + pi_prime = " +
                      std::to_string(gains.pi + gains.pi_prime) +
                      " must stay below kappa_hat = " + std::to_string(cert.kappa_hat));

  Eigen::SelfAdjointEigenSolver<Matrix> m_eigs(cert.m_hat, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Matrix> c_eigs(Matrix(sys.c1.transpose() * sys.c1),
                                               Eigen::EigenvaluesOnly);
  const double c1_top = c_eigs.eigenvalues().maxCoeff();
  detail::require(c1_top > 0.0, "gain_summary: C1 is zero, no output error bound exists");
  gains.alpha_slope = m_eigs.eigenvalues().minCoeff() / c1_top;

  const double decay = cert.kappa_hat - gains.pi - gains.pi_prime;
  gains.kappa_tilde =
      cert.aux.state_dim() > 0 ? std::min(decay, cert.kappa_bar) : decay;
  detail::require(gains.kappa_tilde > 0.0, "gain_summary: effective decay rate must be positive");

  const Matrix input_gap = sys.b * compute_rtilde(sys, abstraction, cert) -
                           cert.p * abstraction.b;
  if (input_gap.cols() > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> gap_eigs(
        Matrix(input_gap.transpose() * cert.m_hat * input_gap), Eigen::EigenvaluesOnly);
    gains.psi_slope = gap_eigs.eigenvalues().maxCoeff() / gains.pi;
  }

  const Matrix p_gram = cert.p.transpose() * cert.m_hat * cert.p;
  gains.c_tilde = (sys.g.transpose() * cert.m_hat * sys.g)(0, 0) +
                  (abstraction.g.transpose() * p_gram * abstraction.g)(0, 0);
  for (std::size_t i = 0; i < sys.jump_resets.size(); ++i) {
    gains.c_tilde += sys.jump_rates[i] * sys.jump_resets[i].dot(cert.m_hat * sys.jump_resets[i]);
  }
  for (std::size_t i = 0; i < abstraction.jump_resets.size(); ++i) {
    gains.c_tilde += abstraction.jump_rates[i] *
                     abstraction.jump_resets[i].dot(p_gram * abstraction.jump_resets[i]);
  }
  const Vector jump_gap =
      sys.jump_rate_reset_sum() - cert.p * abstraction.jump_rate_reset_sum();
  gains.c_prime = jump_gap.dot(cert.m_hat * jump_gap) / gains.pi_prime;
  return gains;
}

/// Worst sample of a dissipation falsification run.
struct DissipationSample {
  Vector x, x_hat, theta, u_hat, w, w_hat_input;
  double generator = 0.0;
  double supply = 0.0;
  double slack = 0.0;  ///< supply - generator; negative means violated
};

/// Report of the sampled dissipation inequality check.
struct DissipationReport {
  bool is_satisfied = false;
  double worst_slack = 0.0;
  DissipationSample worst;
  int samples = 0;
  double tolerance = 0.0;
};

/// Samples the dissipation inequality
///
///   L V <= -kappa_tilde V + psi_slope ||uhat||^2 + z^T X z + c_tilde + c_prime
///
/// with z = Ctheta theta + Dtheta u_theta and u the interface input, on
/// tuples (x, xhat, theta, uhat, w, what) drawn uniformly from
/// [-box, box] per coordinate at t = 0. Passes when the worst slack is at
/// least -tolerance. Coordinates are drawn in the order x, xhat, theta, uhat,
/// w, what from the stream (seed, 0).
inline DissipationReport dissipation_check(const JumpDiffusionSystem& sys,
                                           const JumpDiffusionSystem& abstraction,
                                           const StorageCertificate& cert,
                                           const GainSummary& gains, int samples, double box,
                                           std::uint64_t seed, double tolerance = 1e-6) {
  sys.validate();
  cert.validate_pair(sys, abstraction);
  detail::require(samples > 0, "dissipation_check: sample count must be positive");
  detail::require(box > 0.0, "dissipation_check: sample box must be positive");

  const Matrix r_tilde = compute_rtilde(sys, abstraction, cert);
  RandomStream rng(seed, 0);
  const auto draw = [&](Eigen::Index dim) {
    Vector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = box * (2.0 * rng.next_uniform() - 1.0);
    return v;
  };

  DissipationReport report;
  report.samples = samples;
  report.tolerance = tolerance;
  report.worst_slack = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    DissipationSample sample;
    sample.x = draw(sys.state_dim());
    sample.x_hat = draw(abstraction.state_dim());
    sample.theta = draw(cert.aux.state_dim());
    sample.u_hat = draw(abstraction.input_dim());
    sample.w = draw(sys.internal_input_dim());
    sample.w_hat_input = draw(abstraction.internal_input_dim());

    const Vector u = interface_input(0.0, sample.x, sample.x_hat, sample.u_hat, sys,
                                     abstraction, cert, r_tilde);
    sample.generator =
        generator_value(0.0, sample.x, sample.x_hat, sample.theta, u, sample.u_hat, sample.w,
                        sample.w_hat_input, sys, abstraction, cert);
    const Vector u_theta =
        auxiliary_input(sample.x, sample.x_hat, sample.w, sample.w_hat_input, sys, abstraction,
                        cert);
    Vector supply_output = cert.aux.d_theta * u_theta;
    if (cert.aux.state_dim() > 0) supply_output += cert.aux.c_theta * sample.theta;
    sample.supply = -gains.kappa_tilde *
                        storage_value(sample.x, sample.x_hat, sample.theta, cert) +
                    gains.psi_slope * sample.u_hat.squaredNorm() +
                    supply_output.dot(cert.x * supply_output) + gains.c_tilde + gains.c_prime;
    sample.slack = sample.supply - sample.generator;
    if (sample.slack < report.worst_slack) {
      report.worst_slack = sample.slack;
      report.worst = sample;
    }
  }
  report.is_satisfied = report.worst_slack >= -tolerance;
  return report;
}

/// Result of the jump-matching design step for the abstraction.
struct JumpMatchResult {
  Vector r_hat;            ///< abstract reset direction (single channel)
  double lambda_hat = 0.0; ///< abstract jump rate
  double objective = 0.0;  ///< change in c_tilde + c_prime relative to a jump-free abstraction
};

/// Picks the abstract jump channel (Rhat, lambdahat) minimizing its
/// contribution to the offset c_tilde + c_prime. For a fixed rate the optimal
/// reset is closed-form,
///
///   Rhat(lh) = (P^T Mhat P)^(-1) g / (pi_prime + lh),   g = P^T Mhat sum_i lambda_i R_i,
///
/// and the objective -g^T (P^T Mhat P)^(-1) g * lh / (pi_prime (pi_prime + lh))
/// decreases in the rate, so the search scans the rate grid and then runs
/// `refine_rounds` local grid refinements around the best candidate. Exact
/// ties (a jump-free concrete system) resolve to the smallest candidate rate
/// and a zero reset.
inline JumpMatchResult jump_matching(const JumpDiffusionSystem& sys, const Matrix& m_hat,
                                     const Matrix& p, double pi_prime,
                                     std::vector<double> lambda_grid, int refine_rounds = 0) {
  detail::require(!lambda_grid.empty(), "jump_matching: rate grid must be nonempty");
  for (double rate : lambda_grid) {
    detail::require(std::isfinite(rate) && rate > 0.0,
                    "jump_matching: candidate rates must be positive");
  }
  detail::require(pi_prime > 0.0, "jump_matching: pi_prime must be positive");
  std::sort(lambda_grid.begin(), lambda_grid.end());

  const Matrix gram = p.transpose() * m_hat * p;
  const Vector g = p.transpose() * (m_hat * sys.jump_rate_reset_sum());
  Eigen::LLT<Matrix> llt(gram);
  detail::require(llt.info() == Eigen::Success,
                  "jump_matching: P^T Mhat P must be positive definite");
  const Vector gram_inv_g = llt.solve(g);
  const double strength = g.dot(gram_inv_g);

  const auto objective_at = [&](double rate) {
    return -strength * rate / (pi_prime * (pi_prime + rate));
  };

  JumpMatchResult best;
  best.lambda_hat = lambda_grid.front();
  best.objective = objective_at(best.lambda_hat);
  for (double rate : lambda_grid) {
    if (objective_at(rate) < best.objective - 1e-15 * std::abs(best.objective)) {
      best.lambda_hat = rate;
      best.objective = objective_at(rate);
    }
  }
  std::vector<double> grid = lambda_grid;
  for (int round = 0; round < refine_rounds; ++round) {
    // Refine between the grid neighbors of the current best rate.
    double lo = grid.front(), hi = grid.back();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (grid[i] == best.lambda_hat) {
        lo = i > 0 ? grid[i - 1] : grid[i];
        hi = i + 1 < grid.size() ? grid[i + 1] : grid[i];
        break;
      }
    }
    if (hi <= lo) break;
    const std::size_t count = std::max<std::size_t>(grid.size(), 3);
    std::vector<double> refined(count);
    for (std::size_t i = 0; i < count; ++i) {
      refined[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    for (double rate : refined) {
      if (objective_at(rate) < best.objective - 1e-15 * std::abs(best.objective)) {
        best.lambda_hat = rate;
        best.objective = objective_at(rate);
      }
    }
    grid = std::move(refined);
  }
  best.r_hat = gram_inv_g / (pi_prime + best.lambda_hat);
  if (strength == 0.0) {
    best.lambda_hat = lambda_grid.front();
    best.objective = 0.0;
    best.r_hat = Vector::Zero(p.cols());
  }
  return best;
}

}  // namespace dissim
