#pragma once

#include <dissim/abstraction.hpp>
#include <dissim/parallel.hpp>
#include <dissim/simulate.hpp>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace dissim {

/// Block-diagonal stack of a list of matrices. Zero-sized blocks still
/// advance the corresponding offset, so heterogeneous lists (including
/// 0 x k or k x 0 blocks) compose correctly. An empty list gives 0 x 0.
inline Matrix block_diagonal(const std::vector<Matrix>& blocks) {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  for (const Matrix& block : blocks) {
    rows += block.rows();
    cols += block.cols();
  }
  Matrix out = Matrix::Zero(rows, cols);
  Eigen::Index r = 0;
  Eigen::Index c = 0;
  for (const Matrix& block : blocks) {
    out.block(r, c, block.rows(), block.cols()) = block;
    r += block.rows();
    c += block.cols();
  }
  return out;
}

/// Vertical stack of matrices sharing a column count.
inline Matrix vertical_stack(const std::vector<Matrix>& blocks) {
  detail::require(!blocks.empty(), "vertical_stack: empty list");
  Eigen::Index rows = 0;
  for (const Matrix& block : blocks) {
    detail::require(block.cols() == blocks.front().cols(),
                    "vertical_stack: column counts differ");
    rows += block.rows();
  }
  Matrix out(rows, blocks.front().cols());
  Eigen::Index r = 0;
  for (const Matrix& block : blocks) {
    out.middleRows(r, block.rows()) = block;
    r += block.rows();
  }
  return out;
}

namespace detail {

inline std::vector<Eigen::Index> offsets_of(const std::vector<Eigen::Index>& widths) {
  std::vector<Eigen::Index> offs(widths.size() + 1, 0);
  for (std::size_t i = 0; i < widths.size(); ++i) {
    offs[i + 1] = offs[i] + widths[i];
  }
  return offs;
}

/// Common jump-rate vector of a list of systems; throws when any two systems
/// disagree in channel count or rate, since merged channels share one
/// counting process.
inline std::vector<double> shared_jump_rates(const std::vector<JumpDiffusionSystem>& parts,
                                             const std::string& label) {
  const std::vector<double>& rates = parts.front().jump_rates;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    require(parts[i].jump_rates.size() == rates.size(),
            label + ": subsystem " + std::to_string(i) + " declares " +
                std::to_string(parts[i].jump_rates.size()) + " jump channels, expected " +
                std::to_string(rates.size()) + "; merged channels share one counting process");
    for (std::size_t j = 0; j < rates.size(); ++j) {
      require(parts[i].jump_rates[j] == rates[j],
              label + ": jump rate of channel " + std::to_string(j) + " differs at subsystem " +
                  std::to_string(i) + "; merged channels share one counting process");
    }
  }
  return rates;
}

/// Stacks the nonlinearities of the parts into one block map of the same
/// kind. Parts without a nonlinearity contribute nothing; the remaining
/// parts must agree in kind (and, for table maps, in the table itself).
inline Nonlinearity compose_nonlinearity(const std::vector<JumpDiffusionSystem>& parts) {
  std::vector<const Nonlinearity*> active;
  Eigen::Index in_total = 0;
  Eigen::Index out_total = 0;
  for (const JumpDiffusionSystem& part : parts) {
    in_total += part.phi.input_dimension();
    out_total += part.phi.output_dimension();
    if (part.phi.input_dimension() > 0 || part.phi.output_dimension() > 0) {
      active.push_back(&part.phi);
    }
  }
  if (active.empty()) {
    return Nonlinearity::none();
  }
  const Nonlinearity::Kind kind = active.front()->kind();
  std::vector<Matrix> m11;
  std::vector<Matrix> m12;
  std::vector<Matrix> m22;
  for (const Nonlinearity* phi : active) {
    require(phi->kind() == kind, "compose: nonlinearity kinds differ between subsystems");
    m11.push_back(phi->m11());
    m12.push_back(phi->m12());
    m22.push_back(phi->m22());
  }
  const Matrix b11 = block_diagonal(m11);
  const Matrix b12 = block_diagonal(m12);
  const Matrix b22 = block_diagonal(m22);
  switch (kind) {
    case Nonlinearity::Kind::zero:
      return Nonlinearity::zero(in_total, out_total, b11, b12, b22);
    case Nonlinearity::Kind::sine_sum:
      return Nonlinearity::sine_sum(in_total, b11, b12, b22);
    case Nonlinearity::Kind::table: {
      for (const Nonlinearity* phi : active) {
        require(phi->table_breakpoints() == active.front()->table_breakpoints() &&
                    phi->table_values() == active.front()->table_values(),
                "compose: table nonlinearities must share one table");
      }
      return Nonlinearity::table(in_total, active.front()->table_breakpoints(),
                                 active.front()->table_values(), b11, b12, b22);
    }
  }
  throw std::logic_error("compose: unhandled nonlinearity kind");
}

}  // namespace detail

/// Closes a list of subsystems under the static coupling w = coupling * h,
/// where h stacks the internal outputs. The result has no internal ports:
/// its drift matrix is blkdiag(A_i) + blkdiag(D_i) * coupling * blkdiag(C2_i)
/// and inputs, outputs, and nonlinearities stack block-wise. The diffusion
/// columns stack vertically (one shared Wiener process) and jump channels
/// merge channel-wise (one shared counting process per channel), which
/// requires every subsystem to declare the same channel rates.
inline JumpDiffusionSystem compose(const std::vector<JumpDiffusionSystem>& parts,
                                   const Matrix& coupling) {
  detail::require(!parts.empty(), "compose: no subsystems");
  Eigen::Index p_total = 0;
  Eigen::Index q2_total = 0;
  Eigen::Index n_total = 0;
  std::vector<Matrix> a, b, c1, c2, d, e, f, g;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    parts[i].validate("compose: subsystem " + std::to_string(i));
    p_total += parts[i].internal_input_dim();
    q2_total += parts[i].internal_output_dim();
    n_total += parts[i].state_dim();
    a.push_back(parts[i].a);
    b.push_back(parts[i].b);
    c1.push_back(parts[i].c1);
    c2.push_back(parts[i].c2);
    d.push_back(parts[i].d);
    e.push_back(parts[i].e);
    f.push_back(parts[i].f);
    g.push_back(parts[i].g);
  }
  detail::require_shape(coupling, p_total, q2_total, "compose: coupling");

  JumpDiffusionSystem net;
  net.a = block_diagonal(a) + block_diagonal(d) * coupling * block_diagonal(c2);
  net.b = block_diagonal(b);
  net.c1 = block_diagonal(c1);
  net.c2 = Matrix::Zero(0, n_total);
  net.d = Matrix::Zero(n_total, 0);
  net.e = block_diagonal(e);
  net.f = block_diagonal(f);
  net.g = vertical_stack(g);
  net.phi = detail::compose_nonlinearity(parts);

  const std::vector<double> rates = detail::shared_jump_rates(parts, "compose");
  for (std::size_t j = 0; j < rates.size(); ++j) {
    Vector reset(n_total);
    Eigen::Index r = 0;
    for (const JumpDiffusionSystem& part : parts) {
      reset.segment(r, part.state_dim()) = part.jump_resets[j];
      r += part.state_dim();
    }
    net.jump_resets.push_back(reset);
    net.jump_rates.push_back(rates[j]);
  }
  net.validate("compose: result");
  return net;
}

/// Permutation that reorders the type-grouped mismatch vector
/// [all coupling rows; all output rows] into the per-subsystem interleaving
/// [rows_1; outputs_1; rows_2; outputs_2; ...] expected by the stacked
/// auxiliary inputs. w_widths[i] and h_widths[i] are the two row counts of
/// subsystem i. The result is orthogonal.
inline Matrix build_permutation_S(const std::vector<Eigen::Index>& w_widths,
                                  const std::vector<Eigen::Index>& h_widths) {
  detail::require(w_widths.size() == h_widths.size(),
                  "build_permutation_S: width lists differ in length");
  Eigen::Index w_total = 0;
  Eigen::Index h_total = 0;
  for (std::size_t i = 0; i < w_widths.size(); ++i) {
    detail::require(w_widths[i] >= 0 && h_widths[i] >= 0,
                    "build_permutation_S: negative width");
    w_total += w_widths[i];
    h_total += h_widths[i];
  }
  Matrix s = Matrix::Zero(w_total + h_total, w_total + h_total);
  Eigen::Index row = 0;
  Eigen::Index w_off = 0;
  Eigen::Index h_off = 0;
  for (std::size_t i = 0; i < w_widths.size(); ++i) {
    for (Eigen::Index k = 0; k < w_widths[i]; ++k) {
      s(row++, w_off + k) = 1.0;
    }
    for (Eigen::Index k = 0; k < h_widths[i]; ++k) {
      s(row++, w_total + h_off + k) = 1.0;
    }
    w_off += w_widths[i];
    h_off += h_widths[i];
  }
  return s;
}

/// A network of concrete subsystems, their abstractions, and the paired
/// certificates, coupled by w = coupling * h on the concrete side and
/// what = abstract_coupling * hhat on the abstract side. mu holds the
/// positive composition weights; q_tilde is a symmetric PSD weight on the
/// stacked auxiliary state that sharpens the dissipation budget.
struct Interconnection {
  std::vector<JumpDiffusionSystem> subsystems;
  std::vector<JumpDiffusionSystem> abstractions;
  std::vector<StorageCertificate> certificates;
  Matrix coupling;
  Matrix abstract_coupling;
  std::vector<double> mu;
  Matrix q_tilde;

  std::size_t count() const { return subsystems.size(); }

  void validate() const {
    detail::require(!subsystems.empty(), "interconnection: no subsystems");
    detail::require(abstractions.size() == subsystems.size() &&
                        certificates.size() == subsystems.size() &&
                        mu.size() == subsystems.size(),
                    "interconnection: subsystem, abstraction, certificate, and mu "
                    "lists must have equal length");
    Eigen::Index p_total = 0;
    Eigen::Index q2_total = 0;
    Eigen::Index p_hat_total = 0;
    Eigen::Index q2_hat_total = 0;
    Eigen::Index theta_total = 0;
    for (std::size_t i = 0; i < subsystems.size(); ++i) {
      const std::string label = "interconnection: subsystem " + std::to_string(i);
      certificates[i].validate_pair(subsystems[i], abstractions[i], label);
      detail::require(std::isfinite(mu[i]) && mu[i] > 0.0,
                      label + ": mu must be positive");
      p_total += subsystems[i].internal_input_dim();
      q2_total += subsystems[i].internal_output_dim();
      p_hat_total += abstractions[i].internal_input_dim();
      q2_hat_total += abstractions[i].internal_output_dim();
      theta_total += certificates[i].aux.state_dim();
    }
    detail::require_shape(coupling, p_total, q2_total, "interconnection: coupling");
    detail::require_shape(abstract_coupling, p_hat_total, q2_hat_total,
                          "interconnection: abstract coupling");
    detail::require_shape(q_tilde, theta_total, theta_total, "interconnection: q_tilde");
    detail::require_finite(q_tilde, "interconnection: q_tilde");
  }
};

namespace detail {

struct NetworkBlocks {
  Matrix w_d;      // blkdiag of the certificate W maps
  Matrix w_hat_d;  // blkdiag of the certificate What maps
  Matrix h_d;      // blkdiag of the certificate H maps
  Matrix s;        // interleaving permutation
  Matrix u;        // S * [W_D * coupling; I]
};

inline NetworkBlocks network_blocks(const Interconnection& net) {
  std::vector<Matrix> w, w_hat, h;
  std::vector<Eigen::Index> w_rows, h_rows;
  for (std::size_t i = 0; i < net.count(); ++i) {
    w.push_back(net.certificates[i].w);
    w_hat.push_back(net.certificates[i].w_hat);
    h.push_back(net.certificates[i].h);
    w_rows.push_back(net.certificates[i].w.rows());
    h_rows.push_back(net.subsystems[i].internal_output_dim());
  }
  NetworkBlocks blocks;
  blocks.w_d = block_diagonal(w);
  blocks.w_hat_d = block_diagonal(w_hat);
  blocks.h_d = block_diagonal(h);
  blocks.s = build_permutation_S(w_rows, h_rows);
  const Matrix wm = blocks.w_d * net.coupling;
  Matrix stacked(wm.rows() + wm.cols(), wm.cols());
  stacked.topRows(wm.rows()) = wm;
  stacked.bottomRows(wm.cols()) = Matrix::Identity(wm.cols(), wm.cols());
  blocks.u = blocks.s * stacked;
  return blocks;
}

}  // namespace detail

/// Verdict on the network-level dissipation inequality: the quadratic form
/// coupling the stacked auxiliary state and the stacked internal-output
/// mismatch must be negative semidefinite, and the auxiliary weight must be
/// positive semidefinite.
struct InterconnectionReport {
  SymVerdict lmi;
  SymVerdict weight;
  bool is_satisfied = false;
};

/// Assembles and checks the network compatibility inequality. With the
/// stacked auxiliary dynamics (A_D, B_D, C_D, D_D), the weighted supply
/// blkdiag(mu_i X_i), and U mapping the stacked output mismatch to the
/// stacked auxiliary inputs, the matrix
///
///   [[A_D' Qt + Qt A_D, Qt B_D U], [U' B_D' Qt, 0]]
///     + [C_D, D_D U]' blkdiag(mu_i X_i) [C_D, D_D U]
///
/// must be negative semidefinite and Qt positive semidefinite.
/// Assembles the network compatibility matrix checked by
/// check_interconnection_lmi, sized (stacked auxiliary state) + (stacked
/// internal-output mismatch). Exposed so callers can inspect its structure;
/// for purely static auxiliary maps it reduces to the weighted quadratic form
/// of the coupling matrices alone.
inline Matrix interconnection_lmi_matrix(const Interconnection& net) {
  net.validate();
  std::vector<Matrix> a_th, b_th, c_th, d_th, x_mu;
  for (std::size_t i = 0; i < net.count(); ++i) {
    const AuxiliarySystem& aux = net.certificates[i].aux;
    a_th.push_back(aux.a_theta);
    b_th.push_back(aux.b_theta);
    c_th.push_back(aux.c_theta);
    d_th.push_back(aux.d_theta);
    x_mu.push_back(net.mu[i] * net.certificates[i].x);
  }
  const Matrix a_d = block_diagonal(a_th);
  const Matrix b_d = block_diagonal(b_th);
  const Matrix c_d = block_diagonal(c_th);
  const Matrix d_d = block_diagonal(d_th);
  const Matrix x_d = block_diagonal(x_mu);
  const detail::NetworkBlocks blocks = detail::network_blocks(net);

  const Eigen::Index l = a_d.rows();
  const Eigen::Index mismatch = blocks.u.cols();
  Matrix t = Matrix::Zero(l + mismatch, l + mismatch);
  const Matrix qt = 0.5 * (net.q_tilde + net.q_tilde.transpose());
  t.topLeftCorner(l, l) = a_d.transpose() * qt + qt * a_d;
  const Matrix cross = qt * b_d * blocks.u;
  t.topRightCorner(l, mismatch) = cross;
  t.bottomLeftCorner(mismatch, l) = cross.transpose();
  Matrix cdu(c_d.rows(), l + mismatch);
  cdu.leftCols(l) = c_d;
  cdu.rightCols(mismatch) = d_d * blocks.u;
  t += cdu.transpose() * x_d * cdu;
  return t;
}

inline InterconnectionReport check_interconnection_lmi(const Interconnection& net,
                                                       double tolerance = -1.0) {
  InterconnectionReport report;
  report.lmi = check_nsd(interconnection_lmi_matrix(net), tolerance);
  report.weight = check_psd(net.q_tilde, tolerance);
  report.is_satisfied = report.lmi.is_satisfied && report.weight.is_satisfied;
  return report;
}

/// Residual of the coupling compatibility equation
/// blkdiag(W_i) * coupling * blkdiag(H_i) = blkdiag(What_i) * abstract_coupling.
struct MatchingReport {
  double residual = 0.0;
  double tolerance = 0.0;
  bool is_satisfied = false;
};

inline MatchingReport check_matching_condition(const Interconnection& net,
                                               double tolerance = 1e-8) {
  net.validate();
  const detail::NetworkBlocks blocks = detail::network_blocks(net);
  const Matrix target = blocks.w_d * net.coupling * blocks.h_d;
  MatchingReport report;
  report.residual = (target - blocks.w_hat_d * net.abstract_coupling).norm();
  report.tolerance = tolerance * (1.0 + target.norm());
  report.is_satisfied = report.residual <= report.tolerance;
  return report;
}

/// Least-squares construction of the abstract coupling from the concrete
/// one: the minimum-norm solution Mhat of
/// blkdiag(What_i) * Mhat = blkdiag(W_i) * coupling * blkdiag(H_i).
struct CouplingSolve {
  Matrix abstract_coupling;
  double residual = 0.0;
  bool feasible = false;
};

inline CouplingSolve solve_abstract_coupling(const Interconnection& net,
                                             double tolerance = 1e-8) {
  std::vector<Matrix> w, w_hat, h;
  for (std::size_t i = 0; i < net.count(); ++i) {
    w.push_back(net.certificates[i].w);
    w_hat.push_back(net.certificates[i].w_hat);
    h.push_back(net.certificates[i].h);
  }
  const Matrix target = block_diagonal(w) * net.coupling * block_diagonal(h);
  const FactorResult solve = image_factor(target, block_diagonal(w_hat), tolerance);
  CouplingSolve result;
  result.abstract_coupling = solve.factor;
  result.residual = solve.residual;
  result.feasible = solve.feasible;
  return result;
}

/// Gains of the weighted composition of per-subsystem certificates: the
/// slowest decay rate, the smallest weighted output lower bound, the
/// Euclidean norm of the weighted input gains, and the weighted sums of the
/// offsets.
inline GainSummary composite_gains(const std::vector<GainSummary>& gains,
                                   const std::vector<double>& mu) {
  detail::require(!gains.empty(), "composite_gains: empty list");
  detail::require(gains.size() == mu.size(), "composite_gains: weight count mismatch");
  GainSummary net;
  net.kappa_tilde = gains.front().kappa_tilde;
  net.alpha_slope = mu.front() * gains.front().alpha_slope;
  net.pi = gains.front().pi;
  net.pi_prime = gains.front().pi_prime;
  net.psi_slope = 0.0;
  net.c_tilde = 0.0;
  net.c_prime = 0.0;
  double psi_sq = 0.0;
  for (std::size_t i = 0; i < gains.size(); ++i) {
    detail::require(std::isfinite(mu[i]) && mu[i] > 0.0,
                    "composite_gains: mu must be positive");
    net.kappa_tilde = std::min(net.kappa_tilde, gains[i].kappa_tilde);
    net.alpha_slope = std::min(net.alpha_slope, mu[i] * gains[i].alpha_slope);
    net.pi = std::min(net.pi, gains[i].pi);
    net.pi_prime = std::min(net.pi_prime, gains[i].pi_prime);
    psi_sq += mu[i] * gains[i].psi_slope * mu[i] * gains[i].psi_slope;
    net.c_tilde += mu[i] * gains[i].c_tilde;
    net.c_prime += mu[i] * gains[i].c_prime;
  }
  net.psi_slope = std::sqrt(psi_sq);
  return net;
}

/// Per-subsystem certificate gains of an interconnection.
inline std::vector<GainSummary> subsystem_gains(const Interconnection& net, double pi = -1.0,
                                                double pi_prime = -1.0) {
  std::vector<GainSummary> gains;
  gains.reserve(net.count());
  for (std::size_t i = 0; i < net.count(); ++i) {
    gains.push_back(gain_summary(net.subsystems[i], net.abstractions[i], net.certificates[i],
                                 pi, pi_prime));
  }
  return gains;
}

/// Network-level gains of an interconnection.
inline GainSummary network_gains(const Interconnection& net, double pi = -1.0,
                                 double pi_prime = -1.0) {
  return composite_gains(subsystem_gains(net, pi, pi_prime), net.mu);
}

/// Composite storage value sum_i mu_i V_i + theta' Qt theta at stacked
/// coordinates.
inline double network_storage_value(const Interconnection& net, const Vector& x,
                                    const Vector& x_hat, const Vector& theta) {
  double value = 0.0;
  Eigen::Index xo = 0;
  Eigen::Index ho = 0;
  Eigen::Index to = 0;
  for (std::size_t i = 0; i < net.count(); ++i) {
    const Eigen::Index n = net.subsystems[i].state_dim();
    const Eigen::Index n_hat = net.abstractions[i].state_dim();
    const Eigen::Index l = net.certificates[i].aux.state_dim();
    detail::require(xo + n <= x.size() && ho + n_hat <= x_hat.size() && to + l <= theta.size(),
                    "network_storage_value: stacked coordinates too short");
    value += net.mu[i] * storage_value(x.segment(xo, n), x_hat.segment(ho, n_hat),
                                       theta.segment(to, l), net.certificates[i]);
    xo += n;
    ho += n_hat;
    to += l;
  }
  detail::require(xo == x.size() && ho == x_hat.size() && to == theta.size(),
                  "network_storage_value: stacked coordinates too long");
  const Matrix qt = 0.5 * (net.q_tilde + net.q_tilde.transpose());
  value += theta.dot(qt * theta);
  return value;
}

/// Inputs of the closed-form moment error bound.
struct ErrorBoundParams {
  double kappa_tilde = 0.0;  ///< composite decay rate
  double alpha_slope = 0.0;  ///< composite output lower-bound slope
  double psi_slope = 0.0;    ///< composite abstract-input gain
  double offset = 0.0;       ///< composite noise and jump offset
  double v0 = 0.0;           ///< composite storage value at time zero
  double uhat_sup_sq = 0.0;  ///< sup over the horizon of ||uhat(t)||^2
};

/// Second-moment error bound at time t:
/// (exp(-kt t) v0 + (1 - exp(-kt t)) (psi uhat_sup^2 + offset) / kt) / alpha.
inline double error_bound(const ErrorBoundParams& params, double t) {
  detail::require(t >= 0.0, "error_bound: negative time");
  detail::require(params.kappa_tilde > 0.0, "error_bound: decay rate must be positive");
  detail::require(params.alpha_slope > 0.0, "error_bound: output bound slope must be positive");
  const double decay = std::exp(-params.kappa_tilde * t);
  const double plateau = (params.psi_slope * params.uhat_sup_sq + params.offset) /
                         params.kappa_tilde;
  return (decay * params.v0 + (1.0 - decay) * plateau) / params.alpha_slope;
}

/// Largest squared norm of the stacked signal over the uniform grid
/// {0, dt, ..., step_count * dt}.
inline double input_sup_norm_sq(const std::vector<InputSignal>& parts, double horizon,
                                double dt) {
  detail::require(!parts.empty(), "input_sup_norm_sq: empty signal list");
  const long steps = step_count(horizon, dt);
  double sup = 0.0;
  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    double sq = 0.0;
    for (const InputSignal& part : parts) {
      sq += part(t).squaredNorm();
    }
    sup = std::max(sup, sq);
  }
  return sup;
}

/// Options of a paired Monte Carlo co-simulation run.
struct CoSimulationOptions {
  double horizon = 1.0;
  double dt = 1e-3;
  int trials = 100;
  std::uint64_t seed = 0;
  /// Drive the abstract side with the same Wiener and Poisson draws as the
  /// concrete side instead of independent ones. Requires the abstract jump
  /// channels (if any) to match the concrete ones exactly.
  bool shared_noise = false;
};

/// Result of a paired co-simulation: the empirical mean squared output error
/// across trials on the time grid, its standard error, and the theoretical
/// bound on the same grid.
struct MonteCarloResult {
  std::vector<double> times;
  std::vector<double> mean_sq_error;
  std::vector<double> stderr_mean;
  std::vector<double> bound;
  ErrorBoundParams params;
  int trials_requested = 0;
  int trials_used = 0;
  int discarded = 0;
  bool bound_satisfied = false;  ///< mean - 3 stderr <= bound at every grid point
  bool discard_ok = false;       ///< at most 1 percent of trials discarded
  bool is_satisfied = false;
  std::vector<std::string> warnings;
};

/// Runs `trials` paired co-simulations of the interconnected concrete
/// network against the interconnected abstract network under the interface
/// maps, and compares the empirical mean squared output error with the
/// closed-form bound. Trial k draws the concrete path from stream 2k and the
/// abstract path from stream 2k + 1 (or reuses the concrete draws when
/// shared_noise is set). Trials that leave the finite range are discarded;
/// more than one percent discarded marks the run as failed. The reduction
/// over trials is ordered by trial index, so results do not depend on the
/// thread budget.
inline MonteCarloResult monte_carlo_error(const Interconnection& net,
                                          const std::vector<InputSignal>& uhat_parts,
                                          const Vector& x0, const Vector& xhat0,
                                          const Vector& theta0,
                                          const CoSimulationOptions& options) {
  net.validate();
  const std::size_t count = net.count();
  detail::require(uhat_parts.size() == count,
                  "monte_carlo_error: need one abstract input signal per subsystem");
  detail::require(options.horizon > 0.0 && std::isfinite(options.horizon),
                  "monte_carlo_error: horizon must be positive");
  detail::require(options.dt > 0.0 && std::isfinite(options.dt),
                  "monte_carlo_error: dt must be positive");
  detail::require(options.trials >= 1, "monte_carlo_error: need at least one trial");

  std::vector<Eigen::Index> n_w(count), nh_w(count), th_w(count);
  for (std::size_t i = 0; i < count; ++i) {
    n_w[i] = net.subsystems[i].state_dim();
    nh_w[i] = net.abstractions[i].state_dim();
    th_w[i] = net.certificates[i].aux.state_dim();
    detail::require(uhat_parts[i].dimension() == net.abstractions[i].input_dim(),
                    "monte_carlo_error: abstract input signal " + std::to_string(i) +
                        " has dimension " + std::to_string(uhat_parts[i].dimension()) +
                        ", expected " + std::to_string(net.abstractions[i].input_dim()));
    detail::require(net.abstractions[i].output_dim() == net.subsystems[i].output_dim(),
                    "monte_carlo_error: output dimensions of subsystem " + std::to_string(i) +
                        " and its abstraction differ");
  }
  const std::vector<Eigen::Index> n_off = detail::offsets_of(n_w);
  const std::vector<Eigen::Index> nh_off = detail::offsets_of(nh_w);
  const std::vector<Eigen::Index> th_off = detail::offsets_of(th_w);
  detail::require(x0.size() == n_off.back(), "monte_carlo_error: x0 has length " +
                                                 std::to_string(x0.size()) + ", expected " +
                                                 std::to_string(n_off.back()));
  detail::require(xhat0.size() == nh_off.back(), "monte_carlo_error: xhat0 has length " +
                                                     std::to_string(xhat0.size()) +
                                                     ", expected " +
                                                     std::to_string(nh_off.back()));
  detail::require(theta0.size() == th_off.back(), "monte_carlo_error: theta0 has length " +
                                                      std::to_string(theta0.size()) +
                                                      ", expected " +
                                                      std::to_string(th_off.back()));

  std::vector<Matrix> r_tilde(count);
  for (std::size_t i = 0; i < count; ++i) {
    r_tilde[i] = compute_rtilde(net.subsystems[i], net.abstractions[i], net.certificates[i]);
  }
  const std::vector<double> rates =
      detail::shared_jump_rates(net.subsystems, "monte_carlo_error");
  const std::vector<double> rates_hat =
      detail::shared_jump_rates(net.abstractions, "monte_carlo_error (abstract)");
  if (options.shared_noise && !rates_hat.empty()) {
    detail::require(rates_hat == rates,
                    "monte_carlo_error: shared noise requires the abstract jump channels "
                    "to match the concrete ones");
  }

  MonteCarloResult result;
  result.trials_requested = options.trials;
  const long steps = step_count(options.horizon, options.dt);
  const double dt = options.dt;
  for (const double rate : rates) {
    if (rate * dt >= 0.1) {
      result.warnings.push_back("jump rate " + std::to_string(rate) +
                                " is coarse for step size " + std::to_string(dt) +
                                "; at most one jump per channel per step is drawn");
    }
  }

  result.times.resize(static_cast<std::size_t>(steps) + 1);
  for (long k = 0; k <= steps; ++k) {
    result.times[static_cast<std::size_t>(k)] = static_cast<double>(k) * dt;
  }

  // Bound curve.
  const GainSummary gains = network_gains(net);
  result.params.kappa_tilde = gains.kappa_tilde;
  result.params.alpha_slope = gains.alpha_slope;
  result.params.psi_slope = gains.psi_slope;
  result.params.offset = gains.offset();
  result.params.v0 = network_storage_value(net, x0, xhat0, theta0);
  result.params.uhat_sup_sq = input_sup_norm_sq(uhat_parts, options.horizon, options.dt);
  result.bound.resize(result.times.size());
  for (std::size_t k = 0; k < result.times.size(); ++k) {
    result.bound[k] = error_bound(result.params, result.times[k]);
  }

  // Per-trial squared-error curves, filled independently and reduced in
  // trial order below.
  Matrix curves = Matrix::Zero(static_cast<Eigen::Index>(steps) + 1, options.trials);
  std::vector<char> kept(static_cast<std::size_t>(options.trials), 0);
  const double sqrt_dt = std::sqrt(dt);

  const auto run_trials = [&](long first, long last) {
    for (long trial = first; trial < last; ++trial) {
      RandomStream concrete(options.seed, 2 * static_cast<std::uint64_t>(trial));
      RandomStream abstract_stream(options.seed, 2 * static_cast<std::uint64_t>(trial) + 1);
      Vector x = x0;
      Vector xh = xhat0;
      Vector th = theta0;
      bool finite = true;

      const auto record = [&](long k) {
        double err = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
          const Vector zeta = net.subsystems[i].c1 * x.segment(n_off[i], n_w[i]);
          const Vector zeta_hat = net.abstractions[i].c1 * xh.segment(nh_off[i], nh_w[i]);
          err += (zeta - zeta_hat).squaredNorm();
        }
        curves(k, trial) = err;
      };
      record(0);

      Vector h(net.coupling.cols());
      Vector hh(net.abstract_coupling.cols());
      Vector dx(x.size());
      Vector dxh(xh.size());
      Vector dth(th.size());
      std::vector<double> counts(rates.size(), 0.0);
      for (long k = 0; k < steps && finite; ++k) {
        const double t = static_cast<double>(k) * dt;
        Eigen::Index ho = 0;
        Eigen::Index hho = 0;
        for (std::size_t i = 0; i < count; ++i) {
          const JumpDiffusionSystem& sys = net.subsystems[i];
          const JumpDiffusionSystem& abs = net.abstractions[i];
          h.segment(ho, sys.internal_output_dim()) = sys.c2 * x.segment(n_off[i], n_w[i]);
          hh.segment(hho, abs.internal_output_dim()) = abs.c2 * xh.segment(nh_off[i], nh_w[i]);
          ho += sys.internal_output_dim();
          hho += abs.internal_output_dim();
        }
        const Vector w = net.coupling * h;
        const Vector wh = net.abstract_coupling * hh;

        Eigen::Index wo = 0;
        Eigen::Index who = 0;
        for (std::size_t i = 0; i < count; ++i) {
          const JumpDiffusionSystem& sys = net.subsystems[i];
          const JumpDiffusionSystem& abs = net.abstractions[i];
          const StorageCertificate& cert = net.certificates[i];
          const Vector xi = x.segment(n_off[i], n_w[i]);
          const Vector xhi = xh.segment(nh_off[i], nh_w[i]);
          const Vector wi = w.segment(wo, sys.internal_input_dim());
          const Vector whi = wh.segment(who, abs.internal_input_dim());
          const Vector uhi = uhat_parts[i](t);
          const Vector ui = interface_input(t, xi, xhi, uhi, sys, abs, cert, r_tilde[i]);
          dx.segment(n_off[i], n_w[i]) = drift(sys, t, xi, ui, wi);
          dxh.segment(nh_off[i], nh_w[i]) = drift(abs, t, xhi, uhi, whi);
          if (cert.aux.state_dim() > 0) {
            const Vector u_theta = auxiliary_input(xi, xhi, wi, whi, sys, abs, cert);
            dth.segment(th_off[i], th_w[i]) =
                cert.aux.a_theta * th.segment(th_off[i], th_w[i]) + cert.aux.b_theta * u_theta;
          }
          wo += sys.internal_input_dim();
          who += abs.internal_input_dim();
        }

        const double z = concrete.next_normal();
        x += dx * dt;
        for (std::size_t i = 0; i < count; ++i) {
          x.segment(n_off[i], n_w[i]) += net.subsystems[i].g.col(0) * (sqrt_dt * z);
        }
        for (std::size_t j = 0; j < rates.size(); ++j) {
          counts[j] = static_cast<double>(concrete.next_poisson(rates[j] * dt));
          if (counts[j] != 0.0) {
            for (std::size_t i = 0; i < count; ++i) {
              x.segment(n_off[i], n_w[i]) += net.subsystems[i].jump_resets[j] * counts[j];
            }
          }
        }

        const double zh = options.shared_noise ? z : abstract_stream.next_normal();
        xh += dxh * dt;
        for (std::size_t i = 0; i < count; ++i) {
          xh.segment(nh_off[i], nh_w[i]) += net.abstractions[i].g.col(0) * (sqrt_dt * zh);
        }
        for (std::size_t j = 0; j < rates_hat.size(); ++j) {
          // Shared mode replays the concrete counting processes, which the
          // rate check above guarantees to match channel-for-channel.
          const double jumps =
              options.shared_noise
                  ? counts[j]
                  : static_cast<double>(abstract_stream.next_poisson(rates_hat[j] * dt));
          if (jumps != 0.0) {
            for (std::size_t i = 0; i < count; ++i) {
              xh.segment(nh_off[i], nh_w[i]) += net.abstractions[i].jump_resets[j] * jumps;
            }
          }
        }
        if (th.size() > 0) {
          th += dth * dt;
        }

        finite = x.allFinite() && xh.allFinite() && (th.size() == 0 || th.allFinite());
        if (finite) {
          record(k + 1);
        }
      }
      kept[static_cast<std::size_t>(trial)] = finite ? 1 : 0;
    }
  };
  parallel_for_ranges(options.trials, run_trials);

  // Ordered reduction.
  const std::size_t points = result.times.size();
  std::vector<double> sum(points, 0.0);
  std::vector<double> sum_sq(points, 0.0);
  for (int trial = 0; trial < options.trials; ++trial) {
    if (!kept[static_cast<std::size_t>(trial)]) {
      ++result.discarded;
      continue;
    }
    ++result.trials_used;
    for (std::size_t k = 0; k < points; ++k) {
      const double v = curves(static_cast<Eigen::Index>(k), trial);
      sum[k] += v;
      sum_sq[k] += v * v;
    }
  }
  detail::require(result.trials_used >= 1, "monte_carlo_error: every trial diverged");
  result.mean_sq_error.resize(points);
  result.stderr_mean.resize(points);
  const double used = static_cast<double>(result.trials_used);
  for (std::size_t k = 0; k < points; ++k) {
    const double mean = sum[k] / used;
    result.mean_sq_error[k] = mean;
    if (result.trials_used >= 2) {
      const double var = std::max(0.0, (sum_sq[k] - used * mean * mean) / (used - 1.0));
      result.stderr_mean[k] = std::sqrt(var / used);
    } else {
      result.stderr_mean[k] = 0.0;
    }
  }
  if (result.trials_used < 2) {
    result.warnings.push_back("fewer than two trials kept; standard errors are zero");
  }

  result.bound_satisfied = true;
  for (std::size_t k = 0; k < points; ++k) {
    if (result.mean_sq_error[k] - 3.0 * result.stderr_mean[k] >
        result.bound[k] + 1e-12 * (1.0 + result.bound[k])) {
      result.bound_satisfied = false;
      break;
    }
  }
  result.discard_ok =
      100L * static_cast<long>(result.discarded) <= static_cast<long>(options.trials);
  result.is_satisfied = result.bound_satisfied && result.discard_ok;
  return result;
}

}  // namespace dissim
