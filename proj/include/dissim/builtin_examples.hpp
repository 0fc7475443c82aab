#pragma once

#include <dissim/network.hpp>

#include <sstream>
#include <string>
#include <vector>

namespace dissim {

/// A self-contained benchmark scenario: an interconnection whose abstractions
/// were produced by the mechanical construction, the validation run setup,
/// and the published reference maps the construction is cross-checked
/// against. Reference entries that the construction does not reproduce are
/// reported by compare_to_reference, never silently replaced.
struct ExampleScenario {
  std::string name;
  Interconnection network;
  /// Per-subsystem construction output (abstraction plus completed
  /// certificate), kept for its residuals and notes.
  std::vector<AbstractionResult> constructions;
  /// Validation run: abstract input per subsystem, stacked initial states,
  /// and the co-simulation options.
  std::vector<InputSignal> uhat;
  Vector x0;
  Vector xhat0;
  Vector theta0;
  CoSimulationOptions run;
  /// Published per-subsystem abstract maps used as a cross-check.
  Matrix reference_a_hat;
  Matrix reference_c1_hat;
  Matrix reference_e_hat;
  Matrix reference_f_hat;
};

namespace detail {

inline std::string format_matrix(const Matrix& m) {
  std::ostringstream out;
  out << "[";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out << (r == 0 ? "[" : ", [");
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out << (c == 0 ? "" : ", ") << m(r, c);
    }
    out << "]";
  }
  out << "]";
  return out.str();
}

inline void compare_entry(std::vector<std::string>& notes, std::size_t index,
                          const std::string& label, const Matrix& built,
                          const Matrix& reference) {
  const bool same_shape =
      built.rows() == reference.rows() && built.cols() == reference.cols();
  if (same_shape && (built.size() == 0 || (built - reference).norm() <= 1e-9)) {
    return;
  }
  notes.push_back("subsystem " + std::to_string(index) + ": constructed " + label + " " +
                  format_matrix(built) + " differs from the reference " +
                  format_matrix(reference));
}

}  // namespace detail

/// Compares the constructed abstract maps of every subsystem against the
/// scenario's published reference maps and lists the mismatches.
inline std::vector<std::string> compare_to_reference(const ExampleScenario& scenario) {
  std::vector<std::string> notes;
  for (std::size_t i = 0; i < scenario.constructions.size(); ++i) {
    const JumpDiffusionSystem& built = scenario.constructions[i].abstraction;
    detail::compare_entry(notes, i, "Ahat", built.a, scenario.reference_a_hat);
    detail::compare_entry(notes, i, "Chat1", built.c1, scenario.reference_c1_hat);
    detail::compare_entry(notes, i, "Ehat", built.e, scenario.reference_e_hat);
    detail::compare_entry(notes, i, "Fhat", built.f, scenario.reference_f_hat);
  }
  return notes;
}

/// Three identical scalar-coupled rooms: each subsystem has three states with
/// zero drift, identity input and coupling maps, a shared scalar sine
/// nonlinearity of the state sum, one shared Wiener column, and one shared
/// jump channel. Every subsystem reduces to the same one-state abstraction;
/// all structural equations hold exactly and both the subsystem and the
/// network inequalities are tight (largest eigenvalue zero).
inline ExampleScenario example1() {
  constexpr Eigen::Index n = 3;
  constexpr std::size_t parts = 3;
  const double tau = 0.2;
  const double varpi = 0.4;
  const double rate = 1.0;
  const double chi = 10.0;
  const double rho = 0.1;
  const double kappa_hat = 2.0 * chi - 2.0 * rate * tau - varpi * varpi - rate * tau * tau;

  const Matrix eye = Matrix::Identity(n, n);
  const Matrix ones_col = Matrix::Ones(n, 1);

  ExampleScenario scenario;
  scenario.name = "example1";

  AbstractionOptions options;
  options.b_hat = Matrix::Ones(1, 1);
  options.h = ones_col;
  options.w_hat = ones_col;
  options.l2 = ones_col;
  options.jump_mode = AbstractionOptions::JumpMode::none;

  for (std::size_t i = 0; i < parts; ++i) {
    JumpDiffusionSystem sys;
    sys.a = Matrix::Zero(n, n);
    sys.b = eye;
    sys.c1 = Matrix::Zero(1, n);
    sys.c1(0, static_cast<Eigen::Index>(i)) = 1.0;
    sys.c2 = eye;
    sys.d = eye;
    sys.e = ones_col;
    sys.f = Matrix::Ones(1, n);
    sys.g = varpi * ones_col;
    sys.jump_resets = {Vector(tau * Vector::Ones(n))};
    sys.jump_rates = {rate};
    sys.phi = Nonlinearity::sine_sum(1, rho * Matrix::Identity(1, 1), Matrix::Zero(1, 1),
                                     -rho * Matrix::Identity(1, 1));

    StorageCertificate cert;
    cert.m_hat = eye;
    cert.k = -chi * eye;
    cert.p = ones_col;
    cert.z = eye;
    cert.w = eye;
    cert.l1 = -ones_col;
    cert.x = Matrix::Zero(2 * n, 2 * n);
    cert.x.topRightCorner(n, n) = eye;
    cert.x.bottomLeftCorner(n, n) = eye;
    cert.lambda = Matrix::Zero(0, 0);
    cert.kappa_hat = kappa_hat;
    cert.kappa_bar = 0.0;
    cert.aux.a_theta = Matrix::Zero(0, 0);
    cert.aux.b_theta = Matrix::Zero(0, 2 * n);
    cert.aux.c_theta = Matrix::Zero(2 * n, 0);
    cert.aux.d_theta = Matrix::Identity(2 * n, 2 * n);
    cert.aux.split = n;

    AbstractionResult built = build_abstraction(sys, cert, options);
    scenario.network.subsystems.push_back(sys);
    scenario.network.abstractions.push_back(built.abstraction);
    scenario.network.certificates.push_back(built.certificate);
    scenario.constructions.push_back(std::move(built));
    scenario.network.mu.push_back(1.0);
  }

  const Eigen::Index total = static_cast<Eigen::Index>(parts) * n;
  scenario.network.coupling =
      Matrix::Ones(total, total) - static_cast<double>(total) * Matrix::Identity(total, total);
  Matrix abstract_coupling(3, 3);
  abstract_coupling << -6.0, 3.0, 3.0, 3.0, -6.0, 3.0, 3.0, 3.0, -6.0;
  scenario.network.abstract_coupling = abstract_coupling;
  scenario.network.q_tilde = Matrix::Zero(0, 0);

  const Vector high = 0.5 * Vector::Ones(1);
  for (std::size_t i = 0; i < parts; ++i) {
    scenario.uhat.push_back(InputSignal::piecewise({0.0, 1.5}, {high, Vector(-high)}));
  }
  scenario.x0 = Vector::Zero(total);
  scenario.xhat0 = Vector::Zero(static_cast<Eigen::Index>(parts));
  scenario.theta0 = Vector::Zero(0);
  scenario.run.horizon = 3.0;
  scenario.run.dt = 1e-3;
  scenario.run.trials = 200;
  scenario.run.seed = 1;

  scenario.reference_a_hat = Matrix::Zero(1, 1);
  scenario.reference_c1_hat = Matrix::Ones(1, 1);
  scenario.reference_e_hat = Matrix::Ones(1, 1);
  scenario.reference_f_hat = Matrix::Ones(1, 1);
  return scenario;
}

/// Three coupled ten-cart chains: each subsystem has ten positions and ten
/// velocities, is actuated and coupled through the velocities, and reduces
/// to one planar oscillator per chain through the rigid embedding that
/// repeats the abstract position and velocity across the chain. The run is
/// noise- and jump-free; the auxiliary filter carries the coupling mismatch.
inline ExampleScenario example2() {
  constexpr Eigen::Index half = 10;
  constexpr Eigen::Index n = 2 * half;
  constexpr std::size_t parts = 3;

  const Matrix eye = Matrix::Identity(half, half);
  const Matrix zero = Matrix::Zero(half, half);

  ExampleScenario scenario;
  scenario.name = "example2";

  AbstractionOptions options;
  Matrix b_hat(2, 1);
  b_hat << 0.0, 1.0;
  options.b_hat = b_hat;
  options.h = Matrix::Ones(half, 1);
  options.w_hat = Matrix::Ones(half, 1);
  options.jump_mode = AbstractionOptions::JumpMode::none;

  for (std::size_t i = 0; i < parts; ++i) {
    JumpDiffusionSystem sys;
    sys.a = Matrix::Zero(n, n);
    sys.a.topRightCorner(half, half) = eye;
    sys.a.bottomLeftCorner(half, half) = -eye;
    sys.a.bottomRightCorner(half, half) = -0.5 * eye;
    sys.b = Matrix::Zero(n, half);
    sys.b.bottomRows(half) = eye;
    sys.c1 = Matrix::Zero(1, n);
    sys.c1(0, half) = 1.0;
    sys.c2 = Matrix::Zero(half, n);
    sys.c2.leftCols(half) = eye;
    sys.d = sys.b;
    sys.e = Matrix::Zero(n, 0);
    sys.f = Matrix::Zero(0, n);
    sys.g = Matrix::Zero(n, 1);
    sys.phi = Nonlinearity::none();

    StorageCertificate cert;
    cert.m_hat = Matrix::Zero(n, n);
    cert.m_hat.topLeftCorner(half, half) = 2.0 * eye;
    cert.m_hat.topRightCorner(half, half) = eye;
    cert.m_hat.bottomLeftCorner(half, half) = eye;
    cert.m_hat.bottomRightCorner(half, half) = eye;
    cert.k = Matrix::Zero(half, n);
    cert.k.leftCols(half) = -0.5 * eye;
    cert.p = Matrix::Zero(n, 2);
    cert.p.col(0).head(half) = Vector::Ones(half);
    cert.p.col(1).tail(half) = Vector::Ones(half);
    cert.z = sys.b;
    cert.w = eye;
    cert.l1 = Matrix::Zero(half, 0);
    cert.x = Matrix::Zero(n, n);
    cert.x.topLeftCorner(half, half) = 9.47785 * eye;
    cert.x.topRightCorner(half, half) = -7.4055 * eye;
    cert.x.bottomLeftCorner(half, half) = -7.4055 * eye;
    cert.x.bottomRightCorner(half, half) = 1.6526 * eye;
    cert.lambda = Matrix::Identity(n, n);
    cert.kappa_hat = 0.1;
    cert.kappa_bar = 1.0;
    cert.aux.a_theta = -5.0 * Matrix::Identity(n, n);
    cert.aux.b_theta = Matrix::Zero(n, n);
    cert.aux.b_theta.topRightCorner(half, half) = -4.14 * eye;
    cert.aux.b_theta.bottomRightCorner(half, half) = 11.51 * eye;
    cert.aux.c_theta = 0.1 * Matrix::Identity(n, n);
    cert.aux.d_theta = Matrix::Zero(n, n);
    cert.aux.d_theta.topRightCorner(half, half) = eye;
    cert.aux.d_theta.bottomRightCorner(half, half) = eye;
    cert.aux.split = half;

    AbstractionResult built = build_abstraction(sys, cert, options);
    scenario.network.subsystems.push_back(sys);
    scenario.network.abstractions.push_back(built.abstraction);
    scenario.network.certificates.push_back(built.certificate);
    scenario.constructions.push_back(std::move(built));
    scenario.network.mu.push_back(1.0);
  }

  Matrix ring(3, 3);
  ring << -2.0, 1.0, 1.0, 1.0, -2.0, 1.0, 1.0, 1.0, -2.0;
  Matrix coupling = Matrix::Zero(3 * half, 3 * half);
  for (Eigen::Index r = 0; r < 3; ++r) {
    for (Eigen::Index c = 0; c < 3; ++c) {
      coupling.block(r * half, c * half, half, half) = ring(r, c) * eye;
    }
  }
  scenario.network.coupling = coupling;
  scenario.network.abstract_coupling = ring;
  scenario.network.q_tilde =
      0.1 * Matrix::Identity(static_cast<Eigen::Index>(parts) * n,
                             static_cast<Eigen::Index>(parts) * n);

  scenario.uhat.push_back(InputSignal::atoms({SignalAtom{SignalAtom::Kind::sine, 1.0}}));
  scenario.uhat.push_back(InputSignal::atoms({SignalAtom{SignalAtom::Kind::exp_decay, 0.1}}));
  scenario.uhat.push_back(InputSignal::atoms({SignalAtom{SignalAtom::Kind::neg_ramp, 1.0}}));

  Vector x0_part(n);
  x0_part.head(half) = 0.1 * Vector::Ones(half);
  x0_part.tail(half) = Vector::Zero(half);
  scenario.x0 = Vector(static_cast<Eigen::Index>(parts) * n);
  for (std::size_t i = 0; i < parts; ++i) {
    scenario.x0.segment(static_cast<Eigen::Index>(i) * n, n) = x0_part;
  }
  scenario.xhat0 = Vector::Zero(2 * static_cast<Eigen::Index>(parts));
  scenario.theta0 = Vector::Zero(static_cast<Eigen::Index>(parts) * n);
  scenario.run.horizon = 5.0;
  scenario.run.dt = 1e-3;
  scenario.run.trials = 500;
  scenario.run.seed = 1;

  Matrix a_hat(2, 2);
  a_hat << 0.0, 1.0, -1.0, -0.5;
  scenario.reference_a_hat = a_hat;
  Matrix c1_hat(1, 2);
  c1_hat << 0.0, 1.0;
  scenario.reference_c1_hat = c1_hat;
  scenario.reference_e_hat = Matrix::Zero(2, 0);
  scenario.reference_f_hat = Matrix::Zero(0, 2);
  return scenario;
}

}  // namespace dissim
