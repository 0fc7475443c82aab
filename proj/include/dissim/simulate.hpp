#pragma once

#include <dissim/rng.hpp>
#include <dissim/signals.hpp>
#include <dissim/system.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dissim {

/// Sampled path of a jump-diffusion simulation. Column k of each matrix holds
/// the value at times[k].
struct Trajectory {
  std::vector<double> times;
  Matrix states;       ///< n x (steps + 1)
  Matrix outputs1;     ///< q1 x (steps + 1), rows C1 x
  Matrix outputs2;     ///< q2 x (steps + 1), rows C2 x
  Matrix jump_counts;  ///< r x (steps + 1), cumulative jumps per channel
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::vector<std::string> warnings;
};

/// Thrown when a simulated state stops being finite; carries the step index
/// and time at which the blow-up was detected.
struct DivergenceError : std::runtime_error {
  DivergenceError(long step_index, double at_time)
      : std::runtime_error("state diverged at step " + std::to_string(step_index) + " (t = " +
                           std::to_string(at_time) + ")"),
        step(step_index),
        time(at_time) {}
  long step;
  double time;
};

/// Drift A x + B u + E phi(t, F x) + D w.
inline Vector drift(const JumpDiffusionSystem& sys, double t, const Vector& x, const Vector& u,
                    const Vector& w) {
  return sys.a * x + sys.b * u + sys.e * sys.phi(t, sys.f * x) + sys.d * w;
}

/// Number of Euler-Maruyama steps for a horizon; the horizon is rounded to
/// the nearest positive multiple of dt.
inline long step_count(double horizon, double dt) {
  detail::require(dt > 0.0 && std::isfinite(dt), "simulate: dt must be positive and finite");
  detail::require(horizon > 0.0 && std::isfinite(horizon),
                  "simulate: horizon must be positive and finite");
  return std::max<long>(1, std::lround(horizon / dt));
}

/// Euler-Maruyama simulation of one path on the uniform grid t_k = k dt.
///
/// Per step the scheme draws exactly one standard normal for the shared
/// Wiener channel and then one Poisson count per jump channel, in channel
/// order, from the stream identified by (seed, stream). Replaying with the
/// same identifiers reproduces the path exactly. Channels whose rate times dt
/// reaches 0.1 are flagged in Trajectory::warnings because the first-order
/// scheme resolves jump arrivals poorly at that coarseness.
inline Trajectory simulate(const JumpDiffusionSystem& sys, const Vector& x0,
                           const InputSignal& u, const InputSignal& w, double horizon, double dt,
                           std::uint64_t seed, std::uint64_t stream = 0) {
  sys.validate();
  detail::require(x0.size() == sys.state_dim(),
                  "simulate: x0 has dimension " + std::to_string(x0.size()) + ", expected " +
                      std::to_string(sys.state_dim()));
  detail::require(u.dimension() == sys.input_dim(),
                  "simulate: input signal has dimension " + std::to_string(u.dimension()) +
                      ", expected " + std::to_string(sys.input_dim()));
  detail::require(w.dimension() == sys.internal_input_dim(),
                  "simulate: internal input signal has dimension " +
                      std::to_string(w.dimension()) + ", expected " +
                      std::to_string(sys.internal_input_dim()));

  const long steps = step_count(horizon, dt);
  const Eigen::Index n = sys.state_dim();
  const Eigen::Index r = sys.jump_channel_count();

  Trajectory traj;
  traj.seed = seed;
  traj.stream = stream;
  traj.times.resize(static_cast<std::size_t>(steps) + 1);
  traj.states.resize(n, steps + 1);
  traj.outputs1.resize(sys.output_dim(), steps + 1);
  traj.outputs2.resize(sys.internal_output_dim(), steps + 1);
  traj.jump_counts = Matrix::Zero(r, steps + 1);

  for (Eigen::Index i = 0; i < r; ++i) {
    if (sys.jump_rates[static_cast<std::size_t>(i)] * dt >= 0.1) {
      traj.warnings.push_back("jump channel " + std::to_string(i) + " has rate*dt = " +
                              std::to_string(sys.jump_rates[static_cast<std::size_t>(i)] * dt) +
                              " >= 0.1; decrease dt to resolve jump arrivals");
    }
  }

  RandomStream rng(seed, stream);
  const double sqrt_dt = std::sqrt(dt);
  Vector x = x0;
  traj.times[0] = 0.0;
  traj.states.col(0) = x;
  traj.outputs1.col(0) = sys.c1 * x;
  traj.outputs2.col(0) = sys.c2 * x;

  for (long k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    Vector next = x + drift(sys, t, x, u(t), w(t)) * dt;
    const double dw = sqrt_dt * rng.next_normal();
    next += sys.g.col(0) * dw;
    for (Eigen::Index i = 0; i < r; ++i) {
      const int jumps = rng.next_poisson(sys.jump_rates[static_cast<std::size_t>(i)] * dt);
      if (jumps > 0) next += static_cast<double>(jumps) * sys.jump_resets[static_cast<std::size_t>(i)];
      traj.jump_counts(i, k + 1) = traj.jump_counts(i, k) + jumps;
    }
    if (!next.allFinite()) throw DivergenceError(k + 1, static_cast<double>(k + 1) * dt);
    x = next;
    traj.times[static_cast<std::size_t>(k) + 1] = static_cast<double>(k + 1) * dt;
    traj.states.col(k + 1) = x;
    traj.outputs1.col(k + 1) = sys.c1 * x;
    traj.outputs2.col(k + 1) = sys.c2 * x;
  }
  return traj;
}

}  // namespace dissim
