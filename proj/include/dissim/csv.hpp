#pragma once

/// Fixed-format CSV output for time series. Every file has a header row and
/// a fixed column order, and every float is rendered with 17 significant
/// digits, enough to reproduce the IEEE double exactly; identical data
/// therefore produces byte-identical files.

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <dissim/network.hpp>

namespace dissim {

/// Renders a double with up to 17 significant digits (%.17g).
inline std::string csv_number(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

/// Monte Carlo co-simulation curves with the fixed column order
/// t,mean_sq_error,stderr,bound.
inline std::string monte_carlo_csv(const MonteCarloResult& result) {
  std::string out = "t,mean_sq_error,stderr,bound\n";
  for (std::size_t i = 0; i < result.times.size(); ++i) {
    out += csv_number(result.times[i]);
    out += ',';
    out += csv_number(result.mean_sq_error[i]);
    out += ',';
    out += csv_number(result.stderr_mean[i]);
    out += ',';
    out += csv_number(result.bound[i]);
    out += '\n';
  }
  return out;
}

/// Sampled trajectory with columns t,x0,...,x{n-1}.
inline std::string trajectory_csv(const Trajectory& trajectory) {
  std::string out = "t";
  for (Eigen::Index i = 0; i < trajectory.states.rows(); ++i)
    out += ",x" + std::to_string(i);
  out += '\n';
  for (std::size_t k = 0; k < trajectory.times.size(); ++k) {
    out += csv_number(trajectory.times[k]);
    for (Eigen::Index i = 0; i < trajectory.states.rows(); ++i) {
      out += ',';
      out += csv_number(trajectory.states(i, static_cast<Eigen::Index>(k)));
    }
    out += '\n';
  }
  return out;
}

/// Error-bound curve with columns t,bound.
inline std::string bound_csv(const std::vector<double>& times,
                             const std::vector<double>& bound) {
  std::string out = "t,bound\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    out += csv_number(times[i]);
    out += ',';
    out += csv_number(bound[i]);
    out += '\n';
  }
  return out;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file.good()) throw std::runtime_error(path + ": cannot open file for writing");
  file << text;
}

}  // namespace dissim
