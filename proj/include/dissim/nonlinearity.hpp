#pragma once

#include <dissim/matrix_analysis.hpp>
#include <dissim/rng.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace dissim {

/// Static nonlinearity phi(t, k) together with the incremental quadratic
/// constraint it is certified against:
///
///   [k1 - k2; phi(t,k1) - phi(t,k2)]^T [[M11, M12], [M12^T, M22]] [...] >= 0
///
/// for all t and all argument pairs. Built-in kinds are the zero map, the
/// coordinate-wise sine, and a coordinate-wise piecewise-linear table; the
/// table is clamped outside its breakpoint range.
class Nonlinearity {
 public:
  enum class Kind { zero, sine_sum, table };

  /// Zero-dimensional placeholder for systems without a nonlinear term.
  static Nonlinearity none() {
    Nonlinearity nl;
    nl.kind_ = Kind::zero;
    nl.input_dim_ = 0;
    nl.output_dim_ = 0;
    nl.m11_ = Matrix::Zero(0, 0);
    nl.m12_ = Matrix::Zero(0, 0);
    nl.m22_ = Matrix::Zero(0, 0);
    return nl;
  }

  /// Zero map of the given dimensions with the given multiplier blocks.
  static Nonlinearity zero(Eigen::Index input_dim, Eigen::Index output_dim, Matrix m11,
                           Matrix m12, Matrix m22) {
    Nonlinearity nl;
    nl.kind_ = Kind::zero;
    nl.input_dim_ = input_dim;
    nl.output_dim_ = output_dim;
    nl.set_multiplier(std::move(m11), std::move(m12), std::move(m22));
    return nl;
  }

  /// Coordinate-wise sine in every input coordinate (square map).
  static Nonlinearity sine_sum(Eigen::Index dim, Matrix m11, Matrix m12, Matrix m22) {
    Nonlinearity nl;
    nl.kind_ = Kind::sine_sum;
    nl.input_dim_ = dim;
    nl.output_dim_ = dim;
    nl.set_multiplier(std::move(m11), std::move(m12), std::move(m22));
    return nl;
  }

  /// Coordinate-wise piecewise-linear interpolation of (breakpoints, values),
  /// applied to every coordinate of a square map, clamped outside the range.
  static Nonlinearity table(Eigen::Index dim, std::vector<double> breakpoints,
                            std::vector<double> values, Matrix m11, Matrix m12, Matrix m22) {
    detail::require(breakpoints.size() >= 2, "Nonlinearity::table: needs at least two breakpoints");
    detail::require(breakpoints.size() == values.size(),
                    "Nonlinearity::table: breakpoint and value counts differ");
    for (std::size_t i = 1; i < breakpoints.size(); ++i) {
      detail::require(breakpoints[i] > breakpoints[i - 1],
                      "Nonlinearity::table: breakpoints must be strictly increasing");
    }
    Nonlinearity nl;
    nl.kind_ = Kind::table;
    nl.input_dim_ = dim;
    nl.output_dim_ = dim;
    nl.table_x_ = std::move(breakpoints);
    nl.table_y_ = std::move(values);
    nl.set_multiplier(std::move(m11), std::move(m12), std::move(m22));
    return nl;
  }

  Kind kind() const { return kind_; }
  Eigen::Index input_dimension() const { return input_dim_; }
  Eigen::Index output_dimension() const { return output_dim_; }
  const Matrix& m11() const { return m11_; }
  const Matrix& m12() const { return m12_; }
  const Matrix& m22() const { return m22_; }
  const std::vector<double>& table_breakpoints() const { return table_x_; }
  const std::vector<double>& table_values() const { return table_y_; }

  /// Full multiplier [[M11, M12], [M12^T, M22]].
  Matrix multiplier() const {
    Matrix m(input_dim_ + output_dim_, input_dim_ + output_dim_);
    m.topLeftCorner(input_dim_, input_dim_) = m11_;
    m.topRightCorner(input_dim_, output_dim_) = m12_;
    m.bottomLeftCorner(output_dim_, input_dim_) = m12_.transpose();
    m.bottomRightCorner(output_dim_, output_dim_) = m22_;
    return m;
  }

  Vector operator()(double t, const Vector& k) const {
    (void)t;
    detail::require(k.size() == input_dim_, "Nonlinearity: argument has dimension " +
                                                std::to_string(k.size()) + ", expected " +
                                                std::to_string(input_dim_));
    switch (kind_) {
      case Kind::zero: return Vector::Zero(output_dim_);
      case Kind::sine_sum: return k.array().sin().matrix();
      case Kind::table: {
        Vector out(output_dim_);
        for (Eigen::Index i = 0; i < output_dim_; ++i) out(i) = interpolate(k(i));
        return out;
      }
    }
    return Vector::Zero(output_dim_);
  }

 private:
  void set_multiplier(Matrix m11, Matrix m12, Matrix m22) {
    detail::require_shape(m11, input_dim_, input_dim_, "Nonlinearity multiplier M11");
    detail::require_shape(m12, input_dim_, output_dim_, "Nonlinearity multiplier M12");
    detail::require_shape(m22, output_dim_, output_dim_, "Nonlinearity multiplier M22");
    detail::require_finite(m11, "Nonlinearity multiplier M11");
    detail::require_finite(m12, "Nonlinearity multiplier M12");
    detail::require_finite(m22, "Nonlinearity multiplier M22");
    m11_ = std::move(m11);
    m12_ = std::move(m12);
    m22_ = std::move(m22);
  }

  double interpolate(double x) const {
    if (x <= table_x_.front()) return table_y_.front();
    if (x >= table_x_.back()) return table_y_.back();
    const auto it = std::upper_bound(table_x_.begin(), table_x_.end(), x);
    const std::size_t hi = static_cast<std::size_t>(std::distance(table_x_.begin(), it));
    const std::size_t lo = hi - 1;
    const double w = (x - table_x_[lo]) / (table_x_[hi] - table_x_[lo]);
    return table_y_[lo] + w * (table_y_[hi] - table_y_[lo]);
  }

  Kind kind_ = Kind::zero;
  Eigen::Index input_dim_ = 0;
  Eigen::Index output_dim_ = 0;
  Matrix m11_, m12_, m22_;
  std::vector<double> table_x_, table_y_;
};

/// Sampled falsification report for an incremental quadratic constraint.
struct IqcReport {
  double min_value = 0.0;  ///< smallest sampled quadratic-form value
  bool is_satisfied = false;
  int samples = 0;
  double tolerance = 0.0;
};

/// Evaluates the incremental quadratic form on random argument pairs drawn
/// uniformly from [-range, range] per coordinate with times in [0, 10), and
/// reports the smallest value seen. The constraint passes the sampled check
/// when that minimum is at least -tolerance.
inline IqcReport iqc_check(const Nonlinearity& nl, int samples, double range,
                           std::uint64_t seed, double tolerance = 1e-9) {
  detail::require(samples >= 0, "iqc_check: sample count must be nonnegative");
  detail::require(range > 0.0, "iqc_check: range must be positive");
  RandomStream rng(seed, 0);
  const Matrix multiplier = nl.multiplier();
  IqcReport report;
  report.samples = samples;
  report.tolerance = tolerance;
  report.min_value = std::numeric_limits<double>::infinity();
  if (nl.input_dimension() + nl.output_dimension() == 0 || samples == 0) {
    report.min_value = 0.0;
    report.is_satisfied = true;
    return report;
  }
  for (int s = 0; s < samples; ++s) {
    Vector k1(nl.input_dimension());
    Vector k2(nl.input_dimension());
    for (Eigen::Index i = 0; i < nl.input_dimension(); ++i) {
      k1(i) = range * (2.0 * rng.next_uniform() - 1.0);
      k2(i) = range * (2.0 * rng.next_uniform() - 1.0);
    }
    const double t = 10.0 * rng.next_uniform();
    Vector z(nl.input_dimension() + nl.output_dimension());
    z.head(nl.input_dimension()) = k1 - k2;
    z.tail(nl.output_dimension()) = nl(t, k1) - nl(t, k2);
    report.min_value = std::min(report.min_value, double(z.dot(multiplier * z)));
  }
  report.is_satisfied = report.min_value >= -tolerance;
  return report;
}

}  // namespace dissim
