#pragma once

#include <dissim/matrix_analysis.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace dissim {

/// One scalar coordinate of a deterministic input signal.
struct SignalAtom {
  enum class Kind { zero, constant, sine, exp_decay, neg_ramp };

  Kind kind = Kind::zero;
  /// Multiplies the closed form; for Kind::constant it is the value itself.
  double scale = 1.0;

  double operator()(double t) const {
    switch (kind) {
      case Kind::zero: return 0.0;
      case Kind::constant: return scale;
      case Kind::sine: return scale * std::sin(t);
      case Kind::exp_decay: return scale * std::exp(-t);
      case Kind::neg_ramp: return -scale * t;
    }
    return 0.0;
  }
};

/// Deterministic vector-valued input signal: either a stack of scalar closed
/// forms or a right-continuous piecewise-constant table.
class InputSignal {
 public:
  InputSignal() = default;

  static InputSignal zero(Eigen::Index dimension) {
    detail::require(dimension >= 0, "InputSignal::zero: dimension must be nonnegative");
    InputSignal s;
    s.atoms_.assign(static_cast<std::size_t>(dimension), SignalAtom{});
    return s;
  }

  static InputSignal constant(const Vector& value) {
    InputSignal s;
    s.atoms_.reserve(static_cast<std::size_t>(value.size()));
    for (Eigen::Index i = 0; i < value.size(); ++i) {
      s.atoms_.push_back(SignalAtom{SignalAtom::Kind::constant, value(i)});
    }
    return s;
  }

  static InputSignal atoms(std::vector<SignalAtom> parts) {
    InputSignal s;
    s.atoms_ = std::move(parts);
    return s;
  }

  /// Piecewise-constant signal: value(t) = values[k] for the last breakpoint
  /// times[k] <= t; before the first breakpoint the first value applies.
  /// Breakpoints must be strictly increasing and all values equally sized.
  static InputSignal piecewise(std::vector<double> times, std::vector<Vector> values) {
    detail::require(!times.empty(), "InputSignal::piecewise: needs at least one breakpoint");
    detail::require(times.size() == values.size(),
                    "InputSignal::piecewise: breakpoint and value counts differ");
    for (std::size_t i = 1; i < times.size(); ++i) {
      detail::require(times[i] > times[i - 1],
                      "InputSignal::piecewise: breakpoints must be strictly increasing");
    }
    for (const Vector& v : values) {
      detail::require(v.size() == values.front().size(),
                      "InputSignal::piecewise: values must share one dimension");
    }
    InputSignal s;
    s.piecewise_times_ = std::move(times);
    s.piecewise_values_ = std::move(values);
    return s;
  }

  Eigen::Index dimension() const {
    if (!children_.empty()) {
      Eigen::Index total = 0;
      for (const InputSignal& c : children_) total += c.dimension();
      return total;
    }
    if (!piecewise_values_.empty()) return piecewise_values_.front().size();
    return static_cast<Eigen::Index>(atoms_.size());
  }

  Vector operator()(double t) const {
    if (!children_.empty()) {
      Vector v(dimension());
      Eigen::Index offset = 0;
      for (const InputSignal& c : children_) {
        v.segment(offset, c.dimension()) = c(t);
        offset += c.dimension();
      }
      return v;
    }
    if (!piecewise_values_.empty()) {
      const auto it =
          std::upper_bound(piecewise_times_.begin(), piecewise_times_.end(), t);
      const std::size_t index =
          it == piecewise_times_.begin()
              ? 0
              : static_cast<std::size_t>(std::distance(piecewise_times_.begin(), it)) - 1;
      return piecewise_values_[index];
    }
    Vector v(static_cast<Eigen::Index>(atoms_.size()));
    for (std::size_t i = 0; i < atoms_.size(); ++i) v(static_cast<Eigen::Index>(i)) = atoms_[i](t);
    return v;
  }

  bool is_piecewise() const { return !piecewise_values_.empty(); }
  const std::vector<SignalAtom>& atom_parts() const { return atoms_; }
  const std::vector<double>& breakpoints() const { return piecewise_times_; }
  const std::vector<Vector>& table_values() const { return piecewise_values_; }

  /// Concatenates signals coordinate-wise into one stacked signal. All-atom
  /// stacks merge into one atom list and all-table stacks merge onto the
  /// union of their breakpoints; mixed stacks keep the parts and evaluate
  /// them in place, so closed forms are never sampled onto a grid.
  static InputSignal stack(std::vector<InputSignal> parts) {
    bool any_piecewise = false;
    bool all_piecewise = true;
    for (const InputSignal& p : parts) {
      const bool piecewise_part = p.is_piecewise();
      any_piecewise = any_piecewise || piecewise_part;
      all_piecewise = all_piecewise && piecewise_part && p.children_.empty();
    }
    if (!any_piecewise) {
      bool all_atoms = true;
      for (const InputSignal& p : parts) all_atoms = all_atoms && p.children_.empty();
      if (all_atoms) {
        std::vector<SignalAtom> merged;
        for (const InputSignal& p : parts) {
          merged.insert(merged.end(), p.atoms_.begin(), p.atoms_.end());
        }
        return atoms(std::move(merged));
      }
    }
    if (all_piecewise && !parts.empty()) {
      std::vector<double> grid;
      for (const InputSignal& p : parts) {
        grid.insert(grid.end(), p.piecewise_times_.begin(), p.piecewise_times_.end());
      }
      std::sort(grid.begin(), grid.end());
      grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
      Eigen::Index total = 0;
      for (const InputSignal& p : parts) total += p.dimension();
      std::vector<Vector> values;
      values.reserve(grid.size());
      for (const double t : grid) {
        Vector v(total);
        Eigen::Index offset = 0;
        for (const InputSignal& p : parts) {
          v.segment(offset, p.dimension()) = p(t);
          offset += p.dimension();
        }
        values.push_back(std::move(v));
      }
      return piecewise(std::move(grid), std::move(values));
    }
    InputSignal s;
    s.children_ = std::move(parts);
    return s;
  }

 private:
  std::vector<SignalAtom> atoms_;
  std::vector<double> piecewise_times_;
  std::vector<Vector> piecewise_values_;
  std::vector<InputSignal> children_;
};

}  // namespace dissim
