#pragma once

#include <dissim/matrix_analysis.hpp>
#include <dissim/nonlinearity.hpp>

#include <string>
#include <utility>
#include <vector>

namespace dissim {

/// Continuous-time jump-diffusion model with a static nonlinearity:
///
///   d xi = (A xi + B u + E phi(t, F xi) + D w) dt + G dW + sum_i R_i dP_i
///   z1 = C1 xi,  z2 = C2 xi
///
/// where u is the controlled input, w the internal (coupling) input, W a
/// scalar Wiener process, and P_i independent Poisson counters with rates
/// lambda_i whose jumps add the constant reset vectors R_i.
struct JumpDiffusionSystem {
  Matrix a;   ///< n x n drift
  Matrix b;   ///< n x m controlled-input map
  Matrix c1;  ///< q1 x n external output
  Matrix c2;  ///< q2 x n internal (coupling) output
  Matrix d;   ///< n x p internal-input map
  Matrix e;   ///< n x l_out nonlinearity injection
  Matrix f;   ///< l_in x n nonlinearity argument map
  Matrix g;   ///< n x 1 diffusion column
  std::vector<Vector> jump_resets;  ///< one n-vector per Poisson channel
  std::vector<double> jump_rates;   ///< positive rate per Poisson channel
  Nonlinearity phi = Nonlinearity::none();

  Eigen::Index state_dim() const { return a.rows(); }
  Eigen::Index input_dim() const { return b.cols(); }
  Eigen::Index internal_input_dim() const { return d.cols(); }
  Eigen::Index output_dim() const { return c1.rows(); }
  Eigen::Index internal_output_dim() const { return c2.rows(); }
  Eigen::Index jump_channel_count() const { return static_cast<Eigen::Index>(jump_resets.size()); }

  /// Sum over channels of rate_i * R_i; zero vector when jump-free.
  Vector jump_rate_reset_sum() const {
    Vector sum = Vector::Zero(state_dim());
    for (std::size_t i = 0; i < jump_resets.size(); ++i) sum += jump_rates[i] * jump_resets[i];
    return sum;
  }

  /// Checks all block dimensions against the state dimension taken from A,
  /// throwing std::invalid_argument naming the first offending block.
  void validate(const std::string& label = "system") const {
    detail::require(a.rows() == a.cols(), label + ": A must be square, got " +
                                              std::to_string(a.rows()) + "x" +
                                              std::to_string(a.cols()));
    const Eigen::Index n = a.rows();
    detail::require(b.rows() == n, label + ": B has " + std::to_string(b.rows()) +
                                       " rows, expected " + std::to_string(n));
    detail::require(c1.cols() == n, label + ": C1 has " + std::to_string(c1.cols()) +
                                        " columns, expected " + std::to_string(n));
    detail::require(c2.cols() == n, label + ": C2 has " + std::to_string(c2.cols()) +
                                        " columns, expected " + std::to_string(n));
    detail::require(d.rows() == n, label + ": D has " + std::to_string(d.rows()) +
                                       " rows, expected " + std::to_string(n));
    detail::require_shape(e, n, phi.output_dimension(), label + ": E");
    detail::require_shape(f, phi.input_dimension(), n, label + ": F");
    detail::require_shape(g, n, 1, label + ": G");
    detail::require(jump_resets.size() == jump_rates.size(),
                    label + ": jump reset and rate counts differ");
    for (std::size_t i = 0; i < jump_resets.size(); ++i) {
      detail::require(jump_resets[i].size() == n,
                      label + ": jump reset " + std::to_string(i) + " has dimension " +
                          std::to_string(jump_resets[i].size()) + ", expected " +
                          std::to_string(n));
      detail::require(std::isfinite(jump_rates[i]) && jump_rates[i] > 0.0,
                      label + ": jump rate " + std::to_string(i) + " must be positive");
      detail::require_finite(Matrix(jump_resets[i]), label + ": jump reset " + std::to_string(i));
    }
    for (const auto& [m, name] :
         {std::pair<const Matrix*, const char*>{&a, "A"}, {&b, "B"}, {&c1, "C1"}, {&c2, "C2"},
          {&d, "D"}, {&e, "E"}, {&f, "F"}, {&g, "G"}}) {
      detail::require_finite(*m, label + ": " + name);
    }
  }
};

/// Auxiliary filter that turns the coupling mismatch into the supply-rate
/// output z:
///
///   d theta = (Atheta theta + Btheta u_theta) dt
///   z = Ctheta theta + Dtheta u_theta
///   u_theta = [W w - What what; C2 x - H Chat2 xhat]
///
/// The input splits into an internal-mismatch block of width `split` and an
/// output-mismatch block holding the rest.
struct AuxiliarySystem {
  Matrix a_theta;  ///< l_theta x l_theta
  Matrix b_theta;  ///< l_theta x m_theta
  Matrix c_theta;  ///< q_theta x l_theta
  Matrix d_theta;  ///< q_theta x m_theta
  Eigen::Index split = 0;  ///< width of the internal-mismatch input block

  Eigen::Index state_dim() const { return a_theta.rows(); }
  Eigen::Index input_dim() const { return d_theta.cols(); }
  Eigen::Index output_dim() const { return d_theta.rows(); }

  Matrix b1() const { return b_theta.leftCols(split); }
  Matrix b2() const { return b_theta.rightCols(b_theta.cols() - split); }
  Matrix d1() const { return d_theta.leftCols(split); }
  Matrix d2() const { return d_theta.rightCols(d_theta.cols() - split); }

  void validate(const std::string& label = "auxiliary system") const {
    detail::require(a_theta.rows() == a_theta.cols(),
                    label + ": Atheta must be square, got " + std::to_string(a_theta.rows()) +
                        "x" + std::to_string(a_theta.cols()));
    const Eigen::Index l = a_theta.rows();
    const Eigen::Index m = d_theta.cols();
    const Eigen::Index q = d_theta.rows();
    detail::require_shape(b_theta, l, m, label + ": Btheta");
    detail::require_shape(c_theta, q, l, label + ": Ctheta");
    detail::require(split >= 0 && split <= m,
                    label + ": input split " + std::to_string(split) +
                        " outside [0, " + std::to_string(m) + "]");
    for (const auto& [mat, name] :
         {std::pair<const Matrix*, const char*>{&a_theta, "Atheta"}, {&b_theta, "Btheta"},
          {&c_theta, "Ctheta"}, {&d_theta, "Dtheta"}}) {
      detail::require_finite(*mat, label + ": " + name);
    }
  }

  /// Auxiliary system with no state and a zero output map of the given
  /// input/output widths.
  static AuxiliarySystem trivial(Eigen::Index input_dim, Eigen::Index output_dim,
                                 Eigen::Index split) {
    AuxiliarySystem aux;
    aux.a_theta = Matrix::Zero(0, 0);
    aux.b_theta = Matrix::Zero(0, input_dim);
    aux.c_theta = Matrix::Zero(output_dim, 0);
    aux.d_theta = Matrix::Zero(output_dim, input_dim);
    aux.split = split;
    return aux;
  }
};

}  // namespace dissim
