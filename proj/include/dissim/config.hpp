#pragma once

/// JSON project files: named systems, certificates, and interconnections plus
/// the run settings shared by the command-line workflows.
///
/// Layout (all fields lower-case, "schema_version": 1 at the top level):
///
///   {
///     "schema_version": 1,
///     "systems":      { "<name>": { a, b, c1, c2, d, e, f, g,
///                                   jump_rates, jump_resets, phi }, ... },
///     "certificates": { "<name>": { m_hat, k, p, q, h, z, w, w_hat, l1, l2,
///                                   x, lambda, kappa_hat, kappa_bar,
///                                   aux: { a_theta, b_theta, c_theta,
///                                          d_theta, split } }, ... },
///     "networks":     { "<name>": { subsystems, abstractions, certificates,
///                                   coupling, abstract_coupling, mu,
///                                   q_tilde }, ... },
///     "run":          { network, uhat, x0, xhat0, theta0, dt, horizon,
///                       trials, seed, tolerance, samples, sample_box,
///                       shared_noise }
///   }
///
/// Matrices are nested row-major arrays. A matrix with zero rows or columns
/// cannot carry its shape through nested arrays, so it round-trips as the
/// explicit shape object {"rows": r, "cols": c} instead; a bare [] reads as
/// 0 x 0. Load errors throw ConfigError whose message starts with the
/// JSON-pointer-style path of the offending field and, for shape violations,
/// prints both the expected and the found shape.

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include <dissim/builtin_examples.hpp>
#include <dissim/network.hpp>

namespace dissim {

using Json = nlohmann::ordered_json;

/// Error raised for unreadable, unparseable, or schema-violating project
/// files. For schema violations the message begins with the JSON-pointer
/// path of the offending field.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& message) : std::runtime_error(message) {}
};

namespace detail {

[[noreturn]] inline void config_fail(const std::string& path, const std::string& message) {
  throw ConfigError(path + ": " + message);
}

inline const Json& member(const Json& object, const std::string& path, const std::string& key) {
  if (!object.is_object()) config_fail(path, "expected an object");
  const auto it = object.find(key);
  if (it == object.end()) config_fail(path + "/" + key, "missing required field");
  return *it;
}

inline const Json* opt_member(const Json& object, const std::string& path,
                              const std::string& key) {
  if (!object.is_object()) config_fail(path, "expected an object");
  const auto it = object.find(key);
  return it == object.end() ? nullptr : &*it;
}

inline double as_number(const Json& j, const std::string& path) {
  if (!j.is_number()) config_fail(path, "expected a number");
  return j.get<double>();
}

inline long as_integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) config_fail(path, "expected an integer");
  return j.get<long>();
}

inline std::uint64_t as_seed(const Json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    config_fail(path, "expected a nonnegative integer");
  return j.get<std::uint64_t>();
}

inline bool as_boolean(const Json& j, const std::string& path) {
  if (!j.is_boolean()) config_fail(path, "expected a boolean");
  return j.get<bool>();
}

inline std::string as_string(const Json& j, const std::string& path) {
  if (!j.is_string()) config_fail(path, "expected a string");
  return j.get<std::string>();
}

inline std::string shape_of(Eigen::Index rows, Eigen::Index cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

/// Parses a nested row-major array (or the zero-size shape object) into a
/// dense matrix.
inline Matrix parse_matrix(const Json& j, const std::string& path) {
  if (j.is_object()) {
    const long rows = as_integer(member(j, path, "rows"), path + "/rows");
    const long cols = as_integer(member(j, path, "cols"), path + "/cols");
    if (rows < 0 || cols < 0) config_fail(path, "shape must be nonnegative");
    if (rows > 0 && cols > 0)
      config_fail(path, "shape object is only for zero-sized matrices; use nested arrays");
    return Matrix::Zero(rows, cols);
  }
  if (!j.is_array()) config_fail(path, "expected a matrix as nested arrays");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Matrix::Zero(0, 0);
  if (!j[0].is_array()) config_fail(path + "/0", "expected a row array");
  const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    const std::string row_path = path + "/" + std::to_string(r);
    if (!row.is_array()) config_fail(row_path, "expected a row array");
    if (static_cast<Eigen::Index>(row.size()) != cols)
      config_fail(row_path, "ragged matrix: row has " + std::to_string(row.size()) +
                                " entries, first row has " + std::to_string(cols));
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = as_number(row[static_cast<std::size_t>(c)], row_path + "/" + std::to_string(c));
  }
  return m;
}

inline Vector parse_vector(const Json& j, const std::string& path) {
  if (!j.is_array()) config_fail(path, "expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v(i) = as_number(j[static_cast<std::size_t>(i)], path + "/" + std::to_string(i));
  return v;
}

inline std::vector<double> parse_number_list(const Json& j, const std::string& path) {
  if (!j.is_array()) config_fail(path, "expected an array of numbers");
  std::vector<double> values(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    values[i] = as_number(j[i], path + "/" + std::to_string(i));
  return values;
}

/// Enforces an exact or partially free shape; -1 leaves a dimension
/// unconstrained. The error prints both shapes, with * for free dimensions.
inline void expect_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                         const std::string& path) {
  const bool ok = (rows < 0 || m.rows() == rows) && (cols < 0 || m.cols() == cols);
  if (ok) return;
  const std::string expected = (rows < 0 ? std::string("*") : std::to_string(rows)) + "x" +
                               (cols < 0 ? std::string("*") : std::to_string(cols));
  config_fail(path, "expected " + expected + ", got " + shape_of(m.rows(), m.cols()));
}

inline Json matrix_to_json(const Matrix& m) {
  if (m.rows() == 0 && m.cols() == 0) return Json::array();
  if (m.rows() == 0 || m.cols() == 0)
    return Json{{"rows", m.rows()}, {"cols", m.cols()}};
  Json j = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    j.push_back(std::move(row));
  }
  return j;
}

inline Json vector_to_json(const Vector& v) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

}  // namespace detail

/// Serializes a nonlinearity by kind string. "none" stands for the empty
/// map; "zero" keeps dimensions and multiplier but evaluates to zero;
/// "sine_sum" and "table" carry their defining data.
inline Json nonlinearity_to_json(const Nonlinearity& phi) {
  Json j;
  if (phi.input_dimension() == 0 && phi.output_dimension() == 0) {
    j["kind"] = "none";
    return j;
  }
  switch (phi.kind()) {
    case Nonlinearity::Kind::zero:
      j["kind"] = "zero";
      j["input_dim"] = phi.input_dimension();
      j["output_dim"] = phi.output_dimension();
      break;
    case Nonlinearity::Kind::sine_sum:
      j["kind"] = "sine_sum";
      j["dim"] = phi.input_dimension();
      break;
    case Nonlinearity::Kind::table:
      j["kind"] = "table";
      j["dim"] = phi.input_dimension();
      j["breakpoints"] = phi.table_breakpoints();
      j["values"] = phi.table_values();
      break;
  }
  j["m11"] = detail::matrix_to_json(phi.m11());
  j["m12"] = detail::matrix_to_json(phi.m12());
  j["m22"] = detail::matrix_to_json(phi.m22());
  return j;
}

inline Nonlinearity nonlinearity_from_json(const Json& j, const std::string& path) {
  const std::string kind = detail::as_string(detail::member(j, path, "kind"), path + "/kind");
  if (kind == "none") return Nonlinearity::none();
  const Matrix m11 = detail::parse_matrix(detail::member(j, path, "m11"), path + "/m11");
  const Matrix m12 = detail::parse_matrix(detail::member(j, path, "m12"), path + "/m12");
  const Matrix m22 = detail::parse_matrix(detail::member(j, path, "m22"), path + "/m22");
  try {
    if (kind == "zero") {
      const long in = detail::as_integer(detail::member(j, path, "input_dim"), path + "/input_dim");
      const long out =
          detail::as_integer(detail::member(j, path, "output_dim"), path + "/output_dim");
      return Nonlinearity::zero(in, out, m11, m12, m22);
    }
    if (kind == "sine_sum") {
      const long dim = detail::as_integer(detail::member(j, path, "dim"), path + "/dim");
      return Nonlinearity::sine_sum(dim, m11, m12, m22);
    }
    if (kind == "table") {
      const long dim = detail::as_integer(detail::member(j, path, "dim"), path + "/dim");
      return Nonlinearity::table(
          dim, detail::parse_number_list(detail::member(j, path, "breakpoints"), path + "/breakpoints"),
          detail::parse_number_list(detail::member(j, path, "values"), path + "/values"), m11, m12,
          m22);
    }
  } catch (const std::invalid_argument& error) {
    detail::config_fail(path, error.what());
  }
  detail::config_fail(path + "/kind", "unknown nonlinearity kind \"" + kind + "\"");
}

inline Json system_to_json(const JumpDiffusionSystem& sys) {
  Json j;
  j["a"] = detail::matrix_to_json(sys.a);
  j["b"] = detail::matrix_to_json(sys.b);
  j["c1"] = detail::matrix_to_json(sys.c1);
  j["c2"] = detail::matrix_to_json(sys.c2);
  j["d"] = detail::matrix_to_json(sys.d);
  j["e"] = detail::matrix_to_json(sys.e);
  j["f"] = detail::matrix_to_json(sys.f);
  j["g"] = detail::matrix_to_json(sys.g);
  j["jump_rates"] = sys.jump_rates;
  Json resets = Json::array();
  for (const Vector& r : sys.jump_resets) resets.push_back(detail::vector_to_json(r));
  j["jump_resets"] = std::move(resets);
  j["phi"] = nonlinearity_to_json(sys.phi);
  return j;
}

/// Parses a system description. Only the drift matrix is mandatory; the
/// other blocks default to the empty shapes of a closed, noiseless system.
inline JumpDiffusionSystem system_from_json(const Json& j, const std::string& path) {
  if (!j.is_object()) detail::config_fail(path, "expected an object");
  JumpDiffusionSystem sys;
  sys.a = detail::parse_matrix(detail::member(j, path, "a"), path + "/a");
  if (sys.a.rows() != sys.a.cols())
    detail::config_fail(path + "/a",
                        "expected a square drift matrix, got " +
                            detail::shape_of(sys.a.rows(), sys.a.cols()));
  const Eigen::Index n = sys.a.rows();
  const auto block = [&](const char* key, Eigen::Index rows, Eigen::Index cols,
                         Matrix fallback) -> Matrix {
    const Json* field = detail::opt_member(j, path, key);
    if (field == nullptr) return fallback;
    Matrix m = detail::parse_matrix(*field, path + "/" + key);
    detail::expect_shape(m, rows, cols, path + "/" + key);
    return m;
  };
  sys.b = block("b", n, -1, Matrix::Zero(n, 0));
  sys.c1 = block("c1", -1, n, Matrix::Zero(0, n));
  sys.c2 = block("c2", -1, n, Matrix::Zero(0, n));
  sys.d = block("d", n, -1, Matrix::Zero(n, 0));
  sys.e = block("e", n, -1, Matrix::Zero(n, 0));
  sys.f = block("f", -1, n, Matrix::Zero(0, n));
  sys.g = block("g", n, 1, Matrix::Zero(n, 1));
  if (const Json* rates = detail::opt_member(j, path, "jump_rates"))
    sys.jump_rates = detail::parse_number_list(*rates, path + "/jump_rates");
  if (const Json* resets = detail::opt_member(j, path, "jump_resets")) {
    if (!resets->is_array()) detail::config_fail(path + "/jump_resets", "expected an array");
    for (std::size_t i = 0; i < resets->size(); ++i) {
      const std::string reset_path = path + "/jump_resets/" + std::to_string(i);
      Vector r = detail::parse_vector((*resets)[i], reset_path);
      if (r.size() != n)
        detail::config_fail(reset_path, "expected " + detail::shape_of(n, 1) + ", got " +
                                            detail::shape_of(r.size(), 1));
      sys.jump_resets.push_back(std::move(r));
    }
  }
  if (sys.jump_rates.size() != sys.jump_resets.size())
    detail::config_fail(path + "/jump_resets",
                        "expected " + std::to_string(sys.jump_rates.size()) +
                            " resets to match jump_rates, got " +
                            std::to_string(sys.jump_resets.size()));
  if (const Json* phi = detail::opt_member(j, path, "phi"))
    sys.phi = nonlinearity_from_json(*phi, path + "/phi");
  else if (sys.e.cols() > 0 || sys.f.rows() > 0)
    detail::config_fail(path + "/phi", "missing required field (e or f is nonzero sized)");
  try {
    sys.validate();
  } catch (const std::invalid_argument& error) {
    detail::config_fail(path, error.what());
  }
  return sys;
}

inline Json certificate_to_json(const StorageCertificate& cert) {
  Json j;
  j["m_hat"] = detail::matrix_to_json(cert.m_hat);
  j["k"] = detail::matrix_to_json(cert.k);
  j["p"] = detail::matrix_to_json(cert.p);
  j["q"] = detail::matrix_to_json(cert.q);
  j["h"] = detail::matrix_to_json(cert.h);
  j["z"] = detail::matrix_to_json(cert.z);
  j["w"] = detail::matrix_to_json(cert.w);
  j["w_hat"] = detail::matrix_to_json(cert.w_hat);
  j["l1"] = detail::matrix_to_json(cert.l1);
  j["l2"] = detail::matrix_to_json(cert.l2);
  j["x"] = detail::matrix_to_json(cert.x);
  j["lambda"] = detail::matrix_to_json(cert.lambda);
  j["kappa_hat"] = cert.kappa_hat;
  j["kappa_bar"] = cert.kappa_bar;
  Json aux;
  aux["a_theta"] = detail::matrix_to_json(cert.aux.a_theta);
  aux["b_theta"] = detail::matrix_to_json(cert.aux.b_theta);
  aux["c_theta"] = detail::matrix_to_json(cert.aux.c_theta);
  aux["d_theta"] = detail::matrix_to_json(cert.aux.d_theta);
  aux["split"] = cert.aux.split;
  j["aux"] = std::move(aux);
  return j;
}

/// Parses a certificate description. Every block is read as given; the
/// checks here cover only shapes the certificate determines by itself, the
/// pairing against a system happens where the certificate is used.
inline StorageCertificate certificate_from_json(const Json& j, const std::string& path) {
  if (!j.is_object()) detail::config_fail(path, "expected an object");
  StorageCertificate cert;
  const auto block = [&](const char* key, Matrix fallback) -> Matrix {
    const Json* field = detail::opt_member(j, path, key);
    if (field == nullptr) return fallback;
    return detail::parse_matrix(*field, path + "/" + key);
  };
  cert.m_hat = detail::parse_matrix(detail::member(j, path, "m_hat"), path + "/m_hat");
  detail::expect_shape(cert.m_hat, cert.m_hat.rows(), cert.m_hat.rows(), path + "/m_hat");
  cert.k = block("k", Matrix());
  cert.p = detail::parse_matrix(detail::member(j, path, "p"), path + "/p");
  cert.q = block("q", Matrix());
  cert.h = block("h", Matrix());
  cert.z = block("z", Matrix());
  cert.w = block("w", Matrix());
  cert.w_hat = block("w_hat", Matrix());
  cert.l1 = block("l1", Matrix());
  cert.l2 = block("l2", Matrix());
  cert.x = block("x", Matrix());
  detail::expect_shape(cert.x, cert.x.rows(), cert.x.rows(), path + "/x");
  cert.lambda = block("lambda", Matrix::Zero(0, 0));
  detail::expect_shape(cert.lambda, cert.lambda.rows(), cert.lambda.rows(), path + "/lambda");
  cert.kappa_hat = detail::as_number(detail::member(j, path, "kappa_hat"), path + "/kappa_hat");
  if (const Json* kb = detail::opt_member(j, path, "kappa_bar"))
    cert.kappa_bar = detail::as_number(*kb, path + "/kappa_bar");
  const Json& aux = detail::member(j, path, "aux");
  const std::string aux_path = path + "/aux";
  cert.aux.a_theta = detail::parse_matrix(detail::member(aux, aux_path, "a_theta"),
                                          aux_path + "/a_theta");
  const Eigen::Index l_theta = cert.aux.a_theta.rows();
  detail::expect_shape(cert.aux.a_theta, l_theta, l_theta, aux_path + "/a_theta");
  cert.aux.b_theta = detail::parse_matrix(detail::member(aux, aux_path, "b_theta"),
                                          aux_path + "/b_theta");
  detail::expect_shape(cert.aux.b_theta, l_theta, -1, aux_path + "/b_theta");
  cert.aux.c_theta = detail::parse_matrix(detail::member(aux, aux_path, "c_theta"),
                                          aux_path + "/c_theta");
  detail::expect_shape(cert.aux.c_theta, -1, l_theta, aux_path + "/c_theta");
  cert.aux.d_theta = detail::parse_matrix(detail::member(aux, aux_path, "d_theta"),
                                          aux_path + "/d_theta");
  detail::expect_shape(cert.aux.d_theta, cert.aux.c_theta.rows(), cert.aux.b_theta.cols(),
                       aux_path + "/d_theta");
  const long split = detail::as_integer(detail::member(aux, aux_path, "split"),
                                        aux_path + "/split");
  if (split < 0 || split > cert.aux.b_theta.cols())
    detail::config_fail(aux_path + "/split",
                        "split " + std::to_string(split) + " outside [0, " +
                            std::to_string(cert.aux.b_theta.cols()) + "]");
  cert.aux.split = split;
  detail::expect_shape(cert.lambda, l_theta, l_theta, path + "/lambda");
  return cert;
}

/// Named references and coupling data of one interconnection.
struct NetworkConfig {
  std::vector<std::string> subsystems;
  std::vector<std::string> abstractions;
  std::vector<std::string> certificates;
  Matrix coupling;
  Matrix abstract_coupling;
  std::vector<double> mu;
  Matrix q_tilde;
};

/// Run settings shared by the simulation and validation workflows. Vectors
/// left empty mean zero initial states of the matching dimension.
struct RunSettings {
  std::string network;
  std::vector<InputSignal> uhat;
  Vector x0;
  Vector xhat0;
  Vector theta0;
  double dt = 1e-3;
  double horizon = 1.0;
  int trials = 100;
  std::uint64_t seed = 0;
  /// Verification tolerance; negative selects each check's own default.
  double tolerance = -1.0;
  int samples = 10000;       ///< sample count of the dissipation check
  double sample_box = 5.0;   ///< half-width of its sampling box
  bool shared_noise = false;
};

/// An entire project file: named parts plus run settings.
struct ProjectConfig {
  int schema_version = 1;
  std::map<std::string, JumpDiffusionSystem> systems;
  std::map<std::string, StorageCertificate> certificates;
  std::map<std::string, NetworkConfig> networks;
  RunSettings run;
};

inline Json signal_to_json(const InputSignal& signal) {
  Json j;
  if (signal.is_piecewise()) {
    j["kind"] = "piecewise";
    j["times"] = signal.breakpoints();
    Json values = Json::array();
    for (const Vector& v : signal.table_values()) values.push_back(detail::vector_to_json(v));
    j["values"] = std::move(values);
    return j;
  }
  j["kind"] = "atoms";
  Json atoms = Json::array();
  for (const SignalAtom& atom : signal.atom_parts()) {
    Json a;
    switch (atom.kind) {
      case SignalAtom::Kind::zero: a["kind"] = "zero"; break;
      case SignalAtom::Kind::constant: a["kind"] = "constant"; break;
      case SignalAtom::Kind::sine: a["kind"] = "sine"; break;
      case SignalAtom::Kind::exp_decay: a["kind"] = "exp_decay"; break;
      case SignalAtom::Kind::neg_ramp: a["kind"] = "neg_ramp"; break;
    }
    a["scale"] = atom.scale;
    atoms.push_back(std::move(a));
  }
  j["atoms"] = std::move(atoms);
  return j;
}

inline InputSignal signal_from_json(const Json& j, const std::string& path) {
  const std::string kind = detail::as_string(detail::member(j, path, "kind"), path + "/kind");
  try {
    if (kind == "zero") {
      const long dim = detail::as_integer(detail::member(j, path, "dimension"),
                                          path + "/dimension");
      return InputSignal::zero(dim);
    }
    if (kind == "constant")
      return InputSignal::constant(
          detail::parse_vector(detail::member(j, path, "value"), path + "/value"));
    if (kind == "piecewise") {
      const Json& values = detail::member(j, path, "values");
      if (!values.is_array()) detail::config_fail(path + "/values", "expected an array");
      std::vector<Vector> parsed;
      for (std::size_t i = 0; i < values.size(); ++i)
        parsed.push_back(
            detail::parse_vector(values[i], path + "/values/" + std::to_string(i)));
      return InputSignal::piecewise(
          detail::parse_number_list(detail::member(j, path, "times"), path + "/times"),
          std::move(parsed));
    }
    if (kind == "atoms") {
      const Json& atoms = detail::member(j, path, "atoms");
      if (!atoms.is_array()) detail::config_fail(path + "/atoms", "expected an array");
      std::vector<SignalAtom> parts;
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        const std::string atom_path = path + "/atoms/" + std::to_string(i);
        const std::string atom_kind =
            detail::as_string(detail::member(atoms[i], atom_path, "kind"), atom_path + "/kind");
        SignalAtom atom;
        if (atom_kind == "zero") atom.kind = SignalAtom::Kind::zero;
        else if (atom_kind == "constant") atom.kind = SignalAtom::Kind::constant;
        else if (atom_kind == "sine") atom.kind = SignalAtom::Kind::sine;
        else if (atom_kind == "exp_decay") atom.kind = SignalAtom::Kind::exp_decay;
        else if (atom_kind == "neg_ramp") atom.kind = SignalAtom::Kind::neg_ramp;
        else detail::config_fail(atom_path + "/kind", "unknown atom kind \"" + atom_kind + "\"");
        atom.scale = detail::as_number(detail::member(atoms[i], atom_path, "scale"),
                                       atom_path + "/scale");
        parts.push_back(atom);
      }
      return InputSignal::atoms(std::move(parts));
    }
  } catch (const std::invalid_argument& error) {
    detail::config_fail(path, error.what());
  }
  detail::config_fail(path + "/kind", "unknown signal kind \"" + kind + "\"");
}

namespace detail {

inline NetworkConfig network_config_from_json(const Json& j, const std::string& path) {
  if (!j.is_object()) config_fail(path, "expected an object");
  NetworkConfig net;
  const auto names = [&](const char* key) {
    const Json& list = member(j, path, key);
    const std::string list_path = path + "/" + key;
    if (!list.is_array()) config_fail(list_path, "expected an array of names");
    std::vector<std::string> result;
    for (std::size_t i = 0; i < list.size(); ++i)
      result.push_back(as_string(list[i], list_path + "/" + std::to_string(i)));
    return result;
  };
  net.subsystems = names("subsystems");
  net.abstractions = names("abstractions");
  net.certificates = names("certificates");
  if (net.abstractions.size() != net.subsystems.size())
    config_fail(path + "/abstractions", "expected " + std::to_string(net.subsystems.size()) +
                                            " names to match subsystems, got " +
                                            std::to_string(net.abstractions.size()));
  if (net.certificates.size() != net.subsystems.size())
    config_fail(path + "/certificates", "expected " + std::to_string(net.subsystems.size()) +
                                            " names to match subsystems, got " +
                                            std::to_string(net.certificates.size()));
  net.coupling = parse_matrix(member(j, path, "coupling"), path + "/coupling");
  net.abstract_coupling =
      parse_matrix(member(j, path, "abstract_coupling"), path + "/abstract_coupling");
  if (const Json* mu = opt_member(j, path, "mu"))
    net.mu = parse_number_list(*mu, path + "/mu");
  else
    net.mu.assign(net.subsystems.size(), 1.0);
  if (const Json* qt = opt_member(j, path, "q_tilde")) {
    net.q_tilde = parse_matrix(*qt, path + "/q_tilde");
    expect_shape(net.q_tilde, net.q_tilde.rows(), net.q_tilde.rows(), path + "/q_tilde");
  } else {
    net.q_tilde = Matrix::Zero(0, 0);
  }
  return net;
}

inline Json network_config_to_json(const NetworkConfig& net) {
  Json j;
  j["subsystems"] = net.subsystems;
  j["abstractions"] = net.abstractions;
  j["certificates"] = net.certificates;
  j["coupling"] = matrix_to_json(net.coupling);
  j["abstract_coupling"] = matrix_to_json(net.abstract_coupling);
  j["mu"] = net.mu;
  j["q_tilde"] = matrix_to_json(net.q_tilde);
  return j;
}

inline RunSettings run_settings_from_json(const Json& j, const std::string& path) {
  if (!j.is_object()) config_fail(path, "expected an object");
  RunSettings run;
  if (const Json* net = opt_member(j, path, "network"))
    run.network = as_string(*net, path + "/network");
  if (const Json* uhat = opt_member(j, path, "uhat")) {
    if (!uhat->is_array()) config_fail(path + "/uhat", "expected an array of signals");
    for (std::size_t i = 0; i < uhat->size(); ++i)
      run.uhat.push_back(signal_from_json((*uhat)[i], path + "/uhat/" + std::to_string(i)));
  }
  if (const Json* x0 = opt_member(j, path, "x0")) run.x0 = parse_vector(*x0, path + "/x0");
  if (const Json* xh = opt_member(j, path, "xhat0"))
    run.xhat0 = parse_vector(*xh, path + "/xhat0");
  if (const Json* th = opt_member(j, path, "theta0"))
    run.theta0 = parse_vector(*th, path + "/theta0");
  const auto number = [&](const char* key, double fallback) {
    const Json* field = opt_member(j, path, key);
    return field == nullptr ? fallback : as_number(*field, path + "/" + std::string(key));
  };
  run.dt = number("dt", run.dt);
  run.horizon = number("horizon", run.horizon);
  if (const Json* trials = opt_member(j, path, "trials"))
    run.trials = static_cast<int>(as_integer(*trials, path + "/trials"));
  if (const Json* seed = opt_member(j, path, "seed"))
    run.seed = as_seed(*seed, path + "/seed");
  run.tolerance = number("tolerance", run.tolerance);
  if (const Json* samples = opt_member(j, path, "samples"))
    run.samples = static_cast<int>(as_integer(*samples, path + "/samples"));
  run.sample_box = number("sample_box", run.sample_box);
  if (const Json* shared = opt_member(j, path, "shared_noise"))
    run.shared_noise = as_boolean(*shared, path + "/shared_noise");
  return run;
}

inline Json run_settings_to_json(const RunSettings& run) {
  Json j;
  j["network"] = run.network;
  Json uhat = Json::array();
  for (const InputSignal& s : run.uhat) uhat.push_back(signal_to_json(s));
  j["uhat"] = std::move(uhat);
  j["x0"] = vector_to_json(run.x0);
  j["xhat0"] = vector_to_json(run.xhat0);
  j["theta0"] = vector_to_json(run.theta0);
  j["dt"] = run.dt;
  j["horizon"] = run.horizon;
  j["trials"] = run.trials;
  j["seed"] = run.seed;
  j["tolerance"] = run.tolerance;
  j["samples"] = run.samples;
  j["sample_box"] = run.sample_box;
  j["shared_noise"] = run.shared_noise;
  return j;
}

}  // namespace detail

/// Parses a whole project tree, reporting schema violations with their
/// JSON-pointer-style path and rejecting dangling name references.
inline ProjectConfig parse_project(const Json& root) {
  if (!root.is_object()) detail::config_fail("", "expected a top-level object");
  ProjectConfig config;
  const Json& version = detail::member(root, "", "schema_version");
  config.schema_version =
      static_cast<int>(detail::as_integer(version, "/schema_version"));
  if (config.schema_version != 1)
    detail::config_fail("/schema_version",
                        "unsupported version " + std::to_string(config.schema_version));
  if (const Json* systems = detail::opt_member(root, "", "systems")) {
    if (!systems->is_object()) detail::config_fail("/systems", "expected an object");
    for (const auto& [name, j] : systems->items())
      config.systems.emplace(name, system_from_json(j, "/systems/" + name));
  }
  if (const Json* certs = detail::opt_member(root, "", "certificates")) {
    if (!certs->is_object()) detail::config_fail("/certificates", "expected an object");
    for (const auto& [name, j] : certs->items())
      config.certificates.emplace(name, certificate_from_json(j, "/certificates/" + name));
  }
  if (const Json* nets = detail::opt_member(root, "", "networks")) {
    if (!nets->is_object()) detail::config_fail("/networks", "expected an object");
    for (const auto& [name, j] : nets->items())
      config.networks.emplace(name,
                              detail::network_config_from_json(j, "/networks/" + name));
  }
  if (const Json* run = detail::opt_member(root, "", "run"))
    config.run = detail::run_settings_from_json(*run, "/run");

  // Reference resolution: every name a network or the run block mentions
  // must exist, otherwise the offending path is reported.
  for (const auto& [name, net] : config.networks) {
    const std::string base = "/networks/" + name;
    const auto check_names = [&](const std::vector<std::string>& list, const char* key,
                                 bool system_names) {
      for (std::size_t i = 0; i < list.size(); ++i) {
        const bool known = system_names ? config.systems.count(list[i]) > 0
                                        : config.certificates.count(list[i]) > 0;
        if (!known)
          detail::config_fail(base + "/" + key + "/" + std::to_string(i),
                              std::string("unknown ") +
                                  (system_names ? "system" : "certificate") + " \"" + list[i] +
                                  "\"");
      }
    };
    check_names(net.subsystems, "subsystems", true);
    check_names(net.abstractions, "abstractions", true);
    check_names(net.certificates, "certificates", false);
  }
  if (!config.run.network.empty()) {
    const auto it = config.networks.find(config.run.network);
    if (it == config.networks.end())
      detail::config_fail("/run/network",
                          "unknown network \"" + config.run.network + "\"");
    if (!config.run.uhat.empty() && config.run.uhat.size() != it->second.subsystems.size())
      detail::config_fail("/run/uhat",
                          "expected " + std::to_string(it->second.subsystems.size()) +
                              " signals (one per subsystem), got " +
                              std::to_string(config.run.uhat.size()));
  }
  return config;
}

inline Json to_json(const ProjectConfig& config) {
  Json root;
  root["schema_version"] = config.schema_version;
  Json systems = Json::object();
  for (const auto& [name, sys] : config.systems) systems[name] = system_to_json(sys);
  root["systems"] = std::move(systems);
  Json certs = Json::object();
  for (const auto& [name, cert] : config.certificates)
    certs[name] = certificate_to_json(cert);
  root["certificates"] = std::move(certs);
  Json nets = Json::object();
  for (const auto& [name, net] : config.networks)
    nets[name] = detail::network_config_to_json(net);
  root["networks"] = std::move(nets);
  root["run"] = detail::run_settings_to_json(config.run);
  return root;
}

/// Renders a project as pretty-printed JSON. The map ordering and the
/// shortest-round-trip float format make the output a deterministic function
/// of the config alone.
inline std::string config_to_text(const ProjectConfig& config) {
  return to_json(config).dump(2) + "\n";
}

/// Parses project text, mapping JSON syntax errors (which carry line and
/// column info) and schema violations to ConfigError.
inline ProjectConfig load_config_text(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::parse_error& error) {
    throw ConfigError(error.what());
  }
  return parse_project(root);
}

inline ProjectConfig load_config(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file.good()) throw ConfigError(path + ": cannot open file");
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return load_config_text(buffer.str());
}

inline void save_config(const ProjectConfig& config, const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file.good()) throw ConfigError(path + ": cannot open file for writing");
  file << config_to_text(config);
}

/// Resolves a named interconnection into concrete objects and validates it.
inline Interconnection instantiate_network(const ProjectConfig& config,
                                           const std::string& name) {
  const auto it = config.networks.find(name);
  if (it == config.networks.end())
    throw ConfigError("/networks/" + name + ": unknown network");
  const NetworkConfig& net = it->second;
  Interconnection result;
  for (const std::string& sys : net.subsystems) result.subsystems.push_back(config.systems.at(sys));
  for (const std::string& abs : net.abstractions)
    result.abstractions.push_back(config.systems.at(abs));
  for (const std::string& cert : net.certificates)
    result.certificates.push_back(config.certificates.at(cert));
  result.coupling = net.coupling;
  result.abstract_coupling = net.abstract_coupling;
  result.mu = net.mu;
  result.q_tilde = net.q_tilde;
  try {
    result.validate();
  } catch (const std::invalid_argument& error) {
    throw ConfigError("/networks/" + name + ": " + error.what());
  }
  return result;
}

/// Packs a built-in example scenario into a loadable project, naming parts
/// sub0..subN, sub0_hat..., cert0..., and the network "network".
inline ProjectConfig scenario_config(const ExampleScenario& scenario) {
  ProjectConfig config;
  NetworkConfig net;
  for (std::size_t i = 0; i < scenario.network.count(); ++i) {
    const std::string base = "sub" + std::to_string(i);
    config.systems.emplace(base, scenario.network.subsystems[i]);
    config.systems.emplace(base + "_hat", scenario.network.abstractions[i]);
    config.certificates.emplace("cert" + std::to_string(i), scenario.network.certificates[i]);
    net.subsystems.push_back(base);
    net.abstractions.push_back(base + "_hat");
    net.certificates.push_back("cert" + std::to_string(i));
  }
  net.coupling = scenario.network.coupling;
  net.abstract_coupling = scenario.network.abstract_coupling;
  net.mu = scenario.network.mu;
  net.q_tilde = scenario.network.q_tilde;
  config.networks.emplace("network", std::move(net));
  config.run.network = "network";
  config.run.uhat = scenario.uhat;
  config.run.x0 = scenario.x0;
  config.run.xhat0 = scenario.xhat0;
  config.run.theta0 = scenario.theta0;
  config.run.dt = scenario.run.dt;
  config.run.horizon = scenario.run.horizon;
  config.run.trials = scenario.run.trials;
  config.run.seed = scenario.run.seed;
  config.run.shared_noise = scenario.run.shared_noise;
  return config;
}

}  // namespace dissim
