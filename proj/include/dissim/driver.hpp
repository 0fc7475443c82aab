#pragma once

/// Command-line driver. Each subcommand loads (or generates) a project,
/// runs one workflow, prints per-condition margins, and always writes a
/// machine-readable report.json into the output directory.
///
/// Exit codes: 0 all checks passed, 1 verification failure, 2 configuration
/// or usage error, 3 numeric divergence.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include <dissim/config.hpp>
#include <dissim/csv.hpp>

namespace dissim {
namespace cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerificationFailed = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitDivergence = 3;

/// One verified condition: a numeric value compared against a threshold.
struct CheckLine {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Collected outcome of one subcommand run; serialized to report.json.
struct Report {
  std::string command;
  std::vector<CheckLine> checks;
  std::vector<std::string> artifacts;
  std::vector<std::string> warnings;
  std::vector<std::string> notes;
  std::string error;
  int exit_code = 0;

  bool all_passed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const CheckLine& c) { return c.passed; });
  }

  Json to_json() const {
    Json j;
    j["schema_version"] = 1;
    j["command"] = command;
    j["exit_code"] = exit_code;
    j["ok"] = exit_code == 0;
    Json lines = Json::array();
    for (const CheckLine& c : checks) {
      Json line;
      line["name"] = c.name;
      line["value"] = c.value;
      line["tolerance"] = c.tolerance;
      line["passed"] = c.passed;
      lines.push_back(std::move(line));
    }
    j["checks"] = std::move(lines);
    j["artifacts"] = artifacts;
    j["warnings"] = warnings;
    j["notes"] = notes;
    if (!error.empty()) j["error"] = error;
    return j;
  }
};

/// Command-line overrides layered over the loaded run settings.
struct Flags {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int trials = -1;
  double dt = -1.0;
  double horizon = -1.0;
  double tolerance = -1.0;
  bool shared_noise = false;
};

namespace detail {

inline std::string format_value(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.6g", value);
  return buffer;
}

inline void emit(Report& report, std::ostream& out, CheckLine line) {
  out << (line.passed ? "  [pass] " : "  [FAIL] ") << line.name << ": "
      << format_value(line.value) << " (threshold " << format_value(line.tolerance) << ")\n";
  report.checks.push_back(std::move(line));
}

inline void note(Report& report, std::ostream& out, const std::string& text) {
  out << "  " << text << "\n";
  report.notes.push_back(text);
}

inline void apply_flags(RunSettings& run, const Flags& flags) {
  if (flags.seed_set) run.seed = flags.seed;
  if (flags.trials > 0) run.trials = flags.trials;
  if (flags.dt > 0.0) run.dt = flags.dt;
  if (flags.horizon > 0.0) run.horizon = flags.horizon;
  if (flags.tolerance >= 0.0) run.tolerance = flags.tolerance;
  if (flags.shared_noise) run.shared_noise = true;
}

/// Resolves the network the run block names; with exactly one network in the
/// project the name may be omitted.
inline std::pair<std::string, Interconnection> resolve_network(const ProjectConfig& config) {
  std::string name = config.run.network;
  if (name.empty()) {
    if (config.networks.size() != 1)
      throw ConfigError("/run/network: missing and the project has " +
                        std::to_string(config.networks.size()) +
                        " networks; name one to run");
    name = config.networks.begin()->first;
  }
  return {name, instantiate_network(config, name)};
}

/// Initial-state vector of the requested length: empty means zero, anything
/// else must match exactly.
inline Vector sized_or_zero(const Vector& v, Eigen::Index length, const std::string& path) {
  if (v.size() == 0) return Vector::Zero(length);
  if (v.size() != length)
    throw ConfigError(path + ": expected length " + std::to_string(length) + ", got " +
                      std::to_string(v.size()));
  return v;
}

/// Abstract input signals: those of the run block, or zeros of each
/// abstraction's input dimension when the run block leaves them out.
inline std::vector<InputSignal> abstract_inputs(const ProjectConfig& config,
                                                const Interconnection& net) {
  if (config.run.uhat.empty()) {
    std::vector<InputSignal> zeros;
    for (const JumpDiffusionSystem& abstraction : net.abstractions)
      zeros.push_back(InputSignal::zero(abstraction.input_dim()));
    return zeros;
  }
  if (config.run.uhat.size() != net.count())
    throw ConfigError("/run/uhat: expected " + std::to_string(net.count()) +
                      " signals (one per subsystem), got " +
                      std::to_string(config.run.uhat.size()));
  for (std::size_t i = 0; i < net.count(); ++i)
    if (config.run.uhat[i].dimension() != net.abstractions[i].input_dim())
      throw ConfigError("/run/uhat/" + std::to_string(i) + ": dimension " +
                        std::to_string(config.run.uhat[i].dimension()) +
                        ", abstraction expects " +
                        std::to_string(net.abstractions[i].input_dim()));
  return config.run.uhat;
}

inline Eigen::Index total_state_dim(const std::vector<JumpDiffusionSystem>& parts) {
  Eigen::Index total = 0;
  for (const JumpDiffusionSystem& part : parts) total += part.state_dim();
  return total;
}

inline Eigen::Index total_theta_dim(const std::vector<StorageCertificate>& certs) {
  Eigen::Index total = 0;
  for (const StorageCertificate& cert : certs) total += cert.aux.state_dim();
  return total;
}

/// Writes text into the output directory and records the artifact.
inline void write_artifact(Report& report, const std::string& out_dir,
                           const std::string& filename, const std::string& text) {
  std::filesystem::create_directories(out_dir);
  const std::string path = (std::filesystem::path(out_dir) / filename).string();
  write_text_file(path, text);
  report.artifacts.push_back(path);
}

// ---------------------------------------------------------------------------
// Shared verification blocks

/// Certificate feasibility of every subsystem: block inequality, direct
/// supply term, coupling factorization, structural equations, gain budget,
/// and the sampled dissipation inequality.
inline void verify_certificates(const ProjectConfig& config, const Interconnection& net,
                                Report& report, std::ostream& out) {
  const double tol = config.run.tolerance;
  for (std::size_t i = 0; i < net.count(); ++i) {
    const std::string prefix = "subsystem " + std::to_string(i) + ": ";
    const JumpDiffusionSystem& sys = net.subsystems[i];
    const JumpDiffusionSystem& abstraction = net.abstractions[i];
    const StorageCertificate& cert = net.certificates[i];

    const AssumptionReport feasibility = check_assumption1(sys, cert, tol);
    emit(report, out,
         {prefix + "block inequality margin", feasibility.lmi.margin,
          feasibility.lmi.tolerance, feasibility.lmi.is_satisfied});
    emit(report, out,
         {prefix + "direct supply term (D2' X D2) margin", feasibility.supply_direct.margin,
          feasibility.supply_direct.tolerance, feasibility.supply_direct.is_satisfied});
    emit(report, out,
         {prefix + "internal-input factorization residual", feasibility.coupling_residual,
          feasibility.coupling_tolerance, feasibility.coupling_ok});

    const StructuralReport structure =
        check_structural_equations(sys, abstraction, cert, tol < 0.0 ? 1e-8 : tol);
    for (const StructuralResidual& eq : structure.equations)
      emit(report, out,
           {prefix + "structural " + eq.name + " residual", eq.residual,
            structure.tolerance * (1.0 + eq.scale), eq.ok});

    try {
      const GainSummary gains = gain_summary(sys, abstraction, cert);
      emit(report, out,
           {prefix + "decay budget kappa_tilde (positive required)", gains.kappa_tilde, 0.0,
            gains.kappa_tilde > 0.0});
      const DissipationReport dissipation =
          dissipation_check(sys, abstraction, cert, gains, config.run.samples,
                            config.run.sample_box, config.run.seed,
                            tol < 0.0 ? 1e-6 : tol);
      emit(report, out,
           {prefix + "sampled dissipation worst slack (>= -tolerance)",
            dissipation.worst_slack, -dissipation.tolerance,
            dissipation.is_satisfied});
    } catch (const std::invalid_argument& error) {
      report.warnings.push_back(prefix + error.what());
      emit(report, out, {prefix + "gain budget computable", 0.0, 0.0, false});
    }
  }
}

/// Network-level checks: compatibility inequality, auxiliary weight, and the
/// coupling matching condition.
inline void verify_network(const ProjectConfig& config, const Interconnection& net,
                           Report& report, std::ostream& out) {
  const double tol = config.run.tolerance;
  const InterconnectionReport lmi = check_interconnection_lmi(net, tol);
  emit(report, out,
       {"network compatibility margin", lmi.lmi.margin, lmi.lmi.tolerance,
        lmi.lmi.is_satisfied});
  emit(report, out,
       {"auxiliary weight positive semidefinite margin", lmi.weight.margin,
        lmi.weight.tolerance, lmi.weight.is_satisfied});
  const MatchingReport matching = check_matching_condition(net, tol < 0.0 ? 1e-8 : tol);
  emit(report, out,
       {"coupling matching residual", matching.residual, matching.tolerance,
        matching.is_satisfied});
}

/// Error-bound parameters of the configured run.
inline ErrorBoundParams bound_params(const ProjectConfig& config, const Interconnection& net,
                                     const std::vector<InputSignal>& uhat) {
  const GainSummary gains = network_gains(net);
  const Vector x0 =
      sized_or_zero(config.run.x0, total_state_dim(net.subsystems), "/run/x0");
  const Vector xhat0 =
      sized_or_zero(config.run.xhat0, total_state_dim(net.abstractions), "/run/xhat0");
  const Vector theta0 =
      sized_or_zero(config.run.theta0, total_theta_dim(net.certificates), "/run/theta0");
  ErrorBoundParams params;
  params.kappa_tilde = gains.kappa_tilde;
  params.alpha_slope = gains.alpha_slope;
  params.psi_slope = gains.psi_slope;
  params.offset = gains.offset();
  params.v0 = network_storage_value(net, x0, xhat0, theta0);
  params.uhat_sup_sq = input_sup_norm_sq(uhat, config.run.horizon, config.run.dt);
  return params;
}

// ---------------------------------------------------------------------------
// Subcommands

inline int cmd_simulate(const ProjectConfig& config, const Flags& flags, Report& report,
                        std::ostream& out) {
  const auto [name, net] = resolve_network(config);
  const JumpDiffusionSystem closed = compose(net.abstractions, net.abstract_coupling);
  const std::vector<InputSignal> uhat = abstract_inputs(config, net);
  const Vector xhat0 =
      sized_or_zero(config.run.xhat0, closed.state_dim(), "/run/xhat0");
  note(report, out,
       "closed abstract model of network \"" + name + "\": " +
           std::to_string(closed.state_dim()) + " states, horizon " +
           format_value(config.run.horizon) + ", dt " + format_value(config.run.dt));
  const Trajectory trajectory =
      simulate(closed, xhat0, InputSignal::stack(uhat), InputSignal::zero(0),
               config.run.horizon, config.run.dt, config.run.seed);
  for (const std::string& warning : trajectory.warnings) report.warnings.push_back(warning);
  write_artifact(report, flags.out_dir, "simulate.csv", trajectory_csv(trajectory));
  return kExitOk;
}

inline int cmd_verify_cert(const ProjectConfig& config, const Flags&, Report& report,
                           std::ostream& out) {
  const auto [name, net] = resolve_network(config);
  out << "certificate checks of network \"" << name << "\":\n";
  verify_certificates(config, net, report, out);
  return report.all_passed() ? kExitOk : kExitVerificationFailed;
}

inline int cmd_verify_net(const ProjectConfig& config, const Flags&, Report& report,
                          std::ostream& out) {
  const auto [name, net] = resolve_network(config);
  out << "network checks of \"" << name << "\":\n";
  verify_network(config, net, report, out);
  return report.all_passed() ? kExitOk : kExitVerificationFailed;
}

inline int cmd_abstract(const ProjectConfig& config, const Flags& flags, Report& report,
                        std::ostream& out) {
  const auto [name, net] = resolve_network(config);
  ProjectConfig artifact;
  for (std::size_t i = 0; i < net.count(); ++i) {
    const std::string prefix = "subsystem " + std::to_string(i) + ": ";
    const StorageCertificate& cert = net.certificates[i];
    AbstractionOptions options;
    if (cert.h.size() > 0) options.h = cert.h;
    if (cert.w_hat.size() > 0) options.w_hat = cert.w_hat;
    if (cert.l2.size() > 0) options.l2 = cert.l2;
    options.b_hat = net.abstractions[i].b;
    const AbstractionResult result =
        build_abstraction(net.subsystems[i], cert, options);
    for (const std::string& text : result.notes) report.notes.push_back(prefix + text);
    const double tol = config.run.tolerance < 0.0 ? 1e-8 : config.run.tolerance;
    emit(report, out,
         {prefix + "drift embedding residual", result.drift_residual,
          tol * (1.0 + net.subsystems[i].a.norm()), result.drift_residual <=
              tol * (1.0 + net.subsystems[i].a.norm())});
    const JumpDiffusionSystem& declared = net.abstractions[i];
    const JumpDiffusionSystem& built = result.abstraction;
    const double declared_gap =
        (built.a - declared.a).norm() + (built.b - declared.b).norm() +
        (built.c1 - declared.c1).norm() + (built.c2 - declared.c2).norm() +
        (built.d - declared.d).norm();
    emit(report, out,
         {prefix + "construction matches the declared abstraction", declared_gap, tol,
          declared_gap <= tol});
    artifact.systems.emplace("sub" + std::to_string(i) + "_hat_built", built);
    artifact.certificates.emplace("cert" + std::to_string(i) + "_completed",
                                  result.certificate);
  }
  write_artifact(report, flags.out_dir, "abstract_" + name + ".json",
                 config_to_text(artifact));
  return report.all_passed() ? kExitOk : kExitVerificationFailed;
}

inline int cmd_compose(const ProjectConfig& config, const Flags& flags, Report& report,
                       std::ostream& out) {
  const auto [name, net] = resolve_network(config);
  ProjectConfig artifact;
  const JumpDiffusionSystem closed = compose(net.subsystems, net.coupling);
  const JumpDiffusionSystem closed_hat = compose(net.abstractions, net.abstract_coupling);
  artifact.systems.emplace(name + "_closed", closed);
  artifact.systems.emplace(name + "_closed_hat", closed_hat);
  note(report, out,
       "composed \"" + name + "\": concrete " + std::to_string(closed.state_dim()) +
           " states, abstract " + std::to_string(closed_hat.state_dim()) + " states");
  write_artifact(report, flags.out_dir, "composed_" + name + ".json",
                 config_to_text(artifact));
  return kExitOk;
}

inline int cmd_bound(const ProjectConfig& config, const Flags& flags, Report& report,
                     std::ostream& out) {
  const auto [name, net] = resolve_network(config);
  const std::vector<InputSignal> uhat = abstract_inputs(config, net);
  const ErrorBoundParams params = bound_params(config, net, uhat);
  note(report, out, "network \"" + name + "\": kappa_tilde " +
                        format_value(params.kappa_tilde) + ", alpha slope " +
                        format_value(params.alpha_slope) + ", psi slope " +
                        format_value(params.psi_slope) + ", offset " +
                        format_value(params.offset));
  note(report, out, "initial storage " + format_value(params.v0) +
                        ", abstract input sup norm squared " +
                        format_value(params.uhat_sup_sq));
  emit(report, out,
       {"decay budget kappa_tilde (positive required)", params.kappa_tilde, 0.0,
        params.kappa_tilde > 0.0});
  emit(report, out,
       {"output lower bound slope (positive required)", params.alpha_slope, 0.0,
        params.alpha_slope > 0.0});
  if (!report.all_passed()) return kExitVerificationFailed;
  const long steps = step_count(config.run.horizon, config.run.dt);
  std::vector<double> times(static_cast<std::size_t>(steps) + 1);
  std::vector<double> bound(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    times[k] = static_cast<double>(k) * config.run.dt;
    bound[k] = error_bound(params, times[k]);
  }
  write_artifact(report, flags.out_dir, "bound.csv", bound_csv(times, bound));
  return kExitOk;
}

inline int cmd_mc_validate(const ProjectConfig& config, const Flags& flags, Report& report,
                           std::ostream& out, const std::string& csv_name = "mc_validate.csv") {
  const auto [name, net] = resolve_network(config);
  const std::vector<InputSignal> uhat = abstract_inputs(config, net);
  CoSimulationOptions options;
  options.horizon = config.run.horizon;
  options.dt = config.run.dt;
  options.trials = config.run.trials;
  options.seed = config.run.seed;
  options.shared_noise = config.run.shared_noise;
  const Vector x0 =
      sized_or_zero(config.run.x0, total_state_dim(net.subsystems), "/run/x0");
  const Vector xhat0 =
      sized_or_zero(config.run.xhat0, total_state_dim(net.abstractions), "/run/xhat0");
  const Vector theta0 =
      sized_or_zero(config.run.theta0, total_theta_dim(net.certificates), "/run/theta0");
  note(report, out,
       "co-simulating network \"" + name + "\": " + std::to_string(options.trials) +
           " trials, horizon " + format_value(options.horizon) + ", dt " +
           format_value(options.dt) + ", seed " + std::to_string(options.seed) +
           (options.shared_noise ? ", shared noise" : ""));
  const MonteCarloResult result =
      monte_carlo_error(net, uhat, x0, xhat0, theta0, options);
  for (const std::string& warning : result.warnings) report.warnings.push_back(warning);
  double worst_excess = 0.0;
  for (std::size_t k = 0; k < result.times.size(); ++k)
    worst_excess = std::max(worst_excess, result.mean_sq_error[k] -
                                              3.0 * result.stderr_mean[k] - result.bound[k]);
  emit(report, out,
       {"empirical mean minus three standard errors stays below the bound (worst excess)",
        worst_excess, 0.0, result.bound_satisfied});
  emit(report, out,
       {"discarded trials (at most one percent)", static_cast<double>(result.discarded),
        0.01 * result.trials_requested, result.discard_ok});
  note(report, out, "peak empirical mean squared error " +
                        format_value(*std::max_element(result.mean_sq_error.begin(),
                                                       result.mean_sq_error.end())) +
                        ", bound at the horizon " + format_value(result.bound.back()));
  write_artifact(report, flags.out_dir, csv_name, monte_carlo_csv(result));
  if (!result.discard_ok) return kExitDivergence;
  return result.bound_satisfied ? kExitOk : kExitVerificationFailed;
}

/// Full pipeline of a bundled example: emit its project file, verify the
/// certificates and the network, compare the mechanical construction against
/// the published reference tuple, compute the bound, and co-simulate.
inline int cmd_example(const ExampleScenario& scenario, const Flags& flags, Report& report,
                       std::ostream& out) {
  ProjectConfig config = scenario_config(scenario);
  // The emitted project documents the canonical scenario; command-line
  // overrides only shape the present run.
  write_artifact(report, flags.out_dir, scenario.name + ".json", config_to_text(config));
  apply_flags(config.run, flags);

  out << "construction cross-check:\n";
  for (const std::string& text : compare_to_reference(scenario)) {
    report.notes.push_back(text);
    out << "  note: " << text << "\n";
  }
  for (std::size_t i = 0; i < scenario.constructions.size(); ++i)
    for (const std::string& text : scenario.constructions[i].notes)
      report.notes.push_back("subsystem " + std::to_string(i) + ": " + text);

  const auto [name, net] = resolve_network(config);
  out << "certificate checks:\n";
  verify_certificates(config, net, report, out);
  out << "network checks:\n";
  verify_network(config, net, report, out);

  out << "moment error bound:\n";
  const int mc_exit = cmd_mc_validate(config, flags, report, out, scenario.name + "_mc.csv");
  if (mc_exit == kExitDivergence) return kExitDivergence;
  return report.all_passed() ? kExitOk : kExitVerificationFailed;
}

}  // namespace detail

/// Runs the command line given as (argv-style) arguments, writing human
/// output to `out` and errors to `err`. Always writes report.json into the
/// output directory, whatever the outcome.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{
      "Verification, abstraction, and Monte Carlo validation of interconnected\n"
      "jump-diffusion models with storage-function certificates."};
  Flags flags;
  app.add_option("--config", flags.config_path, "Project file (JSON)");
  app.add_option("--out", flags.out_dir, "Output directory for CSV files and report.json")
      ->capture_default_str();
  auto* seed_option =
      app.add_option("--seed", flags.seed, "Override the run seed (unsigned 64-bit)");
  app.add_option("--trials", flags.trials, "Override the Monte Carlo trial count");
  app.add_option("--dt", flags.dt, "Override the step size");
  app.add_option("--horizon", flags.horizon, "Override the time horizon");
  app.add_option("--tol", flags.tolerance, "Override the verification tolerance");
  app.add_flag("--shared-noise", flags.shared_noise,
               "Drive the abstract side with the concrete noise draws (diagnostic; the "
               "default and the theory use independent noise)");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "Simulate one path of the closed abstract model under the configured "
                   "abstract input and write simulate.csv"},
      {"verify-cert", "Check every subsystem certificate: block inequality, direct supply "
                      "term, factorization, structural equations, and sampled dissipation"},
      {"verify-net", "Check the network compatibility inequality and the coupling "
                     "matching condition"},
      {"abstract", "Rebuild each abstraction from its certificate and write the completed "
                   "abstraction plus certificate JSON"},
      {"compose", "Fold the coupled subsystems (and abstractions) into closed models and "
                  "write them as a project file"},
      {"bound", "Evaluate the closed-form moment error bound on the run grid and write "
                "bound.csv"},
      {"mc-validate", "Paired Monte Carlo co-simulation against the moment error bound; "
                      "writes mc_validate.csv"},
      {"example1", "Built-in three-room network (nine states, jumps, noise, sine "
                   "nonlinearity): full construct/verify/validate pipeline. The abstract "
                   "input is supplied by the scenario as a piecewise-constant signal; "
                   "external controller synthesis is out of scope"},
      {"example2", "Built-in three coupled twenty-state chains with auxiliary dynamics: "
                   "full pipeline. Its subsystem certificate is known to fail the block "
                   "inequality; the run reports this honestly and continues"},
  };
  for (const auto& [cmd_name, description] : commands)
    app.add_subcommand(cmd_name, description)->fallthrough();
  app.require_subcommand(0, 1);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& help) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& error) {
    err << "usage error: " << error.what() << "\n";
    return kExitConfigError;
  }
  flags.seed_set = seed_option->count() > 0;

  const std::vector<CLI::App*> chosen = app.get_subcommands();
  if (chosen.empty()) {
    out << app.help();
    return kExitOk;
  }
  const std::string command = chosen.front()->get_name();

  Report report;
  report.command = command;
  int exit_code = kExitOk;
  try {
    if (command == "example1" || command == "example2") {
      exit_code = detail::cmd_example(command == "example1" ? example1() : example2(), flags,
                                      report, out);
    } else {
      if (flags.config_path.empty())
        throw ConfigError("--config: required for the " + command + " subcommand");
      ProjectConfig config = load_config(flags.config_path);
      detail::apply_flags(config.run, flags);
      if (command == "simulate") exit_code = detail::cmd_simulate(config, flags, report, out);
      else if (command == "verify-cert")
        exit_code = detail::cmd_verify_cert(config, flags, report, out);
      else if (command == "verify-net")
        exit_code = detail::cmd_verify_net(config, flags, report, out);
      else if (command == "abstract")
        exit_code = detail::cmd_abstract(config, flags, report, out);
      else if (command == "compose")
        exit_code = detail::cmd_compose(config, flags, report, out);
      else if (command == "bound") exit_code = detail::cmd_bound(config, flags, report, out);
      else if (command == "mc-validate")
        exit_code = detail::cmd_mc_validate(config, flags, report, out);
    }
  } catch (const ConfigError& error) {
    err << "config error: " << error.what() << "\n";
    report.error = error.what();
    exit_code = kExitConfigError;
  } catch (const DivergenceError& error) {
    err << "numeric divergence: " << error.what() << "\n";
    report.error = error.what();
    exit_code = kExitDivergence;
  } catch (const std::invalid_argument& error) {
    const std::string what = error.what();
    const bool divergence = what.find("diverged") != std::string::npos;
    err << (divergence ? "numeric divergence: " : "config error: ") << what << "\n";
    report.error = what;
    exit_code = divergence ? kExitDivergence : kExitConfigError;
  }
  report.exit_code = exit_code;

  const std::string summary =
      command + ": " + (exit_code == kExitOk ? "ok" : "failed (exit " +
                                                          std::to_string(exit_code) + ")");
  out << summary << "\n";
  try {
    detail::write_artifact(report, flags.out_dir, "report.json",
                           report.to_json().dump(2) + "\n");
  } catch (const std::exception& error) {
    err << "cannot write report.json: " << error.what() << "\n";
  }
  return exit_code;
}

/// argv adapter of run_cli.
inline int run_main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(std::move(args), std::cout, std::cerr);
}

}  // namespace cli
}  // namespace dissim
