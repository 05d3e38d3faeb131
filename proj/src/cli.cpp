#include "ddgrape/cli.hpp"

#include "ddgrape/harness.hpp"
#include "ddgrape/pulse_io.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

namespace ddgrape {
namespace {

namespace fs = std::filesystem;

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

std::vector<std::string> selected_schemes(const ExperimentConfig& config, const std::string& only) {
  if (only.empty()) return config.schemes;
  parse_scheme(only);
  return {only};
}

fs::path prepare_output(const ExperimentConfig& config) {
  fs::path dir(config.output_dir);
  fs::create_directories(dir);
  return dir;
}

void write_manifest(const ExperimentConfig& config, const std::string& command) {
  std::ofstream os(prepare_output(config) / ("manifest_" + command + ".json"));
  os << run_manifest(config, command).dump(2) << '\n';
}

template <typename Writer>
fs::path write_csv(const fs::path& path, Writer&& writer) {
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot write " + path.string());
  writer(os);
  return path;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

int cmd_optimize(const std::string& config_path, const std::string& scheme, bool no_cache, std::ostream& out,
                 std::ostream& err) {
  const ExperimentConfig config = load_config(config_path);
  const fs::path dir = prepare_output(config);
  std::vector<ProtectedGates> built;
  for (const auto& s : selected_schemes(config, scheme))
    built.push_back(build_scheme_gates(config, s, !no_cache, [&](const std::string& msg) { err << msg << '\n'; }));

  const fs::path path = write_csv(dir / "gates.csv", [&](std::ostream& os) {
    os << "scheme,target,fidelity,reached_goal,iterations,frozen_segments\n";
    for (const auto& g : built) {
      for (const SynthesizedGate* gate : {&g.oracle, &g.diffusion}) {
        os << g.scheme << ',' << gate->target << ',' << format_double(gate->report.fidelity) << ','
           << (gate->reached_goal ? 1 : 0) << ',' << gate->iterations << ',' << gate->pulse.frozen_count() << '\n';
      }
    }
  });
  write_manifest(config, "optimize");
  for (const auto& g : built) {
    if (!g.oracle.reached_goal || !g.diffusion.reached_goal)
      err << "warning: scheme " << g.scheme << " did not reach the fidelity goal for every gate\n";
  }
  out << path.string() << '\n';
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& scheme, const std::string& noise_name,
                 bool ideal, std::ostream& out) {
  const ExperimentConfig config = load_config(config_path);
  const NoiseEnsemble noise = noise_by_name(config, noise_name);
  const GroverGates gates = ideal ? ideal_gates(config.marked) : pulse_gates(load_protected_gates(config, scheme));
  const auto records = run_trajectory(config, gates, noise);
  const std::string name =
      "trajectory_" + (ideal ? std::string("ideal") : scheme_slug(scheme)) + "_" + scheme_slug(noise_name) + ".csv";
  const fs::path path =
      write_csv(prepare_output(config) / name, [&](std::ostream& os) { write_trajectory_csv(os, records); });
  write_manifest(config, "simulate");
  out << path.string() << '\n';
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& scheme, std::ostream& out) {
  const ExperimentConfig config = load_config(config_path);
  std::vector<SweepRow> rows;
  for (const auto& s : selected_schemes(config, scheme))
    for (auto& row : robustness_sweep_scheme(config, s, pulse_gates(load_protected_gates(config, s))))
      rows.push_back(row);
  const fs::path path =
      write_csv(prepare_output(config) / "sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, rows); });
  write_manifest(config, "sweep");
  out << path.string() << '\n';
  return 0;
}

int cmd_analyze(const std::string& config_path, bool raw, std::ostream& out) {
  const ExperimentConfig config = load_config(config_path);
  const auto ideal = ideal_records(config);
  std::vector<RmsRow> rows;
  for (const bool incoherent : {false, true}) {
    const NoiseEnsemble noise = incoherent ? config.incoherence() : NoiseEnsemble::identity();
    for (const auto& s : config.schemes) {
      const auto records = run_trajectory(config, pulse_gates(load_protected_gates(config, s)), noise);
      rows.push_back({rms_deviation(records, ideal, !raw, s), incoherent});
    }
  }
  const fs::path path =
      write_csv(prepare_output(config) / "rms.csv", [&](std::ostream& os) { write_rms_csv(os, rows); });
  write_manifest(config, "analyze");
  out << path.string() << '\n';
  return 0;
}

int cmd_discord(const std::string& state_path, std::optional<double> epsilon, std::ostream& out) {
  const DensityMatrix rho = read_state_file(state_path);
  const DiscordResult r = quantum_discord(rho, epsilon);
  out << "discord=" << fixed6(r.discord) << '\n'
      << "mutual_information=" << fixed6(r.mutual_information) << '\n'
      << "classical_correlation=" << fixed6(r.classical_correlation) << '\n'
      << "theta=" << fixed6(r.argmin_basis.theta) << '\n'
      << "phi=" << fixed6(r.argmin_basis.phi) << '\n';
  if (r.scaled_discord) out << "scaled_discord=" << fixed6(*r.scaled_discord) << '\n';
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"DD-protected GRAPE gates, Grover trajectories and quantum discord", "ddgrape"};
  app.set_version_flag("--version", DDGRAPE_VERSION);
  app.require_subcommand(1);

  std::string config_path;
  std::string scheme;
  std::string noise = "none";
  std::string state_path;
  std::optional<double> epsilon;
  bool no_cache = false;
  bool ideal = false;
  bool raw = false;

  auto* optimize = app.add_subcommand("optimize", "Synthesize (or reuse cached) protected oracle and diffusion pulses");
  optimize->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  optimize->add_option("--scheme", scheme, "Only this scheme (default: all configured)");
  optimize->add_flag("--no-cache", no_cache, "Ignore cached pulses");

  auto* simulate = app.add_subcommand("simulate", "Run a Grover trajectory and write its CSV");
  simulate->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  auto* scheme_opt = simulate->add_option("--scheme", scheme, "Scheme whose pulses implement the gates");
  simulate->add_option("--noise", noise, "none | incoherence | rfi | rfi+incoherence")->capture_default_str();
  simulate->add_flag("--ideal-gates", ideal, "Use ideal unitaries instead of pulses")->excludes(scheme_opt);

  auto* sweep = app.add_subcommand("sweep", "Flip-angle and phase robustness sweep");
  sweep->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--scheme", scheme, "Only this scheme (default: all configured)");

  auto* analyze = app.add_subcommand("analyze", "RMS deviation of each scheme's trajectory from the ideal one");
  analyze->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  analyze->add_flag("--raw", raw, "Do not normalize discord series by the ideal maximum");

  auto* discord = app.add_subcommand("discord", "Quantum discord of a two-qubit state file");
  discord->add_option("--state", state_path, "4x4 state file")->required()->check(CLI::ExistingFile);
  discord->add_option("--epsilon", epsilon, "Pseudopure polarization for the scaled value");

  if (argc <= 1) {
    err << app.help();
    return kUsageError;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << DDGRAPE_VERSION << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsageError;
  }
  if (simulate->parsed() && !ideal && scheme.empty()) {
    err << "error: simulate needs --scheme or --ideal-gates\n\n" << simulate->help();
    return kUsageError;
  }

  try {
    if (optimize->parsed()) return cmd_optimize(config_path, scheme, no_cache, out, err);
    if (simulate->parsed()) return cmd_simulate(config_path, scheme, noise, ideal, out);
    if (sweep->parsed()) return cmd_sweep(config_path, scheme, out);
    if (analyze->parsed()) return cmd_analyze(config_path, raw, out);
    if (discord->parsed()) return cmd_discord(state_path, epsilon, out);
  } catch (const MissingArtifact& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kRuntimeError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace ddgrape
