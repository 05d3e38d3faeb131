#pragma once

// Experiment orchestration: protected-gate synthesis with on-disk caching,
// noisy Grover trajectories, RMS comparisons against the ideal trajectory,
// and fidelity robustness sweeps.

#include "ddgrape/dd_schemes.hpp"
#include "ddgrape/discord.hpp"
#include "ddgrape/grape.hpp"
#include "ddgrape/grover.hpp"
#include "ddgrape/nmr_model.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ddgrape {

/// Raised for malformed or inconsistent configuration files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a step needs an artifact an earlier step should have written.
class MissingArtifact : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IncoherenceSpec {
  double range_hz = 10.0;
  int points = 21;
};

struct ErrorGrids {
  std::vector<double> flip_scale{0.95, 1.00, 1.05};
  std::vector<double> phase_offset{-0.17, 0.0, 0.17};
};

struct OptimizerSettings {
  std::string method = "lbfgs";  // "lbfgs" or "steepest"
  int lbfgs_memory = 20;
  int max_iterations = 4000;
  double fidelity_goal = 0.995;
  double initial_step = 0.0;
  double step_grow = 2.0;
  double step_shrink = 0.5;
  double min_step_ratio = 1e-6;
  double amplitude_fraction = 0.05;
  double omega_max = 0.0;  // rad/s; <= 0 means pi / dt
};

/// Desk-scale defaults: J scaled to 70 Hz with 1470 segments of 5.1 us so
/// that gate time times J matches the 7 Hz / ~75 ms laboratory gates.
struct ExperimentConfig {
  SystemParams system{436.0, -436.0, 70.0};
  double dt = 5.1e-6;
  int n_segments_per_gate = 1470;
  std::vector<std::string> schemes{"none", "xy:90:100", "xy:180:100", "xx:180:100", "xy:90:200"};
  double epsilon = 1.0;
  int iterations = 6;
  int marked = 1;
  std::vector<double> rfi_ensemble{0.90, 0.95, 1.00, 1.05, 1.10};
  IncoherenceSpec incoherence_ensemble;
  ErrorGrids error_grids;
  OptimizerSettings optimization;
  std::uint64_t seed = 2018;
  std::string output_dir = "ddgrape_out";

  void validate() const;
  double omega_max() const;
  NoiseEnsemble rfi() const;
  NoiseEnsemble incoherence() const;
  OptimizationConfig optimizer_config() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

struct SynthesizedGate {
  std::string target;  // "oracle" or "diffusion"
  PulseSequence pulse;
  FidelityReport report;
  bool reached_goal = false;
  int iterations = 0;
  bool from_cache = false;
};

struct ProtectedGates {
  std::string scheme;
  SynthesizedGate oracle;
  SynthesizedGate diffusion;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Cache file for one (scheme, target, seed).
std::filesystem::path pulse_cache_path(const ExperimentConfig& config, const std::string& scheme,
                                       const std::string& target);

/// Digest of every setting that influences a synthesized pulse.
std::string gate_fingerprint(const ExperimentConfig& config, const std::string& scheme,
                             const std::string& target);

/// place_dd -> freeze_into a seeded random pulse -> optimize, for the oracle
/// and the diffusion operator. Reuses a cached pulse when its fingerprint
/// matches; otherwise writes the new pulse and its iteration log.
ProtectedGates build_scheme_gates(const ExperimentConfig& config, const std::string& scheme,
                                  bool use_cache = true, const ProgressFn& progress = {});

std::map<std::string, ProtectedGates> build_protected_gates(const ExperimentConfig& config,
                                                            bool use_cache = true,
                                                            const ProgressFn& progress = {});

/// Loads cached gates; throws MissingArtifact if they were never built for
/// this configuration.
ProtectedGates load_protected_gates(const ExperimentConfig& config, const std::string& scheme);

/// Oracle and diffusion implementations used in a Grover run.
struct GroverGates {
  EvolutionStep oracle;
  EvolutionStep diffusion;
};

GroverGates ideal_gates(int marked);
GroverGates pulse_gates(const ProtectedGates& gates);

struct TrajectoryRecord {
  StageLabel stage;
  double marked_prob = 0.0;
  double discord = 0.0;
  double scaled_discord = 0.0;
};

/// Pseudopure start, ideal Hadamard pair, then `iterations` rounds of the
/// supplied oracle and diffusion evolved through the ensemble.
std::vector<TrajectoryRecord> run_trajectory(const ExperimentConfig& config, const GroverGates& gates,
                                             const NoiseEnsemble& noise);

/// Same stages evaluated with ideal unitaries and no noise.
std::vector<TrajectoryRecord> ideal_records(const ExperimentConfig& config);

struct RmsReport {
  std::string scheme;
  double rms_discord = 0.0;
  double rms_prob = 0.0;
};

/// Per-observable RMS over stages. With `normalize`, both discord series are
/// divided by the maximum of the ideal discord series first.
RmsReport rms_deviation(const std::vector<TrajectoryRecord>& records,
                        const std::vector<TrajectoryRecord>& ideal, bool normalize = true,
                        const std::string& scheme = {});

struct SweepRow {
  std::string scheme;
  std::string error_kind;  // "flip_angle" or "phase"
  double mean_fidelity = 0.0;
  double mean_fidelity_incoherent = 0.0;
};

/// Mean over the error grid of (1/n) sum_j F(U_PG^j, U_G^j), j = 1..n, with
/// n = config.iterations; the incoherent column also averages over the
/// incoherence ensemble.
std::vector<SweepRow> robustness_sweep_scheme(const ExperimentConfig& config, const std::string& scheme,
                                              const GroverGates& gates);

std::vector<SweepRow> robustness_sweep(const ExperimentConfig& config,
                                       const std::map<std::string, ProtectedGates>& gates);

NoiseEnsemble noise_by_name(const ExperimentConfig& config, const std::string& name);

void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryRecord>& records);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

struct RmsRow {
  RmsReport report;
  bool incoherence = false;
};
void write_rms_csv(std::ostream& os, const std::vector<RmsRow>& rows);

/// Config echo, seed and library versions.
nlohmann::json run_manifest(const ExperimentConfig& config, const std::string& command);

/// File-name-safe form of a descriptor: every non-alphanumeric character
/// becomes `_` (`xy:90:100` -> `xy_90_100`).
std::string scheme_slug(const std::string& scheme);

}  // namespace ddgrape
