#include "ddgrape/harness.hpp"

#include "ddgrape/parallel.hpp"
#include "ddgrape/pulse_io.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#ifndef DDGRAPE_VERSION
#define DDGRAPE_VERSION "unknown"
#endif

namespace ddgrape {
namespace {

using nlohmann::json;

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) { return key == k; }) == known.end())
      throw ConfigError("unknown config key '" + key + "' in " + where);
  }
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

Unitary target_unitary(const ExperimentConfig& config, const std::string& target) {
  if (target == "oracle") return oracle_unitary(config.marked);
  if (target == "diffusion") return diffusion_unitary();
  throw ValidationError("unknown gate target '" + target + "'");
}

std::uint64_t target_seed(const ExperimentConfig& config, const std::string& target) {
  return config.seed + (target == "oracle" ? 0u : 1u);
}

SynthesizedGate synthesize(const ExperimentConfig& config, const std::string& scheme, const std::string& target,
                           bool use_cache, const ProgressFn& progress) {
  const auto path = pulse_cache_path(config, scheme, target);
  const std::string fingerprint = gate_fingerprint(config, scheme, target);
  const TargetGate goal{target_unitary(config, target), target};
  const NoiseEnsemble rfi = config.rfi();

  if (use_cache && std::filesystem::exists(path)) {
    PulseFile cached = read_pulse_file(path);
    if (cached.metadata["fingerprint"] == fingerprint) {
      SynthesizedGate gate;
      gate.target = target;
      gate.pulse = std::move(cached.pulse);
      gate.report = robust_fidelity(gate.pulse, goal, config.system, rfi);
      gate.reached_goal = gate.report.fidelity >= config.optimization.fidelity_goal;
      gate.iterations = std::stoi(cached.metadata.count("iterations") ? cached.metadata["iterations"] : "0");
      gate.from_cache = true;
      if (progress) progress(scheme + " " + target + ": cached, F=" + format_double(gate.report.fidelity));
      return gate;
    }
  }

  PulseSequence initial = random_initial_pulse(static_cast<std::size_t>(config.n_segments_per_gate), config.dt,
                                               config.omega_max(), config.optimization.amplitude_fraction,
                                               target_seed(config, target));
  if (const auto dd = parse_scheme(scheme)) initial = freeze_into(initial, place_dd(initial.size(), *dd));

  OptimizationResult result = optimize(initial, goal, config.system, config.optimizer_config());

  SynthesizedGate gate;
  gate.target = target;
  gate.pulse = std::move(result.pulse);
  gate.report = std::move(result.report);
  gate.reached_goal = result.reached_goal;
  gate.iterations = result.iterations;

  write_pulse_file(path, gate.pulse,
                   {{"fingerprint", fingerprint},
                    {"scheme", scheme},
                    {"target", target},
                    {"seed", std::to_string(config.seed)},
                    {"iterations", std::to_string(result.iterations)},
                    {"fidelity", format_double(gate.report.fidelity)}});
  auto log_path = std::filesystem::path(config.output_dir) / "logs" /
                  (scheme_slug(scheme) + "_" + target + "_seed" + std::to_string(config.seed) + ".csv");
  std::filesystem::create_directories(log_path.parent_path());
  std::ofstream log(log_path);
  write_iteration_log(log, result.log);

  if (progress) {
    progress(scheme + " " + target + ": F=" + format_double(gate.report.fidelity) + " after " +
             std::to_string(result.iterations) + " iterations" + (gate.reached_goal ? "" : " (goal not reached)"));
  }
  return gate;
}

double mean_iterate_fidelity(const Unitary& protected_iterate, const Unitary& ideal_iterate, int iterations) {
  double sum = 0.0;
  Unitary achieved = Unitary::Identity();
  Unitary ideal = Unitary::Identity();
  for (int j = 1; j <= iterations; ++j) {
    achieved = protected_iterate * achieved;
    ideal = ideal_iterate * ideal;
    sum += gate_fidelity(achieved, ideal);
  }
  return sum / iterations;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!std::isfinite(system.offset1_hz) || !std::isfinite(system.offset2_hz) || !std::isfinite(system.coupling_hz))
    throw ConfigError("system parameters must be finite");
  if (system.coupling_hz < 0.0) throw ConfigError("coupling must be non-negative");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (n_segments_per_gate < 1) throw ConfigError("n_segments_per_gate must be positive");
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (marked < 0 || marked > 3) throw ConfigError("marked must be in 0..3");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in (0, 1]");
  if (schemes.empty()) throw ConfigError("at least one scheme is required");
  for (const auto& s : schemes) {
    std::optional<DDScheme> parsed;
    try {
      parsed = parse_scheme(s);
    } catch (const ValidationError& e) {
      throw ConfigError(e.what());
    }
    if (parsed && parsed->spacing > n_segments_per_gate)
      throw ConfigError("scheme " + s + " spacing exceeds n_segments_per_gate");
    if (parsed && parsed->flip_rad() / dt > omega_max() * (1.0 + 1e-12))
      throw ConfigError("scheme " + s + " needs more amplitude than omega_max");
  }
  if (rfi_ensemble.empty()) throw ConfigError("rfi_ensemble needs at least one rf_scale");
  for (double s : rfi_ensemble)
    if (!(s > 0.0)) throw ConfigError("rf_scales must be positive");
  if (incoherence_ensemble.points < 1) throw ConfigError("incoherence_ensemble.points must be >= 1");
  if (error_grids.flip_scale.empty() || error_grids.phase_offset.empty())
    throw ConfigError("error grids must be non-empty");
  if (optimization.method != "lbfgs" && optimization.method != "steepest")
    throw ConfigError("optimization.method must be \"lbfgs\" or \"steepest\"");
  if (optimization.lbfgs_memory < 1) throw ConfigError("optimization.lbfgs_memory must be >= 1");
  if (!(optimization.amplitude_fraction >= 0.0 && optimization.amplitude_fraction <= 1.0))
    throw ConfigError("optimization.amplitude_fraction must lie in [0, 1]");
  try {
    optimizer_config().validate();
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
}

double ExperimentConfig::omega_max() const { return optimization.omega_max > 0.0 ? optimization.omega_max : kPi / dt; }

NoiseEnsemble ExperimentConfig::rfi() const { return NoiseEnsemble::rf_inhomogeneity(rfi_ensemble); }

NoiseEnsemble ExperimentConfig::incoherence() const {
  return NoiseEnsemble::uniform_offsets(incoherence_ensemble.range_hz, incoherence_ensemble.points);
}

OptimizationConfig ExperimentConfig::optimizer_config() const {
  OptimizationConfig c;
  c.method = optimization.method == "steepest" ? AscentMethod::Steepest : AscentMethod::Lbfgs;
  c.lbfgs_memory = optimization.lbfgs_memory;
  c.max_iterations = optimization.max_iterations;
  c.fidelity_goal = optimization.fidelity_goal;
  c.initial_step = optimization.initial_step;
  c.step_grow = optimization.step_grow;
  c.step_shrink = optimization.step_shrink;
  c.min_step_ratio = optimization.min_step_ratio;
  c.rfi_ensemble = rfi();
  c.seed = seed;
  c.omega_max = omega_max();
  return c;
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown_keys(j,
                      {"system", "dt", "n_segments_per_gate", "schemes", "epsilon", "iterations", "marked",
                       "rfi_ensemble", "incoherence_ensemble", "error_grids", "optimization", "seed", "output_dir"},
                      "config");
  ExperimentConfig c;
  if (j.contains("system")) {
    const json& s = j.at("system");
    reject_unknown_keys(s, {"offset1", "offset2", "coupling"}, "system");
    read_field(s, "offset1", c.system.offset1_hz);
    read_field(s, "offset2", c.system.offset2_hz);
    read_field(s, "coupling", c.system.coupling_hz);
  }
  read_field(j, "dt", c.dt);
  read_field(j, "n_segments_per_gate", c.n_segments_per_gate);
  read_field(j, "schemes", c.schemes);
  read_field(j, "epsilon", c.epsilon);
  read_field(j, "iterations", c.iterations);
  read_field(j, "marked", c.marked);
  if (j.contains("rfi_ensemble")) {
    const json& r = j.at("rfi_ensemble");
    reject_unknown_keys(r, {"rf_scales"}, "rfi_ensemble");
    read_field(r, "rf_scales", c.rfi_ensemble);
  }
  if (j.contains("incoherence_ensemble")) {
    const json& r = j.at("incoherence_ensemble");
    reject_unknown_keys(r, {"range_hz", "points"}, "incoherence_ensemble");
    read_field(r, "range_hz", c.incoherence_ensemble.range_hz);
    read_field(r, "points", c.incoherence_ensemble.points);
  }
  if (j.contains("error_grids")) {
    const json& g = j.at("error_grids");
    reject_unknown_keys(g, {"flip_scale", "phase_offset"}, "error_grids");
    read_field(g, "flip_scale", c.error_grids.flip_scale);
    read_field(g, "phase_offset", c.error_grids.phase_offset);
  }
  if (j.contains("optimization")) {
    const json& o = j.at("optimization");
    reject_unknown_keys(o,
                        {"method", "lbfgs_memory", "max_iterations", "fidelity_goal", "initial_step", "step_grow", "step_shrink",
                         "min_step_ratio", "amplitude_fraction", "omega_max"},
                        "optimization");
    read_field(o, "method", c.optimization.method);
    read_field(o, "lbfgs_memory", c.optimization.lbfgs_memory);
    read_field(o, "max_iterations", c.optimization.max_iterations);
    read_field(o, "fidelity_goal", c.optimization.fidelity_goal);
    read_field(o, "initial_step", c.optimization.initial_step);
    read_field(o, "step_grow", c.optimization.step_grow);
    read_field(o, "step_shrink", c.optimization.step_shrink);
    read_field(o, "min_step_ratio", c.optimization.min_step_ratio);
    read_field(o, "amplitude_fraction", c.optimization.amplitude_fraction);
    read_field(o, "omega_max", c.optimization.omega_max);
  }
  read_field(j, "seed", c.seed);
  read_field(j, "output_dir", c.output_dir);
  c.validate();
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  return json{
      {"system", {{"offset1", c.system.offset1_hz}, {"offset2", c.system.offset2_hz}, {"coupling", c.system.coupling_hz}}},
      {"dt", c.dt},
      {"n_segments_per_gate", c.n_segments_per_gate},
      {"schemes", c.schemes},
      {"epsilon", c.epsilon},
      {"iterations", c.iterations},
      {"marked", c.marked},
      {"rfi_ensemble", {{"rf_scales", c.rfi_ensemble}}},
      {"incoherence_ensemble", {{"range_hz", c.incoherence_ensemble.range_hz}, {"points", c.incoherence_ensemble.points}}},
      {"error_grids", {{"flip_scale", c.error_grids.flip_scale}, {"phase_offset", c.error_grids.phase_offset}}},
      {"optimization",
       {{"method", c.optimization.method},
        {"lbfgs_memory", c.optimization.lbfgs_memory},
        {"max_iterations", c.optimization.max_iterations},
        {"fidelity_goal", c.optimization.fidelity_goal},
        {"initial_step", c.optimization.initial_step},
        {"step_grow", c.optimization.step_grow},
        {"step_shrink", c.optimization.step_shrink},
        {"min_step_ratio", c.optimization.min_step_ratio},
        {"amplitude_fraction", c.optimization.amplitude_fraction},
        {"omega_max", c.optimization.omega_max}}},
      {"seed", c.seed},
      {"output_dir", c.output_dir},
  };
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

std::string scheme_slug(const std::string& scheme) {
  std::string out = scheme;
  for (char& c : out)
    if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
  return out;
}

std::filesystem::path pulse_cache_path(const ExperimentConfig& config, const std::string& scheme,
                                       const std::string& target) {
  return std::filesystem::path(config.output_dir) / "pulses" /
         (scheme_slug(scheme) + "_" + target + "_seed" + std::to_string(config.seed) + ".pulse");
}

std::string gate_fingerprint(const ExperimentConfig& config, const std::string& scheme, const std::string& target) {
  std::ostringstream os;
  const auto& o = config.optimization;
  os << format_scheme(parse_scheme(scheme)) << '|' << target << '|' << config.seed << '|'
     << format_double(config.system.offset1_hz) << ',' << format_double(config.system.offset2_hz) << ','
     << format_double(config.system.coupling_hz) << '|' << format_double(config.dt) << '|'
     << config.n_segments_per_gate << '|' << (target == "oracle" ? config.marked : -1) << '|';
  for (double s : config.rfi_ensemble) os << format_double(s) << ',';
  os << '|' << o.method << ',' << o.lbfgs_memory << ',' << o.max_iterations << ',' << format_double(o.fidelity_goal) << ',' << format_double(o.initial_step) << ','
     << format_double(o.step_grow) << ',' << format_double(o.step_shrink) << ',' << format_double(o.min_step_ratio)
     << ',' << format_double(o.amplitude_fraction) << ',' << format_double(config.omega_max());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(os.str())));
  return buf;
}

ProtectedGates build_scheme_gates(const ExperimentConfig& config, const std::string& scheme, bool use_cache,
                                  const ProgressFn& progress) {
  config.validate();
  ProtectedGates gates;
  gates.scheme = scheme;
  gates.oracle = synthesize(config, scheme, "oracle", use_cache, progress);
  gates.diffusion = synthesize(config, scheme, "diffusion", use_cache, progress);
  return gates;
}

std::map<std::string, ProtectedGates> build_protected_gates(const ExperimentConfig& config, bool use_cache,
                                                            const ProgressFn& progress) {
  std::map<std::string, ProtectedGates> out;
  for (const auto& scheme : config.schemes) out[scheme] = build_scheme_gates(config, scheme, use_cache, progress);
  return out;
}

ProtectedGates load_protected_gates(const ExperimentConfig& config, const std::string& scheme) {
  ProtectedGates gates;
  gates.scheme = scheme;
  for (const std::string target : {"oracle", "diffusion"}) {
    const auto path = pulse_cache_path(config, scheme, target);
    if (!std::filesystem::exists(path))
      throw MissingArtifact("no " + target + " pulse for scheme " + scheme + " at " + path.string() +
                            "; run the optimize step first");
    PulseFile file = read_pulse_file(path);
    if (file.metadata["fingerprint"] != gate_fingerprint(config, scheme, target))
      throw MissingArtifact("cached " + target + " pulse for scheme " + scheme +
                            " was built with a different configuration; rerun the optimize step");
    SynthesizedGate& gate = target == "oracle" ? gates.oracle : gates.diffusion;
    gate.target = target;
    gate.pulse = std::move(file.pulse);
    gate.from_cache = true;
    gate.iterations = file.metadata.count("iterations") ? std::stoi(file.metadata["iterations"]) : 0;
  }
  return gates;
}

GroverGates ideal_gates(int marked) { return {oracle_unitary(marked), diffusion_unitary()}; }

GroverGates pulse_gates(const ProtectedGates& gates) { return {gates.oracle.pulse, gates.diffusion.pulse}; }

std::vector<TrajectoryRecord> run_trajectory(const ExperimentConfig& config, const GroverGates& gates,
                                             const NoiseEnsemble& noise) {
  const DensityMatrix rho0 = pseudopure_state(config.epsilon);
  std::vector<EvolutionStep> steps;
  steps.emplace_back(hadamard_pair());
  for (int r = 0; r < config.iterations; ++r) {
    steps.push_back(gates.oracle);
    steps.push_back(gates.diffusion);
  }
  std::vector<DensityMatrix> states{rho0};
  for (auto& rho : evolve_ensemble(rho0, steps, config.system, noise, true)) states.push_back(std::move(rho));

  const auto labels = stage_labels(config.iterations);
  std::vector<TrajectoryRecord> out(states.size());
  parallel_for(states.size(), [&](std::size_t k) {
    const DiscordResult d = quantum_discord(states[k], config.epsilon);
    out[k] = {labels[k], marked_probability(states[k], config.marked), d.discord, d.scaled_discord.value_or(0.0)};
  });
  return out;
}

std::vector<TrajectoryRecord> ideal_records(const ExperimentConfig& config) {
  return run_trajectory(config, ideal_gates(config.marked), NoiseEnsemble::identity());
}

RmsReport rms_deviation(const std::vector<TrajectoryRecord>& records, const std::vector<TrajectoryRecord>& ideal,
                        bool normalize, const std::string& scheme) {
  if (records.size() != ideal.size()) throw ValidationError("rms_deviation: series lengths differ");
  if (records.empty()) throw ValidationError("rms_deviation: empty series");
  double scale = 1.0;
  if (normalize) {
    double peak = 0.0;
    for (const auto& r : ideal) peak = std::max(peak, r.discord);
    if (peak > 0.0) scale = 1.0 / peak;
  }
  double sum_d = 0.0;
  double sum_p = 0.0;
  for (std::size_t k = 0; k < records.size(); ++k) {
    const double dd = scale * (records[k].discord - ideal[k].discord);
    const double dp = records[k].marked_prob - ideal[k].marked_prob;
    sum_d += dd * dd;
    sum_p += dp * dp;
  }
  const double n = static_cast<double>(records.size());
  return {scheme, std::sqrt(sum_d / n), std::sqrt(sum_p / n)};
}

std::vector<SweepRow> robustness_sweep_scheme(const ExperimentConfig& config, const std::string& scheme,
                                              const GroverGates& gates) {
  const Unitary ideal_iterate = grover_iterate(config.marked);
  const NoiseEnsemble incoherence = config.incoherence();

  struct Kind {
    const char* name;
    const std::vector<double>* grid;
    bool is_flip;
  };
  const Kind kinds[] = {{"flip_angle", &config.error_grids.flip_scale, true},
                        {"phase", &config.error_grids.phase_offset, false}};

  std::vector<SweepRow> rows;
  for (const auto& kind : kinds) {
    const std::size_t n_grid = kind.grid->size();
    const std::size_t n_inc = incoherence.size();
    // Slot 0 of each grid point is the noiseless-field evaluation; slots
    // 1..n_inc are the incoherence members.
    std::vector<double> values(n_grid * (n_inc + 1));
    parallel_for(values.size(), [&](std::size_t idx) {
      const std::size_t g = idx / (n_inc + 1);
      const std::size_t m = idx % (n_inc + 1);
      NoiseRealization noise;
      if (kind.is_flip)
        noise.flip_scale = (*kind.grid)[g];
      else
        noise.phase_offset = (*kind.grid)[g];
      if (m > 0) noise.offset_shift_hz = incoherence.realizations[m - 1].offset_shift_hz;
      const Unitary iterate = step_propagator(gates.diffusion, config.system, noise) *
                              step_propagator(gates.oracle, config.system, noise);
      values[idx] = mean_iterate_fidelity(iterate, ideal_iterate, config.iterations);
    });
    SweepRow row{scheme, kind.name, 0.0, 0.0};
    for (std::size_t g = 0; g < n_grid; ++g) {
      row.mean_fidelity += values[g * (n_inc + 1)];
      double inc = 0.0;
      for (std::size_t m = 0; m < n_inc; ++m) inc += incoherence.realizations[m].weight * values[g * (n_inc + 1) + m + 1];
      row.mean_fidelity_incoherent += inc;
    }
    row.mean_fidelity /= static_cast<double>(n_grid);
    row.mean_fidelity_incoherent /= static_cast<double>(n_grid);
    rows.push_back(row);
  }
  return rows;
}

std::vector<SweepRow> robustness_sweep(const ExperimentConfig& config,
                                       const std::map<std::string, ProtectedGates>& gates) {
  std::vector<SweepRow> rows;
  for (const auto& scheme : config.schemes) {
    const auto it = gates.find(scheme);
    if (it == gates.end()) throw MissingArtifact("no gates built for scheme " + scheme);
    for (auto& row : robustness_sweep_scheme(config, scheme, pulse_gates(it->second))) rows.push_back(row);
  }
  return rows;
}

NoiseEnsemble noise_by_name(const ExperimentConfig& config, const std::string& name) {
  if (name == "none") return NoiseEnsemble::identity();
  if (name == "incoherence") return config.incoherence();
  if (name == "rfi") return config.rfi();
  if (name == "rfi+incoherence") return NoiseEnsemble::product(config.rfi(), config.incoherence());
  throw ConfigError("unknown noise model '" + name + "' (expected none, incoherence, rfi, rfi+incoherence)");
}

void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryRecord>& records) {
  os << "stage,marked_prob,discord_bits,scaled_discord\n";
  for (const auto& r : records) {
    os << r.stage.to_string() << ',' << format_double(r.marked_prob) << ',' << format_double(r.discord) << ','
       << format_double(r.scaled_discord) << '\n';
  }
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "scheme,error_kind,mean_fidelity,mean_fidelity_incoherent\n";
  for (const auto& r : rows) {
    os << r.scheme << ',' << r.error_kind << ',' << format_double(r.mean_fidelity) << ','
       << format_double(r.mean_fidelity_incoherent) << '\n';
  }
}

void write_rms_csv(std::ostream& os, const std::vector<RmsRow>& rows) {
  os << "scheme,rms_discord,rms_prob,incoherence\n";
  for (const auto& r : rows) {
    os << r.report.scheme << ',' << format_double(r.report.rms_discord) << ',' << format_double(r.report.rms_prob)
       << ',' << (r.incoherence ? 1 : 0) << '\n';
  }
}

json run_manifest(const ExperimentConfig& config, const std::string& command) {
  std::ostringstream eigen;
  eigen << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
  std::ostringstream compiler;
#if defined(__clang__)
  compiler << "clang " << __clang_major__ << '.' << __clang_minor__ << '.' << __clang_patchlevel__;
#elif defined(__GNUC__)
  compiler << "gcc " << __GNUC__ << '.' << __GNUC_MINOR__ << '.' << __GNUC_PATCHLEVEL__;
#else
  compiler << "unknown";
#endif
  return json{{"command", command},
              {"config", config_to_json(config)},
              {"seed", config.seed},
              {"versions",
               {{"ddgrape", DDGRAPE_VERSION},
                {"eigen", eigen.str()},
                {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                      std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                      std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                {"compiler", compiler.str()}}}};
}

}  // namespace ddgrape
