#pragma once

// Gradient-ascent pulse engineering with frozen segments.
//
// The objective is the phase-insensitive gate fidelity
//     F(U_P, U_T) = |Tr(U_T^dagger U_P)| / N
// averaged over an RF-inhomogeneity ensemble. Gradients are exact: each
// segment exponential is differentiated in the eigenbasis of its generator,
// and forward/backward propagator caches give every segment's contribution
// in one sweep. Frozen segments never move.

#include "ddgrape/nmr_model.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ddgrape {

struct TargetGate {
  Unitary unitary;
  std::string label;
};

enum class AscentMethod {
  Steepest,  // raw gradient direction
  Lbfgs,     // limited-memory quasi-Newton direction from recent accepted steps
};

struct OptimizationConfig {
  AscentMethod method = AscentMethod::Lbfgs;
  int lbfgs_memory = 20;
  int max_iterations = 5000;
  double fidelity_goal = 0.995;
  // rad/s per unit gradient; <= 0 picks a step that moves the largest
  // amplitude by 1% of omega_max on the first trial.
  double initial_step = 0.0;
  double step_grow = 2.0;
  double step_shrink = 0.5;
  double min_step_ratio = 1e-6;
  NoiseEnsemble rfi_ensemble = NoiseEnsemble::identity();
  std::uint64_t seed = 1;
  double omega_max = 0.0;  // <= 0 keeps the pulse's own limit

  void validate() const;
};

struct FidelityReport {
  double fidelity = 0.0;
  std::vector<std::pair<NoiseRealization, double>> per_realization;
  std::optional<double> mean_over_iterates;
};

struct IterationRecord {
  int iteration = 0;
  double mean_fidelity = 0.0;
  double step = 0.0;
};

struct OptimizationResult {
  PulseSequence pulse;
  FidelityReport report;
  std::vector<IterationRecord> log;
  int iterations = 0;
  bool reached_goal = false;
};

using SegmentGradient = std::array<double, 2>;  // dF/dOmega_x, dF/dOmega_y

double gate_fidelity(const Unitary& achieved, const Unitary& target);

/// Dynamic-size variant; throws ValidationError on a dimension mismatch.
double gate_fidelity(const Eigen::MatrixXcd& achieved, const Eigen::MatrixXcd& target);

FidelityReport robust_fidelity(const PulseSequence& pulse, const TargetGate& target,
                               const SystemParams& params, const NoiseEnsemble& ensemble);

/// Fidelity and exact gradient under a single noise realization.
struct FidelityGradient {
  double fidelity = 0.0;
  std::vector<SegmentGradient> gradient;
};

FidelityGradient fidelity_and_gradient(const PulseSequence& pulse, const TargetGate& target,
                                       const SystemParams& params,
                                       const NoiseRealization& realization = {});

std::vector<SegmentGradient> fidelity_gradient(const PulseSequence& pulse, const TargetGate& target,
                                               const SystemParams& params,
                                               const NoiseRealization& realization = {});

/// Ensemble-weighted fidelity and gradient, reduced in member order.
FidelityGradient robust_fidelity_and_gradient(const PulseSequence& pulse, const TargetGate& target,
                                              const SystemParams& params,
                                              const NoiseEnsemble& ensemble);

/// Gradient ascent with an adaptive step: grow after an accepted trial,
/// shrink and retry after a rejected one, so accepted iterates never lose
/// fidelity. The search direction is the raw gradient or an L-BFGS direction
/// built from accepted steps. Free amplitudes are clipped to omega_max after
/// each update. Throws ValidationError if a frozen segment exceeds omega_max.
OptimizationResult optimize(const PulseSequence& initial, const TargetGate& target,
                            const SystemParams& params, const OptimizationConfig& config);

/// Amplitudes uniform in [-f omega_max, f omega_max] per component from a
/// seeded 64-bit Mersenne Twister.
PulseSequence random_initial_pulse(std::size_t n_segments, double dt, double omega_max,
                                   double amplitude_fraction, std::uint64_t seed);

/// CSV with header `iteration,mean_fidelity,step`.
void write_iteration_log(std::ostream& os, const std::vector<IterationRecord>& log);

}  // namespace ddgrape
