#pragma once

// Rotating-frame model of a homonuclear two-spin system under collective
// x/y RF control, with quasi-static coherent noise ensembles.
//
// Units: SystemParams holds Hz and Hamiltonian builders multiply by 2*pi.
// Control amplitudes are stored in rad/s, durations in seconds.

#include "ddgrape/quantum_core.hpp"

#include <span>
#include <variant>
#include <vector>

namespace ddgrape {

struct SystemParams {
  double offset1_hz = 0.0;
  double offset2_hz = 0.0;
  double coupling_hz = 0.0;
};

struct ControlSegment {
  double omega_x = 0.0;  // rad/s
  double omega_y = 0.0;  // rad/s
  bool frozen = false;
};

struct PulseSequence {
  std::vector<ControlSegment> segments;
  double dt = 0.0;         // s
  double omega_max = 0.0;  // rad/s

  std::size_t size() const { return segments.size(); }
  std::size_t frozen_count() const;
  double duration() const { return dt * static_cast<double>(segments.size()); }
  /// Throws ValidationError on an empty sequence, dt <= 0 or non-finite data.
  void validate() const;
};

/// One member of a coherent-error ensemble. The identity realization has
/// rf_scale = flip_scale = 1 and zero offset/phase.
struct NoiseRealization {
  double rf_scale = 1.0;
  double offset_shift_hz = 0.0;
  double flip_scale = 1.0;
  double phase_offset = 0.0;  // rad
  double weight = 1.0;

  double amplitude_scale() const { return rf_scale * flip_scale; }
};

struct NoiseEnsemble {
  std::vector<NoiseRealization> realizations;

  std::size_t size() const { return realizations.size(); }
  /// Throws ValidationError unless weights are non-negative and sum to 1
  /// within 1e-12 and every rf_scale is positive.
  void validate() const;

  static NoiseEnsemble identity();
  /// Equal-weight RF-inhomogeneity ensemble over the given scale factors.
  static NoiseEnsemble rf_inhomogeneity(std::span<const double> rf_scales);
  /// Equal-weight common-mode offset grid on [-range_hz, +range_hz].
  static NoiseEnsemble uniform_offsets(double range_hz, int points);
  /// Every pairing of `outer` with `inner`: scales and weights multiply,
  /// offsets and phases add.
  static NoiseEnsemble product(const NoiseEnsemble& outer, const NoiseEnsemble& inner);
};

/// -2 pi nu1 I1z - 2 pi nu2 I2z + 2 pi J I1z I2z, in rad/s.
Mat4 system_hamiltonian(const SystemParams& params);

/// Omega_x (I1x + I2x) + Omega_y (I1y + I2y).
Mat4 control_hamiltonian(double omega_x, double omega_y);

/// Applies amplitude scaling then phase rotation to a nominal control pair.
void apply_control_noise(double omega_x, double omega_y, const NoiseRealization& noise,
                         double& out_x, double& out_y);

/// Total segment generator H_S' + H_C' (rad/s) under a noise realization.
Mat4 segment_generator(const SystemParams& params, const ControlSegment& seg,
                       const NoiseRealization& noise);

Unitary segment_propagator(const SystemParams& params, const ControlSegment& seg, double dt,
                           const NoiseRealization& noise = {});

/// u_K ... u_2 u_1 with segment 1 acting first.
Unitary sequence_propagator(const PulseSequence& pulse, const SystemParams& params,
                            const NoiseRealization& noise = {});

/// A step of an evolution: either an engineered pulse simulated under the
/// realization's noise, or a fixed ideal unitary that ignores noise.
using EvolutionStep = std::variant<PulseSequence, Unitary>;

Unitary step_propagator(const EvolutionStep& step, const SystemParams& params,
                        const NoiseRealization& noise);

/// Evolves rho0 through every step with each realization held fixed for the
/// whole run, returning the weight-averaged state after each step (or only
/// the final state when record_after_each is false).
std::vector<DensityMatrix> evolve_ensemble(const DensityMatrix& rho0,
                                           std::span<const EvolutionStep> steps,
                                           const SystemParams& params,
                                           const NoiseEnsemble& ensemble,
                                           bool record_after_each = true);

std::vector<DensityMatrix> evolve_ensemble(const DensityMatrix& rho0,
                                           std::span<const PulseSequence> pulses,
                                           const SystemParams& params,
                                           const NoiseEnsemble& ensemble,
                                           bool record_after_each = true);

/// (1 - eps) 1/4 + eps |00><00|.
DensityMatrix pseudopure_state(double epsilon);

/// (1 - eps) 1/4 + eps |psi><psi| for a normalized pure state.
DensityMatrix pseudopure_state(double epsilon, const Vec4& psi);

}  // namespace ddgrape
