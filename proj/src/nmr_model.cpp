#include "ddgrape/nmr_model.hpp"

#include "ddgrape/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ddgrape {
namespace {

const Mat4& collective_x() {
  static const Mat4 m = collective_spin(Axis::X);
  return m;
}

const Mat4& collective_y() {
  static const Mat4 m = collective_spin(Axis::Y);
  return m;
}

double spin_m(int index, int spin) {
  const int bit = spin == 1 ? (index >> 1) & 1 : index & 1;
  return bit == 0 ? 0.5 : -0.5;
}

}  // namespace

std::size_t PulseSequence::frozen_count() const {
  return static_cast<std::size_t>(
      std::count_if(segments.begin(), segments.end(), [](const ControlSegment& s) { return s.frozen; }));
}

void PulseSequence::validate() const {
  if (segments.empty()) throw ValidationError("pulse sequence has no segments");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("pulse sequence dt must be positive");
  if (!(omega_max > 0.0) || !std::isfinite(omega_max))
    throw ValidationError("pulse sequence omega_max must be positive");
  for (const auto& s : segments) {
    if (!std::isfinite(s.omega_x) || !std::isfinite(s.omega_y))
      throw ValidationError("pulse sequence has non-finite amplitudes");
  }
}

void NoiseEnsemble::validate() const {
  if (realizations.empty()) throw ValidationError("noise ensemble is empty");
  double total = 0.0;
  for (const auto& r : realizations) {
    if (!(r.rf_scale > 0.0)) throw ValidationError("noise realization rf_scale must be positive");
    if (r.weight < 0.0) throw ValidationError("noise realization weight must be non-negative");
    total += r.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "noise ensemble weights sum to " << total << ", expected 1";
    throw ValidationError(os.str());
  }
}

NoiseEnsemble NoiseEnsemble::identity() { return NoiseEnsemble{{NoiseRealization{}}}; }

NoiseEnsemble NoiseEnsemble::rf_inhomogeneity(std::span<const double> rf_scales) {
  NoiseEnsemble out;
  const double w = 1.0 / static_cast<double>(rf_scales.size());
  for (double s : rf_scales) {
    NoiseRealization r;
    r.rf_scale = s;
    r.weight = w;
    out.realizations.push_back(r);
  }
  return out;
}

NoiseEnsemble NoiseEnsemble::uniform_offsets(double range_hz, int points) {
  if (points < 1) throw ValidationError("offset grid needs at least one point");
  NoiseEnsemble out;
  const double w = 1.0 / points;
  for (int i = 0; i < points; ++i) {
    NoiseRealization r;
    r.offset_shift_hz = points == 1 ? 0.0 : -range_hz + 2.0 * range_hz * i / (points - 1);
    r.weight = w;
    out.realizations.push_back(r);
  }
  return out;
}

NoiseEnsemble NoiseEnsemble::product(const NoiseEnsemble& outer, const NoiseEnsemble& inner) {
  NoiseEnsemble out;
  out.realizations.reserve(outer.size() * inner.size());
  for (const auto& a : outer.realizations) {
    for (const auto& b : inner.realizations) {
      NoiseRealization r;
      r.rf_scale = a.rf_scale * b.rf_scale;
      r.flip_scale = a.flip_scale * b.flip_scale;
      r.offset_shift_hz = a.offset_shift_hz + b.offset_shift_hz;
      r.phase_offset = a.phase_offset + b.phase_offset;
      r.weight = a.weight * b.weight;
      out.realizations.push_back(r);
    }
  }
  return out;
}

Mat4 system_hamiltonian(const SystemParams& params) {
  Mat4 h = Mat4::Zero();
  for (int i = 0; i < 4; ++i) {
    const double m1 = spin_m(i, 1);
    const double m2 = spin_m(i, 2);
    h(i, i) = kTwoPi * (-params.offset1_hz * m1 - params.offset2_hz * m2 + params.coupling_hz * m1 * m2);
  }
  return h;
}

Mat4 control_hamiltonian(double omega_x, double omega_y) {
  return omega_x * collective_x() + omega_y * collective_y();
}

void apply_control_noise(double omega_x, double omega_y, const NoiseRealization& noise,
                         double& out_x, double& out_y) {
  const double s = noise.amplitude_scale();
  const double x = s * omega_x;
  const double y = s * omega_y;
  if (noise.phase_offset == 0.0) {
    out_x = x;
    out_y = y;
    return;
  }
  const double c = std::cos(noise.phase_offset);
  const double sn = std::sin(noise.phase_offset);
  out_x = c * x - sn * y;
  out_y = sn * x + c * y;
}

Mat4 segment_generator(const SystemParams& params, const ControlSegment& seg,
                       const NoiseRealization& noise) {
  SystemParams shifted = params;
  shifted.offset1_hz += noise.offset_shift_hz;
  shifted.offset2_hz += noise.offset_shift_hz;
  double wx = 0.0;
  double wy = 0.0;
  apply_control_noise(seg.omega_x, seg.omega_y, noise, wx, wy);
  return system_hamiltonian(shifted) + control_hamiltonian(wx, wy);
}

Unitary segment_propagator(const SystemParams& params, const ControlSegment& seg, double dt,
                           const NoiseRealization& noise) {
  return unitary_from_spectrum(hermitian_spectrum(segment_generator(params, seg, noise)), dt);
}

Unitary sequence_propagator(const PulseSequence& pulse, const SystemParams& params,
                            const NoiseRealization& noise) {
  Unitary u = Unitary::Identity();
  for (const auto& seg : pulse.segments) u = segment_propagator(params, seg, pulse.dt, noise) * u;
  return u;
}

Unitary step_propagator(const EvolutionStep& step, const SystemParams& params,
                        const NoiseRealization& noise) {
  if (const auto* pulse = std::get_if<PulseSequence>(&step)) return sequence_propagator(*pulse, params, noise);
  return std::get<Unitary>(step);
}

std::vector<DensityMatrix> evolve_ensemble(const DensityMatrix& rho0,
                                           std::span<const EvolutionStep> steps,
                                           const SystemParams& params,
                                           const NoiseEnsemble& ensemble,
                                           bool record_after_each) {
  ensemble.validate();
  const std::size_t members = ensemble.size();
  const std::size_t n_out = record_after_each ? steps.size() : 1;

  // Per-member trajectories are independent; averaging happens afterwards
  // in member order so results do not depend on scheduling.
  std::vector<std::vector<DensityMatrix>> per_member(members);
  parallel_for(members, [&](std::size_t m) {
    const auto& noise = ensemble.realizations[m];
    auto& out = per_member[m];
    out.reserve(n_out);
    DensityMatrix rho = rho0;
    for (const auto& step : steps) {
      const Unitary u = step_propagator(step, params, noise);
      rho = u * rho * u.adjoint();
      if (record_after_each) out.push_back(rho);
    }
    if (!record_after_each) out.push_back(rho);
  });

  std::vector<DensityMatrix> averaged(n_out, DensityMatrix::Zero());
  for (std::size_t m = 0; m < members; ++m) {
    const double w = ensemble.realizations[m].weight;
    for (std::size_t k = 0; k < n_out; ++k) averaged[k] += w * per_member[m][k];
  }
  for (auto& rho : averaged) rho = 0.5 * (rho + rho.adjoint()).eval();
  return averaged;
}

std::vector<DensityMatrix> evolve_ensemble(const DensityMatrix& rho0,
                                           std::span<const PulseSequence> pulses,
                                           const SystemParams& params,
                                           const NoiseEnsemble& ensemble,
                                           bool record_after_each) {
  std::vector<EvolutionStep> steps(pulses.begin(), pulses.end());
  return evolve_ensemble(rho0, steps, params, ensemble, record_after_each);
}

DensityMatrix pseudopure_state(double epsilon) {
  Vec4 psi = Vec4::Zero();
  psi(0) = 1.0;
  return pseudopure_state(epsilon, psi);
}

DensityMatrix pseudopure_state(double epsilon, const Vec4& psi) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ValidationError("pseudopure epsilon must lie in [0, 1]");
  return (1.0 - epsilon) * 0.25 * Mat4::Identity() + epsilon * psi * psi.adjoint();
}

}  // namespace ddgrape
