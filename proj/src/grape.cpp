#include "ddgrape/grape.hpp"

#include "ddgrape/parallel.hpp"
#include "ddgrape/pulse_io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

namespace ddgrape {
namespace {

// sin(x)/x, with a series near zero.
double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

void clip_amplitude(ControlSegment& seg, double omega_max) {
  const double r = std::hypot(seg.omega_x, seg.omega_y);
  if (r > omega_max) {
    const double s = omega_max / r;
    seg.omega_x *= s;
    seg.omega_y *= s;
  }
}

}  // namespace

void OptimizationConfig::validate() const {
  if (max_iterations < 0) throw ValidationError("max_iterations must be non-negative");
  if (!(fidelity_goal > 0.0 && fidelity_goal <= 1.0)) throw ValidationError("fidelity_goal must lie in (0, 1]");
  if (!(step_grow > 0.0) || !(step_shrink > 0.0)) throw ValidationError("step factors must be positive");
  rfi_ensemble.validate();
}

double gate_fidelity(const Unitary& achieved, const Unitary& target) {
  return std::abs((target.adjoint() * achieved).trace()) / 4.0;
}

double gate_fidelity(const Eigen::MatrixXcd& achieved, const Eigen::MatrixXcd& target) {
  if (achieved.rows() != target.rows() || achieved.cols() != target.cols() || achieved.rows() != achieved.cols())
    throw ValidationError("gate_fidelity: dimension mismatch");
  if (achieved.rows() == 0) throw ValidationError("gate_fidelity: empty matrices");
  return std::abs((target.adjoint() * achieved).trace()) / static_cast<double>(achieved.rows());
}

FidelityReport robust_fidelity(const PulseSequence& pulse, const TargetGate& target,
                               const SystemParams& params, const NoiseEnsemble& ensemble) {
  ensemble.validate();
  std::vector<double> values(ensemble.size());
  parallel_for(ensemble.size(), [&](std::size_t m) {
    values[m] = gate_fidelity(sequence_propagator(pulse, params, ensemble.realizations[m]), target.unitary);
  });
  FidelityReport report;
  for (std::size_t m = 0; m < ensemble.size(); ++m) {
    report.fidelity += ensemble.realizations[m].weight * values[m];
    report.per_realization.emplace_back(ensemble.realizations[m], values[m]);
  }
  return report;
}

FidelityGradient fidelity_and_gradient(const PulseSequence& pulse, const TargetGate& target,
                                       const SystemParams& params, const NoiseRealization& noise) {
  const std::size_t n = pulse.size();
  const double dt = pulse.dt;
  static const Mat4 sx = collective_spin(Axis::X);
  static const Mat4 sy = collective_spin(Axis::Y);

  SystemParams shifted = params;
  shifted.offset1_hz += noise.offset_shift_hz;
  shifted.offset2_hz += noise.offset_shift_hz;
  const Mat4 h_sys = system_hamiltonian(shifted);

  // d(H_C')/d(Omega_x) and d(H_C')/d(Omega_y) after scaling and phase rotation.
  const double s = noise.amplitude_scale();
  const double c = std::cos(noise.phase_offset);
  const double sn = std::sin(noise.phase_offset);
  const Mat4 dh_x = s * (c * sx + sn * sy);
  const Mat4 dh_y = s * (-sn * sx + c * sy);

  std::vector<Spectrum> spectra(n);
  std::vector<Unitary> prefix(n);  // prefix[k] = u_{k-1} ... u_0
  std::vector<Unitary> steps(n);
  Unitary forward = Unitary::Identity();
  for (std::size_t k = 0; k < n; ++k) {
    double wx = 0.0;
    double wy = 0.0;
    apply_control_noise(pulse.segments[k].omega_x, pulse.segments[k].omega_y, noise, wx, wy);
    spectra[k] = hermitian_spectrum(h_sys + wx * sx + wy * sy);
    steps[k] = unitary_from_spectrum(spectra[k], dt);
    prefix[k] = forward;
    forward = steps[k] * forward;
  }

  const cplx overlap = (target.unitary.adjoint() * forward).trace();
  const double magnitude = std::abs(overlap);
  FidelityGradient out;
  out.fidelity = magnitude / 4.0;
  out.gradient.assign(n, SegmentGradient{0.0, 0.0});
  if (magnitude == 0.0) return out;
  const cplx weight = std::conj(overlap) / (magnitude * 4.0);

  Unitary backward = target.unitary.adjoint();  // U_T^dagger u_{n-1} ... u_{k+1}
  for (std::size_t kk = n; kk-- > 0;) {
    if (!pulse.segments[kk].frozen) {
      const Mat4& v = spectra[kk].vectors;
      const RVec4& lambda = spectra[kk].values;
      const Mat4 c_eig = v.adjoint() * (prefix[kk] * backward) * v;
      const Mat4 hx_eig = v.adjoint() * dh_x * v;
      const Mat4 hy_eig = v.adjoint() * dh_y * v;
      cplx dgx = 0.0;
      cplx dgy = 0.0;
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
          const double mean = 0.5 * (lambda(a) + lambda(b)) * dt;
          const double half_gap = 0.5 * (lambda(a) - lambda(b)) * dt;
          const cplx kernel = cplx(0.0, -dt) * std::polar(1.0, -mean) * sinc(half_gap);
          const cplx ck = c_eig(b, a) * kernel;
          dgx += ck * hx_eig(a, b);
          dgy += ck * hy_eig(a, b);
        }
      }
      out.gradient[kk] = {std::real(weight * dgx), std::real(weight * dgy)};
    }
    backward = backward * steps[kk];
  }
  return out;
}

std::vector<SegmentGradient> fidelity_gradient(const PulseSequence& pulse, const TargetGate& target,
                                               const SystemParams& params,
                                               const NoiseRealization& realization) {
  return fidelity_and_gradient(pulse, target, params, realization).gradient;
}

FidelityGradient robust_fidelity_and_gradient(const PulseSequence& pulse, const TargetGate& target,
                                              const SystemParams& params,
                                              const NoiseEnsemble& ensemble) {
  std::vector<FidelityGradient> members(ensemble.size());
  parallel_for(ensemble.size(), [&](std::size_t m) {
    members[m] = fidelity_and_gradient(pulse, target, params, ensemble.realizations[m]);
  });
  FidelityGradient out;
  out.gradient.assign(pulse.size(), SegmentGradient{0.0, 0.0});
  for (std::size_t m = 0; m < members.size(); ++m) {
    const double w = ensemble.realizations[m].weight;
    out.fidelity += w * members[m].fidelity;
    for (std::size_t k = 0; k < pulse.size(); ++k) {
      out.gradient[k][0] += w * members[m].gradient[k][0];
      out.gradient[k][1] += w * members[m].gradient[k][1];
    }
  }
  return out;
}

namespace {

// Free (non-frozen) amplitudes flattened as [x0, y0, x1, y1, ...].
std::vector<std::size_t> free_indices(const PulseSequence& pulse) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < pulse.size(); ++k)
    if (!pulse.segments[k].frozen) idx.push_back(k);
  return idx;
}

Eigen::VectorXd gather(const std::vector<SegmentGradient>& g, const std::vector<std::size_t>& idx) {
  Eigen::VectorXd out(2 * idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out(2 * i) = g[idx[i]][0];
    out(2 * i + 1) = g[idx[i]][1];
  }
  return out;
}

Eigen::VectorXd gather(const PulseSequence& p, const std::vector<std::size_t>& idx) {
  Eigen::VectorXd out(2 * idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out(2 * i) = p.segments[idx[i]].omega_x;
    out(2 * i + 1) = p.segments[idx[i]].omega_y;
  }
  return out;
}

// Two-loop recursion for the ascent direction H g, with H approximating the
// inverse (negated) Hessian from stored (s, y) pairs.
class LbfgsMemory {
 public:
  explicit LbfgsMemory(std::size_t capacity) : capacity_(capacity) {}

  bool empty() const { return s_.empty(); }
  void clear() {
    s_.clear();
    y_.clear();
  }

  void push(Eigen::VectorXd s, Eigen::VectorXd y) {
    if (s.dot(y) <= 1e-300) return;  // keep the approximation positive definite
    if (s_.size() == capacity_) {
      s_.erase(s_.begin());
      y_.erase(y_.begin());
    }
    s_.push_back(std::move(s));
    y_.push_back(std::move(y));
  }

  Eigen::VectorXd direction(const Eigen::VectorXd& g) const {
    Eigen::VectorXd q = g;
    std::vector<double> alpha(s_.size());
    for (std::size_t i = s_.size(); i-- > 0;) {
      alpha[i] = s_[i].dot(q) / y_[i].dot(s_[i]);
      q -= alpha[i] * y_[i];
    }
    const double gamma = s_.back().dot(y_.back()) / y_.back().squaredNorm();
    Eigen::VectorXd r = gamma * q;
    for (std::size_t i = 0; i < s_.size(); ++i) {
      const double beta = y_[i].dot(r) / y_[i].dot(s_[i]);
      r += (alpha[i] - beta) * s_[i];
    }
    return r;
  }

 private:
  std::size_t capacity_;
  std::vector<Eigen::VectorXd> s_;
  std::vector<Eigen::VectorXd> y_;
};

}  // namespace

OptimizationResult optimize(const PulseSequence& initial, const TargetGate& target,
                            const SystemParams& params, const OptimizationConfig& config) {
  config.validate();
  initial.validate();
  const double omega_max = config.omega_max > 0.0 ? config.omega_max : initial.omega_max;
  for (const auto& seg : initial.segments) {
    if (seg.frozen && std::hypot(seg.omega_x, seg.omega_y) > omega_max * (1.0 + 1e-12))
      throw ValidationError("frozen segment amplitude exceeds omega_max");
  }

  OptimizationResult result;
  PulseSequence current = initial;
  current.omega_max = omega_max;
  for (auto& seg : current.segments) {
    if (!seg.frozen) clip_amplitude(seg, omega_max);
  }
  const std::vector<std::size_t> free = free_indices(current);

  FidelityGradient state = robust_fidelity_and_gradient(current, target, params, config.rfi_ensemble);
  Eigen::VectorXd grad = gather(state.gradient, free);

  // Gradient scale: rad/s of amplitude change per unit of gradient.
  double gradient_scale = config.initial_step;
  if (gradient_scale <= 0.0) {
    const double largest = grad.size() ? grad.cwiseAbs().maxCoeff() : 0.0;
    gradient_scale = largest > 0.0 ? 0.01 * omega_max / largest : 1.0;
  }
  const bool quasi_newton = config.method == AscentMethod::Lbfgs;
  // For steepest ascent the step is the gradient scale itself; for L-BFGS it
  // multiplies the quasi-Newton direction and never exceeds 1.
  double step = quasi_newton ? 1.0 : gradient_scale;
  const double max_step = quasi_newton ? 1.0 : std::numeric_limits<double>::infinity();
  const double min_step = config.min_step_ratio * step;
  LbfgsMemory memory(static_cast<std::size_t>(std::max(1, config.lbfgs_memory)));

  int iteration = 0;
  while (state.fidelity < config.fidelity_goal && iteration < config.max_iterations && step >= min_step &&
         !free.empty()) {
    ++iteration;
    Eigen::VectorXd direction;
    if (quasi_newton) {
      direction = memory.empty() ? Eigen::VectorXd(gradient_scale * grad) : memory.direction(grad);
      if (direction.dot(grad) <= 0.0) {
        memory.clear();
        direction = gradient_scale * grad;
      }
    } else {
      direction = grad;
    }

    PulseSequence trial = current;
    for (std::size_t i = 0; i < free.size(); ++i) {
      auto& seg = trial.segments[free[i]];
      seg.omega_x += step * direction(2 * i);
      seg.omega_y += step * direction(2 * i + 1);
      clip_amplitude(seg, omega_max);
    }
    FidelityGradient trial_state = robust_fidelity_and_gradient(trial, target, params, config.rfi_ensemble);
    if (trial_state.fidelity > state.fidelity) {
      Eigen::VectorXd trial_grad = gather(trial_state.gradient, free);
      if (quasi_newton) memory.push(gather(trial, free) - gather(current, free), grad - trial_grad);
      current = std::move(trial);
      state = std::move(trial_state);
      grad = std::move(trial_grad);
      step = std::min(step * config.step_grow, max_step);
    } else {
      step *= config.step_shrink;
    }
    result.log.push_back({iteration, state.fidelity, step});
  }

  result.iterations = iteration;
  result.reached_goal = state.fidelity >= config.fidelity_goal;
  result.report = robust_fidelity(current, target, params, config.rfi_ensemble);
  result.pulse = std::move(current);
  return result;
}

PulseSequence random_initial_pulse(std::size_t n_segments, double dt, double omega_max,
                                   double amplitude_fraction, std::uint64_t seed) {
  if (!(amplitude_fraction >= 0.0 && amplitude_fraction <= 1.0))
    throw ValidationError("amplitude_fraction must lie in [0, 1]");
  // Raw engine output mapped to [-1, 1) keeps sequences identical across
  // standard library implementations.
  std::mt19937_64 engine(seed);
  auto uniform = [&] { return static_cast<double>(engine() >> 11) * 0x1.0p-52 - 1.0; };
  PulseSequence pulse;
  pulse.dt = dt;
  pulse.omega_max = omega_max;
  pulse.segments.resize(n_segments);
  const double bound = amplitude_fraction * omega_max;
  for (auto& seg : pulse.segments) {
    seg.omega_x = bound * uniform();
    seg.omega_y = bound * uniform();
  }
  return pulse;
}

void write_iteration_log(std::ostream& os, const std::vector<IterationRecord>& log) {
  os << "iteration,mean_fidelity,step\n";
  for (const auto& r : log) os << r.iteration << ',' << format_double(r.mean_fidelity) << ',' << format_double(r.step) << '\n';
}

}  // namespace ddgrape
