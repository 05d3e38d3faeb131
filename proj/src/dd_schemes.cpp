#include "ddgrape/dd_schemes.hpp"

#include <cctype>
#include <sstream>

namespace ddgrape {
namespace {

int parse_positive_int(const std::string& text, const std::string& descriptor) {
  if (text.empty() || text.size() > 9) throw ValidationError("malformed DD scheme '" + descriptor + "'");
  for (char c : text) {
    if (!std::isdigit(static_cast<unsigned char>(c))) throw ValidationError("malformed DD scheme '" + descriptor + "'");
  }
  return std::stoi(text);
}

}  // namespace

std::optional<DDScheme> parse_scheme(const std::string& descriptor) {
  if (descriptor == "none") return std::nullopt;
  const auto c1 = descriptor.find(':');
  const auto c2 = c1 == std::string::npos ? std::string::npos : descriptor.find(':', c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos || descriptor.find(':', c2 + 1) != std::string::npos)
    throw ValidationError("DD scheme '" + descriptor + "' must look like <phases>:<flip_deg>:<spacing>");

  DDScheme scheme;
  const std::string phases = descriptor.substr(0, c1);
  if (phases.empty()) throw ValidationError("DD scheme '" + descriptor + "' has no phases");
  for (char c : phases) {
    switch (std::tolower(static_cast<unsigned char>(c))) {
      case 'x':
        scheme.phases.push_back(DDPhase::X);
        break;
      case 'y':
        scheme.phases.push_back(DDPhase::Y);
        break;
      default:
        throw ValidationError("DD scheme '" + descriptor + "': phases must be x or y");
    }
  }
  scheme.flip_deg = parse_positive_int(descriptor.substr(c1 + 1, c2 - c1 - 1), descriptor);
  if (scheme.flip_deg != 90 && scheme.flip_deg != 180)
    throw ValidationError("DD scheme '" + descriptor + "': flip angle must be 90 or 180");
  scheme.spacing = parse_positive_int(descriptor.substr(c2 + 1), descriptor);
  if (scheme.spacing < 1) throw ValidationError("DD scheme '" + descriptor + "': spacing must be >= 1");
  return scheme;
}

std::string format_scheme(const DDScheme& scheme) {
  std::string out;
  for (auto p : scheme.phases) out += p == DDPhase::X ? 'x' : 'y';
  out += ':' + std::to_string(scheme.flip_deg) + ':' + std::to_string(scheme.spacing);
  return out;
}

std::string format_scheme(const std::optional<DDScheme>& scheme) {
  return scheme ? format_scheme(*scheme) : std::string("none");
}

DDPlacement place_dd(std::size_t n_segments, const DDScheme& scheme) {
  if (scheme.phases.empty()) throw ValidationError("DD scheme has no phases");
  if (scheme.spacing < 1) throw ValidationError("DD spacing must be >= 1");
  const auto spacing = static_cast<std::size_t>(scheme.spacing);
  if (n_segments < spacing) {
    std::ostringstream os;
    os << "cannot place DD scheme " << format_scheme(scheme) << " in " << n_segments << " segments";
    throw ValidationError(os.str());
  }
  DDPlacement placement;
  const std::size_t blocks = n_segments / spacing;
  for (std::size_t b = 0; b < blocks; ++b) {
    placement.pulses.push_back(
        {b * spacing + spacing / 2, scheme.flip_deg, scheme.phases[b % scheme.phases.size()]});
  }
  return placement;
}

Unitary ideal_dd_propagator(int flip_deg, DDPhase phase) {
  const Axis axis = phase == DDPhase::X ? Axis::X : Axis::Y;
  return unitary_exp(collective_spin(axis), flip_deg * kPi / 180.0);
}

PulseSequence freeze_into(const PulseSequence& pulse, const DDPlacement& placement) {
  PulseSequence out = pulse;
  for (const auto& p : placement.pulses) {
    if (p.index >= out.segments.size()) throw ValidationError("DD placement index outside the pulse sequence");
    const double amplitude = p.flip_deg * kPi / 180.0 / pulse.dt;
    if (amplitude > pulse.omega_max * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "DD pulse needs amplitude " << amplitude << " rad/s, above omega_max " << pulse.omega_max;
      throw ValidationError(os.str());
    }
    auto& seg = out.segments[p.index];
    seg.omega_x = p.phase == DDPhase::X ? amplitude : 0.0;
    seg.omega_y = p.phase == DDPhase::Y ? amplitude : 0.0;
    seg.frozen = true;
  }
  return out;
}

Unitary net_rotation(const DDPlacement& placement) {
  Unitary t = Unitary::Identity();
  for (const auto& p : placement.pulses) t = ideal_dd_propagator(p.flip_deg, p.phase) * t;
  return t;
}

TogglingCheck toggling_check(std::span<const Unitary> unitaries, const DDPlacement& placement) {
  const std::size_t m = placement.count();
  if (unitaries.size() != m + 1) throw ValidationError("toggling_check needs M + 1 unitaries");

  Unitary interleaved = unitaries[0];
  for (std::size_t j = 0; j < m; ++j) {
    interleaved = unitaries[j + 1] * ideal_dd_propagator(placement.pulses[j].flip_deg, placement.pulses[j].phase) *
                  interleaved;
  }

  // T_1 = 1, T_{j+1} = P_j T_j; toggled U_j = T_j^dagger U_j T_j.
  Unitary frame = Unitary::Identity();
  Unitary toggled_product = Unitary::Identity();
  for (std::size_t j = 0; j < m; ++j) {
    toggled_product = frame.adjoint() * unitaries[j] * frame * toggled_product;
    frame = ideal_dd_propagator(placement.pulses[j].flip_deg, placement.pulses[j].phase) * frame;
  }
  const Unitary& last = unitaries[m];

  TogglingCheck out;
  out.deviation = phase_aligned_distance(interleaved, last * frame * toggled_product);
  out.uncorrected_deviation = phase_aligned_distance(interleaved, last * toggled_product);
  out.cyclic = phase_aligned_distance(frame, Unitary::Identity()) <= 1e-10;
  return out;
}

}  // namespace ddgrape
