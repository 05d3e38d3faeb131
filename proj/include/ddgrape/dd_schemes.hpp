#pragma once

// Dynamical-decoupling schemes: descriptor parsing, pulse placement inside a
// segmented control sequence, freezing of DD segments, and the
// toggling-frame identity check used to verify the interleaved products.
//
// Descriptor grammar: `<phases>:<flip_deg>:<spacing>`, e.g. `xy:90:1000`.
// The literal `none` denotes an unprotected sequence.

#include "ddgrape/nmr_model.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ddgrape {

enum class DDPhase { X, Y };

struct DDScheme {
  int flip_deg = 180;             // 90 or 180
  std::vector<DDPhase> phases;    // cyclic pattern
  int spacing = 1;                // segments per block
  // Only middle-of-block placement exists.

  double flip_rad() const { return flip_deg * kPi / 180.0; }
  bool operator==(const DDScheme&) const = default;
};

struct DDPulse {
  std::size_t index;
  int flip_deg;
  DDPhase phase;
};

struct DDPlacement {
  std::vector<DDPulse> pulses;  // strictly increasing indices

  std::size_t count() const { return pulses.size(); }
};

/// Parses a descriptor; returns std::nullopt for `none`. Throws
/// ValidationError on malformed text.
std::optional<DDScheme> parse_scheme(const std::string& descriptor);
std::string format_scheme(const std::optional<DDScheme>& scheme);
std::string format_scheme(const DDScheme& scheme);

/// One pulse in the middle of each complete block of `spacing` segments;
/// phases cycle through the pattern. Throws if n_segments < spacing.
DDPlacement place_dd(std::size_t n_segments, const DDScheme& scheme);

/// exp(-i beta (I1a + I2a)).
Unitary ideal_dd_propagator(int flip_deg, DDPhase phase);

/// Sets each placed segment to a frozen pulse of amplitude beta / dt along
/// its phase axis. Throws ValidationError if beta / dt exceeds omega_max.
PulseSequence freeze_into(const PulseSequence& pulse, const DDPlacement& placement);

/// Result of comparing the interleaved product U_{M+1} P_M U_M ... P_1 U_1
/// against its toggling-frame factorisation.
struct TogglingCheck {
  double deviation = 0.0;           // interleaved vs net-rotation-prefixed toggling product
  double uncorrected_deviation = 0.0;  // same, omitting the net rotation T_{M+1}
  bool cyclic = true;               // T_{M+1} is the identity up to a global phase
};

/// `unitaries` holds U_1 .. U_{M+1}; the DD pulses are the ideal propagators
/// of the placement, idealised as instantaneous. Deviations are measured
/// after removing the global phase.
TogglingCheck toggling_check(std::span<const Unitary> unitaries, const DDPlacement& placement);

/// Net rotation T_{M+1} = P_M ... P_1 of a placement.
Unitary net_rotation(const DDPlacement& placement);

}  // namespace ddgrape
