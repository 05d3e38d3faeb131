#pragma once

// Quantum discord D(S|A) of two-qubit states, with the measurement acting on
// subsystem A (qubit 2). The optimal projective basis is found by a coarse
// (theta, phi) grid over the Bloch sphere followed by compass-search
// refinement started from the best grid local minima.

#include "ddgrape/quantum_core.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <utility>

namespace ddgrape {

struct MeasurementBasis {
  double theta = 0.0;  // [0, pi]
  double phi = 0.0;    // [0, 2 pi)

  /// Maps arbitrary angles onto the canonical ranges (same axis).
  MeasurementBasis normalized() const;
};

struct DiscordResult {
  double discord = 0.0;
  double mutual_information = 0.0;
  double classical_correlation = 0.0;
  MeasurementBasis argmin_basis;
  std::optional<double> scaled_discord;  // D ln2 / eps^2 for pseudopure inputs
};

struct DiscordSearch {
  int theta_points = 61;
  int phi_points = 121;
  int refine_starts = 4;
  double min_refine_step = 1e-9;  // rad
};

/// Projectors onto the +n and -n spin-coherent states.
std::pair<Mat2, Mat2> projectors(const MeasurementBasis& basis);

/// H(S) + H(A) - H(S, A) in bits.
double mutual_information(const DensityMatrix& rho);

/// sum_a p_a H(rho_{S|a}) for a projective measurement on A.
double conditional_entropy(const DensityMatrix& rho, const MeasurementBasis& basis);

/// Minimum conditional entropy and its basis.
std::pair<double, MeasurementBasis> minimize_conditional_entropy(const DensityMatrix& rho,
                                                                 const DiscordSearch& search = {});

DiscordResult quantum_discord(const DensityMatrix& rho, std::optional<double> epsilon = std::nullopt,
                              const DiscordSearch& search = {});

/// State files hold 16 complex tokens `re+imj`, row-major; `#` starts a
/// comment. Throws ValidationError on malformed input.
DensityMatrix read_state(std::istream& is);
DensityMatrix read_state_file(const std::filesystem::path& path);
void write_state(std::ostream& os, const DensityMatrix& rho);

}  // namespace ddgrape
