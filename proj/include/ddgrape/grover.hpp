#pragma once

// Grover search on a two-qubit register (N = 4): oracle, diffusion and the
// ideal stage-by-stage density-matrix trajectory.

#include "ddgrape/quantum_core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ddgrape {

struct GroverSpec {
  int marked = 1;  // basis index k0; |01> -> 1
  int iterations = 6;

  void validate() const;
};

struct StageLabel {
  enum class Kind { PPS, Hadamard, Oracle, Diffusion };
  Kind kind = Kind::PPS;
  int round = 0;  // iteration number for Oracle / Diffusion

  /// "PPS", "H", "W1", "D1", ...
  std::string to_string() const;
  bool operator==(const StageLabel&) const = default;
};

struct Stage {
  StageLabel label;
  DensityMatrix rho;
};

/// (|00> + |01> + |10> + |11>) / 2.
Vec4 uniform_superposition();

Unitary hadamard_pair();

/// Diagonal with -1 at k0.
Unitary oracle_unitary(int marked);

/// 2 |psi0><psi0| - 1.
Unitary diffusion_unitary();

/// U_D U_W.
Unitary grover_iterate(int marked);

/// Stage labels PPS, H, W1, D1, ..., W_r, D_r.
std::vector<StageLabel> stage_labels(int iterations);

/// Starts from |00><00| or the pseudopure state with the given epsilon.
std::vector<Stage> ideal_trajectory(const GroverSpec& spec, std::optional<double> epsilon = std::nullopt);

/// Real diagonal element at k0.
double marked_probability(const DensityMatrix& rho, int marked);

}  // namespace ddgrape
