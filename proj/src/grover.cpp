#include "ddgrape/grover.hpp"

#include "ddgrape/nmr_model.hpp"

namespace ddgrape {

void GroverSpec::validate() const {
  if (marked < 0 || marked > 3) throw ValidationError("marked state index must be in 0..3");
  if (iterations < 0) throw ValidationError("Grover iterations must be non-negative");
}

std::string StageLabel::to_string() const {
  switch (kind) {
    case Kind::PPS:
      return "PPS";
    case Kind::Hadamard:
      return "H";
    case Kind::Oracle:
      return "W" + std::to_string(round);
    case Kind::Diffusion:
      return "D" + std::to_string(round);
  }
  return "?";
}

Vec4 uniform_superposition() { return Vec4::Constant(cplx(0.5, 0.0)); }

Unitary hadamard_pair() {
  Mat2 h;
  h << 1.0, 1.0, 1.0, -1.0;
  h /= std::sqrt(2.0);
  return kron(h, h);
}

Unitary oracle_unitary(int marked) {
  if (marked < 0 || marked > 3) throw ValidationError("marked state index must be in 0..3");
  Unitary u = Unitary::Identity();
  u(marked, marked) = -1.0;
  return u;
}

Unitary diffusion_unitary() {
  const Vec4 psi0 = uniform_superposition();
  return 2.0 * psi0 * psi0.adjoint() - Unitary::Identity();
}

Unitary grover_iterate(int marked) { return diffusion_unitary() * oracle_unitary(marked); }

std::vector<StageLabel> stage_labels(int iterations) {
  std::vector<StageLabel> labels{{StageLabel::Kind::PPS, 0}, {StageLabel::Kind::Hadamard, 0}};
  for (int r = 1; r <= iterations; ++r) {
    labels.push_back({StageLabel::Kind::Oracle, r});
    labels.push_back({StageLabel::Kind::Diffusion, r});
  }
  return labels;
}

std::vector<Stage> ideal_trajectory(const GroverSpec& spec, std::optional<double> epsilon) {
  spec.validate();
  DensityMatrix rho = pseudopure_state(epsilon.value_or(1.0));
  const Unitary oracle = oracle_unitary(spec.marked);
  const Unitary diffusion = diffusion_unitary();
  const Unitary hadamard = hadamard_pair();

  std::vector<Stage> out;
  for (const auto& label : stage_labels(spec.iterations)) {
    switch (label.kind) {
      case StageLabel::Kind::PPS:
        break;
      case StageLabel::Kind::Hadamard:
        rho = hadamard * rho * hadamard.adjoint();
        break;
      case StageLabel::Kind::Oracle:
        rho = oracle * rho * oracle.adjoint();
        break;
      case StageLabel::Kind::Diffusion:
        rho = diffusion * rho * diffusion.adjoint();
        break;
    }
    out.push_back({label, rho});
  }
  return out;
}

double marked_probability(const DensityMatrix& rho, int marked) {
  if (marked < 0 || marked > 3) throw ValidationError("marked state index must be in 0..3");
  return rho(marked, marked).real();
}

}  // namespace ddgrape
