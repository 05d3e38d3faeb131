#include "ddgrape/quantum_core.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace ddgrape {

Mat2 pauli(Axis axis) {
  Mat2 m;
  switch (axis) {
    case Axis::X:
      m << 0.0, 1.0, 1.0, 0.0;
      break;
    case Axis::Y:
      m << 0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0;
      break;
    case Axis::Z:
      m << 1.0, 0.0, 0.0, -1.0;
      break;
  }
  return m;
}

Mat4 kron(const Mat2& a, const Mat2& b) {
  Mat4 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) out(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
  return out;
}

Mat4 spin_operator(int spin_index, Axis axis) {
  const Mat2 half = 0.5 * pauli(axis);
  const Mat2 id = Mat2::Identity();
  if (spin_index == 1) return kron(half, id);
  if (spin_index == 2) return kron(id, half);
  throw std::invalid_argument("spin_operator: spin index must be 1 or 2");
}

Mat4 collective_spin(Axis axis) { return spin_operator(1, axis) + spin_operator(2, axis); }

bool is_hermitian(const Mat4& m, double tol) {
  if (!m.allFinite()) return false;
  return max_abs_entry(m - m.adjoint()) <= tol;
}

bool is_unitary(const Mat4& m, double tol) {
  if (!m.allFinite()) return false;
  return max_abs_entry(m.adjoint() * m - Mat4::Identity()) <= tol;
}

Spectrum hermitian_spectrum(const Mat4& h) {
  Eigen::SelfAdjointEigenSolver<Mat4> solver(h);
  if (solver.info() != Eigen::Success) throw ValidationError("eigendecomposition failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Unitary unitary_from_spectrum(const Spectrum& spec, double scale) {
  Vec4 phases;
  for (int i = 0; i < 4; ++i) phases(i) = std::polar(1.0, -scale * spec.values(i));
  return spec.vectors * phases.asDiagonal() * spec.vectors.adjoint();
}

Unitary unitary_exp(const Mat4& generator, double scale) {
  if (!is_hermitian(generator)) throw ValidationError("unitary_exp: generator is not Hermitian");
  if (scale == 0.0) return Mat4::Identity();
  return unitary_from_spectrum(hermitian_spectrum(generator), scale);
}

Mat2 partial_trace(const DensityMatrix& rho, Subsystem keep) {
  Mat2 out = Mat2::Zero();
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      for (int k = 0; k < 2; ++k) {
        if (keep == Subsystem::S)
          out(a, b) += rho(2 * a + k, 2 * b + k);
        else
          out(a, b) += rho(2 * k + a, 2 * k + b);
      }
    }
  }
  return out;
}

void validate_density(const DensityMatrix& rho) {
  if (!rho.allFinite()) throw ValidationError("density matrix has non-finite entries");
  const double herm = max_abs_entry(rho - rho.adjoint());
  if (herm > kHermitianTol) {
    std::ostringstream os;
    os << "density matrix is not Hermitian (deviation " << herm << ")";
    throw ValidationError(os.str());
  }
  const cplx tr = rho.trace();
  if (std::abs(tr - 1.0) > kTraceTol) {
    std::ostringstream os;
    os << "density matrix trace " << tr.real() << " differs from 1";
    throw ValidationError(os.str());
  }
  const RVec4 ev = hermitian_spectrum(rho).values;
  if (ev.minCoeff() < -kEigenClampTol) throw ValidationError("density matrix has a negative eigenvalue");
}

double entropy_bits(const double* eigenvalues, int count) {
  double h = 0.0;
  for (int i = 0; i < count; ++i) {
    const double p = eigenvalues[i];
    if (p < -kEigenClampTol) {
      std::ostringstream os;
      os << "invalid state: eigenvalue " << p << " below clamp tolerance";
      throw ValidationError(os.str());
    }
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

double von_neumann_entropy(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<Mat4> solver(rho, Eigen::EigenvaluesOnly);
  const RVec4 ev = solver.eigenvalues();
  return entropy_bits(ev.data(), 4);
}

std::array<double, 2> hermitian_eigenvalues(const Mat2& m) {
  const double a = m(0, 0).real();
  const double d = m(1, 1).real();
  const double half_tr = 0.5 * (a + d);
  const double half_diff = 0.5 * (a - d);
  const double r = std::sqrt(half_diff * half_diff + std::norm(m(0, 1)));
  return {half_tr - r, half_tr + r};
}

double von_neumann_entropy(const Mat2& rho) {
  const auto ev = hermitian_eigenvalues(rho);
  return entropy_bits(ev.data(), 2);
}

double phase_aligned_distance(const Mat4& a, const Mat4& b) {
  const cplx overlap = (b.adjoint() * a).trace();
  const cplx phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : cplx(1.0);
  return max_abs_entry(a - phase * b);
}

}  // namespace ddgrape
