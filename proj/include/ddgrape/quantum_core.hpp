#pragma once

// Dense complex linear algebra and spin-1/2 operator primitives for a
// two-qubit register. Basis ordering is |q1 q2> with index 2*q1 + q2, and
// |0> is the m = +1/2 eigenstate of sigma_z / 2.

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <stdexcept>
#include <string>

namespace ddgrape {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix<cplx, 2, 2>;
using Mat4 = Eigen::Matrix<cplx, 4, 4>;
using Vec4 = Eigen::Matrix<cplx, 4, 1>;
using RVec4 = Eigen::Matrix<double, 4, 1>;

/// Alias used where a matrix is expected to be a unitary propagator.
using Unitary = Mat4;
/// Alias used where a matrix is expected to be a two-qubit density matrix.
using DensityMatrix = Mat4;

/// Raised when an input violates a numerical contract (non-Hermitian
/// generator, negative eigenvalue, bad trace, ...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Axis { X, Y, Z };
enum class Subsystem { S, A };  // S = qubit 1, A = qubit 2

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kEigenClampTol = 1e-10;

Mat2 pauli(Axis axis);

/// I_{1a} = (sigma_a / 2) (x) 1 or I_{2a} = 1 (x) (sigma_a / 2).
Mat4 spin_operator(int spin_index, Axis axis);

/// Collective spin component I_{1a} + I_{2a}.
Mat4 collective_spin(Axis axis);

Mat4 kron(const Mat2& a, const Mat2& b);

template <typename Derived>
double max_abs_entry(const Eigen::MatrixBase<Derived>& m) {
  return m.cwiseAbs().maxCoeff();
}

bool is_hermitian(const Mat4& m, double tol = kHermitianTol);
bool is_unitary(const Mat4& m, double tol = kUnitaryTol);

/// Spectral decomposition H = V diag(lambda) V^dagger of a Hermitian 4x4.
struct Spectrum {
  RVec4 values;
  Mat4 vectors;
};

Spectrum hermitian_spectrum(const Mat4& h);

/// exp(-i * scale * generator) via spectral decomposition. Throws
/// ValidationError if the generator is not Hermitian within 1e-12.
Unitary unitary_exp(const Mat4& generator, double scale);

/// Builds exp(-i * scale * H) from an already computed spectrum of H.
Unitary unitary_from_spectrum(const Spectrum& spec, double scale);

/// Reduced state of the kept qubit.
Mat2 partial_trace(const DensityMatrix& rho, Subsystem keep);

/// Checks Hermiticity, unit trace and eigenvalue floor; throws
/// ValidationError naming the violated invariant.
void validate_density(const DensityMatrix& rho);

/// -sum lambda log2 lambda with 0 log 0 = 0. Eigenvalues in [-1e-10, 0) are
/// clamped to zero; anything lower raises ValidationError.
double von_neumann_entropy(const DensityMatrix& rho);
double von_neumann_entropy(const Mat2& rho);

/// Entropy in bits of a list of eigenvalues, applying the same clamp rule.
double entropy_bits(const double* eigenvalues, int count);

/// Eigenvalues of a 2x2 Hermitian matrix, ascending.
std::array<double, 2> hermitian_eigenvalues(const Mat2& m);

/// Distance after removing the global phase that best aligns `a` to `b`.
double phase_aligned_distance(const Mat4& a, const Mat4& b);

}  // namespace ddgrape
