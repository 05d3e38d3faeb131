#pragma once

// Independent reference implementations used only by tests. None of these
// share code paths with the library beyond the basic matrix typedefs.

#include "ddgrape/nmr_model.hpp"

#include <Eigen/QR>

#include <array>
#include <cmath>
#include <complex>
#include <random>

namespace oracle {

using ddgrape::cplx;
using ddgrape::Mat2;
using ddgrape::Mat4;
using ddgrape::Vec4;

using ld = long double;
using lcplx = std::complex<ld>;
using LMat4 = std::array<std::array<lcplx, 4>, 4>;

inline LMat4 lmul(const LMat4& a, const LMat4& b) {
  LMat4 c{};
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k)
      for (int j = 0; j < 4; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline LMat4 lidentity() {
  LMat4 m{};
  for (int i = 0; i < 4; ++i) m[i][i] = 1.0L;
  return m;
}

/// exp(-i t H) by scaling and squaring with a long-double Taylor series.
inline LMat4 taylor_exp(const LMat4& h, ld t) {
  ld norm = 0.0L;
  for (const auto& row : h) {
    ld s = 0.0L;
    for (const auto& x : row) s += std::abs(x);
    norm = std::max(norm, s);
  }
  int squarings = 0;
  ld scale = t;
  while (std::abs(scale) * norm > 0.25L) {
    scale /= 2.0L;
    ++squarings;
  }
  LMat4 a{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) a[i][j] = lcplx(0.0L, -scale) * h[i][j];
  LMat4 term = lidentity();
  LMat4 sum = lidentity();
  for (int k = 1; k <= 30; ++k) {
    term = lmul(term, a);
    for (auto& row : term)
      for (auto& x : row) x /= static_cast<ld>(k);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) sum[i][j] += term[i][j];
  }
  for (int s = 0; s < squarings; ++s) sum = lmul(sum, sum);
  return sum;
}

inline LMat4 to_long(const Mat4& m) {
  LMat4 out{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out[i][j] = lcplx(m(i, j).real(), m(i, j).imag());
  return out;
}

inline Mat4 to_double(const LMat4& m) {
  Mat4 out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out(i, j) = cplx(static_cast<double>(m[i][j].real()), static_cast<double>(m[i][j].imag()));
  return out;
}

/// Gate fidelity of a pulse in long double, with the Hamiltonian assembled
/// directly from Pauli products rather than the library builders.
inline ld pulse_fidelity(const ddgrape::PulseSequence& pulse, const Mat4& target, const ddgrape::SystemParams& p,
                         const ddgrape::NoiseRealization& noise) {
  const ld pi = 3.14159265358979323846264338327950288L;
  const ld nu1 = p.offset1_hz + noise.offset_shift_hz;
  const ld nu2 = p.offset2_hz + noise.offset_shift_hz;
  const ld j = p.coupling_hz;
  // Diagonal of H_S / (2 pi) for m1, m2 in {+1/2, -1/2}.
  const ld m[2] = {0.5L, -0.5L};
  LMat4 u = lidentity();
  const ld amp = static_cast<ld>(noise.rf_scale) * static_cast<ld>(noise.flip_scale);
  const ld c = std::cos(static_cast<ld>(noise.phase_offset));
  const ld s = std::sin(static_cast<ld>(noise.phase_offset));
  for (const auto& seg : pulse.segments) {
    const ld wx = amp * (c * seg.omega_x - s * seg.omega_y);
    const ld wy = amp * (s * seg.omega_x + c * seg.omega_y);
    LMat4 h{};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) h[2 * a + b][2 * a + b] = 2.0L * pi * (-nu1 * m[a] - nu2 * m[b] + j * m[a] * m[b]);
    // (wx I_x + wy I_y) on one spin: 0.5 * [[0, wx - i wy], [wx + i wy, 0]].
    const lcplx lower(wx / 2.0L, wy / 2.0L);
    const lcplx upper(wx / 2.0L, -wy / 2.0L);
    for (int other = 0; other < 2; ++other) {
      h[0 * 2 + other][1 * 2 + other] += upper;  // spin 1 flip
      h[1 * 2 + other][0 * 2 + other] += lower;
      h[other * 2 + 0][other * 2 + 1] += upper;  // spin 2 flip
      h[other * 2 + 1][other * 2 + 0] += lower;
    }
    u = lmul(taylor_exp(h, static_cast<ld>(pulse.dt)), u);
  }
  lcplx tr = 0.0L;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) tr += std::conj(lcplx(target(b, a).real(), target(b, a).imag())) * u[b][a];
  return std::abs(tr) / 4.0L;
}

inline Mat4 random_unitary(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat4 z;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) z(i, j) = cplx(n(rng), n(rng));
  Eigen::HouseholderQR<Mat4> qr(z);
  return qr.householderQ();
}

inline Mat2 random_unitary2(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat2 z;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) z(i, j) = cplx(n(rng), n(rng));
  Eigen::HouseholderQR<Mat2> qr(z);
  return qr.householderQ();
}

inline Mat4 random_hermitian(std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Mat4 z;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) z(i, j) = cplx(n(rng), n(rng));
  return 0.5 * (z + z.adjoint());
}

inline Vec4 random_pure(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec4 v;
  for (int i = 0; i < 4; ++i) v(i) = cplx(n(rng), n(rng));
  return v / v.norm();
}

/// Mixed state from a random purification onto a `env_dim`-dimensional
/// environment: rho = Tr_E |psi><psi|.
inline Mat4 random_mixed(std::mt19937_64& rng, int env_dim = 4) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXcd psi(4, env_dim);
  for (int i = 0; i < 4; ++i)
    for (int e = 0; e < env_dim; ++e) psi(i, e) = cplx(n(rng), n(rng));
  psi /= psi.norm();
  Mat4 rho = psi * psi.adjoint();
  return 0.5 * (rho + rho.adjoint());
}

inline Mat2 random_qubit_state(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat2 z;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) z(i, j) = cplx(n(rng), n(rng));
  Mat2 rho = z * z.adjoint();
  rho /= rho.trace();
  return 0.5 * (rho + rho.adjoint());
}

inline double entropy2_closed_form(long double a, long double d, long double off_norm2) {
  // Eigenvalues of [[a, b], [b*, d]] from trace and determinant.
  const long double t = a + d;
  const long double det = a * d - off_norm2;
  const long double disc = std::sqrt(std::max(0.0L, t * t - 4.0L * det));
  long double h = 0.0L;
  for (long double lam : {(t + disc) / 2.0L, (t - disc) / 2.0L}) {
    if (lam > 0.0L) h -= lam * std::log2(lam);
  }
  return static_cast<double>(h);
}

/// H(S | measurement of A along n) via explicit 4x4 projectors
/// (1 (x) |e><e|) rho (1 (x) |e><e|) and a manual partial trace.
inline double brute_conditional_entropy(const Mat4& rho, double theta, double phi) {
  const cplx up0 = std::cos(theta / 2.0);
  const cplx up1 = std::polar(1.0, phi) * std::sin(theta / 2.0);
  const std::array<std::array<cplx, 2>, 2> kets{{{up0, up1}, {-std::conj(up1), std::conj(up0)}}};
  double total = 0.0;
  for (const auto& e : kets) {
    Mat2 pa;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) pa(i, j) = e[i] * std::conj(e[j]);
    Mat4 proj = Mat4::Zero();
    for (int s = 0; s < 2; ++s)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) proj(2 * s + i, 2 * s + j) = pa(i, j);
    const Mat4 post = proj * rho * proj;
    const double p = post.trace().real();
    if (p < 1e-12) continue;
    // Tr_A of post / p
    const long double a = (post(0, 0) + post(1, 1)).real() / p;
    const long double d = (post(2, 2) + post(3, 3)).real() / p;
    const cplx b = (post(0, 2) + post(1, 3)) / p;
    total += p * entropy2_closed_form(a, d, std::norm(b));
  }
  return total;
}

struct GridMin {
  double value;
  double theta;
  double phi;
};

/// Exhaustive (theta, phi) grid: theta on [0, pi] inclusive, phi on [0, 2 pi).
inline GridMin brute_grid_minimum(const Mat4& rho, int theta_points, int phi_points) {
  const double pi = 3.14159265358979323846;
  GridMin best{1e300, 0.0, 0.0};
  for (int i = 0; i < theta_points; ++i) {
    const double theta = pi * i / (theta_points - 1);
    for (int k = 0; k < phi_points; ++k) {
      const double phi = 2.0 * pi * k / phi_points;
      const double v = brute_conditional_entropy(rho, theta, phi);
      if (v < best.value) best = {v, theta, phi};
      if (i == 0 || i == theta_points - 1) break;  // poles: phi is irrelevant
    }
  }
  return best;
}

/// Entropy in bits of the reduced state of qubit 1, from a pure state
/// vector via its 2x2 coefficient matrix (Schmidt route).
inline double entanglement_entropy(const Vec4& psi) {
  Mat2 c;
  c << psi(0), psi(1), psi(2), psi(3);
  const Mat2 rs = c * c.adjoint();
  return entropy2_closed_form(rs(0, 0).real(), rs(1, 1).real(), std::norm(rs(0, 1)));
}

}  // namespace oracle
