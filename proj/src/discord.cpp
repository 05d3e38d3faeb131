#include "ddgrape/discord.hpp"

#include "ddgrape/pulse_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace ddgrape {
namespace {

using Vec2 = Eigen::Matrix<cplx, 2, 1>;

Vec2 coherent_state(double theta, double phi) {
  Vec2 v;
  v << std::cos(0.5 * theta), std::polar(std::sin(0.5 * theta), phi);
  return v;
}

// <e|_A rho |e>_A as an (unnormalised) operator on S.
Mat2 project_a(const DensityMatrix& rho, const Vec2& e) {
  Mat2 out;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      cplx acc = 0.0;
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) acc += std::conj(e(k)) * rho(2 * i + k, 2 * j + l) * e(l);
      out(i, j) = acc;
    }
  }
  return out;
}

double conditional_entropy_angles(const DensityMatrix& rho, double theta, double phi) {
  const Vec2 up = coherent_state(theta, phi);
  Vec2 down;
  down << -std::conj(up(1)), std::conj(up(0));
  double total = 0.0;
  for (const Vec2* e : std::array<const Vec2*, 2>{&up, &down}) {
    // p H(block / p) = -sum lambda log2(lambda / p), clamped on the
    // unnormalised scale so rare outcomes do not amplify round-off.
    const Mat2 block = project_a(rho, *e);
    const double p = block.trace().real();
    if (p < 1e-12) continue;
    for (double lambda : hermitian_eigenvalues(block)) {
      if (lambda < -kEigenClampTol) throw ValidationError("invalid state: negative conditional eigenvalue");
      if (lambda > 0.0) total -= lambda * std::log2(lambda / p);
    }
  }
  return total;
}

struct Candidate {
  double value;
  double theta;
  double phi;
};

Candidate compass_refine(const DensityMatrix& rho, Candidate start, double step, double min_step) {
  static constexpr std::array<std::array<double, 2>, 8> kDirs{
      {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};
  Candidate best = start;
  while (step >= min_step) {
    Candidate trial_best = best;
    for (const auto& d : kDirs) {
      const double th = best.theta + d[0] * step;
      const double ph = best.phi + d[1] * step;
      const double v = conditional_entropy_angles(rho, th, ph);
      if (v < trial_best.value) trial_best = {v, th, ph};
    }
    if (trial_best.value < best.value) {
      best = trial_best;
    } else {
      step *= 0.5;
    }
  }
  return best;
}

}  // namespace

MeasurementBasis MeasurementBasis::normalized() const {
  // Reduce to the same Bloch vector with theta in [0, pi], phi in [0, 2 pi).
  double th = std::fmod(theta, kTwoPi);
  if (th < 0.0) th += kTwoPi;
  double ph = phi;
  if (th > kPi) {
    th = kTwoPi - th;
    ph += kPi;
  }
  ph = std::fmod(ph, kTwoPi);
  if (ph < 0.0) ph += kTwoPi;
  if (ph >= kTwoPi) ph = 0.0;
  return {th, ph};
}

std::pair<Mat2, Mat2> projectors(const MeasurementBasis& basis) {
  const double nx = std::sin(basis.theta) * std::cos(basis.phi);
  const double ny = std::sin(basis.theta) * std::sin(basis.phi);
  const double nz = std::cos(basis.theta);
  const Mat2 n_sigma = nx * pauli(Axis::X) + ny * pauli(Axis::Y) + nz * pauli(Axis::Z);
  const Mat2 id = Mat2::Identity();
  return {0.5 * (id + n_sigma), 0.5 * (id - n_sigma)};
}

double mutual_information(const DensityMatrix& rho) {
  return von_neumann_entropy(partial_trace(rho, Subsystem::S)) + von_neumann_entropy(partial_trace(rho, Subsystem::A)) -
         von_neumann_entropy(rho);
}

double conditional_entropy(const DensityMatrix& rho, const MeasurementBasis& basis) {
  return conditional_entropy_angles(rho, basis.theta, basis.phi);
}

std::pair<double, MeasurementBasis> minimize_conditional_entropy(const DensityMatrix& rho,
                                                                 const DiscordSearch& search) {
  const int nt = std::max(2, search.theta_points);
  const int np = std::max(1, search.phi_points);
  const double dtheta = kPi / (nt - 1);
  const double dphi = kTwoPi / np;

  std::vector<double> grid(static_cast<std::size_t>(nt) * np);
  auto at = [&](int i, int j) -> double& { return grid[static_cast<std::size_t>(i) * np + j]; };
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < np; ++j) at(i, j) = conditional_entropy_angles(rho, i * dtheta, j * dphi);

  // Grid local minima, ordered by value then (theta, phi) index so ties go to
  // the lowest theta and then the lowest phi.
  std::vector<std::pair<Candidate, int>> minima;
  for (int i = 0; i < nt; ++i) {
    for (int j = 0; j < np; ++j) {
      const double v = at(i, j);
      bool is_min = true;
      for (int di = -1; di <= 1 && is_min; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          const int ii = i + di;
          if (ii < 0 || ii >= nt) continue;
          const int jj = (j + dj + np) % np;
          if (at(ii, jj) < v) {
            is_min = false;
            break;
          }
        }
      }
      if (is_min) minima.push_back({{v, i * dtheta, j * dphi}, i * np + j});
    }
  }
  std::stable_sort(minima.begin(), minima.end(), [](const auto& a, const auto& b) {
    if (a.first.value != b.first.value) return a.first.value < b.first.value;
    return a.second < b.second;
  });

  Candidate best = minima.front().first;
  const int starts = std::min<int>(std::max(1, search.refine_starts), static_cast<int>(minima.size()));
  for (int s = 0; s < starts; ++s) {
    const Candidate refined = compass_refine(rho, minima[s].first, std::min(dtheta, dphi), search.min_refine_step);
    if (refined.value < best.value) best = refined;
  }
  return {best.value, MeasurementBasis{best.theta, best.phi}.normalized()};
}

DiscordResult quantum_discord(const DensityMatrix& rho, std::optional<double> epsilon,
                              const DiscordSearch& search) {
  validate_density(rho);
  const double h_joint = von_neumann_entropy(rho);
  const double h_s = von_neumann_entropy(partial_trace(rho, Subsystem::S));
  const double h_a = von_neumann_entropy(partial_trace(rho, Subsystem::A));
  const auto [min_cond, basis] = minimize_conditional_entropy(rho, search);

  DiscordResult out;
  out.mutual_information = h_s + h_a - h_joint;
  out.classical_correlation = h_s - min_cond;
  out.discord = h_a - h_joint + min_cond;
  if (out.discord < 0.0 && out.discord >= -1e-8) out.discord = 0.0;
  out.argmin_basis = basis;
  if (epsilon && *epsilon > 0.0) out.scaled_discord = out.discord * std::log(2.0) / (*epsilon * *epsilon);
  return out;
}

namespace {

cplx parse_complex_token(const std::string& tok) {
  // Accepts `re`, `re+imj`, `re-imj`, `imj`.
  const auto fail = [&] { return ValidationError("state file: cannot parse complex entry '" + tok + "'"); };
  if (tok.empty()) throw fail();
  if (tok.back() != 'j') {
    std::size_t used = 0;
    double re = 0.0;
    try {
      re = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw fail();
    }
    if (used != tok.size()) throw fail();
    return {re, 0.0};
  }
  const std::string body = tok.substr(0, tok.size() - 1);
  // Split at the last sign that is not part of an exponent and not leading.
  std::size_t split = std::string::npos;
  for (std::size_t i = body.size(); i-- > 1;) {
    if ((body[i] == '+' || body[i] == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  try {
    std::size_t used = 0;
    if (split == std::string::npos) {
      const double im = std::stod(body, &used);
      if (used != body.size()) throw fail();
      return {0.0, im};
    }
    const std::string re_text = body.substr(0, split);
    const std::string im_text = body.substr(split);
    const double re = std::stod(re_text, &used);
    if (used != re_text.size()) throw fail();
    const double im = std::stod(im_text, &used);
    if (used != im_text.size()) throw fail();
    return {re, im};
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception&) {
    throw fail();
  }
}

}  // namespace

DensityMatrix read_state(std::istream& is) {
  std::vector<cplx> entries;
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string tok;
    while (tokens >> tok) entries.push_back(parse_complex_token(tok));
  }
  if (entries.size() != 16) {
    throw ValidationError("state file: expected 16 complex entries, found " + std::to_string(entries.size()));
  }
  DensityMatrix rho;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) rho(i, j) = entries[static_cast<std::size_t>(4 * i + j)];
  return rho;
}

DensityMatrix read_state_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open state file: " + path.string());
  return read_state(is);
}

void write_state(std::ostream& os, const DensityMatrix& rho) {
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const double im = rho(i, j).imag();
      os << (j ? " " : "") << format_double(rho(i, j).real()) << (std::signbit(im) ? "-" : "+")
         << format_double(std::abs(im)) << 'j';
    }
    os << '\n';
  }
}

}  // namespace ddgrape
