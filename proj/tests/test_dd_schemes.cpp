#include "ddgrape/dd_schemes.hpp"

#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace ddgrape;

namespace {

DDScheme scheme(int flip, std::vector<DDPhase> phases, int spacing) { return {flip, std::move(phases), spacing}; }

std::vector<std::size_t> indices(const DDPlacement& p) {
  std::vector<std::size_t> out;
  for (const auto& pulse : p.pulses) out.push_back(pulse.index);
  return out;
}

std::vector<DDPhase> phases(const DDPlacement& p) {
  std::vector<DDPhase> out;
  for (const auto& pulse : p.pulses) out.push_back(pulse.phase);
  return out;
}

// Interleaved product written out independently of toggling_check.
Unitary interleaved(const std::vector<Unitary>& u, const DDPlacement& placement) {
  Unitary acc = u[0];
  for (std::size_t j = 0; j < placement.count(); ++j) {
    acc = ideal_dd_propagator(placement.pulses[j].flip_deg, placement.pulses[j].phase) * acc;
    acc = u[j + 1] * acc;
  }
  return acc;
}

}  // namespace

using enum DDPhase;

TEST(ParseScheme, Descriptors) {
  EXPECT_FALSE(parse_scheme("none").has_value());
  const auto s = parse_scheme("xy:90:1000");
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(s->flip_deg, 90);
  EXPECT_EQ(s->spacing, 1000);
  EXPECT_EQ(s->phases, (std::vector<DDPhase>{X, Y}));
  EXPECT_EQ(parse_scheme("XX:180:2000")->phases, (std::vector<DDPhase>{X, X}));
}

TEST(ParseScheme, RoundTrip) {
  for (const char* text : {"none", "x:90:2000", "xy:90:1000", "xx:180:2000", "xyxy:180:4", "yxxy:90:7"})
    EXPECT_EQ(format_scheme(parse_scheme(text)), text);
  const DDScheme s = scheme(180, {Y, X, Y}, 13);
  EXPECT_EQ(parse_scheme(format_scheme(s)), s);
}

TEST(ParseScheme, RejectsMalformed) {
  for (const char* text : {"", "xy", "xy:90", "xy:45:100", "xz:90:100", ":90:100", "xy:90:0", "xy:90:-5",
                           "xy:90:abc", "xy:90:100:1", "xy:ninety:100"})
    EXPECT_THROW(parse_scheme(text), ValidationError) << text;
}

TEST(PlaceDd, PlacementRule) {
  const auto single = place_dd(2000, scheme(90, {X}, 2000));
  EXPECT_EQ(indices(single), (std::vector<std::size_t>{1000}));
  EXPECT_EQ(phases(single), (std::vector<DDPhase>{X}));

  const auto two = place_dd(2000, scheme(90, {X, Y}, 1000));
  EXPECT_EQ(indices(two), (std::vector<std::size_t>{500, 1500}));
  EXPECT_EQ(phases(two), (std::vector<DDPhase>{X, Y}));

  const auto small = place_dd(8, scheme(180, {X, Y}, 4));
  EXPECT_EQ(indices(small), (std::vector<std::size_t>{2, 6}));
  EXPECT_EQ(phases(small), (std::vector<DDPhase>{X, Y}));
}

TEST(PlaceDd, DeskScaleCountsAndPartialBlock) {
  const auto p = place_dd(1470, *parse_scheme("xy:90:100"));
  EXPECT_EQ(p.count(), 14u);
  EXPECT_EQ(p.pulses.back().index, 1350u);
  EXPECT_EQ(place_dd(1470, *parse_scheme("xy:90:200")).count(), 7u);
  EXPECT_EQ(place_dd(7, scheme(90, {X}, 3)).count(), 2u);
  const auto odd = place_dd(7, scheme(90, {X, Y, Y}, 1));
  EXPECT_EQ(indices(odd), (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(odd.pulses[3].phase, X);
  EXPECT_THROW(place_dd(99, scheme(90, {X}, 100)), ValidationError);
}

TEST(IdealDdPropagator, CollectiveRotations) {
  const Mat4 sxsx = kron(pauli(Axis::X), pauli(Axis::X));
  EXPECT_LE(max_abs_entry(ideal_dd_propagator(180, X) + sxsx), 1e-12);
  const Unitary hx = ideal_dd_propagator(90, X);
  EXPECT_LE(max_abs_entry(hx * hx - ideal_dd_propagator(180, X)), 1e-12);
  const Unitary hy = ideal_dd_propagator(90, Y);
  EXPECT_LE(phase_aligned_distance(hy * hy * hy * hy, Mat4::Identity()), 1e-12);
  EXPECT_LE(max_abs_entry(hy * hy * hy * hy - Mat4::Identity()), 1e-12);
}

TEST(FreezeInto, SetsAmplitudesAndMask) {
  PulseSequence p;
  p.dt = 5.1e-6;
  p.omega_max = kPi / p.dt;
  p.segments.assign(8, {100.0, -50.0, false});
  EXPECT_EQ(freeze_into(p, DDPlacement{}).segments[3].omega_x, 100.0);

  const auto placement = place_dd(8, scheme(180, {X, Y}, 4));
  const PulseSequence f = freeze_into(p, placement);
  EXPECT_EQ(f.frozen_count(), placement.count());
  EXPECT_TRUE(f.segments[2].frozen);
  EXPECT_NEAR(f.segments[2].omega_x, 6.160e5, 1e2);
  EXPECT_DOUBLE_EQ(f.segments[2].omega_x, kPi / 5.1e-6);
  EXPECT_EQ(f.segments[2].omega_y, 0.0);
  EXPECT_EQ(f.segments[6].omega_x, 0.0);
  EXPECT_DOUBLE_EQ(f.segments[6].omega_y, kPi / 5.1e-6);
  for (std::size_t k : {0u, 1u, 3u, 4u, 5u, 7u}) {
    EXPECT_FALSE(f.segments[k].frozen);
    EXPECT_EQ(f.segments[k].omega_x, 100.0);
  }
}

TEST(FreezeInto, Idempotent) {
  PulseSequence p;
  p.dt = 1e-5;
  p.omega_max = 1e6;
  p.segments.assign(20, {1.0, 2.0, false});
  const auto placement = place_dd(20, scheme(90, {X, Y}, 5));
  const PulseSequence once = freeze_into(p, placement);
  const PulseSequence twice = freeze_into(once, placement);
  for (std::size_t k = 0; k < 20; ++k) {
    EXPECT_EQ(once.segments[k].omega_x, twice.segments[k].omega_x);
    EXPECT_EQ(once.segments[k].omega_y, twice.segments[k].omega_y);
    EXPECT_EQ(once.segments[k].frozen, twice.segments[k].frozen);
  }
}

TEST(FreezeInto, RejectsOverAmplitudeAndOutOfRange) {
  PulseSequence p;
  p.dt = 5.1e-6;
  p.omega_max = 0.5 * kPi / p.dt;
  p.segments.assign(8, {});
  EXPECT_THROW(freeze_into(p, place_dd(8, scheme(180, {X}, 4))), ValidationError);
  EXPECT_NO_THROW(freeze_into(p, place_dd(8, scheme(90, {X}, 4))));
  DDPlacement outside;
  outside.pulses.push_back({12, 90, X});
  EXPECT_THROW(freeze_into(p, outside), ValidationError);
}

TEST(TogglingCheck, NoPulses) {
  std::mt19937_64 rng(1);
  const std::vector<Unitary> u{oracle::random_unitary(rng)};
  const auto r = toggling_check(u, DDPlacement{});
  EXPECT_LE(r.deviation, 1e-15);
  EXPECT_TRUE(r.cyclic);
}

TEST(TogglingCheck, XY4IsCyclic) {
  std::mt19937_64 rng(3);
  const auto placement = place_dd(16, scheme(180, {X, Y, X, Y}, 4));
  std::vector<Unitary> u;
  for (std::size_t j = 0; j <= placement.count(); ++j) u.push_back(oracle::random_unitary(rng));
  const auto r = toggling_check(u, placement);
  EXPECT_LE(r.deviation, 1e-10);
  EXPECT_LE(r.uncorrected_deviation, 1e-10);
  EXPECT_TRUE(r.cyclic);
}

TEST(TogglingCheck, SinglePiPulseNeedsNetRotation) {
  std::mt19937_64 rng(5);
  const auto placement = place_dd(4, scheme(180, {X}, 4));
  const std::vector<Unitary> u{oracle::random_unitary(rng), oracle::random_unitary(rng)};
  const auto r = toggling_check(u, placement);
  EXPECT_LE(r.deviation, 1e-10);
  EXPECT_GT(r.uncorrected_deviation, 1e-3);
  EXPECT_FALSE(r.cyclic);
}

TEST(TogglingCheck, RandomProductsAllSchemes) {
  std::mt19937_64 rng(7);
  const char* descriptors[] = {"x:90:1", "xy:90:1", "xx:180:1", "xy:180:1", "yxy:90:1", "xyxy:180:1"};
  for (const char* d : descriptors) {
    for (std::size_t m = 0; m <= 8; ++m) {
      const auto s = *parse_scheme(d);
      const auto placement = m == 0 ? DDPlacement{} : place_dd(m, s);
      std::vector<Unitary> u;
      for (std::size_t j = 0; j <= placement.count(); ++j) u.push_back(oracle::random_unitary(rng));
      const auto r = toggling_check(u, placement);
      EXPECT_LE(r.deviation, 1e-10) << d << " M=" << m;
      // Cross-check the interleaved side against a direct product.
      const Unitary direct = interleaved(u, placement);
      Unitary toggled = Unitary::Identity();
      Unitary t = Unitary::Identity();
      for (std::size_t j = 0; j <= placement.count(); ++j) {
        toggled = t.adjoint() * u[j] * t * toggled;
        if (j < placement.count())
          t = ideal_dd_propagator(placement.pulses[j].flip_deg, placement.pulses[j].phase) * t;
      }
      EXPECT_LE(phase_aligned_distance(direct, t * toggled), 1e-10);
      EXPECT_EQ(r.cyclic, phase_aligned_distance(net_rotation(placement), Unitary::Identity()) <= 1e-10);
    }
  }
}
