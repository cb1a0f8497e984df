#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ferrosyn/device_model.hpp"
#include "ferrosyn/error.hpp"
#include "ferrosyn/random.hpp"

using namespace ferrosyn;
using namespace ferrosyn::device;

namespace {

// Frozen by tests/oracles/derive_expected.py (50-digit arithmetic).
constexpr double kUpperMinus3 = 1100193051.3088228;
constexpr double kLowerPlus3 = 2486957656.9169066;
constexpr double kLowerHalf = 1134894197.3059597;
constexpr double kLowerPlus2 = 2207948061.7435371;
constexpr double kHrs = 2498920185.512798;
constexpr double kWeightMid = 0.30555555555555556;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an exception";
  return ErrorCode::Io;
}

}  // namespace

TEST(Envelope, UpperMidpoint) { EXPECT_NEAR(eval_envelope(table1_rule().upper, -1.0), 1.8e9, 1.8e9 * 1e-9); }

TEST(Envelope, SpotValues) {
  const auto rule = table1_rule();
  EXPECT_NEAR(eval_envelope(rule.upper, -3.0), kUpperMinus3, kUpperMinus3 * 1e-9);
  EXPECT_NEAR(eval_envelope(rule.lower, 3.0), kLowerPlus3, kLowerPlus3 * 1e-9);
  EXPECT_NEAR(eval_envelope(rule.lower, 0.5), kLowerHalf, kLowerHalf * 1e-9);
}

TEST(Envelope, OrderOverWideRange) {
  const auto rule = table1_rule();
  for (double v = -4.0; v <= 4.0; v += 1e-3) {
    EXPECT_GE(eval_envelope(rule.upper, v), eval_envelope(rule.lower, v)) << v;
  }
}

TEST(Envelope, RejectsBadParameters) {
  EnvelopeParams p{2.5e9, 1.1e9, 0.6, 1.6};
  EXPECT_EQ(code_of([&] { p.validate(); }), ErrorCode::InvalidParameter);
  p = {1.1e9, 2.5e9, 0.0, 1.6};
  EXPECT_EQ(code_of([&] { p.validate(); }), ErrorCode::InvalidParameter);
}

TEST(Rule, HrsAndLrs) {
  const auto rule = table1_rule();
  EXPECT_NEAR(rule.hrs(), kHrs, kHrs * 1e-9);
  EXPECT_LT(rule.lrs(), 1.1e9 * (1 + 1e-3));
  EXPECT_GT(rule.lrs(), 1.1e9);
}

TEST(ApplyPulse, NegativeSetsUpperBranch) {
  const auto s = apply_pulse({2.0e9}, table1_rule(), {-3.0, 20e-9});
  EXPECT_NEAR(s.resistance, kUpperMinus3, kUpperMinus3 * 1e-9);
}

TEST(ApplyPulse, PositiveSetsLowerBranch) {
  const auto s = apply_pulse({1.10e9}, table1_rule(), {0.5, 20e-9});
  EXPECT_NEAR(s.resistance, kLowerHalf, kLowerHalf * 1e-9);
}

TEST(ApplyPulse, BelowEnvelopeIsUnchanged) {
  EXPECT_LT(eval_envelope(table1_rule().lower, 2.0), 2.487e9);
  EXPECT_NEAR(eval_envelope(table1_rule().lower, 2.0), kLowerPlus2, kLowerPlus2 * 1e-9);
  EXPECT_EQ(apply_pulse({2.487e9}, table1_rule(), {2.0, 20e-9}).resistance, 2.487e9);
}

TEST(ApplyPulse, ZeroVoltsIsNoOp) {
  for (double r : {1.2e9, 1.8e9, 2.4e9}) EXPECT_EQ(apply_pulse({r}, table1_rule(), {0.0, 20e-9}).resistance, r);
}

TEST(ApplyPulse, Errors) {
  const auto rule = table1_rule();
  EXPECT_EQ(code_of([&] { apply_pulse({1.8e9}, rule, {4.0, 20e-9}); }), ErrorCode::OutOfCalibratedRange);
  EXPECT_EQ(code_of([&] { apply_pulse({1.8e9}, rule, {-3.76, 20e-9}); }), ErrorCode::OutOfCalibratedRange);
  EXPECT_EQ(code_of([&] { apply_pulse({1.8e9}, rule, {1.0, 10e-9}); }), ErrorCode::PulseTooShort);
  EXPECT_EQ(code_of([&] { apply_pulse({3e9}, rule, {1.0, 20e-9}); }), ErrorCode::OutOfRange);
  // The validity edge itself is allowed.
  EXPECT_NO_THROW(apply_pulse({1.8e9}, rule, {3.75, 20e-9}));
}

TEST(Weight, Endpoints) {
  const auto rule = table1_rule();
  EXPECT_DOUBLE_EQ(resistance_to_weight(1.1e9, rule), 1.0);
  EXPECT_DOUBLE_EQ(resistance_to_weight(2.5e9, rule), 0.0);
}

TEST(Weight, NormalizedConductanceAtMidpoint) {
  EXPECT_NEAR(resistance_to_weight(1.8e9, table1_rule()), kWeightMid, 1e-12);
}

TEST(Weight, RoundTrip) {
  const auto rule = table1_rule();
  for (double w = 0.0; w <= 1.0; w += 0.01) {
    EXPECT_NEAR(resistance_to_weight(weight_to_resistance(w, rule), rule), w, 1e-12);
  }
}

TEST(Staircase, PositiveRampTracksLowerBranch) {
  const auto rule = table1_rule();
  const auto sched = ltp_ltd_schedule(3.0, 0.1, 20e-9);
  const auto trace = simulate_staircase(rule, sched, DeviceState{rule.lrs()});
  double prev = 0.0;
  for (const auto& p : trace) {
    if (p.pulse.amplitude <= 0.0) break;
    EXPECT_GE(p.r_final, prev);
    EXPECT_GE(p.r_final, eval_envelope(rule.lower, p.pulse.amplitude) * (1 - 1e-12));
    prev = p.r_final;
  }
}

TEST(Staircase, DescendingBranchIsFlat) {
  const auto rule = table1_rule();
  const auto sched = loop_schedule(3.0, 0.1, 0.1, 20e-9);
  const auto trace = simulate_staircase(rule, sched, DeviceState{rule.lrs()});
  std::size_t peak = 0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace[i].pulse.amplitude == 3.0) peak = i;
  }
  ASSERT_GT(peak, 0u);
  for (std::size_t i = peak + 1; i < trace.size(); ++i) EXPECT_EQ(trace[i].r_final, trace[peak].r_final);
}

TEST(Staircase, RepeatedLoopsOverlap) {
  const auto rule = table1_rule();
  const std::vector<PulseSpec> loop = loop_schedule(3.0, -3.0, 0.25, 20e-9);
  std::vector<PulseSpec> three;
  for (int k = 0; k < 3; ++k) three.insert(three.end(), loop.begin(), loop.end());
  const auto trace = simulate_staircase(rule, three);
  // After the first loop every loop starts from f_upper(-3), so the second and
  // third traces coincide exactly.
  const std::size_t n = loop.size();
  for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(trace[n + i].r_final, trace[2 * n + i].r_final) << i;
}

TEST(Staircase, ErrorCarriesIndex) {
  const std::vector<PulseSpec> sched{{1.0, 20e-9}, {2.0, 20e-9}, {5.0, 20e-9}};
  try {
    simulate_staircase(table1_rule(), sched);
    FAIL();
  } catch (const ScheduleError& e) {
    EXPECT_EQ(e.index(), 2u);
    EXPECT_EQ(e.code(), ErrorCode::OutOfCalibratedRange);
  }
}

TEST(RandomPulses, InsideRegionAndOnEnvelope) {
  const auto rule = table1_rule();
  const auto trace = simulate_random_pulses(rule, 300, -3.0, 3.0, 7);
  ASSERT_EQ(trace.size(), 300u);
  for (const auto& p : trace) {
    EXPECT_TRUE(inside_envelope(rule, p.pulse.amplitude, p.r_final));
    if (p.delta_r() != 0.0) EXPECT_TRUE(on_envelope(rule, p.pulse.amplitude, p.r_final));
  }
}

TEST(RandomPulses, BitReproducible) {
  const auto a = simulate_random_pulses(table1_rule(), 500, -3.0, 3.0, 42);
  const auto b = simulate_random_pulses(table1_rule(), 500, -3.0, 3.0, 42);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].pulse.amplitude, b[i].pulse.amplitude);
    EXPECT_EQ(a[i].r_final, b[i].r_final);
  }
  const auto c = simulate_random_pulses(table1_rule(), 500, -3.0, 3.0, 43);
  EXPECT_NE(a[0].pulse.amplitude, c[0].pulse.amplitude);
}

TEST(RandomPulses, PositiveOnlyFromHrsNeverRaisesPastStart) {
  const auto rule = table1_rule();
  const auto trace = simulate_random_pulses(rule, 1, 0.1, 3.0, 3);
  EXPECT_LE(trace[0].delta_r(), 0.0 + 1e-3);
  EXPECT_GE(trace[0].delta_r(), 0.0);
}

// Property suite over seeded random pulse sequences.
class UpdateRuleProperties : public ::testing::Test {
 protected:
  DeviceRule rule = table1_rule();
  Rng rng{20240607};

  double random_state() { return rng.uniform(rule.lrs(), rule.hrs()); }
  double random_voltage() { return rng.uniform(-3.75, 3.75); }
};

TEST_F(UpdateRuleProperties, PolarityMonotoneIdempotentBounded) {
  for (int seq = 0; seq < 100000; ++seq) {
    DeviceState s{random_state()};
    for (int k = 0; k < 4; ++k) {
      const PulseSpec p{random_voltage(), 20e-9};
      const DeviceState next = apply_pulse(s, rule, p);
      if (p.amplitude < 0.0) ASSERT_LE(next.resistance, s.resistance);
      if (p.amplitude > 0.0) ASSERT_GE(next.resistance, s.resistance);
      ASSERT_EQ(apply_pulse(next, rule, p), next);
      ASSERT_GT(next.resistance, 1.1e9);
      ASSERT_LT(next.resistance, 2.5e9);
      s = next;
    }
  }
}

TEST_F(UpdateRuleProperties, AmplitudeDominance) {
  for (int seq = 0; seq < 100000; ++seq) {
    const double v1 = rng.uniform(0.01, 3.75);
    const double v2 = rng.uniform(0.0, 1.0) * v1;
    const double sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
    const DeviceState s1 = apply_pulse({random_state()}, rule, {sign * v1, 20e-9});
    ASSERT_EQ(apply_pulse(s1, rule, {sign * v2, 20e-9}), s1);
  }
}

TEST_F(UpdateRuleProperties, InitialStateIndependence) {
  // From any state, a pulse whose envelope value lies beyond both states
  // triggers the same branch and lands on the same resistance.
  for (int seq = 0; seq < 100000; ++seq) {
    const double a = random_state();
    const double b = random_state();
    const double v = random_voltage();
    const double target = eval_envelope(v < 0 ? rule.upper : rule.lower, v);
    const bool both_trigger = v < 0 ? (a > target && b > target) : (v > 0 && a < target && b < target);
    if (!both_trigger) continue;
    ASSERT_EQ(apply_pulse({a}, rule, {v, 20e-9}).resistance, apply_pulse({b}, rule, {v, 20e-9}).resistance);
  }
  // Full-amplitude pulses trigger from every reachable state.
  for (int seq = 0; seq < 1000; ++seq) {
    const double a = random_state();
    const double b = random_state();
    EXPECT_EQ(apply_pulse({a}, rule, {-3.75, 20e-9}), apply_pulse({b}, rule, {-3.75, 20e-9}));
    EXPECT_EQ(apply_pulse({a}, rule, {3.75, 20e-9}), apply_pulse({b}, rule, {3.75, 20e-9}));
  }
}
