#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "qnet/argand.hpp"
#include "qnet/verify.hpp"
#include "test_util.hpp"

using namespace qnet;
using qnet::test::code_of;
using std::numbers::pi;

namespace {

const cplx I(0, 1);

ArgandTrajectory circle(cplx centre, double radius, int n, double turns = 1.0) {
  ArgandTrajectory t;
  for (int j = 0; j <= n; ++j) {
    ArgandSample s;
    s.param = j;
    s.s = centre + radius * std::exp(I * (2.0 * pi * turns * j / n));
    s.mag2 = std::norm(s.s);
    t.samples.push_back(s);
  }
  return t;
}

SubLoop whole(const ArgandTrajectory& t) {
  SubLoop l;
  l.start_index = 0;
  l.end_index = t.samples.size() - 1;
  return l;
}

auto preset_family = [](double u1) {
  ThreeProngParams p;
  p.u1 = u1;
  return three_prong_preset(p);
};

}  // namespace

TEST(Winding, UnitCircleAroundOrigin) {
  const auto t = circle(0.0, 1.0, 64);
  EXPECT_EQ(winding_number(whole(t), t), 1);
  EXPECT_NEAR(loop_phase_integral(whole(t), t), 2.0 * pi, 1e-12);
  EXPECT_NEAR(loop_magnitude_integral(whole(t), t), 0.0, 1e-14);
}

TEST(Winding, DoubleTurnAndReverse) {
  const auto t2 = circle(0.0, 0.4, 200, 2.0);
  EXPECT_EQ(winding_number(whole(t2), t2), 2);
  const auto tr = circle(0.0, 0.4, 100, -1.0);
  EXPECT_EQ(winding_number(whole(tr), tr), -1);
}

TEST(Winding, OffsetCircleDoesNotEnclose) {
  const auto t = circle(2.0, 0.5, 64);
  EXPECT_EQ(winding_number(whole(t), t), 0);
  EXPECT_NEAR(loop_phase_integral(whole(t), t), 0.0, 1e-12);
}

TEST(Winding, ZeroOnLoop) {
  auto t = circle(0.0, 1.0, 64);
  t.samples[10].s = 0.0;
  EXPECT_EQ(code_of([&] { winding_number(whole(t), t); }), ErrorCode::ZeroOnLoop);
  EXPECT_EQ(code_of([&] { loop_phase_integral(whole(t), t); }), ErrorCode::ZeroOnLoop);
}

TEST(Winding, DegenerateLoops) {
  ArgandTrajectory t;
  for (int j = 0; j < 5; ++j) t.samples.push_back({double(j), cplx(0.3, 0.1), 0.0, 0.1, false});
  EXPECT_EQ(winding_number(whole(t), t), 0);
  SubLoop single;
  single.start_index = single.end_index = 2;
  EXPECT_EQ(winding_number(single, t), 0);
  EXPECT_EQ(loop_phase_integral(single, t), 0.0);
}

TEST(SubLoops, SyntheticCircleIsOneLoop) {
  const auto t = circle(0.0, 1.0, 128);
  const auto loops = detect_subloops(t);
  ASSERT_EQ(loops.size(), 1u);
  EXPECT_EQ(loops[0].start_index, 0u);
  EXPECT_EQ(loops[0].end_index, 128u);
  EXPECT_EQ(loops[0].winding, 1);
  EXPECT_NEAR(loops[0].phase_integral, 2.0 * pi, 1e-3);
  EXPECT_NEAR(loops[0].diameter, 2.0, 1e-3);
  EXPECT_EQ(loop_id_of(loops, 0), 0);
  EXPECT_EQ(loop_id_of(loops, 127), 0);
  EXPECT_EQ(loop_id_of(loops, 128), -1);
}

TEST(SubLoops, BackToBackLoopsFoundSeparately) {
  // two circles sharing the point 1 + 0i, one around the origin and one not
  auto t = circle(0.0, 1.0, 100);
  const auto second = circle(2.0, 1.0, 100);
  for (std::size_t j = 1; j < second.samples.size(); ++j) {
    auto s = second.samples[j];
    s.s = 2.0 - (second.samples[j].s - 2.0);  // start at 1 + 0i
    s.mag2 = std::norm(s.s);
    s.param = 100.0 + static_cast<double>(j);
    t.samples.push_back(s);
  }
  const auto loops = detect_subloops(t);
  ASSERT_EQ(loops.size(), 2u);
  EXPECT_EQ(loops[0].winding, 1);
  EXPECT_EQ(loops[1].winding, 0);
}

TEST(SubLoops, OpenArcHasNoLoop) {
  ArgandTrajectory t;
  for (int j = 0; j <= 100; ++j) {
    const cplx s = 0.5 + 0.5 * std::exp(I * (pi * j / 100.0));
    t.samples.push_back({double(j), s, 0.0, std::norm(s), false});
  }
  EXPECT_TRUE(detect_subloops(t).empty());
}

TEST(Sweep, FreeWireTracesUnitCircleOnce) {
  const double len = 1.5;
  auto family = [&](double) { return oracle::free_wire(len); };
  SweepSettings cfg;
  cfg.initial_points = 64;
  const auto t = sweep_parameter(family, {"2", "1"}, 1.0, 1.0 + 2.0 * pi / len, SweepKind::K, 0.0, cfg);
  ASSERT_GE(t.samples.size(), 64u);
  for (std::size_t n = 0; n < t.samples.size(); ++n) {
    EXPECT_NEAR(t.samples[n].mag2, 1.0, 1e-12);
    if (n) EXPECT_LT(std::abs(t.samples[n].s - t.samples[n - 1].s), cfg.delta_step);
    if (n) EXPECT_GT(t.samples[n].param, t.samples[n - 1].param);
  }
  EXPECT_NEAR(t.samples.back().theta - t.samples.front().theta, 2.0 * pi, 1e-9);
  const auto loops = detect_subloops(t);
  ASSERT_EQ(loops.size(), 1u);
  EXPECT_EQ(loops[0].winding, 1);
  EXPECT_NEAR(loops[0].phase_integral, 2.0 * pi, 1e-3);
}

TEST(Sweep, DeltaBarrierArcHasNoLoop) {
  auto family = [](double u) { return oracle::delta_barrier(u); };
  const auto t = sweep_parameter(family, {"2", "1"}, -20.0, 20.0, SweepKind::U1, 1.0);
  for (const auto& s : t.samples) EXPECT_LT(std::abs(s.s - oracle::delta_transmission(1.0, s.param)), 1e-12);
  EXPECT_TRUE(detect_subloops(t).empty());
}

TEST(Sweep, PresetBarrierSweepHasThreeLoops) {
  SweepSettings cfg;
  cfg.initial_points = 512;
  cfg.delta_step = 0.002;
  cfg.workers = 4;
  const auto t = sweep_parameter(preset_family, {"3", "1"}, -10.0, -1000.0, SweepKind::U1, 4.0, cfg);
  for (std::size_t n = 1; n < t.samples.size(); ++n) EXPECT_LT(t.samples[n].param, t.samples[n - 1].param);
  const auto loops = detect_subloops(t);
  ASSERT_GE(loops.size(), 3u);
  for (const auto& l : loops) {
    EXPECT_FALSE(l.zero_on_loop);
    EXPECT_EQ(l.winding, 0);
    EXPECT_LE(std::abs(l.phase_integral), 1e-3);
    EXPECT_LE(std::abs(l.magnitude_integral), 2.0 * loop_max_abs(l, t) * l.closure_gap + 1e-15);
  }
}

TEST(Sweep, DeterministicAcrossWorkerCounts) {
  SweepSettings a;
  a.initial_points = 128;
  SweepSettings b = a;
  b.workers = 4;
  const auto ta = sweep_parameter(preset_family, {"3", "1"}, -10.0, -200.0, SweepKind::U1, 4.0, a);
  const auto tb = sweep_parameter(preset_family, {"3", "1"}, -10.0, -200.0, SweepKind::U1, 4.0, b);
  ASSERT_EQ(ta.samples.size(), tb.samples.size());
  for (std::size_t n = 0; n < ta.samples.size(); ++n) {
    EXPECT_EQ(ta.samples[n].param, tb.samples[n].param);
    EXPECT_EQ(ta.samples[n].s, tb.samples[n].s);
  }
}

TEST(Sweep, SubdivisionCap) {
  SweepSettings cfg;
  cfg.initial_points = 8;
  cfg.max_depth = 6;
  auto step = [](double p) { return p < 0.3 ? cplx(1.0) : cplx(-1.0); };
  EXPECT_EQ(code_of([&] { adaptive_sweep(step, 0.0, 1.0, cfg); }), ErrorCode::SubdivisionCapExceeded);
}

TEST(Sweep, NearZeroSamplesCarryNoPhase) {
  SweepSettings cfg;
  cfg.initial_points = 3;
  auto f = [](double p) { return cplx(p, 0.0); };
  const auto s = adaptive_sweep(f, -1.0, 1.0, cfg);
  bool saw_zero = false;
  for (const auto& x : s)
    if (x.param == 0.0) {
      saw_zero = true;
      EXPECT_TRUE(x.near_zero);
      EXPECT_TRUE(std::isnan(x.theta));
    }
  EXPECT_TRUE(saw_zero);
}

TEST(Eq10Helpers, SignChangesSkipZeros) {
  EXPECT_EQ(detail::sign_changes({1, -1, 1}), 2);
  EXPECT_EQ(detail::sign_changes({1, 0, 1, 0, -2}), 1);
  EXPECT_EQ(detail::sign_changes({}), 0);
}

TEST(Eq10Helpers, WeightedPearson) {
  const std::vector<double> k{0, 0.1, 0.15, 0.5, 1.0};
  const auto w = detail::trapezoid_weights(k);
  double sw = 0;
  for (double x : w) sw += x;
  EXPECT_NEAR(sw, 1.0, 1e-15);
  const std::vector<double> x{1, 2, 3, 4, 5}, y{3, 5, 7, 9, 11}, z{-1, -2, -3, -4, -5};
  EXPECT_NEAR(detail::weighted_pearson(x, y, w), 1.0, 1e-14);
  EXPECT_NEAR(detail::weighted_pearson(x, z, w), -1.0, 1e-14);
  EXPECT_TRUE(std::isnan(detail::weighted_pearson(x, {1, 1, 1, 1, 1}, w)));
}

TEST(Eq10Scan, FreeWireGivesZeros) {
  auto family = [](double) { return oracle::free_wire(1.0); };
  Eq10Settings cfg;
  cfg.points = 50;
  const auto scan = eq10_scan(family, 0.5, 3.0, 10.0, 1.0, {"2", "1"}, cfg);
  ASSERT_EQ(scan.records.size(), 50u);
  for (const auto& r : scan.records) {
    EXPECT_EQ(r.flag, kEq10Ok);
    EXPECT_NEAR(r.lhs, 0.0, 1e-14);
    EXPECT_NEAR(r.rhs, 0.0, 1e-14);
  }
}

TEST(Eq10Scan, ZeroStepRejected) {
  EXPECT_EQ(code_of([] { eq10_scan(preset_family, 0.2, 8.0, 100.0, 0.0, {"3", "1"}); }), ErrorCode::InvalidArgument);
}

TEST(Eq10Scan, ReversedStepFlipsBothSeries) {
  Eq10Settings cfg;
  cfg.points = 200;
  cfg.refine_levels = 0;
  const auto up = eq10_scan(preset_family, 0.3, 4.0, 100.0, 1e-3, {"3", "1"}, cfg);
  const auto down = eq10_scan(preset_family, 0.3, 4.0, 100.0, -1e-3, {"3", "1"}, cfg);
  ASSERT_EQ(up.records.size(), down.records.size());
  double scale_l = 0, scale_r = 0;
  for (const auto& r : up.records) {
    scale_l = std::max(scale_l, std::abs(r.lhs));
    scale_r = std::max(scale_r, std::abs(r.rhs));
  }
  for (std::size_t i = 0; i < up.records.size(); ++i) {
    if (up.records[i].flag != kEq10Ok || down.records[i].flag != kEq10Ok) continue;
    EXPECT_NEAR(down.records[i].lhs, -up.records[i].lhs, 1e-2 * scale_l);
    EXPECT_NEAR(down.records[i].rhs, -up.records[i].rhs, 1e-2 * scale_r);
  }
}

TEST(Eq10Scan, PresetSeriesOscillate) {
  Eq10Settings cfg;
  cfg.workers = 4;
  const auto scan = eq10_scan(preset_family, 0.2, 8.0, 100.0, 0.1, {"3", "1"}, cfg);
  EXPECT_GE(scan.summary.sign_changes_lhs, 6);
  EXPECT_GE(scan.summary.sign_changes_rhs, 6);
  EXPECT_GT(scan.records.size(), 801u);
  for (std::size_t i = 1; i < scan.records.size(); ++i) EXPECT_GT(scan.records[i].k, scan.records[i - 1].k);
  EXPECT_TRUE(std::isfinite(scan.summary.pearson_full));
  EXPECT_GE(scan.summary.rel_discrepancy_lower, 0.0);
  EXPECT_LE(scan.summary.rel_discrepancy_upper, 1.0);
}
