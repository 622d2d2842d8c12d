// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "semguard/diffusion.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "semguard/errors.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

namespace semguard {
namespace {

using testing::gaussian_image;
using testing::max_abs_diff;
using testing::random_image;
using testing::to_vec;

TEST(Schedule, LinearT1000) {
  const NoiseSchedule s = make_schedule(1000);
  EXPECT_GT(s.alpha(1), 0.99);
  EXPECT_LT(s.alpha(1000), 0.05);
  for (int t = 1; t <= 1000; ++t) ASSERT_LT(s.alpha(t), s.alpha(t - 1));
}

TEST(Schedule, InvariantsForEveryKind) {
  for (ScheduleKind k : {ScheduleKind::kLinear, ScheduleKind::kCosine}) {
    for (int T : {2, 10, 200, 1000}) {
      const NoiseSchedule s = make_schedule(T, k);
      EXPECT_EQ(s.alpha(0), 1.0);
      for (int t = 1; t <= T; ++t) {
        ASSERT_GT(s.alpha(t), 0.0);
        ASSERT_LE(s.alpha(t), 1.0);
        ASSERT_LT(s.alpha(t), s.alpha(t - 1));
      }
    }
  }
  EXPECT_LT(make_schedule(200).alpha(200), 0.05);
  EXPECT_THROW(make_schedule(1), ArgumentError);
  EXPECT_THROW(make_schedule(200).alpha(201), ArgumentError);
}

TEST(Schedule, RejectsNonMonotone) {
  EXPECT_THROW(NoiseSchedule(2, {1.0, 0.5, 0.6}), ArgumentError);
  EXPECT_THROW(NoiseSchedule(2, {0.9, 0.5, 0.4}), ArgumentError);
  EXPECT_THROW(NoiseSchedule(2, {1.0, 0.5, 0.0}), ArgumentError);
}

TEST(Tau, UniformStrideEndingAtT) {
  EXPECT_EQ(make_tau(200, 50).front(), 4);
  EXPECT_EQ(make_tau(200, 50).back(), 200);
  EXPECT_EQ(make_tau(10, 3), (std::vector<int>{4, 7, 10}));
  EXPECT_EQ(make_tau(5, 1), (std::vector<int>{5}));
  EXPECT_THROW(make_tau(5, 6), ArgumentError);
}

TEST(ForwardDiffuse, Boundaries) {
  const NoiseSchedule s = make_schedule(50);
  RngStream rng(1);
  const Image x0 = random_image(rng, 1, 4, 4);
  const Image noise = gaussian_image(rng, 1, 4, 4);
  EXPECT_EQ(forward_diffuse(x0, 0, s, noise), x0);
  const Image zero(1, 4, 4);
  EXPECT_LT(max_abs_diff(forward_diffuse(x0, 30, s, zero), std::sqrt(s.alpha(30)) * x0), 1e-15);
  EXPECT_THROW(forward_diffuse(x0, 3, s, Image(1, 4, 5)), ArgumentError);
}

TEST(ForwardDiffuse, MarkovChainMatchesMarginal) {
  // q(x2|x1) q(x1|x0) against the closed-form marginal at t = 2.
  const NoiseSchedule s = make_schedule(10);
  RngStream rng = RngStream(11).split("mc");
  const Image x0(1, 1, 1, 0.7);
  const int n = 100000;
  double m_chain = 0, v_chain = 0, m_direct = 0, v_direct = 0;
  for (int i = 0; i < n; ++i) {
    const Image e1 = gaussian_image(rng, 1, 1, 1);
    const Image e2 = gaussian_image(rng, 1, 1, 1);
    const double c = forward_step(forward_step(x0, 1, s, e1), 2, s, e2)[0];
    const double d = forward_diffuse(x0, 2, s, e1)[0];
    m_chain += c;
    v_chain += c * c;
    m_direct += d;
    v_direct += d * d;
  }
  m_chain /= n;
  m_direct /= n;
  v_chain = v_chain / n - m_chain * m_chain;
  v_direct = v_direct / n - m_direct * m_direct;
  EXPECT_NEAR(m_chain, m_direct, 0.01 * std::abs(m_direct));
  EXPECT_NEAR(v_chain, v_direct, 0.02 * v_direct);
  EXPECT_NEAR(v_direct, 1.0 - s.alpha(2), 0.02 * (1.0 - s.alpha(2)));
}

TEST(EstimateX0, InvertsForwardDiffuse) {
  const NoiseSchedule s = make_schedule(200);
  RngStream rng(2);
  for (int t : {1, 50, 199, 200}) {
    const Image x0 = random_image(rng, 1, 5, 5);
    const Image eps = gaussian_image(rng, 1, 5, 5);
    EXPECT_LT(max_abs_diff(estimate_x0(forward_diffuse(x0, t, s, eps), eps, t, s), x0), 1e-12);
  }
  const Image x = random_image(rng, 1, 3, 3);
  EXPECT_LT(max_abs_diff(estimate_x0(x, Image(1, 3, 3), 80, s), x * (1.0 / std::sqrt(s.alpha(80)))),
            1e-15);
}

TEST(EstimateX0, MatchesOracle) {
  const NoiseSchedule s = make_schedule(200);
  RngStream rng(3);
  for (int k = 0; k < 100; ++k) {
    const int t = 1 + rng.next_index(200);
    const Image x = gaussian_image(rng, 1, 4, 4), e = gaussian_image(rng, 1, 4, 4);
    const auto ref = testing::oracle::estimate_x0(to_vec(x), to_vec(e), s.alpha(t));
    const Image got = estimate_x0(x, e, t, s);
    for (std::size_t i = 0; i < ref.size(); ++i) ASSERT_NEAR(got[i], ref[i], 1e-9);
  }
}

TEST(DdimStep, MatchesOracleDeterministicAndStochastic) {
  const NoiseSchedule s = make_schedule(200);
  RngStream rng(4);
  for (int k = 0; k < 100; ++k) {
    const int t = 2 + rng.next_index(199);
    const int tp = rng.next_index(t);
    const double eta = k % 2 ? 0.0 : rng.next_uniform();
    const Image x = gaussian_image(rng, 1, 4, 4), e = gaussian_image(rng, 1, 4, 4);
    const Image z = gaussian_image(rng, 1, 4, 4);
    const double sigma = ddim_sigma(t, tp, s, eta);
    const auto ref = testing::oracle::ddim_step(to_vec(x), to_vec(e), s.alpha(t), s.alpha(tp),
                                                sigma, to_vec(z));
    const Image got = ddim_denoise_step(x, e, t, tp, s, SamplerConfig{eta}, &z);
    for (std::size_t i = 0; i < ref.size(); ++i) ASSERT_NEAR(got[i], ref[i], 1e-12);
  }
}

TEST(DdimStep, Identities) {
  const NoiseSchedule s = make_schedule(200);
  RngStream rng(5);
  const Image x = gaussian_image(rng, 1, 4, 4), e = gaussian_image(rng, 1, 4, 4);
  // Same alpha on both ends: any eps leaves x unchanged.
  for (double a : {0.999, 0.5, 0.01}) {
    EXPECT_LT(max_abs_diff(ddim_transition(x, e, a, a), x), 1e-13);
  }
  const Image zero(1, 4, 4);
  EXPECT_LT(max_abs_diff(ddim_denoise_step(x, zero, 90, 40, s),
                         x * std::sqrt(s.alpha(40) / s.alpha(90))),
            1e-14);
  EXPECT_THROW(ddim_denoise_step(x, e, 5, 5, s), ArgumentError);
  EXPECT_THROW(ddim_denoise_step(x, e, 9, 4, s, SamplerConfig{0.5}), ArgumentError);
  EXPECT_THROW(ddim_transition(x, e, 0.5, 0.9, 0.5), ArgumentError);
}

TEST(DdimInvertStep, OracleAndMutualInverse) {
  const NoiseSchedule s = make_schedule(200);
  RngStream rng(6);
  for (int k = 0; k < 100; ++k) {
    const int t = rng.next_index(199);
    const int tn = t + 1 + rng.next_index(200 - t);
    const Image x = gaussian_image(rng, 1, 4, 4), e = gaussian_image(rng, 1, 4, 4);
    const auto ref = testing::oracle::invert_step(to_vec(x), to_vec(e), s.alpha(t), s.alpha(tn));
    const Image up = ddim_invert_step(x, e, t, tn, s);
    for (std::size_t i = 0; i < ref.size(); ++i) ASSERT_NEAR(up[i], ref[i], 1e-12);
    ASSERT_LT(max_abs_diff(ddim_denoise_step(up, e, tn, t, s), x), 1e-10);
  }
  const Image x = gaussian_image(rng, 1, 2, 2);
  EXPECT_THROW(ddim_invert_step(x, x, 3, 4, s, SamplerConfig{0.1}), ArgumentError);
  EXPECT_THROW(ddim_invert_step(x, x, 4, 4, s), ArgumentError);
}

NoisePredictor linear_predictor() {
  // A smooth stand-in network: eps = 0.3 * x + 0.01 * t.
  return [](const Image& x, int t) {
    Image e = x * 0.3;
    for (double& v : e.pixels()) v += 0.01 * t;
    return e;
  };
}

TEST(Trajectory, SingleStepAndStopHook) {
  const NoiseSchedule s = make_schedule(20);
  RngStream rng(7);
  const Image x0 = random_image(rng, 1, 3, 3);
  const auto one = invert_trajectory(x0, linear_predictor(), s, {5});
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].t, 5);
  InversionOptions stop_now;
  stop_now.stop = [](std::vector<TrajectoryPoint>&) { return true; };
  EXPECT_EQ(invert_trajectory(x0, linear_predictor(), s, make_tau(20, 10), stop_now).size(), 1u);
  const auto full = invert_trajectory(x0, linear_predictor(), s, make_tau(20, 10));
  ASSERT_EQ(full.size(), 10u);
  for (std::size_t i = 1; i < full.size(); ++i) EXPECT_GT(full[i].t, full[i - 1].t);
}

TEST(Trajectory, StepNoiseConvention) {
  // Inversion predicts the step t -> t_next from (x_t, t), and the first
  // step from (x_0, tau[0]).
  const NoiseSchedule s = make_schedule(20);
  RngStream rng(8);
  const Image x0 = random_image(rng, 1, 3, 3);
  const NoisePredictor p = linear_predictor();
  const auto pts = invert_trajectory(x0, p, s, {4, 9});
  const Image x4 = ddim_invert_step(x0, p(x0, 4), 0, 4, s);
  const Image x9 = ddim_invert_step(x4, p(x4, 4), 4, 9, s);
  EXPECT_EQ(pts[0].x_t, x4);
  EXPECT_EQ(pts[1].x_t, x9);
  InversionOptions track;
  track.track_xhat0 = true;
  const auto tracked = invert_trajectory(x0, p, s, {4, 9}, track);
  EXPECT_EQ(*tracked[1].xhat0, estimate_x0(x9, p(x9, 9), 9, s));
  EXPECT_EQ(tracked[1].x_t, x9);
}

TEST(Trajectory, ZeroEpsGuidanceTelescopes) {
  const NoiseSchedule s = make_schedule(20);
  RngStream rng(9);
  const Image x = gaussian_image(rng, 1, 3, 3);
  const std::vector<int> tau = make_tau(20, 5);
  const GuidanceFn zero = [](const Image& xt, int, const Image&) { return Image(xt.channels(), xt.height(), xt.width()); };
  const Image out = sample_trajectory(x, 12, linear_predictor(), s, tau, zero);
  EXPECT_LT(max_abs_diff(out, x * (1.0 / std::sqrt(s.alpha(12)))), 1e-12);
  // From the smallest element, one step lands at t = 0.
  int calls = 0;
  const GuidanceFn count = [&](const Image&, int, const Image& e) { ++calls; return e; };
  sample_trajectory(x, tau.front(), linear_predictor(), s, tau, count);
  EXPECT_EQ(calls, 1);
  EXPECT_THROW(sample_trajectory(x, 7, linear_predictor(), s, tau), ArgumentError);
}

TEST(Trajectory, DeterministicAndExactForConstantPredictor) {
  const NoiseSchedule s = make_schedule(200);
  RngStream rng(10);
  const Image x0 = random_image(rng, 1, 4, 4);
  const std::vector<int> tau = make_tau(200, 50);
  const auto a = invert_trajectory(x0, linear_predictor(), s, tau);
  const auto b = invert_trajectory(x0, linear_predictor(), s, tau);
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a[i].x_t, b[i].x_t);
  // When eps does not depend on (x, t) every inversion step is undone
  // exactly by the matching denoising step.
  const Image c = gaussian_image(rng, 1, 4, 4);
  const NoisePredictor constant = [&](const Image&, int) { return c; };
  const auto up = invert_trajectory(x0, constant, s, tau);
  const Image back = sample_trajectory(up.back().x_t, 200, constant, s, tau);
  EXPECT_LT(max_abs_diff(back, x0), 1e-9);
}

TEST(TrajectoryCsv, Columns) {
  TrajectoryPoint p;
  p.t = 3;
  p.quality["psnr"] = 20.5;
  p.quality["fsd"] = 0.25;
  EXPECT_EQ(trajectory_csv({p}), "t,fsd,psnr\n3,0.25,20.5\n");
}

}  // namespace
}  // namespace semguard
