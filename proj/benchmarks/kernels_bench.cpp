// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

// Micro benchmarks for the kernels on the detection hot path, at the
// reference geometry (1x16x16 images, T = 200).

#include <vector>

#include <benchmark/benchmark.h>

#include "semguard/detection.hpp"
#include "semguard/diffusion.hpp"
#include "semguard/eval.hpp"
#include "semguard/guidance.hpp"
#include "semguard/nn.hpp"
#include "semguard/rng.hpp"
#include "semguard/similarity.hpp"

namespace {

using namespace semguard;

Image noise_image(RngStream& rng) {
  Image x(1, 16, 16);
  for (double& v : x.pixels()) v = rng.next_gaussian();
  return x;
}

ScoreNetConfig score_config(int width) {
  ScoreNetConfig c;
  c.width = width;
  return c;
}

void BM_ScoreEval(benchmark::State& state) {
  const ScoreNetwork net(score_config(static_cast<int>(state.range(0))), 1);
  RngStream rng(2);
  const Image x = noise_image(rng);
  for (auto _ : state) benchmark::DoNotOptimize(net.eval(x, 100, 2));
}
BENCHMARK(BM_ScoreEval)->Arg(16)->Arg(24);

void BM_ScoreInputVjp(benchmark::State& state) {
  const ScoreNetwork net(score_config(24), 1);
  RngStream rng(3);
  const Image x = noise_image(rng), up = noise_image(rng);
  for (auto _ : state) benchmark::DoNotOptimize(net.input_vjp(x, 100, 1, up));
}
BENCHMARK(BM_ScoreInputVjp);

void BM_ClassifierLogits(benchmark::State& state) {
  const Classifier clf(ClassifierConfig{}, 4);
  RngStream rng(5);
  const Image x = noise_image(rng);
  for (auto _ : state) benchmark::DoNotOptimize(clf.logits(x));
}
BENCHMARK(BM_ClassifierLogits);

void BM_ClassifierInputGrad(benchmark::State& state) {
  const Classifier clf(ClassifierConfig{}, 4);
  RngStream rng(6);
  const Image x = noise_image(rng);
  for (auto _ : state) benchmark::DoNotOptimize(clf.input_log_prob_grad(x, 1));
}
BENCHMARK(BM_ClassifierInputGrad);

void BM_CleanGrad(benchmark::State& state) {
  const ScoreNetwork net(score_config(24), 1);
  const Classifier clf(ClassifierConfig{}, 4);
  const NoiseSchedule schedule = make_schedule(200);
  GuidanceConfig config;
  config.chain_rule = state.range(0) ? ChainRule::kFull : ChainRule::kScaledIdentity;
  RngStream rng(7);
  const Image x = noise_image(rng);
  const Image eps = net.eval(x, 80);
  for (auto _ : state) {
    benchmark::DoNotOptimize(clean_grad(clf, net, x, 80, 1, eps, schedule, config, rng));
  }
}
BENCHMARK(BM_CleanGrad)->Arg(0)->Arg(1);

void BM_DdimStep(benchmark::State& state) {
  const NoiseSchedule schedule = make_schedule(200);
  RngStream rng(8);
  const Image x = noise_image(rng), eps = noise_image(rng);
  for (auto _ : state) benchmark::DoNotOptimize(ddim_denoise_step(x, eps, 120, 116, schedule));
}
BENCHMARK(BM_DdimStep);

void BM_Fsd(benchmark::State& state) {
  const Classifier clf(ClassifierConfig{}, 4);
  RngStream rng(9);
  const Image a = noise_image(rng), b = noise_image(rng);
  for (auto _ : state) benchmark::DoNotOptimize(fsd(clf, a, b));
}
BENCHMARK(BM_Fsd);

void BM_Auroc(benchmark::State& state) {
  RngStream rng(10);
  std::vector<ScoredSample> samples(static_cast<std::size_t>(state.range(0)));
  for (ScoredSample& s : samples) {
    s.truth = rng.next_uniform() < 0.5 ? Distribution::kInD : Distribution::kOOD;
    s.score = rng.next_gaussian() + (s.truth == Distribution::kOOD ? 1.0 : 0.0);
  }
  for (auto _ : state) benchmark::DoNotOptimize(auroc(samples));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Auroc)->RangeMultiplier(8)->Range(64, 32768)->Complexity(benchmark::oNLogN);

}  // namespace

BENCHMARK_MAIN();
