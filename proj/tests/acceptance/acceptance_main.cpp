// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance run: exact property suites plus the reference experiment.
// Prints one PASS/FAIL line per criterion and exits nonzero on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "semguard/commands.hpp"
#include "semguard/errors.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace semguard;
using semguard::testing::central_difference;
using semguard::testing::gaussian_image;
using semguard::testing::max_abs_diff;
using semguard::testing::random_image;
using semguard::testing::relative_error;
using semguard::testing::to_vec;
namespace oracle = semguard::testing::oracle;

namespace {

constexpr double kFormulaTol = 1e-9;
constexpr double kMachineTol = 1e-13;
constexpr double kFdTol = 1e-3;
constexpr int kInstances = 100;
constexpr int kFdCoords = 20;
constexpr double kPsnrGate = 30.0;
constexpr double kRoundTripShare = 0.90;
constexpr double kAccuracyGate = 0.95;
constexpr double kAurocGate = 0.80;
constexpr double kBaselineMargin = 0.05;
constexpr double kBudgetSeconds = 30 * 60;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Gate {
  bool pass = true;
  std::vector<std::string> notes;
  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back(std::string(ok ? "" : "!") + what);
  }
};

std::string fmtd(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int failures = 0;

void report(int id, const std::string& title, const Gate& g, double seconds) {
  if (!g.pass) ++failures;
  std::printf("criterion %d %s  %s (%.1fs)\n", id, g.pass ? "PASS" : "FAIL", title.c_str(),
              seconds);
  for (const std::string& n : g.notes) std::printf("    %s\n", n.c_str());
  std::fflush(stdout);
}

// Largest |a - b| over a vector pair.
double vec_diff(const Image& got, const std::vector<double>& ref) {
  double m = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) m = std::max(m, std::abs(got[i] - ref[i]));
  return m;
}

double log_prob(const Classifier& clf, const Image& x, int y) {
  const std::vector<double> l = clf.logits(x);
  const double m = *std::max_element(l.begin(), l.end());
  double z = 0;
  for (double v : l) z += std::exp(v - m);
  return l[y] - m - std::log(z);
}

// ---------------------------------------------------------------- 1

Gate formula_suite() {
  Gate g;
  const NoiseSchedule s = make_schedule(200);
  RngStream rng = RngStream(101).split("formula");
  const ScoreNetwork net = semguard::testing::random_score_net(102);
  const Classifier clf = semguard::testing::random_classifier(103);
  double e_ddim = 0, e_inv = 0, e_cg = 0, e_cfg = 0, e_x0 = 0, e_clean = 0;
  double e_ebo = 0, e_mls = 0, e_psnr = 0, e_fsd = 0;
  double b_scale = 0, b_w0 = 0, b_w1 = 0, b_empty = 0, b_full = 0, b_same = 0;
  const FsdConfig fsd_cfg;
  for (int k = 0; k < kInstances; ++k) {
    const int t = 2 + rng.next_index(199);
    const int tp = rng.next_index(t);
    const double eta = rng.next_uniform();
    const Image x = gaussian_image(rng, 1, 8, 8), e = gaussian_image(rng, 1, 8, 8);
    const Image z = gaussian_image(rng, 1, 8, 8), e2 = gaussian_image(rng, 1, 8, 8);

    const double sigma = ddim_sigma(t, tp, s, eta);
    e_ddim = std::max(e_ddim, vec_diff(ddim_denoise_step(x, e, t, tp, s, SamplerConfig{eta}, &z),
                                       oracle::ddim_step(to_vec(x), to_vec(e), s.alpha(t),
                                                         s.alpha(tp), sigma, to_vec(z))));
    e_inv = std::max(e_inv, vec_diff(ddim_invert_step(x, e, tp, t, s),
                                     oracle::invert_step(to_vec(x), to_vec(e), s.alpha(tp),
                                                         s.alpha(t))));
    const double scale = rng.next_range(0.0, 10.0);
    e_cg = std::max(e_cg, vec_diff(classifier_guided_eps(e, e2, scale, t, s),
                                   oracle::classifier_guidance(to_vec(e), to_vec(e2), scale,
                                                               s.alpha(t), -1.0)));
    const double w = rng.next_range(0.0, 8.0);
    e_cfg = std::max(e_cfg, vec_diff(cfg_combine(e, e2, w), oracle::cfg(to_vec(e), to_vec(e2), w)));
    e_x0 = std::max(e_x0, vec_diff(estimate_x0(x, e, t, s),
                                   oracle::estimate_x0(to_vec(x), to_vec(e), s.alpha(t))));

    // Cutout-averaged clean gradient, recomputed pixel by pixel.
    const int tc = 1 + rng.next_index(50);
    const NoiseSchedule s50 = make_schedule(50);
    GuidanceConfig gc;
    gc.cutout.fill_value = rng.next_uniform();
    std::vector<CutoutMask> masks;
    for (int m = 0; m < 3; ++m) masks.push_back(draw_cutout(gc.cutout, 8, 8, rng));
    const Image xt = gaussian_image(rng, 1, 8, 8);
    const Image eps = net.eval(xt, tc);
    const Image got = clean_grad_with_masks(clf, net, xt, tc, k % 3, eps, s50, gc, masks);
    const Image x0h = estimate_x0(xt, eps, tc, s50);
    std::vector<double> ref(got.size(), 0.0);
    for (const CutoutMask& m : masks) {
      const Image gk = clf.input_log_prob_grad(apply_cutout(x0h, m, gc.cutout.fill_value), k % 3);
      for (std::size_t i = 0; i < ref.size(); ++i) {
        ref[i] += m.keep[i] * gk[i] / masks.size() / std::sqrt(s50.alpha(tc));
      }
    }
    e_clean = std::max(e_clean, vec_diff(got, ref));

    std::vector<double> logits(2 + rng.next_index(6));
    for (double& v : logits) v = rng.next_range(-20, 20);
    e_ebo = std::max(e_ebo, std::abs(ebo_from_logits(logits) - oracle::ebo(logits, 1.0)));
    e_mls = std::max(e_mls, std::abs(mls_from_logits(logits) - oracle::mls(logits)));
    const Image a = random_image(rng, 1, 8, 8), b = random_image(rng, 1, 8, 8);
    e_psnr = std::max(e_psnr, std::abs(psnr(a, b) - oracle::psnr(to_vec(a), to_vec(b))));
    e_fsd = std::max(e_fsd, std::abs(fsd(clf, a, b, fsd_cfg) -
                                     oracle::fsd(fsd_features(clf, a, fsd_cfg),
                                                 fsd_features(clf, b, fsd_cfg), fsd_cfg.c1,
                                                 fsd_cfg.c2)));

    b_scale = std::max(b_scale, max_abs_diff(classifier_guided_eps(e, e2, 0.0, t, s), e));
    b_w0 = std::max(b_w0, max_abs_diff(cfg_combine(e, e2, 0.0), e));
    b_w1 = std::max(b_w1, max_abs_diff(cfg_combine(e, e2, 1.0), e2));
    b_empty = std::max(b_empty, max_abs_diff(dsg_combine(e, e2, w, CamMask{Image(1, 8, 8, 0.0)}), e));
    b_full = std::max(b_full, max_abs_diff(dsg_combine(e, e2, w, CamMask{Image(1, 8, 8, 1.0)}),
                                           cfg_combine(e, e2, w)));
    b_same = std::max(b_same, max_abs_diff(ddim_transition(x, e, s.alpha(t), s.alpha(t)), x));
  }
  const auto exact = [&](const char* name, double err) {
    g.check(err <= kFormulaTol, std::string(name) + " max err " + fmtd("%.2e", err));
  };
  exact("ddim step", e_ddim);
  exact("classifier guidance", e_cg);
  exact("classifier-free guidance", e_cfg);
  exact("ddim inversion", e_inv);
  exact("cutout clean grad", e_clean);
  exact("estimate_x0", e_x0);
  exact("ebo", e_ebo);
  exact("mls", e_mls);
  exact("psnr", e_psnr);
  exact("fsd", e_fsd);
  const auto identity = [&](const char* name, double err) {
    g.check(err <= kMachineTol, std::string(name) + " " + fmtd("%.2e", err));
  };
  identity("s=0 identity", b_scale);
  identity("omega=0 identity", b_w0);
  identity("omega=1 identity", b_w1);
  identity("empty DSG mask", b_empty);
  identity("full DSG mask", b_full);
  identity("alpha_prev=alpha step", b_same);
  g.notes.insert(g.notes.begin(), std::to_string(kInstances) + " random instances per kernel");
  return g;
}

// ---------------------------------------------------------------- 2

// Worst relative error between an analytic gradient and central
// differences at kFdCoords random coordinates.
double fd_check(const Image& grad, const std::function<double(const Image&)>& f, const Image& x,
                RngStream& rng) {
  double worst = 0;
  for (int k = 0; k < kFdCoords; ++k) {
    const std::size_t i = rng.next_index(static_cast<int>(x.size()));
    worst = std::max(worst, relative_error(grad[i], central_difference(f, x, i, 1e-5), 1e-6));
  }
  return worst;
}

Gate gradient_suite(const Classifier* trained) {
  Gate g;
  RngStream rng = RngStream(201).split("gradients");
  const NoiseSchedule s = make_schedule(50);
  const ScoreNetwork net = semguard::testing::random_score_net(202);
  const Classifier clf = semguard::testing::random_classifier(203);

  double worst_clf = 0;
  for (const Classifier* c : {&clf, trained}) {
    if (c == nullptr) continue;
    const int side = c->config().side;
    for (int k = 0; k < 3; ++k) {
      const Image x = random_image(rng, 1, side, side);
      const int y = k % c->num_classes();
      worst_clf = std::max(worst_clf, fd_check(c->input_log_prob_grad(x, y),
                                               [&](const Image& z) { return log_prob(*c, z, y); },
                                               x, rng));
    }
  }
  g.check(worst_clf <= kFdTol, "classifier input grad rel err " + fmtd("%.2e", worst_clf));

  for (ChainRule rule : {ChainRule::kScaledIdentity, ChainRule::kFull}) {
    double worst = 0;
    for (int k = 0; k < 3; ++k) {
      GuidanceConfig gc;
      gc.chain_rule = rule;
      std::vector<CutoutMask> masks;
      for (int m = 0; m < 2; ++m) masks.push_back(draw_cutout(gc.cutout, 8, 8, rng));
      const Image x = gaussian_image(rng, 1, 8, 8) * 0.5;
      const int t = 5 + 10 * k;
      const int y = k % 3;
      const Image eps = net.eval(x, t);
      const Image grad = clean_grad_with_masks(clf, net, x, t, y, eps, s, gc, masks);
      const auto f = [&](const Image& z) {
        // The scaled-identity rule holds eps fixed; the full rule does not.
        const Image e = rule == ChainRule::kFull ? net.eval(z, t) : eps;
        const Image u = estimate_x0(z, e, t, s);
        double acc = 0;
        for (const CutoutMask& m : masks) acc += log_prob(clf, apply_cutout(u, m, 0.0), y);
        return acc / masks.size();
      };
      worst = std::max(worst, fd_check(grad, f, x, rng));
    }
    g.check(worst <= kFdTol, std::string("clean_grad ") + std::string(chain_rule_name(rule)) +
                                 " rel err " + fmtd("%.2e", worst));
  }
  g.notes.insert(g.notes.begin(), std::to_string(kFdCoords) + " coordinates per case");
  return g;
}

// ---------------------------------------------------------------- 3

// Share of InD test inputs reconstructed at >= 30 dB after inverting to
// t = T and denoising back over the same tau.
double round_trip_share(const RunContext& ctx, int tau_length, double* median) {
  const std::vector<int> tau = make_tau(ctx.schedule.total_steps(), tau_length);
  const NoisePredictor pred = ctx.score.predictor(kNullLabel);
  std::vector<double> values;
  for (std::size_t i : ctx.dataset.indices(Split::kTest, Distribution::kInD)) {
    const Image& x0 = ctx.dataset.items[i].pixels;
    const auto pts = invert_trajectory(x0, pred, ctx.schedule, tau);
    const Image back = sample_trajectory(pts.back().x_t, pts.back().t, pred, ctx.schedule, tau);
    values.push_back(psnr(x0, back));
  }
  *median = quantile(values, 0.5);
  return static_cast<double>(std::count_if(values.begin(), values.end(),
                                           [](double p) { return p >= kPsnrGate; })) /
         values.size();
}

Gate round_trip(const RunContext& ctx) {
  Gate g;
  const int n = static_cast<int>(ctx.dataset.indices(Split::kTest, Distribution::kInD).size());
  // Gated at T/2 steps; the detector's coarser tau is reported alongside.
  const int fine = ctx.schedule.total_steps() / 2;
  const int coarse = ctx.config.detector.resolved_tau_length();
  double med = 0;
  const double share = round_trip_share(ctx, fine, &med);
  g.check(share >= kRoundTripShare, fmtd("%.3f", share) + " of " + std::to_string(n) +
                                        " InD test inputs at >= 30 dB (median " +
                                        fmtd("%.2f", med) + " dB, tau length " +
                                        std::to_string(fine) + ")");
  if (coarse != fine) {
    const double share_coarse = round_trip_share(ctx, coarse, &med);
    g.notes.push_back("info: tau length " + std::to_string(coarse) + " gives " +
                      fmtd("%.3f", share_coarse) + " (median " + fmtd("%.2f", med) + " dB)");
  }
  return g;
}

// ---------------------------------------------------------------- 4

Gate eval_oracles() {
  Gate g;
  RngStream rng = RngStream(401).split("eval");
  int auroc_mismatch = 0, fpr_mismatch = 0;
  for (int k = 0; k < 50; ++k) {
    const int n = 2 + rng.next_index(199);
    const int levels = 1 + rng.next_index(40);
    std::vector<ScoredSample> s;
    for (int i = 0; i < n; ++i) {
      const Distribution d = i == 0   ? Distribution::kInD
                             : i == 1 ? Distribution::kOOD
                             : rng.next_uniform() < 0.5 ? Distribution::kInD
                                                        : Distribution::kOOD;
      s.push_back({rng.next_index(levels) + (d == Distribution::kOOD ? 0.5 * rng.next_index(4) : 0.0),
                   d});
    }
    auroc_mismatch += auroc(s) != oracle::auroc(s);
    const FprResult a = fpr_at_tpr(s), b = oracle::fpr_at_tpr(s, 0.95);
    fpr_mismatch += a.fpr != b.fpr || a.threshold != b.threshold;
  }
  g.check(auroc_mismatch == 0, "auroc mismatches " + std::to_string(auroc_mismatch) + "/50");
  g.check(fpr_mismatch == 0, "fpr@95 mismatches " + std::to_string(fpr_mismatch) + "/50");
  return g;
}

// ---------------------------------------------------------------- 5, 6

double diffguard_auroc(const std::vector<DetectionRecord>& records) {
  return evaluate(scored_samples(records, "diffguard")).auroc;
}

double stage_seconds(const RunConfig& config, const std::string& stage) {
  std::ifstream in(fs::path(config.paths.output_dir) / "manifest.json");
  const nlohmann::json m = nlohmann::json::parse(in);
  const nlohmann::json& stages = m.at("stages");
  // A stage missing from a reused run (artifact copied in) counts as zero.
  return stages.contains(stage) ? stages.at(stage).at("seconds").get<double>() : 0.0;
}

double classifier_accuracy(const RunContext& ctx) {
  int correct = 0, n = 0;
  for (std::size_t i : ctx.dataset.indices(Split::kTest, Distribution::kInD)) {
    const LabeledImage& it = ctx.dataset.items[i];
    correct += argmax(ctx.classifier.logits(it.pixels)) == it.label;
    ++n;
  }
  return static_cast<double>(correct) / n;
}

std::vector<int> upper_grid(int total_steps, int points) {
  std::vector<int> grid;
  for (int k = 1; k <= points; ++k) {
    const int t = static_cast<int>(std::lround(static_cast<double>(k) * total_steps / points));
    if (2 * t >= total_steps) grid.push_back(t);
  }
  return grid;
}

struct Experiment {
  Gate reference;
  Gate directional;
  double reference_seconds = 0;
  double directional_seconds = 0;
};

Experiment reference_experiment(const RunConfig& config, double training_seconds) {
  Experiment ex;
  Stopwatch sw;
  const RunContext ctx = load_context(config);
  const std::vector<std::size_t> idx =
      select_indices(ctx.dataset, Split::kTest, config.detect.per_class_limit);

  // 5: both guidance paths through the CLI command.
  const double acc = classifier_accuracy(ctx);
  const DetectOutput cls = cmd_detect(config);
  RunConfig cf_config = config;
  cf_config.detector.guidance.mode = GuidanceMode::kClassifierFree;
  const DetectOutput cf = cmd_detect(cf_config);
  const double auc_cls = diffguard_auroc(cls.records);
  const double auc_cf = diffguard_auroc(cf.records);
  const double auc_mls = evaluate(scored_samples(cls.records, "mls")).auroc;
  const double auc_ebo = evaluate(scored_samples(cls.records, "ebo")).auroc;
  const double best_baseline = std::max(auc_mls, auc_ebo);
  const double total = training_seconds + sw.seconds();

  Gate& r = ex.reference;
  r.check(acc >= kAccuracyGate, "classifier InD test accuracy " + fmtd("%.4f", acc));
  r.check(auc_cls >= kAurocGate, "classifier-guidance AUROC " + fmtd("%.4f", auc_cls) + " (" +
                                     std::string(metric_name(config.detector.metric)) + ")");
  r.check(auc_cf >= kAurocGate, "classifier-free AUROC " + fmtd("%.4f", auc_cf));
  r.notes.push_back("baselines: MLS " + fmtd("%.4f", auc_mls) + ", EBO " + fmtd("%.4f", auc_ebo));
  r.check(auc_cls >= best_baseline - kBaselineMargin,
          "classifier-guidance vs best baseline - 0.05 = " +
              fmtd("%.4f", best_baseline - kBaselineMargin));
  r.check(auc_cf >= best_baseline - kBaselineMargin,
          "classifier-free vs best baseline - 0.05 = " +
              fmtd("%.4f", best_baseline - kBaselineMargin));
  r.check(total <= kBudgetSeconds, "pipeline time " + fmtd("%.0f", total) +
                                       " s including training " +
                                       fmtd("%.0f", training_seconds) + " s");
  r.notes.push_back(std::to_string(cls.records.size()) + " test samples per path; CSVs in " +
                    config.paths.output_dir);
  ex.reference_seconds = total;

  // 6: directional properties.
  Stopwatch sw6;
  Gate& d = ex.directional;
  const DetectorConfig base = resolve_detector(ctx);

  DetectorConfig oracle_cfg = base;
  oracle_cfg.label_source = LabelSource::kOracle;
  const double auc_oracle = diffguard_auroc(run_detection(ctx, oracle_cfg, idx));
  d.check(auc_oracle >= auc_cls, "(a) oracle labels AUROC " + fmtd("%.4f", auc_oracle) +
                                     " vs classifier labels " + fmtd("%.4f", auc_cls));

  std::vector<double> t_ind, t_ood;
  for (const DetectionRecord& rec : cls.records) {
    if (!rec.valid) continue;
    (rec.distribution == Distribution::kInD ? t_ind : t_ood).push_back(rec.t_stop);
  }
  const double med_ind = quantile(t_ind, 0.5), med_ood = quantile(t_ood, 0.5);
  d.check(med_ind <= med_ood, "(b) median AES t_stop InD " + fmtd("%.1f", med_ind) + " vs OOD " +
                                  fmtd("%.1f", med_ood));

  std::vector<Image> images;
  std::vector<int> labels;
  for (std::size_t i : ctx.dataset.indices(Split::kTest, Distribution::kInD)) {
    images.push_back(ctx.dataset.items[i].pixels);
    labels.push_back(ctx.dataset.items[i].label);
  }
  const std::vector<int> grid =
      upper_grid(ctx.schedule.total_steps(), config.diagnose.timestep_grid_points);
  const RngStream acc_rng(config.stage_seed("acc_vs_t"));
  const auto raw = accuracy_vs_timestep(ctx.classifier, ctx.score, images, labels, ctx.schedule,
                                        AccuracyMode::kRawXt, grid, acc_rng);
  const auto xhat = accuracy_vs_timestep(ctx.classifier, ctx.score, images, labels, ctx.schedule,
                                         AccuracyMode::kXhat0, grid, acc_rng);
  int wins = 0;
  std::string curve;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    wins += xhat[k].accuracy >= raw[k].accuracy;
    curve += " t=" + std::to_string(grid[k]) + ":" + fmtd("%.2f", xhat[k].accuracy) + "/" +
             fmtd("%.2f", raw[k].accuracy);
  }
  d.check(2 * wins > static_cast<int>(grid.size()),
          "(c) x0_hat >= raw accuracy at " + std::to_string(wins) + "/" +
              std::to_string(grid.size()) + " points with t >= T/2 [x0_hat/raw" + curve + "]");

  double best_other = -1;
  std::string table;
  for (int variant = 0; variant < 3; ++variant) {
    DetectorConfig v = base;
    v.guidance.use_xhat0 = variant >= 2;
    v.guidance.use_cutout = variant == 1;
    const double a = diffguard_auroc(run_detection(ctx, v, idx));
    best_other = std::max(best_other, a);
    table += std::string(" xhat0=") + (v.guidance.use_xhat0 ? "on" : "off") +
             ",cutout=" + (v.guidance.use_cutout ? "on" : "off") + ":" + fmtd("%.4f", a);
  }
  d.check(auc_cls >= best_other, "(d) Clean Grad ablation max at both on (" +
                                     fmtd("%.4f", auc_cls) + ") [" + table.substr(1) + "]");

  RunContext cf_ctx = ctx;
  cf_ctx.config = cf_config;
  const DetectorConfig cf_base = resolve_detector(cf_ctx);
  std::vector<double> cut_auc;
  std::string cuts;
  for (double cut : {0.0, 0.2, 0.6}) {
    DetectorConfig v = cf_base;
    v.guidance.cam_cutpoint = cut;
    const double a = cut == cf_base.guidance.cam_cutpoint ? auc_cf
                                                          : diffguard_auroc(run_detection(ctx, v, idx));
    cut_auc.push_back(a);
    cuts += " " + fmtd("%.1f", cut) + ":" + fmtd("%.4f", a);
  }
  d.check(cut_auc[1] >= cut_auc[0] && cut_auc[1] >= cut_auc[2],
          "(e) cut-point sweep max at interior 0.2 [" + cuts.substr(1) + "]");
  ex.directional_seconds = sw6.seconds();
  return ex;
}

// ---------------------------------------------------------------- 7

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Gate determinism(const RunConfig& config, const fs::path& scratch) {
  Gate g;
  fs::remove_all(scratch);
  fs::create_directories(scratch);
  for (const std::string& name :
       {config.paths.dataset, config.paths.score_model, config.paths.classifier_model,
        std::string("manifest.json")}) {
    fs::copy_file(config.resolve(name), scratch / name);
  }
  RunConfig c = config;
  c.paths.output_dir = scratch.string();
  c.detect.per_class_limit = 5;
  const std::string first = slurp(cmd_detect(c).csv);
  const std::string second = slurp(cmd_detect(c).csv);
  g.check(!first.empty() && first == second,
          "repeated detect byte-identical (" + std::to_string(first.size()) + " bytes)");

  const Dataset ds = load_dataset(c.resolve(c.paths.dataset));
  const std::string ds_bytes = serialize_dataset(ds);
  g.check(deserialize_dataset(ds_bytes) == ds && serialize_dataset(deserialize_dataset(ds_bytes)) == ds_bytes,
          "dataset round trip exact");
  const std::string sc = slurp(c.resolve(c.paths.score_model));
  const std::string cl = slurp(c.resolve(c.paths.classifier_model));
  g.check(serialize_model(deserialize_score_network(sc)) == sc &&
              serialize_model(deserialize_classifier(cl)) == cl,
          "model round trips exact");
  g.check(parse_config(serialize_config(config)) == config, "config round trip exact");

  TandemConfig band;
  band.low = 0.0;
  band.high = 1.0;
  // Baseline score, DiffGuard score; expected rank order is row order.
  const std::vector<std::pair<double, double>> fixture = {
      {-3.0, 50.0}, {-0.5, 40.0}, {-0.1, 30.0}, {0.9, -2.0}, {0.1, 0.5},
      {0.5, 7.0},   {1.1, -50.0}, {2.0, -60.0}, {9.0, -70.0}};
  bool ordered = true;
  for (std::size_t i = 1; i < fixture.size(); ++i) {
    ordered &= tandem_combine(fixture[i - 1].first, fixture[i - 1].second, band) <
               tandem_combine(fixture[i].first, fixture[i].second, band);
  }
  g.check(ordered, "tandem 9-sample fixture ordering");
  return g;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semguard acceptance run"};
  std::string workdir = "acceptance_run";
  bool reuse = false;
  std::vector<std::string> overrides;
  app.add_option("--workdir", workdir, "Directory for the reference run");
  app.add_flag("--reuse", reuse, "Reuse a finished reference run in --workdir");
  app.add_option("--set", overrides, "Config override key=value (diagnostic runs only)");
  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig config;
    config.paths.output_dir = (fs::path(workdir) / "run").string();
    for (const std::string& o : overrides) apply_override(config, o);
    config.validate();
    if (!overrides.empty()) std::printf("note: %zu config overrides in effect\n", overrides.size());

    {
      Stopwatch sw;
      const Gate g = formula_suite();
      report(1, "formula exactness", g, sw.seconds());
    }

    double training_seconds = 0;
    const bool have_run = fs::exists(fs::path(config.paths.output_dir) / "manifest.json") &&
                          fs::exists(config.resolve(config.paths.score_model));
    if (reuse && have_run) {
      training_seconds = stage_seconds(config, "gen-data") +
                         stage_seconds(config, "train-classifier") +
                         stage_seconds(config, "train-score");
      std::printf("note: reusing %s (recorded training time %.0f s)\n",
                  config.paths.output_dir.c_str(), training_seconds);
    } else {
      Stopwatch sw;
      fs::remove_all(config.paths.output_dir);
      fs::create_directories(config.paths.output_dir);
      cmd_gen_data(config);
      cmd_train(config, TrainTarget::kClassifier);
      cmd_train(config, TrainTarget::kScore);
      training_seconds = sw.seconds();
      std::printf("note: data and training took %.0f s\n", training_seconds);
    }
    std::fflush(stdout);
    const RunContext ctx = load_context(config);

    {
      Stopwatch sw;
      const Gate g = gradient_suite(&ctx.classifier);
      report(2, "gradient suite", g, sw.seconds());
    }
    {
      Stopwatch sw;
      const Gate g = round_trip(ctx);
      report(3, "inversion round trip", g, sw.seconds());
    }
    {
      Stopwatch sw;
      const Gate g = eval_oracles();
      report(4, "evaluation oracles", g, sw.seconds());
    }
    const Experiment ex = reference_experiment(config, training_seconds);
    report(5, "reference experiment", ex.reference, ex.reference_seconds);
    report(6, "directional properties", ex.directional, ex.directional_seconds);
    {
      Stopwatch sw;
      const Gate g = determinism(config, fs::path(workdir) / "determinism");
      report(7, "determinism and persistence", g, sw.seconds());
    }
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%s: %d of 7 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
