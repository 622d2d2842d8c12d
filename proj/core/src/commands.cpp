// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "semguard/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <json.hpp>

#include "binary_io.hpp"
#include "semguard/errors.hpp"
#include "semguard/io.hpp"

#ifndef SEMGUARD_VERSION
#define SEMGUARD_VERSION "dev"
#endif

namespace semguard {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

fs::path manifest_path(const RunConfig& c) { return fs::path(c.paths.output_dir) / "manifest.json"; }

json read_manifest(const RunConfig& c) {
  const fs::path p = manifest_path(c);
  if (!fs::exists(p)) return json::object();
  try {
    return json::parse(read_file(p));
  } catch (const json::exception& e) {
    throw PrerequisiteError("unreadable manifest " + p.string() + ": " + e.what());
  }
}

// Artifacts inside the output directory are keyed relative to it, so a run
// directory can be moved without invalidating its manifest.
std::string artifact_key(const RunConfig& c, const fs::path& p) {
  const fs::path rel = p.lexically_relative(c.paths.output_dir);
  if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
  return p.string();
}

void record_stage(const RunConfig& c, const std::string& stage,
                  const std::vector<fs::path>& outputs, double seconds) {
  json m = read_manifest(c);
  m["version"] = SEMGUARD_VERSION;
  m["config"] = serialize_config(c);
  json& stage_entry = m["stages"][stage];
  stage_entry["seconds"] = seconds;
  stage_entry["outputs"] = json::array();
  for (const fs::path& p : outputs) {
    const std::string sum = file_checksum(p);
    m["artifacts"][artifact_key(c, p)] = sum;
    stage_entry["outputs"].push_back(p.string());
  }
  write_file_atomic(manifest_path(c), m.dump(2) + "\n");
}

/// Missing artifacts and checksum drift both stop the run.
void require_artifact(const RunConfig& c, const fs::path& p, const std::string& producer) {
  if (!fs::exists(p)) {
    throw PrerequisiteError("missing " + p.string() + "; run '" + producer + "' first");
  }
  const json m = read_manifest(c);
  const std::string key = artifact_key(c, p);
  if (m.contains("artifacts") && m["artifacts"].contains(key)) {
    const std::string expected = m["artifacts"][key].get<std::string>();
    const std::string actual = file_checksum(p);
    if (expected != actual) {
      throw PrerequisiteError("checksum mismatch for " + p.string() + ": manifest has " +
                              expected + ", file has " + actual);
    }
  }
}

void collect_split(const Dataset& d, Split split, std::vector<Image>& images,
                   std::vector<int>& labels) {
  for (std::size_t i : d.indices(split, Distribution::kInD)) {
    images.push_back(d.items[i].pixels);
    labels.push_back(d.items[i].label);
  }
}

std::string loss_csv(const TrainResult& r) {
  std::string out = "step,loss\n";
  for (std::size_t i = 0; i < r.loss_curve.size(); ++i) {
    out += std::to_string(i) + "," + fmt(r.loss_curve[i]) + "\n";
  }
  return out;
}

SampleMeta meta_for(const Dataset& d, std::size_t i) {
  SampleMeta m;
  m.id = i;
  m.distribution = d.items[i].distribution;
  if (m.distribution == Distribution::kInD) m.truth_label = d.items[i].label;
  return m;
}

double scorer_value(const DetectionRecord& r, std::string_view scorer,
                    const TandemConfig* mls_band, const TandemConfig* ebo_band) {
  if (scorer == "diffguard") return r.ood_score;
  if (scorer == "mls") return -r.mls;
  if (scorer == "ebo") return r.ebo;
  if (scorer == "tandem_mls") {
    if (!mls_band) throw ArgumentError("tandem_mls needs a calibrated band");
    return tandem_combine(-r.mls, r.ood_score, *mls_band);
  }
  if (scorer == "tandem_ebo") {
    if (!ebo_band) throw ArgumentError("tandem_ebo needs a calibrated band");
    return tandem_combine(r.ebo, r.ood_score, *ebo_band);
  }
  auto kind = parse_metric(scorer);
  if (!kind) throw ArgumentError("unknown scorer '" + std::string(scorer) + "'");
  return orient_as_ood_score(*kind, r.metric_scores.at(*kind));
}

std::vector<ScoredSample> diffguard_samples(const RunContext& ctx, const DetectorConfig& det,
                                            std::span<const std::size_t> indices) {
  return scored_samples(run_detection(ctx, det, indices), "diffguard");
}

std::vector<int> timestep_grid(int total, int points) {
  std::vector<int> grid;
  for (int k = 0; k <= points; ++k) {
    const int t = static_cast<int>(std::lround(static_cast<double>(k) * total / points));
    if (grid.empty() || grid.back() != t) grid.push_back(t);
  }
  return grid;
}

}  // namespace

std::string_view diagnose_kind_name(DiagnoseKind kind) {
  switch (kind) {
    case DiagnoseKind::kAccVsT: return "acc_vs_t";
    case DiagnoseKind::kDegradationCurves: return "degradation_curves";
    case DiagnoseKind::kCutpointSweep: return "cutpoint_sweep";
    case DiagnoseKind::kStepsSweep: return "steps_sweep";
    case DiagnoseKind::kAesThresholdTable: return "aes_threshold_table";
    case DiagnoseKind::kCleanGradAblation: return "cleangrad_ablation";
  }
  return "unknown";
}

std::optional<DiagnoseKind> parse_diagnose_kind(std::string_view name) {
  for (DiagnoseKind k : {DiagnoseKind::kAccVsT, DiagnoseKind::kDegradationCurves,
                         DiagnoseKind::kCutpointSweep, DiagnoseKind::kStepsSweep,
                         DiagnoseKind::kAesThresholdTable, DiagnoseKind::kCleanGradAblation}) {
    if (diagnose_kind_name(k) == name) return k;
  }
  return std::nullopt;
}

RunContext load_context(const RunConfig& config) {
  config.validate();
  const fs::path data_path = config.resolve(config.paths.dataset);
  const fs::path score_path = config.resolve(config.paths.score_model);
  const fs::path clf_path = config.resolve(config.paths.classifier_model);
  require_artifact(config, data_path, "gen-data");
  require_artifact(config, score_path, "train-score");
  require_artifact(config, clf_path, "train-classifier");
  RunContext ctx{config,
                 load_dataset(data_path),
                 make_schedule(config.diffusion_steps, config.schedule),
                 load_score_network(score_path),
                 load_classifier(clf_path),
                 0.0};
  if (ctx.score.config().max_timestep != config.diffusion_steps) {
    throw ConfigError("score network was trained for a different schedule.steps");
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i : ctx.dataset.indices(Split::kTrain)) {
    sum += mean_value(ctx.dataset.items[i].pixels);
    ++n;
  }
  ctx.train_mean = n ? sum / static_cast<double>(n) : 0.0;
  return ctx;
}

std::vector<std::size_t> select_indices(const Dataset& dataset, Split split, int per_class_limit) {
  std::map<std::pair<int, int>, int> taken;
  std::vector<std::size_t> out;
  for (std::size_t i : dataset.indices(split)) {
    const LabeledImage& item = dataset.items[i];
    int& n = taken[{static_cast<int>(item.distribution), item.label}];
    if (per_class_limit > 0 && n >= per_class_limit) continue;
    ++n;
    out.push_back(i);
  }
  return out;
}

AesConfig calibrate_aes(const RunContext& ctx, const DetectorConfig& detector) {
  const AesSettings& s = ctx.config.aes;
  AesConfig out;
  out.combine = s.combine;
  out.t_max = s.t_max;
  const int t_max = out.resolved_t_max(ctx.schedule);
  bool need = false;
  for (MetricKind m : s.metrics) {
    need |= (m == MetricKind::kPsnr && !s.psnr_threshold) ||
            (m == MetricKind::kFsd && !s.fsd_threshold);
  }
  std::vector<double> psnr_values, fsd_values;
  if (need) {
    const std::vector<int> tau = truncate_tau(
        make_tau(ctx.schedule.total_steps(), detector.resolved_tau_length()), t_max);
    if (tau.empty()) throw ConfigError("AES t_max lies below the first element of tau");
    const NoisePredictor predictor = ctx.score.predictor(kNullLabel);
    for (std::size_t i : select_indices(ctx.dataset, Split::kVal, s.calibration_per_class)) {
      if (ctx.dataset.items[i].distribution != Distribution::kInD) continue;
      const Image& x0 = ctx.dataset.items[i].pixels;
      const std::vector<TrajectoryPoint> pts = invert_trajectory(x0, predictor, ctx.schedule, tau);
      const TrajectoryPoint& last = pts.back();
      const Image xhat0 = estimate_x0(last.x_t, predictor(last.x_t, last.t), last.t, ctx.schedule);
      psnr_values.push_back(psnr(x0, xhat0));
      fsd_values.push_back(fsd(ctx.classifier, x0, xhat0, detector.fsd));
    }
  }
  // A fraction q of the calibration images has crossed by t_max.
  const double q = s.calibration_quantile;
  for (MetricKind m : s.metrics) {
    if (m == MetricKind::kPsnr) {
      out.criteria.push_back({m, s.psnr_threshold ? *s.psnr_threshold : quantile(psnr_values, q)});
    } else {
      out.criteria.push_back({m, s.fsd_threshold ? *s.fsd_threshold : quantile(fsd_values, 1.0 - q)});
    }
  }
  out.validate();
  return out;
}

DetectorConfig resolve_detector(const RunContext& ctx) {
  DetectorConfig d = ctx.config.detector;
  d.guidance.cutout.fill_value = ctx.config.cutout_fill ? *ctx.config.cutout_fill : ctx.train_mean;
  if (d.aes_active()) d.aes = calibrate_aes(ctx, d);
  return d;
}

std::vector<DetectionRecord> run_detection(const RunContext& ctx, const DetectorConfig& detector,
                                           std::span<const std::size_t> indices) {
  const Models models{&ctx.score, &ctx.classifier, &ctx.schedule};
  std::vector<DetectionRecord> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    out.push_back(diffguard_score(detector, models, ctx.dataset.items[i].pixels,
                                  meta_for(ctx.dataset, i)));
  }
  return out;
}

TandemConfig calibrate_tandem_band(const RunContext& ctx, Baseline baseline) {
  std::vector<double> scores;
  for (std::size_t i : ctx.dataset.indices(Split::kVal, Distribution::kInD)) {
    const std::vector<double> logits = ctx.classifier.logits(ctx.dataset.items[i].pixels);
    scores.push_back(baseline_ood_score(baseline, mls_from_logits(logits),
                                        ebo_from_logits(logits, ctx.config.detector.ebo_temperature)));
  }
  TandemConfig t = ctx.config.tandem;
  t.baseline = baseline;
  return calibrate_tandem(t, scores);
}

std::vector<ScoredSample> scored_samples(const std::vector<DetectionRecord>& records,
                                         std::string_view scorer, const TandemConfig* mls_band,
                                         const TandemConfig* ebo_band) {
  std::vector<ScoredSample> out;
  for (const DetectionRecord& r : records) {
    if (!r.valid) continue;
    out.push_back({scorer_value(r, scorer, mls_band, ebo_band), r.distribution});
  }
  return out;
}

std::string detection_csv(const std::vector<DetectionRecord>& records,
                          const TandemConfig& mls_band, const TandemConfig& ebo_band) {
  std::ostringstream out;
  out << "id,distribution,label,valid,t_stop,aes_fired,psnr,l2,logits_l1,fsd,mls,ebo,"
         "diffguard,tandem_mls,tandem_ebo\n";
  for (const DetectionRecord& r : records) {
    out << r.id << ',' << (r.distribution == Distribution::kInD ? "ind" : "ood") << ','
        << r.label << ',' << (r.valid ? 1 : 0) << ',' << r.t_stop << ',' << r.aes_fired;
    if (r.valid) {
      for (MetricKind k : {MetricKind::kPsnr, MetricKind::kL2, MetricKind::kLogitsL1,
                           MetricKind::kFsd}) {
        out << ',' << fmt(r.metric_scores.at(k));
      }
      out << ',' << fmt(r.mls) << ',' << fmt(r.ebo) << ',' << fmt(r.ood_score) << ','
          << fmt(tandem_combine(-r.mls, r.ood_score, mls_band)) << ','
          << fmt(tandem_combine(r.ebo, r.ood_score, ebo_band));
    } else {
      out << ",,,,,,,,,";
    }
    out << '\n';
  }
  return out.str();
}

void cmd_gen_data(const RunConfig& config) {
  config.validate();
  Stopwatch sw;
  DatasetSpec spec = config.data;
  spec.seed = config.stage_seed("data");
  const Dataset d = generate_dataset(spec);
  const fs::path p = config.resolve(config.paths.dataset);
  save_dataset(d, p);
  record_stage(config, "gen-data", {p}, sw.seconds());
}

TrainResult cmd_train(const RunConfig& config, TrainTarget target) {
  config.validate();
  Stopwatch sw;
  const fs::path data_path = config.resolve(config.paths.dataset);
  require_artifact(config, data_path, "gen-data");
  const Dataset d = load_dataset(data_path);
  std::vector<Image> images;
  std::vector<int> labels;
  collect_split(d, Split::kTrain, images, labels);
  TrainResult result;
  fs::path model_path;
  fs::path loss_path;
  std::string stage;
  if (target == TrainTarget::kScore) {
    TrainConfig tc = config.score_train;
    tc.seed = config.stage_seed("score_train");
    ScoreNetwork net(config.score_net, config.stage_seed("score_init"));
    const NoiseSchedule schedule = make_schedule(config.diffusion_steps, config.schedule);
    result = train_score(net, images, labels, schedule, tc);
    model_path = config.resolve(config.paths.score_model);
    save_model(net, model_path);
    loss_path = config.resolve("loss_score.csv");
    stage = "train-score";
  } else {
    TrainConfig tc = config.classifier_train;
    tc.seed = config.stage_seed("classifier_train");
    Classifier clf(config.classifier_net, config.stage_seed("classifier_init"));
    result = train_classifier(clf, images, labels, tc);
    model_path = config.resolve(config.paths.classifier_model);
    save_model(clf, model_path);
    loss_path = config.resolve("loss_classifier.csv");
    stage = "train-classifier";
  }
  write_file_atomic(loss_path, loss_csv(result));
  record_stage(config, stage, {model_path, loss_path}, sw.seconds());
  return result;
}

DetectOutput cmd_detect(const RunConfig& config) {
  Stopwatch sw;
  const RunContext ctx = load_context(config);
  const DetectorConfig det = resolve_detector(ctx);
  const std::vector<std::size_t> idx =
      select_indices(ctx.dataset, config.detect.split, config.detect.per_class_limit);
  DetectOutput out;
  out.records = run_detection(ctx, det, idx);
  const TandemConfig mls_band = calibrate_tandem_band(ctx, Baseline::kMls);
  const TandemConfig ebo_band = calibrate_tandem_band(ctx, Baseline::kEbo);
  const std::string mode(guidance_mode_name(det.guidance.mode));
  out.csv = config.resolve("detections_" + mode + ".csv");
  write_file_atomic(out.csv, detection_csv(out.records, mls_band, ebo_band));
  std::vector<fs::path> outputs = {out.csv};

  if (det.aes_active()) {
    std::ostringstream traces;
    traces << "id,distribution,t,psnr,fsd,fired\n";
    for (const DetectionRecord& r : out.records) {
      std::istringstream rows(aes_trace_csv(r.aes_trace));
      std::string row;
      std::getline(rows, row);
      while (std::getline(rows, row)) {
        traces << r.id << ',' << (r.distribution == Distribution::kInD ? "ind" : "ood") << ','
               << row << '\n';
      }
    }
    const fs::path p = config.resolve("aes_traces_" + mode + ".csv");
    write_file_atomic(p, traces.str());
    outputs.push_back(p);
  }
  if (config.detect.dump_images) {
    detail::BinaryWriter raw;
    std::ostringstream index;
    index << "id,offset,channels,height,width\n";
    for (const DetectionRecord& r : out.records) {
      if (!r.valid) continue;
      index << r.id << ',' << raw.str().size() << ',' << r.synthesis.channels() << ','
            << r.synthesis.height() << ',' << r.synthesis.width() << '\n';
      for (double v : r.synthesis.pixels()) raw.f32(static_cast<float>(v));
    }
    const fs::path raw_path = config.resolve("syntheses_" + mode + ".f32");
    const fs::path index_path = config.resolve("syntheses_" + mode + "_index.csv");
    write_file_atomic(raw_path, raw.str());
    write_file_atomic(index_path, index.str());
    outputs.push_back(raw_path);
    outputs.push_back(index_path);
  }
  record_stage(config, "detect-" + mode, outputs, sw.seconds());
  return out;
}

std::vector<ScorerReport> cmd_eval(const RunConfig& config, const fs::path& csv) {
  Stopwatch sw;
  if (!fs::exists(csv)) throw PrerequisiteError("missing " + csv.string() + "; run 'detect' first");
  std::istringstream in(read_file(csv));
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(csv.string() + ": empty detection CSV");
  std::vector<std::string> header;
  {
    std::istringstream h(line);
    std::string cell;
    while (std::getline(h, cell, ',')) header.push_back(cell);
  }
  auto column = [&](const std::string& name) -> int {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  };
  const int dist_col = column("distribution");
  const int valid_col = column("valid");
  if (dist_col < 0) throw ConfigError(csv.string() + ": no 'distribution' column");
  // Orientation of each score column: +1 if larger means more OOD.
  const std::vector<std::pair<std::string, double>> scorers = {
      {"diffguard", 1.0}, {"mls", -1.0}, {"ebo", 1.0}, {"tandem_mls", 1.0},
      {"tandem_ebo", 1.0}, {"psnr", -1.0}, {"l2", 1.0}, {"logits_l1", 1.0}, {"fsd", 1.0}};
  std::map<std::string, std::vector<ScoredSample>> samples;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream r(line);
    std::string cell;
    while (std::getline(r, cell, ',')) cells.push_back(cell);
    while (cells.size() < header.size()) cells.emplace_back();
    const std::string& d = cells[dist_col];
    if (d != "ind" && d != "ood") {
      throw ConfigError(csv.string() + ": row " + std::to_string(row) +
                        ": distribution must be ind or ood");
    }
    if (valid_col >= 0 && cells[valid_col] != "1") continue;
    for (const auto& [name, sign] : scorers) {
      const int c = column(name);
      if (c < 0 || cells[c].empty()) continue;
      double v = 0.0;
      try {
        std::size_t used = 0;
        v = std::stod(cells[c], &used);
        if (used != cells[c].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ConfigError(csv.string() + ": row " + std::to_string(row) + ": bad value in '" +
                          name + "'");
      }
      samples[name].push_back(
          {sign * v, d == "ind" ? Distribution::kInD : Distribution::kOOD});
    }
  }
  std::vector<ScorerReport> reports;
  for (const auto& [name, sign] : scorers) {
    auto it = samples.find(name);
    if (it == samples.end()) continue;
    reports.push_back({name, evaluate(it->second)});
  }
  if (reports.empty()) throw ConfigError(csv.string() + ": no score columns");

  std::ostringstream table;
  table << "scorer,auroc,fpr_at_95_tpr,threshold,n_ind,n_ood\n";
  std::ostringstream text;
  text << "# scores oriented so that higher = more OOD; FPR@95 accepts InD at score <= threshold\n";
  for (const ScorerReport& r : reports) {
    table << r.scorer << ',' << fmt(r.report.auroc) << ',' << fmt(r.report.fpr_at_95_tpr) << ','
          << fmt(r.report.threshold) << ',' << r.report.n_ind << ',' << r.report.n_ood << '\n';
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-11s AUROC %.4f  FPR@95 %.4f  (n_ind %d, n_ood %d)\n",
                  r.scorer.c_str(), r.report.auroc, r.report.fpr_at_95_tpr, r.report.n_ind,
                  r.report.n_ood);
    text << buf;
  }
  const fs::path base = csv.parent_path() / csv.stem();
  const fs::path csv_out = base.string() + "_report.csv";
  const fs::path txt_out = base.string() + "_report.txt";
  write_file_atomic(csv_out, table.str());
  write_file_atomic(txt_out, text.str());
  if (fs::exists(config.paths.output_dir)) {
    record_stage(config, "eval-" + csv.stem().string(), {csv_out, txt_out}, sw.seconds());
  }
  return reports;
}

fs::path cmd_diagnose(const RunConfig& config, DiagnoseKind kind) {
  Stopwatch sw;
  const RunContext ctx = load_context(config);
  const DiagnoseSettings& ds = config.diagnose;
  const std::vector<std::size_t> idx = select_indices(ctx.dataset, Split::kTest, ds.per_class_limit);
  const fs::path out_path = config.resolve("diagnose_" + std::string(diagnose_kind_name(kind)) + ".csv");
  std::string csv;

  switch (kind) {
    case DiagnoseKind::kAccVsT: {
      std::vector<Image> images;
      std::vector<int> labels;
      for (std::size_t i : idx) {
        if (ctx.dataset.items[i].distribution != Distribution::kInD) continue;
        images.push_back(ctx.dataset.items[i].pixels);
        labels.push_back(ctx.dataset.items[i].label);
      }
      const std::vector<int> grid = timestep_grid(ctx.schedule.total_steps(), ds.timestep_grid_points);
      const RngStream rng(config.stage_seed("acc_vs_t"));
      const auto raw = accuracy_vs_timestep(ctx.classifier, ctx.score, images, labels,
                                            ctx.schedule, AccuracyMode::kRawXt, grid, rng);
      const auto xhat = accuracy_vs_timestep(ctx.classifier, ctx.score, images, labels,
                                             ctx.schedule, AccuracyMode::kXhat0, grid, rng);
      csv = "t,acc_raw,acc_xhat0\n";
      for (std::size_t k = 0; k < grid.size(); ++k) {
        csv += std::to_string(grid[k]) + "," + fmt(raw[k].accuracy) + "," + fmt(xhat[k].accuracy) + "\n";
      }
      break;
    }
    case DiagnoseKind::kDegradationCurves: {
      const DetectorConfig det = resolve_detector(ctx);
      const std::vector<int> tau = make_tau(ctx.schedule.total_steps(), det.resolved_tau_length());
      const NoisePredictor predictor = ctx.score.predictor(kNullLabel);
      InversionOptions opt;
      opt.track_xhat0 = true;
      csv = "id,distribution,t,psnr,fsd\n";
      for (std::size_t i : idx) {
        const Image& x0 = ctx.dataset.items[i].pixels;
        const auto pts = invert_trajectory(x0, predictor, ctx.schedule, tau, opt);
        const auto f0 = fsd_features(ctx.classifier, x0, det.fsd);
        for (const TrajectoryPoint& p : pts) {
          csv += std::to_string(i) + "," +
                 (ctx.dataset.items[i].distribution == Distribution::kInD ? "ind" : "ood") + "," +
                 std::to_string(p.t) + "," + fmt(psnr(x0, *p.xhat0)) + "," +
                 fmt(fsd_from_features(f0, fsd_features(ctx.classifier, *p.xhat0, det.fsd), det.fsd)) +
                 "\n";
        }
      }
      break;
    }
    case DiagnoseKind::kCutpointSweep: {
      DetectorConfig det = ctx.config.detector;
      det.guidance.mode = GuidanceMode::kClassifierFree;
      det.use_dsg = true;
      RunContext local = ctx;
      local.config.detector = det;
      const DetectorConfig base = resolve_detector(local);
      std::vector<std::string> values;
      for (double c : ds.cutpoints) values.push_back(fmt(c));
      csv = sweep_csv(sweep("cam_cutpoint", values, [&](const std::string& v) {
        DetectorConfig d = base;
        d.guidance.cam_cutpoint = std::stod(v);
        return diffguard_samples(ctx, d, idx);
      }));
      break;
    }
    case DiagnoseKind::kStepsSweep: {
      std::vector<std::string> values;
      for (int l : ds.tau_lengths) values.push_back(std::to_string(l));
      csv = sweep_csv(sweep("tau_length", values, [&](const std::string& v) {
        RunContext local = ctx;
        local.config.detector.tau_length = std::stoi(v);
        return diffguard_samples(ctx, resolve_detector(local), idx);
      }));
      break;
    }
    case DiagnoseKind::kAesThresholdTable: {
      RunContext local = ctx;
      local.config.detector.guidance.mode = GuidanceMode::kClassifier;
      local.config.detector.aes_enabled = true;
      const DetectorConfig base = resolve_detector(local);
      std::vector<std::string> values;
      for (double f : ds.aes_threshold_factors) values.push_back(fmt(f));
      csv = sweep_csv(sweep("aes_threshold_factor", values, [&](const std::string& v) {
        DetectorConfig d = base;
        for (AesCriterion& c : d.aes.criteria) c.threshold *= std::stod(v);
        return diffguard_samples(ctx, d, idx);
      }));
      break;
    }
    case DiagnoseKind::kCleanGradAblation: {
      RunContext local = ctx;
      local.config.detector.guidance.mode = GuidanceMode::kClassifier;
      const DetectorConfig base = resolve_detector(local);
      const std::vector<std::string> values = {"xhat0=off;cutout=off", "xhat0=off;cutout=on",
                                               "xhat0=on;cutout=off", "xhat0=on;cutout=on"};
      csv = sweep_csv(sweep("clean_grad", values, [&](const std::string& v) {
        DetectorConfig d = base;
        d.guidance.use_xhat0 = v.find("xhat0=on") != std::string::npos;
        d.guidance.use_cutout = v.find("cutout=on") != std::string::npos;
        return diffguard_samples(ctx, d, idx);
      }));
      break;
    }
  }
  write_file_atomic(out_path, csv);
  record_stage(config, "diagnose-" + std::string(diagnose_kind_name(kind)), {out_path}, sw.seconds());
  return out_path;
}

}  // namespace semguard
