// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "semguard/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "semguard/errors.hpp"
#include "semguard/io.hpp"
#include "semguard/rng.hpp"

namespace semguard {

namespace {

struct Field {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  /// Throws std::invalid_argument with the expected form.
  std::function<void(RunConfig&, const std::string&)> set;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += items[i];
  }
  return out;
}

// Shortest text that parses back to the same double.
std::string fmt_double(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw std::invalid_argument("a number");
  return v;
}

template <typename Int>
Int to_int(const std::string& s) {
  Int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw std::invalid_argument("an integer");
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw std::invalid_argument("true or false");
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

template <typename T, typename Parse>
T parse_enum(const std::string& s, Parse parse, const char* expected) {
  auto v = parse(s);
  if (!v) throw std::invalid_argument(expected);
  return *v;
}

std::vector<ShapeClass> to_classes(const std::string& s, int first_id) {
  std::vector<ShapeClass> out;
  for (const std::string& name : split_list(s)) {
    auto shape = parse_shape(name);
    if (!shape) throw std::invalid_argument("a list of shape names");
    out.push_back({first_id + static_cast<int>(out.size()), *shape});
  }
  return out;
}

std::string fmt_classes(const std::vector<ShapeClass>& classes) {
  std::vector<std::string> names;
  for (const ShapeClass& c : classes) names.emplace_back(shape_name(c.shape));
  return join(names);
}

template <typename T>
std::string fmt_optional(const std::optional<T>& v, std::string (*f)(T)) {
  return v ? f(*v) : "auto";
}

std::string fmt_int(int v) { return std::to_string(v); }

#define SG_DOUBLE(KEY, MEMBER)                                                          \
  Field {                                                                               \
    KEY, [](const RunConfig& c) { return fmt_double(c.MEMBER); },                       \
        [](RunConfig& c, const std::string& s) { c.MEMBER = to_double(s); }             \
  }
#define SG_INT(KEY, MEMBER)                                                             \
  Field {                                                                               \
    KEY, [](const RunConfig& c) { return std::to_string(c.MEMBER); },                   \
        [](RunConfig& c, const std::string& s) { c.MEMBER = to_int<int>(s); }           \
  }
#define SG_BOOL(KEY, MEMBER)                                                            \
  Field {                                                                               \
    KEY, [](const RunConfig& c) { return fmt_bool(c.MEMBER); },                         \
        [](RunConfig& c, const std::string& s) { c.MEMBER = to_bool(s); }               \
  }
#define SG_STRING(KEY, MEMBER)                                                          \
  Field {                                                                               \
    KEY, [](const RunConfig& c) { return c.MEMBER; },                                   \
        [](RunConfig& c, const std::string& s) { c.MEMBER = s; }                        \
  }

void train_fields(std::vector<Field>& f, const std::string& p, TrainConfig RunConfig::*m) {
  f.push_back({p + ".epochs", [m](const RunConfig& c) { return std::to_string((c.*m).epochs); },
               [m](RunConfig& c, const std::string& s) { (c.*m).epochs = to_int<int>(s); }});
  f.push_back({p + ".batch_size",
               [m](const RunConfig& c) { return std::to_string((c.*m).batch_size); },
               [m](RunConfig& c, const std::string& s) { (c.*m).batch_size = to_int<int>(s); }});
  f.push_back({p + ".learning_rate",
               [m](const RunConfig& c) { return fmt_double((c.*m).learning_rate); },
               [m](RunConfig& c, const std::string& s) { (c.*m).learning_rate = to_double(s); }});
  f.push_back(
      {p + ".final_lr_fraction",
       [m](const RunConfig& c) { return fmt_double((c.*m).final_lr_fraction); },
       [m](RunConfig& c, const std::string& s) { (c.*m).final_lr_fraction = to_double(s); }});
  f.push_back({p + ".p_uncond", [m](const RunConfig& c) { return fmt_double((c.*m).p_uncond); },
               [m](RunConfig& c, const std::string& s) { (c.*m).p_uncond = to_double(s); }});
  f.push_back({p + ".ema_decay", [m](const RunConfig& c) { return fmt_double((c.*m).ema_decay); },
               [m](RunConfig& c, const std::string& s) { (c.*m).ema_decay = to_double(s); }});
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back({"seed", [](const RunConfig& c) { return std::to_string(c.seed); },
                 [](RunConfig& c, const std::string& s) { c.seed = to_int<std::uint64_t>(s); }});
    f.push_back(SG_STRING("paths.dataset", paths.dataset));
    f.push_back(SG_STRING("paths.score_model", paths.score_model));
    f.push_back(SG_STRING("paths.classifier_model", paths.classifier_model));
    f.push_back(SG_STRING("paths.output_dir", paths.output_dir));

    f.push_back(SG_INT("data.image_side", data.image_side));
    f.push_back(SG_INT("data.channels", data.channels));
    f.push_back({"data.ind_shapes", [](const RunConfig& c) { return fmt_classes(c.data.ind_classes); },
                 [](RunConfig& c, const std::string& s) {
                   c.data.ind_classes = to_classes(s, 0);
                   for (std::size_t i = 0; i < c.data.ood_classes.size(); ++i) {
                     c.data.ood_classes[i].id = static_cast<int>(c.data.ind_classes.size() + i);
                   }
                 }});
    f.push_back({"data.ood_shapes", [](const RunConfig& c) { return fmt_classes(c.data.ood_classes); },
                 [](RunConfig& c, const std::string& s) {
                   c.data.ood_classes =
                       to_classes(s, static_cast<int>(c.data.ind_classes.size()));
                 }});
    f.push_back(SG_INT("data.train_per_class", data.per_class_count.train));
    f.push_back(SG_INT("data.val_per_class", data.per_class_count.val));
    f.push_back(SG_INT("data.test_per_class", data.per_class_count.test));
    f.push_back(SG_DOUBLE("data.extent_min", data.jitter.extent_min));
    f.push_back(SG_DOUBLE("data.extent_max", data.jitter.extent_max));
    f.push_back(SG_DOUBLE("data.shift", data.jitter.shift));
    f.push_back(SG_DOUBLE("data.foreground_min", data.jitter.foreground_min));
    f.push_back(SG_DOUBLE("data.foreground_max", data.jitter.foreground_max));
    f.push_back(SG_DOUBLE("data.background_min", data.jitter.background_min));
    f.push_back(SG_DOUBLE("data.background_max", data.jitter.background_max));

    f.push_back(SG_INT("schedule.steps", diffusion_steps));
    f.push_back({"schedule.kind",
                 [](const RunConfig& c) { return std::string(schedule_kind_name(c.schedule)); },
                 [](RunConfig& c, const std::string& s) {
                   c.schedule = parse_enum<ScheduleKind>(s, parse_schedule_kind, "linear or cosine");
                 }});

    f.push_back(SG_INT("score_net.width", score_net.width));
    f.push_back(SG_INT("score_net.blocks", score_net.blocks));
    f.push_back(SG_INT("score_net.embed_dim", score_net.embed_dim));
    f.push_back(SG_INT("classifier_net.width1", classifier_net.width1));
    f.push_back(SG_INT("classifier_net.width2", classifier_net.width2));
    f.push_back(SG_INT("classifier_net.width3", classifier_net.width3));
    train_fields(f, "score_train", &RunConfig::score_train);
    train_fields(f, "classifier_train", &RunConfig::classifier_train);

    f.push_back({"guidance.mode",
                 [](const RunConfig& c) { return std::string(guidance_mode_name(c.detector.guidance.mode)); },
                 [](RunConfig& c, const std::string& s) {
                   c.detector.guidance.mode = parse_enum<GuidanceMode>(
                       s, parse_guidance_mode, "classifier or classifier_free");
                 }});
    f.push_back(SG_DOUBLE("guidance.scale", detector.guidance.scale));
    f.push_back(SG_DOUBLE("guidance.omega", detector.guidance.omega));
    f.push_back(SG_DOUBLE("guidance.gradient_sign", detector.guidance.gradient_sign));
    f.push_back(SG_INT("guidance.n_aug", detector.guidance.n_aug));
    f.push_back({"guidance.chain_rule",
                 [](const RunConfig& c) { return std::string(chain_rule_name(c.detector.guidance.chain_rule)); },
                 [](RunConfig& c, const std::string& s) {
                   c.detector.guidance.chain_rule =
                       parse_enum<ChainRule>(s, parse_chain_rule, "full or scaled_identity");
                 }});
    f.push_back(SG_BOOL("guidance.use_xhat0", detector.guidance.use_xhat0));
    f.push_back(SG_BOOL("guidance.use_cutout", detector.guidance.use_cutout));
    f.push_back(SG_DOUBLE("guidance.cam_cutpoint", detector.guidance.cam_cutpoint));
    f.push_back(SG_DOUBLE("guidance.cutout_side_fraction", detector.guidance.cutout.hole_side_fraction));
    f.push_back(SG_INT("guidance.cutout_holes", detector.guidance.cutout.holes_per_aug));
    f.push_back({"guidance.cutout_fill",
                 [](const RunConfig& c) { return fmt_optional(c.cutout_fill, fmt_double); },
                 [](RunConfig& c, const std::string& s) {
                   if (s == "auto") c.cutout_fill.reset(); else c.cutout_fill = to_double(s);
                 }});

    f.push_back({"detector.tau_length",
                 [](const RunConfig& c) { return fmt_optional(c.detector.tau_length, fmt_int); },
                 [](RunConfig& c, const std::string& s) {
                   if (s == "auto") c.detector.tau_length.reset();
                   else c.detector.tau_length = to_int<int>(s);
                 }});
    f.push_back(SG_DOUBLE("detector.eta", detector.sampler.eta));
    f.push_back(SG_BOOL("detector.use_dsg", detector.use_dsg));
    f.push_back({"detector.metric",
                 [](const RunConfig& c) { return std::string(metric_name(c.detector.metric)); },
                 [](RunConfig& c, const std::string& s) {
                   c.detector.metric =
                       parse_enum<MetricKind>(s, parse_metric, "psnr, l2, logits_l1 or fsd");
                 }});
    f.push_back({"detector.label_source",
                 [](const RunConfig& c) { return std::string(label_source_name(c.detector.label_source)); },
                 [](RunConfig& c, const std::string& s) {
                   c.detector.label_source =
                       parse_enum<LabelSource>(s, parse_label_source, "classifier or oracle");
                 }});
    f.push_back(SG_DOUBLE("detector.ebo_temperature", detector.ebo_temperature));
    f.push_back({"detector.seed", [](const RunConfig& c) { return std::to_string(c.detector.seed); },
                 [](RunConfig& c, const std::string& s) {
                   c.detector.seed = to_int<std::uint64_t>(s);
                 }});

    f.push_back(SG_BOOL("aes.enabled", detector.aes_enabled));
    f.push_back(SG_BOOL("aes.on_classifier_free", detector.aes_on_cfg));
    f.push_back({"aes.metrics",
                 [](const RunConfig& c) {
                   std::vector<std::string> names;
                   for (MetricKind k : c.aes.metrics) names.emplace_back(metric_name(k));
                   return join(names);
                 },
                 [](RunConfig& c, const std::string& s) {
                   c.aes.metrics.clear();
                   for (const std::string& n : split_list(s)) {
                     auto k = parse_metric(n);
                     if (!k || (*k != MetricKind::kPsnr && *k != MetricKind::kFsd)) {
                       throw std::invalid_argument("a list drawn from psnr, fsd");
                     }
                     c.aes.metrics.push_back(*k);
                   }
                 }});
    f.push_back({"aes.psnr_threshold",
                 [](const RunConfig& c) { return fmt_optional(c.aes.psnr_threshold, fmt_double); },
                 [](RunConfig& c, const std::string& s) {
                   if (s == "auto") c.aes.psnr_threshold.reset();
                   else c.aes.psnr_threshold = to_double(s);
                 }});
    f.push_back({"aes.fsd_threshold",
                 [](const RunConfig& c) { return fmt_optional(c.aes.fsd_threshold, fmt_double); },
                 [](RunConfig& c, const std::string& s) {
                   if (s == "auto") c.aes.fsd_threshold.reset();
                   else c.aes.fsd_threshold = to_double(s);
                 }});
    f.push_back({"aes.combine",
                 [](const RunConfig& c) {
                   return std::string(c.aes.combine == AesCombine::kAny ? "any" : "all");
                 },
                 [](RunConfig& c, const std::string& s) {
                   if (s == "any") c.aes.combine = AesCombine::kAny;
                   else if (s == "all") c.aes.combine = AesCombine::kAll;
                   else throw std::invalid_argument("any or all");
                 }});
    f.push_back({"aes.t_max", [](const RunConfig& c) { return fmt_optional(c.aes.t_max, fmt_int); },
                 [](RunConfig& c, const std::string& s) {
                   if (s == "auto") c.aes.t_max.reset(); else c.aes.t_max = to_int<int>(s);
                 }});
    f.push_back(SG_DOUBLE("aes.calibration_quantile", aes.calibration_quantile));
    f.push_back(SG_INT("aes.calibration_per_class", aes.calibration_per_class));

    f.push_back({"fsd.layers", [](const RunConfig& c) { return join(c.detector.fsd.layers); },
                 [](RunConfig& c, const std::string& s) { c.detector.fsd.layers = split_list(s); }});
    f.push_back(SG_DOUBLE("fsd.c1", detector.fsd.c1));
    f.push_back(SG_DOUBLE("fsd.c2", detector.fsd.c2));

    f.push_back({"tandem.baseline",
                 [](const RunConfig& c) { return std::string(baseline_name(c.tandem.baseline)); },
                 [](RunConfig& c, const std::string& s) {
                   c.tandem.baseline = parse_enum<Baseline>(s, parse_baseline, "mls or ebo");
                 }});
    f.push_back(SG_DOUBLE("tandem.low_quantile", tandem.low_quantile));
    f.push_back(SG_DOUBLE("tandem.high_quantile", tandem.high_quantile));

    f.push_back({"detect.split",
                 [](const RunConfig& c) { return std::string(split_name(c.detect.split)); },
                 [](RunConfig& c, const std::string& s) {
                   c.detect.split = parse_enum<Split>(s, parse_split, "train, val or test");
                 }});
    f.push_back(SG_INT("detect.per_class_limit", detect.per_class_limit));
    f.push_back(SG_BOOL("detect.dump_images", detect.dump_images));

    f.push_back(SG_INT("diagnose.per_class_limit", diagnose.per_class_limit));
    f.push_back({"diagnose.cutpoints",
                 [](const RunConfig& c) {
                   std::vector<std::string> v;
                   for (double d : c.diagnose.cutpoints) v.push_back(fmt_double(d));
                   return join(v);
                 },
                 [](RunConfig& c, const std::string& s) {
                   c.diagnose.cutpoints.clear();
                   for (const std::string& x : split_list(s)) c.diagnose.cutpoints.push_back(to_double(x));
                 }});
    f.push_back({"diagnose.tau_lengths",
                 [](const RunConfig& c) {
                   std::vector<std::string> v;
                   for (int d : c.diagnose.tau_lengths) v.push_back(std::to_string(d));
                   return join(v);
                 },
                 [](RunConfig& c, const std::string& s) {
                   c.diagnose.tau_lengths.clear();
                   for (const std::string& x : split_list(s)) c.diagnose.tau_lengths.push_back(to_int<int>(x));
                 }});
    f.push_back({"diagnose.aes_threshold_factors",
                 [](const RunConfig& c) {
                   std::vector<std::string> v;
                   for (double d : c.diagnose.aes_threshold_factors) v.push_back(fmt_double(d));
                   return join(v);
                 },
                 [](RunConfig& c, const std::string& s) {
                   c.diagnose.aes_threshold_factors.clear();
                   for (const std::string& x : split_list(s)) {
                     c.diagnose.aes_threshold_factors.push_back(to_double(x));
                   }
                 }});
    f.push_back(SG_INT("diagnose.timestep_grid_points", diagnose.timestep_grid_points));
    return f;
  }();
  return table;
}

#undef SG_DOUBLE
#undef SG_INT
#undef SG_BOOL
#undef SG_STRING

void sync_derived(RunConfig& c) {
  c.score_net.channels = c.data.channels;
  c.score_net.side = c.data.image_side;
  c.score_net.num_classes = static_cast<int>(c.data.ind_classes.size());
  c.score_net.max_timestep = c.diffusion_steps;
  c.classifier_net.channels = c.data.channels;
  c.classifier_net.side = c.data.image_side;
  c.classifier_net.num_classes = static_cast<int>(c.data.ind_classes.size());
}

void set_field(RunConfig& config, const std::string& key, const std::string& value,
               const std::string& where) {
  for (const Field& f : fields()) {
    if (f.key != key) continue;
    try {
      f.set(config, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where + ": key '" + key + "': expected " + e.what() + ", got '" +
                        value + "'");
    }
    return;
  }
  throw ConfigError(where + ": unknown key '" + key + "'");
}

std::pair<std::string, std::string> split_assignment(std::string_view line,
                                                     const std::string& where) {
  const auto eq = line.find('=');
  if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
  std::string key = trim(line.substr(0, eq));
  if (key.empty()) throw ConfigError(where + ": empty key");
  return {key, trim(line.substr(eq + 1))};
}

}  // namespace

RunConfig::RunConfig() {
  // Reference-run settings tuned on the toy shapes. The guidance scale is
  // small because the x0-hat shift grows like (1 - alpha) / alpha.
  score_net.width = 24;
  score_train.epochs = 40;
  score_train.ema_decay = 0.999;
  score_train.p_uncond = 0.2;
  classifier_train.epochs = 40;
  classifier_train.learning_rate = 4e-3;
  detector.guidance.scale = 0.01;
  detector.guidance.omega = 2.0;
  AesConfig& a = detector.aes;
  a.criteria = {{MetricKind::kPsnr, 0.0}, {MetricKind::kFsd, 1.0}};
  sync_derived(*this);
}

void RunConfig::validate() const {
  data.validate();
  if (diffusion_steps < 2) throw ConfigError("schedule.steps must be >= 2");
  if (score_net.width < 1 || score_net.blocks < 1 || score_net.embed_dim < 2 ||
      score_net.embed_dim % 2 != 0) {
    throw ConfigError("score_net sizes must be positive (embed_dim even)");
  }
  if (classifier_net.width1 < 1 || classifier_net.width2 < 1 || classifier_net.width3 < 1) {
    throw ConfigError("classifier_net widths must be positive");
  }
  if (data.image_side % 2 != 0) throw ConfigError("data.image_side must be even");
  for (const TrainConfig* t : {&score_train, &classifier_train}) {
    if (t->epochs < 1 || t->batch_size < 1 || !(t->learning_rate > 0.0) ||
        !(t->final_lr_fraction >= 0.0 && t->final_lr_fraction <= 1.0) ||
        !(t->p_uncond >= 0.0 && t->p_uncond < 1.0) ||
        !(t->ema_decay >= 0.0 && t->ema_decay < 1.0)) {
      throw ConfigError("training settings out of range");
    }
  }
  DetectorConfig d = detector;
  d.aes.criteria = {{MetricKind::kPsnr, 0.0}};
  d.validate();
  if (aes.metrics.empty()) throw ConfigError("aes.metrics needs at least one metric");
  if (aes.t_max && (*aes.t_max < 1 || *aes.t_max > diffusion_steps)) {
    throw ConfigError("aes.t_max must lie in [1, schedule.steps]");
  }
  if (!(aes.calibration_quantile >= 0.0 && aes.calibration_quantile <= 1.0) ||
      aes.calibration_per_class < 1) {
    throw ConfigError("aes calibration settings out of range");
  }
  for (auto v : {aes.psnr_threshold, aes.fsd_threshold}) {
    if (v && !std::isfinite(*v)) throw ConfigError("AES thresholds must be finite");
  }
  tandem.validate();
  if (detect.per_class_limit < 0 || diagnose.per_class_limit < 0) {
    throw ConfigError("per_class_limit must be >= 0");
  }
  if (diagnose.timestep_grid_points < 1) throw ConfigError("diagnose.timestep_grid_points >= 1");
  for (int l : diagnose.tau_lengths) {
    if (l < 1) throw ConfigError("diagnose.tau_lengths must be positive");
  }
  if (cutout_fill && !std::isfinite(*cutout_fill)) throw ConfigError("cutout fill must be finite");
}

std::filesystem::path RunConfig::resolve(const std::string& path) const {
  const std::filesystem::path p(path);
  if (p.is_absolute()) return p;
  return std::filesystem::path(paths.output_dir) / p;
}

std::uint64_t RunConfig::stage_seed(std::string_view stage) const {
  return RngStream(seed).split(stage).next_u64();
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const Field& f : fields()) out.push_back(f.key);
  return out;
}

RunConfig parse_config(std::string_view text) {
  RunConfig config;
  std::istringstream in{std::string(text)};
  std::string line;
  int n = 0;
  std::map<std::string, int> seen;
  while (std::getline(in, line)) {
    ++n;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::string where = "line " + std::to_string(n);
    auto [key, value] = split_assignment(t, where);
    if (auto it = seen.find(key); it != seen.end()) {
      throw ConfigError(where + ": key '" + key + "' already set on line " +
                        std::to_string(it->second));
    }
    seen[key] = n;
    set_field(config, key, value, where);
  }
  sync_derived(config);
  return config;
}

std::string serialize_config(const RunConfig& config) {
  std::string out;
  for (const Field& f : fields()) out += f.key + " = " + f.get(config) + "\n";
  return out;
}

RunConfig load_config(const std::filesystem::path& path) {
  try {
    return parse_config(read_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void apply_override(RunConfig& config, std::string_view assignment, std::string_view origin) {
  auto [key, value] = split_assignment(assignment, std::string(origin));
  set_field(config, key, value, std::string(origin));
  sync_derived(config);
}

}  // namespace semguard
