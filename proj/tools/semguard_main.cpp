// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "semguard/commands.hpp"
#include "semguard/errors.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitPrerequisite = 3;
constexpr int kExitNumerical = 4;

semguard::RunConfig make_config(const std::string& path, const std::vector<std::string>& sets) {
  semguard::RunConfig config = path.empty() ? semguard::RunConfig{} : semguard::load_config(path);
  for (const std::string& s : sets) semguard::apply_override(config, s);
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic-mismatch OOD detection with guided diffusion"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::vector<std::string> sets;
  app.add_option("-c,--config", config_path, "key = value config file");
  app.add_option("--set", sets, "override one config key (key=value)")->allow_extra_args(false);

  auto* gen = app.add_subcommand("gen-data", "generate the synthetic shape dataset");
  auto* train_score = app.add_subcommand("train-score", "train the conditional score network");
  auto* train_clf = app.add_subcommand("train-classifier", "train the protected classifier");
  auto* detect = app.add_subcommand("detect", "score a dataset split");
  auto* eval = app.add_subcommand("eval", "AUROC / FPR@95 of a detection CSV");
  std::string csv_path;
  eval->add_option("csv", csv_path, "detection CSV")->required();
  auto* diagnose = app.add_subcommand("diagnose", "diagnostic curves and ablations");
  std::string kind_name;
  diagnose->add_option("kind", kind_name,
                       "acc_vs_t | degradation_curves | cutpoint_sweep | steps_sweep | "
                       "aes_threshold_table | cleangrad_ablation")
      ->required();
  auto* show = app.add_subcommand("show-config", "print the effective config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    const semguard::RunConfig config = make_config(config_path, sets);
    if (*show) {
      std::cout << semguard::serialize_config(config);
    } else if (*gen) {
      semguard::cmd_gen_data(config);
    } else if (*train_score) {
      const auto r = semguard::cmd_train(config, semguard::TrainTarget::kScore);
      std::printf("final loss %.6f\n", r.loss_curve.empty() ? 0.0 : r.loss_curve.back());
    } else if (*train_clf) {
      const auto r = semguard::cmd_train(config, semguard::TrainTarget::kClassifier);
      std::printf("final loss %.6f\n", r.loss_curve.empty() ? 0.0 : r.loss_curve.back());
    } else if (*detect) {
      const auto out = semguard::cmd_detect(config);
      std::printf("%zu records -> %s\n", out.records.size(), out.csv.string().c_str());
    } else if (*eval) {
      for (const auto& r : semguard::cmd_eval(config, csv_path)) {
        std::printf("%-11s AUROC %.4f  FPR@95 %.4f\n", r.scorer.c_str(), r.report.auroc,
                    r.report.fpr_at_95_tpr);
      }
    } else if (*diagnose) {
      const auto kind = semguard::parse_diagnose_kind(kind_name);
      if (!kind) throw semguard::ConfigError("unknown diagnose kind '" + kind_name + "'");
      std::printf("%s\n", semguard::cmd_diagnose(config, *kind).string().c_str());
    }
  } catch (const semguard::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const semguard::ArgumentError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const semguard::PrerequisiteError& e) {
    std::fprintf(stderr, "missing prerequisite: %s\n", e.what());
    return kExitPrerequisite;
  } catch (const semguard::FormatError& e) {
    std::fprintf(stderr, "corrupt artifact: %s\n", e.what());
    return kExitPrerequisite;
  } catch (const semguard::TrainingError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const semguard::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}
