// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SEMGUARD_EVAL_HPP_
#define SEMGUARD_EVAL_HPP_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "semguard/data_synth.hpp"

namespace semguard {

/// Higher score = more OOD.
struct ScoredSample {
  double score = 0.0;
  Distribution truth = Distribution::kInD;
};

/// P(score_OOD > score_InD) + 0.5 P(tie) over all cross pairs.
double auroc(std::span<const ScoredSample> samples);

struct FprResult {
  double fpr = 0.0;
  /// InD is accepted when score <= threshold.
  double threshold = 0.0;
  /// Fewer than 20 InD samples: the 95% quantile is coarse.
  bool coarse = false;
};

/// threshold = the ceil(tpr_target * n_ind)-th smallest InD score;
/// fpr = fraction of OOD scores <= threshold.
FprResult fpr_at_tpr(std::span<const ScoredSample> samples, double tpr_target = 0.95);

struct EvalReport {
  double auroc = 0.0;
  double fpr_at_95_tpr = 0.0;
  double threshold = 0.0;
  int n_ind = 0;
  int n_ood = 0;
  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

EvalReport evaluate(std::span<const ScoredSample> samples);
std::string report_csv(const EvalReport& report);
std::string report_text(const EvalReport& report);

struct SweepRow {
  std::string param;
  std::string value;
  EvalReport report;
};

using SweepRunner = std::function<std::vector<ScoredSample>(const std::string& value)>;

std::vector<SweepRow> sweep(const std::string& param, const std::vector<std::string>& values,
                            const SweepRunner& runner);
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace semguard

#endif  // SEMGUARD_EVAL_HPP_
