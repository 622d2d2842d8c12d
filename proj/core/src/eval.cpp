// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "semguard/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "semguard/errors.hpp"

namespace semguard {

namespace {

void split_scores(std::span<const ScoredSample> samples, std::vector<double>& ind,
                  std::vector<double>& ood) {
  for (const ScoredSample& s : samples) {
    if (!std::isfinite(s.score)) throw ArgumentError("scores must be finite");
    (s.truth == Distribution::kInD ? ind : ood).push_back(s.score);
  }
  if (ind.empty() || ood.empty()) throw ArgumentError("evaluation needs InD and OOD samples");
}

}  // namespace

double auroc(std::span<const ScoredSample> samples) {
  std::vector<double> ind, ood;
  split_scores(samples, ind, ood);
  std::sort(ind.begin(), ind.end());
  // Twice the Mann-Whitney count keeps the sum exact in integers.
  long long twice = 0;
  for (double o : ood) {
    const auto lo = std::lower_bound(ind.begin(), ind.end(), o) - ind.begin();
    const auto hi = std::upper_bound(ind.begin(), ind.end(), o) - ind.begin();
    twice += 2 * lo + (hi - lo);
  }
  return static_cast<double>(twice) /
         (2.0 * static_cast<double>(ind.size()) * static_cast<double>(ood.size()));
}

FprResult fpr_at_tpr(std::span<const ScoredSample> samples, double tpr_target) {
  if (!(tpr_target > 0.0 && tpr_target <= 1.0)) throw ArgumentError("tpr_target must be in (0, 1]");
  std::vector<double> ind, ood;
  split_scores(samples, ind, ood);
  std::sort(ind.begin(), ind.end());
  const double n = static_cast<double>(ind.size());
  // Guard against 0.95 * 100 = 95.00000000000001.
  auto k = static_cast<std::size_t>(std::ceil(tpr_target * n - 1e-9));
  k = std::clamp<std::size_t>(k, 1, ind.size());
  FprResult r;
  r.threshold = ind[k - 1];
  r.coarse = ind.size() < 20;
  const auto accepted =
      std::count_if(ood.begin(), ood.end(), [&](double s) { return s <= r.threshold; });
  r.fpr = static_cast<double>(accepted) / static_cast<double>(ood.size());
  return r;
}

EvalReport evaluate(std::span<const ScoredSample> samples) {
  EvalReport r;
  r.auroc = auroc(samples);
  const FprResult f = fpr_at_tpr(samples);
  r.fpr_at_95_tpr = f.fpr;
  r.threshold = f.threshold;
  for (const ScoredSample& s : samples) (s.truth == Distribution::kInD ? r.n_ind : r.n_ood)++;
  return r;
}

std::string report_csv(const EvalReport& report) {
  std::ostringstream out;
  out.precision(10);
  out << "auroc,fpr_at_95_tpr,threshold,n_ind,n_ood\n"
      << report.auroc << ',' << report.fpr_at_95_tpr << ',' << report.threshold << ','
      << report.n_ind << ',' << report.n_ood << '\n';
  return out.str();
}

std::string report_text(const EvalReport& report) {
  std::ostringstream out;
  out.precision(6);
  out << "# scores: higher = more OOD; FPR@95 accepts InD at score <= threshold\n"
      << "AUROC     " << report.auroc << '\n'
      << "FPR@95    " << report.fpr_at_95_tpr << '\n'
      << "threshold " << report.threshold << '\n'
      << "n_ind     " << report.n_ind << '\n'
      << "n_ood     " << report.n_ood << '\n';
  return out.str();
}

std::vector<SweepRow> sweep(const std::string& param, const std::vector<std::string>& values,
                            const SweepRunner& runner) {
  std::vector<SweepRow> rows;
  for (const std::string& v : values) {
    const std::vector<ScoredSample> samples = runner(v);
    rows.push_back({param, v, evaluate(samples)});
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out.precision(10);
  out << "param,value,auroc,fpr_at_95_tpr,threshold,n_ind,n_ood\n";
  for (const SweepRow& r : rows) {
    out << r.param << ',' << r.value << ',' << r.report.auroc << ',' << r.report.fpr_at_95_tpr
        << ',' << r.report.threshold << ',' << r.report.n_ind << ',' << r.report.n_ood << '\n';
  }
  return out.str();
}

}  // namespace semguard
