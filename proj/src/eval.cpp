/* Copyright 2026 The xddpm Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "xddpm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace xddpm {

double mask_auc(const Vector& score, const Eigen::VectorXi& truth) {
  require(score.size() == truth.size(), "mask_auc: size mismatch");
  double hits = 0.0;
  Eigen::Index pos = 0, neg = 0;
  for (Eigen::Index i = 0; i < truth.size(); ++i) (truth[i] != 0 ? pos : neg)++;
  require(pos > 0 && neg > 0, "mask_auc: truth must contain both classes");
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    if (truth[i] == 0) continue;
    for (Eigen::Index j = 0; j < truth.size(); ++j) {
      if (truth[j] != 0) continue;
      if (score[i] > score[j]) hits += 1.0;
      else if (score[i] == score[j]) hits += 0.5;
    }
  }
  return hits / static_cast<double>(pos * neg);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

Moments moments(std::span<const double> xs) {
  require(xs.size() >= 2, "moments: need at least two samples");
  const double n = static_cast<double>(xs.size());
  Moments m;
  for (double x : xs) m.mean += x;
  m.mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = x - m.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m.var = m2 / (n - 1.0);
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (m2 > 0.0) {
    m.skewness = m3 / std::pow(m2, 1.5);
    m.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return m;
}

double ks_statistic(std::span<const double> samples, bool standardize) {
  require(samples.size() >= 20, "ks_statistic: need at least 20 samples");
  std::vector<double> xs(samples.begin(), samples.end());
  if (standardize) {
    const Moments m = moments(samples);
    require(m.var > 0.0, "ks_statistic: zero variance cannot be standardized");
    const double sd = std::sqrt(m.var);
    for (double& x : xs) x = (x - m.mean) / sd;
  }
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = normal_cdf(xs[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_critical_value_01(Eigen::Index n) { return 1.63 / std::sqrt(static_cast<double>(n)); }

double pearson(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size() && a.size() >= 2, "pearson: size mismatch");
  const Moments ma = moments(a);
  const Moments mb = moments(b);
  double cov = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) cov += (a[i] - ma.mean) * (b[i] - mb.mean);
  cov /= static_cast<double>(a.size() - 1);
  const double denom = std::sqrt(ma.var * mb.var);
  return denom > 0.0 ? cov / denom : 0.0;
}

Vector mean_mask(const Model& model, const Matrix& x) {
  const MaskHead head = model.mask_net.eval(model.phi_mask, x);
  return clamp_unit(head.mu_raw).rowwise().mean();
}

namespace {
std::vector<double> row_of(const Matrix& m, Eigen::Index r) {
  std::vector<double> out(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) out[static_cast<std::size_t>(c)] = m(r, c);
  return out;
}
}  // namespace

EvalReport evaluate(const Model& model, const Schedule& sched, const SyntheticDataset& dataset,
                    Eigen::Index n_gen, RngStream stream, TrainMode mode) {
  const Eigen::Index dim = dataset.dim();
  require(model.denoiser.dim() == dim, "evaluate: checkpoint D does not match dataset D");
  require(n_gen >= 20, "evaluate: n_gen must be >= 20");
  const SyntheticDataset held = dataset.held_out();

  EvalReport rep;
  rep.n_gen = n_gen;
  rep.ks_critical = ks_critical_value_01(n_gen);
  const Vector mask = mean_mask(model, held.x);
  const bool two_class = dataset.relevant_count() > 0 && dataset.relevant_count() < dim;
  rep.mask_auc = two_class ? mask_auc(mask, dataset.truth_mask) : 1.0;

  const GeneratedBatch gen = generate(model.denoiser, model.theta, sched, n_gen, stream, mode);
  rep.predicted_irrelevant_var = zero_denoiser_variance(sched);

  std::vector<std::vector<double>> rows(static_cast<std::size_t>(dim));
  double irr_var_sum = 0.0;
  Eigen::Index irr_count = 0;
  for (Eigen::Index j = 0; j < dim; ++j) {
    rows[static_cast<std::size_t>(j)] = row_of(gen.w, j);
    const auto& r = rows[static_cast<std::size_t>(j)];
    CoordinateStats cs;
    cs.index = j;
    cs.relevant = dataset.truth_mask[j] != 0;
    cs.mask_mean = mask[j];
    cs.moments = moments(r);
    cs.ks_standardized = cs.moments.var > 0.0 ? ks_statistic(r, true) : 1.0;
    cs.positive_fraction =
        static_cast<double>(std::count_if(r.begin(), r.end(), [](double v) { return v > 0.0; })) /
        static_cast<double>(r.size());
    cs.data_var = moments(row_of(held.x, j)).var;
    if (!cs.relevant) {
      irr_var_sum += cs.moments.var;
      ++irr_count;
      rep.max_irrelevant_ks = std::max(rep.max_irrelevant_ks, cs.ks_standardized);
    }
    rep.coordinates.push_back(cs);
  }
  rep.empirical_irrelevant_var = irr_count > 0 ? irr_var_sum / static_cast<double>(irr_count) : 0.0;

  for (Eigen::Index i = 0; i < dim; ++i) {
    if (dataset.truth_mask[i] == 0) continue;
    for (Eigen::Index j = 0; j < dim; ++j) {
      if (dataset.truth_mask[j] != 0) continue;
      rep.max_abs_cross_corr =
          std::max(rep.max_abs_cross_corr, std::abs(pearson(rows[static_cast<std::size_t>(i)],
                                                            rows[static_cast<std::size_t>(j)])));
    }
  }
  return rep;
}

}  // namespace xddpm
