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

#ifndef XDDPM_EVAL_HPP_
#define XDDPM_EVAL_HPP_

#include <span>
#include <vector>

#include "xddpm/objective.hpp"
#include "xddpm/sampler.hpp"
#include "xddpm/synthdata.hpp"

namespace xddpm {

/// Probability that a random (relevant, irrelevant) pair is ordered
/// correctly by `score`; ties count one half.
double mask_auc(const Vector& score, const Eigen::VectorXi& truth);

/// Standard normal CDF.
double normal_cdf(double x);

/// Kolmogorov-Smirnov distance to N(0, 1), optionally after standardizing
/// by the sample mean and (n - 1) standard deviation.
double ks_statistic(std::span<const double> samples, bool standardize);

/// 1.63 / sqrt(n): the alpha = 0.01 asymptotic critical value.
double ks_critical_value_01(Eigen::Index n);

struct Moments {
  double mean = 0.0;
  double var = 0.0;  // (n - 1) normalized
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

Moments moments(std::span<const double> samples);

double pearson(std::span<const double> a, std::span<const double> b);

struct CoordinateStats {
  Eigen::Index index = 0;
  bool relevant = false;
  double mask_mean = 0.0;
  Moments moments;
  double ks_standardized = 0.0;
  double positive_fraction = 0.0;
  double data_var = 0.0;  // variance of the coordinate in the held-out data
};

struct EvalReport {
  double mask_auc = 0.5;
  std::vector<CoordinateStats> coordinates;
  double max_abs_cross_corr = 0.0;
  double predicted_irrelevant_var = 0.0;
  double empirical_irrelevant_var = 0.0;  // mean over irrelevant coordinates
  double max_irrelevant_ks = 0.0;
  double ks_critical = 0.0;
  Eigen::Index n_gen = 0;
};

/// Mean clamped mask over the columns of `x`.
Vector mean_mask(const Model& model, const Matrix& x);

/// Mask AUC on the held-out split, then n_gen generated samples of W with
/// per-coordinate statistics against the truth mask.
EvalReport evaluate(const Model& model, const Schedule& sched, const SyntheticDataset& dataset,
                    Eigen::Index n_gen, RngStream stream, TrainMode mode = TrainMode::kXddpm);

}  // namespace xddpm

#endif  // XDDPM_EVAL_HPP_
