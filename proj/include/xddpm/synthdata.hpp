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

#ifndef XDDPM_SYNTHDATA_HPP_
#define XDDPM_SYNTHDATA_HPP_

#include <cstdint>
#include <map>
#include <string>

#include "xddpm/config.hpp"
#include "xddpm/tensor.hpp"

namespace xddpm {

/// Paired samples (x, s) with a known set of signal-relevant coordinates.
/// Columns are samples: x is D x N, s is d x N.
struct SyntheticDataset {
  Matrix x;
  Matrix s;
  Eigen::VectorXi truth_mask;  // 1 on relevant coordinates
  std::string generator;
  std::map<std::string, double> params;
  std::uint64_t seed = 0;

  Eigen::Index size() const { return x.cols(); }
  Eigen::Index dim() const { return x.rows(); }
  Eigen::Index signal_dim() const { return s.rows(); }
  Eigen::Index relevant_count() const { return truth_mask.sum(); }

  /// First 80% of columns.
  Eigen::Index train_size() const;
  /// Last 20%, reserved for evaluation.
  SyntheticDataset held_out() const;
  SyntheticDataset train_split() const;
};

/// Per-coordinate mixture 0.5 N(-1.5, 0.5^2) + 0.5 N(1.5, 0.5^2) on k
/// seeded relevant coordinates, N(0, 1) elsewhere; s = A z + noise with
/// A a d x k sign matrix scaled to unit-norm rows.
SyntheticDataset gen_linear_dataset(std::uint64_t seed, Eigen::Index n, Eigen::Index dim,
                                    Eigen::Index relevant, Eigen::Index signal_dim,
                                    double signal_noise);

/// As gen_linear_dataset but s_j = sum_i B_ji z_i^2 - c_j, centered.
SyntheticDataset gen_nonlinear_dataset(std::uint64_t seed, Eigen::Index n, Eigen::Index dim,
                                       Eigen::Index relevant, Eigen::Index signal_dim,
                                       double signal_noise);

/// One-dimensional 0.5 N(-2, 0.5^2) + 0.5 N(2, 0.5^2); s is a zero dummy.
SyntheticDataset gen_gmm_dataset(std::uint64_t seed, Eigen::Index n);

/// Dataset described by a training config.
SyntheticDataset make_dataset(const TrainConfig& cfg);

inline constexpr double kMixtureMean = 1.5;
inline constexpr double kMixtureStd = 0.5;

}  // namespace xddpm

#endif  // XDDPM_SYNTHDATA_HPP_
