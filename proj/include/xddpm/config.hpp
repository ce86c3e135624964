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

#ifndef XDDPM_CONFIG_HPP_
#define XDDPM_CONFIG_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xddpm/schedule.hpp"

namespace xddpm {

enum class TrainMode { kXddpm, kDdpmBaseline };

TrainMode parse_train_mode(const std::string& name);
std::string to_string(TrainMode mode);

/// Which synthetic generator backs a run.
struct DatasetSpec {
  std::string kind = "linear";  // linear | nonlinear | gmm
  Eigen::Index n = 8000;
  Eigen::Index relevant = 4;    // k
  double signal_noise = 0.1;
  std::uint64_t seed = 7;
};

struct TrainConfig {
  double lambda_vib = 1.0;
  double beta_ib = 10.0;
  double lr = 1e-3;
  Eigen::Index batch_size = 64;
  std::int64_t total_steps = 10000;
  std::uint64_t seed = 1;
  Eigen::Index dim = 16;        // D
  Eigen::Index signal_dim = 2;  // d

  ScheduleKind schedule_kind = ScheduleKind::kLinear;
  int steps_T = 200;
  // Unset means scaled from T (see default_schedule).
  std::optional<double> beta_start;
  std::optional<double> beta_end;

  std::vector<Eigen::Index> denoiser_hidden{64, 64};
  std::vector<Eigen::Index> mask_hidden{64, 64};
  std::vector<Eigen::Index> decoder_hidden{64, 64};
  Eigen::Index time_width = 16;

  double loss_threshold = 1.5;
  std::int64_t log_every = 1;
  bool record_wall_ms = false;

  DatasetSpec dataset;

  Schedule schedule() const;
  /// Throws Error naming the first offending key.
  void validate() const;
};

}  // namespace xddpm

#endif  // XDDPM_CONFIG_HPP_
