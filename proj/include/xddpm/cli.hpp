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

#ifndef XDDPM_CLI_HPP_
#define XDDPM_CLI_HPP_

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "xddpm/io.hpp"

namespace xddpm {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

inline constexpr double kGradTolerance = 1e-5;
inline constexpr double kGradStep = 1e-5;
inline constexpr double kReferenceSpeedRatio = 0.5;

/// Where a command reports progress and errors, plus the command line
/// recorded in its manifest.
struct RunContext {
  std::string command_line;
  std::ostream* out = &std::cout;
  std::ostream* err = &std::cerr;
};

/// Config used by gradcheck when no file is given: D=4, d=1, k=2,
/// every hidden stack [8], batch of 8.
TrainConfig tiny_gradcheck_config();

/// Trains from `config_path` (defaults when empty). Writes checkpoint.json,
/// trace.csv and manifest.json; on a numerical abort writes the partial
/// trace and abort.json and returns kExitNumerical.
int run_train(const fs::path& config_path, TrainMode mode, const fs::path& out_dir,
              std::optional<std::uint64_t> seed, const RunContext& ctx);

/// Writes samples.csv (n rows, D columns), samples.json and manifest.json.
/// The seed defaults to the checkpoint's training seed.
int run_sample(const fs::path& checkpoint, Eigen::Index n, std::optional<std::uint64_t> seed,
               const fs::path& out_dir, const RunContext& ctx);

/// Regenerates the dataset (from `config_path` when given, otherwise from
/// the checkpoint's config) and writes report.json, per_coordinate.csv and
/// manifest.json.
int run_eval(const fs::path& checkpoint, const fs::path& config_path, Eigen::Index n_gen,
             std::optional<std::uint64_t> seed, const fs::path& out_dir, const RunContext& ctx);

/// Checks ddpm_loss, vib_loss and joint_loss at h = 1e-5. Returns kExitOk
/// iff every max relative error is below 1e-5. `corrupt_gradient` scales
/// every analytic gradient by 1.001 (negative control). Writes
/// gradcheck.json when `out_dir` is non-empty.
int run_gradcheck(const fs::path& config_path, const fs::path& out_dir, bool corrupt_gradient,
                  const RunContext& ctx);

/// Trains both modes on identical data and seeds under out_dir/xddpm and
/// out_dir/ddpm-baseline, then writes speed.json.
int run_compare_speed(const fs::path& config_path, const fs::path& out_dir, const RunContext& ctx);

}  // namespace xddpm

#endif  // XDDPM_CLI_HPP_
