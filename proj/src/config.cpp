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

#include "xddpm/config.hpp"

namespace xddpm {

TrainMode parse_train_mode(const std::string& name) {
  if (name == "xddpm") return TrainMode::kXddpm;
  if (name == "ddpm-baseline" || name == "ddpm") return TrainMode::kDdpmBaseline;
  throw Error("unknown mode '" + name + "' (expected xddpm or ddpm-baseline)");
}

std::string to_string(TrainMode mode) {
  return mode == TrainMode::kXddpm ? "xddpm" : "ddpm-baseline";
}

Schedule TrainConfig::schedule() const {
  const double scale = 1000.0 / steps_T;
  return Schedule::build(schedule_kind, steps_T, beta_start.value_or(1e-4 * scale),
                         beta_end.value_or(0.02 * scale));
}

void TrainConfig::validate() const {
  auto check = [](bool ok, const char* key, const std::string& why) {
    if (!ok) throw Error(std::string("config key '") + key + "': " + why);
  };
  check(lambda_vib >= 0.0, "lambda_vib", "must be >= 0");
  check(beta_ib >= 0.0, "beta_ib", "must be >= 0");
  check(lr >= 0.0, "lr", "must be >= 0");
  check(batch_size >= 1, "batch_size", "must be >= 1");
  check(total_steps >= 0, "total_steps", "must be >= 0");
  check(dim >= 1, "D", "must be >= 1");
  check(signal_dim >= 1 && signal_dim <= dim, "d", "must satisfy 1 <= d <= D");
  check(steps_T >= 1, "T", "must be >= 1");
  check(time_width >= 2 && time_width % 2 == 0, "time_width", "must be even and >= 2");
  check(log_every >= 1, "log_every", "must be >= 1");
  for (auto h : denoiser_hidden) check(h >= 1, "denoiser_hidden", "widths must be >= 1");
  for (auto h : mask_hidden) check(h >= 1, "mask_hidden", "widths must be >= 1");
  for (auto h : decoder_hidden) check(h >= 1, "decoder_hidden", "widths must be >= 1");
  check(dataset.kind == "linear" || dataset.kind == "nonlinear" || dataset.kind == "gmm",
        "dataset", "must be linear, nonlinear or gmm");
  check(dataset.n >= batch_size, "N", "dataset size must be >= batch_size");
  if (dataset.kind == "gmm") {
    check(dim == 1 && signal_dim == 1, "D", "gmm dataset requires D = d = 1");
  } else {
    check(dataset.relevant >= 1 && dataset.relevant < dim, "k", "must satisfy 1 <= k < D");
    check(signal_dim <= dataset.relevant, "d", "must satisfy d <= k");
  }
  check(dataset.signal_noise >= 0.0, "signal_noise", "must be >= 0");
  try {
    (void)schedule();
  } catch (const Error& e) {
    throw Error(std::string("config key 'beta_start'/'beta_end': ") + e.what());
  }
}

}  // namespace xddpm
