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

#ifndef XDDPM_TRAINER_HPP_
#define XDDPM_TRAINER_HPP_

#include <functional>
#include <optional>
#include <vector>

#include "xddpm/config.hpp"
#include "xddpm/objective.hpp"
#include "xddpm/synthdata.hpp"

namespace xddpm {

inline constexpr double kEmaDecay = 0.99;

/// Adam moments for one parameter vector, laid out like it.
struct AdamMoments {
  ParamVector m;
  ParamVector v;

  static AdamMoments zeros_like(const ParamVector& p) {
    return {ParamVector(p.layout()), ParamVector(p.layout())};
  }
};

struct OptimizerState {
  AdamMoments theta;
  AdamMoments phi_mask;
  AdamMoments phi_sig;
  std::int64_t step = 0;

  static OptimizerState for_model(const Model& m);
};

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam update; `step` is the 1-based update index.
void adam_update(ParamVector& params, AdamMoments& moments, const Vector& grad, std::int64_t step,
                 const AdamHyper& hyper);

struct TrainState {
  Model model;
  OptimizerState optimizer;
  std::int64_t step = 0;  // completed updates
};

/// A training state fresh from initialization.
TrainState initial_state(const TrainConfig& cfg);

/// Thrown when a loss becomes non-finite; carries the offending values.
class TrainingAborted : public NumericalError {
 public:
  TrainingAborted(std::int64_t step, const LossBreakdown& loss);
  std::int64_t step() const { return step_; }
  const LossBreakdown& loss() const { return loss_; }

 private:
  std::int64_t step_;
  LossBreakdown loss_;
};

/// Minibatch draws for update `step`: indices into the training split,
/// t uniform in {1..T}, eps and eta standard normal. Each sample uses its
/// own derived stream.
Batch draw_batch(const SyntheticDataset& train, Eigen::Index batch_size, int steps_T,
                 RngStream root, std::int64_t step);

struct StepResult {
  LossBreakdown loss;
  double relevant_denoise = 0.0;
  double relevant_unmasked = 0.0;
};

/// One Adam step on the batch-mean joint objective (theta only in
/// baseline mode).
StepResult train_step(TrainState& state, const Batch& batch, const TrainConfig& cfg,
                      const Schedule& sched, TrainMode mode,
                      const Eigen::VectorXi* truth_mask = nullptr);

struct TraceRow {
  LossBreakdown loss;
  double ema_denoise = 0.0;
  double relevant_denoise = 0.0;
  double ema_relevant = 0.0;
  double relevant_unmasked = 0.0;
  double ema_unmasked = 0.0;
  double wall_ms = 0.0;
};

/// Rows logged every `log_every` steps. The EMAs run over logged rows,
/// seeded with the first row, so they can be recomputed from the rows.
struct TrainTrace {
  std::vector<TraceRow> rows;
  bool has_truth = false;

  double ema_denoise() const { return rows.empty() ? 0.0 : rows.back().ema_denoise; }
  void append(const StepResult& r, std::int64_t step, double wall_ms);
};

/// Called after every logged row; may be empty.
using TraceObserver = std::function<void(const TraceRow&)>;

struct TrainResult {
  TrainState state;
  TrainTrace trace;
};

/// Runs cfg.total_steps updates from a fresh initialization.
TrainResult train_loop(const TrainConfig& cfg, const SyntheticDataset& dataset, TrainMode mode,
                       const TraceObserver& observer = {});

/// Continues `state` until it has completed `until_step` updates.
TrainResult resume_training(TrainState state, const TrainConfig& cfg,
                            const SyntheticDataset& dataset, TrainMode mode,
                            std::int64_t until_step, const TraceObserver& observer = {});

/// First logged step whose smoothed (relevant-coordinate, when truth was
/// available) denoising loss is <= threshold.
std::optional<std::int64_t> steps_to_threshold(const TrainTrace& trace, double threshold);

}  // namespace xddpm

#endif  // XDDPM_TRAINER_HPP_
