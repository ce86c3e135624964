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

#include "xddpm/trainer.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace xddpm {

namespace {
constexpr std::uint64_t kInitStream = 0x1417;
constexpr std::uint64_t kTrainStream = 0x7EA1;

std::string describe(std::int64_t step, const LossBreakdown& l) {
  std::ostringstream os;
  os.precision(17);
  os << "non-finite loss at step " << step << ": denoise=" << l.denoise << " kl=" << l.kl
     << " signal_mse=" << l.signal_mse << " total=" << l.total;
  return os.str();
}
}  // namespace

TrainingAborted::TrainingAborted(std::int64_t step, const LossBreakdown& loss)
    : NumericalError(describe(step, loss)), step_(step), loss_(loss) {}

OptimizerState OptimizerState::for_model(const Model& m) {
  return {AdamMoments::zeros_like(m.theta), AdamMoments::zeros_like(m.phi_mask),
          AdamMoments::zeros_like(m.phi_sig), 0};
}

void adam_update(ParamVector& params, AdamMoments& moments, const Vector& grad, std::int64_t step,
                 const AdamHyper& h) {
  require(grad.size() == params.size() && moments.m.size() == params.size(),
          "adam: size mismatch");
  require(step >= 1, "adam: step must be >= 1");
  auto m = moments.m.values().array();
  auto v = moments.v.values().array();
  m = h.beta1 * m + (1.0 - h.beta1) * grad.array();
  v = h.beta2 * v + (1.0 - h.beta2) * grad.array().square();
  const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(step));
  params.values().array() -= h.lr * (m / c1) / ((v / c2).sqrt() + h.epsilon);
}

TrainState initial_state(const TrainConfig& cfg) {
  TrainState s;
  s.model = make_model(cfg, RngStream(cfg.seed, kInitStream));
  s.optimizer = OptimizerState::for_model(s.model);
  return s;
}

Batch draw_batch(const SyntheticDataset& train, Eigen::Index batch_size, int steps_T,
                 RngStream root, std::int64_t step) {
  require(batch_size >= 1 && train.size() >= batch_size, "draw_batch: dataset smaller than batch");
  const auto ustep = static_cast<std::uint64_t>(step);
  RngStream pick = root.derive({ustep, 0});
  Batch b;
  const Eigen::Index dim = train.dim();
  b.x0.resize(dim, batch_size);
  b.s.resize(train.signal_dim(), batch_size);
  b.eps.resize(dim, batch_size);
  b.eta.resize(dim, batch_size);
  b.t.resize(static_cast<std::size_t>(batch_size));
  for (Eigen::Index i = 0; i < batch_size; ++i) {
    const auto idx = pick.uniform_int(0, train.size() - 1);
    b.x0.col(i) = train.x.col(idx);
    b.s.col(i) = train.s.col(idx);
    RngStream own = root.derive({ustep, static_cast<std::uint64_t>(i) + 1});
    b.t[static_cast<std::size_t>(i)] = static_cast<int>(own.uniform_int(1, steps_T));
    b.eps.col(i) = own.normal(dim);
    b.eta.col(i) = own.normal(dim);
  }
  return b;
}

StepResult train_step(TrainState& state, const Batch& batch, const TrainConfig& cfg,
                      const Schedule& sched, TrainMode mode, const Eigen::VectorXi* truth_mask) {
  const LossWeights w{cfg.lambda_vib, cfg.beta_ib};
  const BatchGradients g = loss_and_gradients(state.model, batch, w, sched, mode, truth_mask);
  const std::int64_t next = state.step + 1;
  LossBreakdown loss = g.loss;
  loss.step = next;
  if (!std::isfinite(loss.total) || !std::isfinite(loss.denoise) || !std::isfinite(loss.kl) ||
      !std::isfinite(loss.signal_mse) || !g.theta.allFinite() || !g.phi_mask.allFinite() ||
      !g.phi_sig.allFinite())
    throw TrainingAborted(next, loss);

  const AdamHyper hyper{cfg.lr};
  ++state.optimizer.step;
  adam_update(state.model.theta, state.optimizer.theta, g.theta, state.optimizer.step, hyper);
  if (mode == TrainMode::kXddpm) {
    adam_update(state.model.phi_mask, state.optimizer.phi_mask, g.phi_mask, state.optimizer.step,
                hyper);
    adam_update(state.model.phi_sig, state.optimizer.phi_sig, g.phi_sig, state.optimizer.step,
                hyper);
  }
  if (!state.model.theta.all_finite() || !state.model.phi_mask.all_finite() ||
      !state.model.phi_sig.all_finite())
    throw TrainingAborted(next, loss);
  state.step = next;
  return {loss, g.relevant_denoise, g.relevant_unmasked};
}

void TrainTrace::append(const StepResult& r, std::int64_t step, double wall_ms) {
  TraceRow row;
  row.loss = r.loss;
  row.loss.step = step;
  row.relevant_denoise = r.relevant_denoise;
  row.relevant_unmasked = r.relevant_unmasked;
  row.wall_ms = wall_ms;
  if (rows.empty()) {
    row.ema_denoise = r.loss.denoise;
    row.ema_relevant = r.relevant_denoise;
    row.ema_unmasked = r.relevant_unmasked;
  } else {
    row.ema_denoise = kEmaDecay * rows.back().ema_denoise + (1.0 - kEmaDecay) * r.loss.denoise;
    row.ema_relevant =
        kEmaDecay * rows.back().ema_relevant + (1.0 - kEmaDecay) * r.relevant_denoise;
    row.ema_unmasked =
        kEmaDecay * rows.back().ema_unmasked + (1.0 - kEmaDecay) * r.relevant_unmasked;
  }
  rows.push_back(row);
}

TrainResult resume_training(TrainState state, const TrainConfig& cfg,
                            const SyntheticDataset& dataset, TrainMode mode,
                            std::int64_t until_step, const TraceObserver& observer) {
  require(dataset.dim() == cfg.dim, "train: dataset D does not match config");
  require(dataset.signal_dim() == cfg.signal_dim, "train: dataset d does not match config");
  const SyntheticDataset train = dataset.train_split();
  require(train.size() >= cfg.batch_size, "train: training split smaller than batch_size");
  const Schedule sched = cfg.schedule();
  const RngStream root(cfg.seed, kTrainStream);
  const bool has_truth = dataset.relevant_count() < dataset.dim();
  const Eigen::VectorXi* truth = has_truth ? &dataset.truth_mask : nullptr;

  TrainResult out;
  out.trace.has_truth = has_truth;
  const auto start = std::chrono::steady_clock::now();
  while (state.step < until_step) {
    const Batch batch = draw_batch(train, cfg.batch_size, cfg.steps_T, root, state.step);
    const StepResult r = train_step(state, batch, cfg, sched, mode, truth);
    if (state.step % cfg.log_every == 0 || state.step == until_step) {
      double wall = 0.0;
      if (cfg.record_wall_ms)
        wall = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                   .count();
      out.trace.append(r, state.step, wall);
      if (observer) observer(out.trace.rows.back());
    }
  }
  out.state = std::move(state);
  return out;
}

TrainResult train_loop(const TrainConfig& cfg, const SyntheticDataset& dataset, TrainMode mode,
                       const TraceObserver& observer) {
  return resume_training(initial_state(cfg), cfg, dataset, mode, cfg.total_steps, observer);
}

std::optional<std::int64_t> steps_to_threshold(const TrainTrace& trace, double threshold) {
  for (const auto& row : trace.rows) {
    const double v = trace.has_truth ? row.ema_relevant : row.ema_denoise;
    if (v <= threshold) return row.loss.step;
  }
  return std::nullopt;
}

}  // namespace xddpm
