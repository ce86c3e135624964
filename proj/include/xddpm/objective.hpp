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

#ifndef XDDPM_OBJECTIVE_HPP_
#define XDDPM_OBJECTIVE_HPP_

#include <vector>

#include "xddpm/config.hpp"
#include "xddpm/grad_check.hpp"
#include "xddpm/networks.hpp"
#include "xddpm/schedule.hpp"
#include "xddpm/vib.hpp"

namespace xddpm {

/// The three networks and their parameters.
struct Model {
  DenoiserNet denoiser;
  ParamVector theta;
  MaskEncoderNet mask_net;
  ParamVector phi_mask;
  SignalDecoderNet sig_net;
  ParamVector phi_sig;

  VibNets vib_nets() const { return {&mask_net, &phi_mask, &sig_net, &phi_sig}; }
};

/// Architecture from `cfg`, all parameters zero.
Model make_model_shape(const TrainConfig& cfg);
/// Architecture from `cfg`, Glorot-initialized from `stream`.
Model make_model(const TrainConfig& cfg, RngStream stream);

/// ||eps - eps_theta(x_t, t)||^2 with x_t from the closed-form forward process.
double ddpm_loss(const DenoiserNet& net, const ParamVector& theta, const Vector& x0, int t,
                 const Vector& eps, const Schedule& sched);

/// ||eps * M - eps_theta(x_t, t)||^2. The denoiser still sees the fully
/// noised x_t; only the regression target is masked.
double masked_denoise_loss(const DenoiserNet& net, const ParamVector& theta, const Vector& mask,
                           const Vector& x0, int t, const Vector& eps, const Schedule& sched);

struct LossWeights {
  double lambda_vib = 1.0;
  double beta_ib = 10.0;
};

struct LossBreakdown {
  double denoise = 0.0;
  double kl = 0.0;
  double signal_mse = 0.0;
  double total = 0.0;
  std::int64_t step = 0;
};

/// denoise + lambda * (kl + beta/2 * signal_mse).
double combine(const LossWeights& w, double denoise, double kl, double signal_mse);

/// Single-sample joint objective. One mask-encoder pass supplies M to the
/// denoising term and (kl, mse) to the VIB term.
LossBreakdown joint_loss(const Model& model, const Vector& x0, const Vector& s, int t,
                         const Vector& eps, const Vector& eta, const LossWeights& w,
                         const Schedule& sched);

/// Fixed draws for one batch; columns are samples.
struct Batch {
  Matrix x0;
  Matrix s;
  std::vector<int> t;
  Matrix eps;
  Matrix eta;

  Eigen::Index size() const { return x0.cols(); }
};

struct BatchGradients {
  LossBreakdown loss;  // batch means
  /// Mean denoise loss restricted to ground-truth relevant coordinates
  /// (equals `loss.denoise` when no truth mask is given).
  double relevant_denoise = 0.0;
  /// Same restriction against the unmasked target eps.
  double relevant_unmasked = 0.0;
  Vector theta;
  Vector phi_mask;
  Vector phi_sig;
};

/// Batch-mean loss and exact gradients. In baseline mode only theta is
/// trained with the unmasked objective and the VIB terms are reported as 0.
BatchGradients loss_and_gradients(const Model& model, const Batch& batch, const LossWeights& w,
                                  const Schedule& sched, TrainMode mode,
                                  const Eigen::VectorXi* truth_mask = nullptr);

/// Gradient-check closures over the concatenation of the relevant
/// parameter vectors ("theta.", "phi_mask.", "phi_sig." prefixes).
LossClosure ddpm_loss_closure(const Model& model, const Batch& batch, const Schedule& sched);
LossClosure vib_loss_closure(const Model& model, const Batch& batch, double beta_ib);
LossClosure joint_loss_closure(const Model& model, const Batch& batch, const LossWeights& w,
                               const Schedule& sched);

}  // namespace xddpm

#endif  // XDDPM_OBJECTIVE_HPP_
