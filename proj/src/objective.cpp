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

#include "xddpm/objective.hpp"

#include <optional>

namespace xddpm {

Model make_model_shape(const TrainConfig& cfg) {
  Model m;
  m.denoiser = DenoiserNet(cfg.dim, cfg.time_width, cfg.denoiser_hidden);
  m.mask_net = MaskEncoderNet(cfg.dim, cfg.mask_hidden);
  m.sig_net = SignalDecoderNet(cfg.dim, cfg.signal_dim, cfg.decoder_hidden);
  m.theta = ParamVector(m.denoiser.layout());
  m.phi_mask = ParamVector(m.mask_net.layout());
  m.phi_sig = ParamVector(m.sig_net.layout());
  return m;
}

Model make_model(const TrainConfig& cfg, RngStream stream) {
  Model m = make_model_shape(cfg);
  m.theta = init_params(stream.derive({1}), m.denoiser.layout());
  m.phi_mask = init_params(stream.derive({2}), m.mask_net.layout());
  m.phi_sig = init_params(stream.derive({3}), m.sig_net.layout());
  return m;
}

namespace {

Vector noised(const Vector& x0, int t, const Vector& eps, const Schedule& sched) {
  require(x0.size() == eps.size(), "denoise loss: x0 and eps differ in size");
  return forward_closed(x0, t, eps, sched);
}

}  // namespace

double ddpm_loss(const DenoiserNet& net, const ParamVector& theta, const Vector& x0, int t,
                 const Vector& eps, const Schedule& sched) {
  const Vector x_t = noised(x0, t, eps, sched);
  return (eps - net.eval(theta, x_t, t)).squaredNorm();
}

double masked_denoise_loss(const DenoiserNet& net, const ParamVector& theta, const Vector& mask,
                           const Vector& x0, int t, const Vector& eps, const Schedule& sched) {
  require(mask.size() == eps.size(), "masked_denoise_loss: mask and eps differ in size");
  const Vector x_t = noised(x0, t, eps, sched);
  return (eps.cwiseProduct(mask) - net.eval(theta, x_t, t)).squaredNorm();
}

double combine(const LossWeights& w, double denoise, double kl, double signal_mse) {
  return denoise + w.lambda_vib * (kl + 0.5 * w.beta_ib * signal_mse);
}

LossBreakdown joint_loss(const Model& model, const Vector& x0, const Vector& s, int t,
                         const Vector& eps, const Vector& eta, const LossWeights& w,
                         const Schedule& sched) {
  const VibBreakdown vib = vib_loss(model.vib_nets(), x0, s, w.beta_ib, eta);
  LossBreakdown out;
  out.denoise = masked_denoise_loss(model.denoiser, model.theta, vib.mask, x0, t, eps, sched);
  out.kl = vib.kl;
  out.signal_mse = vib.signal_mse;
  out.total = combine(w, out.denoise, out.kl, out.signal_mse);
  return out;
}

BatchGradients loss_and_gradients(const Model& model, const Batch& batch, const LossWeights& w,
                                  const Schedule& sched, TrainMode mode,
                                  const Eigen::VectorXi* truth_mask) {
  const Eigen::Index n = batch.size();
  const Eigen::Index dim = model.denoiser.dim();
  require(n >= 1, "loss: empty batch");
  require(batch.x0.rows() == dim && batch.eps.rows() == dim && batch.eps.cols() == n,
          "loss: x0/eps shape mismatch");
  require(static_cast<Eigen::Index>(batch.t.size()) == n, "loss: one step per sample required");
  const double inv_n = 1.0 / static_cast<double>(n);

  Matrix x_t(dim, n);
  for (Eigen::Index c = 0; c < n; ++c)
    x_t.col(c) = forward_closed(batch.x0.col(c), batch.t[static_cast<std::size_t>(c)],
                                batch.eps.col(c), sched);

  Mlp::Cache den_cache;
  const Matrix eps_hat = model.denoiser.eval(model.theta, x_t, batch.t, &den_cache);

  BatchGradients g;
  g.theta = Vector::Zero(model.theta.size());
  g.phi_mask = Vector::Zero(model.phi_mask.size());
  g.phi_sig = Vector::Zero(model.phi_sig.size());

  std::optional<VibForward> vib;
  Matrix residual;
  if (mode == TrainMode::kXddpm) {
    require(batch.s.cols() == n && batch.eta.rows() == dim && batch.eta.cols() == n,
            "loss: s/eta shape mismatch");
    vib = vib_forward(model.vib_nets(), batch.x0, batch.s, batch.eta);
    residual = batch.eps.cwiseProduct(vib->dist.mask) - eps_hat;
  } else {
    residual = batch.eps - eps_hat;
  }

  const Eigen::RowVectorXd per_sample = residual.colwise().squaredNorm();
  g.loss.denoise = per_sample.sum() * inv_n;
  if (truth_mask) {
    require(truth_mask->size() == dim, "loss: truth mask has wrong size");
    double acc = 0.0, acc_full = 0.0;
    for (Eigen::Index j = 0; j < dim; ++j) {
      if ((*truth_mask)[j] == 0) continue;
      acc += residual.row(j).squaredNorm();
      acc_full += (batch.eps.row(j) - eps_hat.row(j)).squaredNorm();
    }
    g.relevant_denoise = acc * inv_n;
    g.relevant_unmasked = acc_full * inv_n;
  } else {
    g.relevant_denoise = g.loss.denoise;
    g.relevant_unmasked = (batch.eps - eps_hat).colwise().squaredNorm().sum() * inv_n;
  }

  model.denoiser.mlp().backward(model.theta, den_cache, (-2.0 * inv_n) * residual, g.theta);

  if (vib) {
    g.loss.kl = vib->kl.sum() * inv_n;
    g.loss.signal_mse = vib->mse.sum() * inv_n;
    const Matrix d_mask = (2.0 * inv_n) * residual.cwiseProduct(batch.eps);
    const Eigen::RowVectorXd kl_w = Eigen::RowVectorXd::Constant(n, w.lambda_vib * inv_n);
    const Eigen::RowVectorXd mse_w =
        Eigen::RowVectorXd::Constant(n, 0.5 * w.lambda_vib * w.beta_ib * inv_n);
    vib_backward(model.vib_nets(), *vib, kl_w, mse_w, d_mask, g.phi_mask, g.phi_sig);
  }
  g.loss.total = combine(w, g.loss.denoise, g.loss.kl, g.loss.signal_mse);
  return g;
}

namespace {

Batch column(const Batch& b, Eigen::Index c) {
  Batch one;
  one.x0 = b.x0.col(c);
  one.s = b.s.col(c);
  one.t = {b.t[static_cast<std::size_t>(c)]};
  one.eps = b.eps.col(c);
  one.eta = b.eta.col(c);
  return one;
}

}  // namespace

LossClosure ddpm_loss_closure(const Model& model, const Batch& batch, const Schedule& sched) {
  LossClosure c;
  c.name = "ddpm_loss";
  c.value = [model, batch, sched](const ParamVector& p) {
    ParamVector theta(model.theta.layout(), p.values());
    double acc = 0.0;
    for (Eigen::Index i = 0; i < batch.size(); ++i)
      acc += ddpm_loss(model.denoiser, theta, batch.x0.col(i), batch.t[static_cast<std::size_t>(i)],
                       batch.eps.col(i), sched);
    return acc / static_cast<double>(batch.size());
  };
  c.gradient = [model, batch, sched](const ParamVector& p) {
    Model m = model;
    m.theta = ParamVector(model.theta.layout(), p.values());
    return loss_and_gradients(m, batch, {}, sched, TrainMode::kDdpmBaseline).theta;
  };
  return c;
}

LossClosure vib_loss_closure(const Model& model, const Batch& batch, double beta_ib) {
  const std::vector<Eigen::Index> sizes{model.phi_mask.size(), model.phi_sig.size()};
  LossClosure c;
  c.name = "vib_loss";
  auto split = [model, sizes](const ParamVector& p) {
    Model m = model;
    m.phi_mask = ParamVector(model.phi_mask.layout(), slice_part(p.values(), sizes, 0));
    m.phi_sig = ParamVector(model.phi_sig.layout(), slice_part(p.values(), sizes, 1));
    return m;
  };
  c.value = [split, batch, beta_ib](const ParamVector& p) {
    const Model m = split(p);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < batch.size(); ++i)
      acc += vib_loss(m.vib_nets(), batch.x0.col(i), batch.s.col(i), beta_ib, batch.eta.col(i)).total;
    return acc / static_cast<double>(batch.size());
  };
  c.gradient = [split, batch, beta_ib, sizes](const ParamVector& p) {
    const Model m = split(p);
    const Eigen::Index n = batch.size();
    const VibForward f = vib_forward(m.vib_nets(), batch.x0, batch.s, batch.eta);
    Vector gm = Vector::Zero(sizes[0]);
    Vector gs = Vector::Zero(sizes[1]);
    vib_backward(m.vib_nets(), f, Eigen::RowVectorXd::Constant(n, 1.0 / n),
                 Eigen::RowVectorXd::Constant(n, 0.5 * beta_ib / n), Matrix(), gm, gs);
    Vector out(sizes[0] + sizes[1]);
    out << gm, gs;
    return out;
  };
  return c;
}

LossClosure joint_loss_closure(const Model& model, const Batch& batch, const LossWeights& w,
                               const Schedule& sched) {
  const std::vector<Eigen::Index> sizes{model.theta.size(), model.phi_mask.size(),
                                        model.phi_sig.size()};
  auto split = [model, sizes](const ParamVector& p) {
    Model m = model;
    m.theta = ParamVector(model.theta.layout(), slice_part(p.values(), sizes, 0));
    m.phi_mask = ParamVector(model.phi_mask.layout(), slice_part(p.values(), sizes, 1));
    m.phi_sig = ParamVector(model.phi_sig.layout(), slice_part(p.values(), sizes, 2));
    return m;
  };
  LossClosure c;
  c.name = "joint_loss";
  c.value = [split, batch, w, sched](const ParamVector& p) {
    const Model m = split(p);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < batch.size(); ++i) {
      const Batch one = column(batch, i);
      acc += joint_loss(m, one.x0.col(0), one.s.col(0), one.t[0], one.eps.col(0), one.eta.col(0), w,
                        sched)
                 .total;
    }
    return acc / static_cast<double>(batch.size());
  };
  c.gradient = [split, batch, w, sched, sizes](const ParamVector& p) {
    const Model m = split(p);
    const BatchGradients g = loss_and_gradients(m, batch, w, sched, TrainMode::kXddpm);
    Vector out(sizes[0] + sizes[1] + sizes[2]);
    out << g.theta, g.phi_mask, g.phi_sig;
    return out;
  };
  return c;
}

}  // namespace xddpm
