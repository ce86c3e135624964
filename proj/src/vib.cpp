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

#include "xddpm/vib.hpp"

namespace xddpm {

Eigen::RowVectorXd kl_per_sample(const XsDistribution& dist) {
  // NaN passes through so callers can report it as a numerical abort.
  require(!(dist.var.array() <= 0).any(), "kl_per_sample: variance must be positive");
  return 0.5 * (dist.mean.array().square() + dist.var.array() - dist.var.array().log() - 1.0)
                   .matrix()
                   .colwise()
                   .sum();
}

VibForward vib_forward(const VibNets& nets, const Matrix& x, const Matrix& s, const Matrix& eta) {
  const Eigen::Index dim = nets.mask_net->dim();
  require(x.rows() == dim, "vib: x has wrong dimension");
  require(nets.sig_net->dim() == dim, "vib: signal decoder input does not match D");
  require(s.rows() == nets.sig_net->signal_dim() && s.cols() == x.cols(),
          "vib: s has wrong shape");
  require(eta.rows() == dim && eta.cols() == x.cols(), "vib: eta has wrong shape");

  VibForward f;
  f.x = x;
  f.s = s;
  f.eta = eta;
  f.head = nets.mask_net->eval(*nets.mask_params, x, &f.mask_cache);
  f.dist = mask_distribution(f.head.mu_raw, f.head.xi, x);
  f.x_s = reparam_sample(f.dist.xs, eta);
  f.s_hat = nets.sig_net->eval(*nets.sig_params, f.x_s, &f.sig_cache);
  f.kl = kl_per_sample(f.dist.xs);
  f.mse = (f.s_hat - s).colwise().squaredNorm();
  return f;
}

void vib_backward(const VibNets& nets, const VibForward& f, const Eigen::RowVectorXd& kl_weight,
                  const Eigen::RowVectorXd& mse_weight, const Matrix& d_mask, Vector& mask_grad,
                  Vector& sig_grad) {
  const Eigen::Index n = f.x.cols();
  require(kl_weight.size() == n && mse_weight.size() == n, "vib_backward: weight size mismatch");

  Matrix d_shat = 2.0 * (f.s_hat - f.s);
  d_shat.array().rowwise() *= mse_weight.array();
  const Matrix d_xs = nets.sig_net->mlp().backward(*nets.sig_params, f.sig_cache, d_shat, sig_grad);

  const auto& mean = f.dist.xs.mean.array();
  const auto& var = f.dist.xs.var.array();
  const Eigen::ArrayXXd std_dev = var.sqrt();

  Eigen::ArrayXXd d_mean = mean.rowwise() * kl_weight.array() + d_xs.array();
  Eigen::ArrayXXd d_var = (0.5 * (1.0 - var.inverse())).rowwise() * kl_weight.array() +
                          d_xs.array() * f.eta.array() / (2.0 * std_dev);

  Eigen::ArrayXXd d_mask_total = d_mean * f.x.array();
  if (d_mask.size() != 0) {
    require(d_mask.rows() == f.x.rows() && d_mask.cols() == n, "vib_backward: d_mask shape");
    d_mask_total += d_mask.array();
  }

  Matrix d_head(2 * f.x.rows(), n);
  const Eigen::Index dim = f.x.rows();
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      d_head(j, c) = d_mask_total(j, c) * clamp_unit_grad(f.head.mu_raw(j, c));
      const double z = f.head.xi(j, c) * f.x(j, c);
      // The variance floor is flat, so no gradient flows when it is active.
      const double dvar_dz = softplus(z) > kVarFloor ? sigmoid(z) : 0.0;
      d_head(dim + j, c) = d_var(j, c) * dvar_dz * f.x(j, c);
    }
  }
  nets.mask_net->mlp().backward(*nets.mask_params, f.mask_cache, d_head, mask_grad);
}

VibBreakdown vib_loss(const VibNets& nets, const Vector& x, const Vector& s, double beta_ib,
                      const Vector& eta) {
  require(beta_ib >= 0.0, "vib_loss: beta_ib must be >= 0");
  const VibForward f = vib_forward(nets, Matrix(x), Matrix(s), Matrix(eta));
  VibBreakdown out;
  out.kl = f.kl[0];
  out.signal_mse = f.mse[0];
  out.total = out.kl + 0.5 * beta_ib * out.signal_mse;
  out.mask = f.dist.mask.col(0);
  return out;
}

}  // namespace xddpm
