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

#ifndef XDDPM_VIB_HPP_
#define XDDPM_VIB_HPP_

#include <cmath>

#include "xddpm/networks.hpp"
#include "xddpm/tensor.hpp"

namespace xddpm {

/// Lower bound on the bottleneck variance.
inline constexpr double kVarFloor = 1e-6;

/// Diagonal Gaussian over X_S = X * M. Columns are samples.
struct XsDistribution {
  Matrix mean;
  Matrix var;
};

struct MaskDistribution {
  Matrix mask;  // clamp(mu_raw, 0, 1), entries in [0, 1]
  XsDistribution xs;
};

/// M = clamp(mu_raw, 0, 1); mean = M * x; var = max(softplus(xi * x), floor).
template <typename DerivedM, typename DerivedXi, typename DerivedX>
MaskDistribution mask_distribution(const Eigen::MatrixBase<DerivedM>& mu_raw,
                                   const Eigen::MatrixBase<DerivedXi>& xi,
                                   const Eigen::MatrixBase<DerivedX>& x) {
  require(mu_raw.rows() == x.rows() && mu_raw.cols() == x.cols() && xi.rows() == x.rows() &&
              xi.cols() == x.cols(),
          "mask_distribution: shape mismatch");
  MaskDistribution out;
  out.mask = clamp_unit(mu_raw);
  out.xs.mean = out.mask.cwiseProduct(x);
  out.xs.var = xi.cwiseProduct(x).unaryExpr([](double z) {
    return std::max(softplus(z), kVarFloor);
  });
  return out;
}

/// x_s = mean + sqrt(var) * eta.
template <typename DerivedE>
Matrix reparam_sample(const XsDistribution& dist, const Eigen::MatrixBase<DerivedE>& eta) {
  require(eta.rows() == dist.mean.rows() && eta.cols() == dist.mean.cols(),
          "reparam_sample: shape mismatch");
  return dist.mean + dist.var.cwiseSqrt().cwiseProduct(eta);
}

/// KL(N(mean, var) || N(0, I)) = 1/2 sum_j (mean^2 + var - log var - 1).
template <typename DerivedMu, typename DerivedVar>
typename DerivedMu::Scalar kl_to_standard_normal(const Eigen::MatrixBase<DerivedMu>& mean,
                                                 const Eigen::MatrixBase<DerivedVar>& var) {
  require(mean.size() == var.size(), "kl_to_standard_normal: shape mismatch");
  require((var.array() > 0).all(), "kl_to_standard_normal: variance must be positive");
  return 0.5 * (mean.array().square() + var.array() - var.array().log() - 1.0).sum();
}

/// Per-column KL for a batch.
Eigen::RowVectorXd kl_per_sample(const XsDistribution& dist);

struct VibBreakdown {
  double kl = 0.0;
  double signal_mse = 0.0;
  double total = 0.0;
  Vector mask;
};

/// Forward state of the VIB branch for a batch, kept for the backward pass.
struct VibForward {
  Matrix x, s, eta;
  MaskHead head;
  MaskDistribution dist;
  Matrix x_s;
  Matrix s_hat;
  Eigen::RowVectorXd kl;   // per sample
  Eigen::RowVectorXd mse;  // per sample, ||s_hat - s||^2
  Mlp::Cache mask_cache;
  Mlp::Cache sig_cache;
};

struct VibNets {
  const MaskEncoderNet* mask_net;
  const ParamVector* mask_params;
  const SignalDecoderNet* sig_net;
  const ParamVector* sig_params;
};

VibForward vib_forward(const VibNets& nets, const Matrix& x, const Matrix& s, const Matrix& eta);

/// Back-propagates sum_n (kl_weight_n * kl_n + mse_weight_n * mse_n)
/// + <d_mask, mask> into the two gradient buffers. `d_mask` may be empty.
void vib_backward(const VibNets& nets, const VibForward& fwd, const Eigen::RowVectorXd& kl_weight,
                  const Eigen::RowVectorXd& mse_weight, const Matrix& d_mask, Vector& mask_grad,
                  Vector& sig_grad);

/// Single-sample VIB loss: kl + (beta_ib / 2) * ||mu_S(x_s) - s||^2.
VibBreakdown vib_loss(const VibNets& nets, const Vector& x, const Vector& s, double beta_ib,
                      const Vector& eta);

}  // namespace xddpm

#endif  // XDDPM_VIB_HPP_
