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

#ifndef XDDPM_SAMPLER_HPP_
#define XDDPM_SAMPLER_HPP_

#include <cstdint>
#include <optional>

#include "xddpm/config.hpp"
#include "xddpm/networks.hpp"
#include "xddpm/schedule.hpp"

namespace xddpm {

/// x_{t-1} = (x_t - (1 - alpha_t) / sqrt(1 - abar_t) * eps_hat) / sqrt(alpha_t)
///           + sigma_t * eta.
/// sigma_1 = 0, so eta has no effect on the final step.
template <typename DerivedX, typename DerivedE, typename DerivedN, typename Scalar>
typename DerivedX::PlainObject ancestral_step(const Eigen::MatrixBase<DerivedX>& x_t, int t,
                                              const Eigen::MatrixBase<DerivedE>& eps_hat,
                                              const BasicSchedule<Scalar>& sched,
                                              const Eigen::MatrixBase<DerivedN>& eta) {
  require(x_t.rows() == eps_hat.rows() && x_t.cols() == eps_hat.cols() &&
              x_t.rows() == eta.rows() && x_t.cols() == eta.cols(),
          "ancestral_step: shape mismatch");
  const Scalar a = sched.alpha(t);
  const Scalar coef = (Scalar(1) - a) / std::sqrt(Scalar(1) - sched.alpha_bar(t));
  typename DerivedX::PlainObject out = (x_t - coef * eps_hat) / std::sqrt(a);
  const Scalar sigma = sched.sigma(t);
  if (sigma != Scalar(0)) out += sigma * eta;
  return out;
}

/// Generated samples W; one column per sample (D x N).
struct GeneratedBatch {
  Matrix w;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  int steps_T = 0;
  TrainMode mode = TrainMode::kXddpm;
};

/// Ancestral sampling from x_T ~ N(0, I) down to W = x_0. Sample i draws
/// x_T and every eta from its own derived stream, so a sample does not
/// depend on how many others are generated alongside it.
GeneratedBatch generate(const DenoiserNet& net, const ParamVector& theta, const Schedule& sched,
                        Eigen::Index n, RngStream stream, TrainMode mode = TrainMode::kXddpm);

/// Variance of W on a coordinate whose predicted noise is identically zero:
/// v_T = 1, v_{t-1} = v_t / alpha_t + sigma_t^2.
double zero_denoiser_variance(const Schedule& sched);

/// Mean |eps_hat_j| over `probes` forward-process draws at uniform random t.
/// x_0 is drawn from the columns of `reference` when given, otherwise N(0, I).
Vector relevance_from_denoiser(const DenoiserNet& net, const ParamVector& theta,
                               const Schedule& sched, Eigen::Index probes, RngStream stream,
                               const Matrix* reference = nullptr);

}  // namespace xddpm

#endif  // XDDPM_SAMPLER_HPP_
