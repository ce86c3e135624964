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

#ifndef XDDPM_SCHEDULE_HPP_
#define XDDPM_SCHEDULE_HPP_

#include <Eigen/Core>

#include <cmath>
#include <string>

#include "xddpm/tensor.hpp"

namespace xddpm {

enum class ScheduleKind { kLinear, kConstant };

ScheduleKind parse_schedule_kind(const std::string& name);
std::string to_string(ScheduleKind kind);

/// Noise schedule tables for steps t = 1..T, stored 0-based (entry t-1).
///
/// sigma_t^2 is the forward-posterior variance
/// beta_t (1 - abar_{t-1}) / (1 - abar_t) with abar_0 = 1, and sigma_1 is
/// forced to 0 so the last reverse step is deterministic.
template <typename Scalar>
class BasicSchedule {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  BasicSchedule() = default;

  static BasicSchedule build(ScheduleKind kind, int steps, Scalar beta_start, Scalar beta_end) {
    require(steps >= 1, "schedule: T must be >= 1");
    require(beta_start > Scalar(0) && beta_start <= beta_end && beta_end < Scalar(1),
            "schedule: require 0 < beta_start <= beta_end < 1");
    Array betas(steps);
    for (int i = 0; i < steps; ++i) {
      if (kind == ScheduleKind::kConstant || steps == 1) {
        betas[i] = beta_start;
      } else {
        const Scalar frac = Scalar(i) / Scalar(steps - 1);
        betas[i] = beta_start * (Scalar(1) - frac) + beta_end * frac;
      }
    }
    BasicSchedule s = from_betas(betas);
    s.kind_ = kind;
    return s;
  }

  /// Arbitrary per-step betas in (0, 1), t = 1..T in order.
  static BasicSchedule from_betas(const Array& betas) {
    require(betas.size() >= 1, "schedule: T must be >= 1");
    require((betas > Scalar(0)).all() && (betas < Scalar(1)).all(),
            "schedule: every beta must lie in (0, 1)");
    const Eigen::Index steps = betas.size();
    BasicSchedule s;
    s.betas_ = betas;
    s.alphas_ = Scalar(1) - s.betas_;
    s.alpha_bars_.resize(steps);
    s.sigmas_.resize(steps);
    Scalar running = Scalar(1);
    for (Eigen::Index i = 0; i < steps; ++i) {
      const Scalar prev = running;
      running *= s.alphas_[i];
      s.alpha_bars_[i] = running;
      s.sigmas_[i] = i == 0 ? Scalar(0)
                            : std::sqrt(s.betas_[i] * (Scalar(1) - prev) / (Scalar(1) - running));
    }
    s.beta_start_ = betas[0];
    s.beta_end_ = betas[steps - 1];
    return s;
  }

  int steps() const { return static_cast<int>(betas_.size()); }
  ScheduleKind kind() const { return kind_; }
  Scalar beta_start() const { return beta_start_; }
  Scalar beta_end() const { return beta_end_; }

  Scalar beta(int t) const { return betas_[index(t)]; }
  Scalar alpha(int t) const { return alphas_[index(t)]; }
  Scalar alpha_bar(int t) const { return alpha_bars_[index(t)]; }
  Scalar sigma(int t) const { return sigmas_[index(t)]; }

  const Array& betas() const { return betas_; }
  const Array& alphas() const { return alphas_; }
  const Array& alpha_bars() const { return alpha_bars_; }
  const Array& sigmas() const { return sigmas_; }

  void check_step(int t) const {
    require(t >= 1 && t <= steps(),
            "schedule: step " + std::to_string(t) + " outside [1, " + std::to_string(steps()) + "]");
  }

 private:
  Eigen::Index index(int t) const {
    check_step(t);
    return t - 1;
  }

  ScheduleKind kind_ = ScheduleKind::kLinear;
  Scalar beta_start_ = Scalar(0);
  Scalar beta_end_ = Scalar(0);
  Array betas_, alphas_, alpha_bars_, sigmas_;
};

using Schedule = BasicSchedule<double>;

/// Schedule with start/end scaled by 1000/T so that abar_T tracks the
/// familiar 1000-step linear schedule.
Schedule default_schedule(int steps = 200);

/// x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) eps.
template <typename DerivedX, typename DerivedE, typename Scalar>
typename DerivedX::PlainObject forward_closed(const Eigen::MatrixBase<DerivedX>& x0, int t,
                                              const Eigen::MatrixBase<DerivedE>& eps,
                                              const BasicSchedule<Scalar>& sched) {
  require(x0.rows() == eps.rows() && x0.cols() == eps.cols(), "forward_closed: shape mismatch");
  const Scalar ab = sched.alpha_bar(t);
  return std::sqrt(ab) * x0 + std::sqrt(Scalar(1) - ab) * eps;
}

/// One forward transition: sqrt(alpha_t) x_{t-1} + sqrt(beta_t) noise.
template <typename DerivedX, typename DerivedN, typename Scalar>
typename DerivedX::PlainObject forward_step(const Eigen::MatrixBase<DerivedX>& x_prev, int t,
                                            const BasicSchedule<Scalar>& sched,
                                            const Eigen::MatrixBase<DerivedN>& noise) {
  require(x_prev.rows() == noise.rows() && x_prev.cols() == noise.cols(),
          "forward_step: shape mismatch");
  return std::sqrt(sched.alpha(t)) * x_prev + std::sqrt(sched.beta(t)) * noise;
}

}  // namespace xddpm

#endif  // XDDPM_SCHEDULE_HPP_
