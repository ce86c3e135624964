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

#include <gtest/gtest.h>

#include <cmath>

#include "xddpm/rng.hpp"
#include "xddpm/schedule.hpp"

namespace xddpm {
namespace {

TEST(Schedule, ConstantTwoSteps) {
  const Schedule s = Schedule::build(ScheduleKind::kConstant, 2, 0.5, 0.5);
  EXPECT_DOUBLE_EQ(s.alpha(1), 0.5);
  EXPECT_DOUBLE_EQ(s.alpha(2), 0.5);
  EXPECT_DOUBLE_EQ(s.alpha_bar(1), 0.5);
  EXPECT_DOUBLE_EQ(s.alpha_bar(2), 0.25);
}

TEST(Schedule, SingleStep) {
  for (auto kind : {ScheduleKind::kLinear, ScheduleKind::kConstant}) {
    const Schedule s = Schedule::build(kind, 1, 0.1, 0.1);
    EXPECT_DOUBLE_EQ(s.alpha(1), 0.9);
    EXPECT_DOUBLE_EQ(s.alpha_bar(1), 0.9);
    EXPECT_EQ(s.sigma(1), 0.0);
  }
}

TEST(Schedule, LinearThreeSteps) {
  const Schedule s = Schedule::build(ScheduleKind::kLinear, 3, 0.1, 0.3);
  EXPECT_DOUBLE_EQ(s.beta(1), 0.1);
  EXPECT_NEAR(s.beta(2), 0.2, 1e-15);
  EXPECT_DOUBLE_EQ(s.beta(3), 0.3);
  EXPECT_NEAR(s.alpha_bar(3), 0.504, 1e-15);
}

TEST(Schedule, SigmaIsPosteriorStd) {
  const Schedule s = Schedule::build(ScheduleKind::kLinear, 5, 0.1, 0.3);
  for (int t = 2; t <= 5; ++t) {
    const double expect = s.beta(t) * (1 - s.alpha_bar(t - 1)) / (1 - s.alpha_bar(t));
    EXPECT_NEAR(s.sigma(t) * s.sigma(t), expect, 1e-15);
  }
}

TEST(Schedule, SigmaSquaredNeverExceedsBeta) {
  for (int steps : {21, 50, 200, 1000}) {
    const Schedule s = default_schedule(steps);
    for (int t = 1; t <= steps; ++t) EXPECT_LE(s.sigma(t) * s.sigma(t), s.beta(t)) << t;
  }
}

TEST(Schedule, DefaultTerminalAlphaBarIsSmall) {
  for (int steps : {100, 200, 1000}) {
    const Schedule s = default_schedule(steps);
    EXPECT_LT(s.alpha_bar(steps), 0.05);
    EXPECT_NEAR(s.beta(1), 1e-4 * 1000.0 / steps, 1e-18);
    EXPECT_NEAR(s.beta(steps), 0.02 * 1000.0 / steps, 1e-15);
  }
}

TEST(Schedule, RejectsBadInputs) {
  EXPECT_THROW(Schedule::build(ScheduleKind::kLinear, 0, 0.1, 0.2), Error);
  EXPECT_THROW(Schedule::build(ScheduleKind::kLinear, 3, 0.0, 0.2), Error);
  EXPECT_THROW(Schedule::build(ScheduleKind::kLinear, 3, 0.3, 0.2), Error);
  EXPECT_THROW(Schedule::build(ScheduleKind::kLinear, 3, 0.1, 1.0), Error);
  const Schedule s = default_schedule(30);
  EXPECT_THROW(s.alpha(0), Error);
  EXPECT_THROW(s.alpha(31), Error);
  // Scaling by 1000 / T pushes beta_end to 1 at T = 20.
  EXPECT_THROW(default_schedule(20), Error);
  EXPECT_THROW(parse_schedule_kind("cosine"), Error);
  EXPECT_EQ(parse_schedule_kind(to_string(ScheduleKind::kConstant)), ScheduleKind::kConstant);
}

TEST(ForwardClosed, HandExample) {
  // A two-step constant schedule with beta 0.5 has abar_2 = 0.25.
  const Schedule s = Schedule::build(ScheduleKind::kConstant, 2, 0.5, 0.5);
  const Vector x = forward_closed(Vector::Constant(1, 2.0), 2, Vector::Constant(1, 1.0), s);
  EXPECT_NEAR(x[0], 0.5 * 2 + std::sqrt(0.75), 1e-15);
  EXPECT_NEAR(x[0], 1.8660254037844386, 1e-15);
}

TEST(ForwardClosed, ZeroNoiseScalesExactly) {
  const Schedule s = default_schedule(50);
  const Vector x0 = RngStream(1, 1).normal(6);
  for (int t : {1, 17, 50})
    EXPECT_EQ(forward_closed(x0, t, Vector::Zero(6), s), std::sqrt(s.alpha_bar(t)) * x0);
}

TEST(ForwardClosed, TinyNoiseIsNearIdentity) {
  const Schedule s = Schedule::build(ScheduleKind::kConstant, 1, 1e-300, 1e-300);
  const Vector x0 = RngStream(1, 1).normal(4);
  EXPECT_EQ(forward_closed(x0, 1, RngStream(1, 2).normal(4), s), x0);
}

TEST(ForwardStep, HandExample) {
  const Schedule s = Schedule::build(ScheduleKind::kConstant, 1, 0.19, 0.19);
  const Vector x = forward_step(Vector::Constant(1, 1.0), 1, s, Vector::Constant(1, 1.0));
  EXPECT_NEAR(x[0], 0.9 + std::sqrt(0.19), 1e-15);
  EXPECT_NEAR(x[0], 1.3359, 1e-4);
}

TEST(ForwardStep, ZeroNoiseVanishingBetaKeepsInput) {
  const Schedule s = Schedule::build(ScheduleKind::kConstant, 1, 1e-300, 1e-300);
  const Vector x = RngStream(2, 2).normal(3);
  EXPECT_EQ(forward_step(x, 1, s, Vector::Zero(3)), x);
}

// Iterated single steps reproduce the closed-form marginal: compare mean
// and variance against sqrt(abar_T) x0 and 1 - abar_T within 3 standard
// errors (standard error of the sample variance is v sqrt(2 / (n - 1))).
TEST(ForwardStep, CompositionMatchesClosedFormMarginal) {
  const Schedule s = Schedule::build(ScheduleKind::kConstant, 10, 0.05, 0.05);
  const double x0 = 1.3;
  const Eigen::Index n = 50000;
  RngStream rng(77, 0);
  Matrix x = Matrix::Constant(1, n, x0);
  for (int t = 1; t <= 10; ++t) x = forward_step(x, t, s, rng.normal(1, n));
  const double mean = x.mean();
  const double var = (x.array() - mean).square().sum() / (n - 1);
  const double want_mean = std::sqrt(s.alpha_bar(10)) * x0;
  const double want_var = 1.0 - s.alpha_bar(10);
  EXPECT_LT(std::abs(mean - want_mean), 3.0 * std::sqrt(want_var / n));
  EXPECT_LT(std::abs(var - want_var), 3.0 * want_var * std::sqrt(2.0 / (n - 1)));
}

TEST(Schedule, FromBetasMatchesBuild) {
  const Schedule a = Schedule::build(ScheduleKind::kLinear, 7, 0.01, 0.2);
  const Schedule b = Schedule::from_betas(a.betas());
  EXPECT_EQ((a.alpha_bars() - b.alpha_bars()).abs().maxCoeff(), 0.0);
  EXPECT_EQ((a.sigmas() - b.sigmas()).abs().maxCoeff(), 0.0);
  Schedule::Array bad(2);
  bad << 0.1, 1.0;
  EXPECT_THROW(Schedule::from_betas(bad), Error);
}

TEST(Schedule, FloatInstantiationAgreesWithDouble) {
  const auto f = BasicSchedule<float>::build(ScheduleKind::kLinear, 100, 1e-3f, 0.2f);
  const Schedule d = Schedule::build(ScheduleKind::kLinear, 100, 1e-3, 0.2);
  for (int t = 1; t <= 100; ++t) EXPECT_NEAR(f.alpha_bar(t), d.alpha_bar(t), 1e-5);
}

}  // namespace
}  // namespace xddpm
