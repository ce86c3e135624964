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
#include <limits>
#include <numbers>

#include "test_util.hpp"
#include "xddpm/vib.hpp"

namespace xddpm {
namespace {

Vector v1(double a) { return Vector::Constant(1, a); }

// Monte-Carlo KL(N(mu, var) || N(0, 1)) as the mean log-density ratio
// over n draws taken in antithetic pairs.
double mc_kl(double mu, double var, Eigen::Index n, RngStream rng) {
  const double sd = std::sqrt(var);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n / 2; ++i) {
    const double z = rng.normal();
    for (double zz : {z, -z}) {
      const double x = mu + sd * zz;
      acc += -0.5 * std::log(var) - 0.5 * zz * zz + 0.5 * x * x;
    }
  }
  return acc / static_cast<double>(2 * (n / 2));
}

TEST(MaskDistribution, HandExamples) {
  auto d = mask_distribution(v1(0.5), v1(0.0), v1(2.0));
  EXPECT_EQ(d.mask(0), 0.5);
  EXPECT_EQ(d.xs.mean(0), 1.0);
  EXPECT_NEAR(d.xs.var(0), std::log(2.0), 1e-15);
  d = mask_distribution(v1(1.7), v1(0.3), v1(3.0));
  EXPECT_EQ(d.mask(0), 1.0);
  EXPECT_EQ(d.xs.mean(0), 3.0);
  EXPECT_NEAR(d.xs.var(0), std::log1p(std::exp(0.9)), 1e-15);
}

TEST(MaskDistribution, MaskBoundedAndVarianceFloored) {
  const Matrix raw = 3.0 * RngStream(1, 1).normal(6, 50);
  const Matrix xi = 40.0 * RngStream(1, 2).normal(6, 50);
  const Matrix x = RngStream(1, 3).normal(6, 50);
  const auto d = mask_distribution(raw, xi, x);
  EXPECT_GE(d.mask.minCoeff(), 0.0);
  EXPECT_LE(d.mask.maxCoeff(), 1.0);
  EXPECT_GE(d.xs.var.minCoeff(), kVarFloor);
  const auto floored = mask_distribution(v1(0.5), v1(-100.0), v1(1.0));
  EXPECT_EQ(floored.xs.var(0), kVarFloor);
}

TEST(Reparam, HandExamples) {
  XsDistribution d{Matrix::Constant(1, 1, 0.0), Matrix::Constant(1, 1, 4.0)};
  EXPECT_EQ(reparam_sample(d, Matrix::Constant(1, 1, 1.5))(0), 3.0);
  d.mean(0) = -0.7;
  EXPECT_EQ(reparam_sample(d, Matrix::Zero(1, 1))(0), -0.7);
}

TEST(Reparam, EmpiricalMomentsMatch) {
  const Eigen::Index n = 200000;
  XsDistribution d{Matrix::Constant(1, n, 1.2), Matrix::Constant(1, n, 0.6)};
  const Matrix xs = reparam_sample(d, RngStream(4, 4).normal(1, n));
  const double mean = xs.mean();
  const double var = (xs.array() - mean).square().sum() / (n - 1);
  EXPECT_NEAR(mean, 1.2, 3 * std::sqrt(0.6 / n));
  EXPECT_NEAR(var, 0.6, 3 * 0.6 * std::sqrt(2.0 / (n - 1)));
}

TEST(Kl, ClosedFormExamples) {
  EXPECT_EQ(kl_to_standard_normal(Vector::Zero(5), Vector::Ones(5)), 0.0);
  EXPECT_DOUBLE_EQ(kl_to_standard_normal(v1(1.0), v1(1.0)), 0.5);
  EXPECT_NEAR(kl_to_standard_normal(v1(0.0), v1(std::numbers::e)), (std::numbers::e - 2) / 2,
              1e-15);
  EXPECT_NEAR((std::numbers::e - 2) / 2, 0.35914, 1e-5);
}

TEST(Kl, AgreesWithMonteCarlo) {
  EXPECT_NEAR(mc_kl(0.0, std::numbers::e, 1000000, RngStream(5, 5)),
              kl_to_standard_normal(v1(0.0), v1(std::numbers::e)), 1e-2);
  RngStream pick(6, 6);
  for (int i = 0; i < 5; ++i) {
    const double mu = -2 + 4 * pick.uniform();
    const double var = 0.1 + 4.9 * pick.uniform();
    EXPECT_NEAR(mc_kl(mu, var, 200000, pick.derive({static_cast<std::uint64_t>(i)})),
                kl_to_standard_normal(v1(mu), v1(var)), 2e-2);
  }
}

TEST(Kl, NonNegativeAndZeroOnlyAtStandardNormal) {
  RngStream r(7, 7);
  for (int i = 0; i < 1000; ++i) {
    const Vector mu = 2 * r.normal(3);
    const Vector var = (r.normal(3).array() * 1.5).exp().matrix();
    EXPECT_GE(kl_to_standard_normal(mu, var), 0.0);
  }
  EXPECT_GT(kl_to_standard_normal(v1(1e-3), v1(1.0)), 0.0);
  EXPECT_GT(kl_to_standard_normal(v1(0.0), v1(1.001)), 0.0);
}

TEST(Kl, MonotoneInMeanMagnitudeAtFixedVariance) {
  const Vector x = RngStream(3, 3).normal(4);
  const Vector var = Vector::Constant(4, 0.8);
  double prev = std::numeric_limits<double>::infinity();
  for (double scale = 1.0; scale >= 0.0; scale -= 0.1) {
    const double kl = kl_to_standard_normal(Vector(scale * x), var);
    EXPECT_LE(kl, prev);
    prev = kl;
  }
}

TEST(Kl, RejectsNonPositiveVariance) {
  EXPECT_THROW(kl_to_standard_normal(v1(0.0), v1(0.0)), Error);
  EXPECT_THROW(kl_to_standard_normal(v1(0.0), v1(-1.0)), Error);
  EXPECT_THROW(kl_to_standard_normal(Vector::Zero(2), v1(1.0)), Error);
}

struct Nets {
  MaskEncoderNet mask;
  SignalDecoderNet sig;
  ParamVector pm, ps;
  VibNets view() const { return {&mask, &pm, &sig, &ps}; }
};

Nets zero_nets(Eigen::Index dim, Eigen::Index d) {
  Nets n{MaskEncoderNet(dim, {8}), SignalDecoderNet(dim, d, {8}), {}, {}};
  n.pm = ParamVector(n.mask.layout());
  n.ps = ParamVector(n.sig.layout());
  return n;
}

TEST(VibLoss, ZeroNetsAtOrigin) {
  const Nets n = zero_nets(3, 2);
  const VibBreakdown b = vib_loss(n.view(), Vector::Zero(3), Vector::Zero(2), 10.0,
                                  RngStream(1, 1).normal(3));
  const double ln2 = std::log(2.0);
  EXPECT_NEAR(b.kl, 1.5 * (ln2 - std::log(ln2) - 1.0), 1e-14);
  EXPECT_EQ(b.signal_mse, 0.0);
  EXPECT_EQ(b.mask, Vector::Zero(3));
  EXPECT_DOUBLE_EQ(b.total, b.kl);
}

TEST(VibLoss, BetaZeroLeavesOnlyKlAndTotalDecomposes) {
  Nets n = zero_nets(4, 2);
  n.pm = init_params(RngStream(2, 1), n.mask.layout());
  n.ps = init_params(RngStream(2, 2), n.sig.layout());
  const Vector x = RngStream(2, 3).normal(4), s = RngStream(2, 4).normal(2),
               eta = RngStream(2, 5).normal(4);
  const VibBreakdown b0 = vib_loss(n.view(), x, s, 0.0, eta);
  EXPECT_EQ(b0.total, b0.kl);
  const VibBreakdown b = vib_loss(n.view(), x, s, 7.0, eta);
  EXPECT_NEAR(b.total, b.kl + 3.5 * b.signal_mse, 1e-12 * b.total);
  EXPECT_GT(b.signal_mse, 0.0);
}

TEST(VibForward, BatchMatchesPerSampleLoss) {
  Nets n = zero_nets(4, 2);
  n.pm = init_params(RngStream(2, 1), n.mask.layout());
  n.ps = init_params(RngStream(2, 2), n.sig.layout());
  const Matrix x = RngStream(3, 1).normal(4, 5), s = RngStream(3, 2).normal(2, 5),
               eta = RngStream(3, 3).normal(4, 5);
  const VibForward f = vib_forward(n.view(), x, s, eta);
  for (Eigen::Index c = 0; c < 5; ++c) {
    const VibBreakdown b = vib_loss(n.view(), x.col(c), s.col(c), 1.0, eta.col(c));
    EXPECT_NEAR(f.kl[c], b.kl, 1e-13);
    EXPECT_NEAR(f.mse[c], b.signal_mse, 1e-13);
  }
}

TEST(VibBackward, MatchesFiniteDifferencesIncludingMaskTerm) {
  Nets n = zero_nets(3, 1);
  n.pm = init_params(RngStream(9, 1), n.mask.layout());
  n.ps = init_params(RngStream(9, 2), n.sig.layout());
  const Matrix x = RngStream(9, 3).normal(3, 4), s = RngStream(9, 4).normal(1, 4),
               eta = RngStream(9, 5).normal(3, 4);
  const Matrix d_mask = RngStream(9, 6).normal(3, 4);
  const Eigen::RowVectorXd kw = Eigen::RowVectorXd::Constant(4, 0.7);
  const Eigen::RowVectorXd mw = Eigen::RowVectorXd::Constant(4, 1.3);
  auto value = [&](const Nets& m) {
    const VibForward f = vib_forward(m.view(), x, s, eta);
    return (kw.array() * f.kl.array()).sum() + (mw.array() * f.mse.array()).sum() +
           (d_mask.array() * f.dist.mask.array()).sum();
  };
  const VibForward f = vib_forward(n.view(), x, s, eta);
  Vector gm = Vector::Zero(n.pm.size()), gs = Vector::Zero(n.ps.size());
  vib_backward(n.view(), f, kw, mw, d_mask, gm, gs);
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < n.pm.size(); ++i) {
    Nets a = n, b = n;
    a.pm.values()[i] += h;
    b.pm.values()[i] -= h;
    EXPECT_NEAR(gm[i], (value(a) - value(b)) / (2 * h), 1e-6) << "phi_mask " << i;
  }
  for (Eigen::Index i = 0; i < n.ps.size(); ++i) {
    Nets a = n, b = n;
    a.ps.values()[i] += h;
    b.ps.values()[i] -= h;
    EXPECT_NEAR(gs[i], (value(a) - value(b)) / (2 * h), 1e-6) << "phi_sig " << i;
  }
}

}  // namespace
}  // namespace xddpm
