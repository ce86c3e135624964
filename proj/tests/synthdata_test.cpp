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

#include <Eigen/QR>
#include <cmath>

#include "xddpm/synthdata.hpp"

namespace xddpm {
namespace {

double row_mean(const Matrix& m, Eigen::Index r) { return m.row(r).mean(); }
double row_var(const Matrix& m, Eigen::Index r) {
  const double mu = row_mean(m, r);
  return (m.row(r).array() - mu).square().sum() / (m.cols() - 1);
}

TEST(LinearDataset, ShapesTruthAndDeterminism) {
  const SyntheticDataset d = gen_linear_dataset(3, 500, 16, 4, 2, 0.1);
  EXPECT_EQ(d.x.rows(), 16);
  EXPECT_EQ(d.x.cols(), 500);
  EXPECT_EQ(d.s.rows(), 2);
  EXPECT_EQ(d.relevant_count(), 4);
  EXPECT_TRUE(d.x.allFinite());
  EXPECT_TRUE(d.s.allFinite());
  const SyntheticDataset e = gen_linear_dataset(3, 500, 16, 4, 2, 0.1);
  EXPECT_EQ(d.x, e.x);
  EXPECT_EQ(d.s, e.s);
  EXPECT_EQ(d.truth_mask, e.truth_mask);
  EXPECT_NE(d.x, gen_linear_dataset(4, 500, 16, 4, 2, 0.1).x);
}

TEST(LinearDataset, CoordinateMoments) {
  const SyntheticDataset d = gen_linear_dataset(5, 20000, 8, 3, 2, 0.1);
  for (Eigen::Index j = 0; j < 8; ++j) {
    const double want = d.truth_mask[j] ? kMixtureMean * kMixtureMean + kMixtureStd * kMixtureStd
                                        : 1.0;
    EXPECT_NEAR(row_var(d.x, j), want, 0.06 * want) << j;
    EXPECT_NEAR(row_mean(d.x, j), 0.0, 0.05) << j;
  }
}

TEST(LinearDataset, NoiselessSignalIsFunctionOfRelevantBlock) {
  const SyntheticDataset d = gen_linear_dataset(6, 300, 5, 4, 1, 0.0);
  // Least squares of s on the relevant rows leaves no residual.
  Matrix z(4, 300);
  Eigen::Index r = 0;
  for (Eigen::Index j = 0; j < 5; ++j)
    if (d.truth_mask[j]) z.row(r++) = d.x.row(j);
  const Eigen::RowVectorXd coef =
      z.transpose().colPivHouseholderQr().solve(d.s.transpose()).transpose();
  EXPECT_LT((coef * z - d.s).norm(), 1e-9);
  // Irrelevant coordinates are independent of s.
  for (Eigen::Index j = 0; j < 5; ++j) {
    if (d.truth_mask[j]) continue;
    const double c = ((d.x.row(j).array() - row_mean(d.x, j)) * (d.s.row(0).array() - d.s.mean()))
                         .sum() / 299 / std::sqrt(row_var(d.x, j) * row_var(d.s, 0));
    EXPECT_LT(std::abs(c), 0.25);
  }
}

TEST(LinearDataset, RejectsBadSizes) {
  EXPECT_THROW(gen_linear_dataset(1, 100, 4, 4, 1, 0.1), Error);  // k == D
  EXPECT_THROW(gen_linear_dataset(1, 100, 4, 0, 1, 0.1), Error);
  EXPECT_THROW(gen_linear_dataset(1, 100, 4, 2, 3, 0.1), Error);  // d > k
  EXPECT_THROW(gen_linear_dataset(1, 100, 4, 2, 1, -0.1), Error);
}

TEST(NonlinearDataset, ReproducibleAndCentered) {
  const SyntheticDataset a = gen_nonlinear_dataset(2, 4000, 6, 3, 2, 0.0);
  const SyntheticDataset b = gen_nonlinear_dataset(2, 4000, 6, 3, 2, 0.0);
  EXPECT_EQ(a.s, b.s);
  EXPECT_EQ(a.generator, "nonlinear");
  for (Eigen::Index r = 0; r < 2; ++r) EXPECT_NEAR(row_mean(a.s, r), 0.0, 0.1);
}

TEST(GmmDataset, DocumentedMoments) {
  const SyntheticDataset d = gen_gmm_dataset(8, 2000);
  EXPECT_EQ(d.dim(), 1);
  EXPECT_EQ(d.signal_dim(), 1);
  EXPECT_EQ(d.truth_mask, Eigen::VectorXi::Ones(1));
  EXPECT_TRUE(d.s.isZero());
  EXPECT_NEAR(row_mean(d.x, 0), 0.0, 0.1);
  EXPECT_NEAR((d.x.array() > 0).cast<double>().mean(), 0.5, 0.03);
  EXPECT_NEAR(row_var(d.x, 0), 4.25, 0.2);
}

TEST(Split, LastFifthIsHeldOut) {
  const SyntheticDataset d = gen_linear_dataset(3, 103, 6, 2, 1, 0.1);
  EXPECT_EQ(d.train_size(), 103 - 20);
  const SyntheticDataset tr = d.train_split(), ho = d.held_out();
  EXPECT_EQ(tr.size() + ho.size(), 103);
  EXPECT_EQ(tr.x.col(0), d.x.col(0));
  EXPECT_EQ(ho.x.col(0), d.x.col(tr.size()));
  EXPECT_EQ(ho.s.col(ho.size() - 1), d.s.col(102));
  EXPECT_EQ(ho.truth_mask, d.truth_mask);
}

TEST(MakeDataset, FollowsConfig) {
  TrainConfig cfg;
  cfg.dataset.n = 200;
  const SyntheticDataset d = make_dataset(cfg);
  EXPECT_EQ(d.dim(), cfg.dim);
  EXPECT_EQ(d.signal_dim(), cfg.signal_dim);
  EXPECT_EQ(d.relevant_count(), cfg.dataset.relevant);
  cfg.dataset.kind = "gmm";
  cfg.dim = cfg.signal_dim = 1;
  EXPECT_EQ(make_dataset(cfg).generator, "gmm");
  cfg.dataset.kind = "spiral";
  EXPECT_THROW(make_dataset(cfg), Error);
}

}  // namespace
}  // namespace xddpm
