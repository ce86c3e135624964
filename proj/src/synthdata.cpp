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

#include "xddpm/synthdata.hpp"

#include <numeric>
#include <vector>

namespace xddpm {

Eigen::Index SyntheticDataset::train_size() const { return size() - size() / 5; }

SyntheticDataset SyntheticDataset::held_out() const {
  SyntheticDataset out = *this;
  const Eigen::Index start = train_size();
  out.x = x.rightCols(size() - start);
  out.s = s.rightCols(size() - start);
  return out;
}

SyntheticDataset SyntheticDataset::train_split() const {
  SyntheticDataset out = *this;
  out.x = x.leftCols(train_size());
  out.s = s.leftCols(train_size());
  return out;
}

namespace {

enum Purpose : std::uint64_t { kSupport = 1, kMixing, kRelevant, kIrrelevant, kNoise, kComponent };

void check_shape(Eigen::Index n, Eigen::Index dim, Eigen::Index relevant, Eigen::Index signal_dim,
                 double signal_noise) {
  require(n >= 1, "dataset: N must be >= 1");
  require(relevant >= 1 && relevant < dim, "dataset: require 1 <= k < D");
  require(signal_dim >= 1 && signal_dim <= relevant, "dataset: require 1 <= d <= k");
  require(signal_noise >= 0.0, "dataset: signal_noise must be >= 0");
}

/// Seeded choice of k relevant coordinates out of D.
Eigen::VectorXi choose_support(RngStream rng, Eigen::Index dim, Eigen::Index relevant) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(dim));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  for (Eigen::Index i = 0; i < relevant; ++i) {
    const auto j = rng.uniform_int(i, dim - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  Eigen::VectorXi mask = Eigen::VectorXi::Zero(dim);
  for (Eigen::Index i = 0; i < relevant; ++i) mask[idx[static_cast<std::size_t>(i)]] = 1;
  return mask;
}

/// Fills x and returns the relevant block z (k x N, in coordinate order).
Matrix fill_features(RngStream root, Eigen::Index n, const Eigen::VectorXi& truth, Matrix& x) {
  const Eigen::Index dim = truth.size();
  const Eigen::Index k = truth.sum();
  x.resize(dim, n);
  Matrix z(k, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    RngStream comp = root.derive({kComponent, static_cast<std::uint64_t>(c)});
    RngStream rel = root.derive({kRelevant, static_cast<std::uint64_t>(c)});
    RngStream irr = root.derive({kIrrelevant, static_cast<std::uint64_t>(c)});
    Eigen::Index r = 0;
    for (Eigen::Index j = 0; j < dim; ++j) {
      if (truth[j] != 0) {
        const double sign = comp.uniform() < 0.5 ? -1.0 : 1.0;
        z(r, c) = sign * kMixtureMean + kMixtureStd * rel.normal();
        x(j, c) = z(r, c);
        ++r;
      } else {
        x(j, c) = irr.normal();
      }
    }
  }
  return z;
}

Matrix unit_row_sign_matrix(RngStream rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix a(rows, cols);
  const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) a(i, j) = (rng.uniform() < 0.5 ? -scale : scale);
  return a;
}

void add_noise(RngStream rng, double signal_noise, Matrix& s) {
  if (signal_noise == 0.0) return;
  for (Eigen::Index c = 0; c < s.cols(); ++c) {
    RngStream col = rng.derive({static_cast<std::uint64_t>(c)});
    for (Eigen::Index i = 0; i < s.rows(); ++i) s(i, c) += signal_noise * col.normal();
  }
}

}  // namespace

SyntheticDataset gen_linear_dataset(std::uint64_t seed, Eigen::Index n, Eigen::Index dim,
                                    Eigen::Index relevant, Eigen::Index signal_dim,
                                    double signal_noise) {
  check_shape(n, dim, relevant, signal_dim, signal_noise);
  const RngStream root(seed, 0x11AEA8);
  SyntheticDataset ds;
  ds.generator = "linear";
  ds.seed = seed;
  ds.params = {{"N", double(n)},
               {"D", double(dim)},
               {"k", double(relevant)},
               {"d", double(signal_dim)},
               {"signal_noise", signal_noise}};
  ds.truth_mask = choose_support(root.derive({kSupport}), dim, relevant);
  const Matrix z = fill_features(root, n, ds.truth_mask, ds.x);
  const Matrix a = unit_row_sign_matrix(root.derive({kMixing}), signal_dim, relevant);
  ds.s = a * z;
  add_noise(root.derive({kNoise}), signal_noise, ds.s);
  return ds;
}

SyntheticDataset gen_nonlinear_dataset(std::uint64_t seed, Eigen::Index n, Eigen::Index dim,
                                       Eigen::Index relevant, Eigen::Index signal_dim,
                                       double signal_noise) {
  check_shape(n, dim, relevant, signal_dim, signal_noise);
  const RngStream root(seed, 0x404E1A);
  SyntheticDataset ds;
  ds.generator = "nonlinear";
  ds.seed = seed;
  ds.params = {{"N", double(n)},
               {"D", double(dim)},
               {"k", double(relevant)},
               {"d", double(signal_dim)},
               {"signal_noise", signal_noise}};
  ds.truth_mask = choose_support(root.derive({kSupport}), dim, relevant);
  const Matrix z = fill_features(root, n, ds.truth_mask, ds.x);
  const Matrix b = unit_row_sign_matrix(root.derive({kMixing}), signal_dim, relevant);
  // E[z_i^2] = mean^2 + std^2 for every mixture coordinate.
  const double second_moment = kMixtureMean * kMixtureMean + kMixtureStd * kMixtureStd;
  const Vector centre = b.rowwise().sum() * second_moment;
  ds.s = b * z.array().square().matrix();
  ds.s.colwise() -= centre;
  add_noise(root.derive({kNoise}), signal_noise, ds.s);
  return ds;
}

SyntheticDataset gen_gmm_dataset(std::uint64_t seed, Eigen::Index n) {
  require(n >= 1, "dataset: N must be >= 1");
  const RngStream root(seed, 0x6A4A);
  SyntheticDataset ds;
  ds.generator = "gmm";
  ds.seed = seed;
  ds.params = {{"N", double(n)}};
  ds.truth_mask = Eigen::VectorXi::Ones(1);
  ds.x.resize(1, n);
  ds.s = Matrix::Zero(1, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    RngStream col = root.derive({static_cast<std::uint64_t>(c)});
    const double sign = col.uniform() < 0.5 ? -1.0 : 1.0;
    ds.x(0, c) = 2.0 * sign + 0.5 * col.normal();
  }
  return ds;
}

SyntheticDataset make_dataset(const TrainConfig& cfg) {
  const auto& spec = cfg.dataset;
  if (spec.kind == "gmm") return gen_gmm_dataset(spec.seed, spec.n);
  if (spec.kind == "nonlinear")
    return gen_nonlinear_dataset(spec.seed, spec.n, cfg.dim, spec.relevant, cfg.signal_dim,
                                 spec.signal_noise);
  if (spec.kind == "linear")
    return gen_linear_dataset(spec.seed, spec.n, cfg.dim, spec.relevant, cfg.signal_dim,
                              spec.signal_noise);
  throw Error("config key 'dataset': unknown generator '" + spec.kind + "'");
}

}  // namespace xddpm
