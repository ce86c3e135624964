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

#ifndef XDDPM_NETWORKS_HPP_
#define XDDPM_NETWORKS_HPP_

#include <span>
#include <vector>

#include "xddpm/tensor.hpp"

namespace xddpm {

/// Fully connected network with tanh hidden layers and a linear output.
/// Batches are column-major: one column per sample.
class Mlp {
 public:
  /// Per-layer activations retained by forward() for backward().
  struct Cache {
    std::vector<Matrix> activations;  // activations[0] is the input
  };

  Mlp() = default;
  Mlp(Eigen::Index input, std::vector<Eigen::Index> hidden, Eigen::Index output);

  Eigen::Index input_width() const { return widths_.front(); }
  Eigen::Index output_width() const { return widths_.back(); }
  const std::vector<Eigen::Index>& widths() const { return widths_; }
  std::vector<Eigen::Index> hidden() const;
  const Layout& layout() const { return layout_; }

  Matrix forward(const ParamVector& params, const Matrix& input, Cache* cache = nullptr) const;

  /// Accumulates dL/dparams into `grad` and returns dL/dinput.
  Matrix backward(const ParamVector& params, const Cache& cache, const Matrix& d_output,
                  Vector& grad) const;

 private:
  std::vector<Eigen::Index> widths_;
  Layout layout_;
};

/// Sinusoidal embedding [sin(w_j t), cos(w_j t)], w_j = 10000^(-2j/width).
class TimeEmbedding {
 public:
  TimeEmbedding() = default;
  explicit TimeEmbedding(Eigen::Index width);

  Eigen::Index width() const { return width_; }
  Vector operator()(int t) const;
  /// One column per entry of `ts`.
  Matrix batch(std::span<const int> ts) const;

 private:
  Eigen::Index width_ = 0;
  Vector freqs_;
};

/// Noise predictor eps_theta(x_t, t): MLP over concat(x_t, embed(t)).
class DenoiserNet {
 public:
  DenoiserNet() = default;
  DenoiserNet(Eigen::Index dim, Eigen::Index time_width, std::vector<Eigen::Index> hidden);

  Eigen::Index dim() const { return dim_; }
  const Mlp& mlp() const { return mlp_; }
  const TimeEmbedding& embedding() const { return embed_; }
  const Layout& layout() const { return mlp_.layout(); }

  Matrix input(const Matrix& x_t, std::span<const int> ts) const;

  Matrix eval(const ParamVector& params, const Matrix& x_t, std::span<const int> ts,
              Mlp::Cache* cache = nullptr) const;
  Vector eval(const ParamVector& params, const Vector& x_t, int t) const;

 private:
  Eigen::Index dim_ = 0;
  TimeEmbedding embed_;
  Mlp mlp_;
};

/// Raw mask mean and variance logit, both D wide, from one shared trunk.
struct MaskHead {
  Matrix mu_raw;
  Matrix xi;
};

class MaskEncoderNet {
 public:
  MaskEncoderNet() = default;
  MaskEncoderNet(Eigen::Index dim, std::vector<Eigen::Index> hidden);

  Eigen::Index dim() const { return dim_; }
  const Mlp& mlp() const { return mlp_; }
  const Layout& layout() const { return mlp_.layout(); }

  MaskHead eval(const ParamVector& params, const Matrix& x, Mlp::Cache* cache = nullptr) const;

 private:
  Eigen::Index dim_ = 0;
  Mlp mlp_;
};

/// Mean of the Gaussian decoder q(S | X_S).
class SignalDecoderNet {
 public:
  SignalDecoderNet() = default;
  SignalDecoderNet(Eigen::Index dim, Eigen::Index signal_dim, std::vector<Eigen::Index> hidden);

  Eigen::Index dim() const { return mlp_.input_width(); }
  Eigen::Index signal_dim() const { return mlp_.output_width(); }
  const Mlp& mlp() const { return mlp_; }
  const Layout& layout() const { return mlp_.layout(); }

  Matrix eval(const ParamVector& params, const Matrix& x_s, Mlp::Cache* cache = nullptr) const;

 private:
  Mlp mlp_;
};

}  // namespace xddpm

#endif  // XDDPM_NETWORKS_HPP_
