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

#include "xddpm/networks.hpp"

#include <cmath>
#include <string>

namespace xddpm {

Mlp::Mlp(Eigen::Index input, std::vector<Eigen::Index> hidden, Eigen::Index output) {
  require(input >= 1 && output >= 1, "mlp: input and output widths must be >= 1");
  widths_.push_back(input);
  for (auto h : hidden) {
    require(h >= 1, "mlp: hidden widths must be >= 1");
    widths_.push_back(h);
  }
  widths_.push_back(output);
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    layout_.add_weight("W" + std::to_string(l), widths_[l + 1], widths_[l]);
    layout_.add_bias("b" + std::to_string(l), widths_[l + 1]);
  }
}

std::vector<Eigen::Index> Mlp::hidden() const {
  return {widths_.begin() + 1, widths_.end() - 1};
}

Matrix Mlp::forward(const ParamVector& params, const Matrix& input, Cache* cache) const {
  require(params.layout() == layout_, "mlp: parameter layout mismatch");
  require(input.rows() == input_width(),
          "mlp: input has " + std::to_string(input.rows()) + " rows, expected " +
              std::to_string(input_width()));
  const auto& blocks = layout_.blocks();
  const std::size_t layers = widths_.size() - 1;
  if (cache) {
    cache->activations.clear();
    cache->activations.reserve(layers + 1);
    cache->activations.push_back(input);
  }
  Matrix a = input;
  for (std::size_t l = 0; l < layers; ++l) {
    const auto w = params.block(blocks[2 * l]);
    const auto b = params.block(blocks[2 * l + 1]);
    Matrix z = w * a;
    z.colwise() += b.col(0);
    if (l + 1 < layers) z = z.array().tanh().matrix();
    a = std::move(z);
    if (cache) cache->activations.push_back(a);
  }
  return a;
}

Matrix Mlp::backward(const ParamVector& params, const Cache& cache, const Matrix& d_output,
                     Vector& grad) const {
  require(grad.size() == layout_.total_size(), "mlp: gradient buffer size mismatch");
  const auto& blocks = layout_.blocks();
  const std::size_t layers = widths_.size() - 1;
  require(cache.activations.size() == layers + 1, "mlp: cache does not match network");
  Matrix delta = d_output;
  for (std::size_t l = layers; l-- > 0;) {
    if (l + 1 < layers) {
      // tanh' = 1 - a^2 on the layer output.
      delta.array() *= 1.0 - cache.activations[l + 1].array().square();
    }
    const Block& wb = blocks[2 * l];
    const Block& bb = blocks[2 * l + 1];
    MatrixMap(grad.data() + wb.offset, wb.rows, wb.cols).noalias() +=
        delta * cache.activations[l].transpose();
    VectorMap(grad.data() + bb.offset, bb.rows) += delta.rowwise().sum();
    delta = params.block(wb).transpose() * delta;
  }
  return delta;
}

TimeEmbedding::TimeEmbedding(Eigen::Index width) : width_(width) {
  require(width >= 2 && width % 2 == 0, "time embedding: width must be even and >= 2");
  freqs_.resize(width / 2);
  for (Eigen::Index j = 0; j < width / 2; ++j)
    freqs_[j] = std::pow(10000.0, -2.0 * static_cast<double>(j) / static_cast<double>(width));
}

Vector TimeEmbedding::operator()(int t) const {
  Vector e(width_);
  const Eigen::Index half = width_ / 2;
  for (Eigen::Index j = 0; j < half; ++j) {
    e[j] = std::sin(freqs_[j] * t);
    e[half + j] = std::cos(freqs_[j] * t);
  }
  return e;
}

Matrix TimeEmbedding::batch(std::span<const int> ts) const {
  Matrix out(width_, static_cast<Eigen::Index>(ts.size()));
  for (std::size_t i = 0; i < ts.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = (*this)(ts[i]);
  return out;
}

DenoiserNet::DenoiserNet(Eigen::Index dim, Eigen::Index time_width, std::vector<Eigen::Index> hidden)
    : dim_(dim), embed_(time_width), mlp_(dim + time_width, std::move(hidden), dim) {}

Matrix DenoiserNet::input(const Matrix& x_t, std::span<const int> ts) const {
  require(x_t.rows() == dim_, "denoiser: x_t has " + std::to_string(x_t.rows()) +
                                  " rows, expected " + std::to_string(dim_));
  require(static_cast<std::size_t>(x_t.cols()) == ts.size(), "denoiser: one step per sample");
  Matrix in(dim_ + embed_.width(), x_t.cols());
  in.topRows(dim_) = x_t;
  in.bottomRows(embed_.width()) = embed_.batch(ts);
  return in;
}

Matrix DenoiserNet::eval(const ParamVector& params, const Matrix& x_t, std::span<const int> ts,
                         Mlp::Cache* cache) const {
  return mlp_.forward(params, input(x_t, ts), cache);
}

Vector DenoiserNet::eval(const ParamVector& params, const Vector& x_t, int t) const {
  const int ts[] = {t};
  return eval(params, Matrix(x_t), ts).col(0);
}

MaskEncoderNet::MaskEncoderNet(Eigen::Index dim, std::vector<Eigen::Index> hidden)
    : dim_(dim), mlp_(dim, std::move(hidden), 2 * dim) {}

MaskHead MaskEncoderNet::eval(const ParamVector& params, const Matrix& x, Mlp::Cache* cache) const {
  Matrix out = mlp_.forward(params, x, cache);
  return MaskHead{out.topRows(dim_), out.bottomRows(dim_)};
}

SignalDecoderNet::SignalDecoderNet(Eigen::Index dim, Eigen::Index signal_dim,
                                   std::vector<Eigen::Index> hidden)
    : mlp_(dim, std::move(hidden), signal_dim) {}

Matrix SignalDecoderNet::eval(const ParamVector& params, const Matrix& x_s, Mlp::Cache* cache) const {
  return mlp_.forward(params, x_s, cache);
}

}  // namespace xddpm
