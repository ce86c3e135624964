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

#ifndef XDDPM_TENSOR_HPP_
#define XDDPM_TENSOR_HPP_

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "xddpm/rng.hpp"

namespace xddpm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;
using VectorMap = Eigen::Map<Vector>;
using ConstVectorMap = Eigen::Map<const Vector>;

/// Raised for shape, range and configuration violations.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a loss or intermediate quantity becomes NaN/Inf.
class NumericalError : public Error {
 public:
  using Error::Error;
};

enum class BlockKind { kWeight, kBias };

/// One named slice of a parameter vector. Weights are rows x cols
/// (column-major, rows = fan_out); biases are rows x 1.
struct Block {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  BlockKind kind = BlockKind::kWeight;
  Eigen::Index offset = 0;

  Eigen::Index size() const { return rows * cols; }
};

/// Ordered list of blocks. Offsets are assigned on append and never change.
class Layout {
 public:
  Layout() = default;

  void add_weight(std::string name, Eigen::Index fan_out, Eigen::Index fan_in);
  void add_bias(std::string name, Eigen::Index size);
  /// Appends every block of `other` with `prefix` prepended to its name.
  void append(const Layout& other, const std::string& prefix);

  const std::vector<Block>& blocks() const { return blocks_; }
  const Block& block(const std::string& name) const;
  Eigen::Index total_size() const { return total_; }
  bool empty() const { return blocks_.empty(); }

  bool operator==(const Layout& other) const;

 private:
  void push(Block b);

  std::vector<Block> blocks_;
  Eigen::Index total_ = 0;
};

/// Flat parameter storage plus the layout naming its slices.
class ParamVector {
 public:
  ParamVector() = default;
  /// Zero-initialized storage for `layout`.
  explicit ParamVector(Layout layout);
  ParamVector(Layout layout, Vector values);

  const Layout& layout() const { return layout_; }
  const Vector& values() const { return values_; }
  Vector& values() { return values_; }
  Eigen::Index size() const { return values_.size(); }

  ConstMatrixMap block(const Block& b) const {
    return ConstMatrixMap(values_.data() + b.offset, b.rows, b.cols);
  }
  MatrixMap block(const Block& b) {
    return MatrixMap(values_.data() + b.offset, b.rows, b.cols);
  }
  ConstMatrixMap block(const std::string& name) const { return block(layout_.block(name)); }
  MatrixMap block(const std::string& name) { return block(layout_.block(name)); }

  bool all_finite() const { return values_.allFinite(); }

 private:
  Layout layout_;
  Vector values_;
};

/// Glorot-uniform weights, zero biases. Deterministic in `stream`.
ParamVector init_params(RngStream stream, const Layout& layout);

/// Concatenates several parameter vectors under name prefixes.
ParamVector concat(const std::vector<std::pair<std::string, const ParamVector*>>& parts);

/// Copies the slice of `joined` belonging to prefix `part_index` back out.
Vector slice_part(const Vector& joined, const std::vector<Eigen::Index>& part_sizes,
                  std::size_t part_index);

// Elementwise helpers, templated so they compose with Eigen expressions.

template <typename Scalar>
Scalar softplus(Scalar z) {
  // log1p(exp(z)) without overflow for large z.
  return z > Scalar(0) ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

template <typename Scalar>
Scalar sigmoid(Scalar z) {
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

/// Derivative of clamp to [0, 1]: 1 on the closed interval, 0 outside.
template <typename Scalar>
Scalar clamp_unit_grad(Scalar z) {
  return (z >= Scalar(0) && z <= Scalar(1)) ? Scalar(1) : Scalar(0);
}

template <typename Derived>
typename Derived::PlainObject clamp_unit(const Eigen::MatrixBase<Derived>& z) {
  return z.cwiseMax(typename Derived::Scalar(0)).cwiseMin(typename Derived::Scalar(1));
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw Error(what);
}

}  // namespace xddpm

#endif  // XDDPM_TENSOR_HPP_
