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

#include "xddpm/tensor.hpp"

#include <algorithm>

namespace xddpm {

void Layout::push(Block b) {
  if (b.size() <= 0) throw Error("layout: block '" + b.name + "' has zero size");
  for (const auto& existing : blocks_)
    if (existing.name == b.name) throw Error("layout: duplicate block '" + b.name + "'");
  b.offset = total_;
  total_ += b.size();
  blocks_.push_back(std::move(b));
}

void Layout::add_weight(std::string name, Eigen::Index fan_out, Eigen::Index fan_in) {
  push(Block{std::move(name), fan_out, fan_in, BlockKind::kWeight, 0});
}

void Layout::add_bias(std::string name, Eigen::Index size) {
  push(Block{std::move(name), size, 1, BlockKind::kBias, 0});
}

void Layout::append(const Layout& other, const std::string& prefix) {
  for (const auto& b : other.blocks_) {
    Block copy = b;
    copy.name = prefix + b.name;
    push(std::move(copy));
  }
}

const Block& Layout::block(const std::string& name) const {
  auto it = std::find_if(blocks_.begin(), blocks_.end(),
                         [&](const Block& b) { return b.name == name; });
  if (it == blocks_.end()) throw Error("layout: no block named '" + name + "'");
  return *it;
}

bool Layout::operator==(const Layout& other) const {
  if (blocks_.size() != other.blocks_.size()) return false;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& a = blocks_[i];
    const auto& b = other.blocks_[i];
    if (a.name != b.name || a.rows != b.rows || a.cols != b.cols || a.kind != b.kind) return false;
  }
  return true;
}

ParamVector::ParamVector(Layout layout)
    : layout_(std::move(layout)), values_(Vector::Zero(layout_.total_size())) {}

ParamVector::ParamVector(Layout layout, Vector values)
    : layout_(std::move(layout)), values_(std::move(values)) {
  if (values_.size() != layout_.total_size())
    throw Error("param vector: " + std::to_string(values_.size()) + " values for layout of size " +
                std::to_string(layout_.total_size()));
}

ParamVector init_params(RngStream stream, const Layout& layout) {
  if (layout.empty()) throw Error("init_params: empty layout");
  ParamVector p(layout);
  for (const auto& b : layout.blocks()) {
    if (b.kind == BlockKind::kBias) continue;
    const double bound = std::sqrt(6.0 / static_cast<double>(b.rows + b.cols));
    auto w = p.block(b);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = bound * (2.0 * stream.uniform() - 1.0);
  }
  return p;
}

ParamVector concat(const std::vector<std::pair<std::string, const ParamVector*>>& parts) {
  Layout layout;
  for (const auto& [prefix, pv] : parts) layout.append(pv->layout(), prefix);
  Vector values(layout.total_size());
  Eigen::Index at = 0;
  for (const auto& [prefix, pv] : parts) {
    values.segment(at, pv->size()) = pv->values();
    at += pv->size();
  }
  return ParamVector(std::move(layout), std::move(values));
}

Vector slice_part(const Vector& joined, const std::vector<Eigen::Index>& part_sizes,
                  std::size_t part_index) {
  Eigen::Index at = 0;
  for (std::size_t i = 0; i < part_index; ++i) at += part_sizes[i];
  return joined.segment(at, part_sizes.at(part_index));
}

}  // namespace xddpm
