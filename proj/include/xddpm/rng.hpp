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

#ifndef XDDPM_RNG_HPP_
#define XDDPM_RNG_HPP_

#include <Eigen/Core>

#include <cstdint>
#include <initializer_list>

namespace xddpm {

/// Counter-based random stream. Draw i of a stream is a pure function of
/// (seed, stream_id, i), so child streams can be derived per sample or per
/// step and replayed independently of evaluation order.
///
/// Normal draws use Box-Muller on two uniforms rather than
/// std::normal_distribution, whose output is implementation-defined.
class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::uint64_t counter() const { return counter_; }

  /// Child stream keyed by a path of integers (e.g. {step, sample, purpose}).
  RngStream derive(std::initializer_list<std::uint64_t> path) const;

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  double normal();
  Eigen::VectorXd normal(Eigen::Index n);
  Eigen::MatrixXd normal(Eigen::Index rows, Eigen::Index cols);

 private:
  std::uint64_t key() const;

  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
  std::uint64_t counter_ = 0;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

}  // namespace xddpm

#endif  // XDDPM_RNG_HPP_
