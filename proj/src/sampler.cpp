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

#include "xddpm/sampler.hpp"

#include <vector>

namespace xddpm {

GeneratedBatch generate(const DenoiserNet& net, const ParamVector& theta, const Schedule& sched,
                        Eigen::Index n, RngStream stream, TrainMode mode) {
  require(n >= 1, "generate: n must be >= 1");
  const Eigen::Index dim = net.dim();
  const int steps = sched.steps();
  std::vector<RngStream> per_sample;
  per_sample.reserve(static_cast<std::size_t>(n));
  Matrix x(dim, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    per_sample.push_back(stream.derive({static_cast<std::uint64_t>(i)}));
    x.col(i) = per_sample.back().normal(dim);
  }

  Matrix eta(dim, n);
  for (int t = steps; t >= 1; --t) {
    const std::vector<int> ts(static_cast<std::size_t>(n), t);
    const Matrix eps_hat = net.eval(theta, x, ts);
    for (Eigen::Index i = 0; i < n; ++i) eta.col(i) = per_sample[static_cast<std::size_t>(i)].normal(dim);
    x = ancestral_step(x, t, eps_hat, sched, eta);
    if (!x.allFinite())
      throw NumericalError("generate: non-finite sample after step t=" + std::to_string(t));
  }

  GeneratedBatch out;
  out.w = std::move(x);
  out.seed = stream.seed();
  out.stream_id = stream.stream_id();
  out.steps_T = steps;
  out.mode = mode;
  return out;
}

double zero_denoiser_variance(const Schedule& sched) {
  double v = 1.0;
  for (int t = sched.steps(); t >= 1; --t) {
    const double sigma = sched.sigma(t);
    v = v / sched.alpha(t) + sigma * sigma;
  }
  return v;
}

Vector relevance_from_denoiser(const DenoiserNet& net, const ParamVector& theta,
                               const Schedule& sched, Eigen::Index probes, RngStream stream,
                               const Matrix* reference) {
  require(probes >= 1, "relevance_from_denoiser: probes must be >= 1");
  const Eigen::Index dim = net.dim();
  if (reference) require(reference->rows() == dim && reference->cols() >= 1,
                         "relevance_from_denoiser: reference has wrong shape");
  Matrix x_t(dim, probes);
  std::vector<int> ts(static_cast<std::size_t>(probes));
  for (Eigen::Index i = 0; i < probes; ++i) {
    RngStream own = stream.derive({static_cast<std::uint64_t>(i)});
    const int t = static_cast<int>(own.uniform_int(1, sched.steps()));
    Vector x0 = reference ? Vector(reference->col(own.uniform_int(0, reference->cols() - 1)))
                          : own.normal(dim);
    x_t.col(i) = forward_closed(x0, t, own.normal(dim), sched);
    ts[static_cast<std::size_t>(i)] = t;
  }
  return net.eval(theta, x_t, ts).cwiseAbs().rowwise().mean();
}

}  // namespace xddpm
