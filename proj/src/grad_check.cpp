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

#include "xddpm/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace xddpm {

double relative_error(double analytic, double numeric) {
  const double scale = std::max({1e-8, std::abs(analytic), std::abs(numeric)});
  return std::abs(analytic - numeric) / scale;
}

GradReport grad_check(const ParamVector& params, const LossClosure& loss, double h,
                      RngStream stream, Eigen::Index per_block) {
  if (!(h >= 1e-7 && h <= 1e-3)) throw Error("grad_check: h must lie in [1e-7, 1e-3]");
  const Vector analytic = loss.gradient(params);
  if (analytic.size() != params.size())
    throw Error("grad_check(" + loss.name + "): gradient size mismatch");

  GradReport report;
  report.loss_name = loss.name;
  report.h = h;

  ParamVector probe = params;
  for (const auto& b : params.layout().blocks()) {
    std::vector<Eigen::Index> coords(static_cast<std::size_t>(b.size()));
    std::iota(coords.begin(), coords.end(), Eigen::Index{0});
    if (b.size() > per_block) {
      // Partial Fisher-Yates: first per_block entries form a uniform subset.
      for (Eigen::Index i = 0; i < per_block; ++i) {
        const auto j = stream.uniform_int(i, b.size() - 1);
        std::swap(coords[static_cast<std::size_t>(i)], coords[static_cast<std::size_t>(j)]);
      }
      coords.resize(static_cast<std::size_t>(per_block));
    }

    if (!analytic.segment(b.offset, b.size()).allFinite())
      throw NumericalError("grad_check(" + loss.name + "): non-finite analytic gradient in block '" +
                           b.name + "'");
    double block_max = 0.0;
    for (Eigen::Index local : coords) {
      const Eigen::Index i = b.offset + local;
      const double saved = probe.values()[i];
      probe.values()[i] = saved + h;
      const double up = loss.value(probe);
      probe.values()[i] = saved - h;
      const double down = loss.value(probe);
      probe.values()[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down))
        throw NumericalError("grad_check(" + loss.name + "): non-finite loss probing block '" +
                             b.name + "'");
      const double numeric = (up - down) / (2.0 * h);
      block_max = std::max(block_max, relative_error(analytic[i], numeric));
      ++report.coordinates_checked;
    }
    report.per_block_max_rel_err[b.name] = block_max;
    report.global_max_rel_err = std::max(report.global_max_rel_err, block_max);
  }
  return report;
}

}  // namespace xddpm
