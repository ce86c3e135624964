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

#ifndef XDDPM_GRAD_CHECK_HPP_
#define XDDPM_GRAD_CHECK_HPP_

#include <functional>
#include <map>
#include <string>

#include "xddpm/tensor.hpp"

namespace xddpm {

/// A scalar loss over a parameter vector together with its analytic gradient.
struct LossClosure {
  std::string name;
  std::function<double(const ParamVector&)> value;
  std::function<Vector(const ParamVector&)> gradient;
};

struct GradReport {
  std::string loss_name;
  std::map<std::string, double> per_block_max_rel_err;
  double global_max_rel_err = 0.0;
  double h = 0.0;
  Eigen::Index coordinates_checked = 0;
};

/// |a - n| / max(1e-8, |a|, |n|).
double relative_error(double analytic, double numeric);

/// Compares the analytic gradient with central differences on up to
/// `per_block` randomly chosen coordinates of every block (all of them for
/// smaller blocks). Throws NumericalError naming the block if any probe is
/// non-finite.
GradReport grad_check(const ParamVector& params, const LossClosure& loss, double h,
                      RngStream stream, Eigen::Index per_block = 200);

}  // namespace xddpm

#endif  // XDDPM_GRAD_CHECK_HPP_
