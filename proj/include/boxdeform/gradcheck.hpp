// Copyright 2026 The boxdeform Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "boxdeform/autodiff.hpp"

namespace boxdeform::ad {

// Builds a scalar loss on `tape` from leaves bound to the parameters. Must be
// deterministic: it is re-run for every finite-difference probe.
using ScalarFunction =
    std::function<Tensor(Tape& tape, std::span<const Tensor> params)>;

struct GradcheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Relative error is |a - n| / max(|a|, |n|, floor).
  double denominator_floor = 1e-6;
  // 0 checks every coordinate; otherwise a seeded random subset per parameter.
  size_t max_coordinates_per_param = 0;
  std::uint64_t seed = 0;
};

struct GradcheckReport {
  double max_relative_error = 0.0;
  int worst_param = -1;
  Eigen::Index worst_row = -1;
  Eigen::Index worst_col = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  size_t coordinates_checked = 0;
  bool passed = true;

  std::string summary() const;
};

// Compares reverse-mode gradients with central finite differences.
GradcheckReport gradcheck(const ScalarFunction& f, std::vector<Matrix> params,
                          const GradcheckOptions& options = {});

}  // namespace boxdeform::ad
