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
#include <string>
#include <vector>

#include "boxdeform/gradcheck.hpp"

namespace boxdeform {

struct GradientCheck {
  std::string name;
  ad::GradcheckReport report;
};

// Finite-difference checks of every differentiable piece of the pipeline on
// seeded random meshes with at most 12 vertices: TAGCN layers for each hop
// count and normalization, a deformation block, chamfer (plain, mean and
// through surface sampling), Laplacian and edge losses, and the summed loss
// through a two-block network with unpooling.
std::vector<GradientCheck> run_gradient_suite(std::uint64_t seed,
                                              const ad::GradcheckOptions& options = {});

}  // namespace boxdeform
