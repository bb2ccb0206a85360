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

#include <random>
#include <vector>

#include "boxdeform/autodiff.hpp"
#include "boxdeform/mesh.hpp"

namespace boxdeform {

using Rng = std::mt19937_64;

// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct SampleOrigin {
  int face = 0;
  double u = 0.0;
  double w = 0.0;
};

/// Surface samples as a tensor linear in the mesh positions.
///
/// Point i is (1 - sqrt(u)) v1 + sqrt(u) (1 - w) v2 + sqrt(u) w v3 for the
/// corners of `origins[i].face`; (face, u, w) are constants on the tape.
struct SampleBatch {
  ad::Tensor points;  // n x 3
  std::vector<SampleOrigin> origins;
};

// Point with area-uniform parameters (u, w) on one triangle.
Vec3 triangle_point(const Vec3& v1, const Vec3& v2, const Vec3& v3, double u,
                    double w);

// Faces are drawn with probability proportional to area by binary search over
// the cumulative area array. Throws GeometryError when the total area is zero,
// NumericalError when it is not finite and std::invalid_argument when n < 1.
SampleBatch sample_surface(const TriangleMesh& topology, const ad::Tensor& positions,
                           int n, Rng& rng);

// Constant samples of a mesh's own positions.
Matrix sample_points(const TriangleMesh& mesh, int n, Rng& rng);

}  // namespace boxdeform
