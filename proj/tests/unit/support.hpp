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

#include <doctest.h>

#include "boxdeform/mesh.hpp"
#include "boxdeform/obb.hpp"
#include "boxdeform/sampling.hpp"

namespace boxdeform::testing {

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = scale * (2.0 * uniform01(rng) - 1.0);
  return m;
}

inline TriangleMesh single_triangle() {
  Matrix v(3, 3);
  v << 0, 0, 0, 1, 0, 0, 0, 1, 0;
  return TriangleMesh(v, {{{0, 1, 2}}});
}

inline TriangleMesh unit_cube(int subdivisions = 0) {
  ObbNode box;
  box.extents = Vec3::Constant(0.5);
  return mesh_cuboid(box, subdivisions);
}

inline TriangleMesh octahedron() {
  Matrix v(6, 3);
  v << 1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1;
  return TriangleMesh(v, {{{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4},
                           {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}}});
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  REQUIRE(a.rows() == b.rows());
  REQUIRE(a.cols() == b.cols());
  return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
}

// Signed volume by the divergence theorem; positive for outward winding.
inline double signed_volume(const TriangleMesh& m) {
  double vol = 0.0;
  for (const Face& f : m.faces()) {
    vol += m.vertex(f[0]).dot(m.vertex(f[1]).cross(m.vertex(f[2]))) / 6.0;
  }
  return vol;
}

}  // namespace boxdeform::testing
