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

#include "boxdeform/shapes.hpp"

#include <cmath>
#include <stdexcept>

namespace boxdeform {

TriangleMesh icosphere(int subdivisions, double radius, const Vec3& center) {
  if (subdivisions < 0) throw std::invalid_argument("icosphere: subdivisions < 0");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  Matrix v(12, 3);
  v << -1, t, 0, 1, t, 0, -1, -t, 0, 1, -t, 0,  //
      0, -1, t, 0, 1, t, 0, -1, -t, 0, 1, -t,   //
      t, 0, -1, t, 0, 1, -t, 0, -1, -t, 0, 1;
  std::vector<Face> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  v.rowwise().normalize();
  TriangleMesh mesh(v, std::move(faces));
  for (int s = 0; s < subdivisions; ++s) {
    TriangleMesh finer = subdivide(mesh);
    Matrix p = finer.vertices();
    p.rowwise().normalize();
    mesh = finer.with_vertices(std::move(p));
  }
  Matrix p = mesh.vertices() * radius;
  p.rowwise() += center.transpose();
  return mesh.with_vertices(std::move(p));
}

TriangleMesh rounded_box(const ObbNode& box, int subdivisions, double exponent,
                         double inflation) {
  if (exponent <= 0.0) throw std::invalid_argument("rounded_box: exponent <= 0");
  ObbNode unit;
  unit.extents = Vec3::Ones();
  TriangleMesh cube = mesh_cuboid(unit, subdivisions);
  Matrix p(cube.num_vertices(), 3);
  for (int i = 0; i < cube.num_vertices(); ++i) {
    const Vec3 q = cube.vertex(i);
    const double norm = std::pow(std::pow(std::abs(q.x()), exponent) +
                                     std::pow(std::abs(q.y()), exponent) +
                                     std::pow(std::abs(q.z()), exponent),
                                 1.0 / exponent);
    const Vec3 local = (q / norm).cwiseProduct(box.extents) * inflation;
    p.row(i) = (box.center + box.axes * local).transpose();
  }
  TriangleMesh out = cube.with_vertices(std::move(p));
  if (box.axes.determinant() < 0.0) {
    std::vector<Face> flipped;
    for (const Face& f : out.faces()) flipped.push_back({f[0], f[2], f[1]});
    return TriangleMesh(out.vertices(), std::move(flipped));
  }
  return out;
}

}  // namespace boxdeform
