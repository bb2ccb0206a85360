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

#include "boxdeform/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "boxdeform/errors.hpp"

namespace boxdeform {

Vec3 triangle_point(const Vec3& v1, const Vec3& v2, const Vec3& v3, double u,
                    double w) {
  const double su = std::sqrt(u);
  return (1.0 - su) * v1 + su * (1.0 - w) * v2 + su * w * v3;
}

SampleBatch sample_surface(const TriangleMesh& topology, const ad::Tensor& positions,
                           int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_surface: n must be >= 1");
  const Matrix& p = positions.value();
  if (p.rows() != topology.num_vertices() || p.cols() != 3) {
    throw DimensionError("sample_surface: positions do not match the topology");
  }
  const auto& faces = topology.faces();
  std::vector<double> cumulative;
  cumulative.reserve(faces.size());
  double total = 0.0;
  for (const Face& f : faces) {
    const Vec3 a = p.row(f[0]).transpose();
    const Vec3 b = p.row(f[1]).transpose();
    const Vec3 c = p.row(f[2]).transpose();
    total += 0.5 * (b - a).cross(c - a).norm();
    cumulative.push_back(total);
  }
  if (!std::isfinite(total)) {
    throw NumericalError("sample_surface: mesh has non-finite vertex positions");
  }
  if (!(total > 0.0)) {
    throw GeometryError("sample_surface: mesh has zero total area");
  }

  SampleBatch batch;
  batch.origins.reserve(static_cast<size_t>(n));
  std::vector<Eigen::Triplet<double>> coeffs;
  coeffs.reserve(3 * static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double r = uniform01(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
    if (it == cumulative.end()) --it;
    const int face = static_cast<int>(it - cumulative.begin());
    const double u = uniform01(rng);
    const double w = uniform01(rng);
    batch.origins.push_back({face, u, w});
    const double su = std::sqrt(u);
    const Face& f = faces[face];
    coeffs.emplace_back(i, f[0], 1.0 - su);
    coeffs.emplace_back(i, f[1], su * (1.0 - w));
    coeffs.emplace_back(i, f[2], su * w);
  }
  auto weights = std::make_shared<SparseMatrix>(n, topology.num_vertices());
  weights->setFromTriplets(coeffs.begin(), coeffs.end());
  batch.points = ad::spmm(std::shared_ptr<const SparseMatrix>(std::move(weights)), positions);
  return batch;
}

Matrix sample_points(const TriangleMesh& mesh, int n, Rng& rng) {
  ad::Tape tape;
  ad::Tensor positions = tape.borrow(mesh.vertices(), false);
  return sample_surface(mesh, positions, n, rng).points.value();
}

}  // namespace boxdeform
