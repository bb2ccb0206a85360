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

#include "boxdeform/mesh.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "boxdeform/errors.hpp"

namespace boxdeform {

TriangleMesh::TriangleMesh(Matrix vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)) {
  if (vertices_.cols() != 3) {
    throw DimensionError("mesh vertices must have 3 columns, got " +
                         std::to_string(vertices_.cols()));
  }
  const int n = num_vertices();
  edges_.reserve(faces_.size() * 3);
  for (size_t f = 0; f < faces_.size(); ++f) {
    const Face& t = faces_[f];
    for (int idx : t) {
      if (idx < 0 || idx >= n) {
        throw GeometryError("face " + std::to_string(f) + " references vertex " +
                            std::to_string(idx) + " but mesh has " +
                            std::to_string(n) + " vertices");
      }
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      throw GeometryError("face " + std::to_string(f) +
                          " is degenerate (repeated vertex index)");
    }
    for (int k = 0; k < 3; ++k) {
      const int a = t[k];
      const int b = t[(k + 1) % 3];
      edges_.emplace_back(std::min(a, b), std::max(a, b));
    }
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

  neighbors_.assign(n, {});
  for (const auto& [a, b] : edges_) {
    neighbors_[a].push_back(b);
    neighbors_[b].push_back(a);
  }
  for (auto& nb : neighbors_) std::sort(nb.begin(), nb.end());
}

std::vector<Edge> canonical_edges(int num_vertices, std::span<const Edge> edges) {
  std::vector<Edge> out;
  out.reserve(edges.size());
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= num_vertices || b >= num_vertices) {
      throw GeometryError("edge (" + std::to_string(a) + ", " + std::to_string(b) +
                          ") is out of range for " + std::to_string(num_vertices) + " vertices");
    }
    if (a == b) throw GeometryError("edge (" + std::to_string(a) + ", " + std::to_string(a) + ") is a self-loop");
    out.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int TriangleMesh::euler_characteristic() const {
  return num_vertices() - num_edges() + num_faces();
}

bool TriangleMesh::is_closed() const {
  if (faces_.empty()) return false;
  std::map<Edge, int> uses;
  for (const Face& t : faces_) {
    for (int k = 0; k < 3; ++k) {
      const int a = t[k];
      const int b = t[(k + 1) % 3];
      ++uses[{std::min(a, b), std::max(a, b)}];
    }
  }
  return std::all_of(uses.begin(), uses.end(),
                     [](const auto& kv) { return kv.second == 2; });
}

TriangleMesh TriangleMesh::with_vertices(Matrix vertices) const {
  if (vertices.rows() != vertices_.rows() || vertices.cols() != 3) {
    throw DimensionError("with_vertices: expected " +
                         std::to_string(vertices_.rows()) + "x3, got " +
                         std::to_string(vertices.rows()) + "x" +
                         std::to_string(vertices.cols()));
  }
  TriangleMesh out = *this;
  out.vertices_ = std::move(vertices);
  return out;
}

SubdivisionPlan plan_subdivision(const TriangleMesh& mesh) {
  const int v = mesh.num_vertices();
  const auto& edges = mesh.edges();

  SubdivisionPlan plan;
  plan.old_vertex_count = v;

  std::vector<Eigen::Triplet<double>> coeffs;
  coeffs.reserve(v + 2 * edges.size());
  for (int i = 0; i < v; ++i) coeffs.emplace_back(i, i, 1.0);
  for (size_t e = 0; e < edges.size(); ++e) {
    coeffs.emplace_back(v + static_cast<int>(e), edges[e].first, 0.5);
    coeffs.emplace_back(v + static_cast<int>(e), edges[e].second, 0.5);
  }
  plan.interpolation.resize(v + static_cast<int>(edges.size()), v);
  plan.interpolation.setFromTriplets(coeffs.begin(), coeffs.end());

  auto midpoint = [&](int a, int b) {
    const Edge key{std::min(a, b), std::max(a, b)};
    auto it = std::lower_bound(edges.begin(), edges.end(), key);
    return v + static_cast<int>(it - edges.begin());
  };

  plan.faces.reserve(mesh.faces().size() * 4);
  for (const Face& t : mesh.faces()) {
    const int ab = midpoint(t[0], t[1]);
    const int bc = midpoint(t[1], t[2]);
    const int ca = midpoint(t[2], t[0]);
    plan.faces.push_back({t[0], ab, ca});
    plan.faces.push_back({ab, t[1], bc});
    plan.faces.push_back({ca, bc, t[2]});
    plan.faces.push_back({ab, bc, ca});
  }
  return plan;
}

TriangleMesh subdivide(const TriangleMesh& mesh) {
  SubdivisionPlan plan = plan_subdivision(mesh);
  Matrix positions = plan.interpolation * mesh.vertices();
  return TriangleMesh(std::move(positions), std::move(plan.faces));
}

TriangleMesh concatenate(std::span<const TriangleMesh> meshes) {
  int total_v = 0;
  size_t total_f = 0;
  for (const auto& m : meshes) {
    total_v += m.num_vertices();
    total_f += m.faces().size();
  }
  Matrix vertices(total_v, 3);
  std::vector<Face> faces;
  faces.reserve(total_f);
  int offset = 0;
  for (const auto& m : meshes) {
    vertices.middleRows(offset, m.num_vertices()) = m.vertices();
    for (const Face& t : m.faces()) {
      faces.push_back({t[0] + offset, t[1] + offset, t[2] + offset});
    }
    offset += m.num_vertices();
  }
  return TriangleMesh(std::move(vertices), std::move(faces));
}

std::vector<double> face_areas(const TriangleMesh& mesh) {
  std::vector<double> areas;
  areas.reserve(mesh.faces().size());
  for (const Face& t : mesh.faces()) {
    const Vec3 a = mesh.vertex(t[0]);
    const Vec3 b = mesh.vertex(t[1]);
    const Vec3 c = mesh.vertex(t[2]);
    areas.push_back(0.5 * (b - a).cross(c - a).norm());
  }
  return areas;
}

double surface_area(const TriangleMesh& mesh) {
  double total = 0.0;
  for (double a : face_areas(mesh)) total += a;
  return total;
}

std::pair<Vec3, Vec3> bounding_box(const Matrix& points) {
  if (points.rows() == 0) throw EmptyInputError("bounding_box: no points");
  return {points.colwise().minCoeff().transpose(),
          points.colwise().maxCoeff().transpose()};
}

}  // namespace boxdeform
