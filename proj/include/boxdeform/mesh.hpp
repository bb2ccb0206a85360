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

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <array>
#include <span>
#include <utility>
#include <vector>

namespace boxdeform {

using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vec3 = Eigen::Vector3d;

using Face = std::array<int, 3>;
using Edge = std::pair<int, int>;  // (min index, max index)

/// Triangle mesh with vertex positions stored as a V x 3 matrix.
///
/// The edge list and neighbor sets are derived on construction. Edges are
/// stored as (min, max) pairs sorted lexicographically, which fixes the
/// numbering of midpoint vertices under subdivision. Neighbor lists are sorted
/// ascending. Instances are immutable.
class TriangleMesh {
 public:
  TriangleMesh() = default;
  TriangleMesh(Matrix vertices, std::vector<Face> faces);

  int num_vertices() const { return static_cast<int>(vertices_.rows()); }
  int num_faces() const { return static_cast<int>(faces_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const Matrix& vertices() const { return vertices_; }
  Vec3 vertex(int i) const { return vertices_.row(i).transpose(); }
  const std::vector<Face>& faces() const { return faces_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int v) const { return neighbors_[v]; }

  // V - E + F
  int euler_characteristic() const;

  // Every edge is shared by exactly two faces.
  bool is_closed() const;

  // Same topology, new positions. Row count must match.
  TriangleMesh with_vertices(Matrix vertices) const;

 private:
  Matrix vertices_{0, 3};
  std::vector<Face> faces_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> neighbors_;
};

/// One round of 1 -> 4 midpoint subdivision expressed as a linear map.
///
/// Vertex i < V keeps its index; the midpoint of edge e becomes vertex V + e.
/// `interpolation` is the (V + E) x V matrix taking old per-vertex rows to new
/// ones (identity rows for originals, 1/2 + 1/2 rows for midpoints).
struct SubdivisionPlan {
  int old_vertex_count = 0;
  std::vector<Face> faces;
  SparseMatrix interpolation;
};

SubdivisionPlan plan_subdivision(const TriangleMesh& mesh);

// Applies one round of midpoint subdivision to positions and topology.
TriangleMesh subdivide(const TriangleMesh& mesh);

// Disjoint union; faces of later meshes are offset by the preceding vertex
// counts.
TriangleMesh concatenate(std::span<const TriangleMesh> meshes);

std::vector<double> face_areas(const TriangleMesh& mesh);

double surface_area(const TriangleMesh& mesh);

// Edges as (min, max), sorted and deduplicated. Throws GeometryError for an
// index out of range or a self-loop.
std::vector<Edge> canonical_edges(int num_vertices, std::span<const Edge> edges);

// Axis-aligned bounds as (min, max).
std::pair<Vec3, Vec3> bounding_box(const Matrix& points);

}  // namespace boxdeform
