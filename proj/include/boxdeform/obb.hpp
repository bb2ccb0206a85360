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

#include <string>
#include <vector>

#include "boxdeform/mesh.hpp"

namespace boxdeform {

// Extents are never allowed below this value.
inline constexpr double kMinExtent = 1e-6;

/// Oriented bounding box node of a structure hierarchy.
///
/// World position of a local point q in [-1, 1]^3 is
/// `center + axes * (extents .* q)`: column i of `axes` is the i-th box axis.
/// Leaves carry geometry; internal nodes only group their children.
struct ObbNode {
  Vec3 center = Vec3::Zero();
  Eigen::Matrix3d axes = Eigen::Matrix3d::Identity();
  Vec3 extents = Vec3::Constant(0.5);
  std::vector<ObbNode> children;

  bool is_leaf() const { return children.empty(); }

  // Throws GeometryError if axes are not orthonormal within 1e-9 or an extent
  // is not strictly positive. Recurses into children.
  void validate() const;

  // Depth-first, left-to-right.
  std::vector<const ObbNode*> leaves() const;

  bool contains(const Vec3& p, double inflation = 1e-9) const;
};

// Closed box surface: 8 corners, 12 triangles with outward winding, then
// `subdivisions` rounds of midpoint subdivision.
TriangleMesh mesh_cuboid(const ObbNode& box, int subdivisions);

// Meshes every leaf of the hierarchy and concatenates them in leaf order.
TriangleMesh mesh_structure(const ObbNode& root, int subdivisions);

// Principal-axis box around the points. Axes are ordered by decreasing
// variance and form a right-handed frame; extents are floored at kMinExtent.
ObbNode fit_obb(const Matrix& points);

std::string structure_to_json(const ObbNode& root, int indent = 2);
ObbNode structure_from_json(const std::string& text);

}  // namespace boxdeform
