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

#include "boxdeform/obb.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <json.hpp>

#include "boxdeform/errors.hpp"

namespace boxdeform {

namespace {

// Corner i has local coordinate bit k of i -> +1, else -1 along axis k.
constexpr std::array<std::array<int, 4>, 6> kCubeQuads = {{
    {0, 2, 3, 1},  // -z
    {4, 5, 7, 6},  // +z
    {0, 1, 5, 4},  // -y
    {2, 6, 7, 3},  // +y
    {0, 4, 6, 2},  // -x
    {1, 3, 7, 5},  // +x
}};

void collect_leaves(const ObbNode& node, std::vector<const ObbNode*>& out) {
  if (node.is_leaf()) {
    out.push_back(&node);
    return;
  }
  for (const auto& c : node.children) collect_leaves(c, out);
}

nlohmann::json node_to_json(const ObbNode& node) {
  nlohmann::json j;
  j["center"] = {node.center.x(), node.center.y(), node.center.z()};
  std::vector<double> axes;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) axes.push_back(node.axes(r, c));
  j["axes"] = axes;
  j["extents"] = {node.extents.x(), node.extents.y(), node.extents.z()};
  j["children"] = nlohmann::json::array();
  for (const auto& c : node.children) j["children"].push_back(node_to_json(c));
  return j;
}

std::vector<double> read_numbers(const nlohmann::json& j, const char* key,
                                 size_t count) {
  if (!j.contains(key)) {
    throw FormatError(std::string("structure node missing key '") + key + "'");
  }
  const auto& arr = j.at(key);
  if (!arr.is_array() || arr.size() != count) {
    throw FormatError(std::string("structure key '") + key + "' must be an array of " +
                      std::to_string(count) + " numbers");
  }
  std::vector<double> out;
  for (const auto& v : arr) {
    if (!v.is_number()) {
      throw FormatError(std::string("structure key '") + key +
                        "' contains a non-number");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

ObbNode node_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("structure node must be a JSON object");
  ObbNode node;
  auto c = read_numbers(j, "center", 3);
  auto a = read_numbers(j, "axes", 9);
  auto e = read_numbers(j, "extents", 3);
  node.center = Vec3(c[0], c[1], c[2]);
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < 3; ++k) node.axes(r, k) = a[3 * r + k];
  node.extents = Vec3(e[0], e[1], e[2]);
  if (j.contains("children")) {
    const auto& ch = j.at("children");
    if (!ch.is_array()) throw FormatError("structure key 'children' must be an array");
    for (const auto& cj : ch) node.children.push_back(node_from_json(cj));
  }
  return node;
}

}  // namespace

void ObbNode::validate() const {
  const Eigen::Matrix3d gram = axes.transpose() * axes;
  if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9) {
    throw GeometryError("OBB axes are not orthonormal");
  }
  if (!(extents.array() > 0.0).all() || !extents.allFinite() ||
      !center.allFinite()) {
    throw GeometryError("OBB extents must be finite and strictly positive");
  }
  for (const auto& c : children) c.validate();
}

std::vector<const ObbNode*> ObbNode::leaves() const {
  std::vector<const ObbNode*> out;
  collect_leaves(*this, out);
  return out;
}

bool ObbNode::contains(const Vec3& p, double inflation) const {
  const Vec3 local = axes.transpose() * (p - center);
  return (local.cwiseAbs().array() <= (extents.array() + inflation)).all();
}

TriangleMesh mesh_cuboid(const ObbNode& box, int subdivisions) {
  box.validate();
  if (subdivisions < 0) {
    throw std::invalid_argument("mesh_cuboid: subdivisions must be >= 0");
  }
  Matrix corners(8, 3);
  for (int i = 0; i < 8; ++i) {
    const Vec3 local((i & 1) ? 1.0 : -1.0, (i & 2) ? 1.0 : -1.0,
                     (i & 4) ? 1.0 : -1.0);
    corners.row(i) =
        (box.center + box.axes * local.cwiseProduct(box.extents)).transpose();
  }
  // A reflected frame flips the winding.
  const bool flip = box.axes.determinant() < 0.0;
  std::vector<Face> faces;
  faces.reserve(12);
  for (const auto& q : kCubeQuads) {
    if (flip) {
      faces.push_back({q[0], q[2], q[1]});
      faces.push_back({q[0], q[3], q[2]});
    } else {
      faces.push_back({q[0], q[1], q[2]});
      faces.push_back({q[0], q[2], q[3]});
    }
  }
  TriangleMesh mesh(std::move(corners), std::move(faces));
  for (int s = 0; s < subdivisions; ++s) mesh = subdivide(mesh);
  return mesh;
}

TriangleMesh mesh_structure(const ObbNode& root, int subdivisions) {
  std::vector<TriangleMesh> parts;
  for (const ObbNode* leaf : root.leaves()) {
    parts.push_back(mesh_cuboid(*leaf, subdivisions));
  }
  return concatenate(parts);
}

ObbNode fit_obb(const Matrix& points) {
  if (points.rows() == 0) throw EmptyInputError("fit_obb: empty point list");
  if (points.cols() != 3) throw DimensionError("fit_obb: points must be N x 3");

  const Vec3 mean = points.colwise().mean().transpose();
  const Matrix centered = points.rowwise() - mean.transpose();
  const Eigen::Matrix3d cov =
      (centered.transpose() * centered) / static_cast<double>(points.rows());

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  const Vec3 values = solver.eigenvalues();
  Eigen::Matrix3d vectors = solver.eigenvectors();

  // Canonical sign: dominant component positive.
  std::array<int, 3> dominant{};
  for (int k = 0; k < 3; ++k) {
    Eigen::Index idx = 0;
    vectors.col(k).cwiseAbs().maxCoeff(&idx);
    dominant[k] = static_cast<int>(idx);
    if (vectors(idx, k) < 0.0) vectors.col(k) = -vectors.col(k);
  }

  const double tie_tol = 1e-12 * std::max(1.0, values.cwiseAbs().maxCoeff());
  std::array<int, 3> order = {0, 1, 2};
  auto before = [&](int a, int b) {
    if (std::abs(values[a] - values[b]) <= tie_tol) return dominant[a] < dominant[b];
    return values[a] > values[b];
  };
  // Three elements; insertion sort keeps the tie rule well defined.
  for (int i = 1; i < 3; ++i) {
    for (int j = i; j > 0 && before(order[j], order[j - 1]); --j) {
      std::swap(order[j], order[j - 1]);
    }
  }

  ObbNode box;
  for (int k = 0; k < 3; ++k) box.axes.col(k) = vectors.col(order[k]);
  if (box.axes.determinant() < 0.0) box.axes.col(2) = -box.axes.col(2);

  const Matrix local = centered * box.axes;
  const Vec3 lo = local.colwise().minCoeff().transpose();
  const Vec3 hi = local.colwise().maxCoeff().transpose();
  box.center = mean + box.axes * (0.5 * (lo + hi));
  box.extents = (0.5 * (hi - lo)).cwiseMax(kMinExtent);
  return box;
}

std::string structure_to_json(const ObbNode& root, int indent) {
  return node_to_json(root).dump(indent);
}

ObbNode structure_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("structure JSON parse error: ") + e.what());
  }
  ObbNode root = node_from_json(j);
  root.validate();
  return root;
}

}  // namespace boxdeform
