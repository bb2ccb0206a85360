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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "boxdeform/mesh.hpp"
#include "boxdeform/obb.hpp"

namespace boxdeform {

/// A meshed box hierarchy and the surface it should deform into.
struct DatasetPair {
  std::string id;
  std::optional<ObbNode> structure;  // absent when the source was given as a mesh
  TriangleMesh source;
  TriangleMesh target;

  void validate() const;
};

// Fixture kinds accepted by make_fixtures.
const std::vector<std::string>& fixture_kinds();

// Procedural (box, target) pairs, deterministic per seed:
//   cube-to-sphere      unit cube -> radius-1 icosphere (3 subdivisions)
//   box-to-ellipsoid    random OBB -> ellipsoid through its extents
//   two-box-chair       seat + back boxes -> union of two rounded boxes
//   random-box-smooth   random OBB -> inflated rounded box
// Throws std::invalid_argument listing the valid kinds otherwise.
std::vector<DatasetPair> make_fixtures(const std::string& kind, std::uint64_t seed,
                                       int source_subdivisions = 0);

// Manifest `dataset.json` plus `<id>.source.obj`, `<id>.target.obj` and, for
// box sources, `<id>.source.json` in `dir`.
void write_dataset(const std::filesystem::path& dir, const std::vector<DatasetPair>& pairs);
std::vector<DatasetPair> read_dataset(const std::filesystem::path& manifest);

}  // namespace boxdeform
