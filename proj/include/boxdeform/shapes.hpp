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

#include "boxdeform/mesh.hpp"
#include "boxdeform/obb.hpp"

namespace boxdeform {

// Icosahedron refined `subdivisions` times with vertices pushed onto the
// sphere. Vertex count is 10 * 4^s + 2.
TriangleMesh icosphere(int subdivisions, double radius = 1.0,
                       const Vec3& center = Vec3::Zero());

// Box surface (mesh_cuboid at `subdivisions`) projected onto the
// superellipsoid |x|^p + |y|^p + |z|^p = 1 in box-local coordinates, then
// scaled by the box extents times `inflation`. p = 2 gives an ellipsoid; large
// p approaches the box itself.
TriangleMesh rounded_box(const ObbNode& box, int subdivisions, double exponent,
                         double inflation = 1.0);

}  // namespace boxdeform
