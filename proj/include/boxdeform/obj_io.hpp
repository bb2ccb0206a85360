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

#include <filesystem>
#include <iosfwd>
#include <string>

#include "boxdeform/mesh.hpp"

namespace boxdeform {

// Reads `v x y z` and `f i j k` (1-based) records. Face tokens of the form
// `i/t/n` use the position index. Any other directive is skipped.
TriangleMesh read_obj(std::istream& in);
TriangleMesh read_obj(const std::filesystem::path& path);

// Writes only `v` and `f` records, numbers with 9 significant digits.
void write_obj(std::ostream& out, const TriangleMesh& mesh);
void write_obj(const std::filesystem::path& path, const TriangleMesh& mesh);

std::string obj_string(const TriangleMesh& mesh);

}  // namespace boxdeform
