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

#include "boxdeform/obj_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "boxdeform/errors.hpp"

namespace boxdeform {

namespace {

int parse_index(const std::string& token, int line_no) {
  const std::string head = token.substr(0, token.find('/'));
  size_t consumed = 0;
  int value = 0;
  try {
    value = std::stoi(head, &consumed);
  } catch (const std::exception&) {
    consumed = 0;
  }
  if (consumed != head.size() || head.empty() || value < 1) {
    throw FormatError("OBJ line " + std::to_string(line_no) +
                      ": bad face index '" + token + "'");
  }
  return value - 1;
}

}  // namespace

TriangleMesh read_obj(std::istream& in) {
  std::vector<double> coords;
  std::vector<Face> faces;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) {
        throw FormatError("OBJ line " + std::to_string(line_no) +
                          ": vertex needs three coordinates");
      }
      coords.insert(coords.end(), {x, y, z});
    } else if (tag == "f") {
      std::string a, b, c, extra;
      if (!(ls >> a >> b >> c)) {
        throw FormatError("OBJ line " + std::to_string(line_no) +
                          ": face needs three indices");
      }
      if (ls >> extra) {
        throw FormatError("OBJ line " + std::to_string(line_no) +
                          ": only triangular faces are supported");
      }
      faces.push_back({parse_index(a, line_no), parse_index(b, line_no),
                       parse_index(c, line_no)});
    }
  }
  const Eigen::Index n = static_cast<Eigen::Index>(coords.size() / 3);
  Matrix vertices(n, 3);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int k = 0; k < 3; ++k) vertices(i, k) = coords[3 * i + k];
  try {
    return TriangleMesh(std::move(vertices), std::move(faces));
  } catch (const GeometryError& e) {
    throw FormatError(std::string("OBJ: ") + e.what());
  }
}

TriangleMesh read_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open OBJ file " + path.string());
  return read_obj(in);
}

void write_obj(std::ostream& out, const TriangleMesh& mesh) {
  char buf[128];
  const Matrix& v = mesh.vertices();
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    std::snprintf(buf, sizeof(buf), "v %.9g %.9g %.9g\n", v(i, 0), v(i, 1),
                  v(i, 2));
    out << buf;
  }
  for (const Face& f : mesh.faces()) {
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
}

void write_obj(const std::filesystem::path& path, const TriangleMesh& mesh) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write OBJ file " + path.string());
  write_obj(out, mesh);
}

std::string obj_string(const TriangleMesh& mesh) {
  std::ostringstream out;
  write_obj(out, mesh);
  return out.str();
}

}  // namespace boxdeform
