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

#include "boxdeform/dataset.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "boxdeform/errors.hpp"
#include "boxdeform/obj_io.hpp"
#include "boxdeform/sampling.hpp"
#include "boxdeform/shapes.hpp"

namespace boxdeform {

namespace {

constexpr int kTargetSubdivisions = 3;

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

Eigen::Matrix3d random_rotation(Rng& rng) {
  // Uniform quaternion (Shoemake).
  const double u1 = uniform01(rng);
  const double u2 = uniform01(rng) * 2.0 * M_PI;
  const double u3 = uniform01(rng) * 2.0 * M_PI;
  const double a = std::sqrt(1.0 - u1);
  const double b = std::sqrt(u1);
  Eigen::Quaterniond q(b * std::cos(u3), a * std::sin(u2), a * std::cos(u2), b * std::sin(u3));
  return q.normalized().toRotationMatrix();
}

ObbNode random_box(Rng& rng) {
  ObbNode box;
  box.axes = random_rotation(rng);
  box.extents = Vec3(uniform(rng, 0.3, 0.7), uniform(rng, 0.3, 0.7), uniform(rng, 0.3, 0.7));
  box.center = Vec3(uniform(rng, -0.1, 0.1), uniform(rng, -0.1, 0.1), uniform(rng, -0.1, 0.1));
  return box;
}

DatasetPair make_pair(std::string id, ObbNode structure, TriangleMesh target,
                      int source_subdivisions) {
  DatasetPair pair;
  pair.id = std::move(id);
  pair.source = mesh_structure(structure, source_subdivisions);
  pair.structure = std::move(structure);
  pair.target = std::move(target);
  return pair;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void DatasetPair::validate() const {
  if (target.num_vertices() == 0 || target.num_faces() == 0) {
    throw GeometryError("dataset pair '" + id + "': empty target mesh");
  }
  if (source.num_vertices() == 0 || source.num_faces() == 0) {
    throw GeometryError("dataset pair '" + id + "': empty source mesh");
  }
  if (structure) structure->validate();
}

const std::vector<std::string>& fixture_kinds() {
  static const std::vector<std::string> kinds = {"cube-to-sphere", "box-to-ellipsoid",
                                                 "two-box-chair", "random-box-smooth"};
  return kinds;
}

std::vector<DatasetPair> make_fixtures(const std::string& kind, std::uint64_t seed,
                                       int source_subdivisions) {
  Rng rng(seed);
  const std::string id = kind + "-" + std::to_string(seed);
  std::vector<DatasetPair> out;
  if (kind == "cube-to-sphere") {
    ObbNode cube;
    cube.extents = Vec3::Constant(0.5);
    out.push_back(make_pair(id, cube, icosphere(kTargetSubdivisions, 1.0), source_subdivisions));
  } else if (kind == "box-to-ellipsoid") {
    ObbNode box = random_box(rng);
    TriangleMesh target = rounded_box(box, kTargetSubdivisions, 2.0, 1.2);
    out.push_back(make_pair(id, box, std::move(target), source_subdivisions));
  } else if (kind == "two-box-chair") {
    const double width = uniform(rng, 0.45, 0.55);
    const double depth = uniform(rng, 0.45, 0.55);
    const double seat_half = uniform(rng, 0.07, 0.1);
    const double back_half_height = uniform(rng, 0.4, 0.5);
    const double back_half_depth = uniform(rng, 0.06, 0.09);
    const double gap = 0.15;

    ObbNode seat;
    seat.center = Vec3(0.0, 0.0, 0.0);
    seat.extents = Vec3(width, seat_half, depth);
    ObbNode back;
    back.center = Vec3(0.0, seat_half + gap + back_half_height, -depth + back_half_depth);
    back.extents = Vec3(width, back_half_height, back_half_depth);

    ObbNode chair;
    chair.center = Vec3(0.0, 0.5 * (back.center.y() + back_half_height - seat_half), 0.0);
    chair.extents = Vec3(width, 0.5 * (2.0 * seat_half + gap + 2.0 * back_half_height), depth);
    chair.children = {seat, back};

    const std::vector<TriangleMesh> parts = {
        rounded_box(seat, kTargetSubdivisions, 4.0, 1.05),
        rounded_box(back, kTargetSubdivisions, 4.0, 1.05)};
    out.push_back(make_pair(id, chair, concatenate(parts), source_subdivisions));
  } else if (kind == "random-box-smooth") {
    ObbNode box = random_box(rng);
    TriangleMesh target = rounded_box(box, kTargetSubdivisions, 4.0, 1.1);
    out.push_back(make_pair(id, box, std::move(target), source_subdivisions));
  } else {
    std::string valid;
    for (const auto& k : fixture_kinds()) valid += (valid.empty() ? "" : ", ") + k;
    throw std::invalid_argument("unknown fixture kind '" + kind + "' (valid: " + valid + ")");
  }
  return out;
}

void write_dataset(const std::filesystem::path& dir, const std::vector<DatasetPair>& pairs) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["pairs"] = nlohmann::json::array();
  for (const auto& p : pairs) {
    nlohmann::json entry;
    entry["id"] = p.id;
    entry["source"] = p.id + ".source.obj";
    entry["target"] = p.id + ".target.obj";
    write_obj(dir / (p.id + ".source.obj"), p.source);
    write_obj(dir / (p.id + ".target.obj"), p.target);
    if (p.structure) {
      entry["structure"] = p.id + ".source.json";
      std::ofstream js(dir / (p.id + ".source.json"), std::ios::binary);
      js << structure_to_json(*p.structure) << '\n';
    } else {
      entry["structure"] = nullptr;
    }
    manifest["pairs"].push_back(entry);
  }
  std::ofstream out(dir / "dataset.json", std::ios::binary);
  out << manifest.dump(2) << '\n';
  if (!out) throw FormatError("cannot write " + (dir / "dataset.json").string());
}

std::vector<DatasetPair> read_dataset(const std::filesystem::path& manifest_path) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_text(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("dataset manifest: " + std::string(e.what()));
  }
  const auto dir = manifest_path.parent_path();
  std::vector<DatasetPair> pairs;
  if (!manifest.contains("pairs") || !manifest["pairs"].is_array()) {
    throw FormatError("dataset manifest: missing 'pairs' array");
  }
  for (const auto& entry : manifest["pairs"]) {
    DatasetPair p;
    try {
      p.id = entry.at("id").get<std::string>();
      p.source = read_obj(dir / entry.at("source").get<std::string>());
      p.target = read_obj(dir / entry.at("target").get<std::string>());
      if (entry.contains("structure") && !entry["structure"].is_null()) {
        p.structure = structure_from_json(
            read_text(dir / entry["structure"].get<std::string>()));
      }
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("dataset manifest entry: " + std::string(e.what()));
    }
    p.validate();
    pairs.push_back(std::move(p));
  }
  if (pairs.empty()) throw EmptyInputError("dataset manifest lists no pairs");
  return pairs;
}

}  // namespace boxdeform
