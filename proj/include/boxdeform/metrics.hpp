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
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "boxdeform/dataset.hpp"
#include "boxdeform/network.hpp"

namespace boxdeform {

struct F1Score {
  double f1 = 0.0;         // percent
  double precision = 0.0;  // percent
  double recall = 0.0;     // percent
};

// A point matches when the squared distance to its nearest counterpart is at
// most d. Throws EmptyInputError for an empty set and invalid_argument for
// d <= 0.
F1Score f1_score(const Matrix& pred, const Matrix& gt, double d);

// Sum-convention chamfer between two point sets, computed by chamfer_loss on a
// tape that records no gradients.
double chamfer_distance(const Matrix& a, const Matrix& b, bool mean = false);

/// Cubic occupancy grid. Cell (i, j, k) spans origin + h * [i, i+1] x ...
struct VoxelGrid {
  int resolution = 0;
  Vec3 origin = Vec3::Zero();
  double cell = 0.0;
  std::vector<std::uint8_t> occupied;  // x fastest

  size_t index(int i, int j, int k) const {
    return (static_cast<size_t>(k) * resolution + j) * resolution + i;
  }
  size_t count() const;
};

// Cubic grid around both boxes: the joint bounding cube plus two empty cells
// of padding on every side.
VoxelGrid shared_grid(const TriangleMesh& a, const TriangleMesh& b, int resolution);

// Cells touched by a triangle (closed-box overlap test) are occupied; cells
// not reachable from the grid boundary through free cells are interior. With
// fill_interior false only the surface cells are marked.
void voxelize(const TriangleMesh& mesh, VoxelGrid& grid, bool fill_interior = true);

struct VoxelIou {
  double iou = 0.0;           // percent
  bool surface_only = false;  // a mesh was not closed; no interior fill
};

// Throws invalid_argument for resolution < 8, EmptyInputError for a mesh
// without faces.
VoxelIou voxel_iou(const TriangleMesh& a, const TriangleMesh& b, int resolution);

struct EvalConfig {
  int samples = 2500;
  double threshold = 1e-4;  // squared distance after normalization
  int resolution = 32;
  std::uint64_t seed = 0;
  int threads = 0;  // 0: STDNET_THREADS if set, else hardware concurrency
  bool mean_chamfer = false;
};

struct MetricReport {
  std::string id;
  double chamfer = 0.0;
  F1Score f1;
  double threshold = 0.0;
  double iou = 0.0;
  int resolution = 0;
  bool iou_surface_only = false;
  int samples = 0;
  bool mean_chamfer = false;
};

// Includes a "distance" field stating the convention used for chamfer and d.
nlohmann::json to_json(const MetricReport& r);

// Samples both meshes (seeded), scales them so the ground truth bounding box
// has longest side 1 and is centred at the origin, then computes chamfer and
// F1 on the samples and voxel IoU on the meshes.
MetricReport compare_meshes(const TriangleMesh& pred, const TriangleMesh& gt,
                            const EvalConfig& config, std::uint64_t seed,
                            std::string id = {});

struct Evaluation {
  std::vector<MetricReport> pairs;  // dataset order
  MetricReport mean;                // id "mean"
};

// Runs the network on every source mesh and compares the final block with
// the target. Pairs are evaluated in parallel; pair i uses seed + i.
Evaluation evaluate(const DeformationNetwork& net, std::span<const DatasetPair> dataset,
                    const EvalConfig& config = {});

// One JSON object per pair, then the aggregate.
void write_metrics_jsonl(std::ostream& out, const Evaluation& evaluation);

// STDNET_THREADS when it parses as a positive integer, else the number of
// hardware threads (at least 1).
int default_thread_count();

}  // namespace boxdeform
