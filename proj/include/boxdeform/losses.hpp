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

#include <memory>
#include <span>
#include <vector>

#include <json.hpp>

#include "boxdeform/autodiff.hpp"
#include "boxdeform/mesh.hpp"
#include "boxdeform/sampling.hpp"

namespace boxdeform {

// For every row of `from`, the index of the nearest row of `to` by squared
// Euclidean distance; ties go to the lowest index.
std::vector<int> nearest_indices(const Matrix& from, const Matrix& to);
// Matching squared distances.
Eigen::VectorXd nearest_squared_distances(const Matrix& from, const Matrix& to);

// sum_x min_y |x - y|^2 + sum_y min_x |x - y|^2. With `mean`, each directional
// sum is divided by its point count. Throws EmptyInputError on an empty set.
ad::Tensor chamfer_loss(const ad::Tensor& m, const ad::Tensor& s, bool mean = false);
ad::Tensor chamfer_loss(const SampleBatch& m, const SampleBatch& s, bool mean = false);

// Rows: delta_p = p - (1/|N(p)|) sum_{q in N(p)} q. Isolated vertices get an
// all-zero row and so drop out of the Laplacian loss.
SparseMatrix laplacian_operator(const TriangleMesh& mesh);
SparseMatrix laplacian_operator(int num_vertices, std::span<const Edge> edges);
// One row per edge (a, b): +1 at a, -1 at b.
SparseMatrix edge_difference_operator(const TriangleMesh& mesh);
SparseMatrix edge_difference_operator(int num_vertices, std::span<const Edge> edges);

// sum_p |delta'_p - delta_p|^2 for positions before/after on the same topology.
ad::Tensor laplacian_loss(std::shared_ptr<const SparseMatrix> laplacian,
                          const ad::Tensor& before, const ad::Tensor& after);
ad::Tensor laplacian_loss(const TriangleMesh& topology, const ad::Tensor& before,
                          const ad::Tensor& after);

// sum_p sum_{q in N(p)} |p - q|^2; every edge contributes twice.
ad::Tensor edge_loss(std::shared_ptr<const SparseMatrix> edge_difference,
                     const ad::Tensor& positions);
ad::Tensor edge_loss(const TriangleMesh& topology, const ad::Tensor& positions);

struct LossWeights {
  double lambda_lap = 0.3;
  double lambda_edge = 0.1;
};

struct LossReport {
  double l_cd = 0.0;
  double l_lap = 0.0;
  double l_edge = 0.0;
  double total = 0.0;
  double lambda_lap = 0.3;
  double lambda_edge = 0.1;
};

void to_json(nlohmann::json& j, const LossReport& r);

// Topology-derived constant operators for one deformation stage.
struct StageOperators {
  TriangleMesh topology;
  std::shared_ptr<const SparseMatrix> laplacian;
  std::shared_ptr<const SparseMatrix> edge_difference;
};

StageOperators stage_operators(const TriangleMesh& topology);

struct BlockLossInput {
  const StageOperators* operators = nullptr;
  ad::Tensor input_positions;
  ad::Tensor predicted;
  SampleBatch predicted_samples;
  double weight = 1.0;  // 0 leaves the block unsupervised
};

struct TotalLoss {
  ad::Tensor total;                // weighted sum over blocks
  LossReport report;               // summed per term over supervised blocks
  std::vector<LossReport> blocks;  // per block, unweighted
};

// Per block: l_cd + lambda_lap l_lap + lambda_edge l_edge; blocks are summed.
TotalLoss total_loss(std::span<const BlockLossInput> blocks, const SampleBatch& target,
                     const LossWeights& weights, bool mean_chamfer = false);

}  // namespace boxdeform
