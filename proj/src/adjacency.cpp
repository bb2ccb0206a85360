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

#include "boxdeform/adjacency.hpp"

#include <cmath>
#include <stdexcept>

#include "boxdeform/errors.hpp"

namespace boxdeform {

Normalization parse_normalization(const std::string& name) {
  if (name == "symmetric") return Normalization::kSymmetric;
  if (name == "row") return Normalization::kRow;
  if (name == "raw") return Normalization::kRaw;
  throw std::invalid_argument("unknown normalization '" + name +
                              "' (expected symmetric, row or raw)");
}

std::string to_string(Normalization n) {
  switch (n) {
    case Normalization::kSymmetric:
      return "symmetric";
    case Normalization::kRow:
      return "row";
    case Normalization::kRaw:
      return "raw";
  }
  return "symmetric";
}

AdjacencyOperator::AdjacencyOperator(SparseMatrix base, int hops)
    : base_(std::move(base)) {
  if (hops < 0) throw std::invalid_argument("adjacency hops must be >= 0");
  powers_.reserve(hops);
  if (hops >= 1) powers_.push_back(std::make_shared<const SparseMatrix>(base_));
  for (int k = 2; k <= hops; ++k) {
    SparseMatrix next = (*powers_.back() * base_).pruned(0.0);
    next.makeCompressed();
    powers_.push_back(std::make_shared<const SparseMatrix>(std::move(next)));
  }
}

const std::shared_ptr<const SparseMatrix>& AdjacencyOperator::shared_power(
    int k) const {
  if (k < 1 || k > hops()) {
    throw std::out_of_range("adjacency power " + std::to_string(k) +
                            " outside [1, " + std::to_string(hops()) + "]");
  }
  return powers_[k - 1];
}

AdjacencyOperator build_adjacency(const TriangleMesh& mesh, int hops,
                                  Normalization mode) {
  return build_adjacency(mesh.num_vertices(), mesh.edges(), hops, mode);
}

AdjacencyOperator build_adjacency(int n, std::span<const Edge> graph_edges, int hops,
                                  Normalization mode) {
  if (n <= 0) throw EmptyInputError("build_adjacency: graph has no vertices");
  const std::vector<Edge> edges = canonical_edges(n, graph_edges);

  const bool self_loops = mode != Normalization::kRaw;
  std::vector<double> degree(n, self_loops ? 1.0 : 0.0);
  for (const auto& [a, b] : edges) {
    degree[a] += 1.0;
    degree[b] += 1.0;
  }

  auto weight = [&](int i, int j) {
    switch (mode) {
      case Normalization::kSymmetric:
        return 1.0 / std::sqrt(degree[i] * degree[j]);
      case Normalization::kRow:
        return 1.0 / degree[i];
      case Normalization::kRaw:
        return 1.0;
    }
    return 1.0;
  };

  std::vector<Eigen::Triplet<double>> coeffs;
  coeffs.reserve(n + 2 * edges.size());
  if (self_loops) {
    for (int i = 0; i < n; ++i) coeffs.emplace_back(i, i, weight(i, i));
  }
  for (const auto& [a, b] : edges) {
    coeffs.emplace_back(a, b, weight(a, b));
    coeffs.emplace_back(b, a, weight(b, a));
  }
  SparseMatrix base(n, n);
  base.setFromTriplets(coeffs.begin(), coeffs.end());
  base.makeCompressed();
  return AdjacencyOperator(std::move(base), hops);
}

}  // namespace boxdeform
