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
#include <string>
#include <vector>

#include "boxdeform/mesh.hpp"

namespace boxdeform {

enum class Normalization {
  kSymmetric,  // D^-1/2 (A + I) D^-1/2
  kRow,        // D^-1 (A + I)
  kRaw,        // A, no self-loops
};

Normalization parse_normalization(const std::string& name);
std::string to_string(Normalization n);

/// Normalized mesh adjacency with its first K powers.
///
/// `power(k)` for k in [1, K]; power(0) is the identity and is not stored.
class AdjacencyOperator {
 public:
  AdjacencyOperator() = default;
  AdjacencyOperator(SparseMatrix base, int hops);

  int num_vertices() const { return static_cast<int>(base_.rows()); }
  int hops() const { return static_cast<int>(powers_.size()); }
  const SparseMatrix& base() const { return base_; }
  const SparseMatrix& power(int k) const { return *shared_power(k); }
  const std::shared_ptr<const SparseMatrix>& shared_power(int k) const;

 private:
  SparseMatrix base_;
  std::vector<std::shared_ptr<const SparseMatrix>> powers_;
};

// Throws EmptyInputError for a mesh without vertices. `hops` may be 0, which
// yields an operator carrying only the base matrix and no powers.
AdjacencyOperator build_adjacency(const TriangleMesh& mesh, int hops,
                                  Normalization mode = Normalization::kSymmetric);
// Same for a bare graph given by its undirected edges.
AdjacencyOperator build_adjacency(int num_vertices, std::span<const Edge> edges, int hops,
                                  Normalization mode = Normalization::kSymmetric);

}  // namespace boxdeform
