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
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "boxdeform/adjacency.hpp"
#include "boxdeform/autodiff.hpp"
#include "boxdeform/mesh.hpp"

namespace boxdeform {

using ad::Activation;
using ad::Tape;
using ad::Tensor;

/// Topology-adaptive graph convolution.
///
///   Y = f( sum_{k=0..K} A^k X W_k + 1 b^T )
///
/// with A the normalized adjacency and A^0 = I. The weights do not depend on
/// the vertex count, so one layer applies to meshes of any connectivity.
struct TagcnLayer {
  int in_channels = 0;
  int out_channels = 0;
  std::vector<Matrix> weights;  // K + 1 matrices, each in x out
  Matrix bias;                  // 1 x out, or empty when disabled
  Activation activation = Activation::kRelu;

  int hops() const { return static_cast<int>(weights.size()) - 1; }
  bool has_bias() const { return bias.size() > 0; }

  // Weights uniform in (-s, s) with s = sqrt(6 / ((hops + 1) * in + out)), the
  // Glorot bound for the stacked hop weights; bias zero.
  static TagcnLayer random(int in, int out, int hops, bool use_bias,
                           Activation activation, std::mt19937_64& rng);
  static TagcnLayer zeros(int in, int out, int hops, bool use_bias,
                          Activation activation);
};

// A layer's parameters as leaves on a tape.
struct BoundLayer {
  const TagcnLayer* layer = nullptr;
  std::vector<Tensor> weights;
  Tensor bias;
};

BoundLayer bind_layer(Tape& tape, const TagcnLayer& layer, bool requires_grad);

// Throws DimensionError when x is not (adj vertices) x (in channels) or the
// layer needs more hops than the operator holds.
Tensor tagcn_forward(const BoundLayer& layer, const AdjacencyOperator& adj,
                     const Tensor& x);
// Binds the layer as constants on x's tape.
Tensor tagcn_forward(const TagcnLayer& layer, const AdjacencyOperator& adj,
                     const Tensor& x);

/// Stack of TAGCN layers with identity shortcuts and a coordinate branch.
///
/// With residual_every = r > 0, layer i (1-based) for i > r and
/// (i - 1) % r == 0 adds the output of layer i - r after its activation.
/// The coordinate branch is a linear TAGCN layer on the last activations whose
/// three output columns are a displacement of the block's input positions.
struct DeformationBlock {
  std::vector<TagcnLayer> layers;
  TagcnLayer coordinate_branch;
  int residual_every = 2;

  int input_width() const { return layers.front().in_channels; }
  bool receives_shortcut(int layer_index_1based) const;
};

struct BlockResult {
  Tensor predicted;  // V x 3
  Tensor features;   // V x channels
};

struct BoundBlock {
  const DeformationBlock* block = nullptr;
  std::vector<BoundLayer> layers;
  BoundLayer coordinate_branch;
};

BoundBlock bind_block(Tape& tape, const DeformationBlock& block,
                      bool requires_grad);

BlockResult block_forward(const BoundBlock& block, const AdjacencyOperator& adj,
                          const Tensor& positions, const Tensor& features);

// Midpoint unpooling of a mesh and per-vertex feature rows. New vertices get
// the mean of their edge endpoints; original rows are kept in place.
std::pair<TriangleMesh, Matrix> graph_unpool(const TriangleMesh& mesh,
                                             const Matrix& features);

}  // namespace boxdeform
