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

#include "boxdeform/tagcn.hpp"

#include <cmath>

#include "boxdeform/errors.hpp"

namespace boxdeform {

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

TagcnLayer TagcnLayer::random(int in, int out, int hops, bool use_bias,
                              Activation activation, std::mt19937_64& rng) {
  TagcnLayer layer = zeros(in, out, hops, use_bias, activation);
  const double s = std::sqrt(6.0 / static_cast<double>((hops + 1) * in + out));
  for (Matrix& w : layer.weights) {
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = s * (2.0 * uniform01(rng) - 1.0);
  }
  return layer;
}

TagcnLayer TagcnLayer::zeros(int in, int out, int hops, bool use_bias,
                             Activation activation) {
  if (in <= 0 || out <= 0 || hops < 0) {
    throw std::invalid_argument("TagcnLayer: channels must be positive and hops >= 0");
  }
  TagcnLayer layer;
  layer.in_channels = in;
  layer.out_channels = out;
  layer.activation = activation;
  layer.weights.assign(hops + 1, Matrix::Zero(in, out));
  if (use_bias) layer.bias = Matrix::Zero(1, out);
  return layer;
}

BoundLayer bind_layer(Tape& tape, const TagcnLayer& layer, bool requires_grad) {
  BoundLayer bound;
  bound.layer = &layer;
  for (const Matrix& w : layer.weights) bound.weights.push_back(tape.borrow(w, requires_grad));
  if (layer.has_bias()) bound.bias = tape.borrow(layer.bias, requires_grad);
  return bound;
}

Tensor tagcn_forward(const BoundLayer& bound, const AdjacencyOperator& adj,
                     const Tensor& x) {
  const TagcnLayer& layer = *bound.layer;
  if (x.rows() != adj.num_vertices() || x.cols() != layer.in_channels) {
    throw DimensionError("tagcn_forward: expected input (" +
                         std::to_string(adj.num_vertices()) + "x" +
                         std::to_string(layer.in_channels) + "), got (" +
                         std::to_string(x.rows()) + "x" + std::to_string(x.cols()) + ")");
  }
  if (layer.hops() > adj.hops()) {
    throw DimensionError("tagcn_forward: layer uses " + std::to_string(layer.hops()) +
                         " hops but adjacency holds " + std::to_string(adj.hops()));
  }
  Tensor y = ad::matmul(x, bound.weights[0]);
  for (int k = 1; k <= layer.hops(); ++k) {
    Tensor propagated = ad::spmm(adj.shared_power(k), x);
    y = ad::add(y, ad::matmul(propagated, bound.weights[k]));
  }
  if (layer.has_bias()) y = ad::add_row_broadcast(y, bound.bias);
  return ad::activate(y, layer.activation);
}

Tensor tagcn_forward(const TagcnLayer& layer, const AdjacencyOperator& adj,
                     const Tensor& x) {
  return tagcn_forward(bind_layer(x.tape(), layer, false), adj, x);
}

bool DeformationBlock::receives_shortcut(int i) const {
  return residual_every > 0 && i > residual_every && (i - 1) % residual_every == 0;
}

BoundBlock bind_block(Tape& tape, const DeformationBlock& block,
                      bool requires_grad) {
  BoundBlock bound;
  bound.block = &block;
  for (const auto& layer : block.layers) {
    bound.layers.push_back(bind_layer(tape, layer, requires_grad));
  }
  bound.coordinate_branch = bind_layer(tape, block.coordinate_branch, requires_grad);
  return bound;
}

BlockResult block_forward(const BoundBlock& bound, const AdjacencyOperator& adj,
                          const Tensor& positions, const Tensor& features) {
  const DeformationBlock& block = *bound.block;
  if (positions.rows() != features.rows() || positions.cols() != 3) {
    throw DimensionError("block_forward: positions must be Vx3 with one feature row per vertex");
  }
  std::vector<Tensor> outputs;
  outputs.reserve(block.layers.size());
  Tensor h = features;
  for (size_t i = 0; i < bound.layers.size(); ++i) {
    h = tagcn_forward(bound.layers[i], adj, h);
    const int index = static_cast<int>(i) + 1;
    if (block.receives_shortcut(index)) {
      h = ad::add(h, outputs[static_cast<size_t>(index - block.residual_every - 1)]);
    }
    outputs.push_back(h);
  }
  Tensor displacement = tagcn_forward(bound.coordinate_branch, adj, h);
  return {ad::add(positions, displacement), h};
}

std::pair<TriangleMesh, Matrix> graph_unpool(const TriangleMesh& mesh,
                                             const Matrix& features) {
  if (features.rows() != mesh.num_vertices()) {
    throw DimensionError("graph_unpool: " + std::to_string(features.rows()) +
                         " feature rows for " + std::to_string(mesh.num_vertices()) +
                         " vertices");
  }
  SubdivisionPlan plan = plan_subdivision(mesh);
  Matrix positions = plan.interpolation * mesh.vertices();
  Matrix unpooled = plan.interpolation * features;
  return {TriangleMesh(std::move(positions), std::move(plan.faces)), std::move(unpooled)};
}

}  // namespace boxdeform
