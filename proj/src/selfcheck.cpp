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

#include "boxdeform/selfcheck.hpp"

#include <array>

#include "boxdeform/losses.hpp"
#include "boxdeform/network.hpp"
#include "boxdeform/sampling.hpp"
#include "boxdeform/shapes.hpp"

namespace boxdeform {

namespace {

using ad::Tensor;

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = scale * (2.0 * uniform01(rng) - 1.0);
  return m;
}

// Icosahedron with jittered vertices: 12 vertices, irregular edge lengths.
TriangleMesh jittered_icosahedron(Rng& rng) {
  const TriangleMesh base = icosphere(0);
  return base.with_vertices(base.vertices() + random_matrix(12, 3, rng, 0.15));
}

TriangleMesh jittered_tetrahedron(Rng& rng) {
  Matrix v(4, 3);
  v << 1, 1, 1, 1, -1, -1, -1, 1, -1, -1, -1, 1;
  v *= 0.5;
  return TriangleMesh(v + random_matrix(4, 3, rng, 0.1), {{{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}}});
}

// Weighted quadratic readout so that every output entry matters differently.
Tensor readout(const Tensor& y, const Matrix& target) {
  Tape& tape = y.tape();
  return ad::reduce_sum(ad::square(ad::sub(y, tape.constant(target))));
}

// Rebuilds bound layers from a flat parameter list (parameters() order).
BoundLayer rebind_layer(const TagcnLayer& layer, std::span<const Tensor> params, size_t& cursor) {
  BoundLayer bound;
  bound.layer = &layer;
  for (size_t k = 0; k < layer.weights.size(); ++k) bound.weights.push_back(params[cursor++]);
  if (layer.has_bias()) bound.bias = params[cursor++];
  return bound;
}

std::vector<BoundBlock> rebind(const DeformationNetwork& net, std::span<const Tensor> params) {
  std::vector<BoundBlock> out;
  size_t cursor = 0;
  for (const auto& block : net.blocks()) {
    BoundBlock b;
    b.block = &block;
    for (const auto& layer : block.layers) b.layers.push_back(rebind_layer(layer, params, cursor));
    b.coordinate_branch = rebind_layer(block.coordinate_branch, params, cursor);
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<Matrix> layer_params(const TagcnLayer& layer) {
  std::vector<Matrix> out(layer.weights.begin(), layer.weights.end());
  if (layer.has_bias()) out.push_back(layer.bias);
  return out;
}

}  // namespace

std::vector<GradientCheck> run_gradient_suite(std::uint64_t seed,
                                              const ad::GradcheckOptions& options) {
  Rng rng(seed);
  std::vector<GradientCheck> results;
  auto check = [&](std::string name, const ad::ScalarFunction& f, std::vector<Matrix> params) {
    results.push_back({std::move(name), ad::gradcheck(f, std::move(params), options)});
  };

  const TriangleMesh ico = jittered_icosahedron(rng);

  for (Normalization mode : {Normalization::kSymmetric, Normalization::kRow, Normalization::kRaw}) {
    for (int hops = 0; hops <= 2; ++hops) {
      const AdjacencyOperator adj = build_adjacency(ico, hops, mode);
      TagcnLayer layer = TagcnLayer::zeros(3, 4, hops, true, Activation::kRelu);
      for (auto& w : layer.weights) w = random_matrix(3, 4, rng, 0.8);
      layer.bias = random_matrix(1, 4, rng, 0.3);
      const Matrix target = random_matrix(12, 4, rng);
      std::vector<Matrix> params = {random_matrix(12, 3, rng)};
      for (auto& m : layer_params(layer)) params.push_back(m);
      check("tagcn layer K=" + std::to_string(hops) + " " + to_string(mode),
            [layer, adj, target](Tape&, std::span<const Tensor> p) {
              size_t cursor = 1;
              BoundLayer bound = rebind_layer(layer, p, cursor);
              return readout(tagcn_forward(bound, adj, p[0]), target);
            },
            std::move(params));
    }
  }

  {
    const TriangleMesh cube = mesh_cuboid(ObbNode{}, 0);
    const AdjacencyOperator adj = build_adjacency(cube, 2, Normalization::kSymmetric);
    DeformationBlock block;
    block.residual_every = 2;
    int in = 3;
    for (int l = 0; l < 4; ++l) {
      block.layers.push_back(TagcnLayer::zeros(in, 5, 2, true, Activation::kRelu));
      in = 5;
    }
    block.coordinate_branch = TagcnLayer::zeros(5, 3, 2, true, Activation::kIdentity);
    std::vector<Matrix> params = {random_matrix(8, 3, rng)};
    auto fill = [&](TagcnLayer& layer) {
      for (auto& w : layer.weights) w = random_matrix(w.rows(), w.cols(), rng, 0.7);
      layer.bias = random_matrix(1, layer.out_channels, rng, 0.2);
      for (auto& m : layer_params(layer)) params.push_back(m);
    };
    for (auto& layer : block.layers) fill(layer);
    fill(block.coordinate_branch);
    const Matrix target = random_matrix(8, 3, rng);
    check("deformation block",
          [block, adj, target](Tape&, std::span<const Tensor> p) {
            BoundBlock bound;
            bound.block = &block;
            size_t cursor = 1;
            for (const auto& layer : block.layers) bound.layers.push_back(rebind_layer(layer, p, cursor));
            bound.coordinate_branch = rebind_layer(block.coordinate_branch, p, cursor);
            return readout(block_forward(bound, adj, p[0], p[0]).predicted, target);
          },
          std::move(params));
  }

  for (bool mean : {false, true}) {
    check(mean ? "chamfer (mean)" : "chamfer",
          [mean](Tape&, std::span<const Tensor> p) { return chamfer_loss(p[0], p[1], mean); },
          {random_matrix(10, 3, rng), random_matrix(12, 3, rng)});
  }

  {
    const Matrix target = random_matrix(40, 3, rng);
    const std::uint64_t sample_seed = rng();
    check("chamfer through surface sampling",
          [ico, target, sample_seed](Tape& tape, std::span<const Tensor> p) {
            Rng draw(sample_seed);
            SampleBatch samples = sample_surface(ico, p[0], 30, draw);
            return chamfer_loss(samples.points, tape.constant(target));
          },
          {ico.vertices()});
  }

  {
    const Matrix before = ico.vertices();
    check("laplacian loss",
          [ico, before](Tape& tape, std::span<const Tensor> p) {
            return laplacian_loss(ico, tape.constant(before), p[0]);
          },
          {before + random_matrix(12, 3, rng, 0.2)});
    check("edge loss",
          [ico](Tape&, std::span<const Tensor> p) { return edge_loss(ico, p[0]); },
          {ico.vertices()});
  }

  {
    NetworkConfig config;
    config.hops = 2;
    config.channels = 4;
    config.layers_per_block = 2;
    config.blocks = 2;
    config.seed = rng();
    DeformationNetwork net(config);
    for (auto& p : net.parameters()) *p.value = random_matrix(p.value->rows(), p.value->cols(), rng, 0.5);
    const TriangleMesh source = jittered_tetrahedron(rng);
    const TriangleMesh target = jittered_icosahedron(rng);
    const auto plan = std::make_shared<NetworkPlan>(plan_network(config, source));
    auto operators = std::make_shared<std::vector<StageOperators>>();
    for (const auto& stage : plan->stages) operators->push_back(stage_operators(stage.topology));
    const std::uint64_t sample_seed = rng();
    std::vector<Matrix> params;
    for (const auto& [name, m] : std::as_const(net).parameters()) params.push_back(*m);
    check("total loss through two blocks",
          [net, plan, operators, target, sample_seed](Tape& tape, std::span<const Tensor> p) {
            const std::vector<BoundBlock> bound = rebind(net, p);
            NetworkTrace trace = network_forward(bound, *plan, tape);
            Rng draw(sample_seed);
            SampleBatch truth = sample_surface(target, tape.constant(target.vertices()), 25, draw);
            std::vector<BlockLossInput> inputs;
            for (size_t b = 0; b < trace.stages.size(); ++b) {
              BlockLossInput in;
              in.operators = &(*operators)[b];
              in.input_positions = trace.stages[b].input_positions;
              in.predicted = trace.stages[b].predicted;
              in.predicted_samples = sample_surface((*operators)[b].topology, in.predicted, 25, draw);
              inputs.push_back(std::move(in));
            }
            return total_loss(inputs, truth, LossWeights{}).total;
          },
          std::move(params));
  }

  return results;
}

}  // namespace boxdeform
