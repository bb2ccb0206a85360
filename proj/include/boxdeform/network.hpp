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
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "boxdeform/tagcn.hpp"

namespace boxdeform {

struct NetworkConfig {
  int hops = 2;
  int channels = 192;
  int layers_per_block = 14;
  int blocks = 3;
  Normalization normalization = Normalization::kSymmetric;
  int residual_every = 2;
  bool use_bias = true;
  std::uint64_t seed = 0;

  void validate() const;
};

void to_json(nlohmann::json& j, const NetworkConfig& c);
void from_json(const nlohmann::json& j, NetworkConfig& c);

struct NamedParameter {
  std::string name;
  Matrix* value;
};

/// Blocks of TAGCN layers separated by midpoint unpooling.
///
/// Block 1 sees the raw vertex coordinates (3 channels). Later blocks see the
/// unpooled positions concatenated with the unpooled features of the previous
/// block (3 + channels). Coordinate branches start at zero, so a fresh network
/// is the identity deformation.
class DeformationNetwork {
 public:
  explicit DeformationNetwork(const NetworkConfig& config = {});

  // Every weight and bias set to zero.
  static DeformationNetwork zeros(const NetworkConfig& config);

  const NetworkConfig& config() const { return config_; }
  const std::vector<DeformationBlock>& blocks() const { return blocks_; }
  std::vector<DeformationBlock>& blocks() { return blocks_; }

  // Stable order: block, layer, then weights W_0..W_K and bias.
  std::vector<NamedParameter> parameters();
  std::vector<std::pair<std::string, const Matrix*>> parameters() const;
  size_t parameter_count() const;

 private:
  NetworkConfig config_;
  std::vector<DeformationBlock> blocks_;
};

/// Topology-dependent data for running a network on one initial mesh.
struct NetworkPlan {
  struct Stage {
    TriangleMesh topology;  // positions are those of the zero deformation
    AdjacencyOperator adjacency;
    std::shared_ptr<const SparseMatrix> unpool;  // to the next stage; null for last
  };
  std::vector<Stage> stages;
};

NetworkPlan plan_network(const NetworkConfig& config, const TriangleMesh& initial);

struct StageOutput {
  Tensor input_positions;  // positions entering the block
  Tensor predicted;        // positions leaving the block
};

struct NetworkTrace {
  std::vector<StageOutput> stages;
  std::vector<Tensor> parameters;  // same order as DeformationNetwork::parameters()
};

std::vector<BoundBlock> bind_network(Tape& tape, const DeformationNetwork& net,
                                     bool requires_grad);

// Parameter leaves of bound blocks, in DeformationNetwork::parameters() order.
std::vector<Tensor> parameter_leaves(std::span<const BoundBlock> bound);

NetworkTrace network_forward(std::span<const BoundBlock> bound, const NetworkPlan& plan,
                             Tape& tape);
NetworkTrace network_forward(const DeformationNetwork& net, const NetworkPlan& plan,
                             Tape& tape, bool requires_grad);

// One predicted mesh per block, without gradient recording.
std::vector<TriangleMesh> network_forward(const DeformationNetwork& net,
                                          const TriangleMesh& initial);

// Layout: "STDN0001", uint64 little-endian header byte count, JSON header
// {config, parameters: [{name, shape}]}, then each parameter's values as
// little-endian float64 in row-major order.
void save_checkpoint(std::ostream& out, const DeformationNetwork& net);
void save_checkpoint(const std::filesystem::path& path, const DeformationNetwork& net);
DeformationNetwork load_checkpoint(std::istream& in);
DeformationNetwork load_checkpoint(const std::filesystem::path& path);

}  // namespace boxdeform
