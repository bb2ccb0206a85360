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

#include "boxdeform/network.hpp"

#include <array>
#include <bit>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>

#include "boxdeform/errors.hpp"

namespace boxdeform {

namespace {

constexpr std::array<char, 8> kMagic = {'S', 'T', 'D', 'N', '0', '0', '0', '1'};

void write_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> bytes{};
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(bytes.data(), 8);
}

std::uint64_t read_u64(std::istream& in) {
  std::array<unsigned char, 8> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), 8);
  if (!in) throw FormatError("checkpoint truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

std::string layer_prefix(int block, const std::string& layer) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "block%d.%s", block, layer.c_str());
  return buf;
}

template <typename Net, typename Fn>
void visit_parameters(Net& net, Fn&& fn) {
  auto& blocks = net.blocks();
  for (size_t b = 0; b < blocks.size(); ++b) {
    auto visit_layer = [&](auto& layer, const std::string& label) {
      const std::string prefix = layer_prefix(static_cast<int>(b), label);
      for (size_t k = 0; k < layer.weights.size(); ++k) {
        fn(prefix + ".w" + std::to_string(k), layer.weights[k]);
      }
      if (layer.has_bias()) fn(prefix + ".bias", layer.bias);
    };
    for (size_t l = 0; l < blocks[b].layers.size(); ++l) {
      char label[32];
      std::snprintf(label, sizeof(label), "layer%02zu", l + 1);
      visit_layer(blocks[b].layers[l], label);
    }
    visit_layer(blocks[b].coordinate_branch, "coord");
  }
}

}  // namespace

void NetworkConfig::validate() const {
  if (hops < 0) throw std::invalid_argument("network config: hops must be >= 0");
  if (channels < 1) throw std::invalid_argument("network config: channels must be >= 1");
  if (layers_per_block < 1) {
    throw std::invalid_argument("network config: layers_per_block must be >= 1");
  }
  if (blocks < 1) throw std::invalid_argument("network config: blocks must be >= 1");
  if (residual_every < 0) {
    throw std::invalid_argument("network config: residual_every must be >= 0");
  }
}

void to_json(nlohmann::json& j, const NetworkConfig& c) {
  j = nlohmann::json{{"hops", c.hops},
                     {"channels", c.channels},
                     {"layers_per_block", c.layers_per_block},
                     {"blocks", c.blocks},
                     {"normalization", to_string(c.normalization)},
                     {"residual_every", c.residual_every},
                     {"use_bias", c.use_bias},
                     {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, NetworkConfig& c) {
  c.hops = j.value("hops", c.hops);
  c.channels = j.value("channels", c.channels);
  c.layers_per_block = j.value("layers_per_block", c.layers_per_block);
  c.blocks = j.value("blocks", c.blocks);
  if (j.contains("normalization")) {
    c.normalization = parse_normalization(j.at("normalization").get<std::string>());
  }
  c.residual_every = j.value("residual_every", c.residual_every);
  c.use_bias = j.value("use_bias", c.use_bias);
  c.seed = j.value("seed", c.seed);
}

DeformationNetwork::DeformationNetwork(const NetworkConfig& config) : config_(config) {
  config_.validate();
  std::mt19937_64 rng(config_.seed);
  for (int b = 0; b < config_.blocks; ++b) {
    DeformationBlock block;
    block.residual_every = config_.residual_every;
    int in = b == 0 ? 3 : 3 + config_.channels;
    for (int l = 0; l < config_.layers_per_block; ++l) {
      block.layers.push_back(TagcnLayer::random(in, config_.channels, config_.hops,
                                                config_.use_bias, Activation::kRelu, rng));
      in = config_.channels;
    }
    block.coordinate_branch = TagcnLayer::zeros(config_.channels, 3, config_.hops,
                                                config_.use_bias, Activation::kIdentity);
    blocks_.push_back(std::move(block));
  }
}

DeformationNetwork DeformationNetwork::zeros(const NetworkConfig& config) {
  DeformationNetwork net(config);
  for (auto& p : net.parameters()) p.value->setZero();
  return net;
}

std::vector<NamedParameter> DeformationNetwork::parameters() {
  std::vector<NamedParameter> out;
  visit_parameters(*this, [&](std::string name, Matrix& m) {
    out.push_back({std::move(name), &m});
  });
  return out;
}

std::vector<std::pair<std::string, const Matrix*>> DeformationNetwork::parameters() const {
  std::vector<std::pair<std::string, const Matrix*>> out;
  visit_parameters(*this, [&](std::string name, const Matrix& m) {
    out.emplace_back(std::move(name), &m);
  });
  return out;
}

size_t DeformationNetwork::parameter_count() const {
  size_t n = 0;
  for (const auto& [name, m] : parameters()) n += static_cast<size_t>(m->size());
  return n;
}

NetworkPlan plan_network(const NetworkConfig& config, const TriangleMesh& initial) {
  config.validate();
  NetworkPlan plan;
  TriangleMesh mesh = initial;
  for (int b = 0; b < config.blocks; ++b) {
    NetworkPlan::Stage stage;
    stage.adjacency = build_adjacency(mesh, config.hops, config.normalization);
    if (b + 1 < config.blocks) {
      SubdivisionPlan sub = plan_subdivision(mesh);
      Matrix next_positions = sub.interpolation * mesh.vertices();
      stage.unpool = std::make_shared<const SparseMatrix>(std::move(sub.interpolation));
      stage.topology = mesh;
      mesh = TriangleMesh(std::move(next_positions), std::move(sub.faces));
    } else {
      stage.topology = mesh;
    }
    plan.stages.push_back(std::move(stage));
  }
  return plan;
}

std::vector<BoundBlock> bind_network(Tape& tape, const DeformationNetwork& net,
                                     bool requires_grad) {
  std::vector<BoundBlock> bound;
  for (const auto& block : net.blocks()) bound.push_back(bind_block(tape, block, requires_grad));
  return bound;
}

std::vector<Tensor> parameter_leaves(std::span<const BoundBlock> bound) {
  std::vector<Tensor> out;
  auto append = [&](const BoundLayer& l) {
    out.insert(out.end(), l.weights.begin(), l.weights.end());
    if (l.bias.valid()) out.push_back(l.bias);
  };
  for (const auto& b : bound) {
    for (const auto& l : b.layers) append(l);
    append(b.coordinate_branch);
  }
  return out;
}

NetworkTrace network_forward(std::span<const BoundBlock> bound, const NetworkPlan& plan,
                             Tape& tape) {
  if (plan.stages.size() != bound.size()) {
    throw DimensionError("network_forward: plan has " + std::to_string(plan.stages.size()) +
                         " stages for " + std::to_string(bound.size()) + " blocks");
  }
  NetworkTrace trace;
  trace.parameters = parameter_leaves(bound);

  Tensor positions = tape.borrow(plan.stages.front().topology.vertices(), false);
  Tensor features = positions;
  for (size_t b = 0; b < bound.size(); ++b) {
    const auto& stage = plan.stages[b];
    BlockResult result = block_forward(bound[b], stage.adjacency, positions, features);
    trace.stages.push_back({positions, result.predicted});
    if (stage.unpool) {
      positions = ad::spmm(stage.unpool, result.predicted);
      Tensor pooled = ad::spmm(stage.unpool, result.features);
      const std::array<Tensor, 2> parts = {positions, pooled};
      features = ad::concat_cols(parts);
    }
  }
  return trace;
}

NetworkTrace network_forward(const DeformationNetwork& net, const NetworkPlan& plan,
                             Tape& tape, bool requires_grad) {
  const std::vector<BoundBlock> bound = bind_network(tape, net, requires_grad);
  return network_forward(bound, plan, tape);
}

std::vector<TriangleMesh> network_forward(const DeformationNetwork& net,
                                          const TriangleMesh& initial) {
  NetworkPlan plan = plan_network(net.config(), initial);
  Tape tape;
  NetworkTrace trace = network_forward(net, plan, tape, false);
  std::vector<TriangleMesh> out;
  for (size_t b = 0; b < trace.stages.size(); ++b) {
    out.push_back(plan.stages[b].topology.with_vertices(trace.stages[b].predicted.value()));
  }
  return out;
}

void save_checkpoint(std::ostream& out, const DeformationNetwork& net) {
  nlohmann::json header;
  header["config"] = net.config();
  header["parameters"] = nlohmann::json::array();
  const auto params = net.parameters();
  for (const auto& [name, m] : params) {
    header["parameters"].push_back({{"name", name}, {"shape", {m->rows(), m->cols()}}});
  }
  const std::string text = header.dump();
  out.write(kMagic.data(), kMagic.size());
  write_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, m] : params) {
    for (Eigen::Index r = 0; r < m->rows(); ++r)
      for (Eigen::Index c = 0; c < m->cols(); ++c)
        write_u64(out, std::bit_cast<std::uint64_t>((*m)(r, c)));
  }
  if (!out) throw FormatError("failed writing checkpoint");
}

void save_checkpoint(const std::filesystem::path& path, const DeformationNetwork& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write checkpoint " + path.string());
  save_checkpoint(out, net);
}

DeformationNetwork load_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw FormatError("not a checkpoint (bad magic bytes)");
  const std::uint64_t length = read_u64(in);
  if (length > (1u << 26)) throw FormatError("checkpoint header too large");
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (!in) throw FormatError("checkpoint truncated in header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint header: ") + e.what());
  }
  NetworkConfig config;
  try {
    config = header.at("config").get<NetworkConfig>();
    config.validate();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("checkpoint config: ") + e.what());
  }
  DeformationNetwork net(config);
  auto params = net.parameters();
  try {
    const auto& listed = header.at("parameters");
    if (listed.size() != params.size()) {
      throw FormatError("checkpoint lists " + std::to_string(listed.size()) +
                        " parameters, config implies " + std::to_string(params.size()));
    }
    for (size_t i = 0; i < params.size(); ++i) {
      const auto& entry = listed[i];
      const auto name = entry.at("name").get<std::string>();
      const auto shape = entry.at("shape").get<std::vector<Eigen::Index>>();
      Matrix& m = *params[i].value;
      if (name != params[i].name || shape.size() != 2 || shape[0] != m.rows() ||
          shape[1] != m.cols()) {
        throw FormatError("checkpoint parameter " + std::to_string(i) + " ('" + name +
                          "') does not match the network layout");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint parameter list: ") + e.what());
  }
  for (auto& p : params) {
    Matrix& m = *p.value;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        m(r, c) = std::bit_cast<double>(read_u64(in));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("checkpoint has trailing bytes after the parameter values");
  }
  return net;
}

DeformationNetwork load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  return load_checkpoint(in);
}

}  // namespace boxdeform
