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

#include <cstring>
#include <set>
#include <sstream>

#include "boxdeform/dataset.hpp"
#include "boxdeform/errors.hpp"
#include "boxdeform/network.hpp"
#include "support.hpp"

using namespace boxdeform;
using namespace boxdeform::testing;

namespace {

NetworkConfig small_config(int hops = 2) {
  NetworkConfig c;
  c.hops = hops;
  c.channels = 6;
  c.layers_per_block = 4;
  c.blocks = 3;
  c.seed = 5;
  return c;
}

size_t layer_params(int hops, int in, int out, bool bias) {
  return static_cast<size_t>((hops + 1) * in * out + (bias ? out : 0));
}

size_t count_oracle(const NetworkConfig& c) {
  size_t total = 0;
  for (int b = 0; b < c.blocks; ++b) {
    const int in = b == 0 ? 3 : 3 + c.channels;
    total += layer_params(c.hops, in, c.channels, c.use_bias);
    for (int l = 1; l < c.layers_per_block; ++l)
      total += layer_params(c.hops, c.channels, c.channels, c.use_bias);
    total += layer_params(c.hops, c.channels, 3, c.use_bias);
  }
  return total;
}

// Every vertex lies on the surface of the axis-aligned cube [-h, h]^3.
bool on_cube_surface(const TriangleMesh& m, double h) {
  for (int i = 0; i < m.num_vertices(); ++i) {
    const Vec3 p = m.vertex(i);
    if (p.cwiseAbs().maxCoeff() != h) return false;
  }
  return true;
}

// Randomizes every parameter so that forward passes are non-trivial.
void scramble(DeformationNetwork& net, std::uint64_t seed) {
  Rng rng(seed);
  for (auto& p : net.parameters()) *p.value = random_matrix(p.value->rows(), p.value->cols(), rng, 0.05);
}

std::string checkpoint_bytes(const DeformationNetwork& net) {
  std::ostringstream out;
  save_checkpoint(out, net);
  return out.str();
}

DeformationNetwork load_bytes(const std::string& bytes) {
  std::istringstream in(bytes);
  return load_checkpoint(in);
}

}  // namespace

TEST_CASE("parameter count matches the layer formula") {
  for (int hops : {0, 1, 2}) {
    const NetworkConfig c = small_config(hops);
    CHECK(DeformationNetwork(c).parameter_count() == count_oracle(c));
  }
  NetworkConfig nobias = small_config();
  nobias.use_bias = false;
  CHECK(DeformationNetwork(nobias).parameter_count() == count_oracle(nobias));
  // Default configuration.
  const NetworkConfig full;
  CHECK(DeformationNetwork(full).parameter_count() == count_oracle(full));
}

TEST_CASE("parameter names are unique and stable") {
  DeformationNetwork net(small_config());
  const auto params = net.parameters();
  std::set<std::string> names;
  size_t total = 0;
  for (const auto& p : params) {
    names.insert(p.name);
    total += static_cast<size_t>(p.value->size());
  }
  CHECK(names.size() == params.size());
  CHECK(total == net.parameter_count());
  const auto& cnet = net;
  const auto cparams = cnet.parameters();
  REQUIRE(cparams.size() == params.size());
  for (size_t i = 0; i < params.size(); ++i) {
    CHECK(cparams[i].first == params[i].name);
    CHECK(cparams[i].second == params[i].value);
  }
}

TEST_CASE("initialization is seeded") {
  const DeformationNetwork a(small_config());
  const DeformationNetwork b(small_config());
  NetworkConfig other = small_config();
  other.seed = 6;
  const DeformationNetwork c(other);
  CHECK(*a.parameters()[0].second == *b.parameters()[0].second);
  CHECK(*a.parameters()[0].second != *c.parameters()[0].second);
  for (const auto& block : a.blocks()) {
    for (const auto& w : block.coordinate_branch.weights) CHECK(w.isZero(0.0));
  }
}

TEST_CASE("fresh network is the identity deformation on a cube") {
  for (const DeformationNetwork& net : {DeformationNetwork(small_config()),
                                        DeformationNetwork::zeros(small_config())}) {
    const auto meshes = network_forward(net, unit_cube());
    REQUIRE(meshes.size() == 3);
    CHECK(meshes[0].num_vertices() == 8);
    CHECK(meshes[1].num_vertices() == 26);
    CHECK(meshes[2].num_vertices() == 98);
    CHECK(meshes[2].num_faces() == 192);
    for (const auto& m : meshes) {
      CHECK(on_cube_surface(m, 0.5));
      CHECK(m.is_closed());
    }
    CHECK(meshes[1].vertices() == unit_cube(1).vertices());
    CHECK(meshes[2].vertices() == unit_cube(2).vertices());
  }
}

TEST_CASE("vertex counts depend only on topology") {
  const DeformationNetwork net(small_config());
  ObbNode flat;
  flat.extents = Vec3(2.0, 0.1, 0.7);
  const auto meshes = network_forward(net, mesh_cuboid(flat, 0));
  CHECK(meshes[2].num_vertices() == 98);
}

TEST_CASE("one network runs on differing topologies") {
  DeformationNetwork net(small_config());
  scramble(net, 3);
  const auto chair = make_fixtures("two-box-chair", 1);
  REQUIRE_FALSE(chair.empty());
  const TriangleMesh& source = chair[0].source;
  CHECK(source.num_vertices() == 16);
  const auto chair_meshes = network_forward(net, source);
  CHECK(chair_meshes.back().num_vertices() == 2 * 98);
  CHECK(chair_meshes.back().vertices().allFinite());

  const auto box_meshes = network_forward(net, unit_cube());
  CHECK(box_meshes.back().num_vertices() == 98);
  CHECK(box_meshes.back().vertices().allFinite());
  CHECK_FALSE(on_cube_surface(box_meshes.back(), 0.5));
}

TEST_CASE("plan stages and forward trace") {
  const NetworkConfig c = small_config();
  const NetworkPlan plan = plan_network(c, unit_cube());
  REQUIRE(plan.stages.size() == 3);
  CHECK(plan.stages[0].unpool != nullptr);
  CHECK(plan.stages[1].unpool != nullptr);
  CHECK(plan.stages[2].unpool == nullptr);
  CHECK(plan.stages[0].unpool->rows() == 26);
  CHECK(plan.stages[0].unpool->cols() == 8);

  DeformationNetwork net(c);
  scramble(net, 4);
  Tape tape;
  const NetworkTrace trace = network_forward(net, plan, tape, true);
  CHECK(trace.parameters.size() == net.parameters().size());
  REQUIRE(trace.stages.size() == 3);
  // Each block starts from the unpooled prediction of the one before.
  const Matrix up = *plan.stages[0].unpool * trace.stages[0].predicted.value();
  CHECK(max_abs_diff(trace.stages[1].input_positions.value(), up) < 1e-15);

  // The no-grad overload gives the same meshes.
  const auto meshes = network_forward(net, unit_cube());
  for (size_t s = 0; s < 3; ++s) CHECK(meshes[s].vertices() == trace.stages[s].predicted.value());

  // A plan built for another config is rejected.
  NetworkConfig two = c;
  two.blocks = 2;
  const NetworkPlan short_plan = plan_network(two, unit_cube());
  Tape tape2;
  CHECK_THROWS_AS(network_forward(net, short_plan, tape2, false), DimensionError);
}

TEST_CASE("checkpoint round trip is bit identical") {
  DeformationNetwork net(small_config());
  scramble(net, 8);
  const std::string bytes = checkpoint_bytes(net);
  CHECK(bytes.substr(0, 8) == "STDN0001");
  DeformationNetwork back = load_bytes(bytes);
  CHECK(back.config().seed == net.config().seed);
  const auto a = net.parameters();
  const auto b = back.parameters();
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].name == b[i].name);
    CHECK(*a[i].value == *b[i].value);
  }
  const auto ma = network_forward(net, unit_cube());
  const auto mb = network_forward(back, unit_cube());
  CHECK(ma.back().vertices() == mb.back().vertices());
  CHECK(checkpoint_bytes(back) == bytes);

  const auto path = std::filesystem::temp_directory_path() / "boxdeform_test_net.stdn";
  save_checkpoint(path, net);
  CHECK(checkpoint_bytes(load_checkpoint(path)) == bytes);
  std::filesystem::remove(path);
}

TEST_CASE("corrupt checkpoints are rejected") {
  const DeformationNetwork net(small_config());
  const std::string bytes = checkpoint_bytes(net);

  std::string magic = bytes;
  magic[3] = 'X';
  CHECK_THROWS_AS(load_bytes(magic), FormatError);
  CHECK_THROWS_AS(load_bytes(bytes.substr(0, bytes.size() - 5)), FormatError);
  CHECK_THROWS_AS(load_bytes(bytes.substr(0, 12)), FormatError);
  CHECK_THROWS_AS(load_bytes(""), FormatError);
  CHECK_THROWS_AS(load_checkpoint(std::filesystem::path("/nonexistent/x.stdn")), FormatError);

  // Header whose shapes disagree with the configuration.
  std::uint64_t header_size = 0;
  std::memcpy(&header_size, bytes.data() + 8, 8);
  auto header = nlohmann::json::parse(bytes.substr(16, header_size));
  header["parameters"][0]["shape"][1] = 7;
  const std::string text = header.dump();
  std::string mismatched = bytes.substr(0, 8);
  const std::uint64_t n = text.size();
  mismatched.append(reinterpret_cast<const char*>(&n), 8);
  mismatched += text;
  mismatched += bytes.substr(16 + header_size);
  CHECK_THROWS_AS(load_bytes(mismatched), FormatError);

  // Trailing bytes are also a layout mismatch.
  CHECK_THROWS_AS(load_bytes(bytes + "x"), FormatError);
}

TEST_CASE("network config JSON") {
  NetworkConfig c = small_config();
  c.normalization = Normalization::kRow;
  nlohmann::json j = c;
  const NetworkConfig back = j.get<NetworkConfig>();
  CHECK(back.hops == c.hops);
  CHECK(back.channels == c.channels);
  CHECK(back.layers_per_block == c.layers_per_block);
  CHECK(back.blocks == c.blocks);
  CHECK(back.normalization == Normalization::kRow);
  CHECK(back.residual_every == c.residual_every);
  CHECK(back.seed == c.seed);

  NetworkConfig bad = small_config();
  bad.hops = -1;
  CHECK_THROWS(bad.validate());
  bad = small_config();
  bad.blocks = 0;
  CHECK_THROWS(bad.validate());
  bad = small_config();
  bad.channels = 0;
  CHECK_THROWS(DeformationNetwork{bad});
}
