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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "boxdeform/errors.hpp"
#include "boxdeform/trainer.hpp"
#include "support.hpp"

using namespace boxdeform;
using namespace boxdeform::testing;

namespace {

TrainConfig small_train_config(int iterations) {
  TrainConfig c;
  c.iterations = iterations;
  c.eval_every = 10;
  c.samples = 300;
  c.seed = 3;
  c.network.channels = 16;
  c.network.layers_per_block = 4;
  c.network.seed = 3;
  return c;
}

double mean_edge_length(const TriangleMesh& m) {
  double total = 0.0;
  for (const auto& [a, b] : m.edges()) total += (m.vertex(a) - m.vertex(b)).norm();
  return total / m.num_edges();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("boxdeform_trainer_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("first Adam step moves by lr against the gradient sign") {
  Matrix p = Matrix::Zero(2, 2);
  Matrix g(2, 2);
  g << 3.0, -0.01, 250.0, -7.0;
  TrainConfig c;
  c.weight_decay = 0.0;
  AdamState state;
  Matrix* params[] = {&p};
  const Matrix grads[] = {g};
  const std::string names[] = {"w"};
  adam_step(params, grads, names, state, c);
  for (Eigen::Index i = 0; i < 4; ++i) {
    CHECK(p(i) == doctest::Approx(-c.lr * (g(i) > 0 ? 1.0 : -1.0)).epsilon(1e-6));
  }
  CHECK(state.step == 1);
}

TEST_CASE("Adam matches a scalar reference over several steps") {
  TrainConfig c;
  c.lr = 0.01;
  Matrix p = Matrix::Constant(1, 1, 0.5);
  AdamState state;
  double ref = 0.5, m = 0.0, v = 0.0;
  for (int t = 1; t <= 20; ++t) {
    const double g_raw = std::sin(0.7 * t) + ref;
    Matrix* params[] = {&p};
    const Matrix grads[] = {Matrix::Constant(1, 1, g_raw)};
    const std::string names[] = {"x"};
    adam_step(params, grads, names, state, c);
    const double g = g_raw + c.weight_decay * ref;
    m = c.beta1 * m + (1 - c.beta1) * g;
    v = c.beta2 * v + (1 - c.beta2) * g * g;
    const double mh = m / (1 - std::pow(c.beta1, t));
    const double vh = v / (1 - std::pow(c.beta2, t));
    ref -= c.lr * mh / (std::sqrt(vh) + c.eps);
    CHECK(p(0, 0) == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("zero gradient without decay leaves parameters and decays moments") {
  TrainConfig c;
  c.weight_decay = 0.0;
  Matrix p = Matrix::Constant(2, 3, 1.5);
  AdamState state;
  Matrix* params[] = {&p};
  const std::string names[] = {"w"};
  const Matrix g1[] = {Matrix::Constant(2, 3, 2.0)};
  adam_step(params, g1, names, state, c);
  const Matrix after_first = p;
  const Matrix m1 = state.first_moment[0];
  const Matrix v1 = state.second_moment[0];
  const Matrix g0[] = {Matrix::Zero(2, 3)};
  adam_step(params, g0, names, state, c);
  CHECK(max_abs_diff(state.first_moment[0], c.beta1 * m1) < 1e-15);
  CHECK(max_abs_diff(state.second_moment[0], c.beta2 * v1) < 1e-15);

  AdamState fresh;
  Matrix q = Matrix::Constant(2, 3, 1.5);
  Matrix* qs[] = {&q};
  adam_step(qs, g0, names, fresh, c);
  CHECK(q == Matrix::Constant(2, 3, 1.5));
  CHECK(after_first != Matrix::Constant(2, 3, 1.5));
}

TEST_CASE("non-finite gradient is rejected before anything changes") {
  TrainConfig c;
  Matrix a = Matrix::Ones(2, 2), b = Matrix::Ones(1, 3);
  Matrix* params[] = {&a, &b};
  Matrix gb = Matrix::Zero(1, 3);
  gb(0, 2) = std::numeric_limits<double>::quiet_NaN();
  const Matrix grads[] = {Matrix::Ones(2, 2), gb};
  const std::string names[] = {"block0.layer0.W0", "block0.layer0.bias"};
  AdamState state;
  try {
    adam_step(params, grads, names, state, c);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("block0.layer0.bias") != std::string::npos);
  }
  CHECK(a == Matrix::Ones(2, 2));
  CHECK(b == Matrix::Ones(1, 3));
  CHECK(state.step == 0);

  const Matrix wrong[] = {Matrix::Ones(2, 2), Matrix::Ones(3, 1)};
  CHECK_THROWS_AS(adam_step(params, wrong, names, state, c), DimensionError);
}

TEST_CASE("Adam is deterministic over 100 steps") {
  TrainConfig c;
  c.lr = 1e-3;
  auto run = [&] {
    Rng rng(5);
    Matrix p = random_matrix(4, 4, rng);
    AdamState state;
    for (int t = 0; t < 100; ++t) {
      Matrix* params[] = {&p};
      const Matrix grads[] = {random_matrix(4, 4, rng) + p};
      const std::string names[] = {"p"};
      adam_step(params, grads, names, state, c);
    }
    return p;
  };
  CHECK(run() == run());
}

TEST_CASE("train config JSON keys") {
  TrainConfig c;
  c.seed = 12;
  nlohmann::json j = c;
  CHECK(j.size() == 18);
  for (const char* key : {"lr", "beta1", "beta2", "eps", "weight_decay", "iterations", "eval_every",
                          "lambda_lap", "lambda_edge", "samples", "seed", "hops", "channels",
                          "layers_per_block", "blocks", "normalization", "residual_every", "use_bias"}) {
    CHECK(j.contains(key));
  }
  const TrainConfig back = j.get<TrainConfig>();
  CHECK(back.seed == 12);
  CHECK(back.network.seed == 12);
  CHECK(back.lr == c.lr);
  CHECK(nlohmann::json(back) == j);

  CHECK_THROWS_AS(nlohmann::json::parse(R"({"lr": 0.1, "momentum": 0.9})").get<TrainConfig>(), FormatError);
  CHECK_THROWS_AS(nlohmann::json::parse(R"({"iterations": "many"})").get<TrainConfig>(), FormatError);
  const TrainConfig partial = nlohmann::json::parse(R"({"hops": 0})").get<TrainConfig>();
  CHECK(partial.network.hops == 0);
  CHECK(partial.lr == 3e-5);

  TrainConfig bad;
  bad.lr = -1.0;
  CHECK_THROWS(bad.validate());
  bad = TrainConfig{};
  bad.samples = 0;
  CHECK_THROWS(bad.validate());

  const auto dir = scratch("config");
  std::ofstream(dir / "c.json") << R"({"iterations": 7, "channels": 8})";
  const TrainConfig loaded = load_train_config(dir / "c.json");
  CHECK(loaded.iterations == 7);
  CHECK(loaded.network.channels == 8);
  CHECK_THROWS_AS(load_train_config(dir / "missing.json"), FormatError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("curve CSV header and rows") {
  const auto dir = scratch("csv");
  CurveRow a;
  a.iteration = 0;
  a.loss.total = 1.5;
  a.val_cd = 2.25;
  CurveRow b;
  b.iteration = 1;
  const CurveRow rows[] = {a, b};
  write_curve_csv(dir / "curve.csv", rows);
  std::ifstream in(dir / "curve.csv");
  std::string header, first, second;
  std::getline(in, header);
  std::getline(in, first);
  std::getline(in, second);
  CHECK(header == "iteration,l_cd,l_lap,l_edge,L_all,val_cd");
  CHECK(first == "0,0,0,0,1.5,2.25");
  CHECK(second == "1,0,0,0,0,");
  std::filesystem::remove_all(dir);
}

TEST_CASE("zero iterations returns the subdivided box") {
  const auto data = make_fixtures("cube-to-sphere", 0);
  TrainConfig c = small_train_config(0);
  DeformationNetwork net(c.network);
  const TrainResult r = train(net, data, c);
  REQUIRE(r.curve.size() == 1);
  CHECK(r.curve[0].val_cd.has_value());
  CHECK(r.best_iteration == 0);
  CHECK(r.initial_val_cd == r.final_val_cd);
  const auto meshes = network_forward(net, data[0].source);
  ObbNode box;
  box.extents = Vec3::Constant(0.5);
  CHECK(meshes.back().vertices() == mesh_cuboid(box, 2).vertices());
}

TEST_CASE("per-block supervision changes the first block's gradients") {
  const auto data = make_fixtures("cube-to-sphere", 0);
  TrainConfig c = small_train_config(0);
  DeformationNetwork net(c.network);
  // Give the coordinate branches something to pass gradients through.
  Rng rng(4);
  for (auto& p : net.parameters()) {
    if (p.name.find("coord") != std::string::npos) *p.value = random_matrix(p.value->rows(), p.value->cols(), rng, 0.01);
  }
  const auto all = loss_gradients(net, data, c, 9);
  c.supervise_all_blocks = false;
  const auto last = loss_gradients(net, data, c, 9);
  REQUIRE(all.size() == last.size());
  const auto params = net.parameters();
  // First parameter belongs to block 0; last to the final block.
  CHECK(max_abs_diff(all.front(), last.front()) > 0.0);
  CHECK(all.front().allFinite());
  CHECK(params.front().name.rfind("block0.", 0) == 0);
}

TEST_CASE("stronger edge weight shortens edges") {
  const auto data = make_fixtures("cube-to-sphere", 0);
  auto mean_edge = [&](double lambda_edge) {
    TrainConfig c = small_train_config(150);
    c.lr = 1e-3;
    c.lambda_edge = lambda_edge;
    DeformationNetwork net(c.network);
    train(net, data, c);
    return mean_edge_length(network_forward(net, data[0].source).back());
  };
  const double base = mean_edge(0.1);
  const double strong = mean_edge(1.0);
  MESSAGE("mean edge length " << base << " vs " << strong);
  CHECK(strong < base);
}

TEST_CASE("training improves validation chamfer on every fixture kind") {
  for (const auto& kind : fixture_kinds()) {
    CAPTURE(kind);
    const auto data = make_fixtures(kind, 1);
    TrainConfig c = small_train_config(2000);
    c.eval_every = 50;
    DeformationNetwork net(c.network);
    const TrainResult r = train(net, data, c);
    MESSAGE(kind << ": " << r.initial_val_cd << " -> best " << r.best_val_cd << " @" << r.best_iteration);
    CHECK(r.best_val_cd < r.initial_val_cd);
    CHECK(r.curve.size() == 2001);
  }
}

TEST_CASE("non-finite loss stops training and keeps the checkpoint") {
  auto data = make_fixtures("cube-to-sphere", 0);
  Matrix v = data[0].target.vertices();
  v(5, 1) = std::numeric_limits<double>::quiet_NaN();
  data[0].target = data[0].target.with_vertices(v);
  TrainConfig c = small_train_config(5);
  std::vector<DatasetPair> clean = make_fixtures("cube-to-sphere", 0);
  const auto dir = scratch("nan");
  TrainOptions options;
  options.checkpoint = dir / "model.stdn";
  options.validation = clean;
  DeformationNetwork net(c.network);
  CHECK_THROWS_AS(train(net, data, c, options), NumericalError);
  REQUIRE(std::filesystem::exists(dir / "model.stdn"));
  CHECK_NOTHROW(load_checkpoint(dir / "model.stdn"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("training is deterministic") {
  const auto data = make_fixtures("box-to-ellipsoid", 2);
  auto run = [&] {
    TrainConfig c = small_train_config(15);
    c.lr = 1e-3;
    DeformationNetwork net(c.network);
    const TrainResult r = train(net, data, c);
    return std::make_pair(r.final_val_cd, network_forward(net, data[0].source).back().vertices());
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}
