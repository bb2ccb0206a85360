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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "boxdeform/dataset.hpp"
#include "boxdeform/errors.hpp"
#include "boxdeform/metrics.hpp"
#include "boxdeform/network.hpp"
#include "boxdeform/obj_io.hpp"
#include "boxdeform/selfcheck.hpp"
#include "boxdeform/trainer.hpp"

namespace fs = std::filesystem;
using namespace boxdeform;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

struct Common {
  bool quiet = false;
  std::optional<std::uint64_t> seed;
  fs::path out = ".";
  int subdivisions = 0;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TriangleMesh load_source(const fs::path& path, int subdivisions) {
  if (path.extension() == ".obj") return read_obj(path);
  return mesh_structure(structure_from_json(read_file(path)), subdivisions);
}

void report(const Common& c, const std::string& line) {
  if (!c.quiet) std::cout << line << '\n';
}

int run_fixtures(const Common& c, const std::string& kind) {
  std::vector<DatasetPair> pairs;
  const std::uint64_t seed = c.seed.value_or(0);
  if (kind == "all") {
    for (const auto& k : fixture_kinds()) {
      auto more = make_fixtures(k, seed, c.subdivisions);
      pairs.insert(pairs.end(), more.begin(), more.end());
    }
  } else {
    pairs = make_fixtures(kind, seed, c.subdivisions);
  }
  write_dataset(c.out, pairs);
  report(c, (c.out / "dataset.json").string());
  return kExitOk;
}

int run_meshbox(const Common& c, const fs::path& input) {
  const TriangleMesh mesh = mesh_structure(structure_from_json(read_file(input)), c.subdivisions);
  fs::create_directories(c.out);
  const fs::path path = c.out / (input.stem().string() + ".obj");
  write_obj(path, mesh);
  report(c, path.string());
  return kExitOk;
}

int run_subdivide(const Common& c, const fs::path& input) {
  TriangleMesh mesh = read_obj(input);
  for (int i = 0; i < std::max(1, c.subdivisions); ++i) mesh = subdivide(mesh);
  fs::create_directories(c.out);
  const fs::path path = c.out / (input.stem().string() + ".sub.obj");
  write_obj(path, mesh);
  report(c, path.string());
  return kExitOk;
}

int run_train(const Common& c, const std::optional<fs::path>& config_path,
              const std::optional<fs::path>& dataset, const std::optional<std::string>& fixture) {
  TrainConfig config = config_path ? load_train_config(*config_path) : TrainConfig{};
  if (c.seed) {
    config.seed = *c.seed;
    config.network.seed = *c.seed;
  }
  config.validate();
  std::vector<DatasetPair> pairs =
      dataset ? read_dataset(*dataset) : make_fixtures(*fixture, config.seed, c.subdivisions);

  fs::create_directories(c.out);
  TrainOptions options;
  options.checkpoint = c.out / "model.stdn";
  options.curve_csv = c.out / "curve.csv";
  if (!c.quiet) {
    options.on_row = [](const CurveRow& row) {
      if (!row.val_cd) return;
      std::fprintf(stderr, "iter %5d  L_all %.6g  l_cd %.6g  l_lap %.6g  l_edge %.6g  val_cd %.6g\n",
                   row.iteration, row.loss.total, row.loss.l_cd, row.loss.l_lap, row.loss.l_edge,
                   *row.val_cd);
    };
  }
  DeformationNetwork net(config.network);
  const TrainResult result = train(net, pairs, config, options);
  nlohmann::json summary = {{"checkpoint", options.checkpoint->string()},
                            {"curve", options.curve_csv->string()},
                            {"initial_val_cd", result.initial_val_cd},
                            {"final_val_cd", result.final_val_cd},
                            {"best_val_cd", result.best_val_cd},
                            {"best_iteration", result.best_iteration}};
  std::cout << summary.dump() << '\n';
  return kExitOk;
}

int run_deform(const Common& c, const fs::path& checkpoint, const fs::path& input) {
  const DeformationNetwork net = load_checkpoint(checkpoint);
  const auto meshes = network_forward(net, load_source(input, c.subdivisions));
  fs::create_directories(c.out);
  for (size_t b = 0; b < meshes.size(); ++b) {
    const fs::path path =
        c.out / (input.stem().string() + ".block" + std::to_string(b + 1) + ".obj");
    write_obj(path, meshes[b]);
    report(c, path.string());
  }
  return kExitOk;
}

int run_eval(const Common& c, const fs::path& checkpoint, const fs::path& dataset,
             const EvalConfig& base, bool write_file) {
  EvalConfig config = base;
  config.seed = c.seed.value_or(0);
  const DeformationNetwork net = load_checkpoint(checkpoint);
  const auto pairs = read_dataset(dataset);
  const Evaluation evaluation = evaluate(net, pairs, config);
  for (const auto& r : evaluation.pairs) {
    if (r.iou_surface_only) {
      std::cerr << "warning: " << r.id << ": mesh is not closed; IoU uses surface occupancy only\n";
    }
  }
  write_metrics_jsonl(std::cout, evaluation);
  if (write_file) {
    fs::create_directories(c.out);
    std::ofstream out(c.out / "metrics.jsonl", std::ios::binary);
    write_metrics_jsonl(out, evaluation);
  }
  return kExitOk;
}

int run_gradcheck(const Common& c) {
  const auto checks = run_gradient_suite(c.seed.value_or(0));
  double worst = 0.0;
  bool ok = true;
  for (const auto& check : checks) {
    worst = std::max(worst, check.report.max_relative_error);
    ok = ok && check.report.passed;
    if (!c.quiet || !check.report.passed) {
      std::cout << check.name << ": " << check.report.summary() << '\n';
    }
  }
  char line[128];
  std::snprintf(line, sizeof(line), "gradcheck %s: %zu checks, max relative error %.3e",
                ok ? "passed" : "FAILED", checks.size(), worst);
  std::cout << line << '\n';
  return ok ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deform meshed bounding boxes into target surfaces with graph convolutions"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  Common common;
  app.add_flag("--quiet,-q", common.quiet, "Only print errors and results");

  auto add_seed = [&](CLI::App* sub) {
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& s) { common.seed = s; }, "Random seed");
  };
  auto add_out = [&](CLI::App* sub, const std::string& help) {
    sub->add_option("--out", common.out, help);
  };
  auto add_subdivisions = [&](CLI::App* sub, const std::string& help) {
    sub->add_option("--subdivisions", common.subdivisions, help)->check(CLI::NonNegativeNumber);
  };

  std::function<int()> action;

  std::string kind;
  auto* fixtures = app.add_subcommand("fixtures", "Write procedural dataset pairs as OBJ + JSON");
  fixtures->add_option("kind", kind, "Fixture kind or 'all'")->required();
  add_seed(fixtures);
  add_out(fixtures, "Output directory");
  add_subdivisions(fixtures, "Source box subdivisions");
  fixtures->callback([&] { action = [&] { return run_fixtures(common, kind); }; });

  fs::path box_json;
  auto* meshbox = app.add_subcommand("meshbox", "Mesh a box hierarchy JSON into an OBJ");
  meshbox->add_option("structure", box_json, "Box JSON")->required()->check(CLI::ExistingFile);
  add_out(meshbox, "Output directory");
  add_subdivisions(meshbox, "Subdivisions per box");
  meshbox->callback([&] { action = [&] { return run_meshbox(common, box_json); }; });

  fs::path obj_in;
  auto* subdiv = app.add_subcommand("subdivide", "Midpoint-subdivide an OBJ mesh");
  subdiv->add_option("mesh", obj_in, "Input OBJ")->required()->check(CLI::ExistingFile);
  add_out(subdiv, "Output directory");
  add_subdivisions(subdiv, "Number of subdivision rounds (default 1)");
  subdiv->callback([&] { action = [&] { return run_subdivide(common, obj_in); }; });

  std::optional<fs::path> config_path, dataset_path;
  std::optional<std::string> fixture_kind;
  auto* train_cmd = app.add_subcommand("train", "Train a network; writes model.stdn and curve.csv");
  train_cmd->add_option("--config", config_path, "Training config JSON")->check(CLI::ExistingFile);
  auto* ds_opt =
      train_cmd->add_option("--dataset", dataset_path, "dataset.json")->check(CLI::ExistingFile);
  auto* fx_opt = train_cmd->add_option("--fixture", fixture_kind, "Train on a generated fixture");
  ds_opt->excludes(fx_opt);
  add_seed(train_cmd);
  add_out(train_cmd, "Output directory");
  add_subdivisions(train_cmd, "Source box subdivisions for --fixture");
  train_cmd->callback([&] {
    if (!dataset_path && !fixture_kind) throw CLI::RequiredError("--dataset or --fixture");
    action = [&] { return run_train(common, config_path, dataset_path, fixture_kind); };
  });

  fs::path checkpoint, deform_input;
  auto* deform = app.add_subcommand("deform", "Run a checkpoint on a box JSON or OBJ mesh");
  deform->add_option("checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  deform->add_option("input", deform_input, "Box JSON or OBJ")->required()->check(CLI::ExistingFile);
  add_out(deform, "Output directory");
  add_subdivisions(deform, "Subdivisions when meshing a box JSON");
  deform->callback([&] { action = [&] { return run_deform(common, checkpoint, deform_input); }; });

  fs::path eval_dataset;
  EvalConfig eval_config;
  bool eval_out = false;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint; prints JSON lines");
  eval->add_option("checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  eval->add_option("dataset", eval_dataset, "dataset.json")->required()->check(CLI::ExistingFile);
  eval->add_option("--threshold", eval_config.threshold, "F1 squared-distance threshold")
      ->check(CLI::PositiveNumber);
  eval->add_option("--resolution", eval_config.resolution, "Voxel grid resolution")
      ->check(CLI::Range(8, 1024));
  add_seed(eval);
  auto* eval_out_opt = eval->add_option("--out", common.out, "Also write metrics.jsonl here");
  eval->callback([&] {
    eval_out = eval_out_opt->count() > 0;
    action = [&] { return run_eval(common, checkpoint, eval_dataset, eval_config, eval_out); };
  });

  auto* grad = app.add_subcommand("gradcheck", "Check gradients against finite differences");
  add_seed(grad);
  grad->callback([&] { action = [&] { return run_gradcheck(common); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    return action();
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
}
