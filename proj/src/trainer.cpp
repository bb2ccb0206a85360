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

#include "boxdeform/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "boxdeform/errors.hpp"

namespace boxdeform {

namespace {

constexpr std::uint64_t kTrainStream = 0x5851f42d4c957f2dULL;
constexpr std::uint64_t kValidationStream = 0x14057b7ef767814fULL;

const std::set<std::string>& config_keys() {
  static const std::set<std::string> keys = {
      "lr",       "beta1",    "beta2",       "eps",        "weight_decay",     "iterations",
      "eval_every", "lambda_lap", "lambda_edge", "samples", "seed",             "hops",
      "channels", "layers_per_block", "blocks", "normalization", "residual_every", "use_bias"};
  return keys;
}

struct PairPlan {
  const DatasetPair* pair = nullptr;
  NetworkPlan network;
  std::vector<StageOperators> operators;
};

std::vector<PairPlan> plan_pairs(const NetworkConfig& config,
                                 std::span<const DatasetPair> pairs) {
  std::vector<PairPlan> plans;
  plans.reserve(pairs.size());
  for (const auto& p : pairs) {
    p.validate();
    PairPlan plan;
    plan.pair = &p;
    plan.network = plan_network(config, p.source);
    for (const auto& stage : plan.network.stages) {
      plan.operators.push_back(stage_operators(stage.topology));
    }
    plans.push_back(std::move(plan));
  }
  return plans;
}

struct StepResult {
  LossReport report;
  std::vector<Matrix> grads;
};

StepResult evaluate_step(const DeformationNetwork& net, std::span<const PairPlan> plans,
                         const TrainConfig& config, Rng& rng, bool with_grad) {
  Tape tape;
  const std::vector<BoundBlock> bound = bind_network(tape, net, with_grad);
  const LossWeights weights = config.loss_weights();
  StepResult result;
  result.report.lambda_lap = weights.lambda_lap;
  result.report.lambda_edge = weights.lambda_edge;
  Tensor total;
  for (const PairPlan& plan : plans) {
    NetworkTrace trace = network_forward(bound, plan.network, tape);
    const TriangleMesh& target = plan.pair->target;
    SampleBatch target_samples =
        sample_surface(target, tape.borrow(target.vertices(), false), config.samples, rng);
    std::vector<BlockLossInput> inputs;
    const size_t last = trace.stages.size() - 1;
    for (size_t b = 0; b < trace.stages.size(); ++b) {
      BlockLossInput in;
      in.operators = &plan.operators[b];
      in.input_positions = trace.stages[b].input_positions;
      in.predicted = trace.stages[b].predicted;
      in.predicted_samples =
          sample_surface(plan.operators[b].topology, in.predicted, config.samples, rng);
      in.weight = (config.supervise_all_blocks || b == last) ? 1.0 : 0.0;
      inputs.push_back(std::move(in));
    }
    TotalLoss loss = total_loss(inputs, target_samples, weights, config.mean_chamfer);
    total = total.valid() ? ad::add(total, loss.total) : loss.total;
    result.report.l_cd += loss.report.l_cd;
    result.report.l_lap += loss.report.l_lap;
    result.report.l_edge += loss.report.l_edge;
    result.report.total += loss.report.total;
  }
  if (with_grad && std::isfinite(result.report.total)) {
    tape.backward(total);
    for (const Tensor& leaf : parameter_leaves(bound)) result.grads.push_back(leaf.grad());
  }
  return result;
}

double validation_chamfer(const DeformationNetwork& net, std::span<const PairPlan> plans,
                          int samples, std::uint64_t seed) {
  double sum = 0.0;
  for (size_t i = 0; i < plans.size(); ++i) {
    Tape tape;
    NetworkTrace trace = network_forward(net, plans[i].network, tape, false);
    Rng pred_rng(seed + 2 * i);
    Rng target_rng(seed + 2 * i + 1);
    const auto& last = plans[i].network.stages.back();
    SampleBatch pred = sample_surface(last.topology, trace.stages.back().predicted, samples,
                                      pred_rng);
    const TriangleMesh& target = plans[i].pair->target;
    SampleBatch truth =
        sample_surface(target, tape.borrow(target.vertices(), false), samples, target_rng);
    sum += chamfer_loss(pred, truth).value()(0, 0);
  }
  return sum / static_cast<double>(plans.size());
}

std::vector<Matrix> snapshot(const DeformationNetwork& net) {
  std::vector<Matrix> out;
  for (const auto& [name, m] : net.parameters()) out.push_back(*m);
  return out;
}

void restore(DeformationNetwork& net, const std::vector<Matrix>& values) {
  auto params = net.parameters();
  for (size_t i = 0; i < params.size(); ++i) *params[i].value = values[i];
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw std::invalid_argument("train config: lr must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("train config: betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("train config: eps must be > 0");
  if (weight_decay < 0.0) throw std::invalid_argument("train config: weight_decay must be >= 0");
  if (iterations < 0) throw std::invalid_argument("train config: iterations must be >= 0");
  if (eval_every < 1) throw std::invalid_argument("train config: eval_every must be >= 1");
  if (samples < 1) throw std::invalid_argument("train config: samples must be >= 1");
  network.validate();
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"lr", c.lr},
                     {"beta1", c.beta1},
                     {"beta2", c.beta2},
                     {"eps", c.eps},
                     {"weight_decay", c.weight_decay},
                     {"iterations", c.iterations},
                     {"eval_every", c.eval_every},
                     {"lambda_lap", c.lambda_lap},
                     {"lambda_edge", c.lambda_edge},
                     {"samples", c.samples},
                     {"seed", c.seed},
                     {"hops", c.network.hops},
                     {"channels", c.network.channels},
                     {"layers_per_block", c.network.layers_per_block},
                     {"blocks", c.network.blocks},
                     {"normalization", to_string(c.network.normalization)},
                     {"residual_every", c.network.residual_every},
                     {"use_bias", c.network.use_bias}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  if (!j.is_object()) throw FormatError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!config_keys().contains(key)) throw FormatError("unknown config key '" + key + "'");
  }
  try {
    c.lr = j.value("lr", c.lr);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.eps = j.value("eps", c.eps);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.iterations = j.value("iterations", c.iterations);
    c.eval_every = j.value("eval_every", c.eval_every);
    c.lambda_lap = j.value("lambda_lap", c.lambda_lap);
    c.lambda_edge = j.value("lambda_edge", c.lambda_edge);
    c.samples = j.value("samples", c.samples);
    c.seed = j.value("seed", c.seed);
    from_json(j, c.network);
  } catch (const nlohmann::json::type_error& e) {
    throw FormatError(std::string("config value has the wrong type: ") + e.what());
  }
  c.network.seed = c.seed;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("config parse error: " + std::string(e.what()));
  }
  TrainConfig config = j.get<TrainConfig>();
  config.validate();
  return config;
}

void adam_step(std::span<Matrix* const> params, std::span<const Matrix> grads,
               std::span<const std::string> names, AdamState& state,
               const TrainConfig& config) {
  if (params.size() != grads.size()) {
    throw DimensionError("adam_step: " + std::to_string(params.size()) + " parameters but " +
                         std::to_string(grads.size()) + " gradients");
  }
  for (size_t i = 0; i < params.size(); ++i) {
    if (params[i]->rows() != grads[i].rows() || params[i]->cols() != grads[i].cols()) {
      throw DimensionError("adam_step: gradient shape mismatch for parameter " +
                           (i < names.size() ? names[i] : std::to_string(i)));
    }
    if (!grads[i].allFinite()) {
      throw NumericalError("non-finite gradient in parameter " +
                           (i < names.size() ? names[i] : std::to_string(i)));
    }
  }
  if (state.first_moment.empty()) {
    for (const Matrix* p : params) {
      state.first_moment.push_back(Matrix::Zero(p->rows(), p->cols()));
      state.second_moment.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw DimensionError("adam_step: optimizer state does not match the parameters");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (size_t i = 0; i < params.size(); ++i) {
    Matrix& p = *params[i];
    auto g = (grads[i] + config.weight_decay * p).eval();
    Matrix& m = state.first_moment[i];
    Matrix& v = state.second_moment[i];
    m = config.beta1 * m + (1.0 - config.beta1) * g;
    v = config.beta2 * v + (1.0 - config.beta2) * g.cwiseProduct(g);
    p.array() -= config.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + config.eps);
  }
}

void write_curve_csv(const std::filesystem::path& path, std::span<const CurveRow> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << "iteration,l_cd,l_lap,l_edge,L_all,val_cd\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g,%.9g,", r.iteration, r.loss.l_cd,
                  r.loss.l_lap, r.loss.l_edge, r.loss.total);
    out << buf;
    if (r.val_cd) {
      std::snprintf(buf, sizeof(buf), "%.9g", *r.val_cd);
      out << buf;
    }
    out << '\n';
  }
}

double validation_chamfer(const DeformationNetwork& net, std::span<const DatasetPair> pairs,
                          int samples, std::uint64_t seed) {
  if (pairs.empty()) throw EmptyInputError("validation_chamfer: no pairs");
  const auto plans = plan_pairs(net.config(), pairs);
  return validation_chamfer(net, std::span<const PairPlan>(plans), samples, seed);
}

TrainResult train(DeformationNetwork& net, std::span<const DatasetPair> dataset,
                  const TrainConfig& config, const TrainOptions& options) {
  config.validate();
  if (dataset.empty()) throw EmptyInputError("train: empty dataset");
  const auto plans = plan_pairs(net.config(), dataset);
  const auto val_plans = options.validation.empty()
                             ? plans
                             : plan_pairs(net.config(), options.validation);

  std::vector<std::string> names;
  std::vector<Matrix*> params;
  for (auto& p : net.parameters()) {
    names.push_back(p.name);
    params.push_back(p.value);
  }

  Rng rng(config.seed ^ kTrainStream);
  const std::uint64_t val_seed = config.seed ^ kValidationStream;
  AdamState state;
  TrainResult result{{}, 0.0, 0.0, 0.0, 0, net};
  std::vector<Matrix> best_values = snapshot(net);
  bool have_best = false;

  auto save_best = [&]() {
    if (!options.checkpoint) return;
    DeformationNetwork copy = net;
    restore(copy, best_values);
    save_checkpoint(*options.checkpoint, copy);
  };

  for (int it = 0; it <= config.iterations; ++it) {
    const bool step = it < config.iterations;
    StepResult sr;
    try {
      sr = evaluate_step(net, plans, config, rng, step);
    } catch (const NumericalError&) {
      save_best();
      throw;
    }
    if (!std::isfinite(sr.report.total)) {
      save_best();
      throw NumericalError("non-finite loss at iteration " + std::to_string(it));
    }
    CurveRow row;
    row.iteration = it;
    row.loss = sr.report;
    if (it % config.eval_every == 0 || it == config.iterations) {
      const double val = validation_chamfer(net, std::span<const PairPlan>(val_plans),
                                            config.samples, val_seed);
      row.val_cd = val;
      if (it == 0) result.initial_val_cd = val;
      if (it == config.iterations) result.final_val_cd = val;
      if (!have_best || val < result.best_val_cd) {
        have_best = true;
        result.best_val_cd = val;
        result.best_iteration = it;
        best_values = snapshot(net);
      }
    }
    if (options.on_row) options.on_row(row);
    result.curve.push_back(row);
    if (step) {
      try {
        adam_step(params, sr.grads, names, state, config);
      } catch (const NumericalError&) {
        save_best();
        throw;
      }
    }
  }

  result.best = net;
  restore(result.best, best_values);
  if (options.checkpoint) save_checkpoint(*options.checkpoint, result.best);
  if (options.curve_csv) write_curve_csv(*options.curve_csv, result.curve);
  return result;
}

std::vector<Matrix> loss_gradients(const DeformationNetwork& net,
                                   std::span<const DatasetPair> dataset,
                                   const TrainConfig& config, std::uint64_t sample_seed) {
  if (dataset.empty()) throw EmptyInputError("loss_gradients: empty dataset");
  const auto plans = plan_pairs(net.config(), dataset);
  Rng rng(sample_seed);
  return evaluate_step(net, plans, config, rng, true).grads;
}

}  // namespace boxdeform
