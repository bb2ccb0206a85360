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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "boxdeform/dataset.hpp"
#include "boxdeform/losses.hpp"
#include "boxdeform/network.hpp"

namespace boxdeform {

struct TrainConfig {
  double lr = 3e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 5e-4;
  int iterations = 2000;
  int eval_every = 10;
  double lambda_lap = 0.3;
  double lambda_edge = 0.1;
  int samples = 1000;
  std::uint64_t seed = 0;
  NetworkConfig network;  // network.seed mirrors `seed`

  // Programmatic switches, not part of the JSON schema.
  bool supervise_all_blocks = true;
  bool mean_chamfer = false;

  void validate() const;
  LossWeights loss_weights() const { return {lambda_lap, lambda_edge}; }
};

// Keys: lr, beta1, beta2, eps, weight_decay, iterations, eval_every,
// lambda_lap, lambda_edge, samples, seed, hops, channels, layers_per_block,
// blocks, normalization, residual_every, use_bias. Missing keys keep their
// defaults; unknown keys are rejected.
void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);
TrainConfig load_train_config(const std::filesystem::path& path);

struct AdamState {
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  std::int64_t step = 0;
};

// Adam with bias correction; weight decay is added to the gradient. Throws
// NumericalError naming the parameter when a gradient entry is not finite, in
// which case nothing is modified.
void adam_step(std::span<Matrix* const> params, std::span<const Matrix> grads,
               std::span<const std::string> names, AdamState& state,
               const TrainConfig& config);

struct CurveRow {
  int iteration = 0;
  LossReport loss;
  std::optional<double> val_cd;
};

void write_curve_csv(const std::filesystem::path& path, std::span<const CurveRow> rows);

struct TrainResult {
  std::vector<CurveRow> curve;
  double initial_val_cd = 0.0;
  double final_val_cd = 0.0;
  double best_val_cd = 0.0;
  int best_iteration = 0;
  DeformationNetwork best;
};

struct TrainOptions {
  std::optional<std::filesystem::path> checkpoint;  // best-by-validation network
  std::optional<std::filesystem::path> curve_csv;
  std::vector<DatasetPair> validation;              // defaults to the training set
  std::function<void(const CurveRow&)> on_row;
};

// Mean over pairs of the final-block chamfer between fixed-seed samples of
// the prediction and the target.
double validation_chamfer(const DeformationNetwork& net, std::span<const DatasetPair> pairs,
                          int samples, std::uint64_t seed);

// Full-batch training over all pairs for config.iterations Adam steps. The
// network is left at its final parameters. A non-finite loss throws
// NumericalError after the last-good (best) checkpoint has been written.
TrainResult train(DeformationNetwork& net, std::span<const DatasetPair> dataset,
                  const TrainConfig& config, const TrainOptions& options = {});

// Gradients of the summed training loss at the current parameters for one
// draw of samples; used to inspect supervision wiring.
std::vector<Matrix> loss_gradients(const DeformationNetwork& net,
                                   std::span<const DatasetPair> dataset,
                                   const TrainConfig& config, std::uint64_t sample_seed);

}  // namespace boxdeform
