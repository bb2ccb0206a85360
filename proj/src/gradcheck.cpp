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

#include "boxdeform/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

namespace boxdeform::ad {

namespace {

double evaluate(const ScalarFunction& f, const std::vector<Matrix>& params) {
  Tape tape;
  std::vector<Tensor> leaves;
  leaves.reserve(params.size());
  for (const Matrix& p : params) leaves.push_back(tape.borrow(p, false));
  return f(tape, leaves).value()(0, 0);
}

}  // namespace

std::string GradcheckReport::summary() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "%s: max relative error %.3e over %zu coordinates (param %d, "
                "entry %ld,%ld: analytic %.9g numeric %.9g)",
                passed ? "PASS" : "FAIL", max_relative_error, coordinates_checked,
                worst_param, static_cast<long>(worst_row),
                static_cast<long>(worst_col), worst_analytic, worst_numeric);
  return buf;
}

GradcheckReport gradcheck(const ScalarFunction& f, std::vector<Matrix> params,
                          const GradcheckOptions& options) {
  std::vector<Matrix> analytic;
  {
    Tape tape;
    std::vector<Tensor> leaves;
    for (const Matrix& p : params) leaves.push_back(tape.borrow(p, true));
    Tensor loss = f(tape, leaves);
    tape.backward(loss);
    for (const Tensor& l : leaves) analytic.push_back(l.grad());
  }

  std::mt19937_64 rng(options.seed);
  GradcheckReport report;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    const Eigen::Index n = params[pi].size();
    std::vector<Eigen::Index> coords(static_cast<size_t>(n));
    std::iota(coords.begin(), coords.end(), Eigen::Index{0});
    if (options.max_coordinates_per_param > 0 &&
        coords.size() > options.max_coordinates_per_param) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.max_coordinates_per_param);
      std::sort(coords.begin(), coords.end());
    }
    for (Eigen::Index flat : coords) {
      // Column-major storage.
      const Eigen::Index r = flat % params[pi].rows();
      const Eigen::Index c = flat / params[pi].rows();
      double& x = params[pi](r, c);
      const double saved = x;
      x = saved + options.step;
      const double plus = evaluate(f, params);
      x = saved - options.step;
      const double minus = evaluate(f, params);
      x = saved;

      const double numeric = (plus - minus) / (2.0 * options.step);
      const double a = analytic[pi](r, c);
      const double denom =
          std::max({std::abs(a), std::abs(numeric), options.denominator_floor});
      const double rel = std::abs(a - numeric) / denom;
      ++report.coordinates_checked;
      if (report.worst_param < 0 || std::isnan(rel) ||
          rel > report.max_relative_error) {
        report.max_relative_error = std::isnan(rel) ? INFINITY : rel;
        report.worst_param = static_cast<int>(pi);
        report.worst_row = r;
        report.worst_col = c;
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
  }
  report.passed = report.max_relative_error < options.tolerance;
  return report;
}

}  // namespace boxdeform::ad
