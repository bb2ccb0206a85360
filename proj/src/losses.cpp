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

#include "boxdeform/losses.hpp"

#include <limits>

#include "boxdeform/errors.hpp"

namespace boxdeform {

namespace {

void check_points(const Matrix& p, const char* what) {
  if (p.rows() == 0) throw EmptyInputError(std::string(what) + ": empty point set");
  if (p.cols() != 3) throw DimensionError(std::string(what) + ": points must be N x 3");
}

}  // namespace

std::vector<int> nearest_indices(const Matrix& from, const Matrix& to) {
  check_points(from, "nearest_indices");
  check_points(to, "nearest_indices");
  // Row-major copies keep the inner loop contiguous.
  const Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> a = from;
  const Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> b = to;
  std::vector<int> out(static_cast<size_t>(a.rows()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double x = a(i, 0), y = a(i, 1), z = a(i, 2);
    double best = std::numeric_limits<double>::infinity();
    int best_j = 0;
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      const double dx = x - b(j, 0);
      const double dy = y - b(j, 1);
      const double dz = z - b(j, 2);
      const double d = dx * dx + dy * dy + dz * dz;
      if (d < best) {
        best = d;
        best_j = static_cast<int>(j);
      }
    }
    out[static_cast<size_t>(i)] = best_j;
  }
  return out;
}

Eigen::VectorXd nearest_squared_distances(const Matrix& from, const Matrix& to) {
  const std::vector<int> idx = nearest_indices(from, to);
  Eigen::VectorXd d(from.rows());
  for (Eigen::Index i = 0; i < from.rows(); ++i) {
    d(i) = (from.row(i) - to.row(idx[static_cast<size_t>(i)])).squaredNorm();
  }
  return d;
}

ad::Tensor chamfer_loss(const ad::Tensor& m, const ad::Tensor& s, bool mean) {
  check_points(m.value(), "chamfer_loss");
  check_points(s.value(), "chamfer_loss");
  const std::vector<int> m_to_s = nearest_indices(m.value(), s.value());
  const std::vector<int> s_to_m = nearest_indices(s.value(), m.value());
  ad::Tensor forward = ad::reduce_sum(ad::square(ad::sub(m, ad::gather_rows(s, m_to_s))));
  ad::Tensor backward = ad::reduce_sum(ad::square(ad::sub(s, ad::gather_rows(m, s_to_m))));
  if (mean) {
    forward = ad::scalar_mul(1.0 / static_cast<double>(m.rows()), forward);
    backward = ad::scalar_mul(1.0 / static_cast<double>(s.rows()), backward);
  }
  return ad::add(forward, backward);
}

ad::Tensor chamfer_loss(const SampleBatch& m, const SampleBatch& s, bool mean) {
  return chamfer_loss(m.points, s.points, mean);
}

SparseMatrix laplacian_operator(const TriangleMesh& mesh) {
  return laplacian_operator(mesh.num_vertices(), mesh.edges());
}

SparseMatrix laplacian_operator(int n, std::span<const Edge> graph_edges) {
  std::vector<std::vector<int>> neighbors(static_cast<size_t>(n));
  for (const auto& [a, b] : canonical_edges(n, graph_edges)) {
    neighbors[a].push_back(b);
    neighbors[b].push_back(a);
  }
  std::vector<Eigen::Triplet<double>> coeffs;
  for (int p = 0; p < n; ++p) {
    const auto& nb = neighbors[p];
    if (nb.empty()) continue;
    coeffs.emplace_back(p, p, 1.0);
    const double w = 1.0 / static_cast<double>(nb.size());
    for (int q : nb) coeffs.emplace_back(p, q, -w);
  }
  SparseMatrix l(n, n);
  l.setFromTriplets(coeffs.begin(), coeffs.end());
  l.makeCompressed();
  return l;
}

SparseMatrix edge_difference_operator(const TriangleMesh& mesh) {
  return edge_difference_operator(mesh.num_vertices(), mesh.edges());
}

SparseMatrix edge_difference_operator(int n, std::span<const Edge> graph_edges) {
  const std::vector<Edge> edges = canonical_edges(n, graph_edges);
  std::vector<Eigen::Triplet<double>> coeffs;
  coeffs.reserve(2 * edges.size());
  for (size_t e = 0; e < edges.size(); ++e) {
    coeffs.emplace_back(static_cast<int>(e), edges[e].first, 1.0);
    coeffs.emplace_back(static_cast<int>(e), edges[e].second, -1.0);
  }
  SparseMatrix d(static_cast<Eigen::Index>(edges.size()), n);
  d.setFromTriplets(coeffs.begin(), coeffs.end());
  d.makeCompressed();
  return d;
}

ad::Tensor laplacian_loss(std::shared_ptr<const SparseMatrix> laplacian,
                          const ad::Tensor& before, const ad::Tensor& after) {
  if (before.rows() != after.rows() || before.cols() != after.cols()) {
    throw DimensionError("laplacian_loss: before/after positions differ in shape");
  }
  ad::Tensor delta_before = ad::spmm(laplacian, before);
  ad::Tensor delta_after = ad::spmm(laplacian, after);
  return ad::reduce_sum(ad::square(ad::sub(delta_after, delta_before)));
}

ad::Tensor laplacian_loss(const TriangleMesh& topology, const ad::Tensor& before,
                          const ad::Tensor& after) {
  return laplacian_loss(std::make_shared<const SparseMatrix>(laplacian_operator(topology)),
                        before, after);
}

ad::Tensor edge_loss(std::shared_ptr<const SparseMatrix> edge_difference,
                     const ad::Tensor& positions) {
  ad::Tensor diffs = ad::spmm(std::move(edge_difference), positions);
  return ad::scalar_mul(2.0, ad::reduce_sum(ad::square(diffs)));
}

ad::Tensor edge_loss(const TriangleMesh& topology, const ad::Tensor& positions) {
  return edge_loss(
      std::make_shared<const SparseMatrix>(edge_difference_operator(topology)), positions);
}

void to_json(nlohmann::json& j, const LossReport& r) {
  j = nlohmann::json{{"l_cd", r.l_cd},
                     {"l_lap", r.l_lap},
                     {"l_edge", r.l_edge},
                     {"L_all", r.total},
                     {"lambda_lap", r.lambda_lap},
                     {"lambda_edge", r.lambda_edge}};
}

StageOperators stage_operators(const TriangleMesh& topology) {
  StageOperators ops;
  ops.topology = topology;
  ops.laplacian = std::make_shared<const SparseMatrix>(laplacian_operator(topology));
  ops.edge_difference =
      std::make_shared<const SparseMatrix>(edge_difference_operator(topology));
  return ops;
}

TotalLoss total_loss(std::span<const BlockLossInput> blocks, const SampleBatch& target,
                     const LossWeights& weights, bool mean_chamfer) {
  if (blocks.empty()) throw EmptyInputError("total_loss: no block predictions");
  TotalLoss out;
  out.report.lambda_lap = weights.lambda_lap;
  out.report.lambda_edge = weights.lambda_edge;
  for (const BlockLossInput& b : blocks) {
    ad::Tensor cd = chamfer_loss(b.predicted_samples.points, target.points, mean_chamfer);
    ad::Tensor lap = laplacian_loss(b.operators->laplacian, b.input_positions, b.predicted);
    ad::Tensor edge = edge_loss(b.operators->edge_difference, b.predicted);
    ad::Tensor all = ad::add(cd, ad::add(ad::scalar_mul(weights.lambda_lap, lap),
                                         ad::scalar_mul(weights.lambda_edge, edge)));

    LossReport r;
    r.l_cd = cd.value()(0, 0);
    r.l_lap = lap.value()(0, 0);
    r.l_edge = edge.value()(0, 0);
    r.total = all.value()(0, 0);
    r.lambda_lap = weights.lambda_lap;
    r.lambda_edge = weights.lambda_edge;
    out.blocks.push_back(r);

    if (b.weight == 0.0) continue;
    ad::Tensor weighted = b.weight == 1.0 ? all : ad::scalar_mul(b.weight, all);
    out.total = out.total.valid() ? ad::add(out.total, weighted) : weighted;
    out.report.l_cd += b.weight * r.l_cd;
    out.report.l_lap += b.weight * r.l_lap;
    out.report.l_edge += b.weight * r.l_edge;
    out.report.total += b.weight * r.total;
  }
  if (!out.total.valid()) throw std::invalid_argument("total_loss: every block has weight 0");
  return out;
}

}  // namespace boxdeform
