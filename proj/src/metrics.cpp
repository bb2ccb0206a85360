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

#include "boxdeform/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <exception>
#include <stdexcept>
#include <thread>

#include "boxdeform/errors.hpp"
#include "boxdeform/losses.hpp"
#include "boxdeform/sampling.hpp"

namespace boxdeform {

namespace {

constexpr std::uint64_t kTargetStream = 0x9e3779b97f4a7c15ULL;
constexpr int kPadding = 2;
constexpr double kTouchTolerance = 1e-9;

double percent_within(const Eigen::VectorXd& squared, double d) {
  const auto hits = (squared.array() <= d).count();
  return 100.0 * static_cast<double>(hits) / static_cast<double>(squared.size());
}

// Separating axis test between a triangle (relative to the box centre) and
// an axis-aligned box with half size `half`. Touching counts as overlap.
bool triangle_touches_box(const std::array<Vec3, 3>& t, double half) {
  const double r_box_slack = half * (1.0 + kTouchTolerance);
  auto separated = [&](const Vec3& axis) {
    const double p0 = axis.dot(t[0]);
    const double p1 = axis.dot(t[1]);
    const double p2 = axis.dot(t[2]);
    const double r = r_box_slack * axis.cwiseAbs().sum();
    return std::min({p0, p1, p2}) > r || std::max({p0, p1, p2}) < -r;
  };
  for (int a = 0; a < 3; ++a) {
    if (separated(Vec3::Unit(a))) return false;
  }
  const std::array<Vec3, 3> edges = {t[1] - t[0], t[2] - t[1], t[0] - t[2]};
  if (separated(edges[0].cross(edges[1]))) return false;
  for (int a = 0; a < 3; ++a) {
    for (const Vec3& e : edges) {
      const Vec3 axis = Vec3::Unit(a).cross(e);
      if (axis.squaredNorm() > 0.0 && separated(axis)) return false;
    }
  }
  return true;
}

void rasterize_surface(const TriangleMesh& mesh, VoxelGrid& grid) {
  const int n = grid.resolution;
  const double h = grid.cell;
  auto cell_of = [&](double x, int axis, double nudge) {
    const int i = static_cast<int>(std::floor((x - grid.origin[axis]) / h + nudge));
    return std::clamp(i, 0, n - 1);
  };
  for (const Face& f : mesh.faces()) {
    const std::array<Vec3, 3> corners = {mesh.vertex(f[0]), mesh.vertex(f[1]), mesh.vertex(f[2])};
    const Vec3 lo = corners[0].cwiseMin(corners[1]).cwiseMin(corners[2]);
    const Vec3 hi = corners[0].cwiseMax(corners[1]).cwiseMax(corners[2]);
    std::array<int, 3> first{}, last{};
    for (int a = 0; a < 3; ++a) {
      first[a] = cell_of(lo[a], a, -1e-6);
      last[a] = cell_of(hi[a], a, 1e-6);
    }
    for (int k = first[2]; k <= last[2]; ++k) {
      for (int j = first[1]; j <= last[1]; ++j) {
        for (int i = first[0]; i <= last[0]; ++i) {
          const size_t idx = grid.index(i, j, k);
          if (grid.occupied[idx]) continue;
          const Vec3 centre = grid.origin + h * Vec3(i + 0.5, j + 0.5, k + 0.5);
          const std::array<Vec3, 3> local = {corners[0] - centre, corners[1] - centre,
                                             corners[2] - centre};
          if (triangle_touches_box(local, 0.5 * h)) grid.occupied[idx] = 1;
        }
      }
    }
  }
}

// Marks every free cell not 6-connected to the grid boundary.
void fill_interior(VoxelGrid& grid) {
  const int n = grid.resolution;
  std::vector<std::uint8_t> outside(grid.occupied.size(), 0);
  std::deque<std::array<int, 3>> queue;
  auto visit = [&](int i, int j, int k) {
    if (i < 0 || j < 0 || k < 0 || i >= n || j >= n || k >= n) return;
    const size_t idx = grid.index(i, j, k);
    if (grid.occupied[idx] || outside[idx]) return;
    outside[idx] = 1;
    queue.push_back({i, j, k});
  };
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      visit(0, a, b);
      visit(n - 1, a, b);
      visit(a, 0, b);
      visit(a, n - 1, b);
      visit(a, b, 0);
      visit(a, b, n - 1);
    }
  }
  while (!queue.empty()) {
    const auto [i, j, k] = queue.front();
    queue.pop_front();
    visit(i - 1, j, k);
    visit(i + 1, j, k);
    visit(i, j - 1, k);
    visit(i, j + 1, k);
    visit(i, j, k - 1);
    visit(i, j, k + 1);
  }
  for (size_t idx = 0; idx < outside.size(); ++idx) {
    if (!outside[idx]) grid.occupied[idx] = 1;
  }
}

Matrix normalize(const Matrix& points, const Vec3& centre, double scale) {
  return (points.rowwise() - centre.transpose()) * scale;
}

}  // namespace

F1Score f1_score(const Matrix& pred, const Matrix& gt, double d) {
  if (pred.rows() == 0 || gt.rows() == 0) throw EmptyInputError("f1_score: empty point set");
  if (pred.cols() != 3 || gt.cols() != 3) throw DimensionError("f1_score: points must be n x 3");
  if (!(d > 0.0)) throw std::invalid_argument("f1_score: threshold must be > 0");
  F1Score s;
  s.precision = percent_within(nearest_squared_distances(pred, gt), d);
  s.recall = percent_within(nearest_squared_distances(gt, pred), d);
  if (s.precision > 0.0 && s.recall > 0.0) {
    s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  }
  return s;
}

double chamfer_distance(const Matrix& a, const Matrix& b, bool mean) {
  Tape tape;
  return chamfer_loss(tape.borrow(a, false), tape.borrow(b, false), mean).value()(0, 0);
}

size_t VoxelGrid::count() const {
  return static_cast<size_t>(std::count(occupied.begin(), occupied.end(), std::uint8_t{1}));
}

VoxelGrid shared_grid(const TriangleMesh& a, const TriangleMesh& b, int resolution) {
  if (resolution < 8) throw std::invalid_argument("voxel grid: resolution must be >= 8");
  if (a.num_vertices() == 0 || b.num_vertices() == 0) {
    throw EmptyInputError("voxel grid: empty mesh");
  }
  const auto [lo_a, hi_a] = bounding_box(a.vertices());
  const auto [lo_b, hi_b] = bounding_box(b.vertices());
  const Vec3 lo = lo_a.cwiseMin(lo_b);
  const Vec3 hi = hi_a.cwiseMax(hi_b);
  double side = (hi - lo).maxCoeff();
  if (!(side > 0.0)) side = 1.0;
  VoxelGrid grid;
  grid.resolution = resolution;
  grid.cell = side / static_cast<double>(resolution - 2 * kPadding);
  grid.origin = 0.5 * (lo + hi) - Vec3::Constant(0.5 * resolution * grid.cell);
  grid.occupied.assign(static_cast<size_t>(resolution) * resolution * resolution, 0);
  return grid;
}

void voxelize(const TriangleMesh& mesh, VoxelGrid& grid, bool fill) {
  rasterize_surface(mesh, grid);
  if (fill) fill_interior(grid);
}

VoxelIou voxel_iou(const TriangleMesh& a, const TriangleMesh& b, int resolution) {
  if (a.num_faces() == 0 || b.num_faces() == 0) throw EmptyInputError("voxel_iou: mesh has no faces");
  VoxelIou result;
  result.surface_only = !a.is_closed() || !b.is_closed();
  VoxelGrid ga = shared_grid(a, b, resolution);
  VoxelGrid gb = ga;
  voxelize(a, ga, !result.surface_only);
  voxelize(b, gb, !result.surface_only);
  size_t both = 0, either = 0;
  for (size_t i = 0; i < ga.occupied.size(); ++i) {
    both += ga.occupied[i] & gb.occupied[i];
    either += ga.occupied[i] | gb.occupied[i];
  }
  result.iou = either == 0 ? 0.0 : 100.0 * static_cast<double>(both) / static_cast<double>(either);
  return result;
}

nlohmann::json to_json(const MetricReport& r) {
  return nlohmann::json{
      {"id", r.id},
      {"chamfer", r.chamfer},
      {"f1", r.f1.f1},
      {"precision", r.f1.precision},
      {"recall", r.f1.recall},
      {"threshold", r.threshold},
      {"iou", r.iou},
      {"resolution", r.resolution},
      {"iou_surface_only", r.iou_surface_only},
      {"samples", r.samples},
      {"distance", std::string("squared euclidean; target bounding box scaled to longest side 1; "
                               "chamfer is a ") +
                       (r.mean_chamfer ? "mean" : "sum") + " over both directions"}};
}

MetricReport compare_meshes(const TriangleMesh& pred, const TriangleMesh& gt,
                            const EvalConfig& config, std::uint64_t seed, std::string id) {
  if (config.samples < 1) throw std::invalid_argument("evaluate: samples must be >= 1");
  const auto [lo, hi] = bounding_box(gt.vertices());
  const double side = (hi - lo).maxCoeff();
  if (!(side > 0.0)) throw GeometryError("evaluate: target mesh has zero extent");
  const Vec3 centre = 0.5 * (lo + hi);

  Rng pred_rng(seed);
  Rng gt_rng(seed ^ kTargetStream);
  const Matrix p = normalize(sample_points(pred, config.samples, pred_rng), centre, 1.0 / side);
  const Matrix g = normalize(sample_points(gt, config.samples, gt_rng), centre, 1.0 / side);

  MetricReport r;
  r.id = std::move(id);
  r.chamfer = chamfer_distance(p, g, config.mean_chamfer);
  r.f1 = f1_score(p, g, config.threshold);
  r.threshold = config.threshold;
  const VoxelIou iou = voxel_iou(pred, gt, config.resolution);
  r.iou = iou.iou;
  r.iou_surface_only = iou.surface_only;
  r.resolution = config.resolution;
  r.samples = config.samples;
  r.mean_chamfer = config.mean_chamfer;
  return r;
}

Evaluation evaluate(const DeformationNetwork& net, std::span<const DatasetPair> dataset,
                    const EvalConfig& config) {
  if (dataset.empty()) throw EmptyInputError("evaluate: empty dataset");
  for (const auto& p : dataset) p.validate();
  Evaluation out;
  out.pairs.resize(dataset.size());
  std::vector<std::exception_ptr> errors(dataset.size());

  auto run = [&](size_t i) {
    try {
      const auto meshes = network_forward(net, dataset[i].source);
      out.pairs[i] = compare_meshes(meshes.back(), dataset[i].target, config, config.seed + i,
                                    dataset[i].id);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const int requested = config.threads > 0 ? config.threads : default_thread_count();
  const size_t workers = std::min(dataset.size(), static_cast<size_t>(std::max(1, requested)));
  if (workers <= 1) {
    for (size_t i = 0; i < dataset.size(); ++i) run(i);
  } else {
    std::vector<std::thread> pool;
    for (size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (size_t i = w; i < dataset.size(); i += workers) run(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  MetricReport& m = out.mean;
  m.id = "mean";
  m.threshold = config.threshold;
  m.resolution = config.resolution;
  m.samples = config.samples;
  m.mean_chamfer = config.mean_chamfer;
  for (const auto& r : out.pairs) {
    m.chamfer += r.chamfer;
    m.f1.f1 += r.f1.f1;
    m.f1.precision += r.f1.precision;
    m.f1.recall += r.f1.recall;
    m.iou += r.iou;
    m.iou_surface_only = m.iou_surface_only || r.iou_surface_only;
  }
  const double n = static_cast<double>(out.pairs.size());
  m.chamfer /= n;
  m.f1.f1 /= n;
  m.f1.precision /= n;
  m.f1.recall /= n;
  m.iou /= n;
  return out;
}

void write_metrics_jsonl(std::ostream& out, const Evaluation& evaluation) {
  for (const auto& r : evaluation.pairs) out << to_json(r).dump() << '\n';
  nlohmann::json mean = to_json(evaluation.mean);
  mean["pairs"] = evaluation.pairs.size();
  out << mean.dump() << '\n';
}

int default_thread_count() {
  if (const char* env = std::getenv("STDNET_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min(v, 1024L));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace boxdeform
