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

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "boxdeform/adjacency.hpp"
#include "boxdeform/dataset.hpp"
#include "boxdeform/errors.hpp"
#include "boxdeform/metrics.hpp"
#include "boxdeform/network.hpp"
#include "boxdeform/obj_io.hpp"
#include "boxdeform/sampling.hpp"
#include "boxdeform/selfcheck.hpp"
#include "boxdeform/tagcn.hpp"
#include "boxdeform/trainer.hpp"

namespace py = pybind11;
using namespace boxdeform;

using IntRows = Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>;

namespace {

std::vector<Face> to_faces(const IntRows& f) {
  std::vector<Face> faces(static_cast<size_t>(f.rows()));
  for (Eigen::Index i = 0; i < f.rows(); ++i) faces[i] = {f(i, 0), f(i, 1), f(i, 2)};
  return faces;
}

IntRows from_faces(const std::vector<Face>& faces) {
  IntRows f(static_cast<Eigen::Index>(faces.size()), 3);
  for (size_t i = 0; i < faces.size(); ++i) f.row(i) << faces[i][0], faces[i][1], faces[i][2];
  return f;
}

ObbNode make_box(const Vec3& center, const Eigen::Matrix3d& axes, const Vec3& extents) {
  ObbNode box;
  box.center = center;
  box.axes = axes;
  box.extents = extents;
  box.validate();
  return box;
}

py::dict box_dict(const ObbNode& box) {
  py::dict d;
  d["center"] = box.center;
  d["axes"] = box.axes;
  d["extents"] = box.extents;
  return d;
}

py::dict pair_dict(const DatasetPair& p) {
  py::dict d;
  d["id"] = p.id;
  d["source"] = p.source;
  d["target"] = p.target;
  return d;
}

std::vector<DatasetPair> pairs_from(const py::list& items) {
  std::vector<DatasetPair> pairs;
  for (const auto& item : items) {
    const py::dict d = item.cast<py::dict>();
    DatasetPair p;
    p.id = d.contains("id") ? d["id"].cast<std::string>() : "pair" + std::to_string(pairs.size());
    p.source = d["source"].cast<TriangleMesh>();
    p.target = d["target"].cast<TriangleMesh>();
    p.validate();
    pairs.push_back(std::move(p));
  }
  return pairs;
}

nlohmann::json parse_json(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(e.what());
  }
}

}  // namespace

PYBIND11_MODULE(_boxdeform, m) {
  m.doc() = "Graph-convolutional deformation of meshed boxes";

  py::register_exception<EmptyInputError>(m, "EmptyInputError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<GeometryError>(m, "GeometryError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<TriangleMesh>(m, "Mesh")
      .def(py::init([](const Matrix& vertices, const IntRows& faces) {
             return TriangleMesh(vertices, to_faces(faces));
           }),
           py::arg("vertices"), py::arg("faces"))
      .def_property_readonly("vertices", &TriangleMesh::vertices)
      .def_property_readonly("faces", [](const TriangleMesh& t) { return from_faces(t.faces()); })
      .def_property_readonly("edges", &TriangleMesh::edges)
      .def_property_readonly("num_vertices", &TriangleMesh::num_vertices)
      .def_property_readonly("num_faces", &TriangleMesh::num_faces)
      .def_property_readonly("num_edges", &TriangleMesh::num_edges)
      .def("euler_characteristic", &TriangleMesh::euler_characteristic)
      .def("is_closed", &TriangleMesh::is_closed)
      .def("neighbors", &TriangleMesh::neighbors, py::arg("vertex"))
      .def("with_vertices", &TriangleMesh::with_vertices, py::arg("vertices"))
      .def("__repr__", [](const TriangleMesh& t) {
        return "<Mesh " + std::to_string(t.num_vertices()) + " vertices, " + std::to_string(t.num_faces()) +
               " faces>";
      });

  m.def("mesh_cuboid", [](const Vec3& center, const Eigen::Matrix3d& axes, const Vec3& extents,
                          int subdivisions) { return mesh_cuboid(make_box(center, axes, extents), subdivisions); },
        py::arg("center") = Vec3::Zero(), py::arg("axes") = Eigen::Matrix3d::Identity(),
        py::arg("extents") = Vec3::Constant(0.5), py::arg("subdivisions") = 0,
        "Closed triangle mesh of an oriented box; axes are the columns.");
  m.def("fit_obb", [](const Matrix& points) { return box_dict(fit_obb(points)); }, py::arg("points"));
  m.def("subdivide", &subdivide, py::arg("mesh"));
  m.def("graph_unpool", &graph_unpool, py::arg("mesh"), py::arg("features"));
  m.def("surface_area", &surface_area, py::arg("mesh"));

  m.def("read_obj", [](const std::filesystem::path& p) { return read_obj(p); }, py::arg("path"));
  m.def("write_obj", [](const std::filesystem::path& p, const TriangleMesh& mesh) { write_obj(p, mesh); },
        py::arg("path"), py::arg("mesh"));
  m.def("obj_string", &obj_string, py::arg("mesh"));
  m.def("parse_obj", [](const std::string& text) {
    std::istringstream in(text);
    return read_obj(in);
  }, py::arg("text"));

  m.def("adjacency", [](const TriangleMesh& mesh, int power, const std::string& mode) {
    const AdjacencyOperator adj = build_adjacency(mesh, std::max(power, 1), parse_normalization(mode));
    return Matrix(adj.power(power));
  }, py::arg("mesh"), py::arg("power") = 1, py::arg("mode") = "symmetric",
        "Dense power of the normalized adjacency operator.");

  m.def("sample_points", [](const TriangleMesh& mesh, int n, std::uint64_t seed) {
    Rng rng(seed);
    return sample_points(mesh, n, rng);
  }, py::arg("mesh"), py::arg("n"), py::arg("seed") = 0);
  m.def("chamfer_distance", &chamfer_distance, py::arg("a"), py::arg("b"), py::arg("mean") = false);
  m.def("f1_score", [](const Matrix& pred, const Matrix& gt, double d) {
    const F1Score s = f1_score(pred, gt, d);
    py::dict out;
    out["f1"] = s.f1;
    out["precision"] = s.precision;
    out["recall"] = s.recall;
    return out;
  }, py::arg("pred"), py::arg("gt"), py::arg("d") = 1e-4);
  m.def("voxel_iou", [](const TriangleMesh& a, const TriangleMesh& b, int resolution) {
    return voxel_iou(a, b, resolution).iou;
  }, py::arg("a"), py::arg("b"), py::arg("resolution") = 32);

  m.def("fixture_kinds", &fixture_kinds);
  m.def("make_fixtures", [](const std::string& kind, std::uint64_t seed, int subdivisions) {
    py::list out;
    for (const auto& p : make_fixtures(kind, seed, subdivisions)) out.append(pair_dict(p));
    return out;
  }, py::arg("kind"), py::arg("seed") = 0, py::arg("subdivisions") = 0);

  py::class_<DeformationNetwork>(m, "Network")
      .def(py::init([](const std::string& config_json) {
             return DeformationNetwork(parse_json(config_json).get<NetworkConfig>());
           }),
           py::arg("config_json") = "{}")
      .def_static("zeros", [](const std::string& config_json) {
        return DeformationNetwork::zeros(parse_json(config_json).get<NetworkConfig>());
      }, py::arg("config_json") = "{}")
      .def_static("load", [](const std::filesystem::path& p) { return load_checkpoint(p); }, py::arg("path"))
      .def("save", [](const DeformationNetwork& net, const std::filesystem::path& p) { save_checkpoint(p, net); },
           py::arg("path"))
      .def("forward", [](const DeformationNetwork& net, const TriangleMesh& mesh) {
        return network_forward(net, mesh);
      }, py::arg("mesh"), "One predicted mesh per block.")
      .def_property_readonly("config_json", [](const DeformationNetwork& net) {
        return nlohmann::json(net.config()).dump();
      })
      .def_property_readonly("parameter_count", &DeformationNetwork::parameter_count)
      .def("parameters", [](const DeformationNetwork& net) {
        py::dict out;
        for (const auto& [name, value] : net.parameters()) out[py::str(name)] = *value;
        return out;
      });

  m.def("train", [](DeformationNetwork& net, const py::list& pairs, const std::string& config_json) {
    TrainConfig config = parse_json(config_json).get<TrainConfig>();
    // The network keeps its own architecture; the config supplies optimization.
    config.network = net.config();
    const auto data = pairs_from(pairs);
    TrainResult r;
    {
      py::gil_scoped_release release;
      r = train(net, data, config);
    }
    py::list curve;
    for (const auto& row : r.curve) {
      py::dict d;
      d["iteration"] = row.iteration;
      d["l_cd"] = row.loss.l_cd;
      d["l_lap"] = row.loss.l_lap;
      d["l_edge"] = row.loss.l_edge;
      d["total"] = row.loss.total;
      d["val_cd"] = row.val_cd ? py::cast(*row.val_cd) : py::none();
      curve.append(d);
    }
    py::dict out;
    out["curve"] = curve;
    out["initial_val_cd"] = r.initial_val_cd;
    out["final_val_cd"] = r.final_val_cd;
    out["best_val_cd"] = r.best_val_cd;
    out["best_iteration"] = r.best_iteration;
    out["best"] = r.best;
    return out;
  }, py::arg("network"), py::arg("pairs"), py::arg("config_json") = "{}",
        "Trains in place; returns the curve and the best-by-validation network.");

  m.def("evaluate", [](const DeformationNetwork& net, const py::list& pairs, double threshold, int resolution,
                       int samples, std::uint64_t seed) {
    EvalConfig config;
    config.threshold = threshold;
    config.resolution = resolution;
    config.samples = samples;
    config.seed = seed;
    config.threads = 1;
    const auto data = pairs_from(pairs);
    std::ostringstream out;
    write_metrics_jsonl(out, evaluate(net, data, config));
    return out.str();
  }, py::arg("network"), py::arg("pairs"), py::arg("threshold") = 1e-4, py::arg("resolution") = 32,
        py::arg("samples") = 2500, py::arg("seed") = 0, "Metrics as JSON lines.");

  m.def("gradient_suite", [](std::uint64_t seed) {
    py::list out;
    for (const auto& c : run_gradient_suite(seed)) {
      out.append(py::make_tuple(c.name, c.report.max_relative_error, c.report.passed));
    }
    return out;
  }, py::arg("seed") = 0);
}
