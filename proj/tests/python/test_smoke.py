# Copyright 2026 The boxdeform Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json

import numpy as np
import pytest

import boxdeform as bd


def cube(subdivisions=0):
    return bd.mesh_cuboid(subdivisions=subdivisions)


def test_cube_mesh_and_subdivision():
    m = cube()
    assert (m.num_vertices, m.num_faces) == (8, 12)
    assert m.is_closed()
    s = bd.subdivide(m)
    assert (s.num_vertices, s.num_faces) == (26, 48)
    assert s.euler_characteristic() == 2
    up, feats = bd.graph_unpool(m, np.ones((8, 4)))
    assert up.num_vertices == 26
    assert np.allclose(feats, 1.0)


def test_obj_round_trip(tmp_path):
    m = cube(1)
    path = tmp_path / "cube.obj"
    bd.write_obj(str(path), m)
    back = bd.read_obj(str(path))
    assert np.array_equal(back.faces, m.faces)
    assert np.allclose(back.vertices, m.vertices)
    assert bd.obj_string(bd.parse_obj(bd.obj_string(m))) == bd.obj_string(m)


def test_adjacency_and_obb():
    a = bd.adjacency(cube(), 1, "row")
    assert np.allclose(a.sum(axis=1), 1.0)
    sym = bd.adjacency(cube(), 2)
    assert np.allclose(sym, sym.T)
    box = bd.fit_obb(cube().vertices + 3.0)
    assert np.allclose(box["center"], 3.0)
    assert np.allclose(box["extents"], 0.5)


def test_sampling_and_metrics():
    sphere = bd.make_fixtures("cube-to-sphere")[0]["target"]
    p = bd.sample_points(sphere, 500, seed=1)
    q = bd.sample_points(sphere, 500, seed=1)
    assert np.array_equal(p, q)
    assert bd.chamfer_distance(p, p) == 0.0
    assert bd.chamfer_distance(np.zeros((1, 3)), np.array([[1.0, 0, 0], [0, 2, 0]])) == 6.0
    assert bd.f1_score(p, p)["f1"] == 100.0
    assert bd.voxel_iou(sphere, sphere, 16) == 100.0
    half = cube().with_vertices(0.5 * cube().vertices)
    assert abs(bd.voxel_iou(cube(), half, 64) - 12.5) <= 1.5


def test_errors_map_to_python():
    with pytest.raises(ValueError):
        bd.make_fixtures("teapot")
    with pytest.raises(ValueError):
        bd.sample_points(cube(), 0)
    with pytest.raises(ValueError):
        bd.parse_obj("v 0 0\n")


def test_network_forward_and_checkpoint(tmp_path):
    net = bd.network(channels=8, layers_per_block=2, seed=3)
    meshes = net.forward(cube())
    assert [m.num_vertices for m in meshes] == [8, 26, 98]
    assert np.array_equal(meshes[-1].vertices, cube(2).vertices)
    assert json.loads(net.config_json)["channels"] == 8
    path = tmp_path / "net.stdn"
    net.save(str(path))
    back = bd.Network.load(str(path))
    assert back.parameter_count == net.parameter_count


def test_small_training_run():
    pairs = bd.make_fixtures("cube-to-sphere")
    net = bd.network(channels=8, layers_per_block=2)
    result = bd.train(net, pairs, iterations=30, eval_every=10, samples=200, lr=1e-3)
    assert len(result["curve"]) == 31
    assert result["best_val_cd"] <= result["initial_val_cd"]
    report = bd.evaluate(result["best"], pairs, resolution=16, samples=300)
    assert report[-1]["id"] == "mean"
    assert 0.0 <= report[0]["f1"] <= 100.0


def test_gradient_suite():
    checks = bd.gradient_suite(1)
    assert checks and all(passed for _, _, passed in checks)
