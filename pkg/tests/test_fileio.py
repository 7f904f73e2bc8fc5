import json

import numpy as np
import pytest

from bwkit import AsymmetryError, NotPdError
from bwkit.fileio import (
    InputFormatError,
    file_sha256,
    matrix_to_obj,
    obj_to_matrix,
    read_balls,
    read_barycenter_problem,
    read_matrix,
    read_pd_matrix,
    read_set_spec,
    table1_path,
    write_matrix,
)
from bwkit.sampling import random_pd


class TestMatrixFiles:
    def test_round_trip_exact(self, tmp_path):
        m = random_pd(5, seed=123, cond=1e5)
        path = tmp_path / "m.json"
        write_matrix(path, m, name="round trip")
        back = read_matrix(path)
        np.testing.assert_array_equal(back.entries, (m + m.T) / 2.0)

    def test_obj_shape_checked(self):
        with pytest.raises(InputFormatError):
            obj_to_matrix({"rows": 2, "cols": 3, "entries": [[1, 2, 3], [4, 5, 6]]})
        with pytest.raises(InputFormatError):
            obj_to_matrix({"rows": 2, "cols": 2, "entries": [[1, 2]]})
        with pytest.raises(InputFormatError):
            obj_to_matrix({"rows": 2, "cols": 2})

    def test_asymmetric_file_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(
            {"rows": 2, "cols": 2, "entries": [[1.0, 5.0], [2.0, 3.0]]}))
        with pytest.raises(AsymmetryError):
            read_matrix(path)

    def test_pd_required(self, tmp_path):
        path = tmp_path / "npd.json"
        write_matrix(path, np.diag([1.0, -1.0]))
        with pytest.raises(NotPdError):
            read_pd_matrix(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputFormatError):
            read_matrix(tmp_path / "nope.json")

    def test_name_preserved(self):
        obj = matrix_to_obj(np.eye(2), name="identity")
        assert obj["name"] == "identity"

    def test_hash_stable(self, tmp_path):
        path = tmp_path / "h.json"
        write_matrix(path, np.eye(3))
        assert file_sha256(path) == file_sha256(path)


class TestSpecFiles:
    def test_set_spec_full(self, tmp_path):
        path = tmp_path / "spec.json"
        path.write_text(json.dumps({
            "dimension": 2,
            "trace_eq": 1.5,
            "linear_eqs": [{"matrix": [[1.0, 0.0], [0.0, 0.0]], "rhs": 0.5}],
            "linear_ineqs": [{"matrix": [[0.0, 1.0], [1.0, 0.0]], "rhs": 0.2}],
            "frobenius_ball": {"center": [[1.0, 0.0], [0.0, 1.0]], "radius": 2.0},
        }))
        spec = read_set_spec(path)
        assert spec.dimension == 2
        assert spec.trace_eq == 1.5
        assert len(spec.linear_eqs) == 1 and len(spec.linear_ineqs) == 1
        assert spec.frobenius_ball[1] == 2.0

    def test_set_spec_requires_dimension(self, tmp_path):
        path = tmp_path / "spec.json"
        path.write_text(json.dumps({"trace_eq": 1.0}))
        with pytest.raises(InputFormatError):
            read_set_spec(path)

    def test_balls_inline_and_path_centers(self, tmp_path):
        center_path = tmp_path / "c.json"
        write_matrix(center_path, 2.0 * np.eye(2))
        balls_path = tmp_path / "balls.json"
        balls_path.write_text(json.dumps({"balls": [
            {"center": "c.json", "radius_squared": 1.0},
            {"center": matrix_to_obj(np.eye(2)), "radius_squared": 2.0},
        ]}))
        balls = read_balls(balls_path)
        assert len(balls) == 2
        np.testing.assert_allclose(balls[0].center.entries, 2.0 * np.eye(2))
        assert balls[1].radius_squared == 2.0

    def test_balls_empty_rejected(self, tmp_path):
        path = tmp_path / "balls.json"
        path.write_text(json.dumps({"balls": []}))
        with pytest.raises(InputFormatError):
            read_balls(path)

    def test_barycenter_problem(self, tmp_path):
        for idx in range(2):
            write_matrix(tmp_path / f"m{idx}.json", random_pd(3, seed=idx, cond=5.0))
        path = tmp_path / "prob.json"
        path.write_text(json.dumps(
            {"weights": [1.0, 2.0], "matrix_files": ["m0.json", "m1.json"]}))
        problem = read_barycenter_problem(path)
        assert problem.weights == (1.0, 2.0)
        assert problem.dimension == 3


class TestShippedFixtures:
    def test_all_fixture_files_parse(self):
        for name in ("a1", "a2", "a3", "a4", "a5", "x_opt", "x_fp",
                     "ball_center", "ball_x",
                     "set_witness_trace1", "set_witness_trace2"):
            read_matrix(table1_path(f"{name}.json"))

    def test_witness_pair_structure(self):
        w1 = read_matrix(table1_path("set_witness_trace1.json")).entries
        w2 = read_matrix(table1_path("set_witness_trace2.json")).entries
        assert float(np.trace(w1)) == pytest.approx(1.0, abs=1e-3)
        assert float(np.trace(w2)) == pytest.approx(2.0, abs=1e-3)
        assert np.abs(w2 - 2.0 * w1).max() <= 2e-4
