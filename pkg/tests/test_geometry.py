import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from threatgraph.boxes import Box
from threatgraph.errors import AtInfinityError, SingularSystemError
from threatgraph.geometry import (
    FloorPoint,
    FloorTransform,
    distance_matrix,
    fit_floor_transform,
    standing_location,
)

SQUARE = [(0.0, 0.0), (4.0, 0.0), (4.0, 4.0), (0.0, 4.0)]
TRAPEZOID_IMG = [(-1.0, 1.0), (1.0, 1.0), (2.0, 2.0), (-2.0, 2.0)]
UNIT_SQUARE = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]


@pytest.mark.parametrize("box,expected", [
    (Box(100.0, 200.0, 0.4, 50.0, 1.0), (100.0, 225.0)),
    (Box(5.5, 10.0, 1.0, 3.0, 1.0), (5.5, 11.5)),
])
def test_standing_location(box, expected):
    assert standing_location(box) == expected


def test_identity_correspondence_gives_identity_matrix():
    calib = fit_floor_transform(SQUARE, SQUARE)
    assert np.abs(calib.matrix_ - np.eye(3)).max() < 1e-9


def test_doubling_correspondence_gives_diag_2_2_1():
    doubled = [(2 * x, 2 * y) for x, y in SQUARE]
    calib = fit_floor_transform(SQUARE, doubled)
    assert np.abs(calib.matrix_ - np.diag([2.0, 2.0, 1.0])).max() < 1e-9


def test_projective_maps_trapezoid_corners_exactly():
    calib = fit_floor_transform(TRAPEZOID_IMG, UNIT_SQUARE)
    residual = np.abs(calib.transform(TRAPEZOID_IMG) - np.asarray(UNIT_SQUARE))
    assert residual.max() < 1e-6


def test_paper_linear_cannot_realize_trapezoid():
    calib = fit_floor_transform(TRAPEZOID_IMG, UNIT_SQUARE, mode="paper_linear")
    residual = np.linalg.norm(calib.transform(TRAPEZOID_IMG) - np.asarray(UNIT_SQUARE), axis=1)
    assert residual.max() > 0.01


def test_paper_linear_formula_hand_instance():
    # R = [(1,0),(0,1),(1,1),(0,2)], F = [(1,0),(0,0),(0,0),(0,1)]
    # RR^T = [[2,1],[1,6]] (det 11), F R^T = [[1,0],[0,2]]
    # M = F R^T (RR^T)^-1 = [[6/11, -1/11], [-2/11, 4/11]]
    calib = fit_floor_transform(
        [(1, 0), (0, 1), (1, 1), (0, 2)],
        [(1, 0), (0, 0), (0, 0), (0, 1)],
        mode="paper_linear")
    expected = np.array([[6 / 11, -1 / 11], [-2 / 11, 4 / 11]])
    assert np.abs(calib.matrix_ - expected).max() < 1e-12


def test_paper_linear_exact_on_linear_correspondence():
    target = np.array([[2.0, 1.0], [1.0, 3.0]])
    img = np.array([(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (0.0, 2.0)])
    calib = fit_floor_transform(img, img @ target.T, mode="paper_linear")
    assert np.abs(calib.matrix_ - target).max() < 1e-12


def test_project_identity_point():
    calib = fit_floor_transform(SQUARE, SQUARE)
    assert np.abs(calib.transform([(3.0, 4.0)])[0] - (3.0, 4.0)).max() < 1e-9


def test_project_doubled_point():
    doubled = [(2 * x, 2 * y) for x, y in SQUARE]
    calib = fit_floor_transform(SQUARE, doubled)
    assert np.abs(calib.transform([(3.0, 4.0)])[0] - (6.0, 8.0)).max() < 1e-9


def test_project_trapezoid_bottom_edge_midpoint():
    calib = fit_floor_transform(TRAPEZOID_IMG, UNIT_SQUARE)
    assert np.abs(calib.transform([(0.0, 1.0)])[0] - (0.5, 0.0)).max() < 1e-9


def test_horizon_point_raises_at_infinity():
    # For the trapezoid calibration the horizon line is v = 0.
    calib = fit_floor_transform(TRAPEZOID_IMG, UNIT_SQUARE)
    with pytest.raises(AtInfinityError):
        calib.transform([(5.0, 0.0)])


def test_projection_invariant_under_matrix_scaling():
    calib = fit_floor_transform(TRAPEZOID_IMG, UNIT_SQUARE)
    points = [(0.3, 1.2), (-0.5, 1.7)]
    base = calib.transform(points)
    for lam in (2.0, -3.5, 1e-3):
        scaled = FloorTransform()
        scaled.matrix_ = calib.matrix_ * lam
        assert np.abs(scaled.transform(points) - base).max() < 1e-9


def test_inverse_transform_round_trip():
    calib = fit_floor_transform(TRAPEZOID_IMG, UNIT_SQUARE)
    points = np.array([(0.25, 0.25), (0.5, 0.9), (0.1, 0.6)])
    assert np.abs(calib.transform(calib.inverse_transform(points)) - points).max() < 1e-9


def test_collinear_image_points_rejected():
    with pytest.raises(SingularSystemError):
        fit_floor_transform([(0, 0), (1, 1), (2, 2), (0, 5)], UNIT_SQUARE)


def test_collinear_floor_targets_rejected():
    with pytest.raises(SingularSystemError):
        fit_floor_transform(SQUARE, [(0, 0), (1, 1), (2, 2), (3, 3)])


def test_unknown_mode_rejected():
    with pytest.raises(ValueError):
        FloorTransform(mode="affine").fit(SQUARE, SQUARE)


def test_distance_matrix_3_4_5():
    pts = [FloorPoint(0, 0, 1, 0), FloorPoint(3, 4, 2, 0)]
    m = distance_matrix(pts)
    assert m.ids == (1, 2)
    assert np.abs(m.d - np.array([[0, 5], [5, 0]])).max() < 1e-12


def test_distance_matrix_single_point():
    m = distance_matrix([FloorPoint(2, 3, 7, 0)])
    assert m.d.shape == (1, 1) and m.d[0, 0] == 0.0


def test_distance_matrix_right_triangle():
    pts = [FloorPoint(0, 0, 0, 0), FloorPoint(1, 0, 1, 0), FloorPoint(0, 1, 2, 0)]
    m = distance_matrix(pts)
    assert abs(m.distance(0, 1) - 1.0) < 1e-12
    assert abs(m.distance(0, 2) - 1.0) < 1e-12
    assert abs(m.distance(1, 2) - math.sqrt(2)) < 1e-12


@settings(max_examples=100)
@given(st.lists(
    st.tuples(st.floats(-100, 100), st.floats(-100, 100)),
    min_size=2, max_size=8))
def test_distance_matrix_symmetry_and_triangle(points):
    pts = [FloorPoint(x, y, i, 0) for i, (x, y) in enumerate(points)]
    m = distance_matrix(pts)
    n = len(pts)
    assert np.abs(m.d - m.d.T).max() < 1e-9
    assert np.abs(np.diag(m.d)).max() == 0.0
    for i in range(n):
        for j in range(n):
            for k in range(n):
                assert m.d[i, j] <= m.d[i, k] + m.d[k, j] + 1e-9


@settings(max_examples=50)
@given(st.permutations(list(range(5))))
def test_distance_matrix_permutation_equivariant(perm):
    coords = [(0.0, 0.0), (1.0, 2.0), (3.0, 1.0), (4.0, 4.0), (2.5, 0.5)]
    base = distance_matrix([FloorPoint(x, y, i, 0) for i, (x, y) in enumerate(coords)])
    shuffled = distance_matrix(
        [FloorPoint(*coords[p], p, 0) for p in perm])
    idx = [shuffled.ids.index(i) for i in base.ids]
    assert np.abs(shuffled.d[np.ix_(idx, idx)] - base.d).max() < 1e-12


@settings(max_examples=50)
@given(st.floats(-math.pi, math.pi), st.floats(-50, 50), st.floats(-50, 50))
def test_distances_invariant_under_rigid_floor_motion(angle, tx, ty):
    rot = np.array([[math.cos(angle), -math.sin(angle)],
                    [math.sin(angle), math.cos(angle)]])
    floor = np.asarray(UNIT_SQUARE)
    moved = floor @ rot.T + (tx, ty)
    base = fit_floor_transform(TRAPEZOID_IMG, floor)
    alt = fit_floor_transform(TRAPEZOID_IMG, moved)
    probes = [(0.2, 1.1), (-0.7, 1.8), (1.2, 1.5)]
    p0 = base.transform(probes)
    p1 = alt.transform(probes)
    for i in range(len(probes)):
        for j in range(i + 1, len(probes)):
            d0 = np.linalg.norm(p0[i] - p0[j])
            d1 = np.linalg.norm(p1[i] - p1[j])
            assert abs(d0 - d1) < 1e-9
