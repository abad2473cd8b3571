"""Finite pinned clusters: system build, boundary data, localisation."""

import numpy as np
import pytest

from pinnedplate.cluster import (ClusterGeometry, ClusterSolution, build_cluster,
                                 direction_degrees, field_map,
                                 localization_metric, solve_cluster)
from pinnedplate.errors import DegenerateWeightsError, DuplicatePinsError
from pinnedplate.green import free_green
from pinnedplate.lattice import Lattice

RHO = np.sqrt(2.0)


def _axis_distance_deg(direction, axis) -> float:
    ang = direction_degrees(direction)
    target = 0.0 if axis == "x" else 90.0
    d = abs(ang - target) % 180.0
    return min(d, 180.0 - d)


@pytest.fixture(scope="module")
def geometry():
    return ClusterGeometry.rectangular(Lattice.rectangular(1.0, RHO), 7)


def test_matrix_symmetric_with_regularised_diagonal(geometry):
    k = 3.0
    A = build_cluster(geometry, k)
    assert np.array_equal(A, A.T)
    assert np.allclose(np.diag(A), 1j / (8 * k * k))


def test_single_pin_cluster():
    geo = ClusterGeometry(np.array([[0.0, 0.0]]), 0)
    k = 2.0
    A = build_cluster(geo, k)
    assert A.shape == (1, 1)
    assert A[0, 0] == free_green(0.0, k)
    sol = solve_cluster(geo, k)
    assert sol.coefficients[0] == pytest.approx(1.0 / free_green(0.0, k))


def test_offdiagonal_decay_follows_far_field_envelope(geometry):
    k = 3.0
    A = build_cluster(geometry, k)
    pins = geometry.pins
    src = geometry.source_index
    r = np.hypot(pins[:, 0] - pins[src, 0], pins[:, 1] - pins[src, 1])
    far = r > 5.0
    envelope = np.sqrt(2 / (np.pi * k * r[far])) / (8 * k * k)
    assert np.allclose(np.abs(A[src, far]), envelope, rtol=0.05)


def test_boundary_data_reproduced_at_pins(geometry):
    sol = solve_cluster(geometry, 3.069)
    pins = geometry.pins
    w = np.array([
        field_map(sol, [x], [y])[0, 0] for (x, y) in pins[:40]
    ])
    src = geometry.source_index
    expected = np.zeros(40, dtype=complex)
    if src < 40:
        expected[src] = 1.0
    assert np.allclose(w, expected, atol=1e-8)


def test_far_field_displacement_decay(geometry):
    # radii beyond the Fraunhofer distance k D^2 / 2 ~ 74 of this cluster
    sol = solve_cluster(geometry, 3.0)
    rs = np.array([400.0, 800.0, 1600.0])
    vals = np.array([abs(field_map(sol, [r], [0.0])[0, 0]) for r in rs])
    ratios = vals[:-1] / vals[1:]
    # r^{-1/2} envelope: doubling r shrinks |w| by sqrt(2)
    assert np.allclose(ratios, np.sqrt(2.0), rtol=0.05)


def test_reciprocity(geometry):
    k = 3.3
    A = build_cluster(geometry, k)
    n = len(A)
    src1, src2 = geometry.source_index, n // 3
    f1 = np.zeros(n, dtype=complex); f1[src1] = 1.0
    f2 = np.zeros(n, dtype=complex); f2[src2] = 1.0
    a1 = np.linalg.solve(A, f1)
    a2 = np.linalg.solve(A, f2)
    assert a1[src2] == pytest.approx(a2[src1], abs=1e-8 * max(1, abs(a1[src2])))


def test_duplicate_pins_rejected():
    with pytest.raises(DuplicatePinsError):
        ClusterGeometry(np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]), 0)


def test_localization_uniform_square_is_isotropic():
    geo = ClusterGeometry.rectangular(Lattice.rectangular(1.0, 1.0), 4)
    sol = ClusterSolution(geo, 1.0, np.ones(len(geo.pins), dtype=complex))
    _, aniso = localization_metric(sol)
    assert aniso == pytest.approx(1.0, rel=1e-12)


def test_localization_single_column_hits_cap():
    geo = ClusterGeometry.rectangular(Lattice.rectangular(1.0, 1.0), 4)
    coeffs = np.zeros(len(geo.pins), dtype=complex)
    on_axis = np.abs(geo.pins[:, 0]) < 1e-12
    coeffs[on_axis] = 1.0
    sol = ClusterSolution(geo, 1.0, coeffs)
    direction, aniso = localization_metric(sol)
    assert _axis_distance_deg(direction, "y") < 1e-9
    assert aniso == pytest.approx(1e14)


def test_localization_degenerate_weights():
    geo = ClusterGeometry.rectangular(Lattice.rectangular(1.0, 1.0), 2)
    coeffs = np.zeros(len(geo.pins), dtype=complex)
    coeffs[3] = 2.0
    with pytest.raises(DegenerateWeightsError):
        localization_metric(ClusterSolution(geo, 1.0, coeffs))


def test_trapped_mode_directions(geometry):
    sol_y = solve_cluster(geometry, 3.069)
    dir_y, aniso_y = localization_metric(sol_y)
    assert _axis_distance_deg(dir_y, "y") < 5.0

    sol_x = solve_cluster(geometry, 4.4000)
    dir_x, aniso_x = localization_metric(sol_x)
    assert _axis_distance_deg(dir_x, "x") < 5.0

    cross = abs(np.degrees(np.arccos(np.clip(abs(dir_x @ dir_y), 0, 1))))
    assert abs(cross - 90.0) < 5.0

    # regression values from the first validated run of this 15 x 15 cluster
    assert aniso_y == pytest.approx(2.1724, rel=1e-3)
    assert aniso_x == pytest.approx(3.9070, rel=1e-3)


def test_condition_estimate_attached(geometry):
    sol = solve_cluster(geometry, 3.3)
    assert np.isfinite(sol.condition_estimate)
    assert sol.condition_estimate > 1.0
