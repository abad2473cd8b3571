"""Band machinery: roots, classification, surfaces, contours, numeric DOS."""

import numpy as np
import pytest

from pinnedplate.bands import (band_diagram, band_roots, band_surface,
                               classify_band, dos_numeric, isofrequency)
from pinnedplate.green import dispersion_value
from pinnedplate.lattice import Lattice, bz_path, symmetry_points
from pinnedplate.latsum import SumConfig

SQ3 = np.sqrt(3.0)
KD1 = 2 * np.pi * np.sqrt(4.0 / 3.0)
CFG = SumConfig(spectral_cutoff=64)
CFG_FAST = SumConfig(spectral_cutoff=16)


def test_triangular_zone_centre_roots_and_filter():
    tri = Lattice.triangular(1.0)
    roots = band_roots((0.0, 0.0), tri, (3.7, 6.0), CFG, apply_bloch_filter=True)
    massive = [r for r in roots if r.classification == "massive"]
    assert len(massive) == 2
    assert massive[0].k == pytest.approx(4.2464209, abs=1e-5)
    assert massive[1].k == pytest.approx(5.2050307, abs=1e-5)
    assert massive[0].bloch_pass is True
    assert massive[1].bloch_pass is False
    assert massive[0].parity == "unfolded"
    assert massive[1].parity == "folded"


def test_roots_change_sign_across_tight_bracket():
    tri = Lattice.triangular(1.0)
    from pinnedplate.latsum import SpectralProfile
    prof = SpectralProfile(tri, (0.0, 0.0), 64)
    for r in band_roots((0.0, 0.0), tri, (3.7, 6.0), CFG):
        if r.classification != "massive" or r.parity == "folded":
            continue
        assert prof.value(r.k - 5e-9) < 0 < prof.value(r.k + 5e-9)


def test_rectangular_y_point_degeneracy():
    lat = Lattice.rectangular(1.0, np.sqrt(2.0))
    y = symmetry_points(lat)["Y"].position
    roots = band_roots(y, lat, (6.0, 7.0), CFG)
    massless = [r for r in roots if r.classification == "massless"]
    assert len(massless) == 1
    assert massless[0].k == pytest.approx(3 * np.pi / np.sqrt(2.0), abs=1e-9)
    assert massless[0].multiplicity >= 2


def test_empty_interval_returns_nothing():
    lat = Lattice.rectangular(1.0, 1.0)
    assert band_roots((1e-9, 1e-9), lat, (0.5, 1.5), CFG) == []


def test_at_most_one_massive_root_per_pole_interval():
    from pinnedplate.latsum import SpectralProfile
    lat = Lattice.rectangular(1.0, np.sqrt(2.0))
    rng = np.random.default_rng(23)
    for _ in range(5):
        k0 = rng.uniform(0.2, 0.45, 2) * 2 * np.pi / np.array(lat.periods)
        roots = band_roots(k0, lat, (0.5, 9.0), CFG)
        massive = [r.k for r in roots if r.classification == "massive"]
        poles = SpectralProfile(lat, k0, 8).pole_magnitudes()
        edges = [0.5] + sorted(p for p in poles if 0.5 < p < 9.0) + [9.0]
        for a, b in zip(edges[:-1], edges[1:]):
            inside = [k for k in massive if a < k < b]
            assert len(inside) <= 1


def test_massless_massive_ordering_near_zone_edge():
    # aspect ratio sqrt(2): crossing the band cluster near k ~ 6.8 the order
    # of band characters differs between the MY and YG segments
    lat = Lattice.rectangular(1.0, np.sqrt(2.0))
    y = symmetry_points(lat)["Y"].position
    on_my = y + np.array([0.35, 0.0])
    roots = band_roots(on_my, lat, (6.3, 7.25), CFG)
    pattern = [r.classification for r in roots]
    assert pattern == ["massless", "massive", "massless", "massive", "massless"]
    on_yg = y - np.array([0.0, 0.35])
    roots = band_roots(on_yg, lat, (6.35, 7.1), CFG)
    pattern = [r.classification for r in roots]
    assert pattern == ["massive", "massless", "massive", "massless", "massive"]


def test_classify_band_on_light_line():
    lat = Lattice.rectangular(1.0, 2.0)
    k0 = np.array([0.3, 0.2])
    k_ll = np.hypot(0.3 + 2 * np.pi, 0.2)
    assert classify_band(k0, k_ll, lat) == "massless"
    assert classify_band(k0, k_ll + 0.05, lat) == "massive"


def test_band_diagram_shapes_and_degeneracy():
    lat = Lattice.rectangular(1.0, 1.0)
    pts = symmetry_points(lat)
    params, nodes = bz_path(lat, [pts["X"], pts["M"], pts["Y"]], 3)
    band_points, lights = band_diagram(params, nodes, lat, (9.5, 10.3), CFG)
    at_m = [bp for bp in band_points
            if np.allclose(bp.k0, pts["M"].position, atol=1e-12)]
    assert any(bp.classification == "massless"
               and abs(bp.k - np.sqrt(10) * np.pi) < 1e-9 for bp in at_m)
    assert all(len(row) == 5 for row in lights)
    assert band_points == sorted(band_points, key=lambda bp: bp.path_param)


def test_band_diagram_empty_range():
    lat = Lattice.rectangular(1.0, 1.0)
    pts = symmetry_points(lat)
    params, nodes = bz_path(lat, [pts["G"], pts["X"]], 3)
    band_points, _ = band_diagram(params, nodes, lat, (0.4, 0.5), CFG)
    assert band_points == []


def _gamma_window_surface(n=40, w=0.30, depth=0.32, cfg=CFG_FAST):
    tri = Lattice.triangular(1.0)
    xs = np.linspace(0.0, w, n)
    ys = np.linspace(0.0, w, n)
    return band_surface(tri, xs, ys, (KD1 - depth, KD1 - 1e-9), cfg)


def test_surface_mirror_symmetry():
    tri = Lattice.triangular(1.0)
    ys = np.linspace(0.0, 0.2, 6)
    left = band_surface(tri, np.linspace(-0.2, 0.0, 6), ys, (6.9, KD1 - 1e-9),
                        CFG_FAST)
    right = band_surface(tri, np.linspace(0.2, 0.0, 6), ys, (6.9, KD1 - 1e-9),
                         CFG_FAST)
    assert np.allclose(left.sheets, right.sheets, atol=1e-8, equal_nan=True)


def test_isofrequency_vertices_reinterpolate_to_level():
    surf = _gamma_window_surface(n=28)
    level = KD1 - 0.12
    contour = isofrequency(surf, level)
    assert contour.polylines
    xs, ys = surf.k0x, surf.k0y
    for poly in contour.polylines:
        for (x, y) in poly:
            i = min(np.searchsorted(xs, x + 1e-13) - 1, len(xs) - 2)
            j = min(np.searchsorted(ys, y + 1e-13) - 1, len(ys) - 2)
            i, j = max(i, 0), max(j, 0)
            vals = []
            for S in surf.sheets:
                z = S[i:i + 2, j:j + 2]
                if not np.all(np.isfinite(z)):
                    continue
                tx = (x - xs[i]) / (xs[i + 1] - xs[i])
                ty = (y - ys[j]) / (ys[j + 1] - ys[j])
                vals.append((z[0, 0] * (1 - tx) * (1 - ty)
                             + z[1, 0] * tx * (1 - ty)
                             + z[0, 1] * (1 - tx) * ty
                             + z[1, 1] * tx * ty))
            # vertex sits on a cell edge: bilinear reduces to the edge's
            # linear interpolant for the sheet that generated it
            assert any(abs(v - level) < 5e-4 for v in vals)
    # edge-exactness: vertices on horizontal/vertical grid lines
    poly = contour.polylines[0]
    on_edge = [p for p in poly
               if np.any(np.abs(xs - p[0]) < 1e-12)
               or np.any(np.abs(ys - p[1]) < 1e-12)]
    assert len(on_edge) > 0


def test_isofrequency_empty_below_bands():
    surf = _gamma_window_surface(n=16)
    contour = isofrequency(surf, 1.0)
    assert contour.polylines == []


def test_cone_contours_match_circles():
    surf = _gamma_window_surface(n=48, w=0.16, depth=0.20)
    dk = 0.05
    contour = isofrequency(surf, KD1 - dk)
    radii = {(np.mean([np.hypot(*p) for p in poly]) / dk): poly
             for poly in contour.polylines if len(poly) > 4}
    alphas = sorted(radii)
    assert len(alphas) == 2
    assert alphas[0] == pytest.approx(2 / SQ3, rel=0.02)
    assert alphas[1] == pytest.approx(2.0, rel=0.02)


def test_dos_zero_in_band_gap():
    surf = _gamma_window_surface(n=16)
    assert dos_numeric(surf, 2.0) == 0.0


def test_dos_slope_matches_analytic_cone_sum():
    # below the first zone-centre degeneracy the two cone sheets contribute
    # gamma_in + gamma_out = (2/3 + 2)/pi = 8/(3 pi) per unit of |k - k_D|
    surf = _gamma_window_surface(n=72, w=0.26, depth=0.30)
    dks = np.array([0.04, 0.06, 0.08, 0.10])
    Ns = np.array([dos_numeric(surf, KD1 - dk, symmetry_factor=4.0)
                   for dk in dks])
    design = np.vstack([dks, dks ** 2]).T
    (slope, _), *_ = np.linalg.lstsq(design, Ns, rcond=None)
    assert slope == pytest.approx(8 / (3 * np.pi), rel=0.05)


def test_group_velocity_of_inner_cone_along_gamma_k():
    # inner cone sheet: |v_g| / k -> sqrt(3) approaching the zone centre
    tri = Lattice.triangular(1.0)
    u = np.array([0.5, SQ3 / 2])        # BZ corner direction
    ts = (0.08, 0.06)
    slopes = []
    for t1, t2 in ((ts[0], ts[1]),):
        k1 = band_roots(t1 * u, tri, (KD1 - 0.4, KD1 - 1e-9), CFG)[0].k
        k2 = band_roots(t2 * u, tri, (KD1 - 0.4, KD1 - 1e-9), CFG)[0].k
        slopes.append((k2 - k1) / (t2 - t1))
    vg_over_k = 2 * abs(slopes[0])
    assert vg_over_k == pytest.approx(SQ3, rel=0.01)


def test_surface_sheets_sorted_and_bounded():
    surf = _gamma_window_surface(n=12)
    for i in range(len(surf.k0x)):
        for j in range(len(surf.k0y)):
            col = surf.sheets[:, i, j]
            col = col[np.isfinite(col)]
            assert np.all(np.diff(col) > -1e-12)
            if len(col):
                assert col[0] >= surf.k_range[0]
                assert col[-1] <= surf.k_range[1]


def test_slanted_profile_value_for_sqrt2_lattice():
    # ridge of the first massive band along the k0y = 0 axis
    lat = Lattice.rectangular(1.0, np.sqrt(2.0))
    cfg = SumConfig(spectral_cutoff=32)

    def first_massive(t):
        roots = band_roots((t, 1e-9), lat, (2.0, 4.0), cfg)
        ks = [r.k for r in roots if r.classification == "massive"]
        return ks[0] if ks else np.nan

    ts = np.linspace(1.9, 2.35, 10)
    ridge = max(first_massive(t) for t in ts)
    assert ridge == pytest.approx(3.1538, rel=5e-3)
    assert 3.069 < ridge
