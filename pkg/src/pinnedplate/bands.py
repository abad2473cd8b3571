"""Band structure machinery: pole-bracketed roots, diagrams, surfaces, DOS.

The dispersion function is strictly increasing in k between consecutive
light-line poles k = |Q_h(k0)|, so every open interval between poles holds at
most one (massive) root, located by sign change and refined by bisection.
Degenerate pole clusters (two or more coincident |Q_h|) are themselves Bloch
modes - combinations of the coincident plane waves vanish on every pin - and
are emitted as massless roots carrying the cluster multiplicity.  Those
entries double as the limits of massive roots pinched between splitting
poles, which keeps the sorted sheet arrays continuous across mirror lines.

Triangular lattices are handled through the interlaced-rectangular
representation: candidates come from the dispersion sum at k0 (genuine
triangular Bloch modes, "unfolded") and at k0 + fold vector ("folded"); the
Bloch-ratio filter of :mod:`pinnedplate.green` distinguishes them.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import NoConvergenceError, UnresolvedGradientWarning
from .green import bloch_ratio
from .lattice import Lattice, LatticeFamily
from .latsum import (DEFAULT_CONFIG, HARD_CUTOFF_CAP, SpectralProfile,
                     SumConfig, _min_cutoff)

MASSIVE = "massive"
MASSLESS = "massless"

#: relative spacing below which two pole magnitudes form a degenerate cluster
DEGENERACY_TOL = 1e-9
#: bisection tolerance in k
ROOT_TOL = 1e-10
_BISECT_CAP = 200


@dataclass(frozen=True)
class BandRoot:
    """One dispersion root at fixed k0."""

    k: float
    classification: str
    multiplicity: int = 1
    parity: str | None = None     # "unfolded" / "folded" for triangular lattices
    bloch_pass: bool | None = None


@dataclass(frozen=True)
class BandPoint:
    """One entry of a band diagram table."""

    path_param: float
    k0: tuple[float, float]
    band_index: int
    k: float
    classification: str


@dataclass
class BandSurface:
    """Sorted dispersion sheets over a rectangular window of the zone."""

    k0x: np.ndarray
    k0y: np.ndarray
    sheets: np.ndarray            # (n_sheets, nx, ny), NaN where absent
    k_range: tuple[float, float]
    lattice: Lattice = field(repr=False, default=None)


@dataclass
class IsoContour:
    level: float
    polylines: list                # list of (n, 2) arrays of (k0x, k0y)


def _band_cutoff(lattice: Lattice, k_max: float, k0, cfg: SumConfig) -> int:
    if cfg.spectral_cutoff is not None:
        return cfg.spectral_cutoff
    return min(max(4 * _min_cutoff(lattice, k_max, k0), 96), HARD_CUTOFF_CAP)


def _profiles(lattice: Lattice, k0, cfg: SumConfig, k_max: float):
    k0 = np.asarray(k0, dtype=float)
    H = _band_cutoff(lattice, k_max, k0, cfg)
    if lattice.family is LatticeFamily.TRIANGULAR:
        return [("unfolded", SpectralProfile(lattice, k0, H)),
                ("folded", SpectralProfile(lattice, k0 + lattice.fold_vector, H))]
    return [(None, SpectralProfile(lattice, k0, H))]


def _pole_clusters(profile: SpectralProfile, k_min: float, k_max: float):
    mags = profile.pole_magnitudes()
    mags = mags[(mags > k_min - 1e-12) & (mags < k_max + 1e-12)]
    clusters = []
    for q in mags:
        if clusters and q - clusters[-1][0] < DEGENERACY_TOL * max(1.0, q):
            clusters[-1][1] += 1
        else:
            clusters.append([q, 1])
    return clusters


def _bisect(f, a: float, b: float, fa: float, fb: float) -> float:
    for _ in range(_BISECT_CAP):
        m = 0.5 * (a + b)
        if b - a < ROOT_TOL:
            return m
        fm = f(m)
        if fm == 0.0:
            return m
        if (fa < 0) == (fm < 0):
            a, fa = m, fm
        else:
            b, fb = m, fm
    raise NoConvergenceError(f"bisection did not reach {ROOT_TOL} in [{a}, {b}]")


def _roots_one_profile(profile: SpectralProfile, k_min: float, k_max: float,
                       cfg: SumConfig, class_tol: float, parity):
    clusters = _pole_clusters(profile, k_min, k_max)
    roots = []
    deg_values = [q for q, m in clusters if m >= 2]
    for q, m in clusters:
        if m >= 2:
            roots.append(BandRoot(q, MASSLESS, multiplicity=m, parity=parity))
    edges = [k_min] + [q for q, _ in clusters] + [k_max]
    f = profile.value
    for a, b in zip(edges[:-1], edges[1:]):
        inset = max(0.5 * cfg.pole_guard * b, 1e-9, (b - a) * 1e-7)
        aa, bb = a + inset, b - inset
        if bb <= aa:
            continue
        fa, fb = f(aa), f(bb)
        if not (np.isfinite(fa) and np.isfinite(fb)) or (fa < 0) == (fb < 0):
            continue
        k_root = _bisect(f, aa, bb, fa, fb)
        cls = MASSIVE
        if any(abs(k_root - q) < class_tol for q in deg_values):
            cls = MASSLESS
        roots.append(BandRoot(k_root, cls, parity=parity))
    return roots


def band_roots(k0, lattice: Lattice, k_range, cfg: SumConfig = DEFAULT_CONFIG,
               class_tol: float | None = None,
               apply_bloch_filter: bool = False) -> list[BandRoot]:
    """All dispersion roots in the open interval k_range at Bloch vector k0.

    Returns BandRoot records sorted by k: massive sign-change roots plus one
    massless entry per degenerate light-line cluster (with multiplicity).
    For triangular lattices both the unfolded and folded candidate families
    are returned, tagged through ``parity``; with ``apply_bloch_filter`` the
    Bloch-ratio verdict is attached to each massive root.
    """
    k_min, k_max = float(k_range[0]), float(k_range[1])
    if k_min <= 0:
        raise ValueError("k_range must start above 0")
    if k_max <= k_min:
        return []
    k0 = np.asarray(k0, dtype=float)
    out = []
    for parity, prof in _profiles(lattice, k0, cfg, k_max):
        tol = class_tol if class_tol is not None else 1e-4 * k_max
        out.extend(_roots_one_profile(prof, k_min, k_max, cfg, tol, parity))
    out.sort(key=lambda r: r.k)
    if apply_bloch_filter and lattice.family is LatticeFamily.TRIANGULAR:
        filtered = []
        for r in out:
            if r.classification == MASSIVE:
                _, ok = bloch_ratio(r.k, k0, lattice, cfg)
                filtered.append(BandRoot(r.k, r.classification, r.multiplicity,
                                         r.parity, ok))
            else:
                filtered.append(r)
        out = filtered
    return out


def classify_band(k0, k: float, lattice: Lattice,
                  class_tol: float | None = None) -> str:
    """"massless" iff k lies within class_tol of some light line at k0."""
    tol = class_tol if class_tol is not None else 1e-4 * k
    k0 = np.asarray(k0, dtype=float)
    H = _min_cutoff(lattice, k + tol, k0) + 2
    prof = SpectralProfile(lattice, k0, H)
    mags = prof.pole_magnitudes()
    if lattice.family is LatticeFamily.TRIANGULAR:
        folded = SpectralProfile(lattice, k0 + lattice.fold_vector, H)
        mags = np.concatenate([mags, folded.pole_magnitudes()])
    return MASSLESS if np.min(np.abs(mags - k)) < tol else MASSIVE


# --------------------------------------------------------------------------
# band diagram along a zone path
# --------------------------------------------------------------------------

def band_diagram(params, points, lattice: Lattice, k_range,
                 cfg: SumConfig = DEFAULT_CONFIG,
                 lightline_bound: int | None = None):
    """Band diagram along a sampled path.

    Returns (band_points, light_lines):

    * band_points: BandPoint records; band indices connect roots across
      consecutive samples by nearest-k continuation (a heuristic at band
      crossings).
    * light_lines: rows (path_param, k0, h1, h2, k) for every light line
      entering the k range.
    """
    k_min, k_max = float(k_range[0]), float(k_range[1])
    band_points: list[BandPoint] = []
    light_rows = []
    prev_roots: list[float] = []
    prev_ids: list[int] = []
    next_id = 0

    basis = lattice.reciprocal_basis
    if lightline_bound is None:
        bmin = np.min(np.linalg.norm(basis, axis=1))
        lightline_bound = int(np.ceil(k_max / bmin)) + 2
    hs = np.arange(-lightline_bound, lightline_bound + 1)
    h1g, h2g = np.meshgrid(hs, hs, indexing="ij")
    Kgrid = h1g[..., None] * basis[0] + h2g[..., None] * basis[1]

    for s, k0 in zip(params, points):
        roots = band_roots(k0, lattice, (k_min, k_max), cfg)
        ks = [r.k for r in roots]
        ids = []
        used = set()
        for k in ks:                       # nearest-k continuation
            best_j, best_d = None, None
            for j, pk in enumerate(prev_roots):
                if prev_ids[j] in used:
                    continue
                d = abs(k - pk)
                if best_d is None or d < best_d:
                    best_j, best_d = j, d
            if best_j is not None and best_d < 0.25 * (k_max - k_min):
                ids.append(prev_ids[best_j])
                used.add(prev_ids[best_j])
            else:
                ids.append(next_id)
                next_id += 1
        for r, bid in zip(roots, ids):
            band_points.append(BandPoint(float(s), (float(k0[0]), float(k0[1])),
                                         bid, r.k, r.classification))
        prev_roots, prev_ids = ks, ids

        Q = k0 + Kgrid
        mags = np.hypot(Q[..., 0], Q[..., 1])
        inside = (mags >= k_min) & (mags <= k_max)
        for i1, i2 in zip(*np.nonzero(inside)):
            light_rows.append((float(s), (float(k0[0]), float(k0[1])),
                               int(hs[i1]), int(hs[i2]), float(mags[i1, i2])))
    return band_points, light_rows


# --------------------------------------------------------------------------
# band surfaces, isofrequency contours, numeric DOS
# --------------------------------------------------------------------------

def band_surface(lattice: Lattice, k0x, k0y, k_range,
                 cfg: SumConfig = DEFAULT_CONFIG,
                 include_folded: bool = False) -> BandSurface:
    """Sorted root sheets over the rectangular window k0x x k0y.

    For triangular lattices only the genuine (unfolded) family enters the
    surface unless ``include_folded`` is set; mixing the folded family in
    would interleave sheets belonging to displaced Bloch vectors.
    """
    k0x = np.asarray(k0x, dtype=float)
    k0y = np.asarray(k0y, dtype=float)
    if len(k0x) < 2 or len(k0y) < 2:
        raise ValueError("surface grid needs at least 2 nodes per axis")
    k_min, k_max = float(k_range[0]), float(k_range[1])
    tol = 1e-4 * k_max
    node_roots = {}
    nmax = 0
    for i, x in enumerate(k0x):
        for j, y in enumerate(k0y):
            k0 = np.array([x, y])
            ks = []
            for parity, prof in _profiles(lattice, k0, cfg, k_max):
                if parity == "folded" and not include_folded:
                    continue
                ks.extend(r.k for r in _roots_one_profile(
                    prof, k_min, k_max, cfg, tol, parity))
            ks.sort()
            node_roots[(i, j)] = ks
            nmax = max(nmax, len(ks))
    sheets = np.full((nmax, len(k0x), len(k0y)), np.nan)
    for (i, j), ks in node_roots.items():
        for b, k in enumerate(ks):
            sheets[b, i, j] = k
    return BandSurface(k0x, k0y, sheets, (k_min, k_max), lattice)


def _cell_segments(surface: BandSurface, level: float):
    """Marching-squares segments per sheet: (sheet, p0, p1, grad)."""
    xs, ys = surface.k0x, surface.k0y
    dropped = 0
    segs = []
    for si, S in enumerate(surface.sheets):
        finite = np.isfinite(S)
        for i in range(len(xs) - 1):
            for j in range(len(ys) - 1):
                if not (finite[i, j] and finite[i + 1, j]
                        and finite[i + 1, j + 1] and finite[i, j + 1]):
                    z = (S[i, j], S[i + 1, j], S[i + 1, j + 1], S[i, j + 1])
                    zf = [v for v in z if np.isfinite(v)]
                    if zf and min(zf) <= level <= max(zf):
                        dropped += 1
                    continue
                z = (S[i, j], S[i + 1, j], S[i + 1, j + 1], S[i, j + 1])
                above = [v > level for v in z]
                if all(above) or not any(above):
                    continue
                corners = ((xs[i], ys[j]), (xs[i + 1], ys[j]),
                           (xs[i + 1], ys[j + 1]), (xs[i], ys[j + 1]))
                pts = []
                for a in range(4):
                    b = (a + 1) % 4
                    if above[a] != above[b]:
                        t = (level - z[a]) / (z[b] - z[a])
                        pts.append((corners[a][0] + t * (corners[b][0] - corners[a][0]),
                                    corners[a][1] + t * (corners[b][1] - corners[a][1])))
                if len(pts) != 2:
                    dropped += 1      # ambiguous saddle cell
                    continue
                gx = ((z[1] + z[2]) - (z[0] + z[3])) / (2 * (xs[i + 1] - xs[i]))
                gy = ((z[3] + z[2]) - (z[0] + z[1])) / (2 * (ys[j + 1] - ys[j]))
                segs.append((si, pts[0], pts[1], (gx, gy)))
    return segs, dropped


def isofrequency(surface: BandSurface, level: float) -> IsoContour:
    """Isofrequency polylines at the given level via marching squares.

    Vertices interpolate the sheet linearly along cell edges, so
    re-interpolating any vertex reproduces the level exactly.  An empty
    contour is returned when the level misses every sheet.
    """
    segs, _ = _cell_segments(surface, level)
    # stitch segments into polylines by shared endpoints
    def key(p):
        return (round(p[0], 12), round(p[1], 12))

    adjacency: dict = {}
    for idx, (_, p0, p1, _) in enumerate(segs):
        adjacency.setdefault(key(p0), []).append((idx, 0))
        adjacency.setdefault(key(p1), []).append((idx, 1))
    seen = set()
    polylines = []
    for start in range(len(segs)):
        if start in seen:
            continue
        chain = [segs[start][1], segs[start][2]]
        seen.add(start)
        for endsel in (1, 0):       # extend forward then backward
            while True:
                k_end = key(chain[-1] if endsel == 1 else chain[0])
                nxt = [(i, e) for (i, e) in adjacency.get(k_end, ()) if i not in seen]
                if not nxt:
                    break
                i, e = nxt[0]
                seen.add(i)
                p_new = segs[i][2 if e == 0 else 1]
                if endsel == 1:
                    chain.append(p_new)
                else:
                    chain.insert(0, p_new)
        polylines.append(np.array(chain))
    return IsoContour(level, polylines)


def dos_numeric(surface: BandSurface, level: float,
                symmetry_factor: float = 1.0,
                return_details: bool = False):
    """Density of states N(k) = (2k/(4 pi^2)) sum over contours of ds/|v_g|.

    The group speed |v_g| = 2 k |grad k| is estimated from central
    differences of the sheet inside each contour cell.  ``symmetry_factor``
    scales window contours up to the full zone (e.g. 4 for a quadrant window
    of a symmetric structure); the Wigner-Seitz/Brillouin area product 4 pi^2
    is already folded into the prefactor.  Cells straddling a band crossing
    (missing sheet data) are dropped and reported via
    UnresolvedGradientWarning.
    """
    k = level
    segs, dropped = _cell_segments(surface, level)
    total = 0.0
    length = 0.0
    for _, p0, p1, (gx, gy) in segs:
        ds = float(np.hypot(p0[0] - p1[0], p0[1] - p1[1]))
        vg = 2.0 * k * float(np.hypot(gx, gy))
        if vg < 1e-12:
            dropped += 1
            continue
        total += ds / vg
        length += ds
    if dropped:
        warnings.warn(f"{dropped} contour cell(s) dropped at level {level:.6g}",
                      UnresolvedGradientWarning, stacklevel=2)
    dos = symmetry_factor * total * 2.0 * k / (4.0 * np.pi ** 2)
    if return_details:
        return dos, {"length": symmetry_factor * length, "dropped_cells": dropped}
    return dos
