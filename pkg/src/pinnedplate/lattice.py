"""Real and reciprocal geometry of rectangular and triangular pin arrays.

Conventions (nondimensional, d_x = 1 is the default unit of length):

* rectangular: pins at (p_x d_x, p_y d_y); reciprocal vectors
  K_h = 2*pi*(h_x/d_x, h_y/d_y).
* triangular with spacing d: pins at p_x*(d, 0) + p_y*(d/2, sqrt(3) d/2);
  quasiperiodic reciprocal vectors
  Q_h = (k0x + 2*pi*h1/d, k0y + (2*h2 - h1)*2*pi/(sqrt(3) d)).

The triangular lattice is equivalent to two interlaced rectangular lattices
of aspect ratio sqrt(3), offset by the shift vector c_T = d*(1/2, sqrt(3)/2).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

SQRT3 = np.sqrt(3.0)


class LatticeFamily(enum.Enum):
    RECTANGULAR = "rectangular"
    TRIANGULAR = "triangular"


@dataclass(frozen=True)
class Lattice:
    """Geometry of a doubly periodic pin array."""

    family: LatticeFamily
    d_x: float = 1.0
    d_y: float = 1.0
    d: float = 1.0

    def __post_init__(self):
        if self.family is LatticeFamily.RECTANGULAR:
            if not (self.d_x > 0 and self.d_y > 0):
                raise ValueError("rectangular lattice requires d_x > 0 and d_y > 0")
            if not np.isfinite(self.d_y / self.d_x):
                raise ValueError("aspect ratio must be finite")
        else:
            if not self.d > 0:
                raise ValueError("triangular lattice requires d > 0")

    # ---------------------------------------------------------------- helpers
    @classmethod
    def rectangular(cls, d_x: float = 1.0, d_y: float = 1.0) -> "Lattice":
        return cls(LatticeFamily.RECTANGULAR, d_x=float(d_x), d_y=float(d_y))

    @classmethod
    def triangular(cls, d: float = 1.0) -> "Lattice":
        return cls(LatticeFamily.TRIANGULAR, d=float(d))

    @property
    def aspect_ratio(self) -> float:
        if self.family is not LatticeFamily.RECTANGULAR:
            raise ValueError("aspect ratio is defined for rectangular lattices")
        return self.d_y / self.d_x

    @property
    def area(self) -> float:
        """Unit-cell area (A = d_x d_y, or sqrt(3) d^2 / 2)."""
        if self.family is LatticeFamily.RECTANGULAR:
            return self.d_x * self.d_y
        return SQRT3 / 2.0 * self.d * self.d

    @property
    def periods(self) -> tuple[float, float]:
        """Periods used to bound e.g. the offset-vector length zeta."""
        if self.family is LatticeFamily.RECTANGULAR:
            return (self.d_x, self.d_y)
        return (self.d, self.d)

    @property
    def reciprocal_basis(self) -> np.ndarray:
        """Rows are the primitive reciprocal vectors b_1, b_2."""
        if self.family is LatticeFamily.RECTANGULAR:
            return np.array([[2 * np.pi / self.d_x, 0.0],
                             [0.0, 2 * np.pi / self.d_y]])
        return np.array([[2 * np.pi / self.d, -2 * np.pi / (SQRT3 * self.d)],
                         [0.0, 4 * np.pi / (SQRT3 * self.d)]])

    @property
    def direct_basis(self) -> np.ndarray:
        """Rows are the primitive real-space vectors."""
        if self.family is LatticeFamily.RECTANGULAR:
            return np.array([[self.d_x, 0.0], [0.0, self.d_y]])
        return np.array([[self.d, 0.0], [self.d / 2.0, SQRT3 * self.d / 2.0]])

    # triangular-specific vectors
    @property
    def shift_vector(self) -> np.ndarray:
        """Offset c_T between the two interlaced rectangular sublattices."""
        d = self.d if self.family is LatticeFamily.TRIANGULAR else self.d_x
        return np.array([d / 2.0, SQRT3 * d / 2.0])

    @property
    def fold_vector(self) -> np.ndarray:
        """Reciprocal vector folding the interlaced-rectangular zone onto itself.

        Bloch vectors k0 and k0 + fold_vector label the two families of
        candidate roots of the interlaced-rectangular representation.
        """
        if self.family is not LatticeFamily.TRIANGULAR:
            raise ValueError("fold vector is defined for triangular lattices")
        return np.array([0.0, 2 * np.pi / (SQRT3 * self.d)])

    def real_points(self, max_index: int) -> np.ndarray:
        """All lattice points with |p_x|, |p_y| <= max_index, shape (N, 2)."""
        p = np.arange(-max_index, max_index + 1)
        px, py = np.meshgrid(p, p, indexing="ij")
        basis = self.direct_basis
        pts = px[..., None] * basis[0] + py[..., None] * basis[1]
        return pts.reshape(-1, 2)


def reciprocal_vector(lattice: Lattice, h, k0) -> np.ndarray:
    """Q_h = k0 + K_h for an integer index pair h (or an (N, 2) array of pairs).

    Rectangular: K_h = 2*pi*(h_x/d_x, h_y/d_y).
    Triangular: index pair (h1, h2) with K = (2*pi*h1/d, (2*h2-h1)*2*pi/(sqrt(3)*d)).
    """
    h = np.asarray(h, dtype=float)
    k0 = np.asarray(k0, dtype=float)
    basis = lattice.reciprocal_basis
    return k0 + np.tensordot(h, basis, axes=([-1], [0]))


@dataclass(frozen=True)
class SymmetryPoint:
    name: str
    position: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))


def symmetry_points(lattice: Lattice, custom: dict | None = None) -> dict:
    """Standard rectangular-zone corners plus optional named custom points.

    The point "alpha" appearing in catalogues of cone transits is never
    pinned down geometrically; supply it through ``custom`` if needed.
    """
    if lattice.family is not LatticeFamily.RECTANGULAR:
        raise ValueError("symmetry points are tabulated for rectangular lattices")
    dx, dy = lattice.d_x, lattice.d_y
    pts = {
        "G": SymmetryPoint("G", (0.0, 0.0)),
        "X": SymmetryPoint("X", (np.pi / dx, 0.0)),
        "Y": SymmetryPoint("Y", (0.0, np.pi / dy)),
        "M": SymmetryPoint("M", (np.pi / dx, np.pi / dy)),
    }
    for name, pos in (custom or {}).items():
        pts[name] = SymmetryPoint(name, np.asarray(pos, dtype=float))
    return pts


def bz_path(lattice: Lattice, waypoints, samples_per_leg: int):
    """Piecewise-linear path through the Brillouin zone.

    Returns (params, points): cumulative arclength parameters (monotone) and
    the sampled Bloch vectors.  Each leg includes both endpoints; interior
    waypoints are not duplicated.
    """
    if len(waypoints) < 2:
        raise ValueError("need at least 2 waypoints")
    if samples_per_leg < 2:
        raise ValueError("need samples_per_leg >= 2")
    pts = [wp.position if isinstance(wp, SymmetryPoint) else np.asarray(wp, float)
           for wp in waypoints]
    params, points = [], []
    s0 = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        leg = np.linalg.norm(b - a)
        if leg == 0.0:
            raise ValueError("coincident consecutive waypoints")
        ts = np.linspace(0.0, 1.0, samples_per_leg)
        if points:
            ts = ts[1:]
        for t in ts:
            params.append(s0 + t * leg)
            points.append(a + t * (b - a))
        s0 += leg
    return np.array(params), np.array(points)


def reduce(lattice: Lattice, k0) -> tuple[float, float]:
    """Reduced coordinates (kappa_x, kappa_y) folded into [0, 1/2]^2.

    kappa = k0 * d / (2*pi) modulo integer translations, then reflected into
    the first quadrant of the zone.  Rectangular lattices only.
    """
    if lattice.family is not LatticeFamily.RECTANGULAR:
        raise ValueError("reduce applies to rectangular lattices")
    k0 = np.asarray(k0, dtype=float)
    kap = np.array([k0[0] * lattice.d_x, k0[1] * lattice.d_y]) / (2 * np.pi)
    kap = kap - np.floor(kap)
    kap = np.where(kap > 0.5, 1.0 - kap, kap)
    return float(kap[0]), float(kap[1])
