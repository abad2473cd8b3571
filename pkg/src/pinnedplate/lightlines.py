"""Analytic light-line machinery: degeneracy lines, triple points, cone fits.

In reduced coordinates kappa = (k0x d_x, k0y d_y)/(2 pi), K = k d_x/(2 pi),
rho = d_y/d_x, the light line of integer mode (n, m) reads

    rho^2 (n + kappa_x)^2 + (m + kappa_y)^2 = rho^2 K^2.

Two modes coincide along the straight line

    2 (m' - m) kappa_y = 2 rho^2 (n - n') kappa_x
                         + rho^2 (n^2 - n'^2) + (m^2 - m'^2),

and three modes meet at the rational point kappa_x = N_x/D_x,
kappa_y = N_y/D_y given below.  Whenever rho^2 is rational all of
kappa_x, kappa_y and K^2 are computed in exact fractions, so catalogue
anchors such as (1/18, 1/2, 5 sqrt(13) pi / 9) are reproduced exactly.

Cone fits at a degenerate point measure pairwise light-line intersection
distances r against the frequency offset dk and fit r = alpha dk - beta dk^2;
the normalised group speed of a branch follows from the sheet slope at the
touch direction, c = 2/alpha, giving the DOS coefficient
gamma = alpha/(pi c) = alpha^2/(2 pi).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt

import numpy as np
from scipy.optimize import brentq

from .errors import FitResidualError, IdenticalModesError, ParallelLinesError
from .lattice import Lattice, LatticeFamily, reciprocal_vector

SQRT3 = np.sqrt(3.0)

#: default frequency-offset ladder for cone fits
CONE_FIT_LADDER = tuple(np.linspace(1e-3, 1e-2, 10))
#: quadratic-model residual bound, relative to the fitted radius
CONE_FIT_RESIDUAL_TOL = 1e-6
#: deduplication tolerance on reduced coordinates
DEDUP_TOL = 1e-9


def _as_exact(rho_sq):
    """Fraction when the squared aspect ratio is (close to) rational."""
    if isinstance(rho_sq, Fraction):
        return rho_sq
    if isinstance(rho_sq, int):
        return Fraction(rho_sq)
    f = Fraction(rho_sq).limit_denominator(10 ** 6)
    return f if abs(float(f) - float(rho_sq)) < 1e-13 * max(1.0, abs(rho_sq)) else None


def radical_string(K_sq: Fraction) -> str:
    """Exact form of k = 2 pi sqrt(K_sq) as 'a*sqrt(s)*pi/b'."""
    p, q = K_sq.numerator, K_sq.denominator
    if p == 0:
        return "0"
    inner = p * q                       # k = (2 pi / q) sqrt(p q)
    square, s = 1, 1
    n = inner
    f = 2
    while f * f <= n:
        while n % (f * f) == 0:
            square *= f
            n //= f * f
        if n % f == 0:
            s *= f
            n //= f
        f += 1
    s *= n
    num, den = 2 * square, q
    g = gcd(num, den)
    num //= g
    den //= g
    core = f"{num}*" if num != 1 else ""
    root = f"sqrt({s})*" if s != 1 else ""
    out = f"{core}{root}pi"
    return out if den == 1 else f"{out}/{den}"


# --------------------------------------------------------------------------
# light lines and degeneracy lines
# --------------------------------------------------------------------------

def light_line_k(q, k0, lattice: Lattice) -> float:
    """k = |Q_h(k0)| of mode q.

    Rectangular lattices index modes by (n, m) with
    Q = (k0x + 2 pi n/d_x, k0y + 2 pi m/d_y); triangular lattices use the
    (m, n) pair of the triangular reciprocal basis.
    """
    Q = reciprocal_vector(lattice, q, k0)
    return float(np.hypot(Q[0], Q[1]))


@dataclass(frozen=True)
class DegeneracyLine:
    """Coincidence locus of two light lines: A kappa_x + B kappa_y = C."""

    q1: tuple[int, int]
    q2: tuple[int, int]
    rho_sq: object
    A: object
    B: object
    C: object
    special: str | None = None       # "vertical" (m = m') or "horizontal" (n = n')
    allowed: bool | None = None      # vertical/horizontal value in {-1/2, 0, 1/2}

    def kappa_y_at(self, kappa_x):
        if self.B == 0:
            raise ValueError("vertical degeneracy line")
        return (self.C - self.A * kappa_x) / self.B

    def K_sq_at(self, kappa_x, kappa_y):
        n, m = self.q1
        return (n + kappa_x) ** 2 + (m + kappa_y) ** 2 / self.rho_sq

    def clip_to_zone(self):
        """Endpoints of the segment inside [0, 1/2]^2, or None."""
        A, B, C = float(self.A), float(self.B), float(self.C)
        pts = []
        for x in (0.0, 0.5):
            if B != 0.0:
                y = (C - A * x) / B
                if -1e-12 <= y <= 0.5 + 1e-12:
                    pts.append((x, min(max(y, 0.0), 0.5)))
        for y in (0.0, 0.5):
            if A != 0.0:
                x = (C - B * y) / A
                if -1e-12 <= x <= 0.5 + 1e-12:
                    pts.append((min(max(x, 0.0), 0.5), y))
        uniq = []
        for p in pts:
            if not any(abs(p[0] - u[0]) + abs(p[1] - u[1]) < 1e-10 for u in uniq):
                uniq.append(p)
        if len(uniq) < 2:
            return None
        uniq.sort()
        return uniq[0], uniq[-1]


def degeneracy_line(q1, q2, rho_sq) -> DegeneracyLine:
    """Line in the reduced zone along which modes q1 and q2 coincide."""
    q1, q2 = tuple(q1), tuple(q2)
    if q1 == q2:
        raise IdenticalModesError(f"identical modes {q1}")
    exact = _as_exact(rho_sq)
    r2 = exact if exact is not None else float(rho_sq)
    n, m = q1
    np_, mp = q2
    A = 2 * r2 * (n - np_)
    B = 2 * (m - mp)
    C = -(r2 * (n * n - np_ * np_) + (m * m - mp * mp))
    special = None
    allowed = None
    half = Fraction(1, 2) if exact is not None else 0.5
    if m == mp:
        special = "vertical"
        value = -(n + np_) * half       # kappa_x on the line
        allowed = value in (-half, 0, half) if exact is not None \
            else abs(abs(value) - 0.5) < 1e-12 or abs(value) < 1e-12
    elif n == np_:
        special = "horizontal"
        value = -(m + mp) * half
        allowed = value in (-half, 0, half) if exact is not None \
            else abs(abs(value) - 0.5) < 1e-12 or abs(value) < 1e-12
    return DegeneracyLine(q1, q2, r2, A, B, C, special, allowed)


# --------------------------------------------------------------------------
# triple intersections
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TripleIntersection:
    sextet: tuple
    kappa_x: object
    kappa_y: object
    K_sq: object
    k: float
    in_bz: bool
    multiplicity: int = 3
    exact: bool = False

    @property
    def kappa_x_str(self) -> str:
        return str(self.kappa_x) if self.exact else repr(float(self.kappa_x))

    @property
    def kappa_y_str(self) -> str:
        return str(self.kappa_y) if self.exact else repr(float(self.kappa_y))

    @property
    def k_str(self) -> str:
        return radical_string(self.K_sq) if self.exact else repr(self.k)


def _count_lines_through(kappa_x, kappa_y, K_sq, rho_sq, bound: int) -> int:
    count = 0
    for n in range(-bound, bound + 1):
        for m in range(-bound, bound + 1):
            lhs = rho_sq * (n + kappa_x) ** 2 + (m + kappa_y) ** 2
            rhs = rho_sq * K_sq
            if isinstance(lhs, Fraction) and isinstance(rhs, Fraction):
                if lhs == rhs:
                    count += 1
            elif abs(float(lhs) - float(rhs)) < 1e-9 * max(1.0, abs(float(rhs))):
                count += 1
    return count


def triple_intersection(sextet, rho_sq, index_bound: int | None = None
                        ) -> TripleIntersection:
    """Common point of the light lines (n,m), (n',m'), (n'',m'').

    kappa_x = N_x / D_x and kappa_y = N_y / D_y with D_y = D_x / rho^2;
    exact fractions whenever rho^2 is rational.  Raises ParallelLinesError
    when D_x = 0 (no common finite point).
    """
    (n, m), (np_, mp), (npp, mpp) = (tuple(q) for q in sextet)
    exact = _as_exact(rho_sq)
    r2 = exact if exact is not None else float(rho_sq)

    Dy = 2 * (m * (npp - np_) + mp * (n - npp) + mpp * (np_ - n))
    if Dy == 0:
        raise ParallelLinesError(f"degeneracy lines of {sextet} are parallel")
    Dx = r2 * Dy
    Nx = (mp * (mpp * mpp - m * m) + mpp * (m * m - mp * mp)
          + m * (mp * mp - mpp * mpp)
          + r2 * (np_ * np_ * (m - mpp) + npp * npp * (mp - m)
                  + n * n * (mpp - mp)))
    Ny = (n * (mpp * mpp - mp * mp) + np_ * (m * m - mpp * mpp)
          + npp * (mp * mp - m * m)
          + r2 * (n - np_) * (n - npp) * (np_ - npp))

    kx = Nx / Dx
    ky = Ny / Dy if exact is None else Fraction(Ny, Dy)
    K_sq = (n + kx) ** 2 + (m + ky) ** 2 / r2
    k = 2 * np.pi * float(np.sqrt(float(K_sq)))
    in_bz = (0 <= float(kx) <= 0.5 + 1e-12) and (0 <= float(ky) <= 0.5 + 1e-12)
    bound = index_bound if index_bound is not None else \
        max(abs(v) for q in sextet for v in q) + int(np.ceil(float(K_sq) ** 0.5)) + 1
    mult = _count_lines_through(kx, ky, K_sq, r2, bound)
    return TripleIntersection(
        sextet=((n, m), (np_, mp), (npp, mpp)),
        kappa_x=kx, kappa_y=ky, K_sq=K_sq, k=k, in_bz=in_bz,
        multiplicity=mult, exact=exact is not None)


def enumerate_triples(rho_sq, k_max: float, index_bound: int
                      ) -> list[TripleIntersection]:
    """All distinct triple points with k <= k_max inside the closed quadrant.

    Sextets are drawn from modes with |n|, |m| <= index_bound, deduplicated
    on (kappa_x, kappa_y, k) to 1e-9 and annotated with the number of light
    lines through each point.
    """
    exact = _as_exact(rho_sq)
    r2f = float(rho_sq)
    K_max = k_max / (2 * np.pi)

    def reachable(n, m):
        # minimal K over the closed quadrant: n + kappa_x spans [n, n + 1/2]
        dx = 0.0 if n == 0 else min(abs(n), abs(n + 0.5))
        dy = 0.0 if m == 0 else min(abs(m), abs(m + 0.5))
        return dx * dx + dy * dy / r2f <= K_max * K_max + 1e-9

    lines = [(n, m)
             for n in range(-index_bound, index_bound + 1)
             for m in range(-index_bound, index_bound + 1)
             if reachable(n, m)]
    found = []
    seen = []
    for trio in itertools.combinations(lines, 3):
        try:
            tp = triple_intersection(trio, exact if exact is not None else rho_sq,
                                     index_bound=index_bound)
        except ParallelLinesError:
            continue
        if not tp.in_bz or tp.k > k_max + 1e-9:
            continue
        key = (float(tp.kappa_x), float(tp.kappa_y), tp.k)
        if any(abs(key[0] - s[0]) < DEDUP_TOL and abs(key[1] - s[1]) < DEDUP_TOL
               and abs(key[2] - s[2]) < DEDUP_TOL * max(1.0, s[2]) for s in seen):
            continue
        seen.append(key)
        found.append(tp)
    found.sort(key=lambda t: (t.k, float(t.kappa_x), float(t.kappa_y)))
    return found


# --------------------------------------------------------------------------
# Dirac points of the triangular lattice (interlaced-rectangular indexing)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DiracPoint:
    """A degeneracy point in physical (k0x, k0y, k) coordinates."""

    k0: tuple[float, float]
    k: float
    lattice: Lattice


def triangular_dirac_point(which: int, d: float = 1.0) -> DiracPoint:
    """First or second zone-centre Dirac point of the triangular lattice.

    which=1: k d = 2 pi sqrt(4/3) (six light lines);
    which=2: k d = 2 pi sqrt(28/3) (twelve light lines).
    Coordinates refer to the equivalent rectangular lattice (d, sqrt(3) d).
    """
    if which == 1:
        k = 2 * np.pi * np.sqrt(4.0 / 3.0) / d
    elif which == 2:
        k = 2 * np.pi * np.sqrt(28.0 / 3.0) / d
    else:
        raise ValueError("which must be 1 or 2")
    return DiracPoint((0.0, 0.0), k, Lattice.rectangular(d, SQRT3 * d))


def lines_through_point(point: DiracPoint, index_bound: int = 12):
    """All integer modes whose light line passes through the point (1e-9)."""
    lat = point.lattice
    k0 = np.asarray(point.k0)
    out = []
    for n in range(-index_bound, index_bound + 1):
        for m in range(-index_bound, index_bound + 1):
            if abs(light_line_k((n, m), k0, lat) - point.k) < 1e-9 * point.k:
                out.append((n, m))
    return out


# --------------------------------------------------------------------------
# cone fits
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ConeExpansion:
    """Quadratic expansion r = alpha dk - beta dk^2 of one branch."""

    alpha: float
    beta: float
    c: float                      # normalised group speed |v_g| / k
    gamma: float                  # DOS coefficient alpha / (pi c)
    role: str                     # "inner", "outer" or "cone"
    alpha_sq_exact: Fraction | None = None

    @property
    def gamma_times_pi_exact(self) -> Fraction | None:
        """Exact value of gamma * pi (= alpha^2 / 2) when available."""
        return None if self.alpha_sq_exact is None else self.alpha_sq_exact / 2


def _pair_intersection_radii(centers: np.ndarray, k: float, origin: np.ndarray):
    """Smaller-magnitude circle-circle intersection distance per line pair."""
    radii = {}
    npts = len(centers)
    for i, j in itertools.combinations(range(npts), 2):
        c1, c2 = centers[i], centers[j]
        dvec = c2 - c1
        d = float(np.hypot(dvec[0], dvec[1]))
        if d < 1e-12 or d > 2 * k - 1e-12:
            continue
        h2 = k * k - 0.25 * d * d
        if h2 < 0:
            continue
        mid = 0.5 * (c1 + c2)
        perp = np.array([-dvec[1], dvec[0]]) / d
        h = np.sqrt(h2)
        best = min(float(np.hypot(*(mid + s * h * perp - origin)))
                   for s in (+1.0, -1.0))
        radii[(i, j)] = best
    return radii


def _slope_spectrum(directions: np.ndarray, phi: float) -> np.ndarray:
    """Massive sheet slopes at angle phi from the shell-pole equation.

    Near a degenerate point the dispersion roots between splitting light
    lines solve sum_j 1/(v_j . u(phi) - s) = 0; the solutions s are the
    radial slopes dk/dt of the massive sheets through the point.
    """
    u = np.array([np.cos(phi), np.sin(phi)])
    c = np.sort(directions @ u)
    roots = []

    def f(s):
        return float(np.sum(1.0 / (c - s)))

    for a, b in zip(c[:-1], c[1:]):
        if b - a < 1e-9:
            continue
        eps = (b - a) * 1e-10
        try:
            roots.append(brentq(f, a + eps, b - eps, xtol=1e-14))
        except ValueError:
            continue
    return np.array(roots)


def _branch_role(directions: np.ndarray, pair_dirs, alpha: float) -> str:
    """Role of one fitted branch from the sheet slopes near its touch direction.

    The distorted sheets touch their bounding circles exactly along the
    bisector of the generating pair; just off that direction the sheet
    radius grows (the bound is the inner circle), shrinks (outer) or stays
    put (an actual circular cone).
    """
    v1, v2 = pair_dirs
    bis = v1 + v2
    nb = float(np.hypot(bis[0], bis[1]))
    if nb < 1e-12:
        return "cone"
    phi0 = float(np.arctan2(bis[1], bis[0]))
    target = 1.0 / alpha
    ratios = []
    for dphi in (-0.03, 0.03):
        spec = np.abs(_slope_spectrum(directions, phi0 + dphi))
        spec = spec[spec > 1e-9]
        if len(spec) == 0:
            continue
        s_near = spec[np.argmin(np.abs(spec - target))]
        ratios.append((1.0 / s_near) / alpha)   # local radius / bound radius
    if not ratios:
        return "cone"
    lo, hi = min(ratios), max(ratios)
    if max(abs(lo - 1.0), abs(hi - 1.0)) < 1e-5:
        return "cone"
    return "inner" if lo > 1.0 else "outer"


def cone_fit(dirac, lattice: Lattice | None = None, branch=None,
             ladder=CONE_FIT_LADDER, index_bound: int = 12):
    """Quadratic cone expansions r = alpha dk - beta dk^2 at a Dirac point.

    ``dirac`` is a DiracPoint or a TripleIntersection (then ``lattice``
    supplies the periods).  Pairwise light-line intersections are computed
    exactly at each dk of the ladder, the smaller-magnitude root is kept,
    distances cluster into branches and each cluster is least-squares fitted;
    the ladder is shrunk automatically until the quadratic-model residual
    drops below 1e-6 of the radius.  Branch roles (bounding inner/outer
    versus actual cone) come from the slope spectrum of the massive sheets;
    the normalised group speed is c = 2/alpha (sheet slope at the touch
    direction), whence gamma = alpha/(pi c).

    ``branch`` of None returns the full list ordered by alpha; "inner" /
    "outer" select the smallest/largest-alpha branch, an integer indexes the
    ordered list.
    """
    if isinstance(dirac, TripleIntersection):
        if lattice is None:
            raise ValueError("lattice required with a TripleIntersection")
        dx, dy = lattice.periods
        k0 = np.array([2 * np.pi * float(dirac.kappa_x) / dx,
                       2 * np.pi * float(dirac.kappa_y) / dy])
        point = DiracPoint((float(k0[0]), float(k0[1])), dirac.k, lattice)
    else:
        point = dirac
    lat = point.lattice
    origin = np.asarray(point.k0, dtype=float)
    lines = lines_through_point(point, index_bound)
    if len(lines) < 2:
        raise ValueError("the named point is not a degeneracy of >= 2 light lines")

    basis = lat.reciprocal_basis
    centers = np.array([-(n * basis[0] + m * basis[1]) + 0.0 for n, m in lines])
    # circle |k0 + K| = k has centre -K; measured from the point itself
    dirs = np.array([(origin + n * basis[0] + m * basis[1]) for n, m in lines])
    dirs = dirs / np.linalg.norm(dirs, axis=1)[:, None]

    # exact alpha^2 per pair angle: alpha = 1/cos(gamma/2)
    pair_alpha_sq = {}
    for i, j in itertools.combinations(range(len(lines)), 2):
        cg = float(dirs[i] @ dirs[j])
        if cg <= -1.0 + 1e-12:
            continue
        pair_alpha_sq[(i, j)] = 2.0 / (1.0 + cg)

    ladder = np.asarray(ladder, dtype=float)
    for _ in range(6):
        radii_per_dk = [_pair_intersection_radii(centers, point.k + dk, origin)
                        for dk in ladder]
        keys = [key for key, r in radii_per_dk[0].items()
                if r / ladder[0] < 8.0]     # drop sqrt(dk) near-tangent branches
        est = sorted((radii_per_dk[0][key] / ladder[0], key) for key in keys)
        clusters = []
        for a, key in est:
            if clusters and a - clusters[-1][0][-1] < 0.01:
                clusters[-1][0].append(a)
                clusters[-1][1].append(key)
            else:
                clusters.append(([a], [key]))
        fits = []
        worst = 0.0
        for alphas, ckeys in clusters:
            rs = np.array([np.mean([rp[key] for key in ckeys])
                           for rp in radii_per_dk])
            design = np.vstack([ladder, -ladder ** 2]).T
            (alpha, beta), *_ = np.linalg.lstsq(design, rs, rcond=None)
            resid = float(np.max(np.abs(design @ np.array([alpha, beta]) - rs)))
            worst = max(worst, resid / rs.max())
            a_sq = np.mean([pair_alpha_sq[key] for key in ckeys])
            fits.append((float(alpha), float(beta), float(a_sq), ckeys[0]))
        if worst <= CONE_FIT_RESIDUAL_TOL:
            break
        ladder = ladder * 0.3
    else:
        raise FitResidualError(
            f"quadratic cone fit residual {worst:.2e} above tolerance")

    expansions = []
    for alpha, beta, a_sq, key in sorted(fits):
        role = _branch_role(dirs, (dirs[key[0]], dirs[key[1]]), alpha)
        exact = _as_exact(a_sq)
        c = 2.0 / alpha
        expansions.append(ConeExpansion(
            alpha=alpha, beta=beta, c=c, gamma=alpha / (np.pi * c), role=role,
            alpha_sq_exact=exact))
    if branch is None:
        return expansions
    if branch == "inner":
        return expansions[0]
    if branch == "outer":
        return expansions[-1]
    return expansions[int(branch)]


def analytic_dos(cone: ConeExpansion) -> float:
    """Leading DOS coefficient gamma = alpha / (pi c) of one branch."""
    if cone.alpha <= 0 or cone.c <= 0:
        raise ValueError("cone radius and speed must be positive")
    return cone.alpha / (np.pi * cone.c)


def proportionate_distortions(expansions) -> list[float]:
    """(outer - inner)/mean for each consecutive inner/outer bounding pair."""
    bounds = [e for e in expansions if e.role in ("inner", "outer")]
    bounds.sort(key=lambda e: e.alpha)
    out = []
    for a, b in zip(bounds[::2], bounds[1::2]):
        if a.role == "inner" and b.role == "outer":
            out.append((b.alpha - a.alpha) / (0.5 * (a.alpha + b.alpha)))
    return out
