"""Quasiperiodic and free-space Green's functions for the pinned biharmonic plate.

The quasiperiodic Green's function of the pinned array is evaluated from the
accelerated lattice sums through the multipole representation

    G(r; k, k0) = -(1/(8 k^2)) [ Y_0(k r) + (2/pi) K_0(k r)
        + sum_m R_m^Y J_m(k r) e^{-i m theta}
        + (2/pi) sum_m R_m^K I_m(k r) e^{-i m theta} ],

valid on |r| below the nearest pin spacing; points outside are first
translated into the central cell using quasiperiodicity
G(r + R_p) = e^{i k0 . R_p} G(r).  Its r -> 0 limit is the dispersion
function

    G(0) = -(1/(8 k^2)) (R_0^Y + (2/pi) R_0^K),

identical (tested to ~1e-10 relative) to the absolutely convergent spectral
sum (1/A) sum_h (Q_h^4 - k^4)^{-1}, which is the default dispersion route.

The free-space kernel is g(r) = (i/(8 k^2)) [H_0^(1)(k r) + (2i/pi) K_0(k r)];
its logarithms cancel at the origin leaving the finite value i/(8 k^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DegenerateRatioError, MethodMismatchError, PoleProximityError
from .lattice import Lattice, LatticeFamily
from .latsum import (DEFAULT_CONFIG, SpectralProfile, SumConfig, lattice_sums,
                     spectral_dispersion_sum, sum_RK, sum_RY)

SQRT3 = np.sqrt(3.0)

#: |eta -/+ e^{i k0 . c_T}| below this accepts/rejects a candidate root
BLOCH_FILTER_TOL = 0.5
#: k offset used to evaluate the Bloch ratio next to a candidate root
BLOCH_RATIO_OFFSET = 1e-4
#: tolerated imaginary residual of the accelerated dispersion combination
IMAG_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class PlateMaterial:
    """Physical plate constants, used only to convert k to angular frequency."""

    youngs_modulus: float
    poissons_ratio: float
    thickness: float
    density: float

    def __post_init__(self):
        if not (-1.0 < self.poissons_ratio < 0.5):
            raise ValueError("Poisson's ratio must lie in (-1, 0.5)")
        if min(self.youngs_modulus, self.thickness, self.density) <= 0:
            raise ValueError("material constants must be positive")

    @property
    def flexural_rigidity(self) -> float:
        """D = E h^3 / (12 (1 - nu^2))."""
        return (self.youngs_modulus * self.thickness ** 3
                / (12.0 * (1.0 - self.poissons_ratio ** 2)))

    def omega_from_k(self, k: float) -> float:
        """Angular frequency from k^2 = omega * sqrt(rho_m h / D)."""
        return k * k / np.sqrt(self.density * self.thickness / self.flexural_rigidity)

    def k_from_omega(self, omega: float) -> float:
        return float(np.sqrt(
            omega * np.sqrt(self.density * self.thickness / self.flexural_rigidity)))


# --------------------------------------------------------------------------
# free-space kernel
# --------------------------------------------------------------------------

def free_green(r, k: float):
    """Free-space biharmonic Green's function g(r) at wavenumber k.

    Accepts scalars or arrays of nonnegative distances; g(0) = i/(8 k^2).
    Satisfies (laplacian^2 - k^4) g = delta and decays like r^{-1/2}.
    """
    if k <= 0:
        raise ValueError("k must be positive")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("distances must be nonnegative")
    scalar = r.ndim == 0
    r = np.atleast_1d(r)
    origin = r < 1e-300
    rr = np.where(origin, 1.0, r)
    out = (1j / (8.0 * k * k)) * (special.hankel1(0, k * rr)
                                  + (2j / np.pi) * special.kv(0, k * rr))
    out[origin] = 1j / (8.0 * k * k)
    return complex(out[0]) if scalar else out


# --------------------------------------------------------------------------
# dispersion function
# --------------------------------------------------------------------------

def dispersion_value(k: float, k0, lattice: Lattice, method: str = "spectral",
                     cfg: SumConfig = DEFAULT_CONFIG) -> float:
    """G(0; k, k0), the dispersion function whose zeros are the Bloch modes.

    method "spectral" (default) uses the absolutely convergent reciprocal
    sum; "accelerated" evaluates -(1/(8 k^2)) (R_0^Y + (2/pi) R_0^K) and
    checks that the imaginary parts cancel; "both" runs the two routes and
    raises MethodMismatchError beyond 1e-5 relative disagreement.
    """
    if method == "spectral":
        return spectral_dispersion_sum(k, k0, lattice, cfg)
    if method == "accelerated":
        combo = sum_RY(0, k, k0, lattice, cfg) \
            + (2.0 / np.pi) * sum_RK(0, k, k0, lattice, cfg)
        value = -combo / (8.0 * k * k)
        if abs(value.imag) > IMAG_RESIDUAL_TOL * max(1.0, abs(value.real)):
            raise MethodMismatchError(
                f"imaginary residual {value.imag:.3e} of the accelerated "
                f"dispersion combination exceeds tolerance")
        return float(value.real)
    if method == "both":
        s = dispersion_value(k, k0, lattice, "spectral", cfg)
        a = dispersion_value(k, k0, lattice, "accelerated", cfg)
        if abs(a - s) > 1e-5 * max(abs(s), abs(a), 1e-300):
            raise MethodMismatchError(
                f"accelerated {a:.12e} vs spectral {s:.12e} disagree")
        return s
    raise ValueError(f"unknown method {method!r}")


# --------------------------------------------------------------------------
# quasiperiodic Green's function
# --------------------------------------------------------------------------

def _reduce_to_cell(lattice: Lattice, r: np.ndarray):
    """Translate r by a lattice vector to the point closest to the origin."""
    basis = lattice.direct_basis
    frac = np.linalg.solve(basis.T, r)
    base = np.floor(frac + 0.5).astype(int)
    best, best_R = None, None
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            R = (base[0] + di) * basis[0] + (base[1] + dj) * basis[1]
            d = np.linalg.norm(r - R)
            if best is None or d < best:
                best, best_R = d, R
    return r - best_R, best_R


def quasiperiodic_green(r, k: float, k0, lattice: Lattice,
                        cfg: SumConfig = DEFAULT_CONFIG) -> complex:
    """Quasiperiodic Green's function G(r; k, k0) of the pinned array.

    r is translated into the central Wigner-Seitz cell first (multipole
    convergence is guaranteed on |r| < min period).  At a pin the finite
    regularised limit (the dispersion function) is returned.
    """
    r = np.asarray(r, dtype=float)
    k0 = np.asarray(k0, dtype=float)
    r_red, R = _reduce_to_cell(lattice, r)
    phase = np.exp(1j * float(k0 @ R))
    rho = float(np.hypot(r_red[0], r_red[1]))
    if rho < 1e-12:
        return phase * dispersion_value(k, k0, lattice, "accelerated", cfg)
    theta = float(np.arctan2(r_red[1], r_red[0]))

    sums = lattice_sums(cfg.multipole_max, k, k0, lattice, cfg)
    kr = k * rho
    total = special.yv(0, kr) + (2.0 / np.pi) * special.kv(0, kr) + 0j
    total += sums[0].RY * special.jv(0, kr) \
        + (2.0 / np.pi) * sums[0].RK * special.iv(0, kr)
    for s in sums[1:]:
        m = s.l
        jm = special.jv(m, kr)
        im = special.iv(m, kr)
        em = np.exp(-1j * m * theta)
        sign = (-1.0) ** m
        # lattice inversion gives R_{-m}^Y = conj(R_m^Y) but
        # R_{-m}^K = (-1)^m conj(R_m^K), since Y_{-m} = (-1)^m Y_m while
        # K_{-m} = K_m; together with J_{-m} = (-1)^m J_m, I_{-m} = I_m:
        total += s.RY * jm * em + np.conj(s.RY) * sign * jm / em
        total += (2.0 / np.pi) * (s.RK * im * em
                                  + sign * np.conj(s.RK) * im / em)
    return phase * (-total / (8.0 * k * k))


# --------------------------------------------------------------------------
# Bloch-ratio filter for the interlaced-rectangular representation
# --------------------------------------------------------------------------

def _triangular_equivalent(lattice: Lattice) -> Lattice:
    if lattice.family is LatticeFamily.TRIANGULAR:
        return lattice
    if abs(lattice.aspect_ratio - SQRT3) < 1e-9:
        return Lattice.triangular(lattice.d_x)
    raise ValueError(
        "Bloch-ratio filter applies to triangular lattices (or the equivalent "
        "rectangular lattice of aspect ratio sqrt(3) with the half-cell shift)")


def bloch_ratio(k: float, k0, lattice: Lattice,
                cfg: SumConfig = DEFAULT_CONFIG,
                filter_tol: float = BLOCH_FILTER_TOL,
                offset: float = BLOCH_RATIO_OFFSET) -> tuple[complex, bool]:
    """Ratio eta = G(c_T)/G(0) of the interlaced-rectangular Green's function.

    Candidate roots of the interlaced representation split into two families:
    genuine triangular Bloch modes, for which the displacement also vanishes
    on the shifted sublattice, forcing G(c_T) = -e^{i k0 . c_T} G(0), and
    folded modes (Bloch vector displaced by the folding vector) with
    G(c_T) = +e^{i k0 . c_T} G(0).  The filter therefore passes a candidate
    iff eta lies within filter_tol of -e^{i k0 . c_T}.

    The ratio is evaluated at k +/- ``offset`` (never exactly at the root,
    where numerator and denominator both vanish); both G values come from the
    absolutely convergent spectral representation, exact at the half-cell
    shift point where the multipole series sits on its convergence boundary.
    """
    tri = _triangular_equivalent(lattice)
    k0 = np.asarray(k0, dtype=float)
    c_t = tri.shift_vector
    bloch_phase = np.exp(1j * float(k0 @ c_t))

    H = cfg.spectral_cutoff or 128
    even = SpectralProfile(tri, k0, H)
    odd = SpectralProfile(tri, k0 + tri.fold_vector, H)

    def ratio_at(kk: float):
        e = even.value(kk)
        o = odd.value(kk)
        num = bloch_phase * (e - o)
        den = e + o
        return num, den

    for kk in (k + offset, k - offset):
        try:
            num, den = ratio_at(kk)
        except (ValueError, PoleProximityError):
            continue
        if not (np.isfinite(num) and np.isfinite(den)):
            continue
        scale = max(abs(num), abs(den))
        if scale < 1e-300:
            raise DegenerateRatioError(
                f"G(c_T) and G(0) both vanish near k={k}")
        if abs(den) > 1e-8 * scale:
            eta = num / den
            passed = bool(abs(eta + bloch_phase) < filter_tol)
            return eta, passed
    raise DegenerateRatioError(
        f"Bloch ratio indeterminate near k={k}: denominator vanishes at both offsets")
