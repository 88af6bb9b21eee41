"""Rayleigh and Stoneley wave speeds by bracketed root finding.

The Rayleigh function

    R(s) = (s - 2)^2 - 4 sqrt(1 - s) sqrt(1 - (cs/cp)^2 s),    s in [0, 1],

with s = tau^2 / (cs^2 xi_t^2), is the elliptic-region traction determinant
up to a positive factor: R(0) = 0, R(1) = 1, and R has a unique simple root
s0 in (0, 1).  The free-surface wave speed is c_R = cs sqrt(s0) < cs.

A solid-solid interface carries a Stoneley wave where the four-channel
evanescent matching determinant F0 vanishes.  F0 is evaluated on the
elliptic-elliptic branch of both materials and scanned over
s = tau^2 / (c_ref^2 xi_t^2) with c_ref = min(cs+, cs-), so s in (0, 1)
covers exactly the speeds below both shear speeds.  A root need not exist;
absence is a valid outcome reported as None.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OutOfDomain, RootNotBracketed
from .kinematics import BoundaryCovector
from .model import Material, WaveMode
from . import coefficients as coef

#: Number of grid points used to bracket surface-wave roots.
SCAN_POINTS = 2048


@dataclass(frozen=True)
class RayleighResult:
    s0: float
    c_r: float


@dataclass(frozen=True)
class StoneleyResult:
    s_root: float
    c_st: float


def evaluate_rayleigh(s: float, m: Material) -> float:
    """R(s) for material ``m``; domain [0, 1]."""
    if not (0.0 <= s <= 1.0):
        raise OutOfDomain(f"Rayleigh function defined on [0, 1], got s={s}")
    ratio2 = (m.cs / m.cp) ** 2
    return (s - 2.0) ** 2 - 4.0 * math.sqrt(1.0 - s) * math.sqrt(1.0 - ratio2 * s)


def _bisect(f, lo: float, hi: float, iterations: int = 200) -> float:
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0.0) == (fhi > 0.0):
        raise RootNotBracketed(f"no sign change on [{lo}, {hi}]")
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0.0) == (flo > 0.0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    return 0.5 * (lo + hi)


def find_rayleigh_speed(m: Material, n_grid: int = SCAN_POINTS) -> RayleighResult:
    """Locate the unique root of R on (0, 1) and return c_R = cs sqrt(s0).

    R(0) = 0 exactly, so the bracket starts just inside the interval; a
    single sign change is expected and its absence is an internal failure
    (RootNotBracketed), not a valid material property.
    """
    f = lambda s: evaluate_rayleigh(s, m)
    grid = np.linspace(1.0 / n_grid, 1.0, n_grid)
    values = [f(s) for s in grid]
    for a, b, fa, fb in zip(grid, grid[1:], values, values[1:]):
        if fa == 0.0:
            return RayleighResult(s0=float(a), c_r=m.cs * math.sqrt(float(a)))
        if (fa > 0.0) != (fb > 0.0):
            s0 = _bisect(f, float(a), float(b))
            return RayleighResult(s0=s0, c_r=m.cs * math.sqrt(s0))
    raise RootNotBracketed("Rayleigh function has no sign change on (0, 1)")


def stoneley_function(s: float, m_plus: Material, m_minus: Material) -> float:
    """F0(s): evanescent-matching determinant at speed c = c_ref sqrt(s).

    Assembles the four decaying P/SV channels (two per side) of the
    interface continuity system at xi_t = 1, tau = -c_ref sqrt(s) and
    returns the (exactly real) 4x4 determinant, normalized by the product
    of row sup-norms so values at different s are comparable.
    """
    if not (0.0 < s < 1.0):
        raise OutOfDomain(f"Stoneley scan parameter must lie in (0, 1), got {s}")
    c_ref = min(m_plus.cs, m_minus.cs)
    bc = BoundaryCovector(tau=-c_ref * math.sqrt(s), xi_t=1.0)
    cols = []
    for side, m in ((coef.PLUS, m_plus), (coef.MINUS, m_minus)):
        sign = 1.0 if side == coef.PLUS else -1.0
        xi3s, xi3p = coef._xi3_pair(m, bc, tol=0.0)
        if xi3s.imag <= 0.0 or xi3p.imag <= 0.0:
            raise OutOfDomain("configuration not elliptic-elliptic")
        eta_s = coef._eta(xi3s, side, "evan")
        eta_p = coef._eta(xi3p, side, "evan")
        cols.append(coef._psv_column(m, bc, WaveMode.P, eta_p, sign))
        cols.append(coef._psv_column(m, bc, WaveMode.SV, eta_s, sign))
    det, hadamard = coef._det_cols(cols)
    return det.real / hadamard


def find_stoneley_speed(m_plus: Material, m_minus: Material,
                        n_grid: int = SCAN_POINTS) -> StoneleyResult | None:
    """Scan F0 over (0, 1) for a sign change and bisect it, or return None.

    For weak material contrasts the root sits exponentially close to the
    smaller shear speed (1 - s down to ~1e-7 for a few-percent contrast), so
    the scan grid is uniform in s over most of the interval and geometric in
    1 - s near the endpoint.  The returned speed satisfies
    c_St < min(cs+, cs-) by construction of the scan interval; swapping the
    materials leaves the root unchanged (column reordering of the
    determinant).
    """
    c_ref = min(m_plus.cs, m_minus.cs)
    f = lambda s: stoneley_function(s, m_plus, m_minus)
    eps = 1.0 / n_grid
    n_tail = n_grid // 4
    uniform = np.linspace(eps, 1.0 - eps, n_grid - n_tail)
    tail = 1.0 - np.geomspace(eps, 1e-13, n_tail)
    grid = np.concatenate([uniform, tail])
    prev_s = float(grid[0])
    prev_f = f(prev_s)
    for s in grid[1:]:
        cur_f = f(float(s))
        if prev_f == 0.0:
            root = prev_s
            return StoneleyResult(s_root=root, c_st=c_ref * math.sqrt(root))
        if (prev_f > 0.0) != (cur_f > 0.0):
            root = _bisect(f, prev_s, float(s))
            return StoneleyResult(s_root=root, c_st=c_ref * math.sqrt(root))
        prev_s, prev_f = float(s), cur_f
    return None
