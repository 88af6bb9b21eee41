"""Boundary covectors, vertical wavenumbers, regions and Snell refraction.

All boundary-frequency algebra uses the pair (tau, xi_t) with the fixed
convention tau < 0 and xi_t = |xi'| >= 0 the tangential wavenumber magnitude.
Rotating the tangential frame so that xi' = (xi_1, 0) with xi_1 = xi_t loses
nothing: the 3x3 boundary symbols commute with that rotation (see
``coefficients.rotation_matrix``), so only the magnitude is ever stored.
The tau > 0 branch follows by complex conjugation and is not implemented.

For a speed c the vertical wavenumber of the associated mode is

    xi3 = sqrt(c**-2 tau**2 - xi_t**2)           (propagating, real root)
    xi3 = i sqrt(xi_t**2 - c**-2 tau**2)         (evanescent)

with the sign of the real root chosen by travel direction, and the evanescent
branch fixed on +i so the mode decays away from the surface.  Configurations
within a relative tolerance of the root-argument zero are refused as
glancing rather than approximated.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import Glancing, GlancingProximity, OutOfDomain
from .model import Material, WaveMode

#: Default relative tolerance on the vertical-wavenumber root argument.
GLANCING_TOL = 1e-9


@dataclass(frozen=True)
class BoundaryCovector:
    """Trace frequency / tangential wavenumber pair (tau < 0, xi_t >= 0)."""

    tau: float
    xi_t: float

    def __post_init__(self):
        if self.tau >= 0.0:
            raise OutOfDomain(f"tau must be negative, got {self.tau}")
        if self.xi_t < 0.0:
            raise OutOfDomain(f"xi_t must be nonnegative, got {self.xi_t}")
        if self.tau == 0.0 and self.xi_t == 0.0:
            raise OutOfDomain("(tau, xi_t) must not vanish")

    @classmethod
    def from_incidence(cls, theta: float, speed: float, tau: float = -1.0
                       ) -> "BoundaryCovector":
        """Covector of a wave with incidence angle ``theta`` (from the normal)
        travelling at ``speed``: xi_t = |tau| sin(theta) / speed."""
        return cls(tau=tau, xi_t=abs(tau) * math.sin(theta) / speed)


class Direction(enum.Enum):
    OUT = "out"
    IN = "in"


class Kind(enum.Enum):
    PROPAGATING_OUT = "propagating_out"
    PROPAGATING_IN = "propagating_in"
    EVANESCENT = "evanescent"


@dataclass(frozen=True)
class VerticalWavenumber:
    value: complex
    kind: Kind

    @property
    def is_evanescent(self) -> bool:
        return self.kind is Kind.EVANESCENT

    @property
    def decay_rate(self) -> float:
        return self.value.imag


class SideRegion(enum.Enum):
    """Classification of (tau, xi') on one side of a surface.

    Ordered from "both vertical wavenumbers real" to "both evanescent":
    hyperbolic, p-glancing, mixed (P evanescent, S propagating), s-glancing,
    elliptic.
    """

    HYPERBOLIC = "H"
    P_GLANCING = "Pg"
    MIXED = "M"
    S_GLANCING = "Sg"
    ELLIPTIC = "E"

    @property
    def is_glancing(self) -> bool:
        return self in (SideRegion.P_GLANCING, SideRegion.S_GLANCING)

    @property
    def p_propagating(self) -> bool:
        return self is SideRegion.HYPERBOLIC

    @property
    def s_propagating(self) -> bool:
        return self in (SideRegion.HYPERBOLIC, SideRegion.MIXED)


_REGION_RANK = {SideRegion.HYPERBOLIC: 0, SideRegion.MIXED: 1, SideRegion.ELLIPTIC: 2}
_REGION_LETTER = {SideRegion.HYPERBOLIC: "H", SideRegion.MIXED: "M", SideRegion.ELLIPTIC: "E"}


@dataclass(frozen=True)
class InterfaceCase:
    """Pair of side regions across an interface.

    ``label`` is one of HH, HM, MM, HE, ME, EE (most-propagating side first);
    the actual sides are kept in ``plus``/``minus`` with the incident (plus)
    side listed first by the callers' convention.
    """

    plus: SideRegion
    minus: SideRegion

    @property
    def label(self) -> str:
        a, b = _REGION_LETTER[self.plus], _REGION_LETTER[self.minus]
        if _REGION_RANK[self.plus] <= _REGION_RANK[self.minus]:
            return a + b
        return b + a

    @property
    def swapped(self) -> bool:
        """True when the canonical label lists the minus side first."""
        return _REGION_RANK[self.plus] > _REGION_RANK[self.minus]


def _root_argument(speed: float, bc: BoundaryCovector) -> tuple[float, float]:
    """(c**-2 tau**2 - xi_t**2, scale) for the glancing test."""
    a = (bc.tau / speed) ** 2
    b = bc.xi_t ** 2
    return a - b, a + b


def vertical_wavenumber(m: Material, bc: BoundaryCovector, mode: WaveMode,
                        direction: Direction = Direction.OUT,
                        tol: float = GLANCING_TOL) -> VerticalWavenumber:
    """Vertical wavenumber of ``mode`` in material ``m`` at covector ``bc``.

    Raises Glancing when the root argument is within ``tol`` (relative) of
    zero; callers are expected to stay away from glancing configurations.
    """
    speed = m.speed(mode)
    arg, scale = _root_argument(speed, bc)
    if abs(arg) < tol * scale:
        raise Glancing(
            f"{mode.value} wavenumber glancing: |c^-2 tau^2 - xi_t^2| < "
            f"{tol} * scale at c={speed}, tau={bc.tau}, xi_t={bc.xi_t}"
        )
    if arg > 0.0:
        root = math.sqrt(arg)
        if direction is Direction.OUT:
            return VerticalWavenumber(complex(root, 0.0), Kind.PROPAGATING_OUT)
        return VerticalWavenumber(complex(-root, 0.0), Kind.PROPAGATING_IN)
    return VerticalWavenumber(complex(0.0, math.sqrt(-arg)), Kind.EVANESCENT)


def classify_side(m: Material, bc: BoundaryCovector,
                  tol: float = GLANCING_TOL) -> SideRegion:
    """Region of ``bc`` relative to the speeds of ``m``.

    Hyperbolic iff cp xi_t < |tau|, mixed iff cs xi_t < |tau| < cp xi_t,
    elliptic iff |tau| < cs xi_t; equalities within ``tol`` classify as the
    corresponding glancing region (a classification, not an error).
    """
    arg_p, scale_p = _root_argument(m.cp, bc)
    if abs(arg_p) < tol * scale_p:
        return SideRegion.P_GLANCING
    if arg_p > 0.0:
        return SideRegion.HYPERBOLIC
    arg_s, scale_s = _root_argument(m.cs, bc)
    if abs(arg_s) < tol * scale_s:
        return SideRegion.S_GLANCING
    if arg_s > 0.0:
        return SideRegion.MIXED
    return SideRegion.ELLIPTIC


def classify_interface(m_plus: Material, m_minus: Material, bc: BoundaryCovector,
                       tol: float = GLANCING_TOL) -> InterfaceCase:
    """Interface case from the two side regions; incident (plus) side first."""
    plus = classify_side(m_plus, bc, tol)
    minus = classify_side(m_minus, bc, tol)
    if plus.is_glancing or minus.is_glancing:
        raise GlancingProximity(
            f"interface classification glancing: plus={plus.value}, "
            f"minus={minus.value}"
        )
    return InterfaceCase(plus=plus, minus=minus)


def snell(theta_in: float, c_in: float, c_out: float,
          tol: float = GLANCING_TOL) -> float | None:
    """Refracted angle, or None on total reflection.

    sin(theta_out) = (c_out / c_in) sin(theta_in); conserves the horizontal
    slowness sin(theta)/c.  Raises GlancingProximity when sin(theta_out) is
    within ``tol`` of 1 (the critical angle itself).
    """
    if not (0.0 <= theta_in < math.pi / 2.0):
        raise OutOfDomain(f"theta_in must lie in [0, pi/2), got {theta_in}")
    s = (c_out / c_in) * math.sin(theta_in)
    if abs(s - 1.0) < tol:
        raise GlancingProximity(
            f"refracted angle within {tol} of 90 degrees (critical incidence)"
        )
    if s > 1.0:
        return None
    return math.asin(s)


def critical_angle(c_in: float, c_out: float) -> float | None:
    """arcsin(c_in / c_out), or None when no critical angle exists."""
    if c_out <= c_in:
        return None
    return math.asin(c_in / c_out)
