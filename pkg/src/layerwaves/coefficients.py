"""Boundary symbol matrices and principal-amplitude scattering systems.

Conventions
-----------
Work at a point of a horizontal surface in the rotated tangential frame
xi' = (xi_1, 0), xi_1 = xi_t >= 0, with tau < 0.  The plus side of an
interface occupies x3 > 0 and the minus side x3 < 0; for one-sided problems
(free surface, Dirichlet/Neumann/Cauchy data) the medium is the plus side.

Every wave family is written through potentials: a scalar one for P and a
two-component one for S, split on the surface into SV (oscillating in the
vertical plane of propagation) and SH (tangent to the surface).  A mode with
vertical wavenumber eta contributes, per unit potential amplitude,

    displacement          traction on x3 = 0 (normal e3)
    u  = (0, eta_s, 0)    T = (0, rho tau^2 - mu xi1^2, 0)        SH
    u  = (-eta_s, 0, xi1) T = (mu (2 xi1^2 - cs^-2 tau^2), 0, 2 mu xi1 eta_s)  SV
    u  = (xi1, 0, eta_p)  T = (2 mu xi1 eta_p, 0, rho tau^2 - 2 mu xi1^2)      P

where eta is +xi3 for waves leaving the surface into x3 > 0, -xi3 for waves
approaching it from x3 > 0, and the two signs swap on the minus side;
xi3 = sqrt(c^-2 tau^2 - xi1^2) when real, and evanescent channels take
eta = +i kappa on the plus side and -i kappa on the minus side so they decay
away from the surface.  With tau < 0 a propagating mode travels along its
phase gradient (xi1, eta), so "out" means up on the plus side and down on
the minus side.

Interface scattering imposes continuity of displacement and traction row by
row; the SH rows (u2, T2) never couple to the P-SV rows (u1, u3, T1, T3), so
the two blocks are assembled and solved separately and SH outputs are exact
zeros for pure P-SV input and vice versa.

All reported amplitudes are potential amplitudes in the normalization above
(the mode columns are not unit displacement vectors).  The displacement
magnitude of a mode is |amp| * |(xi1, eta)| for P/SV and |amp| * |eta_s|
for SH; ``displacement_magnitudes`` exposes this derived quantity.

Energy bookkeeping: a propagating channel of amplitude a carries flux
rho * Re(xi3) * |a|^2 for P and SV and mu * Re(xi3^3) * |a|^2 for SH (per
common tau, xi1 factors); evanescent channels carry exactly zero.  Every
solved configuration reports |sum(out) - sum(in)| / incident flux.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import _core
from .errors import (
    ControlImpossible,
    DegenerateAngle,
    ForbiddenIncoming,
    Glancing,
    NearSingularControl,
    RayleighSingular,
    StoneleySingular,
)
from .kinematics import (
    GLANCING_TOL,
    BoundaryCovector,
    Direction,
    InterfaceCase,
    SideRegion,
    classify_interface,
    classify_side,
    vertical_wavenumber,
)
from .model import Material, WaveMode

#: |det| below SINGULAR_TOL times the row-norm product flags a singular system.
SINGULAR_TOL = 1e-8

PLUS, MINUS = "plus", "minus"
SIDES = (PLUS, MINUS)


@dataclass(frozen=True)
class PotentialAmplitudes:
    """Complex (P, SV, SH) potential amplitudes of one wave family."""

    p: complex = 0.0
    sv: complex = 0.0
    sh: complex = 0.0

    def as_dict(self) -> dict[str, complex]:
        return {"P": complex(self.p), "SV": complex(self.sv), "SH": complex(self.sh)}

    @property
    def is_zero(self) -> bool:
        return self.p == 0 and self.sv == 0 and self.sh == 0


ZERO_AMPS = PotentialAmplitudes()


@dataclass(frozen=True)
class SymbolMatrix3:
    """3x3 boundary symbol with a provenance tag (Uout/Uin/Mout/Min)."""

    values: np.ndarray
    tag: str

    def det(self) -> complex:
        d, _ = _core.det_complex(list(self.values.ravel()), 3)
        return d


@dataclass(frozen=True)
class AMatrix:
    """4x2 potential-to-trace matrix; columns (P, SV), rows (u1, u3, T1, T3)."""

    values: np.ndarray
    side: str
    direction: str


@dataclass(frozen=True)
class ScatterResult:
    """Solved one-surface configuration.

    ``outgoing``/``evanescent`` map side -> PotentialAmplitudes; absent
    channels are exact zeros.  ``decay`` maps side -> {mode: kappa} for the
    evanescent channels, and ``energy_residual`` is the flux imbalance
    relative to the incident flux.
    """

    case: InterfaceCase | SideRegion
    outgoing: dict[str, PotentialAmplitudes]
    evanescent: dict[str, PotentialAmplitudes]
    decay: dict[str, dict[str, float]]
    energy_residual: float
    condition: float | None = None


# ----------------------------------------------------------------------
# wavenumbers and mode columns


def _xi3_pair(m: Material, bc: BoundaryCovector, tol: float) -> tuple[complex, complex]:
    """Principal (s, p) vertical wavenumbers: positive real or +i kappa."""
    ws = vertical_wavenumber(m, bc, WaveMode.SV, Direction.OUT, tol)
    wp = vertical_wavenumber(m, bc, WaveMode.P, Direction.OUT, tol)
    return ws.value, wp.value


def _eta(xi3: complex, side: str, direction: str) -> complex:
    """Vertical wavenumber of the (side, direction) branch of a channel.

    direction "evan" ignores in/out and picks the branch decaying away from
    the surface on that side.
    """
    if direction == "evan":
        return xi3 if side == PLUS else -xi3
    sign = 1.0 if direction == "out" else -1.0
    if side == MINUS:
        sign = -sign
    return sign * xi3


def _psv_column(m: Material, bc: BoundaryCovector, mode: WaveMode,
                eta: complex, sign: float = 1.0) -> list[complex]:
    """(u1, u3, T1, T3) of a unit P or SV potential with wavenumber ``eta``."""
    xi1 = bc.xi_t
    tau2 = bc.tau * bc.tau
    mu = m.mu
    if mode is WaveMode.P:
        return [sign * xi1, sign * eta, sign * 2.0 * mu * xi1 * eta,
                sign * (m.rho * tau2 - 2.0 * mu * xi1 * xi1)]
    msv = mu * (2.0 * xi1 * xi1 - tau2 / (m.cs * m.cs))
    return [sign * -eta, sign * xi1, sign * msv, sign * 2.0 * mu * xi1 * eta]


def _sh_column(m: Material, bc: BoundaryCovector, eta: complex,
               sign: float = 1.0) -> list[complex]:
    """(u2, T2) of a unit SH potential with wavenumber ``eta``."""
    xi1 = bc.xi_t
    return [sign * eta, sign * (m.rho * bc.tau ** 2 - m.mu * xi1 * xi1)]


def _flatten_cols(cols: list[list[complex]]) -> list[complex]:
    n = len(cols[0])
    return [cols[j][i] for i in range(n) for j in range(len(cols))]


def _solve_cols(cols: list[list[complex]], rhs: list[complex]
                ) -> tuple[list[complex], complex, float]:
    """Solve the square system whose columns are ``cols``."""
    n = len(rhs)
    return _core.solve_complex(_flatten_cols(cols), rhs, n, 1)


def _det_cols(cols: list[list[complex]]) -> tuple[complex, float]:
    return _core.det_complex(_flatten_cols(cols), len(cols))


def _solve(k: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, complex, float]:
    n = k.shape[0]
    rhs2 = rhs.reshape(n, -1)
    m = rhs2.shape[1]
    x, det, hadamard = _core.solve_complex(
        list(k.astype(complex).ravel()), list(rhs2.astype(complex).ravel()), n, m
    )
    return np.array(x, dtype=complex).reshape(n, m).reshape(rhs.shape), det, hadamard


def _det(k: np.ndarray) -> tuple[complex, float]:
    n = k.shape[0]
    return _core.det_complex(list(k.astype(complex).ravel()), n)


# ----------------------------------------------------------------------
# 3x3 boundary symbols


def assemble_U(m: Material, bc: BoundaryCovector, direction: str = "out",
               xi2: float = 0.0, tol: float = GLANCING_TOL) -> SymbolMatrix3:
    """Displacement symbol: columns (SH, SV, P) against rows (u1, u2, u3).

    ``direction`` flips the sign of the real vertical wavenumbers only;
    evanescent channels keep their +i kappa branch for either tag.  ``xi2``
    evaluates the un-rotated symbol at xi' = (xi1, xi2) with
    xi1 = sqrt(xi_t^2 - xi2^2) (used by the rotation-consistency check).
    """
    xi3s, xi3p = _xi3_pair(m, bc, tol)
    if direction == "in":
        if xi3s.imag == 0.0:
            xi3s = -xi3s
        if xi3p.imag == 0.0:
            xi3p = -xi3p
    xi1 = math.sqrt(max(bc.xi_t ** 2 - xi2 ** 2, 0.0))
    values = np.array(
        [
            [0.0, -xi3s, xi1],
            [xi3s, 0.0, xi2],
            [-xi2, xi1, xi3p],
        ],
        dtype=complex,
    )
    return SymbolMatrix3(values=values, tag=f"U{direction}")


def assemble_M(m: Material, bc: BoundaryCovector, direction: str = "out",
               xi2: float = 0.0, tol: float = GLANCING_TOL) -> SymbolMatrix3:
    """Traction symbol: columns (SH, SV, P) against rows (T1, T2, T3)."""
    xi3s, xi3p = _xi3_pair(m, bc, tol)
    if direction == "in":
        if xi3s.imag == 0.0:
            xi3s = -xi3s
        if xi3p.imag == 0.0:
            xi3p = -xi3p
    xi1 = math.sqrt(max(bc.xi_t ** 2 - xi2 ** 2, 0.0))
    mu, rho, tau2 = m.mu, m.rho, bc.tau ** 2
    xit2 = xi1 * xi1 + xi2 * xi2
    values = np.array(
        [
            [-mu * xi1 * xi2, mu * (2.0 * xi1 ** 2 + xi2 ** 2) - rho * tau2,
             2.0 * mu * xi1 * xi3p],
            [-mu * (xi1 ** 2 + 2.0 * xi2 ** 2) + rho * tau2, mu * xi1 * xi2,
             2.0 * mu * xi2 * xi3p],
            [-2.0 * mu * xi2 * xi3s, 2.0 * mu * xi1 * xi3s,
             -2.0 * mu * xit2 + rho * tau2],
        ],
        dtype=complex,
    )
    return SymbolMatrix3(values=values, tag=f"M{direction}")


def det_U_closed_form(m: Material, bc: BoundaryCovector,
                      tol: float = GLANCING_TOL) -> complex:
    """xi3_s (xi_t^2 + xi3_s xi3_p), the closed form of det(assemble_U)."""
    xi3s, xi3p = _xi3_pair(m, bc, tol)
    return xi3s * (bc.xi_t ** 2 + xi3s * xi3p)


def det_M_closed_form(m: Material, bc: BoundaryCovector,
                      tol: float = GLANCING_TOL) -> complex:
    """Closed form of det(assemble_M):

        (rho tau^2 - mu xi_t^2) ((2 mu xi_t^2 - rho tau^2)^2
                                 + 4 mu^2 xi_t^2 xi3_p xi3_s).

    Positive in the hyperbolic region; in the elliptic region the second
    factor is mu^2 xi_t^4 R(s) with R the Rayleigh function of
    ``surface_waves``, so the determinant vanishes exactly on the Rayleigh
    variety.
    """
    xi3s, xi3p = _xi3_pair(m, bc, tol)
    xit2 = bc.xi_t ** 2
    mu, rho, tau2 = m.mu, m.rho, bc.tau ** 2
    return (rho * tau2 - mu * xit2) * (
        (2.0 * mu * xit2 - rho * tau2) ** 2 + 4.0 * mu * mu * xit2 * xi3p * xi3s
    )


def rotation_matrix(xi1: float, xi2: float) -> np.ndarray:
    """In-plane rotation aligning (xi1, xi2) with the first tangential axis."""
    norm = math.hypot(xi1, xi2)
    return np.array(
        [
            [xi1 / norm, xi2 / norm, 0.0],
            [-xi2 / norm, xi1 / norm, 0.0],
            [0.0, 0.0, 1.0],
        ]
    )


def assemble_A(m: Material, bc: BoundaryCovector, direction: str = "out",
               side: str = PLUS, tol: float = GLANCING_TOL) -> AMatrix:
    """4x2 P-SV trace matrix in the classical Knott-system sign convention.

    Columns (P, SV) against rows (u1, u3, T1, T3).  The "in" tag carries the
    positive real roots and "out" their negatives; evanescent channels take
    +i kappa under either tag.  (In the geometric labelling of
    ``solve_interface`` the roles are reversed on the plus side: an upward
    propagating wave there has wavenumber +xi3.)
    """
    xi3s, xi3p = _xi3_pair(m, bc, tol)
    sign = 1.0 if direction == "in" else -1.0
    es = xi3s if xi3s.imag != 0.0 else sign * xi3s
    ep = xi3p if xi3p.imag != 0.0 else sign * xi3p
    cols = np.column_stack([
        _psv_column(m, bc, WaveMode.P, ep),
        _psv_column(m, bc, WaveMode.SV, es),
    ])
    return AMatrix(values=cols, side=side, direction=direction)


# ----------------------------------------------------------------------
# energy bookkeeping


def _channel_flux(m: Material, bc: BoundaryCovector, mode: WaveMode,
                  xi3: complex, amp: complex) -> float:
    a2 = (amp * amp.conjugate()).real
    if mode is WaveMode.SH:
        return m.mu * (xi3 ** 3).real * a2
    return m.rho * xi3.real * a2


def energy_flux(amps: dict[tuple[str, str], PotentialAmplitudes],
                m_plus: Material, m_minus: Material | None,
                bc: BoundaryCovector, tol: float = GLANCING_TOL
                ) -> tuple[dict[tuple[str, str, str], float], float]:
    """Per-channel energy fluxes and the out-minus-in residual.

    ``amps`` maps (side, direction) with direction in {"in", "out",
    "evanescent"} to potential amplitudes.  Evanescent channels contribute
    exactly zero (Re xi3 = 0 on their branch).
    """
    mats = {PLUS: m_plus, MINUS: m_minus}
    fluxes: dict[tuple[str, str, str], float] = {}
    total_in = 0.0
    total_out = 0.0
    for (side, direction), pa in amps.items():
        m = mats[side]
        if m is None:
            raise ValueError(f"no material on side {side}")
        xi3s, xi3p = _xi3_pair(m, bc, tol)
        for mode, xi3, amp in (
            (WaveMode.P, xi3p, pa.p),
            (WaveMode.SV, xi3s, pa.sv),
            (WaveMode.SH, xi3s, pa.sh),
        ):
            f = _channel_flux(m, bc, mode, xi3, amp)
            if direction == "evanescent":
                f = 0.0
            fluxes[(side, direction, mode.value)] = f
            if direction == "out":
                total_out += f
            elif direction == "in":
                total_in += f
    return fluxes, total_out - total_in


def _relative_residual(out_total: float, in_total: float) -> float:
    scale = max(abs(in_total), abs(out_total))
    if scale == 0.0:
        return 0.0
    return abs(out_total - in_total) / scale


def displacement_magnitudes(m: Material, bc: BoundaryCovector,
                            amps: PotentialAmplitudes,
                            tol: float = GLANCING_TOL) -> dict[str, float]:
    """|displacement| per mode for the given potential amplitudes."""
    xi3s, xi3p = _xi3_pair(m, bc, tol)
    xi1 = bc.xi_t
    return {
        "P": abs(amps.p) * abs(cmath.sqrt(xi1 * xi1 + xi3p * xi3p)),
        "SV": abs(amps.sv) * abs(cmath.sqrt(xi1 * xi1 + xi3s * xi3s)),
        "SH": abs(amps.sh) * abs(xi3s),
    }


# ----------------------------------------------------------------------
# interface scattering


def _check_forbidden(region: SideRegion, incoming: PotentialAmplitudes,
                     side: str) -> None:
    if incoming.p != 0 and not region.p_propagating:
        raise ForbiddenIncoming(f"P incoming on {side} side is evanescent there")
    if (incoming.sv != 0 or incoming.sh != 0) and not region.s_propagating:
        raise ForbiddenIncoming(f"S incoming on {side} side is evanescent there")


def solve_interface(m_plus: Material, m_minus: Material, bc: BoundaryCovector,
                    incoming_plus: PotentialAmplitudes = ZERO_AMPS,
                    incoming_minus: PotentialAmplitudes = ZERO_AMPS,
                    tol: float = GLANCING_TOL) -> ScatterResult:
    """Solve the two-sided transmission problem at one interface.

    Given incoming amplitudes on both sides (zero on channels that are
    evanescent for their side, else ForbiddenIncoming), returns all outgoing
    and evanescent amplitudes.  One assembly path serves all six region
    cases: each side contributes a P slot and an SV slot whose column is the
    outgoing branch when the channel propagates and the decaying branch when
    it does not, plus the analogous SH slot.
    """
    case = classify_interface(m_plus, m_minus, bc, tol)
    mats = {PLUS: m_plus, MINUS: m_minus}
    regions = {PLUS: case.plus, MINUS: case.minus}
    incoming = {PLUS: incoming_plus, MINUS: incoming_minus}
    for side in SIDES:
        _check_forbidden(regions[side], incoming[side], side)

    xi3 = {side: _xi3_pair(mats[side], bc, tol) for side in SIDES}
    sign = {PLUS: 1.0, MINUS: -1.0}

    # P-SV block: unknown slots (P+, SV+, P-, SV-)
    slot_kind = {}
    cols = []
    rhs = [0j, 0j, 0j, 0j]
    for side in SIDES:
        s, p = xi3[side]
        m = mats[side]
        pk = "out" if regions[side].p_propagating else "evan"
        sk = "out" if regions[side].s_propagating else "evan"
        slot_kind[side] = (pk, sk)
        cols.append(_psv_column(m, bc, WaveMode.P, _eta(p, side, pk), sign[side]))
        cols.append(_psv_column(m, bc, WaveMode.SV, _eta(s, side, sk), sign[side]))
        if incoming[side].p != 0:
            col = _psv_column(m, bc, WaveMode.P, _eta(p, side, "in"), sign[side])
            for i in range(4):
                rhs[i] -= incoming[side].p * col[i]
        if incoming[side].sv != 0:
            col = _psv_column(m, bc, WaveMode.SV, _eta(s, side, "in"), sign[side])
            for i in range(4):
                rhs[i] -= incoming[side].sv * col[i]
    sol, det, hadamard = _solve_cols(cols, rhs)
    if abs(det) < SINGULAR_TOL * hadamard:
        if case.label == "EE":
            raise StoneleySingular(
                "two-sided evanescent system is singular (Stoneley root)")
        raise Glancing("interface system near-singular; move off glancing")

    # SH block: one slot per side
    sh_cols = []
    sh_kind = {}
    rhs_sh = [0j, 0j]
    any_sh = incoming_plus.sh != 0 or incoming_minus.sh != 0
    for side in SIDES:
        s, _ = xi3[side]
        kind = "out" if regions[side].s_propagating else "evan"
        sh_kind[side] = kind
        sh_cols.append(_sh_column(mats[side], bc, _eta(s, side, kind), sign[side]))
        if incoming[side].sh != 0:
            col = _sh_column(mats[side], bc, _eta(s, side, "in"), sign[side])
            rhs_sh[0] -= incoming[side].sh * col[0]
            rhs_sh[1] -= incoming[side].sh * col[1]
    if any_sh:
        sol_sh, _, _ = _solve_cols(sh_cols, rhs_sh)
    else:
        sol_sh = [0j, 0j]  # exact SH decoupling

    outgoing = {}
    evanescent = {}
    decay: dict[str, dict[str, float]] = {PLUS: {}, MINUS: {}}
    amps = {PLUS: (sol[0], sol[1], sol_sh[0]), MINUS: (sol[2], sol[3], sol_sh[1])}
    for side in SIDES:
        p_amp, sv_amp, sh_amp = amps[side]
        pk, sk = slot_kind[side]
        out_kwargs = {}
        ev_kwargs = {}
        s, p = xi3[side]
        if pk == "out":
            out_kwargs["p"] = p_amp
        else:
            ev_kwargs["p"] = p_amp
            decay[side]["P"] = p.imag
        if sk == "out":
            out_kwargs["sv"] = sv_amp
        else:
            ev_kwargs["sv"] = sv_amp
            decay[side]["SV"] = s.imag
        if sh_kind[side] == "out":
            out_kwargs["sh"] = sh_amp
        else:
            ev_kwargs["sh"] = sh_amp
            decay[side]["SH"] = s.imag
        outgoing[side] = PotentialAmplitudes(**out_kwargs)
        evanescent[side] = PotentialAmplitudes(**ev_kwargs)

    flux_in = 0.0
    flux_out = 0.0
    for side in SIDES:
        s, p = xi3[side]
        m = mats[side]
        flux_in += (_channel_flux(m, bc, WaveMode.P, p, incoming[side].p)
                    + _channel_flux(m, bc, WaveMode.SV, s, incoming[side].sv)
                    + _channel_flux(m, bc, WaveMode.SH, s, incoming[side].sh))
        flux_out += (_channel_flux(m, bc, WaveMode.P, p, outgoing[side].p)
                     + _channel_flux(m, bc, WaveMode.SV, s, outgoing[side].sv)
                     + _channel_flux(m, bc, WaveMode.SH, s, outgoing[side].sh))
    residual = _relative_residual(flux_out, flux_in)

    return ScatterResult(case=case, outgoing=outgoing, evanescent=evanescent,
                         decay=decay, energy_residual=residual)


def solve_free_surface(m: Material, bc: BoundaryCovector,
                       incoming: PotentialAmplitudes,
                       tol: float = GLANCING_TOL) -> ScatterResult:
    """Reflection with zero traction on the surface (one-sided problem).

    SH reflects with an exact sign flip.  In the mixed region only S may
    come in and the reflected P channel is evanescent; the elliptic region
    admits no incoming propagating waves at all.
    """
    region = classify_side(m, bc, tol)
    if region.is_glancing:
        raise Glancing(f"free-surface configuration is {region.value}-glancing")
    _check_forbidden(region, incoming, PLUS)

    xi3s, xi3p = _xi3_pair(m, bc, tol)
    decay: dict[str, dict[str, float]] = {PLUS: {}}
    if region is SideRegion.ELLIPTIC:
        # nothing can come in; nothing goes out
        return ScatterResult(case=region,
                             outgoing={PLUS: ZERO_AMPS},
                             evanescent={PLUS: ZERO_AMPS},
                             decay=decay, energy_residual=0.0)

    p_kind = "out" if region.p_propagating else "evan"
    col_p = _psv_column(m, bc, WaveMode.P, _eta(xi3p, PLUS, p_kind))[2:]
    col_sv = _psv_column(m, bc, WaveMode.SV, _eta(xi3s, PLUS, "out"))[2:]
    in_p = _psv_column(m, bc, WaveMode.P, _eta(xi3p, PLUS, "in"))[2:]
    in_sv = _psv_column(m, bc, WaveMode.SV, _eta(xi3s, PLUS, "in"))[2:]
    rhs = [-(incoming.p * in_p[0] + incoming.sv * in_sv[0]),
           -(incoming.p * in_p[1] + incoming.sv * in_sv[1])]
    sol, det, hadamard = _solve_cols([col_p, col_sv], rhs)
    if abs(det) < SINGULAR_TOL * hadamard:
        raise RayleighSingular("traction system singular at the free surface")
    sh_out = -incoming.sh  # exact sign flip

    if p_kind == "out":
        outgoing = PotentialAmplitudes(p=sol[0], sv=sol[1], sh=sh_out)
        evanescent = ZERO_AMPS
    else:
        outgoing = PotentialAmplitudes(sv=sol[1], sh=sh_out)
        evanescent = PotentialAmplitudes(p=sol[0])
        decay[PLUS]["P"] = xi3p.imag

    flux_in = (_channel_flux(m, bc, WaveMode.P, xi3p, incoming.p)
               + _channel_flux(m, bc, WaveMode.SV, xi3s, incoming.sv)
               + _channel_flux(m, bc, WaveMode.SH, xi3s, incoming.sh))
    flux_out = (_channel_flux(m, bc, WaveMode.P, xi3p, outgoing.p)
                + _channel_flux(m, bc, WaveMode.SV, xi3s, outgoing.sv)
                + _channel_flux(m, bc, WaveMode.SH, xi3s, outgoing.sh))
    return ScatterResult(case=region, outgoing={PLUS: outgoing},
                         evanescent={PLUS: evanescent}, decay=decay,
                         energy_residual=_relative_residual(flux_out, flux_in))


# ----------------------------------------------------------------------
# one-sided boundary value problems


def solve_bvp(m: Material, bc: BoundaryCovector, kind: str,
              data: np.ndarray, tol: float = GLANCING_TOL) -> PotentialAmplitudes:
    """Outgoing/evanescent potentials with Dirichlet or Neumann data.

    Solves U_out w = data or M_out w = data for w = (SH, SV, P).  The
    traction problem is singular on the Rayleigh variety in the elliptic
    region and raises RayleighSingular there.
    """
    if kind not in ("Dirichlet", "Neumann"):
        raise ValueError(f"unknown boundary condition kind {kind!r}")
    sym = (assemble_U if kind == "Dirichlet" else assemble_M)(m, bc, "out", tol=tol)
    rhs = np.asarray(data, dtype=complex)
    sol, det, hadamard = _solve(sym.values, rhs)
    if abs(det) < SINGULAR_TOL * hadamard:
        raise RayleighSingular(f"{kind} symbol singular (Rayleigh variety)")
    return PotentialAmplitudes(sh=sol[0], sv=sol[1], p=sol[2])


def solve_cauchy(m: Material, bc: BoundaryCovector, f: np.ndarray, h: np.ndarray,
                 tol: float = GLANCING_TOL
                 ) -> tuple[PotentialAmplitudes, PotentialAmplitudes, float]:
    """Split Cauchy data (u, T) = (f, h) into incoming and outgoing families.

    Hyperbolic region: six unknowns, unique split.  Mixed/elliptic: the
    evanescent channels have a single branch (reported in the outgoing
    slot), the system is overdetermined and solved in the least-squares
    sense; the returned residual measures the compatibility of (f, h).
    """
    region = classify_side(m, bc, tol)
    if region.is_glancing:
        raise Glancing(f"Cauchy split at a {region.value}-glancing covector")
    xi3s, xi3p = _xi3_pair(m, bc, tol)
    xi1 = bc.xi_t

    def stack6(eta_s: complex, eta_p: complex) -> np.ndarray:
        """Columns (SH, SV, P) of the stacked (u1,u2,u3,T1,T2,T3) trace."""
        cols = np.zeros((6, 3), dtype=complex)
        sh = _sh_column(m, bc, eta_s)
        cols[1, 0], cols[4, 0] = sh[0], sh[1]
        sv = _psv_column(m, bc, WaveMode.SV, eta_s)
        cols[0, 1], cols[2, 1], cols[3, 1], cols[5, 1] = sv
        p = _psv_column(m, bc, WaveMode.P, eta_p)
        cols[0, 2], cols[2, 2], cols[3, 2], cols[5, 2] = p
        return cols

    out_cols = stack6(_eta(xi3s, PLUS, "out" if region.s_propagating else "evan"),
                      _eta(xi3p, PLUS, "out" if region.p_propagating else "evan"))
    in_cols = stack6(_eta(xi3s, PLUS, "in"), _eta(xi3p, PLUS, "in"))

    columns = [out_cols[:, 0], out_cols[:, 1], out_cols[:, 2]]
    labels = [("out", "sh"), ("out", "sv"), ("out", "p")]
    if region.s_propagating:
        columns += [in_cols[:, 0], in_cols[:, 1]]
        labels += [("in", "sh"), ("in", "sv")]
    if region.p_propagating:
        columns.append(in_cols[:, 2])
        labels.append(("in", "p"))

    a = np.column_stack(columns)
    rhs = np.concatenate([np.asarray(f, dtype=complex),
                          np.asarray(h, dtype=complex)])
    if a.shape[1] == 6:
        sol, det, hadamard = _solve(a, rhs)
        if abs(det) < SINGULAR_TOL * hadamard:
            raise Glancing("Cauchy system near-singular")
        residual = 0.0
    else:
        ah = a.conj().T
        sol, _, _ = _solve(ah @ a, ah @ rhs)
        residual = float(np.linalg.norm(a @ sol - rhs))

    fields = {"in": {"sh": 0j, "sv": 0j, "p": 0j},
              "out": {"sh": 0j, "sv": 0j, "p": 0j}}
    for (slot, name), value in zip(labels, sol):
        fields[slot][name] = value
    return (PotentialAmplitudes(**fields["in"]),
            PotentialAmplitudes(**fields["out"]),
            residual)


# ----------------------------------------------------------------------
# Knott cotangent form


def knott_form(m_plus: Material, m_minus: Material, bc: BoundaryCovector,
               incident: PotentialAmplitudes,
               tol: float = GLANCING_TOL) -> ScatterResult:
    """Interface scattering through the classical cotangent-matrix system.

    Valid in the HH case with xi1 != 0 (the construction divides by xi1).
    Produces the same amplitudes as ``solve_interface`` with the incident
    wave on the plus side; the two routes share no assembly code.
    """
    case = classify_interface(m_plus, m_minus, bc, tol)
    if case.label != "HH":
        raise ValueError(f"cotangent form needs the HH case, got {case.label}")
    if bc.xi_t == 0.0:
        raise DegenerateAngle("cotangent form undefined at normal incidence")

    xi1 = bc.xi_t
    s_p, p_p = _xi3_pair(m_plus, bc, tol)
    s_m, p_m = _xi3_pair(m_minus, bc, tol)
    ctp_p, cts_p = (p_p / xi1).real, (s_p / xi1).real  # plus-side cotangents
    ctp_m, cts_m = (p_m / xi1).real, (s_m / xi1).real
    mu_p, mu_m = m_plus.mu, m_minus.mu
    gp = mu_p * (1.0 - cts_p ** 2)
    gm = mu_m * (1.0 - cts_m ** 2)

    a = np.array(
        [
            [1.0, -cts_p, -1.0, -cts_m],
            [ctp_p, 1.0, ctp_m, -1.0],
            [2.0 * mu_p * ctp_p, gp, 2.0 * mu_m * ctp_m, -gm],
            [-gp, 2.0 * mu_p * cts_p, gm, 2.0 * mu_m * cts_m],
        ],
        dtype=complex,
    )
    b = np.array(
        [
            [-1.0, -cts_p],
            [ctp_p, -1.0],
            [2.0 * mu_p * ctp_p, -gp],
            [gp, 2.0 * mu_p * cts_p],
        ],
        dtype=complex,
    )
    rhs = b @ np.array([incident.p, incident.sv], dtype=complex)
    sol, det, hadamard = _solve(a, rhs)
    if abs(det) < SINGULAR_TOL * hadamard:
        raise Glancing("cotangent system near-singular")
    p_r, sv_r, p_t, sv_t = sol

    # SH block in the same scaling (rows divided by xi1 and xi1^2)
    ash = np.array(
        [[cts_p, cts_m],
         [mu_p * cts_p ** 2, -mu_m * cts_m ** 2]],
        dtype=complex,
    )
    rhs_sh = np.array([cts_p * incident.sh,
                       -mu_p * cts_p ** 2 * incident.sh], dtype=complex)
    if incident.sh != 0:
        sol_sh, _, _ = _solve(ash, rhs_sh)
        sh_r, sh_t = sol_sh
    else:
        sh_r, sh_t = 0j, 0j

    out_plus = PotentialAmplitudes(p=p_r, sv=sv_r, sh=sh_r)
    out_minus = PotentialAmplitudes(p=p_t, sv=sv_t, sh=sh_t)

    def a2(z: complex) -> float:
        return (z * z.conjugate()).real

    rho_p, rho_m = m_plus.rho, m_minus.rho
    residual_psv = (rho_p * ctp_p * (a2(p_r) - a2(incident.p))
                    + rho_p * cts_p * (a2(sv_r) - a2(incident.sv))
                    + rho_m * ctp_m * a2(p_t) + rho_m * cts_m * a2(sv_t))
    residual_sh = (mu_p * cts_p ** 3 * (a2(sh_r) - a2(incident.sh))
                   + mu_m * cts_m ** 3 * a2(sh_t))
    flux_in = (rho_p * ctp_p * a2(incident.p) + rho_p * cts_p * a2(incident.sv)
               + mu_p * cts_p ** 3 * a2(incident.sh))
    scale = abs(flux_in) if flux_in != 0.0 else 1.0
    residual = abs(residual_psv + residual_sh) / scale

    return ScatterResult(case=case,
                         outgoing={PLUS: out_plus, MINUS: out_minus},
                         evanescent={PLUS: ZERO_AMPS, MINUS: ZERO_AMPS},
                         decay={PLUS: {}, MINUS: {}},
                         energy_residual=residual)


# ----------------------------------------------------------------------
# scalar (acoustic) interface


@dataclass(frozen=True)
class AcousticResult:
    outgoing: dict[str, complex]
    evanescent: dict[str, complex]
    decay: dict[str, float]
    energy_residual: float


def acoustic_interface(c_plus: float, c_minus: float, bc: BoundaryCovector,
                       incoming: tuple[complex, complex] = (0.0, 0.0),
                       tol: float = GLANCING_TOL) -> AcousticResult:
    """Scalar-wave transmission: continuity of the field and of its normal
    derivative.

    ``incoming`` holds (plus, minus) incident amplitudes.  A side in its
    elliptic region carries a single evanescent mode; incident amplitude
    there raises ForbiddenIncoming.  Beyond the critical angle the whole
    energy is reflected: |a_R| = |a_I| exactly.
    """

    def xi_n(c: float) -> complex:
        arg = (bc.tau / c) ** 2 - bc.xi_t ** 2
        scale = (bc.tau / c) ** 2 + bc.xi_t ** 2
        if abs(arg) < tol * scale:
            raise Glancing(f"acoustic wavenumber glancing at c={c}")
        return complex(math.sqrt(arg), 0.0) if arg > 0.0 else complex(0.0, math.sqrt(-arg))

    xi = {PLUS: xi_n(c_plus), MINUS: xi_n(c_minus)}
    a_in = {PLUS: complex(incoming[0]), MINUS: complex(incoming[1])}
    hyper = {side: xi[side].imag == 0.0 for side in SIDES}
    for side in SIDES:
        if not hyper[side] and a_in[side] != 0:
            raise ForbiddenIncoming(f"{side} side is evanescent for the "
                                    "acoustic wave")

    def eta(side: str, direction: str) -> complex:
        return _eta(xi[side], side, direction)

    sign = {PLUS: 1.0, MINUS: -1.0}
    cols = []
    kinds = {}
    for side in SIDES:
        kind = "out" if hyper[side] else "evan"
        kinds[side] = kind
        e = eta(side, kind)
        cols.append(sign[side] * np.array([1.0, e], dtype=complex))
    rhs = np.zeros(2, dtype=complex)
    for side in SIDES:
        e = eta(side, "in")
        rhs -= sign[side] * a_in[side] * np.array([1.0, e], dtype=complex)
    sol, det, hadamard = _solve(np.column_stack(cols), rhs)
    if abs(det) < SINGULAR_TOL * hadamard:
        raise Glancing("acoustic interface system near-singular")

    outgoing = {}
    evanescent = {}
    decay = {}
    flux_in = 0.0
    flux_out = 0.0
    for side, amp in zip(SIDES, sol):
        if kinds[side] == "out":
            outgoing[side] = complex(amp)
            flux_out += xi[side].real * (amp * amp.conjugate()).real
        else:
            evanescent[side] = complex(amp)
            decay[side] = xi[side].imag
        flux_in += xi[side].real * (a_in[side] * a_in[side].conjugate()).real
    return AcousticResult(outgoing=outgoing, evanescent=evanescent, decay=decay,
                          energy_residual=_relative_residual(flux_out, flux_in))


# ----------------------------------------------------------------------
# one-sided control of the transmission problem


@dataclass(frozen=True)
class ControlResult:
    """Solution of a control problem: waves on the solved side plus any
    evanescent byproducts on the prescribed side."""

    side: str  # the solved (controlling) side
    amps_in: PotentialAmplitudes
    amps_out: PotentialAmplitudes
    evanescent: PotentialAmplitudes        # on the solved side
    known_evanescent: PotentialAmplitudes  # byproduct on the prescribed side
    condition_report: dict[str, float]
    case: InterfaceCase


def control_solve(m_plus: Material, m_minus: Material, bc: BoundaryCovector,
                  known_side: str, known: tuple[PotentialAmplitudes, PotentialAmplitudes],
                  tol: float = GLANCING_TOL) -> ControlResult:
    """Solve for the waves on one side given the full configuration on the
    other.

    Admitted configurations: both sides hyperbolic (prescribe anything);
    hyperbolic-mixed with the mixed side prescribed (its evanescent P is
    passed in the "out" slot); mixed-mixed, where only the SV pair of the
    prescribed side is given and both evanescent P amplitudes come out as
    byproducts (away from the discrete zeros of the control determinant).
    SH control rides along whenever the solved side carries both SH
    branches.
    """
    if known_side not in SIDES:
        raise ValueError(f"unknown side {known_side!r}")
    other_side = MINUS if known_side == PLUS else PLUS
    case = classify_interface(m_plus, m_minus, bc, tol)
    mats = {PLUS: m_plus, MINUS: m_minus}
    regions = {PLUS: case.plus, MINUS: case.minus}
    known_in, known_out = known

    r_known = regions[known_side]
    r_other = regions[other_side]
    sign = {PLUS: 1.0, MINUS: -1.0}
    xi3 = {side: _xi3_pair(mats[side], bc, tol) for side in SIDES}

    label = case.label
    mm_case = label == "MM"
    if not (label == "HH"
            or (label == "HM" and r_other is SideRegion.HYPERBOLIC)
            or mm_case):
        raise ControlImpossible(
            f"case {label} prescribed from the {r_known.value} side admits "
            "no one-sided control"
        )

    def col(side: str, mode: WaveMode, direction: str) -> np.ndarray:
        s, p = xi3[side]
        base = p if mode is WaveMode.P else s
        return np.array(_psv_column(mats[side], bc, mode,
                                    _eta(base, side, direction), sign[side]))

    unknown_cols = []
    unknown_labels: list[tuple[str, str, str]] = []  # (side, slot, mode)
    rhs = np.zeros(4, dtype=complex)

    if mm_case:
        if known_in.p != 0 or known_out.p != 0:
            raise ForbiddenIncoming(
                "mixed-side P channels are byproducts; prescribe SV only")
        unknown_cols = [col(known_side, WaveMode.P, "evan"),
                        col(other_side, WaveMode.SV, "in"),
                        col(other_side, WaveMode.SV, "out"),
                        col(other_side, WaveMode.P, "evan")]
        unknown_labels = [(known_side, "evan", "p"), (other_side, "in", "sv"),
                          (other_side, "out", "sv"), (other_side, "evan", "p")]
        rhs -= known_in.sv * col(known_side, WaveMode.SV, "in")
        rhs -= known_out.sv * col(known_side, WaveMode.SV, "out")
    else:
        for mode in (WaveMode.P, WaveMode.SV):
            for direction in ("in", "out"):
                unknown_cols.append(col(other_side, mode, direction))
                unknown_labels.append(
                    (other_side, direction, "p" if mode is WaveMode.P else "sv"))
        # prescribed side contributions
        if r_known.p_propagating:
            rhs -= known_in.p * col(known_side, WaveMode.P, "in")
            rhs -= known_out.p * col(known_side, WaveMode.P, "out")
        else:
            if known_in.p != 0:
                raise ForbiddenIncoming("evanescent P prescribed in the in slot")
            rhs -= known_out.p * col(known_side, WaveMode.P, "evan")
        rhs -= known_in.sv * col(known_side, WaveMode.SV, "in")
        rhs -= known_out.sv * col(known_side, WaveMode.SV, "out")

    k = np.column_stack(unknown_cols)
    det, hadamard = _det(k)
    condition = {"det_magnitude": abs(det), "scale": hadamard,
                 "ratio": abs(det) / hadamard if hadamard else 0.0}
    if abs(det) < SINGULAR_TOL * hadamard:
        if mm_case:
            raise NearSingularControl(
                f"control determinant below tolerance: |det|={abs(det):.3e}")
        raise Glancing("control system near-singular")
    sol, _, _ = _solve(k, rhs)

    # SH: solve on the other side when it carries both branches
    sh_fields = {"in": 0j, "out": 0j}
    if known_in.sh != 0 or known_out.sh != 0:
        if not r_other.s_propagating:
            raise ControlImpossible(
                "SH control impossible: solved side has a single SH branch")
        s_k, _ = xi3[known_side]
        rhs_sh = np.zeros(2, dtype=complex)
        if r_known.s_propagating:
            rhs_sh -= known_in.sh * np.array(_sh_column(
                mats[known_side], bc, _eta(s_k, known_side, "in"),
                sign[known_side]))
            rhs_sh -= known_out.sh * np.array(_sh_column(
                mats[known_side], bc, _eta(s_k, known_side, "out"),
                sign[known_side]))
        else:
            rhs_sh -= known_out.sh * np.array(_sh_column(
                mats[known_side], bc, _eta(s_k, known_side, "evan"),
                sign[known_side]))
        s_o, _ = xi3[other_side]
        k_sh = np.column_stack([
            _sh_column(mats[other_side], bc, _eta(s_o, other_side, "in"),
                       sign[other_side]),
            _sh_column(mats[other_side], bc, _eta(s_o, other_side, "out"),
                       sign[other_side]),
        ])
        sol_sh, _, _ = _solve(k_sh, rhs_sh)
        sh_fields["in"], sh_fields["out"] = sol_sh

    fields = {"in": {"p": 0j, "sv": 0j}, "out": {"p": 0j, "sv": 0j},
              "evan_other": 0j, "evan_known": 0j}
    for (side, slot, name), value in zip(unknown_labels, sol):
        if slot == "evan":
            key = "evan_known" if side == known_side else "evan_other"
            fields[key] = value
        else:
            fields[slot][name] = value

    return ControlResult(
        side=other_side,
        amps_in=PotentialAmplitudes(sh=sh_fields["in"], **fields["in"]),
        amps_out=PotentialAmplitudes(sh=sh_fields["out"], **fields["out"]),
        evanescent=PotentialAmplitudes(p=fields["evan_other"]),
        known_evanescent=PotentialAmplitudes(p=fields["evan_known"]),
        condition_report=condition,
        case=case,
    )


def mm_control_determinant(m_plus: Material, m_minus: Material,
                           bc: BoundaryCovector, known_side: str = MINUS,
                           tol: float = GLANCING_TOL) -> complex:
    """Closed form of the MM SV-control determinant.

    With the prescribed (known) side's evanescent P decaying away from the
    interface, the determinant of the control system assembled by
    ``control_solve`` (columns: known-side P, solved-side SV in, SV out,
    solved-side P) is, writing o for the solved side and k for the known one
    and kappa for the P decay rates,

        2 i mu_o tau^2 xi3s_o / (cs_k^2 cs_o^4) *
            [ 2 cs_k^2 cs_o^2 xi1^2 (mu_o - mu_k)(kappa_o - kappa_k)
              + tau^2 (cs_k^2 kappa_k mu_o + cs_o^2 kappa_o mu_k) ]

    up to the overall sign of the column permutation.  The second bracket
    term is positive throughout the MM band, so zeros require opposing
    shear-modulus and P-decay contrasts and form a discrete set; near such a
    zero ``control_solve`` raises NearSingularControl.
    """
    solved = PLUS if known_side == MINUS else MINUS
    m_o = m_plus if solved == PLUS else m_minus
    m_k = m_minus if solved == PLUS else m_plus
    s_o, p_o = _xi3_pair(m_o, bc, tol)
    _, p_k = _xi3_pair(m_k, bc, tol)
    kap_o, kap_k = p_o.imag, p_k.imag
    xi1 = bc.xi_t
    tau2 = bc.tau ** 2
    cso2 = m_o.cs ** 2
    csk2 = m_k.cs ** 2
    mu_o, mu_k = m_o.mu, m_k.mu
    bracket = (2.0 * csk2 * cso2 * xi1 ** 2 * (mu_o - mu_k) * (kap_o - kap_k)
               + tau2 * (csk2 * kap_k * mu_o + cso2 * kap_o * mu_k))
    return 2.0j * mu_o * tau2 * s_o / (csk2 * cso2 * cso2) * bracket
