"""Travel-time synthesis and layer-stripping recovery of the wave speeds.

The recovery pipeline is the flat-geometry constructive analog of the
uniqueness theory: synthesize boundary travel times by forward ray tracing,
then recover speeds layer by layer from shallow to deep.

* Constant stacks: every primary same-mode reflection branch contributes a
  delay-time curve tau(p) = T - p X = sum_j 2 h_j sqrt(c_j^-2 - p^2) over
  the layers it crosses.  Stripping the known overburden leaves
  g(p) = 2 h sqrt(c^-2 - p^2) for the deepest leg, and (g/2)^2 is linear in
  p^2, so one least-squares line per layer recovers (c, h) together with a
  fit residual.  SH branches drive the shear chain and P branches the
  compressional chain.
* A gradient top layer: turning (diving) rays invert through the classical
  Abel integral z(u) = (1/pi) int_0^{X(u)} arccosh(p(X)/u) dX, giving
  c(z) = 1/u down to the deepest covered turning point.

Recovery of a layer is attempted only when its governing jump conditions
hold in the supplied model: speeds nondecreasing with depth (the flat
surrogate of the convex-foliation requirement), the shear jump condition at
every crossed interface for the shear chain, and additionally the
compressional jump condition for the compressional chain.  Violations are
recorded as named refusals, never silently worked around; the data values
themselves come only from the synthesized curves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AssumptionViolated,
    Glancing,
    GlancingProximity,
    InsufficientCoverage,
    NoKinkFound,
    NonMonotone,
    Trapped,
)
from .model import LayeredModel, Material, WaveMode, material_speeds
from .raytrace import Ray, StoppingPolicy, propagate_tree

#: Reflection branches whose peak |amplitude| falls below this fraction of
#: the source amplitude are treated as absent (below the noise floor).
DEFAULT_SENSITIVITY = 1e-8


@dataclass(frozen=True)
class TTSample:
    slowness: float
    offset: float
    time: float

    @property
    def delay(self) -> float:
        """Intercept (delay) time tau = T - p X."""
        return self.time - self.slowness * self.offset


@dataclass
class TravelTimeCurve:
    """Samples of one labeled branch, sorted by strictly increasing p."""

    mode: WaveMode
    branch: str
    samples: list[TTSample]
    peak_amplitude: float = math.nan

    def __post_init__(self):
        self.samples = sorted(self.samples, key=lambda s: s.slowness)
        for a, b in zip(self.samples, self.samples[1:]):
            if not (a.slowness < b.slowness):
                raise ValueError("duplicate slowness in a branch")

    @property
    def slownesses(self) -> np.ndarray:
        return np.array([s.slowness for s in self.samples])

    @property
    def offsets(self) -> np.ndarray:
        return np.array([s.offset for s in self.samples])

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.samples])

    @property
    def delays(self) -> np.ndarray:
        return self.times - self.slownesses * self.offsets


@dataclass(frozen=True)
class RayFan:
    """Take-off slowness grid of the synthetic survey."""

    p_min: float
    p_max: float
    n: int

    def grid(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.n)


def default_fan(model: LayeredModel, mode: WaveMode, n: int = 160,
                margin: float = 0.85) -> RayFan:
    """Fan reaching ``margin`` of the steepest slowness that still transmits
    through every layer (so the deepest branch keeps full coverage)."""
    speeds = []
    for j, m in enumerate(model.layers):
        top, bot = model.layer_bounds(j)
        speeds += [m.speed(mode, top), m.speed(mode, bot)]
    p_max = margin / max(speeds)
    return RayFan(p_min=p_max / n, p_max=p_max, n=n)


def default_policy(model: LayeredModel) -> StoppingPolicy:
    depth_time = sum(
        (model.layer_bounds(j)[1] - model.layer_bounds(j)[0])
        / model.layers[j].speed(WaveMode.SV, model.layer_bounds(j)[0])
        for j in range(model.n_layers)
    )
    # primaries off the deepest reflector need 2k+1 events before surfacing
    return StoppingPolicy(
        max_time=8.0 * depth_time + 10.0,
        min_amp=1e-3,
        max_generations=2 * len(model.interfaces) + 1,
    )


def synthesize_data(model: LayeredModel, modes: list[WaveMode],
                    fan: RayFan | None = None,
                    policy: StoppingPolicy | None = None,
                    noise: float = 0.0, seed: int = 0,
                    source_x: float = 0.0
                    ) -> dict[tuple[str, str], TravelTimeCurve]:
    """Trace a fan of rays per mode and bucket surface arrivals by branch.

    Returns {(mode, branch label): curve}.  Optional additive Gaussian noise
    of absolute standard deviation ``noise`` perturbs the times, with a
    fixed seed for reproducibility.  Glancing take-offs are skipped.
    """
    policy = policy or default_policy(model)
    buckets: dict[tuple[str, str], list[TTSample]] = {}
    amps: dict[tuple[str, str], float] = {}
    for mode in modes:
        mode_fan = fan or default_fan(model, mode)
        for p in mode_fan.grid():
            source = Ray(start=(source_x, 0.0), slowness=float(p), mode=mode,
                         direction="down", layer=0, birth_time=0.0)
            try:
                tree = propagate_tree(model, source, policy)
            except (Glancing, GlancingProximity, Trapped):
                continue
            for arr in tree.arrivals:
                key = (mode.value, arr.path)
                buckets.setdefault(key, []).append(
                    TTSample(slowness=arr.slowness,
                             offset=arr.offset - source_x, time=arr.time))
                if arr.amplitude is not None:
                    amps[key] = max(amps.get(key, 0.0), abs(arr.amplitude))

    curves = {}
    for key in sorted(buckets):
        mode_label, branch = key
        samples = buckets[key]
        seen = set()
        unique = []
        for s in samples:
            if s.slowness not in seen:
                seen.add(s.slowness)
                unique.append(s)
        curves[key] = TravelTimeCurve(
            mode=WaveMode(mode_label), branch=branch, samples=unique,
            peak_amplitude=amps.get(key, math.nan))
    if noise > 0.0:
        rng = np.random.default_rng(seed)
        for key in sorted(curves):
            curve = curves[key]
            curve.samples = [
                TTSample(s.slowness, s.offset, s.time + rng.normal(0.0, noise))
                for s in curve.samples
            ]
    return curves


def primary_reflection_label(mode: WaveMode, reflector: int | str) -> str:
    """Label of the same-mode primary reflected at interface ``reflector``
    (1-based) or at the slab bottom (reflector "B")."""
    m = mode.value
    if reflector == "B":
        raise ValueError("use primary_bottom_label for the bottom reflector")
    down = "".join(f"-T{i}{m}" for i in range(1, int(reflector)))
    up = "".join(f"-T{i}{m}" for i in range(int(reflector) - 1, 0, -1))
    return f"{m}{down}-R{reflector}{m}{up}"


def primary_bottom_label(mode: WaveMode, n_interfaces: int) -> str:
    m = mode.value
    down = "".join(f"-T{i}{m}" for i in range(1, n_interfaces + 1))
    up = "".join(f"-T{i}{m}" for i in range(n_interfaces, 0, -1))
    return f"{m}{down}-RB{m}{up}"


@dataclass
class LayerFit:
    """One stripped layer: speed, thickness, and the fit diagnostics."""

    speed: float
    thickness: float
    residual: float
    n_samples: int


def _strip_layer(curve: TravelTimeCurve, overburden: list[LayerFit]) -> LayerFit:
    """Fit (c, h) of the deepest leg of a primary reflection branch.

    Subtracts the delay contributions of the known overburden and fits
    (g/2)^2 = h^2/c^2 - h^2 p^2 by least squares.
    """
    p = curve.slownesses
    tau = curve.delays
    mask = np.ones_like(p, dtype=bool)
    for lf in overburden:
        mask &= p < 1.0 / lf.speed
    p = p[mask]
    tau = tau[mask]
    if len(p) < 4:
        raise InsufficientCoverage(
            f"branch {curve.branch}: {len(p)} usable samples")
    g = tau.copy()
    for lf in overburden:
        g -= 2.0 * lf.thickness * np.sqrt(1.0 / lf.speed ** 2 - p ** 2)
    y = (g / 2.0) ** 2
    a = np.column_stack([np.ones_like(p), p ** 2])
    coef, res, _, _ = np.linalg.lstsq(a, y, rcond=None)
    intercept, slope = coef
    if slope >= 0.0 or intercept <= 0.0:
        raise NonMonotone(
            f"branch {curve.branch}: delay curve inconsistent with a "
            "positive-thickness constant layer")
    h = math.sqrt(-slope)
    c = h / math.sqrt(intercept)
    residual = float(np.sqrt(res[0] / len(p))) if len(res) else 0.0
    return LayerFit(speed=c, thickness=h, residual=residual, n_samples=len(p))


def strip_constant_stack(curves: dict[tuple[str, str], TravelTimeCurve],
                         mode: WaveMode, reflectors: list[int | str],
                         n_interfaces: int,
                         sensitivity: float = DEFAULT_SENSITIVITY
                         ) -> list[LayerFit]:
    """Strip layer by layer along one mode chain.

    ``reflectors`` lists the bounding reflector of each successive layer
    (interface number or "B").  Stops with InsufficientCoverage when a
    needed branch is absent or below the amplitude sensitivity.
    """
    fits: list[LayerFit] = []
    for reflector in reflectors:
        label = (primary_bottom_label(mode, n_interfaces) if reflector == "B"
                 else primary_reflection_label(mode, reflector))
        curve = curves.get((mode.value, label))
        if curve is None:
            raise InsufficientCoverage(f"no branch {label} in the curve set")
        if not math.isnan(curve.peak_amplitude) and \
                curve.peak_amplitude < sensitivity:
            raise InsufficientCoverage(
                f"branch {label} below amplitude sensitivity")
        fits.append(_strip_layer(curve, fits))
    return fits


@dataclass(frozen=True)
class InterfaceEstimate:
    depth: float
    confidence: float      # rms fit residual of the bounding branches
    reflector: int | str


def detect_interfaces(curves: dict[tuple[str, str], TravelTimeCurve],
                      sensitivity: float = DEFAULT_SENSITIVITY
                      ) -> list[InterfaceEstimate]:
    """Interface depths from the primary-reflection branch structure.

    Runs the constant-stack stripping recursion on whichever mode chains are
    present and averages the cumulative depths.  Branches below the
    amplitude sensitivity are ignored; if no usable reflection branch
    remains, raises NoKinkFound.
    """
    per_reflector: dict[int, list[tuple[float, float]]] = {}
    n_interfaces = 0
    for mode_label, branch in curves:
        if "-R" in branch:
            for part in branch.split("-"):
                if part.startswith("T") or part.startswith("R"):
                    tag = part[1:-len(mode_label)]
                    if tag.isdigit():
                        n_interfaces = max(n_interfaces, int(tag))
    found_any = False
    for mode in (WaveMode.SH, WaveMode.P, WaveMode.SV):
        for j in range(1, n_interfaces + 1):
            try:
                fits = strip_constant_stack(curves, mode, list(range(1, j + 1)),
                                            n_interfaces, sensitivity)
            except (InsufficientCoverage, NonMonotone):
                continue
            found_any = True
            depth = sum(f.thickness for f in fits)
            per_reflector.setdefault(j, []).append((depth, fits[-1].residual))
    if not found_any:
        raise NoKinkFound("no reflection branch above the sensitivity floor")
    estimates = []
    for j in sorted(per_reflector):
        entries = per_reflector[j]
        depth = sum(d for d, _ in entries) / len(entries)
        conf = math.sqrt(sum(r * r for _, r in entries) / len(entries))
        estimates.append(InterfaceEstimate(depth=depth, confidence=conf,
                                           reflector=j))
    return estimates


@dataclass(frozen=True)
class SpeedProfile:
    """c(z) on a depth grid, shallow to deep."""

    depths: np.ndarray
    speeds: np.ndarray
    mode: WaveMode


def herglotz_invert(curve: TravelTimeCurve) -> SpeedProfile:
    """Abel inversion of a turning-ray branch: c(z) down to the deepest
    covered turning point.

    Requires offsets strictly increasing as slowness decreases (monotone
    turning coverage) and nonincreasing delay times; violations raise
    NonMonotone.
    """
    samples = sorted(curve.samples, key=lambda s: s.offset)
    x = np.array([s.offset for s in samples])
    p = np.array([s.slowness for s in samples])
    tau = np.array([s.delay for s in samples])
    if len(x) < 4:
        raise InsufficientCoverage(f"{len(x)} turning samples")
    if not (np.diff(x) > 0).all() or not (np.diff(p) < 0).all():
        raise NonMonotone("offset must increase as take-off slowness falls")
    if (np.diff(tau) > 1e-9 * max(tau.max(), 1.0)).any():
        raise NonMonotone("delay time increases along the branch")

    # integrate from X = 0 with the shallowest ray's slowness as the surface value
    xg = np.concatenate([[0.0], x])
    pg = np.concatenate([[p[0]], p])
    depths = []
    speeds = []
    for k in range(1, len(pg)):
        u = pg[k]
        f = np.arccosh(np.maximum(pg[: k + 1] / u, 1.0))
        z = np.trapz(f[: k + 1], xg[: k + 1]) / math.pi
        depths.append(z)
        speeds.append(1.0 / u)
    return SpeedProfile(depths=np.array(depths), speeds=np.array(speeds),
                        mode=curve.mode)


# ----------------------------------------------------------------------
# assumption checking


@dataclass(frozen=True)
class ConditionMargin:
    holds: bool
    margin: float


@dataclass(frozen=True)
class InterfaceAssumptions:
    index: int                 # 1-based interface number
    depth: float
    shear_jump_up: ConditionMargin            # cs+ < cs-      ("G3")
    comp_jump_up: ConditionMargin             # cp+ < cp-      ("G6")
    ordering_nested: ConditionMargin          # cs+<cs-<cp+<cp- ("G8")
    ordering_separated: ConditionMargin       # cs+<cp+<cs-<cp- ("G9")
    conversion_open: ConditionMargin          # cs+ < cp-      ("G10")
    degenerate_cs_cp: float    # |cs- - cp+|; ~0 is the excluded equality


@dataclass(frozen=True)
class AssumptionReport:
    monotone: bool
    interfaces: list[InterfaceAssumptions]
    rho_recovery_margin: list[float]   # per layer: min |cp - 2 cs|

    def condition(self, index: int, name: str) -> ConditionMargin:
        entry = self.interfaces[index]
        return {
            "shear_jump_up": entry.shear_jump_up,
            "comp_jump_up": entry.comp_jump_up,
            "ordering_nested": entry.ordering_nested,
            "ordering_separated": entry.ordering_separated,
            "conversion_open": entry.conversion_open,
        }[name]


def _chain_margin(*gaps: float) -> ConditionMargin:
    margin = min(gaps)
    return ConditionMargin(holds=margin > 0.0, margin=margin)


def check_assumptions(model: LayeredModel) -> AssumptionReport:
    """Evaluate every recovery hypothesis of the model with its margin."""
    entries = []
    for j, itf in enumerate(model.interfaces):
        up = model.layers[itf.above]
        lo = model.layers[itf.below]
        cs_u, cp_u = material_speeds(up, itf.depth)
        cs_l, cp_l = material_speeds(lo, itf.depth)
        entries.append(InterfaceAssumptions(
            index=j + 1,
            depth=itf.depth,
            shear_jump_up=_chain_margin(cs_l - cs_u),
            comp_jump_up=_chain_margin(cp_l - cp_u),
            ordering_nested=_chain_margin(cs_l - cs_u, cp_u - cs_l, cp_l - cp_u),
            ordering_separated=_chain_margin(cp_u - cs_u, cs_l - cp_u, cp_l - cs_l),
            conversion_open=_chain_margin(cp_l - cs_u),
            degenerate_cs_cp=abs(cs_l - cp_u),
        ))
    rho_margins = []
    for j, m in enumerate(model.layers):
        top, bot = model.layer_bounds(j)
        margins = []
        for z in np.linspace(top, bot, 9):
            cs, cp = material_speeds(m, z)
            margins.append(abs(cp - 2.0 * cs))
        rho_margins.append(min(margins))
    return AssumptionReport(monotone=model.monotone, interfaces=entries,
                            rho_recovery_margin=rho_margins)


# ----------------------------------------------------------------------
# layer stripping


@dataclass
class RecoveredLayer:
    index: int                       # 0-based layer index
    cs: float | None = None
    cp: float | None = None
    cs_profile: SpeedProfile | None = None
    cp_profile: SpeedProfile | None = None
    thickness: float | None = None
    refusals: dict[str, str] = field(default_factory=dict)  # speed -> condition
    residuals: dict[str, float] = field(default_factory=dict)


@dataclass
class RecoveredProfile:
    layers: list[RecoveredLayer]
    interface_depths: list[float]          # recovered, cumulative
    report: AssumptionReport
    depth_errors: list[float] = field(default_factory=list)
    speed_errors: dict[str, list[float]] = field(default_factory=dict)

    def rms_speed_error(self, which: str) -> float:
        errs = [e for e in self.speed_errors.get(which, []) if not math.isnan(e)]
        if not errs:
            return math.nan
        return math.sqrt(sum(e * e for e in errs) / len(errs))


def _truth_speeds(model: LayeredModel, j: int) -> tuple[float, float]:
    top, bot = model.layer_bounds(j)
    return material_speeds(model.layers[j], 0.5 * (top + bot))


def layer_strip(model_truth: LayeredModel,
                data: dict[tuple[str, str], TravelTimeCurve],
                sensitivity: float = DEFAULT_SENSITIVITY) -> RecoveredProfile:
    """Recover layer speeds and interface depths from synthesized curves.

    The truth model supplies only the hypothesis gates (jump conditions and
    the monotone surrogate) and the error metrics; every recovered number
    comes from the travel-time curves.  The shear chain of layer j requires
    the shear jump-up condition at every interface above it, and the
    compressional chain additionally requires the compressional jump-up
    condition (matching the hypothesis structure of the uniqueness
    statements); failing layers carry named refusals.
    """
    report = check_assumptions(model_truth)
    if not report.monotone:
        raise AssumptionViolated(
            "foliation", "speeds must be nondecreasing with depth")

    n_itf = len(model_truth.interfaces)
    reflectors: list[int | str] = list(range(1, n_itf + 1))
    if model_truth.bottom == "free":
        reflectors.append("B")

    layers = [RecoveredLayer(index=j) for j in range(model_truth.n_layers)]
    top_material = model_truth.layers[0]

    chains = {"cs": (WaveMode.SH, ["shear_jump_up"]),
              "cp": (WaveMode.P, ["shear_jump_up", "comp_jump_up"])}
    chain_fits: dict[str, list[LayerFit]] = {"cs": [], "cp": []}

    if not top_material.is_constant:
        for which, (mode, _) in chains.items():
            curve = data.get((mode.value, mode.value))
            if curve is None:
                layers[0].refusals[which] = "InsufficientCoverage"
                continue
            profile = herglotz_invert(curve)
            if which == "cs":
                layers[0].cs_profile = profile
            else:
                layers[0].cp_profile = profile
        for j in range(1, model_truth.n_layers):
            layers[j].refusals["cs"] = "InsufficientCoverage"
            layers[j].refusals["cp"] = "InsufficientCoverage"
    else:
        for which, (mode, conditions) in chains.items():
            for j in range(model_truth.n_layers):
                if j >= len(reflectors):
                    layers[j].refusals[which] = "InsufficientCoverage"
                    continue
                gates_ok = True
                for i in range(j):  # interfaces crossed above layer j
                    for cond in conditions:
                        if not report.condition(i, cond).holds:
                            layers[j].refusals[which] = cond
                            gates_ok = False
                if not gates_ok:
                    continue
                try:
                    fits = strip_constant_stack(
                        data, mode, reflectors[: j + 1], n_itf, sensitivity)
                except (InsufficientCoverage, NonMonotone) as exc:
                    layers[j].refusals[which] = type(exc).__name__
                    continue
                fit = fits[j]
                if which == "cs":
                    layers[j].cs = fit.speed
                else:
                    layers[j].cp = fit.speed
                layers[j].residuals[which] = fit.residual
                if len(fits) > len(chain_fits[which]):
                    chain_fits[which] = fits

    # interface depths: average the chains that reached each interface
    depths = []
    for j in range(n_itf):
        vals = []
        for fits in chain_fits.values():
            if len(fits) > j:
                vals.append(sum(f.thickness for f in fits[: j + 1]))
        depths.append(sum(vals) / len(vals) if vals else math.nan)
    for j, layer in enumerate(layers):
        for fits in chain_fits.values():
            if len(fits) > j:
                layer.thickness = fits[j].thickness

    # error metrics against the supplied truth
    depth_errors = []
    for j, itf in enumerate(model_truth.interfaces):
        d = depths[j]
        depth_errors.append(abs(d - itf.depth) / itf.depth
                            if not math.isnan(d) else math.nan)
    speed_errors: dict[str, list[float]] = {"cs": [], "cp": []}
    for j, layer in enumerate(layers):
        cs_true, cp_true = _truth_speeds(model_truth, j)
        speed_errors["cs"].append(
            abs(layer.cs - cs_true) / cs_true if layer.cs is not None else math.nan)
        speed_errors["cp"].append(
            abs(layer.cp - cp_true) / cp_true if layer.cp is not None else math.nan)

    return RecoveredProfile(layers=layers, interface_depths=depths,
                            report=report, depth_errors=depth_errors,
                            speed_errors=speed_errors)
