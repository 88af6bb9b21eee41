"""Ray trees through the layered section: kinematics plus event amplitudes.

A ray is a straight segment in constant layers and an integrated path in
gradient layers (fixed-step RK4 through c(z), turning points handled by the
integrator).  At every surface hit the ray branches: interfaces scatter
through ``coefficients.solve_interface``, the outer surface (z = 0) and a
"free" model bottom reflect through ``coefficients.solve_free_surface``, and
a transparent bottom absorbs.  Horizontal slowness p = sin(theta)/c is
conserved exactly across every event; the boundary covector of an event is
(tau, xi_t) = (-1, p).

Amplitudes are complex potential amplitudes and are tracked only while a
branch stays in constant layers; a branch entering a gradient layer becomes
kinematic-only (amplitude None) from that point on.  Evanescent channels
are never propagated: they appear as leaf stubs carrying their decay rate.

Arrivals are recorded whenever a branch reaches the outer surface; the
catalog row keeps (time, offset, mode, amplitude, branch label, take-off
slowness).  Branch labels chain event codes: "P-T1P-R2P-T1P" reads "P wave,
transmitted at interface 1, reflected at interface 2, transmitted back".
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace

from . import _core
from .coefficients import MINUS, PLUS, PotentialAmplitudes, ScatterResult, \
    solve_free_surface, solve_interface
from .errors import Glancing, GlancingProximity, Trapped
from .kinematics import BoundaryCovector, classify_side
from .model import LayeredModel, WaveMode

#: Channels with |cos(angle)| below this are terminated as glancing.
GLANCING_COS = 1e-4
#: RK4 steps per layer thickness in gradient layers.
STEPS_PER_THICKNESS = 1024
#: Path polyline keeps every n-th integration point.
RECORD_EVERY = 8

SURFACE = "surface"
BOTTOM = "bottom"


@dataclass(frozen=True)
class Ray:
    """One singularity-carrying branch segment start state."""

    start: tuple[float, float]      # (x, z)
    slowness: float                 # horizontal slowness p >= 0, conserved
    mode: WaveMode
    direction: str                  # "down" | "up"
    layer: int
    birth_time: float = 0.0
    amplitude: complex | None = 1.0  # None: kinematic-only branch

    def __post_init__(self):
        if self.slowness < 0.0:
            raise ValueError("slowness must be nonnegative")
        if self.direction not in ("down", "up"):
            raise ValueError(f"bad direction {self.direction!r}")


@dataclass(frozen=True)
class RayEvent:
    """Arrival of a segment at a bounding surface."""

    point: tuple[float, float]
    time: float
    surface: str                    # "surface", "bottom" or "interface:<j>"
    incident_angle: float
    case: str | None                # interface case / side region label
    polyline: tuple[tuple[float, float], ...]
    end_direction: str              # travel direction at the event


def interface_name(index: int) -> str:
    return f"interface:{index}"


@dataclass(frozen=True)
class StoppingPolicy:
    max_time: float = 10.0
    min_amp: float = 1e-6
    max_generations: int = 6

    def __post_init__(self):
        if self.max_time <= 0 or self.min_amp <= 0 or self.max_generations <= 0:
            raise ValueError("policy fields must be positive")


@dataclass
class RayNode:
    ray: Ray
    parent: int | None
    label: str
    generation: int
    event: RayEvent | None = None
    children: list[int] = field(default_factory=list)
    leaf: str | None = None   # exit/stub/cut marker; None for interior nodes
    decay: float | None = None


@dataclass
class Arrival:
    time: float
    offset: float
    mode: WaveMode
    amplitude: complex | None
    path: str
    slowness: float


@dataclass
class RayTree:
    model: LayeredModel
    policy: StoppingPolicy
    nodes: list[RayNode] = field(default_factory=list)
    arrivals: list[Arrival] = field(default_factory=list)


def _vertical_slowness(c: float, p: float) -> float:
    """sqrt(1/c^2 - p^2); raises Glancing near or past the propagation cone."""
    arg = 1.0 / (c * c) - p * p
    if arg <= (GLANCING_COS / c) ** 2:
        raise Glancing(f"ray horizontal within tolerance at c={c}, p={p}")
    return math.sqrt(arg)


def trace_segment(model: LayeredModel, ray: Ray,
                  max_time: float = math.inf) -> RayEvent:
    """Trace one ray through its layer to the next bounding surface.

    Constant layers use the straight-segment closed form; gradient layers
    integrate the ray equations with a fixed RK4 step of layer thickness /
    1024 along the path (turning rays return to their entry surface).
    Raises Glancing on endpoint tangency and Trapped when ``max_time`` runs
    out before any surface is reached.
    """
    m = model.layers[ray.layer]
    z_top, z_bot = model.layer_bounds(ray.layer)
    x0, z0 = ray.start
    p = ray.slowness

    if m.is_constant:
        c = m.speed(ray.mode)
        q = _vertical_slowness(c, p)
        z_target = z_bot if ray.direction == "down" else z_top
        dz = abs(z_target - z0)
        length = dz / (q * c)
        t = length / c
        x1 = x0 + dz * p / q
        end_dir = ray.direction
        if ray.birth_time + t > max_time:
            raise Trapped("segment exceeds the time budget")
        poly = ((x0, z0), (x1, z_target))
        z_end = z_target
        c_end = c
        q_end = q
    else:
        c0, c1 = m.speed_coeffs(ray.mode)
        c_start = c0 + c1 * z0
        q = _vertical_slowness(c_start, p)
        xiz0 = q if ray.direction == "down" else -q
        c_lo = c0 + c1 * z_top
        c_hi = c0 + c1 * z_bot
        c_max = max(c_lo, c_hi)
        dt = (z_bot - z_top) / STEPS_PER_THICKNESS / c_max
        budget = max_time - ray.birth_time
        if budget <= 0.0:
            raise Trapped("no time budget left")
        max_steps = int(min(budget / dt + 2.0, 5e7))
        xs, zs, ts, x1, z_end, xiz_end, t, status = _core.trace_gradient_ray(
            x0, z0, p, xiz0, c0, c1, z_top, z_bot, dt, max_steps, RECORD_EVERY
        )
        if status != 0:
            raise Trapped("ray did not reach a surface within the time budget")
        poly = tuple(zip(xs, zs))
        c_end = c0 + c1 * z_end
        q_end = abs(xiz_end)
        end_dir = "down" if xiz_end > 0.0 else "up"
        if q_end * c_end < GLANCING_COS:
            raise Glancing("ray tangent to the surface at its endpoint")

    if z_end == z_top and ray.layer == 0:
        surface = SURFACE
    elif z_end == z_bot and ray.layer == model.n_layers - 1:
        surface = BOTTOM
    else:
        index = ray.layer - 1 if z_end == z_top else ray.layer
        surface = interface_name(index)

    sin_theta = min(p * c_end, 1.0)
    return RayEvent(
        point=(x1, z_end),
        time=ray.birth_time + t,
        surface=surface,
        incident_angle=math.asin(sin_theta),
        case=None,
        polyline=poly,
        end_direction=end_dir,
    )


@dataclass(frozen=True)
class Spawn:
    """One generated channel at an event, in canonical order."""

    kind: str                 # "ray" | "evanescent" | "glancing"
    mode: WaveMode
    role: str                 # "reflected" | "transmitted"
    ray: Ray | None = None
    amplitude: complex | None = None
    decay: float | None = None
    case: str | None = None


def _family(mode: WaveMode) -> tuple[WaveMode, ...]:
    if mode is WaveMode.SH:
        return (WaveMode.SH,)
    return (WaveMode.P, WaveMode.SV)


def _amp_of(amps: PotentialAmplitudes, mode: WaveMode) -> complex:
    if mode is WaveMode.P:
        return amps.p
    if mode is WaveMode.SV:
        return amps.sv
    return amps.sh


def _child_ray(ray: Ray, event: RayEvent, mode: WaveMode, layer: int,
               direction: str, amplitude: complex | None,
               kinematic: bool) -> Ray:
    return Ray(
        start=event.point,
        slowness=ray.slowness,
        mode=mode,
        direction=direction,
        layer=layer,
        birth_time=event.time,
        amplitude=None if kinematic else amplitude,
    )


def _spawn_channel(model: LayeredModel, ray: Ray, event: RayEvent,
                   mode: WaveMode, role: str, layer: int, direction: str,
                   result: ScatterResult, solver_side: str,
                   kinematic: bool, case: str) -> Spawn | None:
    """Build the Spawn for one (mode, side) channel of a solved event."""
    out_amp = _amp_of(result.outgoing[solver_side], mode)
    ev_amp = _amp_of(result.evanescent[solver_side], mode)
    decay = result.decay[solver_side].get(mode.value)
    if decay is not None:
        if not kinematic and ev_amp == 0:
            return None  # decoupled channel: nothing excited
        return Spawn(kind="evanescent", mode=mode, role=role,
                     amplitude=None if kinematic else ev_amp, decay=decay,
                     case=case)
    m_child = model.layers[layer]
    c_child = m_child.speed(mode, event.point[1])
    cos_theta = math.sqrt(max(1.0 - (ray.slowness * c_child) ** 2, 0.0))
    if cos_theta < GLANCING_COS:
        return Spawn(kind="glancing", mode=mode, role=role,
                     amplitude=None if kinematic else out_amp, case=case)
    child = _child_ray(ray, event, mode, layer, direction,
                       out_amp, kinematic)
    return Spawn(kind="ray", mode=mode, role=role, ray=child,
                 amplitude=None if kinematic else out_amp, case=case)


def branch_at_event(model: LayeredModel, event: RayEvent, ray: Ray
                    ) -> list[Spawn]:
    """Children generated by one event, in canonical order.

    Order: reflected P, reflected SV, transmitted P, transmitted SV,
    reflected SH, transmitted SH, with evanescent channels appearing as
    stub spawns in their slot.  Channels outside the parent's family (SH
    versus P-SV) are omitted: they carry exactly zero amplitude.
    """
    bc = BoundaryCovector(tau=-1.0, xi_t=ray.slowness)
    kinematic = ray.amplitude is None
    incident = PotentialAmplitudes(**{
        {"P": "p", "SV": "sv", "SH": "sh"}[ray.mode.value]:
        1.0 if kinematic else ray.amplitude
    })
    family = _family(ray.mode)

    if event.surface == BOTTOM and model.bottom == "transparent":
        return []

    if event.surface in (SURFACE, BOTTOM):
        m = model.layers[ray.layer]
        result = solve_free_surface(m, bc, incident)
        case = classify_side(m, bc).value
        back = "down" if event.surface == SURFACE else "up"
        spawns = []
        for mode in (WaveMode.P, WaveMode.SV, WaveMode.SH):
            if mode not in family:
                continue
            sp = _spawn_channel(model, ray, event, mode, "reflected",
                                ray.layer, back, result, PLUS, kinematic, case)
            if sp is not None:
                spawns.append(sp)
        return spawns

    index = int(event.surface.split(":", 1)[1])
    itf = model.interfaces[index]
    if ray.direction == "down":
        side_layer = {PLUS: itf.above, MINUS: itf.below}
        directions = {"reflected": "up", "transmitted": "down"}
    else:
        side_layer = {PLUS: itf.below, MINUS: itf.above}
        directions = {"reflected": "down", "transmitted": "up"}
    m_plus = model.layers[side_layer[PLUS]]
    m_minus = model.layers[side_layer[MINUS]]
    result = solve_interface(m_plus, m_minus, bc, incoming_plus=incident)
    case = result.case.label

    spawns = []
    for role, solver_side in (("reflected", PLUS), ("transmitted", MINUS)):
        for mode in (WaveMode.P, WaveMode.SV):
            if mode not in family:
                continue
            sp = _spawn_channel(model, ray, event, mode, role,
                                side_layer[solver_side], directions[role],
                                result, solver_side, kinematic, case)
            if sp is not None:
                spawns.append(sp)
    for role, solver_side in (("reflected", PLUS), ("transmitted", MINUS)):
        if WaveMode.SH not in family:
            continue
        sp = _spawn_channel(model, ray, event, WaveMode.SH, role,
                            side_layer[solver_side], directions[role],
                            result, solver_side, kinematic, case)
        if sp is not None:
            spawns.append(sp)
    return spawns


_EVENT_CODE = {SURFACE: "0", BOTTOM: "B"}


def _event_code(surface: str) -> str:
    if surface in _EVENT_CODE:
        return _EVENT_CODE[surface]
    return str(int(surface.split(":", 1)[1]) + 1)


def propagate_tree(model: LayeredModel, source: Ray,
                   policy: StoppingPolicy = StoppingPolicy()) -> RayTree:
    """Breadth-first expansion of the ray tree from one source ray.

    Deterministic: FIFO queue and canonical child ordering make the node
    numbering a pure function of the inputs.  Policy cuts, glancing
    terminations and evanescent stubs are recorded as leaf markers, never
    raised.
    """
    if not model.layers[source.layer].is_constant and source.amplitude is not None:
        source = replace(source, amplitude=None)
    tree = RayTree(model=model, policy=policy)
    tree.nodes.append(RayNode(ray=source, parent=None,
                              label=source.mode.value, generation=0))
    queue = deque([0])
    while queue:
        idx = queue.popleft()
        node = tree.nodes[idx]
        if node.leaf is not None:
            continue
        try:
            event = trace_segment(model, node.ray, max_time=policy.max_time)
        except Glancing:
            node.leaf = "glancing"
            continue
        except Trapped:
            node.leaf = "time_cut"
            continue
        node.event = event

        if event.surface == SURFACE:
            tree.arrivals.append(Arrival(
                time=event.time,
                offset=event.point[0],
                mode=node.ray.mode,
                amplitude=node.ray.amplitude,
                path=node.label,
                slowness=node.ray.slowness,
            ))
        if event.surface == BOTTOM and model.bottom == "transparent":
            node.leaf = "exit"
            continue
        if node.generation >= policy.max_generations:
            node.leaf = "generation_cut"
            continue
        try:
            spawns = branch_at_event(model, event, node.ray)
        except (Glancing, GlancingProximity):
            node.leaf = "glancing"
            continue

        code = _event_code(event.surface)
        for sp in spawns:
            label = f"{node.label}-{'R' if sp.role == 'reflected' else 'T'}" \
                    f"{code}{sp.mode.value}"
            if sp.kind == "evanescent":
                child = RayNode(
                    ray=Ray(start=event.point, slowness=node.ray.slowness,
                            mode=sp.mode, direction="down", layer=node.ray.layer,
                            birth_time=event.time, amplitude=sp.amplitude),
                    parent=idx, label=label, generation=node.generation + 1,
                    leaf="evanescent_stub", decay=sp.decay)
            elif sp.kind == "glancing":
                child = RayNode(
                    ray=Ray(start=event.point, slowness=node.ray.slowness,
                            mode=sp.mode, direction="down", layer=node.ray.layer,
                            birth_time=event.time, amplitude=sp.amplitude),
                    parent=idx, label=label, generation=node.generation + 1,
                    leaf="glancing")
            else:
                ray = sp.ray
                if not model.layers[ray.layer].is_constant and ray.amplitude is not None:
                    ray = replace(ray, amplitude=None)
                leaf = None
                if (ray.amplitude is not None
                        and abs(ray.amplitude) < policy.min_amp):
                    leaf = "amplitude_cut"
                child = RayNode(ray=ray, parent=idx, label=label,
                                generation=node.generation + 1, leaf=leaf)
            tree.nodes[idx].children.append(len(tree.nodes))
            tree.nodes.append(child)
            if child.leaf is None:
                queue.append(len(tree.nodes) - 1)
    return tree


def extract_arrivals(tree: RayTree) -> list[Arrival]:
    """Arrival catalog sorted by (time, offset, path)."""
    return sorted(tree.arrivals, key=lambda a: (a.time, a.offset, a.path))


# ----------------------------------------------------------------------
# serialization


def _node_dict(tree: RayTree, idx: int) -> dict:
    node = tree.nodes[idx]
    amp = node.ray.amplitude
    d = {
        "mode": node.ray.mode.value,
        "label": node.label,
        "generation": node.generation,
        "slowness": node.ray.slowness,
        "birth_time": node.ray.birth_time,
        "amplitude": None if amp is None else [amp.real, amp.imag],
        "start": list(node.ray.start),
        "direction": node.ray.direction,
        "layer": node.ray.layer,
    }
    if node.event is not None:
        d["polyline"] = [list(pt) for pt in node.event.polyline]
        d["event"] = {
            "surface": node.event.surface,
            "time": node.event.time,
            "point": list(node.event.point),
            "incident_angle": node.event.incident_angle,
        }
    if node.leaf is not None:
        d["leaf"] = node.leaf
    if node.decay is not None:
        d["decay"] = node.decay
    if node.children:
        d["children"] = [_node_dict(tree, c) for c in node.children]
    return d


def tree_to_dict(tree: RayTree) -> dict:
    """Hierarchical document of the tree (JSON-ready)."""
    return {
        "policy": {
            "max_time": tree.policy.max_time,
            "min_amp": tree.policy.min_amp,
            "max_generations": tree.policy.max_generations,
        },
        "n_nodes": len(tree.nodes),
        "root": _node_dict(tree, 0),
    }


ARRIVAL_COLUMNS = ("time", "offset", "mode", "amp_re", "amp_im", "path")


def arrivals_rows(arrivals: list[Arrival]) -> list[tuple]:
    rows = []
    for a in arrivals:
        amp = a.amplitude if a.amplitude is not None else complex(float("nan"))
        rows.append((a.time, a.offset, a.mode.value, amp.real, amp.imag, a.path))
    return rows
