"""Materials, layers and the flat layered model.

Geometry is a 2-D vertical section: x horizontal, z depth, z = 0 at the outer
(recording) surface and z increasing downward.  Interfaces are horizontal
lines at strictly increasing depths; layer j occupies the band between
interface j-1 and interface j (layer 1 touches the surface).  The model
bottom sits at z = height and is either transparent (rays exit, half-space
style) or a traction-free surface (finite slab).

Each layer is isotropic with density rho and Lame parameters lam, mu, or
equivalently (rho, cs, cp) with

    cs = sqrt(mu / rho),   cp = sqrt((lam + 2 mu) / rho),   0 < cs < cp.

A layer may carry linear depth profiles cs(z), cp(z) (constant rho); only
kinematics is tracked through such layers.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import InvalidMaterial, NoJump, NonIncreasingDepths, OutOfDomain


class WaveMode(enum.Enum):
    """P (compressional), SV and SH (shear) wave families.

    SH never couples to P/SV in any operation of this package: the two
    families are assembled and solved as separate blocks everywhere.
    """

    P = "P"
    SV = "SV"
    SH = "SH"

    @property
    def is_shear(self) -> bool:
        return self is not WaveMode.P


@dataclass(frozen=True)
class Material:
    """One isotropic layer: density, Lame parameters, optional speed gradients.

    ``cs_gradient``/``cp_gradient`` are d(speed)/d(depth) inside the layer,
    with ``cs``/``cp`` themselves the values at the layer top (``z_ref``).
    """

    rho: float
    lam: float
    mu: float
    cs_gradient: float = 0.0
    cp_gradient: float = 0.0
    z_ref: float = 0.0

    def __post_init__(self):
        if not (self.rho > 0.0):
            raise InvalidMaterial(f"rho must be positive, got {self.rho}")
        if not (self.mu > 0.0):
            raise InvalidMaterial(f"mu must be positive, got {self.mu}")
        if not (self.lam + 2.0 * self.mu > 0.0):
            raise InvalidMaterial(
                f"lam + 2*mu must be positive, got {self.lam + 2.0 * self.mu}"
            )
        object.__setattr__(self, "_cs", math.sqrt(self.mu / self.rho))
        object.__setattr__(
            self, "_cp", math.sqrt((self.lam + 2.0 * self.mu) / self.rho))

    @classmethod
    def from_speeds(cls, rho: float, cs: float, cp: float,
                    cs_gradient: float = 0.0, cp_gradient: float = 0.0,
                    z_ref: float = 0.0) -> "Material":
        if not (0.0 < cs < cp):
            raise InvalidMaterial(f"need 0 < cs < cp, got cs={cs}, cp={cp}")
        mu = rho * cs * cs
        lam = rho * cp * cp - 2.0 * mu
        return cls(rho, lam, mu, cs_gradient, cp_gradient, z_ref)

    @property
    def cs(self) -> float:
        return self._cs

    @property
    def cp(self) -> float:
        return self._cp

    @property
    def is_constant(self) -> bool:
        return self.cs_gradient == 0.0 and self.cp_gradient == 0.0

    def speed(self, mode: WaveMode, depth: float | None = None) -> float:
        """Pointwise speed of ``mode`` at ``depth`` (layer value if constant)."""
        base = self.cs if mode.is_shear else self.cp
        if depth is None or self.is_constant:
            return base
        grad = self.cs_gradient if mode.is_shear else self.cp_gradient
        c = base + grad * (depth - self.z_ref)
        if c <= 0.0:
            raise OutOfDomain(f"profile speed nonpositive at depth {depth}")
        return c

    def speed_coeffs(self, mode: WaveMode) -> tuple[float, float]:
        """(value at z=0, gradient) of the linear profile c(z) for ``mode``."""
        base = self.cs if mode.is_shear else self.cp
        grad = self.cs_gradient if mode.is_shear else self.cp_gradient
        return base - grad * self.z_ref, grad


def material_speeds(m: Material, depth: float | None = None) -> tuple[float, float]:
    """Return (cs, cp) of a material, at ``depth`` for gradient layers."""
    return m.speed(WaveMode.SV, depth), m.speed(WaveMode.P, depth)


@dataclass(frozen=True)
class Interface:
    """Horizontal interface: depth plus the indices of the adjacent layers."""

    depth: float
    above: int
    below: int


@dataclass(frozen=True)
class LayeredModel:
    """Ordered stack of layers (outermost first) with horizontal interfaces."""

    layers: tuple[Material, ...]
    interfaces: tuple[Interface, ...]
    height: float
    bottom: str = "transparent"  # or "free": traction-free slab bottom
    monotone: bool = field(default=False, compare=False)

    def layer_bounds(self, index: int) -> tuple[float, float]:
        """(top, bottom) depths of layer ``index`` (0-based)."""
        top = 0.0 if index == 0 else self.interfaces[index - 1].depth
        bot = self.height if index == len(self.interfaces) else self.interfaces[index].depth
        return top, bot

    def layer_at(self, depth: float) -> int:
        for j, itf in enumerate(self.interfaces):
            if depth < itf.depth:
                return j
        return len(self.interfaces)

    @property
    def n_layers(self) -> int:
        return len(self.layers)


def _monotone_flag(layers, interfaces, height) -> bool:
    """Speeds nondecreasing with depth across and within every layer.

    Flat-geometry surrogate of the convex-foliation requirement: within a
    layer the gradients must be >= 0, and at every interface both speeds must
    not decrease downward.
    """
    for m in layers:
        if m.cs_gradient < 0.0 or m.cp_gradient < 0.0:
            return False
    for j, itf in enumerate(interfaces):
        up, lo = layers[j], layers[j + 1]
        cs_up, cp_up = material_speeds(up, itf.depth)
        cs_lo, cp_lo = material_speeds(lo, itf.depth)
        if cs_lo < cs_up or cp_lo < cp_up:
            return False
    return True


def _material_from_config(entry: dict, z_top: float) -> Material:
    if "cs" in entry or "cp" in entry:
        return Material.from_speeds(
            rho=float(entry["rho"]),
            cs=float(entry["cs"]),
            cp=float(entry["cp"]),
            cs_gradient=float(entry.get("cs_gradient", 0.0)),
            cp_gradient=float(entry.get("cp_gradient", 0.0)),
            z_ref=z_top,
        )
    return Material(rho=float(entry["rho"]), lam=float(entry["lam"]),
                    mu=float(entry["mu"]))


def build_model(config: dict) -> LayeredModel:
    """Build and validate a LayeredModel from a configuration tree.

    Expected keys::

        layers:     [{rho, lam, mu} | {rho, cs, cp, cs_gradient?, cp_gradient?}]
        interfaces: [{depth}, ...]          # one fewer than layers
        height:     float                   # bottom of the section, > last depth
        bottom:     "transparent" | "free"  # optional, default transparent
    """
    layer_entries = config.get("layers", [])
    if not layer_entries:
        raise InvalidMaterial("config lists no layers")
    itf_entries = config.get("interfaces", [])
    if len(itf_entries) != len(layer_entries) - 1:
        raise NonIncreasingDepths(
            f"{len(layer_entries)} layers need {len(layer_entries) - 1} "
            f"interfaces, got {len(itf_entries)}"
        )

    depths = [float(e["depth"]) for e in itf_entries]
    for a, b in zip(depths, depths[1:]):
        if not (a < b):
            raise NonIncreasingDepths(f"interface depths not increasing: {a} >= {b}")
    if depths and depths[0] <= 0.0:
        raise NonIncreasingDepths("first interface must lie below the surface")

    default_height = (depths[-1] * 1.5 if depths else 1.0)
    height = float(config.get("height", default_height))
    if depths and height <= depths[-1]:
        raise NonIncreasingDepths("height must exceed the deepest interface")

    tops = [0.0] + depths
    layers = tuple(_material_from_config(e, z)
                   for e, z in zip(layer_entries, tops))
    interfaces = tuple(Interface(depth=d, above=j, below=j + 1)
                       for j, d in enumerate(depths))

    for itf in interfaces:
        up, lo = layers[itf.above], layers[itf.below]
        same = (up.rho == lo.rho
                and material_speeds(up, itf.depth) == material_speeds(lo, itf.depth))
        if same:
            raise NoJump(f"no coefficient jumps across interface at depth {itf.depth}")

    bottom = str(config.get("bottom", "transparent"))
    if bottom not in ("transparent", "free"):
        raise OutOfDomain(f"unknown bottom kind {bottom!r}")

    return LayeredModel(
        layers=layers,
        interfaces=interfaces,
        height=height,
        bottom=bottom,
        monotone=_monotone_flag(layers, interfaces, height),
    )
