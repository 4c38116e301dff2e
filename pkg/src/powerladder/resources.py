"""Natural-resource cost-supply curves.

A curve is a continuous piecewise-linear C(N): grade ``k`` starts at
cumulative quantity ``breaks[k]`` with unit cost ``costs[k]`` and its cost
rises linearly to ``costs[k + 1]`` across the grade; the last grade (the
cap) is flat. ``breaks[-1]`` is the technical potential. Stock resources
are measured in GJ and their ``used`` counter accumulates extraction. Flow resources are measured in GWh/y of
primary flow and ``used`` is the flow occupied right now.

Unit costs are $/GJ for stocks and $/MWh of flow for flows. Resource data
files (TOML)::

    format_version = 1

    [[resource]]
    id = "hydro"
    kind = "Flow"
    grades = [[2.0, 1.5e6], [6.0, 5e5], ...]   # (unit_cost, quantity) bins
    low = [[...]]                               # optional 95% band
    high = [[...]]
    cap_multiplier = 100.0                      # optional divergence tail
    tail_fraction = 0.01
    tail_steps = 32
    band = 0.2                                  # or a relative band instead
"""

from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError, ResourceExhaustedError

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

FORMAT_VERSION = 1
DEFAULT_CAP_MULTIPLIER = 100.0
DEFAULT_TAIL_FRACTION = 0.01
DEFAULT_TAIL_STEPS = 32
Z95 = 1.959963984540054


class ResourceKind(str, enum.Enum):
    STOCK = "Stock"
    FLOW = "Flow"


@dataclass(frozen=True)
class CostSupplyCurve:
    kind: ResourceKind
    breaks: tuple[float, ...]
    costs: tuple[float, ...]
    used: float = 0.0
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "kind", ResourceKind(self.kind))
        object.__setattr__(self, "breaks", tuple(float(b) for b in self.breaks))
        object.__setattr__(self, "costs", tuple(float(c) for c in self.costs))
        if len(self.costs) == 0 or len(self.breaks) != len(self.costs) + 1:
            raise DataError(f"curve {self.name!r}: need one break more than grades")
        if self.breaks[0] != 0.0:
            raise DataError(f"curve {self.name!r}: first break must be 0")
        if any(b1 < b0 for b0, b1 in zip(self.breaks, self.breaks[1:])):
            raise DataError(f"curve {self.name!r}: breaks must be non-decreasing")
        if any(c1 <= c0 for c0, c1 in zip(self.costs, self.costs[1:])):
            raise DataError(f"curve {self.name!r}: unit costs must be strictly increasing")
        if not all(math.isfinite(c) for c in self.costs):
            raise DataError(f"curve {self.name!r}: unit costs must be finite")
        if not self.technical_potential > 0:
            raise DataError(f"curve {self.name!r}: technical potential must be > 0")
        if not 0 <= self.used <= self.technical_potential:
            raise DataError(f"curve {self.name!r}: used must lie in [0, potential]")

    @property
    def technical_potential(self) -> float:
        return self.breaks[-1]

    @property
    def remaining(self) -> float:
        return self.technical_potential - self.used

    def cost_at(self, quantity: float) -> float:
        """C(N) without the exhaustion check; past the potential the last grade."""
        last = len(self.costs) - 1
        k = min(max(bisect.bisect_right(self.breaks, quantity) - 1, 0), last)
        if k == last:
            return self.costs[last]
        lo, hi = self.breaks[k], self.breaks[k + 1]
        w = (quantity - lo) / (hi - lo)
        return self.costs[k] + w * (self.costs[k + 1] - self.costs[k])


def build_curve(density: Sequence[tuple[float, float]], kind=ResourceKind.STOCK,
                name: str = "", used: float = 0.0) -> CostSupplyCurve:
    """Cumulate a cost-ranked density of (cost_bin, quantity) into C(N)."""
    if len(density) == 0:
        raise DataError(f"curve {name!r}: empty density")
    costs = [float(c) for c, _ in density]
    quantities = [float(q) for _, q in density]
    if any(c1 <= c0 for c0, c1 in zip(costs, costs[1:])):
        raise DataError(f"curve {name!r}: cost bins must be sorted and distinct")
    if any(q < 0 or not math.isfinite(q) for q in quantities):
        raise DataError(f"curve {name!r}: quantities must be finite and >= 0")
    breaks = [0.0]
    for q in quantities:
        breaks.append(breaks[-1] + q)
    return CostSupplyCurve(kind, tuple(breaks), tuple(costs), used, name)


def with_tail(density, cap_multiplier=DEFAULT_CAP_MULTIPLIER, tail_fraction=DEFAULT_TAIL_FRACTION,
              steps: int = DEFAULT_TAIL_STEPS):
    """Append the divergence tail holding ``tail_fraction`` of the total.

    The tail is a geometric ramp of ``steps`` grades from the dearest grade up
    to the cap (``cap_multiplier`` times the cheapest grade), so costs climb
    progressively as the potential is approached.
    """
    density = [(float(c), float(q)) for c, q in density]
    if not density or tail_fraction <= 0:
        return density
    if steps < 1:
        raise DataError("tail needs at least one grade")
    total = sum(q for _, q in density)
    last = density[-1][0]
    cap = max(cap_multiplier * density[0][0], last * (1 + 1e-9) + 1e-9)
    size = tail_fraction * total / steps
    if last > 0:
        ramp = [last * (cap / last) ** (k / steps) for k in range(1, steps + 1)]
    else:
        ramp = [cap * k / steps for k in range(1, steps + 1)]
    ramp[-1] = cap
    return density + [(c, size) for c in ramp]


def marginal_cost(curve: CostSupplyCurve, at: float) -> float:
    """Cost of the next unit after ``at`` units are exploited."""
    if at < 0:
        raise ValueError("quantity must be >= 0")
    if at >= curve.technical_potential:
        raise ResourceExhaustedError(curve.name or "resource", at, curve.technical_potential)
    return curve.cost_at(at)


def consume(curve: CostSupplyCurve, amount: float, duration: float = 1.0) -> CostSupplyCurve:
    """Record resource use over ``duration`` years.

    Stock: extraction ``amount`` (GJ/y) accumulates. Flow: ``amount`` is the
    flow now occupied (GWh/y), so shrinking capacity releases sites.
    """
    if amount < 0:
        raise ValueError("amount must be >= 0")
    if curve.kind is ResourceKind.STOCK:
        used = curve.used + amount * duration
    else:
        used = amount
    if used > curve.technical_potential:
        raise ResourceExhaustedError(curve.name or "resource", used, curve.technical_potential)
    return replace(curve, used=used)


@dataclass(frozen=True)
class CurveDistribution:
    """Low / most-probable / high cost-supply curves bounding a 95% region."""

    low: CostSupplyCurve
    central: CostSupplyCurve
    high: CostSupplyCurve

    def __post_init__(self):
        if not self.low.kind == self.central.kind == self.high.kind:
            raise DataError("distribution curves must share a kind")
        for q in self.grid():
            lo, mid, hi = (_cost_or_inf(c, q) for c in (self.low, self.central, self.high))
            if not lo <= mid <= hi:
                raise DataError(
                    f"distribution {self.central.name!r}: curves cross at quantity {q:g}"
                )

    def grid(self) -> list[float]:
        qs = set(self.low.breaks) | set(self.central.breaks) | set(self.high.breaks)
        return sorted(qs)

    @classmethod
    def degenerate(cls, curve: CostSupplyCurve) -> "CurveDistribution":
        return cls(curve, curve, curve)


def _cost_or_inf(curve, q):
    return math.inf if q >= curve.technical_potential else curve.cost_at(q)


def _band_value(z, low, central, high):
    if z >= 0:
        return central + (z / Z95) * (high - central)
    return central + (z / Z95) * (central - low)


def sample_curve(dist: CurveDistribution, seed, correlation: float = 0.9) -> CostSupplyCurve:
    """Draw one deterministic curve from a distribution.

    Each grade of the merged quantity grid gets a normal factor, correlated
    along the curve and truncated to the 95% band, that places its cost
    between the low and high curves. The potential gets its own factor.
    Grades that would break monotonicity merge into their predecessor, so
    sampled costs always stay within [low, high].
    """
    rng = np.random.default_rng(seed)
    central = dist.central
    pot_z = float(np.clip(rng.standard_normal(), -Z95, Z95))
    # more expensive world (z > 0) has the smaller potential
    potential = _band_value(
        -pot_z, dist.high.technical_potential, central.technical_potential,
        dist.low.technical_potential,
    )
    grid = [q for q in dist.grid() if q < potential] + [potential]
    breaks, costs = [0.0], []
    z = 0.0
    innovation = math.sqrt(1.0 - correlation ** 2)
    for k, (q0, q1) in enumerate(zip(grid, grid[1:])):
        eps = rng.standard_normal()
        z = eps if k == 0 else correlation * z + innovation * eps
        zc = min(max(z, -Z95), Z95)
        cost = _band_value(
            zc, dist.low.cost_at(q0), central.cost_at(q0), dist.high.cost_at(q0)
        )
        if costs and cost <= costs[-1]:
            breaks[-1] = q1
            continue
        costs.append(cost)
        breaks.append(q1)
    used = min(central.used, potential)
    return CostSupplyCurve(central.kind, tuple(breaks), tuple(costs), used, central.name)


@dataclass(frozen=True)
class ResourceSet:
    """Deterministic curves plus their distributions, keyed by resource id."""

    curves: dict = field(default_factory=dict)
    distributions: dict = field(default_factory=dict)

    def ids(self):
        return sorted(self.curves)

    def sampled(self, seed: int) -> "ResourceSet":
        curves = {}
        for k, rid in enumerate(self.ids()):
            dist = self.distributions.get(rid)
            curves[rid] = self.curves[rid] if dist is None else sample_curve(dist, [seed, k])
        return ResourceSet(curves, self.distributions)

    def banded(self, relative: float, ids=None) -> "ResourceSet":
        """Replace distributions of ``ids`` by symmetric relative bands."""
        dists = dict(self.distributions)
        for rid in ids or self.ids():
            dists[rid] = relative_band(self.curves[rid], relative)
        return ResourceSet(self.curves, dists)


def relative_band(curve: CostSupplyCurve, relative: float) -> CurveDistribution:
    """Distribution whose low/high curves scale costs by (1 -/+ relative)
    and quantities by (1 +/- relative)."""
    if not 0 <= relative < 1:
        raise ValueError("relative band must lie in [0, 1)")
    if relative == 0:
        return CurveDistribution.degenerate(curve)

    def scaled(cost_factor, quantity_factor):
        return replace(
            curve,
            breaks=tuple(b * quantity_factor for b in curve.breaks),
            costs=tuple(c * cost_factor for c in curve.costs),
            used=min(curve.used, curve.technical_potential * quantity_factor),
        )

    return CurveDistribution(
        scaled(1 - relative, 1 + relative), curve, scaled(1 + relative, 1 - relative)
    )


def _curve_from_entry(entry, key, kind, name):
    grades = entry[key]
    if not isinstance(grades, list) or not all(len(g) == 2 for g in grades):
        raise DataError(f"resource {name!r}: {key} must be a list of [cost, quantity]")
    tail = with_tail(
        grades,
        float(entry.get("cap_multiplier", DEFAULT_CAP_MULTIPLIER)),
        float(entry.get("tail_fraction", DEFAULT_TAIL_FRACTION)),
        int(entry.get("tail_steps", DEFAULT_TAIL_STEPS)),
    )
    return build_curve(tail, kind, name)


def load_resources(source: str) -> ResourceSet:
    try:
        doc = tomllib.loads(source)
    except tomllib.TOMLDecodeError as exc:
        raise DataError(f"resource data does not parse: {exc}") from None
    if doc.get("format_version") != FORMAT_VERSION:
        raise DataError(f"unsupported resource format_version {doc.get('format_version')!r}")
    curves, dists = {}, {}
    allowed = {"id", "kind", "name", "grades", "low", "high", "cap_multiplier",
               "tail_fraction", "tail_steps", "initial_used", "band"}
    for entry in doc.get("resource", []):
        rid = entry.get("id")
        if not rid:
            raise DataError("resource without id")
        if rid in curves:
            raise DataError(f"resource {rid!r}: duplicate id")
        unknown = set(entry) - allowed
        if unknown:
            raise DataError(f"resource {rid!r}: unknown field(s) {sorted(unknown)}")
        try:
            kind = ResourceKind(entry.get("kind"))
        except ValueError:
            raise DataError(f"resource {rid!r}: kind must be Stock or Flow") from None
        central = _curve_from_entry(entry, "grades", kind, rid)
        central = replace(central, used=float(entry.get("initial_used", 0.0)))
        curves[rid] = central
        if "band" in entry and ("low" in entry or "high" in entry):
            raise DataError(f"resource {rid!r}: give either band or low/high, not both")
        if "band" in entry:
            try:
                dists[rid] = relative_band(central, float(entry["band"]))
            except ValueError as exc:
                raise DataError(f"resource {rid!r}: {exc}") from None
        elif "low" in entry or "high" in entry:
            low = _curve_from_entry(entry, "low", kind, rid) if "low" in entry else central
            high = _curve_from_entry(entry, "high", kind, rid) if "high" in entry else central
            dists[rid] = CurveDistribution(low, central, high)
    if not curves:
        raise DataError("no resources")
    return ResourceSet(curves, dists)


def read_resources(path: str | Path) -> ResourceSet:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read resource data {path}: {exc}") from None
    try:
        return load_resources(text)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None
