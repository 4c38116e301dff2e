"""Scenario configuration, the simulation loop, ensembles and output files.

Each step of :func:`run` goes: resource marginal costs, LCOE per technology,
share limits and gates, shares step, accounting, learning, resource use.
Config files are TOML (``.cfg``); see the README for the full schema.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from . import accounting, costs, dynamics, kernels
from .errors import ConfigError, DataError, PowerLadderError, SimulationError
from .errors import ResourceExhaustedError
from .resources import ResourceKind, ResourceSet, consume, marginal_cost, read_resources
from .techdata import (TechnologyRegistry, default_data_dir, default_spillover,
                       read_registry)

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

FORMAT_VERSION = 1
FUEL_PRICE_MODES = ("table", "curve", "max")
EXHAUSTION_POLICIES = ("halt", "cap")
CSV_COLUMNS = ["year", "tech_id", "share", "capacity_GW", "generation_GWh",
               "investment", "lcoe", "emissions_rate"]
CONSTRAINT_NAMES = ("flexible_energy", "flexible_capacity", "baseload_ceiling")
SHARE_TOLERANCE = 1e-6
MJ_PER_KWH = 3.6


# -- paths -----------------------------------------------------------------

@dataclass(frozen=True)
class DemandPath:
    """Exogenous demand (GWh/y): explicit points or a declining growth rate.

    With a growth rate, g(t) falls linearly from ``growth_start`` at the
    start year to ``growth_end`` at ``growth_end_year``, keeps the same slope
    afterwards and is floored at zero.
    """

    initial: float = 2.1e7
    growth_start: float = 0.024
    growth_end: float = 0.010
    growth_end_year: float = 2100.0
    start_year: float = 2010.0
    points: tuple = ()
    interpolation: str = "linear"

    def __call__(self, year: float) -> float:
        if self.points:
            return _interpolate(self.points, year, self.interpolation)
        span = self.growth_end_year - self.start_year
        slope = (self.growth_end - self.growth_start) / span if span > 0 else 0.0
        tau = year - self.start_year
        if slope < 0:
            tau = min(tau, -self.growth_start / slope)
        tau = max(tau, 0.0)
        return self.initial * math.exp(self.growth_start * tau + 0.5 * slope * tau * tau)


@dataclass(frozen=True)
class CarbonPricePath:
    """Carbon price ($/tCO2): compound growth or explicit points."""

    initial: float = 22.0
    growth: float = 0.0
    start_year: float = 2010.0
    points: tuple = ()

    def __call__(self, year: float) -> float:
        if self.points:
            return _interpolate(self.points, year, "linear")
        return self.initial * math.pow(1.0 + self.growth, year - self.start_year)


def _interpolate(points, year, rule):
    years = [p[0] for p in points]
    values = [p[1] for p in points]
    if year <= years[0]:
        return values[0]
    if year >= years[-1]:
        return values[-1]
    k = int(np.searchsorted(years, year, side="right")) - 1
    w = (year - years[k]) / (years[k + 1] - years[k])
    if rule == "log":
        return math.exp(math.log(values[k]) * (1 - w) + math.log(values[k + 1]) * w)
    return values[k] * (1 - w) + values[k + 1] * w


# -- config ----------------------------------------------------------------

@dataclass(frozen=True)
class ScenarioConfig:
    K: float
    name: str = "scenario"
    start: float = 2010.0
    end: float = 2100.0
    dt: float = 0.25
    demand: DemandPath = field(default_factory=DemandPath)
    carbon_price: CarbonPricePath = field(default_factory=CarbonPricePath)
    discount_rate: float = 0.10
    grid: dynamics.GridParams = field(default_factory=dynamics.GridParams)
    initial_shares: dict | None = None
    seed: int = 0
    fuel_price_mode: str = "table"
    on_exhaustion: str = "halt"
    lcoe_offsets: dict = field(default_factory=dict)
    technologies: str = "technologies.toml"
    resources: str = "resources.toml"
    csv_name: str = "series.csv"
    summary_name: str = "summary.json"
    source: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def n_steps(self) -> int:
        return round((self.end - self.start) / self.dt)

    def years(self) -> np.ndarray:
        return np.array([self.year(k) for k in range(self.n_steps + 1)])

    def year(self, k: int) -> float:
        return round(self.start + k * self.dt, 9)


class _Table:
    """Reads one TOML table, tracking key paths and rejecting unknown keys."""

    def __init__(self, data, path):
        if not isinstance(data, dict):
            raise ConfigError(f"{path or 'document'}: expected a table")
        self.data, self.path, self.seen = data, path, set()

    def key(self, name):
        return f"{self.path}.{name}" if self.path else name

    def get(self, name, kind, default=None, required=False, check=None, message=""):
        self.seen.add(name)
        if name not in self.data:
            if required:
                raise ConfigError(f"{self.key(name)}: required key missing")
            return default
        value = self.data[name]
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
            raise ConfigError(f"{self.key(name)}: expected {kind.__name__}, got {value!r}")
        if check is not None and not check(value):
            raise ConfigError(f"{self.key(name)}: {message} (got {value!r})")
        return value

    def sub(self, name):
        self.seen.add(name)
        return _Table(self.data.get(name, {}), self.key(name))

    def finish(self):
        extra = sorted(set(self.data) - self.seen)
        if extra:
            raise ConfigError(f"unknown key(s) {', '.join(self.key(k) for k in extra)}")


def _points(table, name):
    raw = table.get(name, list)
    if raw is None:
        return ()
    try:
        pts = tuple((float(y), float(v)) for y, v in raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{table.key(name)}: expected a list of [year, value] pairs") from None
    if not pts or any(b[0] <= a[0] for a, b in zip(pts, pts[1:])):
        raise ConfigError(f"{table.key(name)}: years must be strictly increasing")
    return pts


def _number_map(table: _Table, label: str) -> dict:
    out = {}
    for key in list(table.data):
        out[key] = table.get(key, float, check=math.isfinite, message="must be finite")
    table.finish()
    return out


def parse_config(document: str | dict) -> ScenarioConfig:
    """Parse and validate a scenario document (TOML text or parsed dict)."""
    if isinstance(document, str):
        try:
            document = tomllib.loads(document)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config does not parse: {exc}") from None
    root = _Table(document, "")
    version = root.get("format_version", int, required=True)
    if version != FORMAT_VERSION:
        raise ConfigError(f"format_version: unsupported version {version}")
    positive = dict(check=lambda v: v > 0 and math.isfinite(v), message="must be > 0")
    nonneg = dict(check=lambda v: v >= 0 and math.isfinite(v), message="must be >= 0")

    name = root.get("name", str, "scenario")
    root.get("description", str)
    scale = root.get("K", float, required=True, **positive)
    seed = root.get("seed", int, 0)
    rate = root.get("discount_rate", float, 0.10, **nonneg)
    mode = root.get("fuel_price_mode", str, "table", check=lambda v: v in FUEL_PRICE_MODES,
                    message=f"must be one of {', '.join(FUEL_PRICE_MODES)}")
    on_exhaustion = root.get("on_exhaustion", str, "halt",
                             check=lambda v: v in EXHAUSTION_POLICIES, message="halt or cap")
    tech_file = root.get("technologies", str, "technologies.toml")
    res_file = root.get("resources", str, "resources.toml")

    h = root.sub("horizon")
    start = h.get("start", float, 2010.0)
    end = h.get("end", float, 2100.0)
    dt = h.get("dt", float, 0.25, **positive)
    h.finish()
    if end < start:
        raise ConfigError("horizon.end: must not precede horizon.start")
    steps = (end - start) / dt
    if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
        raise ConfigError("horizon.dt: must divide the horizon into whole steps")

    d = root.sub("demand")
    points = _points(d, "points")
    default = DemandPath()
    demand = DemandPath(
        initial=d.get("initial", float, default.initial, **positive),
        growth_start=d.get("growth_start", float, default.growth_start),
        growth_end=d.get("growth_end", float, default.growth_end),
        growth_end_year=d.get("growth_end_year", float, default.growth_end_year),
        start_year=start,
        points=points,
        interpolation=d.get("interpolation", str, "linear",
                            check=lambda v: v in ("linear", "log"), message="linear or log"),
    )
    d.finish()
    if points and any(v <= 0 for _, v in points):
        raise ConfigError("demand.points: demand must be > 0")
    if demand(start) <= 0 or demand(end) <= 0:
        raise ConfigError("demand: must be > 0 over the horizon")

    c = root.sub("carbon_price")
    default_cp = CarbonPricePath()
    carbon = CarbonPricePath(
        initial=c.get("initial", float, default_cp.initial, **nonneg),
        growth=c.get("growth", float, default_cp.growth, check=lambda v: v > -1,
                     message="must be > -1"),
        start_year=start,
        points=_points(c, "points"),
    )
    c.finish()

    g = root.sub("grid")
    gd = dynamics.GridParams()
    try:
        grid = dynamics.GridParams(
            peak_fraction=g.get("peak_fraction", float, gd.peak_fraction, **nonneg),
            peak_height=g.get("peak_height", float, None, **nonneg),
            peak_energy=g.get("peak_energy", float, None, **nonneg),
            storage_power=g.get("storage_power", float, 0.0, **nonneg),
            storage_energy=g.get("storage_energy", float, 0.0, **nonneg),
            day_length=g.get("day_length", float, 24.0, **positive),
            softness=g.get("softness", float, gd.softness, **positive),
        )
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from None
    g.finish()

    shares = None
    if "initial_shares" in document:
        shares = _number_map(root.sub("initial_shares"), "initial_shares")
        if any(v < 0 for v in shares.values()):
            raise ConfigError("initial_shares: shares must be >= 0")
        total = math.fsum(shares.values())
        if abs(total - 1.0) > SHARE_TOLERANCE:
            raise ConfigError(f"initial_shares: shares sum to {total:g}, expected 1")
    offsets = _number_map(root.sub("lcoe_offsets"), "lcoe_offsets")

    o = root.sub("output")
    csv_name = o.get("csv", str, "series.csv")
    summary_name = o.get("summary", str, "summary.json")
    o.finish()
    root.finish()

    return ScenarioConfig(
        K=scale, name=name, start=start, end=end, dt=dt, demand=demand,
        carbon_price=carbon, discount_rate=rate, grid=grid, initial_shares=shares,
        seed=seed, fuel_price_mode=mode, on_exhaustion=on_exhaustion, lcoe_offsets=offsets,
        technologies=tech_file, resources=res_file, csv_name=csv_name,
        summary_name=summary_name, source=document,
    )


def read_config(path: str | Path, overrides: list[str] | None = None) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: does not parse: {exc}") from None
    for item in overrides or []:
        apply_override(doc, item)
    return parse_config(doc)


def apply_override(doc: dict, item: str) -> None:
    """Apply ``dotted.key=value`` onto a parsed document; value is TOML."""
    key, sep, raw = item.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"override {item!r}: expected KEY=VALUE")
    try:
        value = tomllib.loads(f"v = {raw.strip()}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw.strip()
    parts = key.strip().split(".")
    table = doc
    for part in parts[:-1]:
        table = table.setdefault(part, {})
        if not isinstance(table, dict):
            raise ConfigError(f"override {item!r}: {part} is not a table")
    table[parts[-1]] = value


def load_data(config: ScenarioConfig, data_dir: str | Path | None = None):
    """Technology registry and resource set named by the config."""
    data_dir = Path(data_dir) if data_dir is not None else default_data_dir()
    if not data_dir.is_dir():
        raise DataError(f"data directory {data_dir} does not exist")
    return (read_registry(data_dir / config.technologies),
            read_resources(data_dir / config.resources))


# -- output ----------------------------------------------------------------

@dataclass
class SimulationOutput:
    """Time series of one run; arrays are (time,) or (time, technology)."""

    name: str
    tech_ids: tuple
    years: np.ndarray
    shares: np.ndarray
    capacity: np.ndarray
    generation: np.ndarray
    investment: np.ndarray
    lcoe: np.ndarray
    emissions: np.ndarray
    emissions_rate: np.ndarray
    emissions_cumulative: np.ndarray
    avg_lcoe: np.ndarray
    demand: np.ndarray
    carbon_price: np.ndarray
    slacks: np.ndarray
    complete: bool = True
    error: str | None = None
    diagnostics: list = field(default_factory=list)

    @property
    def binding(self) -> np.ndarray:
        return self.slacks < 0

    def series(self, tech_id: str, variable: str = "generation") -> np.ndarray:
        return getattr(self, variable)[:, self.tech_ids.index(tech_id)]

    def peak_years(self, variable: str = "generation") -> dict:
        data = getattr(self, variable)
        return {t: float(self.years[int(np.argmax(data[:, k]))])
                for k, t in enumerate(self.tech_ids)}


class _Recorder:
    names = ("years", "shares", "capacity", "generation", "investment", "lcoe",
             "emissions", "emissions_rate", "emissions_cumulative", "avg_lcoe",
             "demand", "carbon_price", "slacks")

    def __init__(self):
        self.rows = {n: [] for n in self.names}

    def add(self, **values):
        for n in self.names:
            self.rows[n].append(values[n])

    def output(self, name, tech_ids, error=None, diagnostics=()) -> SimulationOutput:
        n = len(tech_ids)
        arrays = {}
        for key, rows in self.rows.items():
            if rows:
                arrays[key] = np.array(rows, dtype=float)
            elif key in ("years", "emissions_rate", "emissions_cumulative", "avg_lcoe",
                         "demand", "carbon_price"):
                arrays[key] = np.zeros(0)
            else:
                arrays[key] = np.zeros((0, 3 if key == "slacks" else n))
        return SimulationOutput(name=name, tech_ids=tuple(tech_ids), complete=error is None,
                                error=error, diagnostics=list(diagnostics), **arrays)


# -- simulation ------------------------------------------------------------

def initial_shares(config: ScenarioConfig, registry: TechnologyRegistry) -> np.ndarray:
    if config.initial_shares is None:
        capacity = registry.column("initial_capacity")
        total = math.fsum(capacity)
        if not total > 0:
            raise DataError("technology data has no initial capacity")
        return capacity / total
    unknown = sorted(set(config.initial_shares) - set(registry.ids))
    if unknown:
        raise ConfigError(f"initial_shares: unknown technology id(s) {unknown}")
    return np.array([config.initial_shares.get(t, 0.0) for t in registry.ids])


class _FuelMarket:
    """Links technologies to resource curves and prices their fuel."""

    def __init__(self, registry, resources: ResourceSet, mode, cap=False):
        self.mode = mode
        self.cap = cap
        self.capped = {}
        self.year = None
        self.curves = dict(resources.curves)
        self.heat_rate = registry.column("heat_rate")
        self.table = registry.column("fuel_cost")
        self.links = {}
        for k, tech in enumerate(registry):
            rid = tech.resource_id
            if rid is None:
                continue
            if rid not in self.curves:
                if mode != "table":
                    raise DataError(f"technology {tech.id!r}: unknown resource {rid!r}")
                continue
            self.links.setdefault(rid, []).append(k)

    def _unit(self, rid):
        # $/GJ -> $/MWh via GJ/MWh; flow costs are per MWh of primary energy
        return 1.0 if self.curves[rid].kind is ResourceKind.STOCK else 1.0 / MJ_PER_KWH

    def prices(self) -> np.ndarray:
        prices = self.table.copy()
        if self.mode == "table":
            return prices
        for rid, members in self.links.items():
            curve = self.curves[rid]
            if self.cap and curve.used >= curve.technical_potential:
                unit_cost = curve.costs[-1]
            else:
                unit_cost = marginal_cost(curve, curve.used)
            for k in members:
                price = unit_cost * self.heat_rate[k] * self._unit(rid)
                prices[k] = price if self.mode == "curve" else max(price, self.table[k])
        return prices

    def _consume(self, rid, amount, duration=1.0):
        curve = self.curves[rid]
        try:
            self.curves[rid] = consume(curve, amount, duration)
        except ResourceExhaustedError as exc:
            if not self.cap:
                raise
            self.capped.setdefault(rid, (self.year, exc.requested))
            self.curves[rid] = replace(curve, used=curve.technical_potential)

    def use(self, generation, dt):
        """Extract stock resources for ``dt`` years of ``generation``."""
        for rid in sorted(self.links):
            members = self.links[rid]
            if self.curves[rid].kind is ResourceKind.STOCK:
                # GWh/y * GJ/MWh * 1000 MWh/GWh -> GJ/y
                amount = math.fsum(generation[members] * self.heat_rate[members]) * 1000.0
                self._consume(rid, amount, dt)

    def occupy(self, generation):
        """Set flow resources to the flows occupied by ``generation``."""
        for rid in sorted(self.links):
            if self.curves[rid].kind is ResourceKind.FLOW:
                members = self.links[rid]
                amount = math.fsum(generation[members] * self.heat_rate[members]) / MJ_PER_KWH
                self._consume(rid, amount)

    def diagnostics(self) -> list[str]:
        return [f"{rid} capped at its technical potential from {year:g} "
                f"(demand {req:.4g})" for rid, (year, req) in sorted(self.capped.items())]


def run(config: ScenarioConfig, registry: TechnologyRegistry, resources: ResourceSet,
        progress: Callable[[str], None] | None = None) -> SimulationOutput:
    """Simulate one scenario. Deterministic given config and data.

    On resource exhaustion, a step-size guard trip or a hard grid-constraint
    violation a :class:`SimulationError` is raised whose ``partial`` holds
    the records up to the failure.
    """
    ids = registry.ids
    unknown = sorted(set(config.lcoe_offsets) - set(ids))
    if unknown:
        raise ConfigError(f"lcoe_offsets: unknown technology id(s) {unknown}")
    shares = initial_shares(config, registry)
    cf = registry.column("capacity_factor")
    alpha = registry.column("emission_factor")
    delta = np.array([t.decommission_rate for t in registry])
    offsets = np.array([config.lcoe_offsets.get(t, 0.0) for t in ids])
    classes = dynamics.grid_classes(registry)
    freq = dynamics.substitution_matrix(registry, config.K)
    spill = default_spillover(registry)
    learning = costs.LearningState.from_registry(registry)
    market = _FuelMarket(registry, resources, config.fuel_price_mode,
                         cap=config.on_exhaustion == "cap")
    grid, dt = config.grid, config.dt
    rec = _Recorder()

    try:
        power = accounting.capacities(shares, config.demand(config.start), cf)
        market.year = config.start
        market.occupy(power.generation)
        invest_cost = costs.learned_costs(learning)
        invest = accounting.investment(power.capacity, power.capacity, dt, invest_cost, delta)
        e_rate, e_total = accounting.emissions(power.generation, alpha, 0.0, dt)
        next_decade = math.floor(config.start / 10) * 10 + 10
        for k in range(config.n_steps + 1):
            year = config.year(k)
            market.year = year
            demand = config.demand(year)
            price = config.carbon_price(year)
            fuel = market.prices()
            dists = [
                costs.lcoe(tech, invest_cost[i], fuel[i], price, config.discount_rate, offsets[i])
                for i, tech in enumerate(registry)
            ]
            medians = np.array([c.median for c in dists])
            stats = dynamics.capacity_stats(shares, cf, classes, demand)
            slacks = dynamics.constraint_slacks(shares, grid, classes, stats)
            rec.add(years=year, shares=shares, capacity=power.capacity,
                    generation=power.generation, investment=invest, lcoe=medians,
                    emissions=alpha * power.generation, emissions_rate=e_rate,
                    emissions_cumulative=e_total,
                    avg_lcoe=accounting.average_lcoe(shares, medians), demand=demand,
                    carbon_price=price, slacks=[slacks[n] for n in CONSTRAINT_NAMES])
            hard = [(n, s) for n, s in slacks.items() if s < -grid.softness]
            if hard:
                detail = ", ".join(f"{n} slack {s:.3g}" for n, s in hard)
                raise SimulationError(f"grid constraint violated in {year:g}: {detail}")
            if progress is not None and year >= next_decade:
                progress(_progress_line(year, ids, shares, e_rate))
                next_decade += 10
            if k == config.n_steps:
                break

            limits = dynamics.share_limits(shares, grid, classes, stats)
            shares = dynamics.shares_step(shares, dists, freq, limits, dt, grid.softness)
            new_power = accounting.capacities(shares, config.demand(config.year(k + 1)), cf)
            invest = accounting.investment(power.capacity, new_power.capacity, dt,
                                           invest_cost, delta)
            e_rate, e_total = accounting.emissions(new_power.generation, alpha, e_total, dt,
                                                   prev_rate=e_rate)
            learning = costs.accumulate_capacity(
                learning, spill, new_power.capacity - power.capacity, new_power.capacity,
                delta, dt,
            )
            invest_cost = costs.learned_costs(learning)
            market.year = config.year(k + 1)
            market.use(power.generation, dt)
            market.occupy(new_power.generation)
            power = new_power
    except PowerLadderError as exc:
        partial = rec.output(config.name, ids, error=str(exc), diagnostics=market.diagnostics())
        if isinstance(exc, SimulationError):
            exc.partial = partial
            raise
        raise SimulationError(str(exc), partial) from exc
    return rec.output(config.name, ids, diagnostics=market.diagnostics())


def _progress_line(year, ids, shares, e_rate):
    top = np.argsort(-shares, kind="stable")[:3]
    mix = ", ".join(f"{ids[k]} {shares[k]:.2f}" for k in top)
    return f"{year:.0f}: {mix}; emissions {e_rate / 1e9:.2f} GtCO2/y"


# -- ensembles -------------------------------------------------------------

ENSEMBLE_VARIABLES = ("shares", "capacity", "generation", "investment", "lcoe")
ENSEMBLE_TOTALS = ("emissions_rate", "emissions_cumulative", "avg_lcoe", "total_generation")
DEFAULT_QUANTILES = (0.025, 0.5, 0.975)


@dataclass
class EnsembleSummary:
    name: str
    tech_ids: tuple
    years: np.ndarray
    quantiles: tuple
    bands: dict
    members: int
    failures: int
    errors: list

    def width(self, variable: str, tech_id: str | None = None) -> np.ndarray:
        """Upper minus lower band over time."""
        band = self.bands[variable]
        if tech_id is not None:
            band = band[:, :, self.tech_ids.index(tech_id)]
        return band[-1] - band[0]


def _member(args):
    config, registry, resources, index = args
    sample = resources.sampled(config.seed + index)
    try:
        return run(config, registry, sample), None
    except PowerLadderError as exc:
        return None, f"member {index}: {exc}"


def run_ensemble(config: ScenarioConfig, n: int, registry: TechnologyRegistry,
                 resources: ResourceSet, quantiles=DEFAULT_QUANTILES,
                 workers: int = 1) -> EnsembleSummary:
    """``n`` runs with resource curves sampled from seed ``config.seed + index``.

    Member failures are counted, not raised. Bands are quantiles over the
    completed members.
    """
    if n < 1:
        raise ValueError("ensemble needs at least one member")
    jobs = [(config, registry, resources, m) for m in range(n)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_member, jobs))
    else:
        results = [_member(job) for job in jobs]
    runs = [r for r, _ in results if r is not None]
    errors = [e for _, e in results if e is not None]
    bands = {}
    if runs:
        for var in ENSEMBLE_VARIABLES + ENSEMBLE_TOTALS[:-1]:
            stack = np.stack([getattr(r, var) for r in runs])
            bands[var] = np.quantile(stack, quantiles, axis=0)
        totals = np.stack([r.generation.sum(axis=1) for r in runs])
        bands["total_generation"] = np.quantile(totals, quantiles, axis=0)
    years = runs[0].years if runs else config.years()
    return EnsembleSummary(config.name, registry.ids, years, tuple(quantiles), bands, n,
                           len(errors), errors)


# -- files -----------------------------------------------------------------

def write_csv(output: SimulationOutput, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for k, year in enumerate(output.years):
            for i, tech in enumerate(output.tech_ids):
                writer.writerow([
                    repr(float(year)), tech, repr(float(output.shares[k, i])),
                    repr(float(output.capacity[k, i])), repr(float(output.generation[k, i])),
                    repr(float(output.investment[k, i])), repr(float(output.lcoe[k, i])),
                    repr(float(output.emissions[k, i])),
                ])


def read_csv(path: str | Path) -> dict:
    """Series file back as {column: array} with tech ids and years."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_COLUMNS:
            raise DataError(f"{path}: unexpected columns {header}")
        rows = list(reader)
    years = sorted({float(r[0]) for r in rows})
    techs = list(dict.fromkeys(r[1] for r in rows))
    if len(rows) != len(years) * len(techs):
        raise DataError(f"{path}: ragged series table")
    data = {"years": np.array(years), "tech_ids": tuple(techs)}
    for c, column in enumerate(CSV_COLUMNS[2:], start=2):
        data[column] = np.array([float(r[c]) for r in rows]).reshape(len(years), len(techs))
    return data


def summary_dict(output: SimulationOutput, config: ScenarioConfig | None = None) -> dict:
    peaks = output.peak_years("generation")
    return {
        "scenario": output.name,
        "complete": output.complete,
        "error": output.error,
        "diagnostics": output.diagnostics,
        "backend": kernels.BACKEND,
        "config": config.source if config is not None else None,
        "seed": config.seed if config is not None else None,
        "technologies": list(output.tech_ids),
        "start_year": float(output.years[0]) if len(output.years) else None,
        "end_year": float(output.years[-1]) if len(output.years) else None,
        "generation_peak_year": peaks,
        "final_shares": dict(zip(output.tech_ids, map(float, output.shares[-1])))
        if len(output.years) else {},
        "emissions_rate": [float(v) for v in output.emissions_rate],
        "emissions_cumulative": [float(v) for v in output.emissions_cumulative],
        "avg_lcoe": [float(v) for v in output.avg_lcoe],
        "binding_constraints": {
            name: [float(y) for y in output.years[output.binding[:, c]]][:1]
            for c, name in enumerate(CONSTRAINT_NAMES)
        },
    }


def ensemble_dict(summary: EnsembleSummary, config: ScenarioConfig | None = None) -> dict:
    return {
        "scenario": summary.name,
        "backend": kernels.BACKEND,
        "config": config.source if config is not None else None,
        "members": summary.members,
        "failures": summary.failures,
        "errors": summary.errors,
        "quantiles": list(summary.quantiles),
        "technologies": list(summary.tech_ids),
        "years": [float(y) for y in summary.years],
        "bands": {k: v.tolist() for k, v in summary.bands.items()},
    }


def write_json(data: dict, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=1, sort_keys=True)
        fh.write("\n")


def compare_series(a: dict, b: dict) -> dict:
    """Differences b - a of two series tables; axes must match."""
    if a["tech_ids"] != b["tech_ids"]:
        raise ConfigError("outputs cover different technologies")
    if a["years"].shape != b["years"].shape or np.any(a["years"] != b["years"]):
        raise ConfigError("outputs have different time axes")
    diff = {c: b[c] - a[c] for c in CSV_COLUMNS[2:]}
    diff["years"], diff["tech_ids"] = a["years"], a["tech_ids"]
    return diff
