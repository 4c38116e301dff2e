"""Technology registry: per-technology parameters and the learning spillover matrix.

Data files are TOML with this layout::

    format_version = 1

    [defaults]              # optional
    cost_spread = 0.1
    spillover_weight = 0.5

    [[technology]]          # one table per technology, declaration order kept
    id = "coal"
    name = "Coal"
    invest_cost = 2134.0    # $/kW
    ...

    [[spillover]]           # optional; replaces the built-in pair list
    pair = ["onshore", "offshore"]
    weight = 0.5            # optional, defaults.spillover_weight otherwise

    [[substitution_override]]   # optional A_ij exceptions, not used by default
    source = "coal"
    target = "coal_ccs"
    value = 0.5

Column names are the :class:`TechnologySpec` field names.
"""

from __future__ import annotations

import enum
import math
from dataclasses import MISSING, asdict, dataclass, fields, replace
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np
import tomli_w

from .errors import DataError

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

FORMAT_VERSION = 1
DEFAULT_COST_SPREAD = 0.1
DEFAULT_SPILLOVER_WEIGHT = 0.5

# Related pairs sharing learning when the data file gives no [[spillover]] list.
DEFAULT_SPILLOVER_PAIRS = (
    ("igcc", "bigcc"),
    ("igcc_ccs", "bigcc_ccs"),
    ("onshore", "offshore"),
    ("ccgt", "igcc"),
)


class GridClass(str, enum.Enum):
    BASE = "Base"
    FLEXIBLE = "Flexible"
    VARIABLE = "Variable"


@dataclass(frozen=True)
class TechnologySpec:
    """Static parameters of one generation technology.

    Units: ``invest_cost`` $/kW, ``fuel_cost`` and ``om_cost`` $/MWh,
    ``emission_factor`` tCO2/GWh, ``lifetime`` and ``build_time`` years,
    ``heat_rate`` GJ of primary energy per MWh of electricity (3.6 means the
    resource flow is counted as electricity), capacities in GW.
    """

    id: str
    name: str
    invest_cost: float
    fuel_cost: float
    om_cost: float
    emission_factor: float
    lifetime: float
    build_time: float
    learning_exponent: float
    capacity_factor: float
    grid_class: GridClass
    cost_spread: float = DEFAULT_COST_SPREAD
    resource_id: str | None = None
    heat_rate: float = 3.6
    initial_capacity: float = 0.0
    initial_cumulative_capacity: float | None = None

    def __post_init__(self):
        if not isinstance(self.grid_class, GridClass):
            try:
                object.__setattr__(self, "grid_class", GridClass(self.grid_class))
            except ValueError:
                raise DataError(
                    f"technology {self.id!r}: unknown grid_class {self.grid_class!r}"
                ) from None
        for name in ("invest_cost", "fuel_cost", "om_cost", "emission_factor",
                     "lifetime", "build_time", "learning_exponent",
                     "capacity_factor", "cost_spread", "heat_rate",
                     "initial_capacity"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise DataError(f"technology {self.id!r}: {name} must be a number")
            if not math.isfinite(value):
                raise DataError(f"technology {self.id!r}: {name} must be finite")
            object.__setattr__(self, name, float(value))
        if self.initial_cumulative_capacity is None:
            object.__setattr__(self, "initial_cumulative_capacity", self.initial_capacity)
        else:
            object.__setattr__(
                self, "initial_cumulative_capacity", float(self.initial_cumulative_capacity)
            )
        self._validate()

    def _validate(self):
        def fail(msg):
            raise DataError(f"technology {self.id!r}: {msg}")

        if not self.id:
            raise DataError("technology with empty id")
        if self.lifetime <= 0:
            fail(f"lifetime must be > 0, got {self.lifetime}")
        if self.build_time <= 0:
            fail(f"build_time must be > 0, got {self.build_time}")
        if not 0 < self.capacity_factor <= 1:
            fail(f"capacity_factor must lie in (0, 1], got {self.capacity_factor}")
        if self.learning_exponent < 0:
            fail(f"learning_exponent must be >= 0, got {self.learning_exponent}")
        if self.cost_spread <= 0:
            fail(f"cost_spread must be > 0, got {self.cost_spread}")
        if self.invest_cost < 0 or self.om_cost < 0 or self.fuel_cost < 0:
            fail("cost components must be >= 0")
        if self.heat_rate <= 0:
            fail(f"heat_rate must be > 0, got {self.heat_rate}")
        if self.initial_capacity < 0:
            fail("initial_capacity must be >= 0")
        if not math.isfinite(self.initial_cumulative_capacity) or self.initial_cumulative_capacity < 0:
            fail("initial_cumulative_capacity must be finite and >= 0")
        if self.emission_factor < 0 and not self.is_bio_ccs:
            fail("negative emission_factor is only allowed for biomass CCS technologies")

    @property
    def is_bio_ccs(self) -> bool:
        return "ccs" in self.id.lower() and "bio" in (self.resource_id or "").lower()

    @property
    def decommission_rate(self) -> float:
        return 1.0 / self.lifetime


_REQUIRED = [f.name for f in fields(TechnologySpec) if f.default is MISSING]
_ALL_FIELDS = {f.name for f in fields(TechnologySpec)}


@dataclass(frozen=True)
class SubstitutionOverride:
    source: str
    target: str
    value: float


@dataclass(frozen=True)
class TechnologyRegistry:
    technologies: tuple[TechnologySpec, ...]
    spillover_pairs: tuple[tuple[str, str, float], ...] = ()
    substitution_overrides: tuple[SubstitutionOverride, ...] = ()

    def __post_init__(self):
        if not self.technologies:
            raise DataError("no technologies")
        seen = set()
        for tech in self.technologies:
            if tech.id in seen:
                raise DataError(f"technology {tech.id!r}: duplicate id")
            seen.add(tech.id)
        for a, b, w in self.spillover_pairs:
            for tid in (a, b):
                if tid not in seen:
                    raise DataError(f"spillover pair references unknown technology {tid!r}")
            if not 0 <= w <= 1:
                raise DataError(f"spillover weight for ({a}, {b}) must lie in [0, 1]")
        for ov in self.substitution_overrides:
            for tid in (ov.source, ov.target):
                if tid not in seen:
                    raise DataError(
                        f"substitution override references unknown technology {tid!r}"
                    )
            if not ov.value > 0:
                raise DataError("substitution override values must be > 0")
        object.__setattr__(self, "_index", {t.id: k for k, t in enumerate(self.technologies)})

    def __len__(self) -> int:
        return len(self.technologies)

    def __iter__(self) -> Iterator[TechnologySpec]:
        return iter(self.technologies)

    def __getitem__(self, key: str | int) -> TechnologySpec:
        if isinstance(key, str):
            return self.technologies[self.index(key)]
        return self.technologies[key]

    def __contains__(self, tech_id: str) -> bool:
        return tech_id in self._index

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(t.id for t in self.technologies)

    def index(self, tech_id: str) -> int:
        try:
            return self._index[tech_id]
        except KeyError:
            raise KeyError(f"unknown technology {tech_id!r}") from None

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(t, name) for t in self.technologies], dtype=float)

    def class_mask(self, grid_class: GridClass | str) -> np.ndarray:
        grid_class = GridClass(grid_class)
        return np.array([t.grid_class is grid_class for t in self.technologies])

    def permuted(self, order: Sequence[int]) -> "TechnologyRegistry":
        """Registry with technologies reordered so that new[k] = old[order[k]]."""
        if sorted(order) != list(range(len(self))):
            raise ValueError("order must be a permutation of range(len(registry))")
        return replace(self, technologies=tuple(self.technologies[k] for k in order))


def _spec_from_row(row: dict, position: int, defaults: dict) -> TechnologySpec:
    label = row.get("id", f"#{position}")
    unknown = set(row) - _ALL_FIELDS
    if unknown:
        raise DataError(f"technology {label!r}: unknown field(s) {sorted(unknown)}")
    missing = [name for name in _REQUIRED if name not in row]
    if missing:
        raise DataError(f"technology {label!r}: missing field(s) {missing}")
    row = dict(row)
    row.setdefault("cost_spread", defaults.get("cost_spread", DEFAULT_COST_SPREAD))
    try:
        return TechnologySpec(**row)
    except TypeError as exc:
        raise DataError(f"technology {label!r}: {exc}") from None


def load_registry(source: str) -> TechnologyRegistry:
    """Parse a technology data document (TOML text)."""
    try:
        doc = tomllib.loads(source)
    except tomllib.TOMLDecodeError as exc:
        raise DataError(f"technology data does not parse: {exc}") from None
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise DataError(f"unsupported format_version {version!r} (expected {FORMAT_VERSION})")
    unknown = set(doc) - {"format_version", "defaults", "technology", "spillover",
                          "substitution_override"}
    if unknown:
        raise DataError(f"unknown top-level key(s) {sorted(unknown)}")
    defaults = doc.get("defaults", {})
    rows = doc.get("technology", [])
    if not rows:
        raise DataError("no technologies")
    techs = tuple(_spec_from_row(row, k, defaults) for k, row in enumerate(rows))

    weight = float(defaults.get("spillover_weight", DEFAULT_SPILLOVER_WEIGHT))
    ids = {t.id for t in techs}
    if "spillover" in doc:
        pairs = []
        for entry in doc["spillover"]:
            a, b = entry["pair"]
            pairs.append((a, b, float(entry.get("weight", weight))))
    else:
        pairs = [(a, b, weight) for a, b in DEFAULT_SPILLOVER_PAIRS if a in ids and b in ids]
    overrides = tuple(
        SubstitutionOverride(e["source"], e["target"], float(e["value"]))
        for e in doc.get("substitution_override", [])
    )
    return TechnologyRegistry(techs, tuple(pairs), overrides)


def read_registry(path: str | Path) -> TechnologyRegistry:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read technology data {path}: {exc}") from None
    try:
        return load_registry(text)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None


def dump_registry(registry: TechnologyRegistry) -> str:
    """Serialise a registry back to TOML; ``load_registry`` inverts this."""
    rows = []
    for tech in registry:
        row = asdict(tech)
        row["grid_class"] = tech.grid_class.value
        if row["resource_id"] is None:
            del row["resource_id"]
        rows.append(row)
    doc = {
        "format_version": FORMAT_VERSION,
        "technology": rows,
        "spillover": [{"pair": [a, b], "weight": w} for a, b, w in registry.spillover_pairs],
    }
    if registry.substitution_overrides:
        doc["substitution_override"] = [asdict(ov) for ov in registry.substitution_overrides]
    return tomli_w.dumps(doc)


def default_spillover(registry: TechnologyRegistry) -> np.ndarray:
    """Spillover matrix B: identity plus symmetric weights for related pairs."""
    n = len(registry)
    matrix = np.eye(n)
    for a, b, weight in registry.spillover_pairs:
        i, j = registry.index(a), registry.index(b)
        matrix[i, j] = matrix[j, i] = weight
    return matrix


def default_data_dir() -> Path:
    return Path(__file__).parent / "data"


def default_registry() -> TechnologyRegistry:
    return read_registry(default_data_dir() / "technologies.toml")

