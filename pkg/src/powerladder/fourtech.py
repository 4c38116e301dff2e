"""Four-technology demonstrations of the shares equation.

Constant costs C1 = 1.3, C2 = 1.1, C3 = 1.05 and C4 = 1 (in units of C4),
identical spreads and A_ij = 1. Time is in the natural units of A.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .costs import CostDistribution, preference_matrix
from .dynamics import DEFAULT_SOFTNESS, ShareLimits, share_rates, shares_step

COSTS = (1.3, 1.1, 1.05, 1.0)
SPREAD = 0.1
DEFAULT_DT = 0.1
DEFAULT_HORIZON = 100.0


@dataclass(frozen=True)
class Case:
    name: str
    shares: tuple
    upper: dict = field(default_factory=dict)
    lower: dict = field(default_factory=dict)
    description: str = ""

    def limits(self) -> ShareLimits:
        return ShareLimits.fixed(len(self.shares), self.upper, self.lower)


CASES = {
    "a": Case("a", (0.97, 0.01, 0.01, 0.01), description="S1 dominant, no limits"),
    "b": Case("b", (0.69, 0.29, 0.01, 0.01), description="S1 and S2 large, no limits"),
    "c": Case("c", (0.97, 0.01, 0.01, 0.01), upper={2: 0.20, 3: 0.30},
              description="as a, upper limits 20% on S3 and 30% on S4"),
    "d": Case("d", (0.97, 0.01, 0.01, 0.01), upper={2: 0.20, 3: 0.30}, lower={0: 0.40},
              description="as c, lower limit 40% on S1"),
}


@dataclass
class Trajectory:
    case: Case
    times: np.ndarray
    shares: np.ndarray  # (steps + 1, 4)
    dt: float

    def final_rates(self, softness: float = DEFAULT_SOFTNESS) -> np.ndarray:
        """dS/dt evaluated at the last recorded state."""
        return share_rates(self.shares[-1], _preferences(), np.ones((4, 4)),
                           self.case.limits(), softness)


def _preferences(spread: float = SPREAD) -> np.ndarray:
    return preference_matrix([CostDistribution(c, spread) for c in COSTS])


def simulate(case: Case | str, horizon: float = DEFAULT_HORIZON, dt: float = DEFAULT_DT,
             spread: float = SPREAD, softness: float = DEFAULT_SOFTNESS) -> Trajectory:
    if isinstance(case, str):
        case = CASES[case]
    steps = round(horizon / dt)
    pref = _preferences(spread)
    freq = np.ones((4, 4))
    limits = case.limits() if case.upper or case.lower else None
    out = np.empty((steps + 1, 4))
    out[0] = case.shares
    for k in range(steps):
        out[k + 1] = shares_step(out[k], pref, freq, limits, dt, softness)
    return Trajectory(case, np.arange(steps + 1) * dt, out, dt)


def inflections(series, tol: float = 1e-12) -> int:
    """Number of sign changes of the second difference, ignoring |d2| <= tol."""
    d2 = np.diff(np.asarray(series, dtype=float), 2)
    signs = np.sign(d2[np.abs(d2) > tol])
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def is_sigmoid(series, tol: float = 1e-12) -> bool:
    """Monotone non-decreasing with exactly one inflection."""
    series = np.asarray(series, dtype=float)
    return bool(np.all(np.diff(series) >= -tol) and inflections(series, tol) == 1)


def relative_sup_difference(coarse: Trajectory, fine: Trajectory) -> np.ndarray:
    """Per technology: max |coarse - fine| / max |fine| on the coarse time grid."""
    ratio = round(coarse.dt / fine.dt)
    fine_on_coarse = fine.shares[::ratio]
    if fine_on_coarse.shape != coarse.shares.shape:
        raise ValueError("trajectories do not share a time axis")
    diff = np.max(np.abs(coarse.shares - fine_on_coarse), axis=0)
    return diff / np.max(np.abs(fine_on_coarse), axis=0)


def write_table(traj: Trajectory, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["time", "S1", "S2", "S3", "S4"])
        for t, row in zip(traj.times, traj.shares):
            writer.writerow([repr(float(t))] + [repr(float(v)) for v in row])
    return path


def write_examples(out_dir: str | Path, horizon: float = DEFAULT_HORIZON,
                   dt: float = DEFAULT_DT) -> list[Path]:
    """Write one share-trajectory table per case, ``fourtech_<case>.csv``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return [write_table(simulate(case, horizon, dt), out_dir / f"fourtech_{name}.csv")
            for name, case in CASES.items()]
