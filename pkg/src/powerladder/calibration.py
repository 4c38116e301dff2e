"""Calibrate the time-scaling constant K of the substitution frequencies.

K is chosen so that a technology with a 10:1 preference advantage over an
incumbent of the same lifetime (40 y) and build time (4 y) takes its share
from 1% to 99% in 50 years. For two technologies the shares equation is a
logistic with rate A (2F - 1), so K has a closed form; :func:`calibrate`
finds the same value by root-finding on simulated Euler trajectories.

Run ``python3 -m powerladder.calibration`` to print both.
"""

from __future__ import annotations

import argparse
import math

import numpy as np
from scipy.optimize import brentq

from .dynamics import frequency_matrix, shares_step

TARGET_YEARS = 50.0
ODDS = 10.0
LIFETIME = 40.0
BUILD_TIME = 4.0
START_SHARE = 0.01
END_SHARE = 0.99


def _preference(odds: float) -> float:
    return odds / (1.0 + odds)


def analytic_K(target: float = TARGET_YEARS, odds: float = ODDS, lifetime: float = LIFETIME,
               build_time: float = BUILD_TIME, start: float = START_SHARE,
               end: float = END_SHARE) -> float:
    """Closed-form K for a logistic changeover from ``start`` to ``end``."""
    logit = math.log(end / (1 - end)) - math.log(start / (1 - start))
    return logit * lifetime * build_time / (target * (2 * _preference(odds) - 1))


def changeover_time(K: float, odds: float = ODDS, lifetime: float = LIFETIME,
                    build_time: float = BUILD_TIME, dt: float = 0.01,
                    start: float = START_SHARE, end: float = END_SHARE,
                    max_years: float = 2000.0) -> float:
    """Years for the favoured technology to go from ``start`` to ``end`` share.

    The crossing time is interpolated linearly between Euler steps.
    """
    f = _preference(odds)
    pref = np.array([[0.5, f], [1 - f, 0.5]])
    freq = frequency_matrix([lifetime, lifetime], [build_time, build_time], K)
    shares = np.array([start, 1 - start])
    t = 0.0
    while t < max_years:
        new = shares_step(shares, pref, freq, None, dt)
        if new[0] >= end:
            return t + dt * (end - shares[0]) / (new[0] - shares[0])
        shares, t = new, t + dt
    raise ValueError(f"no changeover within {max_years} years")


def calibrate(target: float = TARGET_YEARS, dt: float = 0.01, **kwargs) -> float:
    """K for which :func:`changeover_time` equals ``target`` years."""
    guess = analytic_K(target, **{k: v for k, v in kwargs.items()
                                  if k in ("odds", "lifetime", "build_time")})
    return brentq(lambda k: changeover_time(k, dt=dt, **kwargs) - target,
                  0.5 * guess, 2.0 * guess, xtol=1e-10)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="python3 -m powerladder.calibration",
                                     description=__doc__.splitlines()[0])
    parser.add_argument("--years", type=float, default=TARGET_YEARS, help="changeover time")
    parser.add_argument("--odds", type=float, default=ODDS, help="preference odds")
    parser.add_argument("--dt", type=float, default=0.01, help="Euler step for the numeric fit")
    args = parser.parse_args(argv)
    print(f"analytic K = {analytic_K(args.years, args.odds):.6f}")
    print(f"numeric  K = {calibrate(args.years, dt=args.dt, odds=args.odds):.6f} (dt={args.dt})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
