"""Tamed Euler-Maruyama particle simulation of neutral multiple-delay
McKean-Vlasov equations.

Step sizes, delays and horizons are exact rationals: pass ints, strings such
as "1/1024", "2^-10" or "0.05", or fractions.Fraction values.
"""

import json
from fractions import Fraction

from . import _nmv
from ._nmv import (
    ConfigError,
    DeltaOutOfRange,
    IncommensurableGrid,
    NmvError,
    NonFiniteState,
    builtin_names,
    moment_norm,
    standard_normal,
    tame_drift,
    wasserstein_1d,
    wasserstein_exact,
    wasserstein_sliced,
)

__all__ = [
    "ConfigError",
    "DeltaOutOfRange",
    "IncommensurableGrid",
    "NmvError",
    "NonFiniteState",
    "Report",
    "builtin_names",
    "chaos_study",
    "convergence_study",
    "fg_rate_check",
    "grid",
    "meanfield_oracle",
    "model_info",
    "moment_norm",
    "moment_sweep",
    "simulate",
    "standard_normal",
    "tame_drift",
    "wasserstein_1d",
    "wasserstein_exact",
    "wasserstein_sliced",
]


def _q(value):
    if isinstance(value, bool):
        raise TypeError("expected a rational, got bool")
    if isinstance(value, (int, Fraction)):
        return str(Fraction(value))
    if isinstance(value, float):
        return repr(value)  # parsed as an exact decimal; exponent forms are rejected
    return str(value)


def _params(params):
    return {str(k): str(v) for k, v in (params or {}).items()}


class Report:
    """Result of one experiment: the CSV text plus its metadata."""

    def __init__(self, raw):
        self.run_id = raw["run_id"]
        self.kind = raw["kind"]
        self.csv = raw["csv"]
        self.slope = raw["slope"]
        self.meta = json.loads(raw["sidecar"])

    @property
    def rows(self):
        lines = self.csv.strip().splitlines()
        header = lines[0].split(",")
        return [dict(zip(header, line.split(","))) for line in lines[1:]]

    def column(self, name):
        return [float(r[name]) for r in self.rows]

    def write(self, directory="."):
        import os

        os.makedirs(directory, exist_ok=True)
        path = os.path.join(directory, self.run_id)
        with open(path + ".csv", "w") as f:
            f.write(self.csv)
        with open(path + ".jsonl", "w") as f:
            f.write(json.dumps(self.meta) + "\n")
        return path + ".csv"

    def __repr__(self):
        return f"Report({self.run_id!r}, slope={self.slope})"


def model_info(name, params=None):
    return _nmv.model_info(name, _params(params))


def grid(model, T, delta, params=None, snap=None):
    return _nmv.grid(model, _params(params), _q(T), _q(delta), snap)


def simulate(model, T, delta, N=100, seed=1, gamma=0.5, tamed=True, params=None, snap=None, workers=1, ratio=1,
             trace=0):
    """Run the particle system; returns terminal states (N, d), per-particle
    sup norms and, with trace=P, the full paths of the first P particles."""
    return _nmv.simulate(model, _params(params), _q(T), _q(delta), gamma, tamed, N, seed, snap, workers, ratio, trace)


def convergence_study(model, T=4, N=500, finest=13, levels=(12, 11, 10, 9), seed=1, gamma=0.5, tamed=True,
                      params=None, snap=None, workers=1, timings=False):
    return Report(_nmv.convergence_study(model, _params(params), _q(T), gamma, tamed, N, finest, list(levels), seed,
                                         snap, workers, timings))


def chaos_study(model="linear", T=2, delta="2^-6", n_list=(64, 128, 256, 512, 1024), n_ref=4096, probes=64, p=2.0,
                seed=1, gamma=0.5, params=None, snap=None, workers=1, timings=False):
    return Report(_nmv.chaos_study(model, _params(params), _q(T), gamma, _q(delta), list(n_list), n_ref, probes, p,
                                   seed, snap, workers, timings))


def moment_sweep(model, deltas, seeds, T=4, N=200, p=2.0, gamma=0.5, tamed=True, params=None, snap=None, workers=1,
                 timings=False):
    return Report(_nmv.moment_sweep(model, _params(params), _q(T), gamma, tamed, [_q(d) for d in deltas], N, p,
                                    list(seeds), snap, workers, timings))


def fg_rate_check(n_list=tuple(2**k for k in range(5, 13)), sampler="normal", p=2.0, replications=20, seed=1,
                  reference_size=1_000_000, timings=False):
    return Report(_nmv.fg_rate_check(sampler, p, list(n_list), replications, seed, reference_size, timings))


def meanfield_oracle(params=None, T=2, delta="2^-10", N=2000, seed=1, gamma=0.5, workers=1, enforce=True,
                     timings=False):
    return Report(_nmv.meanfield_oracle(_params(params), _q(T), gamma, _q(delta), N, seed, workers, enforce, timings))
