"""Renewal trajectories and their path functionals.

A path stores the arrival epochs S_1 < ... < S_n covering a horizon t (the last
stored arrival strictly exceeds t). The path functionals are computed from the
exact segment decomposition of the time integral, never by time-discretization:
the empirical measure of the backward/forward recurrence pair integrates each
inter-arrival segment in closed 1D-quadrature form.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetError
from .functions import BivariateTestFunction
from .ratefn import DeltaMeasure

ARRIVAL_BUDGET = 10 ** 9


@dataclass(frozen=True)
class RenewalPath:
    arrivals: np.ndarray
    horizon: float

    def __post_init__(self):
        arr = np.asarray(self.arrivals, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "arrivals", arr)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("need at least one arrival")
        if arr[0] <= 0 or np.any(np.diff(arr) <= 0):
            raise ValueError("arrivals must be strictly increasing and positive")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if arr[-1] <= self.horizon:
            raise ValueError("last arrival must exceed the horizon")
        if arr.size >= 2 and arr[-2] > self.horizon:
            raise ValueError("only the last arrival may exceed the horizon")

    def inter_arrivals(self):
        return np.diff(self.arrivals, prepend=0.0)

    def to_csv(self):
        lines = ["index,arrival"]
        lines += [f"{i + 1},{s:.12g}" for i, s in enumerate(self.arrivals)]
        lines.append(f"# horizon={self.horizon:.12g}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RecurrencePair:
    backward: float
    forward: float


def simulate(law, t, rng, budget=ARRIVAL_BUDGET):
    """Draw inter-arrivals until the partial sum exceeds t; store all arrivals."""
    if not t > 0:
        raise ValueError("t must be positive")
    chunks = []
    total = 0.0
    n = 0
    chunk = 1024
    while True:
        draws = np.atleast_1d(law.sample(rng, chunk))
        s = total + np.cumsum(draws)
        chunks.append(s)
        n += chunk
        if s[-1] > t:
            break
        total = s[-1]
        if n > budget:
            raise BudgetError(f"more than {budget} arrivals needed to cover t={t}")
        chunk = min(2 * chunk, 1 << 22)
    arr = np.concatenate(chunks)
    stop = int(np.searchsorted(arr, t, side="right"))
    return RenewalPath(arrivals=arr[: stop + 1], horizon=float(t))


def counting(path: RenewalPath):
    """N_t: index of the first arrival strictly beyond the horizon."""
    return int(path.arrivals.size)


def recurrence(path: RenewalPath, s):
    """Backward/forward recurrence pair (A_s, B_s) at a time s in [0, horizon)."""
    if not 0.0 <= s < path.horizon:
        raise ValueError(f"s={s} outside [0, {path.horizon})")
    idx = int(np.searchsorted(path.arrivals, s, side="right"))
    prev = path.arrivals[idx - 1] if idx >= 1 else 0.0
    return RecurrencePair(backward=float(s - prev), forward=float(path.arrivals[idx] - s))


def empirical_integral(path: RenewalPath, f: BivariateTestFunction):
    """Time average of f(A_s, B_s) over [0, t), segment-exactly.

    Each completed inter-arrival tau contributes tau * int_0^1 f(u tau, (1-u) tau) du,
    the straddling one its truncated version; every inner integral is adaptive
    1D quadrature at 1e-10 relative tolerance.
    """
    t = path.horizon
    taus = path.inter_arrivals()
    acc = 0.0
    cache = {}
    for tau in taus[:-1]:
        key = float(tau)
        if key not in cache:
            cache[key] = f.bar(1.0, key)
        acc += tau * cache[key]
    tau_last = float(taus[-1])
    s_prev = float(path.arrivals[-2]) if path.arrivals.size >= 2 else 0.0
    r = (t - s_prev) / tau_last
    acc += tau_last * f.bar(r, tau_last)
    return acc / t


def delta_projection(path: RenewalPath):
    """The path's point in the rate functional's domain: mass split
    alpha = S_{N-1}/t with length-biased atoms at the completed inter-arrivals."""
    t = path.horizon
    if path.arrivals.size == 1:
        return DeltaMeasure.point_at_infinity()
    s_prev = float(path.arrivals[-2])
    taus = path.inter_arrivals()[:-1]
    return DeltaMeasure.from_atoms(s_prev / t, [(float(tau), float(tau) / s_prev) for tau in taus])


def cumulative(path: RenewalPath, F):
    """Total reward sum of F over completed inter-arrivals (0 when none)."""
    taus = path.inter_arrivals()[:-1]
    if taus.size == 0:
        return 0.0
    return float(np.sum(np.asarray(F(taus), dtype=float)))


@dataclass(frozen=True)
class PathSummary:
    """Streaming fold of one trajectory: no arrival array is materialized."""
    n_t: int
    s_before: float
    tau_last: float
    c_t: float


def simulate_summary(law, t, rng, F=None, budget=ARRIVAL_BUDGET):
    """Streaming variant of simulate + counting + cumulative for big-t loops."""
    if not t > 0:
        raise ValueError("t must be positive")
    total = 0.0
    n = 0
    c_t = 0.0
    chunk = 1024
    while True:
        draws = np.atleast_1d(law.sample(rng, chunk))
        s = total + np.cumsum(draws)
        k = int(np.searchsorted(s, t, side="right"))
        if k < chunk:
            if F is not None and k > 0:
                c_t += float(np.sum(np.asarray(F(draws[:k]), dtype=float)))
            n += k + 1
            s_before = float(s[k - 1]) if k >= 1 else total
            return PathSummary(n_t=n, s_before=s_before,
                               tau_last=float(draws[k]), c_t=c_t)
        if F is not None:
            c_t += float(np.sum(np.asarray(F(draws), dtype=float)))
        n += chunk
        total = float(s[-1])
        if n > budget:
            raise BudgetError(f"more than {budget} arrivals needed to cover t={t}")
        chunk = min(2 * chunk, 1 << 22)
