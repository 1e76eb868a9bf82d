"""Monte Carlo verification of the large-deviation rates.

Naive and importance-sampled estimators of -(1/t) log P(event) for counting
and cumulative-reward events. The light-regime sampler tilts the first
T_t = ceil(m (1+pad) t) inter-arrivals and reweights by exact likelihood
ratios over the consumed draws; the heavy-regime sampler adds one macroscopic
inter-arrival (the cheapest mechanism in the affine regime) through a 50/50
mixture proposal whose likelihood ratio stays exact, hence unbiased.

Head padding is fixed at 0.05: the tilted head must almost surely cover the
horizon, and 5% balances weight variance against coverage. Paths whose head
runs out are continued with draws from the base law; weights stay exact
because the ratio only involves consumed head draws.
"""

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import CheckError, DomainError, InfeasibleTargetError, LawParseError
from .functions import BoundedFunction, PiecewiseLinear
from .laws import WaitingLaw
from .ratefn import solve_tilt_for_mean, rate_JF, log_laplace, _conjugate_sup_bound
from .numerics import maximize_concave
from scipy.optimize import brentq

NAIVE = "NAIVE"
TILT = "TILT"
TILT_BIG_JUMP = "TILT_BIG_JUMP"

COUNT_BAND = "COUNT_BAND"
COUNT_UPPER = "COUNT_UPPER"
CUMUL_BAND = "CUMUL_BAND"

DELTA_PAD = 0.05


@dataclass(frozen=True)
class Event:
    kind: str
    m: float
    delta: Optional[float] = None

    def __post_init__(self):
        if self.kind not in (COUNT_BAND, COUNT_UPPER, CUMUL_BAND):
            raise ValueError(f"unknown event kind {self.kind}")
        if self.m < 0:
            raise ValueError("event center must be nonnegative")
        if self.kind != COUNT_UPPER and not (self.delta is not None and self.delta > 0):
            raise ValueError("band events need a positive half-width")


def parse_event(text):
    """count:m:delta | countup:m | cumul:m:delta"""
    parts = text.split(":")
    try:
        if parts[0] == "count" and len(parts) == 3:
            return Event(COUNT_BAND, float(parts[1]), float(parts[2]))
        if parts[0] == "countup" and len(parts) == 2:
            return Event(COUNT_UPPER, float(parts[1]))
        if parts[0] == "cumul" and len(parts) == 3:
            return Event(CUMUL_BAND, float(parts[1]), float(parts[2]))
    except ValueError as exc:
        raise LawParseError(f"bad event spec {text!r}: {exc}") from None
    raise LawParseError(f"bad event spec {text!r}")


@dataclass(frozen=True)
class LdpEstimate:
    t: float
    event: Event
    p_hat: float
    std_err: float
    rate_hat: float
    n_samples: int
    sampler: str
    censored: bool = False

    def csv_row(self):
        d = "" if self.event.delta is None else f"{self.event.delta:.12g}"
        return (f"{self.t:.12g},{self.event.kind},{self.event.m:.12g},{d},"
                f"{self.sampler},{self.n_samples},{self.p_hat:.12g},"
                f"{self.std_err:.12g},{self.rate_hat:.12g},{int(self.censored)}")


ESTIMATE_CSV_HEADER = "t,kind,m,delta,sampler,n,p_hat,std_err,rate_hat,censored"


# --------------------------------------------------------------------------
# vectorized path batches

@dataclass
class BatchResult:
    n_t: np.ndarray
    s_before: np.ndarray
    tau_last: np.ndarray
    logw: np.ndarray
    c_t: Optional[np.ndarray] = None
    g_acc: Optional[np.ndarray] = None
    records: Optional[list] = None


def run_batch(law, t, n, rng, head_law=None, head_count=0,
              head_ratio=None, jump_s=None, F=None, g_fn=None, record=False):
    """Simulate n paths in vectorized rounds (one draw per active path).

    head_law supplies the first head_count inter-arrivals; each consumed head
    draw multiplies the weight by head_ratio(tau), the log of the base/proposal
    density ratio. jump_s forces, for a fair-coin half of the paths, the
    (head_count+1)-th inter-arrival to come from the law conditioned on
    tau > jump_s; the mixture likelihood ratio is applied exactly.
    """
    S = np.zeros(n)
    N = np.zeros(n, dtype=np.int64)
    logw = np.zeros(n)
    s_before = np.zeros(n)
    tau_last = np.zeros(n)
    c_t = np.zeros(n) if F is not None else None
    g_acc = np.zeros(n) if g_fn is not None else None
    active = np.ones(n, dtype=bool)
    records = [{"taus": []} for _ in range(n)] if record else None

    if jump_s is not None:
        sf_s = law.sf(jump_s)
        if sf_s <= 0.0:
            from .errors import TailSamplingError
            raise TailSamplingError(f"no tail mass beyond s={jump_s}")
        take_jump = rng.random(n) < 0.5
        jump_seen = np.zeros(n, dtype=bool)
        jump_tau = np.zeros(n)

    slot = 0
    while active.any():
        slot += 1
        idx = np.flatnonzero(active)
        k = idx.size
        if head_law is not None and slot <= head_count:
            tau = np.atleast_1d(head_law.sample(rng, k)).astype(float)
            logw[idx] += head_ratio(tau)
        elif jump_s is not None and slot == head_count + 1:
            tau = np.empty(k)
            jm = take_jump[idx]
            if jm.any():
                tau[jm] = law.sample_conditional_tail(jump_s, rng, int(jm.sum()))
            if (~jm).any():
                tau[~jm] = np.atleast_1d(law.sample(rng, int((~jm).sum())))
            jump_seen[idx] = True
            jump_tau[idx] = tau
        else:
            tau = np.atleast_1d(law.sample(rng, k)).astype(float)

        if record:
            for j, ii in enumerate(idx):
                records[ii]["taus"].append(float(tau[j]))

        s_new = S[idx] + tau
        S[idx] = s_new
        N[idx] += 1
        done = s_new > t
        done_idx = idx[done]
        s_before[done_idx] = s_new[done] - tau[done]
        tau_last[done_idx] = tau[done]
        active[done_idx] = False
        live = ~done
        if live.any():
            live_idx = idx[live]
            if F is not None:
                c_t[live_idx] += np.asarray(F(tau[live]), dtype=float)
            if g_fn is not None:
                g_acc[live_idx] += tau[live] * np.asarray(g_fn(tau[live]), dtype=float)

    if jump_s is not None:
        rho1 = np.where(jump_seen,
                        np.where(jump_tau > jump_s, 1.0 / sf_s, 0.0),
                        1.0)
        logw += np.log(2.0) - np.log1p(rho1)

    if record:
        for r in records:
            r["taus"] = np.array(r["taus"])
    return BatchResult(n_t=N, s_before=s_before, tau_last=tau_last, logw=logw,
                       c_t=c_t, g_acc=g_acc, records=records)


def _pool(weighted_hits, n, t, event, sampler):
    p_hat = float(np.sum(weighted_hits) / n)
    var = float(np.sum(weighted_hits ** 2) / n - p_hat ** 2)
    std_err = math.sqrt(max(var, 0.0) / n)
    censored = not np.any(weighted_hits > 0.0)
    rate = -math.log(max(p_hat, 1.0 / n)) / t
    return LdpEstimate(t=t, event=event, p_hat=p_hat, std_err=std_err,
                       rate_hat=rate, n_samples=n, sampler=sampler, censored=censored)


def _band_hits(x, m, delta):
    return (x >= m - delta) & (x <= m + delta)


# --------------------------------------------------------------------------
# estimators

def naive_ldp(law, event, t, n, rng):
    """Direct frequency estimate of the event probability over n paths."""
    if n < 1000:
        raise ValueError("need n >= 1000")
    n = int(n)
    if event.kind == COUNT_UPPER:
        w = _sum_lower_tail_weights(law, event.m, t, n, rng)
        p_hat = float(w.mean())
        std_err = math.sqrt(p_hat * (1.0 - p_hat) / n)
        return LdpEstimate(t=t, event=event, p_hat=p_hat, std_err=std_err,
                           rate_hat=-math.log(max(p_hat, 1.0 / n)) / t,
                           n_samples=n, sampler=NAIVE, censored=not w.any())
    if event.kind == CUMUL_BAND:
        raise ValueError("use cumulative_ldp for reward events")
    res = run_batch(law, t, n, rng)
    hits = _band_hits(res.n_t / t, event.m, event.delta)
    p_hat = float(hits.mean())
    std_err = math.sqrt(p_hat * (1.0 - p_hat) / n)
    return LdpEstimate(t=t, event=event, p_hat=p_hat, std_err=std_err,
                       rate_hat=-math.log(max(p_hat, 1.0 / n)) / t,
                       n_samples=n, sampler=NAIVE, censored=not hits.any())


def _sum_lower_tail_weights(law, m, t, n, rng, tilt_c=None):
    """Weighted hit vector for P(N_t/t >= m) = P(S_{ceil(mt)-1} <= t),
    estimated on the i.i.d. sum directly (no path machinery)."""
    j = int(math.ceil(m * t))
    k = j - 1
    if k <= 0:
        return np.ones(n)
    S = np.zeros(n)
    logw = np.zeros(n)
    if tilt_c is not None:
        proposal = law.tilt(tilt_c)
        lm = law.log_mgf(tilt_c)
        for _ in range(k):
            tau = np.atleast_1d(proposal.sample(rng, n)).astype(float)
            S += tau
            logw += lm - tilt_c * tau
        return np.where(S <= t, np.exp(logw), 0.0)
    for _ in range(k):
        S += np.atleast_1d(law.sample(rng, n)).astype(float)
    return (S <= t).astype(float)


def is_ldp_light(law, event, t, n, rng, delta_pad=DELTA_PAD):
    """Importance sampling in the strictly convex regime: tilted head draws.

    The head law is the exponential tilt whose mean is 1/m; each consumed head
    draw carries the exact ratio mgf(c) e^{-c tau}, so the estimator is
    unbiased for every t and n.
    """
    if n < 1000:
        raise ValueError("need n >= 1000")
    n = int(n)
    if event.kind == CUMUL_BAND:
        raise ValueError("use cumulative_ldp for reward events")
    if event.kind == COUNT_UPPER:
        k = max(int(math.ceil(event.m * t)) - 1, 1)
        try:
            c = solve_tilt_for_mean(law, t / k)
        except InfeasibleTargetError as exc:
            raise InfeasibleTargetError(
                f"upper-count tilt infeasible ({exc})") from None
        w = _sum_lower_tail_weights(law, event.m, t, n, rng, tilt_c=c)
        return _pool(w, n, t, event, TILT)
    try:
        c = solve_tilt_for_mean(law, 1.0 / event.m)
    except InfeasibleTargetError as exc:
        raise InfeasibleTargetError(
            f"tilt for mean 1/m={1.0 / event.m} infeasible ({exc}): "
            "affine regime, use is_ldp_heavy") from None
    head = law.tilt(c)
    lm = law.log_mgf(c)
    T_t = int(math.ceil(event.m * (1.0 + delta_pad) * t))
    res = run_batch(law, t, n, rng, head_law=head, head_count=T_t,
                    head_ratio=lambda tau: lm - c * tau)
    hits = _band_hits(res.n_t / t, event.m, event.delta)
    w = np.where(hits, np.exp(res.logw), 0.0)
    return _pool(w, n, t, event, TILT)


def is_ldp_heavy(law, event, t, n, rng):
    """Importance sampling in the affine regime (m < 1/T, heavy-tailed law).

    Proposal: ceil(T m t) head draws from the near-critical tilt, then with
    probability 1/2 one inter-arrival from the law conditioned on
    tau > (1 - T m) t (the single big jump carrying the (1 - alpha) xi cost).
    The 50/50 mixture keeps the proposal's support full, so the likelihood
    ratio is exact and the estimator unbiased.
    """
    if n < 1000:
        raise ValueError("need n >= 1000")
    n = int(n)
    if event.kind != COUNT_BAND:
        raise ValueError("the big-jump sampler handles counting bands")
    xi = law.xi
    T = law.t_limit()
    if not (xi < math.inf and T < math.inf):
        raise DomainError("needs a heavy-tailed law: finite abscissa and finite T")
    if not event.m * T < 1.0:
        raise InfeasibleTargetError(
            f"m={event.m} is not below 1/T={1.0 / T}: use is_ldp_light")
    c_k = xi - 2.0 ** -40 * max(1.0, xi)
    head = law.tilt(c_k)
    lm = law.log_mgf(c_k)
    H = int(math.ceil(T * event.m * t))
    s = (1.0 - T * event.m) * t
    res = run_batch(law, t, n, rng, head_law=head, head_count=H,
                    head_ratio=lambda tau: lm - c_k * tau, jump_s=s)
    hits = _band_hits(res.n_t / t, event.m, event.delta)
    w = np.where(hits, np.exp(res.logw), 0.0)
    return _pool(w, n, t, event, TILT_BIG_JUMP)


def _reward_tilt_params(law, F, m):
    """Optimizer (x*, y*) of the reward rate's dual: the sampling change of
    measure e^{x tau + y F} psi is exactly normalized at the optimum."""
    x_hi = _conjugate_sup_bound(law)

    def lam(x, y):
        return log_laplace(law, F, x, y)

    def x_star(y):
        if x_hi is not None and lam(x_hi, y) <= 0.0:
            return x_hi
        g = lambda x: max(lam(x, y), -1e300)
        a, step = min(0.0, x_hi) if x_hi is not None else 0.0, 1.0
        while g(a) > 0.0:
            a -= step
            step *= 2.0
            if step > 2.0 ** 200:
                raise DomainError("log-Laplace never becomes negative")
        if x_hi is not None:
            b = x_hi
        else:
            b, step = max(a, 0.0), 1.0
            while g(b) < 0.0:
                b += step
                step *= 2.0
                if step > 2.0 ** 200:
                    raise DomainError("log-Laplace never becomes positive")
        return brentq(g, a, b, xtol=1e-13)

    y_opt, val = maximize_concave(lambda y: x_star(y) + m * y, x0=0.0)
    if val == math.inf:
        raise InfeasibleTargetError(f"reward level m={m} has infinite rate")
    if not np.isfinite(y_opt):
        raise InfeasibleTargetError("no finite tilt parameters at this level")
    x_opt = x_star(y_opt)
    if lam(x_opt, y_opt) < -1e-9:
        raise InfeasibleTargetError(
            "reward level sits in the affine regime: no normalized tilt exists")
    return x_opt, y_opt


def cumulative_ldp(law, F, event, t, n, rng, sampler=NAIVE, delta_pad=DELTA_PAD):
    """Estimator for reward events C_t/t in a band around m.

    Constant F == K reduces exactly to counting (C_t = K (N_t - 1)) and is
    delegated on identical seeds. For the tilted sampler with general F the
    head draws come from the two-moment exponential-family member matched to
    the rate's minimizing tilt.
    """
    if event.kind != CUMUL_BAND:
        raise ValueError("cumulative_ldp needs a CUMUL_BAND event")
    if n < 1000:
        raise ValueError("need n >= 1000")
    n = int(n)
    if isinstance(F, BoundedFunction) and F.constant is not None:
        K = F.constant
        count_event = Event(COUNT_BAND, event.m / K + 1.0 / t, event.delta / K)
        if sampler == NAIVE:
            out = naive_ldp(law, count_event, t, n, rng)
        elif sampler == TILT:
            out = is_ldp_light(law, count_event, t, n, rng, delta_pad=delta_pad)
        elif sampler == TILT_BIG_JUMP:
            out = is_ldp_heavy(law, count_event, t, n, rng)
        else:
            raise ValueError(f"unknown sampler {sampler}")
        return replace(out, event=event)

    if sampler == NAIVE:
        res = run_batch(law, t, n, rng, F=F)
        hits = _band_hits(res.c_t / t, event.m, event.delta)
        p_hat = float(hits.mean())
        std_err = math.sqrt(p_hat * (1.0 - p_hat) / n)
        return LdpEstimate(t=t, event=event, p_hat=p_hat, std_err=std_err,
                           rate_hat=-math.log(max(p_hat, 1.0 / n)) / t,
                           n_samples=n, sampler=NAIVE, censored=not hits.any())
    if sampler != TILT:
        raise ValueError("reward events support NAIVE and TILT samplers "
                         "(big-jump proposals are only built for counting)")
    x, y = _reward_tilt_params(law, F, event.m)
    head = _RewardTilt(law, F, x, y)
    from .ratefn import _tilted_moment_block
    _, mean_tau, _, _ = _tilted_moment_block(law, F, x, y)
    T_t = int(math.ceil((1.0 + delta_pad) * t / mean_tau))
    res = run_batch(law, t, n, rng, head_law=head, head_count=T_t,
                    head_ratio=lambda tau: -(x * tau + y * np.asarray(F(tau), float)),
                    F=F)
    hits = _band_hits(res.c_t / t, event.m, event.delta)
    w = np.where(hits, np.exp(res.logw), 0.0)
    return _pool(w, n, t, event, TILT)


class _RewardTilt:
    """Sampling adapter for e^{x tau + y F(tau)} psi(d tau) (normalized)."""

    def __init__(self, law, F, x, y):
        self.base_tilt = law.tilt(x) if x != 0.0 else law
        self.F = F
        self.y = y
        self.bound = F.bound

    def sample(self, rng, size=None):
        scalar = size is None
        m = 1 if scalar else int(size)
        out = np.empty(m)
        filled = 0
        top = max(self.y, 0.0) * self.bound
        while filled < m:
            k = max(m - filled, 256)
            tau = np.atleast_1d(self.base_tilt.sample(rng, k)).astype(float)
            acc = rng.random(k) < np.exp(self.y * np.asarray(self.F(tau), float) - top)
            take = tau[acc][: m - filled]
            out[filled:filled + take.size] = take
            filled += take.size
        return float(out[0]) if scalar else out


# --------------------------------------------------------------------------
# free-energy and tightness checks

@dataclass
class FreeEnergyReport:
    law_spec: str
    c: float
    M: float
    c_f: float
    d_f: float
    bound: float
    rows: list  # (t, estimate, std_err, ok)
    passed: bool

    def to_dict(self):
        return {
            "law": self.law_spec, "c": self.c, "M": self.M,
            "C_f": self.c_f, "D_f": self.d_f, "bound": self.bound,
            "estimates": [
                {"t": t, "estimate": e, "std_err": s, "pass": bool(ok)}
                for t, e, s, ok in self.rows],
            "pass": bool(self.passed),
        }


def _cf_integral(law, c, phi, M):
    pts = list(phi.breakpoints) + [M]

    def logw(tau):
        tau = np.asarray(tau, float)
        return np.asarray(phi(tau), float) + c * tau * (tau > M)

    return law.integrate_logweight(logw, points=pts,
                                   assume_finite=(c < law.xi or c <= 0.0))


def free_energy_check(law, c, phi: PiecewiseLinear, M, t_list, n, rng):
    """Verify the free-energy moment bound sup_t E e^{t mu_t(f)} <= D_f/(1-C_f)
    for f(a,b) = phi(a+b)/(a+b) + c 1{a+b > M}.

    C_f and D_f come from quadrature (D_f with a grid-plus-refine sup over s);
    MC estimates at each t in t_list must sit below the bound within 3 SE.
    M=None scans doubling M values for the smallest cutoff with C_f < 1.
    """
    if not isinstance(phi, PiecewiseLinear):
        raise CheckError("phi must be a compactly supported piecewise-linear function")
    if not (c < law.xi or c == 0.0):
        raise CheckError(f"need c < xi (= {law.xi}) or c = 0")
    if M is None:
        M = 1.0
        while _cf_integral(law, c, phi, M) >= 1.0:
            M *= 2.0
            if M > 2.0 ** 40:
                raise CheckError("no cutoff M with C_f < 1 found")
    c_f = _cf_integral(law, c, phi, M)
    if not c_f < 1.0:
        raise CheckError(f"C_f = {c_f} >= 1: f is outside the admissible class")

    def tail_integral(s):
        def logw(tau):
            tau = np.asarray(tau, float)
            return (s / tau) * (np.asarray(phi(tau), float) + c * tau * (tau > M))

        return law.integrate_logweight(
            logw, factor_fn=lambda tau: (np.asarray(tau, float) > s).astype(float),
            points=list(phi.breakpoints) + [M, s],
            assume_finite=(c < law.xi or c <= 0.0))

    s_hi = 4.0 * max(M, phi.breakpoints[-1], 1.0)
    grid = np.concatenate([[1e-9], np.geomspace(1e-3, s_hi, 120)])
    vals = [tail_integral(s) for s in grid]
    k = int(np.argmax(vals))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, len(grid) - 1)]
    from .numerics import golden_max
    _, refined = golden_max(tail_integral, lo, hi, width_tol=1e-6 * max(1.0, hi))
    d_f = max(max(vals), refined)
    bound = d_f / (1.0 - c_f)

    def g_fn(tau):
        tau = np.asarray(tau, float)
        return np.asarray(phi(tau), float) / tau + c * (tau > M)

    rows = []
    ok_all = True
    for t in t_list:
        res = run_batch(law, float(t), int(n), rng, g_fn=g_fn)
        exponent = res.g_acc + (t - res.s_before) * np.asarray(g_fn(res.tau_last), float)
        x = np.exp(exponent)
        est = float(x.mean())
        se = float(x.std(ddof=1) / math.sqrt(len(x)))
        ok = est <= bound + 3.0 * se
        ok_all &= ok
        rows.append((float(t), est, se, ok))
    return FreeEnergyReport(law_spec=law.spec(), c=c, M=M, c_f=c_f, d_f=d_f,
                            bound=bound, rows=rows, passed=ok_all)


@dataclass
class TightnessReport:
    law_spec: str
    c0: float
    rows: list  # (M, t, freq, std_err, bound, ok)
    passed: bool

    def to_dict(self):
        return {
            "law": self.law_spec, "c0": self.c0,
            "cells": [
                {"M": M, "t": t, "freq": f, "std_err": s, "bound": b, "pass": bool(ok)}
                for M, t, f, s, b, ok in self.rows],
            "pass": bool(self.passed),
        }


def tightness_check(law, M_list, t_list, n, rng):
    """Exponential-tightness bound: the frequency of mu_t(1/(a+b)) > M must
    stay below e^{t + floor(Mt) log c0} (+3 SE), c0 = mgf(-1)."""
    c0 = law.mgf(-1.0)
    rows = []
    ok_all = True
    for t in t_list:
        res = run_batch(law, float(t), int(n), rng)
        mu_inv = (res.n_t - 1) / t + (t - res.s_before) / (t * res.tau_last)
        for M in M_list:
            freq = float((mu_inv > M).mean())
            se = math.sqrt(freq * (1.0 - freq) / n)
            bound = math.exp(min(t + math.floor(M * t) * math.log(c0), 700.0))
            ok = freq <= bound + 3.0 * se
            ok_all &= ok
            rows.append((float(M), float(t), freq, se, bound, ok))
    return TightnessReport(law_spec=law.spec(), c0=c0, rows=rows, passed=ok_all)
