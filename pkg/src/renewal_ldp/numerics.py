"""Shared numeric kernels: golden-section search, concave maximization with
bracketing by doubling, and a divergence-aware quadrature engine for integrals
of nonnegative functions over (0, inf).

The quadrature engine maps (0, inf) to (0, 1) through u = tau/(1+tau) and, before
integrating, scans dyadic blocks [2^k, 2^{k+1}]: when eight consecutive blocks
fail to decay the integral is declared divergent (+inf). This keeps heavy-tailed
integrands honest without symbolic analysis.
"""

import math

import numpy as np
from scipy import integrate

from .errors import BracketError, QuadratureError

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

#: value above which a maximization along an unbounded direction is declared +inf
GROWTH_CAP = 1e12


def golden_max(h, lo, hi, width_tol=1e-12, max_iter=300):
    """Maximize a unimodal function on [lo, hi] by golden-section search.

    Returns (argmax, value). Derivative-free on purpose: the objectives this
    serves (tilted log-moment maps) have derivatives that blow up near the
    admissible boundary.
    """
    a, b = float(lo), float(hi)
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = h(x1), h(x2)
    it = 0
    while (b - a) > width_tol and it < max_iter:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_PHI * (b - a)
            f1 = h(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (b - a)
            f2 = h(x2)
        it += 1
    # include the original endpoints, the max may sit on a closed boundary
    cands = [(a, h(a)), (b, h(b)), (x1, f1), (x2, f2)]
    return max(cands, key=lambda p: p[1])


def maximize_concave(h, lo=None, hi=None, x0=0.0, step=1.0,
                     growth_cap=GROWTH_CAP, plateau_tol=1e-12,
                     width_scale=1e-12):
    """Maximize a concave function h over the interval (lo, hi).

    Either end may be None (unbounded). The maximum is bracketed by doubling
    steps away from x0, then refined by golden section to a width of
    width_scale * max(1, |x|).

    Returns (argmax, value). Two special outcomes:
      * (nan, +inf): h exceeded growth_cap along an unbounded direction, the
        supremum is declared infinite;
      * plateau: h keeps increasing toward an unbounded end but with vanishing
        increments; the last probe point is returned (the sup is a finite limit
        that is not attained).
    Raises BracketError when h is -inf everywhere it was probed.
    """
    if lo is not None and hi is not None and lo > hi:
        raise BracketError(f"empty interval ({lo}, {hi})")
    x0 = float(x0)
    if lo is not None:
        x0 = max(x0, lo)
    if hi is not None:
        x0 = min(x0, hi)

    f0 = h(x0)
    if not np.isfinite(f0) and f0 != -math.inf:
        raise BracketError(f"objective not finite at start point {x0}")

    def walk(direction):
        # returns (points, values, verdict) with verdict in
        # {"turned", "capped", "plateau", "unbounded"}
        # A finite bound is approached geometrically rather than jumped onto:
        # objectives are often expensive or wild exactly at the boundary, and
        # an interior turn makes that evaluation unnecessary.
        bound = hi if direction > 0 else lo
        xs, fs = [x0], [f0]
        s = step
        halving = bound is not None and x0 == bound
        for _ in range(260):
            if halving:
                gap = bound - xs[-1]
                if abs(gap) <= 1e-14 * max(1.0, abs(bound)):
                    x = bound
                else:
                    x = xs[-1] + 0.5 * gap
            else:
                x = x0 + direction * s
                s *= 2.0
                if bound is not None and (x - bound) * direction >= 0.0:
                    halving = True
                    x = xs[-1] + 0.5 * (bound - xs[-1])
            f = h(x)
            xs.append(x)
            fs.append(f)
            if f > growth_cap and bound is None:
                return xs, fs, "unbounded"
            if f < fs[-2]:
                return xs, fs, "turned"
            if x == bound:
                return xs, fs, "capped"
            if 0.0 <= f - fs[-2] < plateau_tol * max(1.0, abs(f)):
                return xs, fs, "plateau"
        return xs, fs, "plateau"

    xr, fr, vr = walk(+1.0)
    if vr == "unbounded":
        return math.nan, math.inf
    xl, fl, vl = walk(-1.0)
    if vl == "unbounded":
        return math.nan, math.inf

    # triple around the best probe
    xs = xl[::-1] + xr[1:]
    fs = fl[::-1] + fr[1:]
    k = int(np.argmax(fs))
    a = xs[max(k - 1, 0)]
    b = xs[min(k + 1, len(xs) - 1)]
    if a == b:
        return xs[k], fs[k]
    if a > b:
        a, b = b, a
    xm = 0.5 * (a + b)
    x_best, f_best = golden_max(h, a, b, width_tol=width_scale * max(1.0, abs(xm)))
    if fs[k] > f_best:
        return xs[k], fs[k]
    return x_best, f_best


def expand_root_bracket(g, x0=0.0, step=1.0, lo=None, hi=None, max_doubling=200):
    """Find [a, b] with g(a) < 0 < g(b) for an increasing function g.

    Either bound may be a hard cap; returns the cap itself as the bracket end
    when g stays on one side all the way to it (caller decides what a capped
    bracket means). Returns (a, b, capped_low, capped_high).
    """
    x0 = float(x0)
    if lo is not None:
        x0 = max(x0, lo)
    if hi is not None:
        x0 = min(x0, hi)
    g0 = g(x0)
    if g0 == 0.0:
        return x0, x0, False, False
    if g0 < 0:
        a, ga = x0, g0
        s = step
        for _ in range(max_doubling):
            b = x0 + s
            capped = hi is not None and b >= hi
            if capped:
                b = hi
            gb = g(b)
            if gb > 0:
                return a, b, False, False
            if gb == 0.0:
                return b, b, False, False
            a, ga = b, gb
            if capped:
                return a, b, False, True
            s *= 2.0
        raise BracketError("no sign change while expanding right")
    else:
        b, gb = x0, g0
        s = step
        for _ in range(max_doubling):
            a = x0 - s
            capped = lo is not None and a <= lo
            if capped:
                a = lo
            ga = g(a)
            if ga < 0:
                return a, b, False, False
            if ga == 0.0:
                return a, a, False, False
            b, gb = a, ga
            if capped:
                return a, b, True, False
            s *= 2.0
        raise BracketError("no sign change while expanding left")


def _quad(fn, a, b, rel_tol, points=None):
    kw = {"epsabs": 0.0, "epsrel": rel_tol, "limit": 400}
    if points:
        pts = sorted(p for p in points if a < p < b)
        if pts:
            kw["points"] = pts
    with np.errstate(over="ignore", invalid="ignore"):
        val, err = integrate.quad(fn, a, b, **kw)
    return val, err


# consecutive dyadic blocks that must fail to decay before declaring divergence
_DIVERGENCE_RUN = 8


def tail_is_divergent(fn, start=1.0, max_k=80):
    """Scan dyadic blocks of a nonnegative integrand for failure to decay.

    Returns True when _DIVERGENCE_RUN consecutive block integrals are
    non-decreasing (or any is infinite/overflowing), the signature of an
    integrand whose tail grows against the measure's decay. The scan runs the
    whole dyadic range: integrands like e^{c tau} * stretched-exponential dip
    before the growth revives, so an early exit at the dip would lie.
    """
    k0 = max(0, int(math.floor(math.log2(max(start, 1.0)))))
    prev = None
    run = 0
    for k in range(k0, max_k):
        a, b = 2.0 ** k, 2.0 ** (k + 1)
        if b <= start:
            continue
        a = max(a, start)
        try:
            blk, _ = _quad(fn, a, b, 1e-6)
        except Exception:
            return True
        if not np.isfinite(blk):
            return True
        if prev is not None:
            # blocks that underflowed to ~0 count as decay; a revival past
            # them registers because prev stays at the floor
            if blk >= prev and blk > 1e-250:
                run += 1
                if run >= _DIVERGENCE_RUN:
                    return True
            else:
                run = 0
        prev = blk
    return False


#: estimated relative error beyond which a finite integral is a hard failure
HARD_REL_ERR = 1e-5


def integrate_halfline(fn, lo=0.0, rel_tol=1e-10, points=None, check_divergence=True):
    """Integral of a nonnegative fn over (lo, inf), or +inf when divergent.

    The value is computed on (0,1) through u = tau/(1+tau); divergence is
    decided beforehand by the dyadic block scan. When the substituted
    quadrature is suspicious (negative value for a nonnegative integrand, or
    error estimate above 10x rel_tol) the integral is recomputed as a sum of
    dyadic pieces, which resolves nearly flat exponentials stretched over huge
    ranges where the one-shot substitution silently fails. A QuadratureError
    is raised only when the piecewise sum's (conservative) error estimate still
    exceeds HARD_REL_ERR.
    """
    lo = max(float(lo), 0.0)
    if check_divergence and tail_is_divergent(fn, start=max(lo, 1.0)):
        return math.inf

    def sub(u):
        t = u / (1.0 - u)
        return fn(t) / (1.0 - u) ** 2

    u_lo = lo / (1.0 + lo)
    u_pts = [p / (1.0 + p) for p in points] if points else None
    val, err = _quad(sub, u_lo, 1.0, rel_tol, points=u_pts)
    if not np.isfinite(val):
        return math.inf
    if val >= 0.0 and err <= max(rel_tol * val * 10.0, 1e-280):
        return val

    # piecewise retry over dyadic blocks
    edges = [lo] + [2.0 ** k for k in range(0, 64) if 2.0 ** k > lo]
    total, toterr = 0.0, 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        v, e = _quad(fn, a, b, rel_tol, points=points)
        total += v
        toterr += e
        if total > 0 and 0.0 <= v < 1e-16 * total:
            break
    else:
        a = edges[-1]
        v, e = _quad(sub, a / (1.0 + a), 1.0, rel_tol)
        total += v
        toterr += e
    if not np.isfinite(total):
        return math.inf
    if toterr > max(HARD_REL_ERR * abs(total), 1e-280):
        raise QuadratureError(
            f"relative tolerance {rel_tol} not reached (err {toterr:.3e}, value {total:.6e})")
    return total
