"""Rate functionals of the renewal empirical measure and its contractions.

Computes the one- and two-parameter convex conjugates of the log-Laplace map,
the contracted rate J_F of cumulative rewards, the closed two-regime formula
for counting (strictly convex above the critical slope 1/T, affine below it),
the measure-level functional I on mixtures of length-biased laws with mass at
infinity, entropy projections onto moment constraints, and the variational
form that exposes the affine regime's one-big-jump structure.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy import special
from scipy.integrate import quad_vec
from scipy.optimize import brentq

from .errors import DomainError, InfeasibleTargetError, MismatchError
from .functions import F_ONE, BivariateTestFunction, BoundedFunction
from .laws import Deterministic, DiscreteAtoms, WaitingLaw
from .numerics import GROWTH_CAP, golden_max, maximize_concave

STRICT_CONVEX = "STRICT_CONVEX"
AFFINE = "AFFINE"
ZERO = "ZERO"
INFEASIBLE = "INFEASIBLE"

#: value threshold below which a rate value counts as exactly zero
ZERO_TOL = 1e-9
#: scale-aware second-difference tolerance for affine labelling
AFFINE_TOL = 1e-6


# --------------------------------------------------------------------------
# measures on the compactified quadrant

@dataclass(frozen=True)
class DeltaMeasure:
    """A measure alpha * (length-biased part) + (1 - alpha) * (mass at infinity).

    The finite part is a length-biased law pi, encoded either as explicit
    atoms (tau_i, w_i) or as the length-biased version of an exponential tilt
    of a base law (the canonical finite-entropy form).
    """
    alpha: float
    atoms: Optional[tuple] = None
    base: Optional[WaitingLaw] = None
    c: Optional[float] = None

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha={self.alpha} outside [0, 1]")
        has_atoms = self.atoms is not None
        has_tilt = self.base is not None or self.c is not None
        if has_atoms and has_tilt:
            raise ValueError("give atoms or a tilt, not both")
        if not has_atoms and not has_tilt and self.alpha > 0.0:
            raise ValueError("a finite part is required when alpha > 0")
        if has_tilt:
            if self.base is None or self.c is None:
                raise ValueError("tilted form needs both base and c")
            if self.base.tilted_mean(self.c) == math.inf:
                raise ValueError(f"tilted mean diverges at c={self.c}: not in the domain")
        if has_atoms:
            w = sum(p[1] for p in self.atoms)
            if abs(w - 1.0) > 1e-12:
                raise ValueError(f"atom weights sum to {w}, not 1")
            if any(p[0] <= 0 or p[1] <= 0 for p in self.atoms):
                raise ValueError("atoms must have positive locations and weights")

    @classmethod
    def from_atoms(cls, alpha, pairs):
        merged = {}
        for t, w in pairs:
            merged[float(t)] = merged.get(float(t), 0.0) + float(w)
        total = sum(merged.values())
        atoms = tuple(sorted((t, w / total) for t, w in merged.items()))
        return cls(alpha=float(alpha), atoms=atoms)

    @classmethod
    def from_tilt(cls, alpha, base, c):
        return cls(alpha=float(alpha), base=base, c=float(c))

    @classmethod
    def point_at_infinity(cls):
        return cls(alpha=0.0)

    def pi_inv_tau(self):
        """pi(1/tau), the reciprocal of the tilted mean for the tilt form."""
        if self.atoms is not None:
            return sum(w / t for t, w in self.atoms)
        if self.base is not None:
            return 1.0 / self.base.tilted_mean(self.c)
        return 0.0

    def evaluate(self, f: BivariateTestFunction):
        """Integral of f against the measure (segment-averaged finite part)."""
        tail = (1.0 - self.alpha) * f.limit
        if self.alpha == 0.0:
            return tail
        if self.atoms is not None:
            fin = sum(w * f.bar(1.0, t) for t, w in self.atoms)
        else:
            tilted = self.base.tilt(self.c)
            tm = self.base.tilted_mean(self.c)
            fin = tilted.integrate(lambda t: t * f.bar(1.0, t), assume_finite=True) / tm
        return self.alpha * fin + tail


# --------------------------------------------------------------------------
# log-Laplace map and its conjugates

def _conjugate_sup_bound(law):
    """Upper end of the admissible x-range for conjugate suprema.

    The boundary xi itself is included when the mgf is still finite there
    (always the case for xi = 0 laws, where mgf(0) = 1); otherwise the range
    is capped just inside.
    """
    xi = law.xi
    if xi == math.inf:
        return None
    if law.log_mgf(xi) < math.inf:
        return xi
    return xi - 2.0 ** -40 * max(1.0, xi)


def log_laplace(law, F, x, y):
    """Lambda(x, y) = log E exp(x tau + y F(tau)); +inf when divergent."""
    if isinstance(F, BoundedFunction) and F.constant is not None:
        lm = law.log_mgf(x)
        return lm + y * F.constant if lm < math.inf else math.inf
    if isinstance(law, (DiscreteAtoms,)):
        vals = law.values
        return float(special.logsumexp(np.log(law.probs) + x * vals
                                       + y * np.asarray(F(vals), float)))
    if isinstance(law, Deterministic):
        return x * law.tau0 + y * float(F(law.tau0))
    finite = x < law.xi
    pts = list(getattr(F, "breakpoints", ()) or ())
    val = law.integrate_logweight(
        lambda t: x * np.asarray(t, float) + y * np.asarray(F(t), float),
        points=pts or None, assume_finite=finite)
    if val == math.inf:
        return math.inf
    if val <= 0.0:
        return -math.inf  # underflow of a positive integral: deep negative tilt
    return math.log(val)


def legendre_1d(law, a):
    """Convex conjugate sup_x {a x - log mgf(x)} over the admissible x-range.

    Outside the support hull the supremum grows without bound; at a hull
    endpoint it equals -log of the point mass there. Both cases are settled
    exactly (the numeric walk would otherwise chase a log-slow divergence).
    """
    if not a > 0:
        raise ValueError("a must be positive")
    lo_s, hi_s = law.support()
    if a < lo_s or a > hi_s:
        return math.inf
    if a == lo_s or a == hi_s:
        pm = law.point_mass(a)
        return -math.log(pm) if pm > 0.0 else math.inf
    hi = _conjugate_sup_bound(law)

    def h(x):
        lm = law.log_mgf(x)
        if not -math.inf < lm < math.inf:
            return -math.inf
        return a * x - lm

    _, val = maximize_concave(h, hi=hi, x0=0.0)
    return val + 0.0  # normalize -0.0


def _legendre_2d_argmax(law, F, a, b):
    hi = _conjugate_sup_bound(law)

    def phi(x, y):
        lam = log_laplace(law, F, x, y)
        if not -math.inf < lam < math.inf:
            return -math.inf
        return a * x + b * y - lam

    best = {"x": 0.0}

    def outer(y):
        x, v = maximize_concave(lambda x: phi(x, y), hi=hi, x0=best["x"])
        if v == math.inf:
            return math.inf
        best["x"] = x if np.isfinite(x) else 0.0
        return v

    y_star, val = maximize_concave(outer, x0=0.0)
    if val == math.inf:
        return math.nan, math.nan, math.inf
    x_star, _ = maximize_concave(lambda x: phi(x, y_star), hi=hi, x0=best["x"])
    return x_star, y_star, val


def legendre_2d(law, F, a, b):
    """Joint conjugate sup_{x,y} {a x + b y - Lambda(x, y)} for bounded F."""
    if not a > 0 or b < 0:
        raise ValueError("need a > 0 and b >= 0")
    if isinstance(F, BoundedFunction) and F.constant is not None:
        # Lambda(x,y) = y*K + log mgf(x): the sup over y is +inf unless b = K
        if abs(b - F.constant) <= 1e-12 * max(1.0, abs(F.constant)):
            return legendre_1d(law, a)
        return math.inf
    return _legendre_2d_argmax(law, F, a, b)[2]


# --------------------------------------------------------------------------
# contracted rates

def rate_JF(law, F, m):
    """Rate of the reward C_t/t at level m: inf over beta of the scaled joint
    conjugate beta * Lambda*(1/beta, m/beta).

    Evaluated through the equivalent convex dual
        sup{x + m y : Lambda(x, y) <= 0},
    which stays well-posed when the conjugate's finiteness set is degenerate
    (constant F) and exposes the affine regime exactly: for heavy-tailed laws
    the feasible x is capped at xi and the supremum picks up (1 - mT) xi.
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    if isinstance(F, BoundedFunction) and F.constant is not None and m > 0:
        # counting geometry is exact: levels outside [K/esssup, K/essinf] are
        # unreachable, hull endpoints cost -log of the point mass per arrival
        mk = m / F.constant
        lo_s, hi_s = law.support()
        if mk * lo_s > 1.0 or (hi_s < math.inf and mk * hi_s < 1.0):
            return math.inf
        for endpoint in (lo_s, hi_s):
            if endpoint < math.inf and mk * endpoint == 1.0:
                pm = law.point_mass(endpoint)
                return -mk * math.log(pm) if pm > 0.0 else math.inf
    x_hi = _conjugate_sup_bound(law)

    def lam(x, y):
        return log_laplace(law, F, x, y)

    def x_star(y):
        if x_hi is not None:
            top = lam(x_hi, y)
            if top <= 0.0:
                return x_hi
        g = lambda x: max(lam(x, y), -1e300)  # finite for the root finder
        # expand left until Lambda < 0 (guaranteed: no mass at 0)
        a = min(0.0, x_hi) if x_hi is not None else 0.0
        step = 1.0
        while g(a) > 0.0:
            a -= step
            step *= 2.0
            if step > 2.0 ** 200:
                raise DomainError("log-Laplace never becomes negative")
        if g(a) == 0.0:
            return a
        if x_hi is not None:
            b = x_hi
        else:
            b = max(a, 0.0)
            step = 1.0
            while g(b) < 0.0:
                b += step
                step *= 2.0
                if step > 2.0 ** 200:
                    raise DomainError("log-Laplace never becomes positive")
        return brentq(g, a, b, xtol=1e-13, rtol=8.881784197001252e-16)

    _, val = maximize_concave(lambda y: x_star(y) + m * y, x0=0.0)
    return val


def rate_J1_closed(law, m):
    """Two-regime closed form for the counting rate.

    Strictly convex branch m * Lambda*(1/m) for m >= 1/T; affine branch
    m * Lambda*(T) + (1 - mT) * xi for m < 1/T when both T and xi are finite.
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    xi = law.xi
    if m == 0.0:
        return xi
    T = law.t_limit()
    if T < math.inf and xi < math.inf and m * T < 1.0:
        return m * legendre_1d(law, T) + (1.0 - m * T) * xi
    return m * legendre_1d(law, 1.0 / m)


def solve_tilt_for_mean(law, target):
    """The unique c (below the abscissa) whose tilted mean equals target.

    Bisection on the monotone tilted-mean map, to |mean - target| < 1e-10 * target.
    Targets at or beyond the critical tilted mean T (the affine regime) or at
    or below the essential infimum are infeasible.
    """
    if not target > 0:
        raise ValueError("target must be positive")
    essinf = law.support()[0]
    T = law.t_limit()
    if target >= T:
        raise InfeasibleTargetError(
            f"target {target} >= critical tilted mean T={T}: no tilt attains it")
    if target <= essinf:
        raise InfeasibleTargetError(
            f"target {target} <= essential infimum {essinf}")
    xi = law.xi
    tol = 1e-10 * target

    def g(c):
        return law.tilted_mean(c) - target

    # upper end with tilted mean above target
    if xi < math.inf:
        hi = xi - 2.0 ** -40 * max(1.0, xi)
        if g(hi) < 0.0:
            raise InfeasibleTargetError(
                f"target {target} not attainable below the abscissa (T boundary)")
    else:
        hi, step = 0.0, 1.0
        while g(hi) < 0.0:
            hi += step
            step *= 2.0
            if step > 2.0 ** 200:
                raise InfeasibleTargetError(f"target {target} beyond attainable means")
    lo, step = min(hi, 0.0), 1.0
    while g(lo) > 0.0:
        lo -= step
        step *= 2.0
        if step > 2.0 ** 400:
            raise InfeasibleTargetError(f"target {target} below attainable means")
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if abs(gm) < tol:
            return mid
        if gm > 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-15 * max(1.0, abs(mid)):
            return mid
    return 0.5 * (lo + hi)


# --------------------------------------------------------------------------
# the measure-level functional

def _atoms_value(law, mu):
    # pi(1/tau) * H(pi_tilde | law) for explicit atoms; +inf off the law's support
    inv = mu.pi_inv_tau()
    q = np.array([w / t for t, w in mu.atoms]) / inv
    if isinstance(law, Deterministic):
        p = np.array([1.0 if t == law.tau0 else 0.0 for t, _ in mu.atoms])
    elif isinstance(law, DiscreteAtoms):
        lookup = dict(zip(law.values, law.probs))
        p = np.array([lookup.get(t, 0.0) for t, _ in mu.atoms])
    else:
        return math.inf  # atoms against a continuous law: no absolute continuity
    if np.any(p == 0.0):
        return math.inf
    return inv * float(np.sum(q * np.log(q / p)))


def rate_I(law, mu: DeltaMeasure):
    """The measure-level rate alpha * pi(1/tau) H(pi_tilde | psi) + (1-alpha) xi."""
    xi = law.xi
    alpha = mu.alpha
    if alpha == 0.0:
        return xi
    if mu.atoms is not None:
        finite_part = _atoms_value(law, mu)
    else:
        if mu.base != law:
            raise MismatchError(
                f"measure tilts {mu.base.spec()}, not the evaluation law {law.spec()}")
        if mu.c == 0.0:
            finite_part = 0.0
        else:
            finite_part = law.entropy_of_tilt(mu.c) / law.tilted_mean(mu.c)
    if alpha == 1.0:
        return finite_part
    return alpha * finite_part + (1.0 - alpha) * xi


def rate_I0(law, mu: DeltaMeasure):
    """The non-compactified variant: +inf unless all mass stays finite (alpha = 1)."""
    if mu.alpha != 1.0:
        return math.inf
    return rate_I(law, mu)


# --------------------------------------------------------------------------
# entropy projection (I-projection onto two moment constraints)

class TiltPair(NamedTuple):
    x: float
    y: float


def _tilted_moment_block(law, F, x, y):
    """(logZ, mean_tau, mean_F, covariance matrix) under e^{x tau + y F} psi / Z."""
    if isinstance(law, DiscreteAtoms):
        v = law.values
        fv = np.asarray(F(v), float)
        logw = np.log(law.probs) + x * v + y * fv
        logz = float(special.logsumexp(logw))
        q = np.exp(logw - logz)
        m1 = float(q @ v)
        m2 = float(q @ fv)
        cov = np.array([
            [float(q @ (v * v)) - m1 * m1, float(q @ (v * fv)) - m1 * m2],
            [float(q @ (v * fv)) - m1 * m2, float(q @ (fv * fv)) - m2 * m2]])
        return logz, m1, m2, cov
    if isinstance(law, Deterministic):
        t0, f0 = law.tau0, float(F(law.tau0))
        return x * t0 + y * f0, t0, f0, np.zeros((2, 2))
    lo = law.support()[0]
    pts = [p / (1.0 + p) for p in getattr(F, "breakpoints", ()) or ()]

    def integrand(u):
        t = u / (1.0 - u)
        fv = float(F(t))
        logw = float(law.log_density(t)) + x * t + y * fv
        w = math.exp(min(logw, 700.0)) / (1.0 - u) ** 2
        return w * np.array([1.0, t, fv, t * t, t * fv, fv * fv])

    raw, _ = quad_vec(integrand, lo / (1.0 + lo), 1.0, epsabs=0.0, epsrel=1e-11,
                      points=sorted(pts) or None)
    z = raw[0]
    if not (z > 0.0 and np.isfinite(z)):
        return math.inf, math.nan, math.nan, None
    m1, m2 = raw[1] / z, raw[2] / z
    cov = np.array([[raw[3] / z - m1 * m1, raw[4] / z - m1 * m2],
                    [raw[4] / z - m1 * m2, raw[5] / z - m2 * m2]])
    return math.log(z), m1, m2, cov


def entropy_projection(law, mean_target, F, f_target):
    """Entropy-minimizing member of the two-parameter exponential family
    matching E[tau] = mean_target and E[F] = f_target.

    Returns (TiltPair(x, y), relative entropy). The entropy equals the joint
    conjugate at the same targets; Newton on the concave dual with a damped
    pseudo-inverse step (the two constraints can be affinely dependent on
    small atom sets), bisection-style backtracking as fallback.
    """
    if not mean_target > 0:
        raise ValueError("mean_target must be positive")
    if isinstance(F, BoundedFunction) and F.constant is not None:
        if abs(f_target - F.constant) > 1e-9 * max(1.0, abs(F.constant)):
            raise InfeasibleTargetError(
                f"F is constant {F.constant}; f_target {f_target} unattainable")
        c = solve_tilt_for_mean(law, mean_target)
        return TiltPair(c, 0.0), law.entropy_of_tilt(c)

    a, b = float(mean_target), float(f_target)
    hi = _conjugate_sup_bound(law)
    scale = max(1.0, abs(a), abs(b))
    x, y = 0.0, 0.0
    logz, m1, m2, cov = _tilted_moment_block(law, F, x, y)
    phi = a * x + b * y - logz
    for _ in range(120):
        grad = np.array([a - m1, b - m2])
        if np.linalg.norm(grad) <= 1e-10 * scale:
            break
        try:
            step = np.linalg.solve(cov, grad)
        except np.linalg.LinAlgError:
            step = None
        if step is None or not np.all(np.isfinite(step)):
            step = np.linalg.lstsq(cov, grad, rcond=None)[0]
        if not np.all(np.isfinite(step)) or np.linalg.norm(step) == 0.0:
            step = grad
        t = 1.0
        improved = False
        for _ in range(60):
            xn, yn = x + t * step[0], y + t * step[1]
            if hi is not None and xn > hi:
                xn = hi
            blk = _tilted_moment_block(law, F, xn, yn)
            if blk[0] < math.inf:
                phin = a * xn + b * yn - blk[0]
                if phin > phi - 1e-15 * max(1.0, abs(phi)):
                    x, y = xn, yn
                    logz, m1, m2, cov = blk
                    phi = phin
                    improved = True
                    break
            t *= 0.5
        if not improved:
            break
    grad = np.array([a - m1, b - m2])
    if np.linalg.norm(grad) > 1e-6 * scale:
        raise InfeasibleTargetError(
            f"targets ({a}, {b}) not attained: residual {grad} "
            "(outside or on the boundary of the attainable moment set)")
    return TiltPair(x, y), max(0.0, phi)


# --------------------------------------------------------------------------
# variational form of the counting rate

@dataclass(frozen=True)
class VariationalResult:
    value: float
    alpha: Optional[float]
    c: Optional[float]


def variational_crosscheck_J1(law, m):
    """Minimize m H(zeta_c | psi) + (1 - alpha) xi over alpha in [0,1] with the
    tilt c pinned by tilted_mean(c) = alpha / m.

    Exposes the affine regime: for m below 1/T no interior minimizer exists and
    the optimum sits at alpha = T m with the near-critical tilt.
    """
    if not m > 0:
        raise ValueError("m must be positive")
    xi = law.xi
    T = law.t_limit()
    essinf = law.support()[0]

    def objective(alpha):
        try:
            c = solve_tilt_for_mean(law, alpha / m)
        except InfeasibleTargetError:
            return math.inf, None
        ent = law.entropy_of_tilt(c)
        tail = 0.0 if alpha == 1.0 else (1.0 - alpha) * xi
        return m * ent + tail, c

    if xi == math.inf:
        val, c = objective(1.0)
        return VariationalResult(val, 1.0 if val < math.inf else None, c)

    lo = m * essinf
    hi = min(1.0, m * T) if T < math.inf else 1.0
    if hi <= lo:
        return VariationalResult(math.inf, None, None)
    span = hi - lo
    a_lo = lo + 1e-9 * span
    a_hi = hi - 1e-9 * span if (T < math.inf and m * T <= 1.0) else hi
    alpha_star, neg = golden_max(lambda a: -objective(a)[0], a_lo, a_hi,
                                 width_tol=1e-10 * max(1.0, a_hi))
    val, c = objective(alpha_star)
    if val == math.inf:
        return VariationalResult(math.inf, None, None)
    return VariationalResult(val, alpha_star, c)


# --------------------------------------------------------------------------
# rate-curve scan

@dataclass
class RateCurve:
    """Grid evaluation of a contracted rate with regime labels."""
    points: list
    kink: Optional[float]
    xi: float
    T: float
    law_spec: str = ""

    def to_csv(self):
        lines = ["m,J,regime"]
        for m, v, reg in self.points:
            j = "+inf" if v == math.inf else f"{v:.12g}"
            lines.append(f"{m:.12g},{j},{reg}")
        return "\n".join(lines) + "\n"


def affine_scan(law, m_grid, F=F_ONE):
    """Evaluate the contracted rate on a grid and label each point's regime.

    Second differences against a scale-aware tolerance separate affine from
    strictly convex stretches; exact zeros and infinities get their own labels.
    The kink 1/T is reported whenever the critical tilted mean is finite.
    """
    ms = [float(m) for m in m_grid]
    if any(b <= a for a, b in zip(ms, ms[1:])):
        raise ValueError("m_grid must be strictly increasing")
    vals = [rate_JF(law, F, m) for m in ms]
    finite = [v for v in vals if v < math.inf]
    scale = (max(finite) - min(finite)) if len(finite) >= 2 else 1.0
    tol = AFFINE_TOL * max(scale, 1e-12)

    def second_diff(i):
        j = min(max(i, 1), len(vals) - 2)
        trio = vals[j - 1], vals[j], vals[j + 1]
        if any(v == math.inf for v in trio):
            return math.inf
        return trio[0] - 2.0 * trio[1] + trio[2]

    points = []
    for i, (m, v) in enumerate(zip(ms, vals)):
        if v == math.inf:
            reg = INFEASIBLE
        elif v <= ZERO_TOL:
            reg = ZERO
        elif len(vals) >= 3 and abs(second_diff(i)) < tol:
            reg = AFFINE
        else:
            reg = STRICT_CONVEX
        points.append((m, v, reg))

    T = law.t_limit()
    kink = 1.0 / T if T < math.inf else None
    return RateCurve(points=points, kink=kink, xi=law.xi, T=T, law_spec=law.spec())
