"""Bounded test functions: the reward-function registry, bivariate test
functions on (0, inf]^2, and piecewise-linear bumps for the free-energy check."""

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import LawParseError


@dataclass(frozen=True)
class BoundedFunction:
    """A bounded continuous reward F on (0, inf).

    `constant` carries the value when F is identically constant (the counting
    case F == 1 and friends), which several operations special-case exactly.
    `breakpoints` are kink locations, passed to quadrature as split points.
    """
    name: str
    fn: object
    bound: float
    constant: float = None
    breakpoints: tuple = ()

    def __call__(self, t):
        return self.fn(t)


def _ind(a, b, w):
    def fn(t):
        t = np.asarray(t, float)
        up = np.clip((t - (a - w)) / w, 0.0, 1.0)
        down = np.clip(((b + w) - t) / w, 0.0, 1.0)
        return np.minimum(up, down)
    return fn


_F_RE = re.compile(r"^\s*([a-z0-9]+)\s*(?:\(\s*(.*?)\s*\))?\s*$")


def parse_f(text):
    """Registry: one, min1, sat(K), sig, ind(a,b,w)."""
    m = _F_RE.match(text)
    if not m:
        raise LawParseError(f"cannot parse function spec {text!r}")
    name, body = m.group(1), m.group(2)
    try:
        if name == "one" and body is None:
            return BoundedFunction("one", lambda t: np.ones_like(np.asarray(t, float)),
                                   bound=1.0, constant=1.0)
        if name == "min1" and body is None:
            return BoundedFunction("min1", lambda t: np.minimum(np.asarray(t, float), 1.0),
                                   bound=1.0, breakpoints=(1.0,))
        if name == "sat":
            (k,) = [float(p) for p in body.split(",")]
            if k <= 0:
                raise LawParseError("sat(K) needs K > 0")
            return BoundedFunction(f"sat({k:g})",
                                   lambda t: np.minimum(np.asarray(t, float), k),
                                   bound=k, breakpoints=(k,))
        if name == "sig" and body is None:
            return BoundedFunction("sig", lambda t: np.asarray(t, float) / (1.0 + np.asarray(t, float)),
                                   bound=1.0)
        if name == "ind":
            a, b, w = [float(p) for p in body.split(",")]
            if not (w > 0 and a - w > 0 and b >= a):
                raise LawParseError("ind(a,b,w) needs w > 0, a - w > 0, b >= a")
            return BoundedFunction(f"ind({a:g},{b:g},{w:g})", _ind(a, b, w), bound=1.0,
                                   breakpoints=(a - w, a, b, b + w))
    except LawParseError:
        raise
    except (ValueError, TypeError) as exc:
        raise LawParseError(f"invalid parameters in {text!r}: {exc}") from None
    raise LawParseError(f"unknown function spec {text!r}")


F_ONE = parse_f("one")


@dataclass(frozen=True)
class BivariateTestFunction:
    """Bounded continuous f on (0, inf]^2 with a declared value at (inf, inf).

    The limit is a field, not a computed quantity: limits of user closures
    cannot be inferred reliably.
    """
    fn: object
    bound: float
    limit: float = 0.0
    name: str = ""

    def __call__(self, a, b):
        return self.fn(a, b)

    def bar(self, r, tau, rel_tol=1e-10):
        """Inner segment integral int_0^r f(u tau, (1-u) tau) du by adaptive quadrature."""
        from scipy import integrate as _si
        if r == 0.0:
            return 0.0
        val, err = _si.quad(lambda u: self.fn(u * tau, (1.0 - u) * tau), 0.0, r,
                            epsabs=0.0, epsrel=rel_tol, limit=200)
        from .errors import QuadratureError
        if err > max(10.0 * rel_tol * abs(val), 1e-13):
            raise QuadratureError(
                f"segment integral tolerance not reached (tau={tau}, r={r}, err={err:.2e})")
        return val


@dataclass(frozen=True)
class PiecewiseLinear:
    """Compactly supported piecewise-linear function, zero outside its knots.

    The free-energy check restricts its phi input to this class so that
    exp(phi) quadratures stay reliable.
    """
    knots: tuple
    values: tuple
    _xs: np.ndarray = field(init=False, repr=False, compare=False)
    _ys: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        xs = np.asarray(self.knots, float)
        ys = np.asarray(self.values, float)
        if xs.ndim != 1 or xs.size < 2 or xs.size != ys.size:
            raise ValueError("need matching knot/value sequences of length >= 2")
        if not np.all(np.diff(xs) > 0):
            raise ValueError("knots must be strictly increasing")
        if ys[0] != 0.0 or ys[-1] != 0.0:
            raise ValueError("compact support requires zero endpoint values")
        if xs[0] <= 0:
            raise ValueError("support must lie in (0, inf)")
        object.__setattr__(self, "_xs", xs)
        object.__setattr__(self, "_ys", ys)

    def __call__(self, t):
        return np.interp(np.asarray(t, float), self._xs, self._ys, left=0.0, right=0.0)

    @property
    def sup_norm(self):
        return float(np.max(np.abs(self._ys)))

    @property
    def breakpoints(self):
        return tuple(self._xs)


def plateau(lo, hi, ramp, height=-1.0):
    """Piecewise-linear bump: `height` on [lo, hi] with linear ramps of width `ramp`."""
    if lo - ramp <= 0:
        raise ValueError("ramp extends to nonpositive values")
    return PiecewiseLinear((lo - ramp, lo, hi, hi + ramp), (0.0, height, height, 0.0))
