"""Waiting-time laws on (0, inf): sampling, exponential moments, tilting.

Every law exposes the same surface: sampling from an explicit random stream,
the moment generating function with divergence detection, the exponential-
moment abscissa xi, exponential tilting, the tilted mean map and its critical
limit T, and the relative entropy of a tilt. Closed forms are used wherever a
family admits them; the generic fallback is the divergence-aware quadrature
engine from .numerics.

Random streams are counter-based (Philox) and passed explicitly; nothing in
this package touches global RNG state.
"""

import math
import re
from pathlib import Path

import numpy as np
from scipy import special
from scipy.optimize import brentq

from .errors import DomainError, LawParseError, TailSamplingError
from .numerics import integrate_halfline


def make_rng(seed):
    """Counter-based generator for the given 64-bit seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def spawn_rngs(seed, n):
    """n independent child streams of the given seed (one per worker/shard)."""
    return [np.random.Generator(np.random.Philox(s))
            for s in np.random.SeedSequence(int(seed)).spawn(int(n))]


# --------------------------------------------------------------------------
# upper incomplete gamma for nonpositive parameters (Pareto closed forms)

def _upper_gamma_asymptotic(a, z):
    # log Gamma(a,z) ~ -z + (a-1) log z + log(1 + (a-1)/z + (a-1)(a-2)/z^2 + ...)
    s, term = 1.0, 1.0
    for j in range(1, 16):
        term *= (a - j) / z
        if abs(term) < 1e-18:
            break
        s += term
    return -z + (a - 1.0) * math.log(z) + math.log(s)


def log_upper_gamma(a, z):
    """log Gamma(a, z) for real a <= 1 (including a <= 0) and z > 0."""
    if z <= 0.0:
        raise ValueError("z must be positive")
    if z > 500.0:
        return _upper_gamma_asymptotic(a, z)
    # recurse down from a parameter in (0, 1]: Gamma(a,z) = (Gamma(a+1,z) - z^a e^-z)/a
    # (stable at small z: the z^a term dominates each step)
    steps = max(0, int(math.ceil(-a)))
    a_top = a + steps
    if a_top == 0.0:
        g = special.exp1(z)
    else:
        g = special.gammaincc(a_top, z) * special.gamma(a_top)
    aa = a_top
    for _ in range(steps):
        aa -= 1.0
        g = (g - z ** aa * math.exp(-z)) / aa
    if g <= 0.0 or not np.isfinite(g):
        raise OverflowError(f"incomplete gamma recursion unstable at a={a}, z={z}")
    return math.log(g)


# --------------------------------------------------------------------------

class WaitingLaw:
    """Base class: a probability law on (0, inf) with no mass at 0."""

    def support(self):
        """(essential infimum, essential supremum)."""
        raise NotImplementedError

    @property
    def xi(self):
        """Exponential-moment abscissa sup{c : E e^{c tau} < inf}."""
        raise NotImplementedError

    def sample(self, rng, size=None):
        raise NotImplementedError

    def integrate(self, g, points=None, assume_finite=False):
        """Integral of a nonnegative g against the law (may be +inf)."""
        raise NotImplementedError

    def integrate_logweight(self, logw_fn, factor_fn=None, points=None,
                            assume_finite=False):
        """Integral of factor(tau) * e^{logw(tau)} against the law.

        Density laws compose the weight with the log-density so that huge
        exponents against tiny densities cancel instead of producing inf*0.
        """
        if factor_fn is None:
            return self.integrate(lambda t: np.exp(logw_fn(t)),
                                  points=points, assume_finite=assume_finite)
        return self.integrate(lambda t: np.asarray(factor_fn(t), float)
                              * np.exp(logw_fn(t)),
                              points=points, assume_finite=assume_finite)

    def spec(self):
        """Canonical law-spec string (the config-file grammar)."""
        raise NotImplementedError

    # ---- exponential moments -------------------------------------------

    def mgf(self, c):
        """E e^{c tau}, or +inf when the integral diverges."""
        lm = self.log_mgf(c)
        return math.exp(lm) if lm < math.inf else math.inf

    def log_mgf(self, c):
        if c <= 0.0:
            return math.log(self.integrate(lambda t: np.exp(c * t), assume_finite=True))
        val = self.integrate(lambda t: np.exp(c * t))
        return math.log(val) if val < math.inf else math.inf

    def tilted_mean(self, c):
        """E(tau e^{c tau}) / E(e^{c tau}); nondecreasing in c."""
        lm = self.log_mgf(c)
        if lm == math.inf:
            raise DomainError(f"mgf diverges at c={c}")
        num = self.integrate(lambda t: t * np.exp(c * t), assume_finite=(c < 0.0))
        if num == math.inf:
            return math.inf
        return num * math.exp(-lm)

    def mean(self):
        return self.tilted_mean(0.0)

    def t_limit(self):
        """Critical tilted mean T = sup_{c < xi} tilted_mean(c).

        For xi = +inf this is the essential supremum of the support. For finite
        xi the tilted mean is evaluated along c_k -> xi and the limit reported
        when the sequence settles (Cauchy at 1e-8), else +inf.
        """
        cached = getattr(self, "_t_limit", None)
        if cached is not None:
            return cached
        x = self.xi
        if x == math.inf:
            out = self.support()[1]
        else:
            scale = max(1.0, x)
            vals = []
            out = math.inf
            for k in range(0, 41):
                c = x - 2.0 ** (-k) * scale
                m = self.tilted_mean(c)
                if m == math.inf:
                    vals = []
                    break
                vals.append(m)
            if len(vals) >= 4:
                incs = [abs(vals[i] - vals[i - 1]) for i in range(len(vals) - 3, len(vals))]
                if all(d < 1e-8 * max(1.0, abs(vals[-1])) for d in incs):
                    out = vals[-1]
        self._t_limit = out
        return out

    # ---- tilting --------------------------------------------------------

    def tilt(self, c):
        """The exponentially tilted law e^{c tau} psi(d tau) / mgf(c)."""
        if c == 0.0:
            return self
        if self.log_mgf(c) == math.inf:
            raise DomainError(f"tilt exponent c={c} not admissible")
        return TiltedDensity(self, c)

    def entropy_of_tilt(self, c):
        """Relative entropy H(tilt(c) | law) = c * tilted_mean(c) - log mgf(c)."""
        if c == 0.0:
            return 0.0
        lm = self.log_mgf(c)
        if lm == math.inf:
            raise DomainError(f"mgf diverges at c={c}")
        tm = self.tilted_mean(c)
        if tm == math.inf:
            raise DomainError(f"tilted mean diverges at c={c}")
        return max(0.0, c * tm - lm)

    # ---- tails ----------------------------------------------------------

    def sf(self, s):
        """Survival function P(tau > s)."""
        raise NotImplementedError

    def point_mass(self, t):
        """P(tau = t); zero except for atom-type laws."""
        return 0.0

    def sample_conditional_tail(self, s, rng, size=None):
        """Draw from the law conditioned on tau > s."""
        raise NotImplementedError

    # ---- identity -------------------------------------------------------

    def _key(self):
        return (type(self).__name__, self.spec())

    def __eq__(self, other):
        return isinstance(other, WaitingLaw) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return self.spec()


class _DensityLaw(WaitingLaw):
    """Continuous law given by a density; generic quadrature-backed moments."""

    _quad_points = ()

    def density(self, t):
        raise NotImplementedError

    def log_density(self, t):
        with np.errstate(divide="ignore"):
            return np.log(self.density(t))

    def _merged_points(self, points):
        pts = list(self._quad_points)
        if points:
            pts += list(points)
        return pts or None

    def integrate(self, g, points=None, assume_finite=False):
        lo = self.support()[0]
        return integrate_halfline(lambda t: g(t) * self.density(t), lo=lo,
                                  points=self._merged_points(points),
                                  check_divergence=not assume_finite)

    def integrate_logweight(self, logw_fn, factor_fn=None, points=None,
                            assume_finite=False):
        lo = self.support()[0]

        def fn(t):
            t = np.asarray(t, float)
            with np.errstate(over="ignore", invalid="ignore"):
                val = np.exp(np.asarray(logw_fn(t), float) + self.log_density(t))
            if factor_fn is not None:
                val = val * np.asarray(factor_fn(t), float)
            return val

        return integrate_halfline(fn, lo=lo, points=self._merged_points(points),
                                  check_divergence=not assume_finite)

    def _exp_moment(self, c, power, assume_finite):
        factor = None if power == 0 else (lambda t: np.asarray(t, float) ** power)
        return self.integrate_logweight(lambda t: c * np.asarray(t, float),
                                        factor_fn=factor, assume_finite=assume_finite)

    def log_mgf(self, c):
        if c == 0.0:
            return 0.0
        val = self._exp_moment(c, 0, assume_finite=(c <= 0.0))
        if val == math.inf:
            return math.inf
        if val <= 0.0:
            return -math.inf  # underflow at a very deep negative tilt
        return math.log(val)

    def tilted_mean(self, c):
        lm = self.log_mgf(c)
        if lm == math.inf:
            raise DomainError(f"mgf diverges at c={c}")
        num = self._exp_moment(c, 1, assume_finite=(c < 0.0))
        if num == math.inf:
            return math.inf
        return num * math.exp(-lm)


class Exponential(_DensityLaw):
    def __init__(self, rate):
        if not rate > 0:
            raise ValueError("rate must be positive")
        self.rate = float(rate)

    def support(self):
        return (0.0, math.inf)

    @property
    def xi(self):
        return self.rate

    def density(self, t):
        return self.rate * np.exp(-self.rate * t) * (t > 0)

    def log_density(self, t):
        t = np.asarray(t, float)
        return np.where(t > 0, math.log(self.rate) - self.rate * t, -np.inf)

    def sample(self, rng, size=None):
        return rng.exponential(1.0 / self.rate, size)

    def log_mgf(self, c):
        if c >= self.rate:
            return math.inf
        return -math.log1p(-c / self.rate)

    def tilted_mean(self, c):
        if c >= self.rate:
            raise DomainError(f"mgf diverges at c={c}")
        return 1.0 / (self.rate - c)

    def tilt(self, c):
        if c >= self.rate:
            raise DomainError(f"tilt exponent c={c} not admissible")
        return Exponential(self.rate - c) if c != 0.0 else self

    def sf(self, s):
        return math.exp(-self.rate * s) if s > 0 else 1.0

    def sample_conditional_tail(self, s, rng, size=None):
        return s + rng.exponential(1.0 / self.rate, size)

    def spec(self):
        return f"exp({self.rate:g})"


class Gamma(_DensityLaw):
    def __init__(self, shape, scale):
        if not (shape > 0 and scale > 0):
            raise ValueError("shape and scale must be positive")
        self.shape = float(shape)
        self.scale = float(scale)

    def support(self):
        return (0.0, math.inf)

    @property
    def xi(self):
        return 1.0 / self.scale

    def log_density(self, t):
        t = np.asarray(t, float)
        with np.errstate(divide="ignore", invalid="ignore"):
            logd = ((self.shape - 1.0) * np.log(t) - t / self.scale
                    - special.gammaln(self.shape) - self.shape * math.log(self.scale))
        return np.where(t > 0, logd, -np.inf)

    def density(self, t):
        return np.exp(self.log_density(t))

    def sample(self, rng, size=None):
        return rng.gamma(self.shape, self.scale, size)

    def log_mgf(self, c):
        if c >= self.xi:
            return math.inf
        return -self.shape * math.log1p(-self.scale * c)

    def tilted_mean(self, c):
        if c >= self.xi:
            raise DomainError(f"mgf diverges at c={c}")
        return self.shape * self.scale / (1.0 - self.scale * c)

    def tilt(self, c):
        if c >= self.xi:
            raise DomainError(f"tilt exponent c={c} not admissible")
        return Gamma(self.shape, self.scale / (1.0 - self.scale * c)) if c != 0.0 else self

    def sf(self, s):
        return float(special.gammaincc(self.shape, s / self.scale)) if s > 0 else 1.0

    def sample_conditional_tail(self, s, rng, size=None):
        u = rng.random(size)
        return special.gammainccinv(self.shape, u * self.sf(s)) * self.scale

    def spec(self):
        return f"gamma({self.shape:g},{self.scale:g})"


class Pareto(_DensityLaw):
    """Power-law tail (x_min/t)^alpha; xi = 0, the heavy-tailed workhorse."""

    def __init__(self, alpha, xmin):
        if not (alpha > 0 and xmin > 0):
            raise ValueError("alpha and xmin must be positive")
        if alpha > 50:
            raise ValueError("alpha > 50 not supported")
        self.alpha = float(alpha)
        self.xmin = float(xmin)
        self._quad_points = (self.xmin,)

    def support(self):
        return (self.xmin, math.inf)

    @property
    def xi(self):
        return 0.0

    def density(self, t):
        a, x = self.alpha, self.xmin
        with np.errstate(divide="ignore", invalid="ignore"):
            d = a * x ** a * np.asarray(t, float) ** (-a - 1.0)
        return np.where(np.asarray(t, float) >= x, d, 0.0)

    def log_density(self, t):
        t = np.asarray(t, float)
        a, x = self.alpha, self.xmin
        with np.errstate(divide="ignore", invalid="ignore"):
            logd = math.log(a) + a * math.log(x) - (a + 1.0) * np.log(t)
        return np.where(t >= x, logd, -np.inf)

    def sample(self, rng, size=None):
        u = rng.random(size)
        return self.xmin * u ** (-1.0 / self.alpha)

    def log_mgf(self, c):
        # E e^{c tau} = alpha z^alpha Gamma(-alpha, z), z = -c xmin
        if c == 0.0:
            return 0.0
        if c > 0.0:
            return math.inf
        z = -c * self.xmin
        try:
            return (math.log(self.alpha) + self.alpha * math.log(z)
                    + log_upper_gamma(-self.alpha, z))
        except OverflowError:
            return super().log_mgf(c)

    def tilted_mean(self, c):
        a, x = self.alpha, self.xmin
        if c > 0.0:
            raise DomainError(f"mgf diverges at c={c}")
        if c == 0.0:
            return a * x / (a - 1.0) if a > 1.0 else math.inf
        z = -c * x
        try:
            return x * math.exp(log_upper_gamma(1.0 - a, z)
                                - math.log(z) - log_upper_gamma(-a, z))
        except OverflowError:
            return super().tilted_mean(c)

    def sf(self, s):
        return min(1.0, (self.xmin / s) ** self.alpha) if s > 0 else 1.0

    def sample_conditional_tail(self, s, rng, size=None):
        lo = max(s, self.xmin)
        u = rng.random(size)
        return lo * u ** (-1.0 / self.alpha)

    def spec(self):
        return f"pareto({self.alpha:g},{self.xmin:g})"


class Weibull(_DensityLaw):
    def __init__(self, shape, scale):
        if not (shape > 0 and scale > 0):
            raise ValueError("shape and scale must be positive")
        self.shape = float(shape)
        self.scale = float(scale)

    def support(self):
        return (0.0, math.inf)

    @property
    def xi(self):
        if self.shape > 1.0:
            return math.inf
        if self.shape < 1.0:
            return 0.0
        return 1.0 / self.scale

    def density(self, t):
        return np.exp(self.log_density(t))

    def log_density(self, t):
        k, lam = self.shape, self.scale
        t = np.asarray(t, float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            logd = (math.log(k / lam) + (k - 1.0) * np.log(t / lam) - (t / lam) ** k)
        return np.where(t > 0, logd, -np.inf)

    def sample(self, rng, size=None):
        return self.scale * rng.weibull(self.shape, size)

    def mean(self):
        return self.scale * special.gamma(1.0 + 1.0 / self.shape)

    def sf(self, s):
        return math.exp(-((s / self.scale) ** self.shape)) if s > 0 else 1.0

    def sample_conditional_tail(self, s, rng, size=None):
        u = rng.random(size)
        q = u * self.sf(s)
        return self.scale * (-np.log(q)) ** (1.0 / self.shape)

    def spec(self):
        return f"weibull({self.shape:g},{self.scale:g})"


class Deterministic(WaitingLaw):
    """Point mass at tau0."""

    def __init__(self, tau0):
        if not tau0 > 0:
            raise ValueError("tau0 must be positive")
        self.tau0 = float(tau0)

    def support(self):
        return (self.tau0, self.tau0)

    @property
    def xi(self):
        return math.inf

    def sample(self, rng, size=None):
        return self.tau0 if size is None else np.full(size, self.tau0)

    def integrate(self, g, points=None, assume_finite=False):
        return float(g(self.tau0))

    def log_mgf(self, c):
        return c * self.tau0

    def tilted_mean(self, c):
        return self.tau0

    def tilt(self, c):
        return self

    def entropy_of_tilt(self, c):
        return 0.0

    def sf(self, s):
        return 1.0 if s < self.tau0 else 0.0

    def point_mass(self, t):
        return 1.0 if t == self.tau0 else 0.0

    def sample_conditional_tail(self, s, rng, size=None):
        if s >= self.tau0:
            raise TailSamplingError(f"no mass beyond s={s} for {self.spec()}")
        return self.sample(rng, size)

    def spec(self):
        return f"det({self.tau0:g})"


class DiscreteAtoms(WaitingLaw):
    """Finitely many atoms (v_i, w_i); all exponential moments finite."""

    def __init__(self, atoms):
        merged = {}
        for v, w in atoms:
            v, w = float(v), float(w)
            if v <= 0:
                raise ValueError(f"atom value {v} must be positive")
            if w <= 0:
                raise ValueError(f"atom weight {w} must be positive")
            merged[v] = merged.get(v, 0.0) + w
        if not merged:
            raise ValueError("need at least one atom")
        vals = np.array(sorted(merged), dtype=float)
        probs = np.array([merged[v] for v in vals], dtype=float)
        if abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError(f"atom probabilities sum to {probs.sum()}, not 1")
        probs = probs / probs.sum()
        vals.setflags(write=False)
        probs.setflags(write=False)
        self.values = vals
        self.probs = probs

    def support(self):
        return (float(self.values[0]), float(self.values[-1]))

    @property
    def xi(self):
        return math.inf

    def sample(self, rng, size=None):
        out = rng.choice(self.values, size=size, p=self.probs)
        return float(out) if size is None else out

    def integrate(self, g, points=None, assume_finite=False):
        return float(np.sum(self.probs * np.asarray([g(v) for v in self.values], float)))

    def log_mgf(self, c):
        return float(special.logsumexp(np.log(self.probs) + c * self.values))

    def _tilt_weights(self, c):
        logq = np.log(self.probs) + c * self.values
        logq -= special.logsumexp(logq)
        return np.exp(logq)

    def tilted_mean(self, c):
        return float(np.sum(self._tilt_weights(c) * self.values))

    def tilt(self, c):
        if c == 0.0:
            return self
        return DiscreteAtoms(list(zip(self.values, self._tilt_weights(c))))

    def sf(self, s):
        return float(self.probs[self.values > s].sum())

    def point_mass(self, t):
        hit = self.values == t
        return float(self.probs[hit].sum()) if hit.any() else 0.0

    def sample_conditional_tail(self, s, rng, size=None):
        mask = self.values > s
        if not mask.any():
            raise TailSamplingError(f"no atoms beyond s={s}")
        w = self.probs[mask] / self.probs[mask].sum()
        out = rng.choice(self.values[mask], size=size, p=w)
        return float(out) if size is None else out

    def spec(self):
        pairs = ",".join(f"{v:g}:{w:.12g}" for v, w in zip(self.values, self.probs))
        return f"atoms({pairs})"


class Empirical(DiscreteAtoms):
    """Equal-weight atoms at observed sample values."""

    def __init__(self, samples, source=None):
        samples = [float(s) for s in samples]
        if not samples:
            raise ValueError("need at least one sample")
        n = len(samples)
        super().__init__([(s, 1.0 / n) for s in samples])
        self.n_samples = n
        self.source = source

    def spec(self):
        if self.source is not None:
            return f"empirical({self.source})"
        return f"empirical(<{self.n_samples} samples>)"


class TiltedDensity(_DensityLaw):
    """Density-wrapped tilt e^{c tau} psi(d tau)/mgf(c) of a continuous base law."""

    def __init__(self, base, c):
        if isinstance(base, TiltedDensity):
            c = c + base.c
            base = base.base
        lm = base.log_mgf(c)
        if lm == math.inf:
            raise DomainError(f"tilt exponent c={c} not admissible for {base.spec()}")
        self.base = base
        self.c = float(c)
        self.log_norm = lm
        self._quad_points = tuple(getattr(base, "_quad_points", ()))

    def support(self):
        return self.base.support()

    @property
    def xi(self):
        return self.base.xi - self.c

    def density(self, t):
        with np.errstate(over="ignore"):
            return np.exp(self.log_density(t))

    def log_density(self, t):
        return (self.base.log_density(t) + self.c * np.asarray(t, float)
                - self.log_norm)

    def log_mgf(self, x):
        lm = self.base.log_mgf(self.c + x)
        return lm - self.log_norm if lm < math.inf else math.inf

    def tilted_mean(self, x):
        return self.base.tilted_mean(self.c + x)

    def tilt(self, x):
        if x == 0.0:
            return self
        return TiltedDensity(self.base, self.c + x)

    def sample(self, rng, size=None):
        scalar = size is None
        n = 1 if scalar else int(np.prod(size))
        lo, hi = self.base.support()
        if self.c <= 0.0 or hi < math.inf:
            ref = lo if self.c <= 0.0 else hi
            out = np.empty(n)
            filled = 0
            while filled < n:
                m = max(n - filled, 256)
                t = np.asarray(self.base.sample(rng, m), float)
                acc = rng.random(m) < np.exp(self.c * (t - ref))
                take = t[acc][: n - filled]
                out[filled:filled + take.size] = take
                filled += take.size
        else:
            # c > 0 with unbounded support: exact but slow numeric CDF inversion
            out = np.array([self._inverse_cdf(rng.random()) for _ in range(n)])
        if scalar:
            return float(out[0])
        return out.reshape(size)

    def _inverse_cdf(self, u):
        def cdf_minus(t):
            if t <= self.support()[0]:
                return -u
            return self.integrate(lambda s: np.asarray(s <= t, float),
                                  points=[t], assume_finite=True) - u
        hi = max(2.0 * self.support()[0], 1.0)
        while cdf_minus(hi) < 0:
            hi *= 2.0
        return brentq(cdf_minus, self.support()[0], hi, xtol=1e-12)

    def sf(self, s):
        lo = self.support()[0]
        if s <= lo:
            return 1.0
        return self.integrate(lambda t: np.asarray(t > s, float),
                              points=[s], assume_finite=(self.c <= 0.0))

    def sample_conditional_tail(self, s, rng, size=None):
        if self.c > 0.0:
            raise TailSamplingError("conditional tail sampling needs c <= 0")
        scalar = size is None
        n = 1 if scalar else int(np.prod(size))
        out = np.empty(n)
        filled = 0
        while filled < n:
            m = max(n - filled, 64)
            t = np.asarray(self.base.sample_conditional_tail(s, rng, m), float)
            ref = max(s, self.support()[0])
            acc = rng.random(m) < np.exp(self.c * (t - ref))
            take = t[acc][: n - filled]
            out[filled:filled + take.size] = take
            filled += take.size
        if scalar:
            return float(out[0])
        return out.reshape(size)

    def spec(self):
        return f"tilt({self.base.spec()},{self.c:g})"


# --------------------------------------------------------------------------
# law-spec grammar

_LAW_RE = re.compile(r"^\s*([a-z]+)\s*\(\s*(.*?)\s*\)\s*$")


def parse_law(text):
    """Parse the law grammar: exp(rate), gamma(shape,scale), pareto(alpha,xmin),
    weibull(shape,scale), det(tau), atoms(v1:p1,...), empirical(path)."""
    m = _LAW_RE.match(text)
    if not m:
        raise LawParseError(f"cannot parse law spec {text!r}")
    name, body = m.group(1), m.group(2)

    def floats(n):
        parts = [p.strip() for p in body.split(",")] if body else []
        if len(parts) != n:
            raise LawParseError(f"{name} expects {n} parameter(s), got {len(parts)} in {text!r}")
        try:
            return [float(p) for p in parts]
        except ValueError as exc:
            raise LawParseError(f"bad number in {text!r}: {exc}") from None

    try:
        if name == "exp":
            return Exponential(*floats(1))
        if name == "gamma":
            return Gamma(*floats(2))
        if name == "pareto":
            return Pareto(*floats(2))
        if name == "weibull":
            return Weibull(*floats(2))
        if name == "det":
            return Deterministic(*floats(1))
        if name == "atoms":
            pairs = []
            for part in body.split(","):
                if ":" not in part:
                    raise LawParseError(f"atom {part!r} needs value:prob")
                v, p = part.split(":", 1)
                pairs.append((float(v), float(p)))
            return DiscreteAtoms(pairs)
        if name == "empirical":
            path = Path(body)
            if not path.exists():
                raise LawParseError(f"empirical file not found: {body}")
            samples = [float(line) for line in path.read_text().split() if line.strip()]
            return Empirical(samples, source=body)
    except LawParseError:
        raise
    except (ValueError, TypeError) as exc:
        raise LawParseError(f"invalid parameters in {text!r}: {exc}") from None
    raise LawParseError(f"unknown law family {name!r} in {text!r}")
