"""Config-driven experiment driver.

Subcommands: rate, scan, simulate, mc, verify. Every artifact embeds the
config hash and seed in a header comment (CSV) or field (JSON); identical
config+seed gives byte-identical output. Exit codes: 0 success, 2 config
error, 3 numeric failure, 4 check failure.
"""

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import mc as mcmod
from .errors import CheckError, LawParseError, RenewalLdpError
from .functions import parse_f, F_ONE, BivariateTestFunction, plateau
from .laws import make_rng, parse_law, spawn_rngs
from .mc import (Event, LdpEstimate, ESTIMATE_CSV_HEADER, parse_event,
                 free_energy_check, tightness_check)
from .ratefn import (DeltaMeasure, affine_scan, rate_J1_closed, rate_JF,
                     variational_crosscheck_J1)
from .renewal import empirical_integral, simulate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_CHECK = 4

_FIXED_SHARDS = 8


def _fmt(x):
    if x == math.inf:
        return "+inf"
    return f"{x:.12g}"


def _config_hash(ns):
    payload = {k: v for k, v in sorted(vars(ns).items())
               if k not in ("out", "threads", "func")}
    blob = json.dumps(payload, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _header(ns):
    seed = getattr(ns, "seed", None)
    seed_part = f" seed={seed}" if seed is not None else ""
    return f"# config={_config_hash(ns)}{seed_part}\n"


def _emit(ns, text):
    if ns.out:
        with open(ns.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_grid(text):
    try:
        lo, hi, count = text.split(":")
        lo, hi, count = float(lo), float(hi), int(count)
    except ValueError:
        raise LawParseError(f"grid must be lo:hi:count, got {text!r}") from None
    if count < 1 or hi < lo or lo <= 0:
        raise LawParseError(f"bad grid {text!r}")
    if count == 1:
        return [lo]
    return list(np.linspace(lo, hi, count))


# --------------------------------------------------------------------------

def _cmd_rate(ns):
    law = parse_law(ns.law)
    F = parse_f(ns.f)
    grid = _parse_grid(ns.grid)
    curve = affine_scan(law, grid, F=F)
    _emit(ns, _header(ns) + curve.to_csv())
    kink = "none" if curve.kink is None else _fmt(curve.kink)
    print(f"law={curve.law_spec} xi={_fmt(curve.xi)} T={_fmt(curve.T)} kink={kink}")
    return EXIT_OK


def _cmd_simulate(ns):
    law = parse_law(ns.law)
    rng = make_rng(ns.seed)
    path = simulate(law, ns.t, rng)
    n_t = path.arrivals.size
    s_prev = float(path.arrivals[-2]) if n_t >= 2 else 0.0
    a_t = ns.t - s_prev
    b_t = float(path.arrivals[-1]) - ns.t
    c_t = 0.0
    if ns.f is not None:
        F = parse_f(ns.f)
        taus = path.inter_arrivals()[:-1]
        if taus.size:
            c_t = float(np.sum(np.asarray(F(taus), dtype=float)))
    rows = [_header(ns).rstrip("\n"), "n_t,a_t,b_t,c_t",
            f"{n_t},{a_t:.12g},{b_t:.12g},{c_t:.12g}"]
    _emit(ns, "\n".join(rows) + "\n")
    if ns.dump:
        with open(ns.dump, "w") as fh:
            fh.write(path.to_csv())
    return EXIT_OK


def _pool_estimates(parts, t, event, sampler, n):
    p = sum(e.p_hat * e.n_samples for e in parts) / n
    m2 = sum((e.std_err ** 2 * e.n_samples + e.p_hat ** 2) * e.n_samples for e in parts) / n
    se = math.sqrt(max(m2 - p * p, 0.0) / n)
    censored = all(e.censored for e in parts) and p == 0.0
    return LdpEstimate(t=t, event=event, p_hat=p, std_err=se,
                       rate_hat=-math.log(max(p, 1.0 / n)) / t,
                       n_samples=n, sampler=sampler, censored=censored)


def run_mc_sharded(law, event, t, n, seed, sampler, F=None, threads=1):
    """Shard the sample budget over a fixed layout of child streams.

    The shard count never depends on the worker count, so the pooled estimate
    is byte-identical for any --threads value.
    """
    shards = _FIXED_SHARDS if n >= 8 * 1000 else 1
    sizes = [n // shards + (1 if i < n % shards else 0) for i in range(shards)]
    rngs = spawn_rngs(seed, shards)

    def one(i):
        if event.kind == mcmod.CUMUL_BAND:
            return mcmod.cumulative_ldp(law, F or F_ONE, event, t, sizes[i],
                                        rngs[i], sampler=sampler)
        if sampler == mcmod.NAIVE:
            return mcmod.naive_ldp(law, event, t, sizes[i], rngs[i])
        if sampler == mcmod.TILT:
            return mcmod.is_ldp_light(law, event, t, sizes[i], rngs[i])
        return mcmod.is_ldp_heavy(law, event, t, sizes[i], rngs[i])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(one, range(shards)))
    else:
        parts = [one(i) for i in range(shards)]
    out = _pool_estimates(parts, t, parts[0].event, sampler, n)
    return out


_SAMPLERS = {"naive": mcmod.NAIVE, "tilt": mcmod.TILT, "bigjump": mcmod.TILT_BIG_JUMP}


def _cmd_mc(ns):
    law = parse_law(ns.law)
    event = parse_event(ns.event)
    F = parse_f(ns.f) if ns.f else None
    sampler = _SAMPLERS[ns.sampler]
    est = run_mc_sharded(law, event, ns.t, ns.n, ns.seed, sampler, F=F,
                         threads=ns.threads)
    _emit(ns, _header(ns) + ESTIMATE_CSV_HEADER + "\n" + est.csv_row() + "\n")
    return EXIT_OK


# --------------------------------------------------------------------------
# verification suites

def _suite_crosscheck(law, ns):
    T = law.t_limit()
    lo, hi = law.support()
    m_lo = (1.0 / hi if hi < math.inf else 0.0) + 0.05
    m_hi = min(1.0 / lo if lo > 0 else 4.0, 4.0) - 0.05
    grid = np.linspace(max(m_lo, 0.1), max(m_hi, m_lo + 0.2), 12)
    items = []
    for m in grid:
        a = rate_JF(law, F_ONE, float(m))
        b = rate_J1_closed(law, float(m))
        v = variational_crosscheck_J1(law, float(m)).value
        if a == math.inf or b == math.inf:
            ok = a == b == v
        else:
            scale = max(abs(a), abs(b), 1e-9)
            ok = abs(a - b) <= 1e-6 * scale and abs(a - v) <= 1e-6 * scale
        items.append({"name": f"m={m:.6g}", "J_dual": _fmt(a),
                      "J_closed": _fmt(b), "J_variational": _fmt(v), "pass": bool(ok)})
    return items


def _suite_tightness(law, ns):
    rng = make_rng(ns.seed)
    rep = tightness_check(law, [0.01, 2.0, 3.0], [10.0, 20.0], ns.n, rng)
    return [{"name": f"M={M:g},t={t:g}", "freq": f, "bound": b, "pass": bool(ok)}
            for M, t, f, se, b, ok in rep.rows]


def _lln_test_functions():
    return [
        BivariateTestFunction(lambda a, b: 1.0 / (1.0 + a + b), bound=1.0,
                              limit=0.0, name="inv1p"),
        BivariateTestFunction(lambda a, b: (1.0 - np.exp(-a)) * (1.0 - np.exp(-b)),
                              bound=1.0, limit=1.0, name="prodsat"),
        BivariateTestFunction(lambda a, b: np.cos(a + b) * np.exp(-(a + b) / 2.0),
                              bound=1.0, limit=0.0, name="coswave"),
    ]


def _suite_lln(law, ns):
    items = []
    tilts = [0.0]
    if law.xi > 0.5 or law.xi == math.inf:
        tilts.append(-0.5)
    seeds = 6
    for c in tilts:
        tilted = law.tilt(c)
        limit_measure = DeltaMeasure.from_tilt(1.0, law, c)
        for f in _lln_test_functions():
            target = limit_measure.evaluate(f)
            vals = []
            for rng in spawn_rngs(ns.seed + int(1000 * abs(c)), seeds):
                path = simulate(tilted, ns.t, rng)
                vals.append(empirical_integral(path, f))
            mean = float(np.mean(vals))
            se = float(np.std(vals, ddof=1) / math.sqrt(seeds))
            ok = abs(mean - target) <= 3.0 * se
            items.append({"name": f"c={c:g},f={f.name}", "mean": mean,
                          "limit": target, "std_err": se, "pass": bool(ok)})
    return items


def documented_free_energy_specs():
    """The three documented free-energy inputs: two passing, one rejected."""
    phi = plateau(0.5, 1.5, 0.1, height=-1.0)
    phi_zero = plateau(0.5, 1.5, 0.1, height=0.0)
    return [
        {"name": "c=0,phi=-1@[0.5,1.5],M=10", "c": 0.0, "phi": phi, "M": 10.0,
         "expect": "pass"},
        {"name": "c=0,phi=0", "c": 0.0, "phi": phi_zero, "M": 10.0,
         "expect": "reject"},
        {"name": "c=0.5,phi=-1@[0.5,1.5],M=auto", "c": 0.5, "phi": phi, "M": None,
         "expect": "pass"},
    ]


def _suite_freeenergy(law, ns):
    items = []
    for i, spec in enumerate(documented_free_energy_specs()):
        rng = make_rng(ns.seed + i)
        try:
            rep = free_energy_check(law, spec["c"], spec["phi"], spec["M"],
                                    [10.0, 20.0], ns.n, rng)
            ok = rep.passed and spec["expect"] == "pass"
            items.append({"name": spec["name"], "detail": rep.to_dict(), "pass": bool(ok)})
        except CheckError as exc:
            ok = spec["expect"] == "reject"
            items.append({"name": spec["name"], "detail": f"rejected: {exc}", "pass": bool(ok)})
    return items


_SUITES = {
    "crosscheck": _suite_crosscheck,
    "tightness": _suite_tightness,
    "lln": _suite_lln,
    "freeenergy": _suite_freeenergy,
}


def _cmd_verify(ns):
    law = parse_law(ns.law)
    items = _SUITES[ns.suite](law, ns)
    passed = all(it["pass"] for it in items)
    report = {"suite": ns.suite, "law": law.spec(), "config": _config_hash(ns),
              "seed": ns.seed, "items": items, "pass": passed}
    _emit(ns, json.dumps(report, sort_keys=True, indent=2, default=str) + "\n")
    return EXIT_OK if passed else EXIT_CHECK


# --------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="renewal-ldp",
                                description="Renewal large-deviation rate toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed_required=True):
        sp.add_argument("--law", required=True, help="law spec, e.g. exp(1)")
        sp.add_argument("--out", default=None, help="output path (default stdout)")
        if seed_required:
            sp.add_argument("--seed", type=int, required=True,
                            help="64-bit seed (mandatory, no wall-clock default)")

    sp = sub.add_parser("rate", help="rate curve on an m-grid")
    common(sp, seed_required=False)
    sp.add_argument("--f", default="one", help="reward function spec")
    sp.add_argument("--grid", required=True, help="lo:hi:count")
    sp.set_defaults(func=_cmd_rate)

    sp = sub.add_parser("scan", help="rate curve with F == 1 and kink report")
    common(sp, seed_required=False)
    sp.add_argument("--grid", required=True, help="lo:hi:count")
    sp.set_defaults(func=_cmd_rate, f="one")

    sp = sub.add_parser("simulate", help="one trajectory summary")
    common(sp)
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--f", default=None, help="reward function for C_t")
    sp.add_argument("--dump", default=None, help="write the full path CSV here")
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("mc", help="rare-event estimate")
    common(sp)
    sp.add_argument("--event", required=True, help="count:m:d | countup:m | cumul:m:d")
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--sampler", choices=sorted(_SAMPLERS), default="naive")
    sp.add_argument("--f", default=None, help="reward function for cumul events")
    sp.add_argument("--threads", type=int,
                    default=int(os.environ.get("RENEWAL_LDP_THREADS", "1")))
    sp.set_defaults(func=_cmd_mc)

    sp = sub.add_parser("verify", help="named check suite, JSON report")
    common(sp)
    sp.add_argument("--suite", choices=sorted(_SUITES), required=True)
    sp.add_argument("--t", type=float, default=10000.0)
    sp.add_argument("--n", type=int, default=100000)
    sp.set_defaults(func=_cmd_verify)

    return p


def main(argv=None):
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return ns.func(ns)
    except LawParseError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CheckError as exc:
        print(f"check failure: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except (RenewalLdpError, ValueError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
