"""Command-line driver: ``poisson-cutout <command> [options]``.

Every command writes its CSV/JSON artifacts into ``--out`` together with a
``manifest.json`` holding the resolved configuration, its hash, the seed,
library versions and a timestamp. CSV files carry no timestamps so reruns
with the same configuration are byte-identical.

Exit status: 0 when every verdict is PASS, 1 when any is FAIL, 2 on usage
errors.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import avg_density as ad
from . import cutout_sim as cs
from . import thermo as th
from .errors import CutoutError, InvalidSpaceError
from .space_model import (CircleSpace, SelfSimilarSpace, solve_moran, space_from_json,
                          verify_q_regularity)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# name -> (type, default, help); defaults may be overridden by --config
PARAMS = {
    "gamma": (float, None, "intensity multiplier"),
    "t": (float, None, "truncation scale"),
    "depth": (int, th.DEFAULT_DEPTH, "cylinder depth for pressure sums"),
    "trials": (int, None, "Monte Carlo trials"),
    "x": (str, None, "comma-separated points"),
    "beta": (float, None, "density threshold"),
    "s": (float, None, "energy exponent"),
    "q_grid": (str, "-4:4:17", "q values as start:stop:num or a comma list"),
    "gammas": (str, None, "gamma values as start:stop:num or a comma list"),
    "n_min": (int, 6, "smallest scale exponent"),
    "n_max": (int, None, "largest scale exponent"),
    "k_max": (int, 5, "largest shift in the additivity table"),
    "points": (int, 100, "number of sampled points"),
    "n_alpha": (int, 200, "alpha grid size"),
    "cylinder": (str, None, "restrict mu to this cylinder word, e.g. 0 or 01"),
    "dump": (str, None, "write one realization to this CSV file name"),
}

COMMANDS = {
    "moran": ([], "similarity dimension and Moran residual"),
    "regularity": (["n_max"], "empirical Q-regularity constants"),
    "density": (["x", "gamma", "n_max"], "average densities and survival probabilities"),
    "additivity": (["n_max", "k_max", "points"], "asymptotic additivity table"),
    "pressure": (["q_grid", "depth"], "pressure brackets on a q grid"),
    "spectrum": (["depth", "n_alpha"], "multifractal spectrum and summary"),
    "mcurve": (["gammas", "depth"], "m(gamma) on a gamma grid"),
    "gamma0": (["depth"], "critical intensity with coarse bracket"),
    "alpha0": (["depth", "points"], "almost-sure average density"),
    "sublevel": (["beta", "n_min", "n_max", "depth"], "sublevel-set masses and exponent"),
    "simulate": (["gamma", "t", "trials", "n_min", "dump"], "covering-number exponents"),
    "survival": (["x", "t", "gamma", "trials"], "survival probability check"),
    "expected-measure": (["t", "gamma", "trials"], "expected measure of E_t"),
    "martingale": (["t", "gamma", "trials", "cylinder"], "martingale normalisation"),
    "energy": (["s"], "s-energy of the reference measure"),
    "extinction": (["gamma", "t", "trials"], "fraction of empty cutouts"),
    "sweep": (["gammas", "t", "trials", "n_min"], "covering exponents over a gamma grid"),
}


class UsageError(Exception):
    pass


def parse_list(text):
    """``"a:b:n"`` (inclusive linspace) or ``"x,y,z"``."""
    text = str(text).strip()
    if ":" in text:
        a, b, n = text.split(":")
        return np.linspace(float(a), float(b), int(n))
    return np.array([float(v) for v in text.split(",") if v.strip()])


def build_parser():
    parser = argparse.ArgumentParser(prog="poisson-cutout", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    for name, (params, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--space", default=None, help="space JSON file or bundled name")
        p.add_argument("--out", default=None, help="output directory (default: out)")
        p.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
        p.add_argument("--threads", type=int, default=None, help="worker threads (default 1)")
        p.add_argument("--config", default=None, help="JSON file with default options")
        for key in params:
            typ, _, h = PARAMS[key]
            p.add_argument("--" + key.replace("_", "-"), dest=key, type=typ, default=None, help=h)
    return parser


def resolve(args):
    """Merge command-line flags over the config file over built-in defaults."""
    cfg = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
        unknown = set(cfg) - set(PARAMS) - {"command", "space", "out", "seed", "threads"}
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        if "command" in cfg and cfg["command"] != args.command:
            raise UsageError(f"config is for command {cfg['command']!r}")
    out = {"command": args.command}
    for key, default in (("space", "ternary"), ("out", "out"), ("seed", 0), ("threads", 1)):
        val = getattr(args, key)
        out[key] = val if val is not None else cfg.get(key, default)
    for key in COMMANDS[args.command][0]:
        val = getattr(args, key)
        out[key] = val if val is not None else cfg.get(key, PARAMS[key][1])
    if out["threads"] < 1:
        raise UsageError("--threads must be at least 1")
    return out


def load_space(spec):
    if isinstance(spec, dict):
        return space_from_json(spec)
    return space_from_json(str(spec))


def base_ratio(space):
    return 0.5 if isinstance(space, CircleSpace) else float(space.ratios.max())


class Output:
    """Collects artifacts and verdicts for one run."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.dir = Path(cfg["out"])
        self.dir.mkdir(parents=True, exist_ok=True)
        self.files = []
        self.verdicts = []
        self.summary = {}
        self.prov = {"command": cfg["command"], "seed": str(cfg["seed"]),
                     "depth": str(cfg.get("depth", "")), "trials": str(cfg.get("trials", ""))}

    def csv(self, name, header, rows):
        path = self.dir / name
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([*header, *self.prov.keys()])
            for row in rows:
                w.writerow([fmt(v) for v in row] + list(self.prov.values()))
        self.files.append(name)

    def records(self, recs, name="records.csv"):
        for r in recs:
            if r.verdict:
                self.verdicts.append(r.verdict)
        cs.write_records(self.dir / name, recs, self.prov)
        self.files.append(name)

    def verdict(self, name, ok, estimate, theory=None):
        rec = cs.EstimateRecord(name, float(estimate), 0.0, 0, self.cfg["seed"], theory,
                                "PASS" if ok else "FAIL")
        return rec


def fmt(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    if v is None:
        return ""
    return str(v)


# -- commands -----------------------------------------------------------------------

def cmd_moran(space, cfg, out):
    if isinstance(space, CircleSpace):
        q, resid = 1.0, 0.0
    else:
        q = solve_moran(space.ratios)
        resid = abs(float(np.sum(space.ratios ** q)) - 1.0)
    out.summary.update(Q=q, residual=resid)
    out.records([out.verdict("moran_residual", resid <= 1e-12, resid, 0.0)])


def cmd_regularity(space, cfg, out):
    n_max = cfg["n_max"] or 12
    a = base_ratio(space)
    rng = np.random.default_rng(np.random.SeedSequence([cfg["seed"], 11]))
    xs = space.sample(rng, a ** (n_max + 4), 64)
    radii = a ** np.arange(1, n_max + 1)
    lo, hi = verify_q_regularity(space, [(x, r) for x in xs for r in radii])
    space.c0, space.C0 = lo, hi
    out.summary.update(c0_emp=lo, C0_emp=hi)
    out.records([out.verdict("regularity", 0 < lo <= hi < math.inf, hi / lo)])


def cmd_density(space, cfg, out):
    xs = parse_list(cfg["x"] or "0.0,0.25,0.5")
    gamma = 1.0 if cfg["gamma"] is None else cfg["gamma"]
    n_max = cfg["n_max"] or 12
    ts = base_ratio(space) ** np.arange(1, n_max + 1)
    rows = []
    for x in xs:
        for t in ts:
            a = ad.average_density(space, float(x), float(t))
            rows.append((float(x), float(t), a, float(t) ** (gamma * a)))
    out.csv("density.csv", ["x", "t", "A", "p"], rows)


def cmd_additivity(space, cfg, out):
    if not isinstance(space, SelfSimilarSpace):
        pts = np.linspace(0.05, 0.95, cfg["points"])
    else:
        rng = np.random.default_rng(np.random.SeedSequence([cfg["seed"], 12]))
        pts = attractor_points(space, rng, cfg["points"])
    n_max = cfg["n_max"] or 15
    eps = ad.check_asymptotic_additivity(space, n_max, cfg["k_max"], pts)
    out.csv("additivity.csv", ["n", "eps"], [(n, e) for n, e in enumerate(eps)])
    ref = min(5, n_max - 1)
    out.summary.update(n_ref=ref, eps_ref=float(eps[ref]), eps_last=float(eps[-1]))
    out.records([out.verdict("additivity_decay", eps[-1] < eps[ref], eps[-1], float(eps[ref]))])


def attractor_points(space, rng, n, depth=40):
    """Points of the attractor ``g_u(0)`` for random words ``u`` of length ``depth``."""
    digits = rng.choice(space.ell, size=(n, depth), p=space.probs)
    x = np.zeros(n)
    for k in range(depth - 1, -1, -1):
        d = digits[:, k]
        x = space.offsets[d] + space.ratios[d] * x
    return x


def cmd_pressure(space, cfg, out):
    qs = parse_list(cfg["q_grid"])
    curve = th.pressure_curve(space, qs, cfg["depth"])
    scale = -math.log(space.ratio) if space.equal_ratio else float("nan")
    rows = [(q, lo, hi, ex / scale) for q, lo, hi, ex in
            zip(qs, curve.low, curve.high, curve.increments[-1])]
    out.csv("pressure.csv", ["q", "P_low", "P_high", "P_tilde"], rows)
    second = np.diff(curve.increments[-1], 2)
    out.records([out.verdict("pressure_convexity", bool(np.all(second >= -1e-6)),
                             float(second.min()) if second.size else 0.0)])


def _spectrum_table(space, cfg):
    if isinstance(space, CircleSpace):
        return th.spectrum_table(space)
    return th.spectrum_table(space, depth=cfg["depth"], n_alpha=cfg.get("n_alpha") or 200)


def cmd_spectrum(space, cfg, out):
    tab = _spectrum_table(space, cfg)
    out.csv("spectrum.csv", ["alpha", "f"],
            [(a, None if not np.isfinite(f) else f) for a, f in zip(tab.alpha, tab.f)])
    out.summary.update(tab.summary())
    f0 = th.spectrum(space, tab.alpha0, depth=cfg["depth"]) if np.isfinite(tab.alpha0) else None
    ok = f0 is not None and abs(f0 - tab.Q) <= 5e-3
    out.records([out.verdict("f_at_alpha0", ok, f0 if f0 is not None else float("nan"), tab.Q)])


def cmd_mcurve(space, cfg, out):
    tab = _spectrum_table(space, cfg)
    gam = parse_list(cfg["gammas"]) if cfg["gammas"] else np.linspace(0, tab.gamma0 + 0.2, 10)
    vals = [th.m_of_gamma(space, g, table=tab, depth=cfg["depth"]) for g in gam]
    out.csv("mcurve.csv", ["gamma", "m", "legendre"], [(v.gamma, v.m, v.legendre) for v in vals])
    gap = max(abs(v.m - v.legendre) for v in vals)
    out.records([out.verdict("legendre_agreement", gap <= 1e-3, gap, 0.0)])


def cmd_gamma0(space, cfg, out):
    cb = ad.coarse_bounds(space)
    g0 = th.gamma_zero(space, cfg["depth"], d0=cb.d0)
    ok = cb.gamma0_low - 1e-9 <= g0 <= cb.gamma0_high + 1e-9
    out.summary.update(gamma0=g0, bracket=[cb.gamma0_low, cb.gamma0_high], d0=cb.d0, D0=cb.D0)
    out.records([out.verdict("gamma0_in_bracket", ok, g0, None)])


def cmd_alpha0(space, cfg, out):
    a0 = th.alpha_zero(space, cfg["depth"], cross_check=False)
    recs = []
    if isinstance(space, SelfSimilarSpace):
        mc, half = th.alpha_zero_mc(space, cfg["points"] if cfg["points"] else 400, cfg["seed"])
        recs.append(cs.EstimateRecord("alpha0_mc", mc, half, cfg["points"], cfg["seed"], a0,
                                      "PASS" if abs(mc - a0) <= 0.05 else "FAIL"))
        out.summary.update(alpha0=a0, alpha0_mc=mc)
    else:
        out.summary.update(alpha0=a0)
        recs.append(out.verdict("alpha0", True, a0))
    out.records(recs)


def cmd_sublevel(space, cfg, out):
    a0 = th.alpha_zero(space, cfg["depth"], cross_check=False)
    beta = cfg["beta"] if cfg["beta"] is not None else a0 - 0.1
    n_max = cfg["n_max"] or 14
    a = base_ratio(space)
    rs = a ** np.arange(cfg["n_min"], n_max + 1, dtype=float)
    res = [ad.sublevel_measure(space, beta, r, with_bracket=False) for r in rs]
    out.csv("sublevel.csv", ["r", "mass"], [(r.r, r.mass) for r in res])
    masses = np.array([r.mass for r in res])
    if np.all(masses > 0):
        slope = float(np.polyfit(np.log(rs), np.log(masses), 1)[0])
    else:
        slope = float("nan")
    f = th.spectrum(space, beta, depth=cfg["depth"])
    bound = space.Q - (f if f is not None else 0.0) - 0.1
    out.summary.update(beta=beta, slope=slope, bound=bound)
    out.records([out.verdict("sublevel_slope", slope >= bound, slope, bound)])


def _theory_slope(space, gamma, depth):
    if isinstance(space, CircleSpace) or space.equal_ratio:
        return th.tilde_pressure(space, -gamma, depth)
    return None


def _scales(space, cfg, default_n=14):
    a = base_ratio(space)
    if cfg.get("t") is not None:
        n_hi = max(cfg["n_min"] + 4, round(math.log(cfg["t"]) / math.log(a)))
    else:
        n_hi = default_n
    return a ** np.arange(cfg["n_min"], n_hi + 1, dtype=float)


def cmd_simulate(space, cfg, out):
    gamma = 0.2 if cfg["gamma"] is None else cfg["gamma"]
    trials = cfg["trials"] or 100
    scales = _scales(space, cfg)
    res = cs.covering_exponent(space, gamma, scales, trials, cfg["seed"], cfg["threads"],
                               theory=_theory_slope(space, gamma, cfg.get("depth") or 14))
    out.csv("counts.csv", ["t", "expected", "mean_inner", "mean_outer"],
            list(zip(res.scales, res.expected, res.mean_inner, res.mean_outer)))
    out.records([res.deterministic, res.stochastic])
    out.summary.update(outer_slope=res.outer_slope, warnings=res.warnings)
    if cfg.get("dump"):
        real = cs.simulate(space, gamma, float(scales[-1]), cs.trial_rng(cfg["seed"], 0, 3))
        cs.write_realization(out.dir / cfg["dump"], real)
        out.files.append(cfg["dump"])


def cmd_survival(space, cfg, out):
    x = float(parse_list(cfg["x"] or "0.0")[0])
    rec = cs.survival_mc(space, x, cfg["t"] or 0.01, 0.25 if cfg["gamma"] is None else cfg["gamma"],
                         cfg["trials"] or 10000, cfg["seed"], cfg["threads"])
    out.records([rec])


def cmd_expected_measure(space, cfg, out):
    t = cfg["t"] or (0.01 if isinstance(space, CircleSpace) else 3.0 ** -8)
    rec = cs.expected_measure_mc(space, t, 0.3 if cfg["gamma"] is None else cfg["gamma"],
                                 cfg["trials"] or 2000, cfg["seed"], cfg["threads"])
    out.records([rec])


def cmd_martingale(space, cfg, out):
    t = cfg["t"] or base_ratio(space) ** 6
    cyl = [int(c) for c in cfg["cylinder"]] if cfg["cylinder"] else None
    rec = cs.martingale_check(space, t, 0.3 if cfg["gamma"] is None else cfg["gamma"],
                              cfg["trials"] or 10000, cfg["seed"], cyl, cfg["threads"])
    out.records([rec])


def cmd_energy(space, cfg, out):
    s = cfg["s"] if cfg["s"] is not None else space.Q - 0.1
    res = cs.energy_integral(space, s)
    out.csv("energy.csv", ["level", "sum"], list(zip(res.levels, res.sums)))
    out.summary.update(s=s, value=res.value, diverges=res.diverges, rel_change=res.rel_change)
    rec = cs.EstimateRecord("energy", res.value, 0.0, 0, cfg["seed"])
    out.records([rec])


def cmd_extinction(space, cfg, out):
    gamma = cfg["gamma"]
    if gamma is None:
        gamma = th.gamma_zero(space, cfg.get("depth") or 14) + 0.5
    t = cfg["t"] or base_ratio(space) ** 8
    rec = cs.extinction_probe(space, gamma, t, cfg["trials"] or 200, cfg["seed"], cfg["threads"])
    out.summary.update(gamma=gamma, t=t)
    out.records([rec])


def cmd_sweep(space, cfg, out):
    gam = parse_list(cfg["gammas"] or "0:0.4:5")
    trials = cfg["trials"] or 50
    scales = _scales(space, cfg)
    rows, recs = [], []
    for g in gam:
        res = cs.covering_exponent(space, float(g), scales, trials, cfg["seed"], cfg["threads"],
                                   theory=_theory_slope(space, float(g), 14))
        rows.append((g, res.deterministic.estimate, res.stochastic.estimate,
                     res.deterministic.theory))
        res.stochastic.name = f"covering_slope_stochastic_gamma_{g:g}"
        res.deterministic.name = f"covering_slope_deterministic_gamma_{g:g}"
        recs += [res.deterministic, res.stochastic]
    out.csv("sweep.csv", ["gamma", "slope_deterministic", "slope_stochastic", "theory"], rows)
    out.records(recs)


HANDLERS = {name: globals()["cmd_" + name.replace("-", "_")] for name in COMMANDS}


def config_hash(cfg):
    canon = json.dumps({k: v for k, v in cfg.items() if k not in ("out", "threads")},
                       sort_keys=True, default=str)
    return hashlib.sha256(canon.encode()).hexdigest()


def write_manifest(out: Output, status):
    import numba
    import scipy

    cfg = dict(out.cfg)
    manifest = {
        "command": cfg["command"],
        "config": cfg,
        "config_hash": config_hash(cfg),
        "seed": cfg["seed"],
        "threads": cfg["threads"],
        "versions": {"poisson_cutout": __version__, "python": platform.python_version(),
                     "numpy": np.__version__, "scipy": scipy.__version__,
                     "numba": numba.__version__},
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "outputs": out.files,
        "verdicts": out.verdicts,
        "exit_status": status,
    }
    (out.dir / "manifest.json").write_text(json.dumps(manifest, indent=2, default=str) + "\n")


def run(cfg) -> int:
    """Run one resolved configuration; returns the exit status."""
    space = load_space(cfg["space"])
    out = Output(cfg)
    HANDLERS[cfg["command"]](space, cfg, out)
    if out.summary:
        (out.dir / "summary.json").write_text(
            json.dumps(out.summary, indent=2, sort_keys=True, default=float) + "\n")
        out.files.append("summary.json")
    status = EXIT_FAIL if "FAIL" in out.verdicts else EXIT_OK
    write_manifest(out, status)
    return status


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        cfg = resolve(args)
        status = run(cfg)
    except (UsageError, InvalidSpaceError, ValueError, CutoutError, NotImplementedError) as exc:
        print(f"poisson-cutout {args.command}: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    print(f"{args.command}: {'PASS' if status == EXIT_OK else 'FAIL'} -> {cfg['out']}")
    return status


if __name__ == "__main__":
    sys.exit(main())
