"""furst-lab: the experiment runner.

Subcommands: gen | check-set | incidence | highlow | furstenberg |
mainlem | fourier | suite.  Configuration comes from an optional flat
key=value file (``#`` comments allowed) overridden by command-line flags.
Exit codes: 0 all asserted thresholds pass, 2 threshold failure, 1
usage/validation error.

Determinism contract: per-trial seed = master_seed + trial_index, trials
may run on any number of worker threads, and results are sorted by
(delta_exp, seed) before writing, so output CSVs are byte-identical across
runs and thread counts.  Every CSV ends with a provenance footer comment
carrying the version and a hash of the semantic configuration (thread
count and output paths excluded); wall time goes to the run summary, not
the CSV, to keep the byte-identity guarantee.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from . import __version__
from . import config as cf
from . import fourier as fo
from . import incidence as inc
from .dyadic import DiscretePointSet, ParameterError, delta_set_constant, generate_delta_set
from .family import DomainError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_THRESHOLD = 2


class ValidationError(ValueError):
    pass


# --------------------------------------------------------------------------
# Run configuration
# --------------------------------------------------------------------------

@dataclass
class RunConfig:
    subcommand: str = ""
    kind: str = "parabola"
    delta_exp: tuple[int, ...] = (8,)
    Delta_exp: int = 4
    s: float = 0.5
    t: float = 1.0
    T: int = 0                  # 0: pick delta_exp itself (single-level tree)
    lam: float = 2.0
    S: tuple[float, ...] = ()   # empty: default 2*lam*{1,2,4}
    eps: float = 0.25
    p: float = 8.0
    R: tuple[float, ...] = (4.0, 8.0, 16.0, 32.0, 64.0)
    seeds: int = 1
    master_seed: int = 0
    grid_n: int = 2049
    eta_max: float = 0.5
    slope_max: float = 0.3
    c0_margin: float = 1.0      # calibrated C0 is scaled by this factor
    threads: int = 1
    out: str = "out.csv"
    input: str = ""

    #: keys that do not change experiment semantics (excluded from the hash)
    NON_SEMANTIC = ("threads", "out", "input", "subcommand")

    def semantic_hash(self) -> str:
        items = []
        for f in fields(self):
            if f.name in self.NON_SEMANTIC or f.name == "NON_SEMANTIC":
                continue
            items.append(f"{f.name}={getattr(self, f.name)!r}")
        blob = ";".join(sorted(items)).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    def period_for(self, delta_exp: int) -> int:
        if self.T <= 0:
            return delta_exp
        if delta_exp % self.T != 0:
            raise ValidationError(
                f"delta exponent {delta_exp} is not a multiple of the period T={self.T}"
            )
        return self.T


def _parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in str(text).split(",") if v != "")


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in str(text).split(",") if v != "")


_CONFIG_PARSERS = {
    "kind": str,
    "delta_exp": _parse_int_list,
    "Delta_exp": int,
    "s": float,
    "t": float,
    "T": int,
    "lam": float,
    "S": _parse_float_list,
    "eps": float,
    "p": float,
    "R": _parse_float_list,
    "seeds": int,
    "master_seed": int,
    "grid_n": int,
    "eta_max": float,
    "slope_max": float,
    "c0_margin": float,
    "threads": int,
    "out": str,
    "input": str,
}


def parse_config_file(path: str) -> dict:
    """Flat key=value file; '#' starts a comment; unknown keys are an error."""
    out = {}
    unknown = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, val = (part.strip() for part in line.split("=", 1))
            if key not in _CONFIG_PARSERS:
                unknown.append(key)
                continue
            out[key] = _CONFIG_PARSERS[key](val)
    if unknown:
        raise ValidationError(f"{path}: unknown keys: {', '.join(sorted(unknown))}")
    return out


# --------------------------------------------------------------------------
# CSV writing
# --------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def write_csv(path: str, header: str, rows, config: RunConfig) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        fh.write(header + "\n")
        n = 0
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
            n += 1
        fh.write(f"# furst-lab {__version__} config={config.semantic_hash()} rows={n}\n")


def _run_trials(trials, worker, threads: int):
    """Run worker over trials on a thread pool; order of results = order of trials."""
    if threads <= 1:
        return [worker(t) for t in trials]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, trials))


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------

def cmd_gen(config: RunConfig) -> int:
    de = config.delta_exp[0]
    pset = generate_delta_set(de, config.s, config.period_for(de), config.master_seed, dim=1)
    pset.to_csv(config.out)
    with open(config.out, "a") as fh:
        fh.write(f"# furst-lab {__version__} config={config.semantic_hash()} rows={len(pset)}\n")
    print(f"gen: wrote {len(pset)} points at delta=2^-{de} to {config.out}")
    return EXIT_OK


def cmd_check_set(config: RunConfig) -> int:
    if not config.input:
        raise ValidationError("check-set needs --input pointing at a points CSV")
    pset = DiscretePointSet.from_csv(config.input, config.delta_exp[0])
    rep = delta_set_constant(pset, config.s)
    print(
        f"check-set: |P|={len(pset)} delta=2^-{config.delta_exp[0]} s={config.s} "
        f"C={rep.best_constant:.6g} witness center={rep.witness_center} r={rep.witness_radius}"
    )
    return EXIT_OK


def cmd_incidence(config: RunConfig) -> int:
    de = config.delta_exp[0]
    conf = cf.build_nice_configuration(
        config.kind, de, config.s, config.t, config.period_for(de),
        config.master_seed, audit="probe", grid_n=config.grid_n,
    )
    P = conf.union_squares()
    fast = inc.incidences(conf.family, P, config.lam)
    brute = inc.incidences_bruteforce(conf.family, P, config.lam)
    equal = fast.count == brute.count and np.array_equal(fast.pairs, brute.pairs)
    inc.pairs_to_csv(fast, P, config.out)
    print(
        f"incidence: |F|={conf.n_curves} |P|={len(P)} lam={config.lam} "
        f"fast={fast.count} brute={brute.count} equal={equal}; pairs -> {config.out}"
    )
    return EXIT_OK if equal else EXIT_THRESHOLD


def _highlow_rows(config: RunConfig):
    """(rows, ok): calibrate C0 at the largest delta, require it at the rest."""
    exps = sorted(config.delta_exp)
    S_values = config.S if config.S else tuple(2 * config.lam * f for f in (1, 2, 4))
    reports: dict[int, list] = {}

    def run_one(de: int):
        conf = cf.build_nice_configuration(
            config.kind, de, config.s, config.t, config.period_for(de),
            config.master_seed, audit="probe", grid_n=config.grid_n,
        )
        P = conf.union_squares()
        return [inc.high_low_report(conf.family, P, config.lam, S) for S in S_values]

    results = _run_trials(exps, run_one, config.threads)
    for de, reps in zip(exps, results):
        reports[de] = reps
    calib = exps[0]
    C0 = config.c0_margin * max(r.fitted_C for r in reports[calib])
    rows = []
    ok = True
    for de in exps:
        for rep in reports[de]:
            sat = rep.satisfies(C0) or de == calib
            ok = ok and sat
            rows.append(
                (config.kind, de, rep.S, rep.lhs, rep.high_term, rep.low_term,
                 rep.fitted_C, C0, int(sat))
            )
    return rows, ok


def cmd_highlow(config: RunConfig) -> int:
    rows, ok = _highlow_rows(config)
    write_csv(config.out, "kind,delta_exp,S,lhs,high_term,low_term,fitted_C,C0,ok", rows, config)
    print(f"highlow: {len(rows)} rows -> {config.out}; inequality holds: {ok}")
    return EXIT_OK if ok else EXIT_THRESHOLD


def _furstenberg_rows(config: RunConfig):
    trials = []
    for de in config.delta_exp:
        for i in range(config.seeds):
            trials.append((de, config.master_seed + i))

    def run_one(trial):
        de, seed = trial
        conf = cf.build_nice_configuration(
            config.kind, de, config.s, config.t, config.period_for(de), seed,
            audit="probe", grid_n=config.grid_n,
        )
        return cf.furstenberg_experiment(conf)

    results = _run_trials(trials, run_one, config.threads)
    results.sort(key=lambda r: (r.delta_exp, r.seed))
    return results


def cmd_furstenberg(config: RunConfig) -> int:
    results = _furstenberg_rows(config)
    rows = [r.csv_row().split(",") for r in results]
    write_csv(config.out, cf.ExperimentResult.CSV_HEADER, rows, config)
    worst = max(r.eta_emp for r in results)
    ok = worst <= config.eta_max
    print(
        f"furstenberg: {len(results)} runs -> {config.out}; "
        f"max eta_emp={worst:.4f} (threshold {config.eta_max}); pass: {ok}"
    )
    return EXIT_OK if ok else EXIT_THRESHOLD


def cmd_mainlem(config: RunConfig) -> int:
    de = config.delta_exp[0]
    fam = cf.build_uniform_line_family(de, config.Delta_exp, config.master_seed)
    ev = cf.MainlemEvaluator(fam, de, config.Delta_exp, config.eps, config.lam)
    reports = ev.sweep()
    rows = [
        (r.a, r.b, r.P_ab_size, r.pre_filter_size, r.bound, int(r.hypotheses_met), int(r.violation))
        for r in reports
    ]
    write_csv(config.out, "a,b,P_ab,pre_filter,bound,hypotheses_met,violation", rows, config)
    violations = sum(r.violation for r in reports)
    print(
        f"mainlem: |F|={len(fam)} delta=2^-{de} Delta=2^-{config.Delta_exp} eps={config.eps}: "
        f"{len(reports)} (a,b) cells, violations={violations} -> {config.out}"
    )
    return EXIT_OK if violations == 0 else EXIT_THRESHOLD


def cmd_fourier(config: RunConfig) -> int:
    de = config.delta_exp[0]
    if config.kind == "parabola":
        lift = fo.uniform_grid_lift(lambda x: np.asarray(x, dtype=float) ** 2, de, s=1.0)
    elif config.kind == "point":
        from .dyadic import AtomicMeasure

        lift = AtomicMeasure(np.array([[0.0, 0.0]]), np.array([1.0]))
    else:
        raise ValidationError(f"fourier supports kind parabola | point, got {config.kind!r}")
    rep = fo.decay_slope(lift, config.p, config.R)
    rows = rep.rows()
    write_csv(config.out, "R,p,integral,slope_cum", rows, config)
    ok = rep.slope <= config.slope_max
    print(
        f"fourier: kind={config.kind} p={config.p} slope={rep.slope:.4f} "
        f"(threshold {config.slope_max}) -> {config.out}; pass: {ok}"
    )
    return EXIT_OK if ok else EXIT_THRESHOLD


def cmd_suite(config: RunConfig) -> int:
    """A reduced end-to-end pass writing one CSV per experiment family."""
    t_start = time.time()
    out_dir = config.out if config.out != "out.csv" else "suite_out"
    os.makedirs(out_dir, exist_ok=True)
    failures = []

    fconf = RunConfig(**{**_config_dict(config), "subcommand": "furstenberg",
                         "delta_exp": (6, 8), "T": 2, "seeds": config.seeds or 4,
                         "out": os.path.join(out_dir, "furstenberg.csv")})
    results = _furstenberg_rows(fconf)
    rows = [r.csv_row().split(",") for r in results]
    write_csv(fconf.out, cf.ExperimentResult.CSV_HEADER, rows, fconf)
    if max(r.eta_emp for r in results) > config.eta_max:
        failures.append("furstenberg eta_emp")

    hconf = RunConfig(**{**_config_dict(config), "subcommand": "highlow",
                         "delta_exp": (6, 7, 8), "T": 0,
                         "out": os.path.join(out_dir, "highlow.csv")})
    rows, ok = _highlow_rows(hconf)
    write_csv(hconf.out, "kind,delta_exp,S,lhs,high_term,low_term,fitted_C,C0,ok", rows, hconf)
    if not ok:
        failures.append("high-low inequality")

    mconf = RunConfig(**{**_config_dict(config), "subcommand": "mainlem",
                         "delta_exp": (8,), "out": os.path.join(out_dir, "mainlem.csv")})
    code = cmd_mainlem(mconf)
    if code != EXIT_OK:
        failures.append("mainlem bound")

    oconf = RunConfig(**{**_config_dict(config), "subcommand": "fourier",
                         "delta_exp": (8,), "out": os.path.join(out_dir, "fourier.csv")})
    code = cmd_fourier(oconf)
    if code != EXIT_OK:
        failures.append("fourier slope")

    iconf = RunConfig(**{**_config_dict(config), "subcommand": "incidence",
                         "delta_exp": (6,), "T": 2,
                         "out": os.path.join(out_dir, "incidence.csv")})
    code = cmd_incidence(iconf)
    if code != EXIT_OK:
        failures.append("incidence oracle")

    wall = time.time() - t_start
    summary = os.path.join(out_dir, "summary.txt")
    with open(summary, "w") as fh:
        fh.write(f"furst-lab {__version__} suite\n")
        fh.write(f"config hash: {config.semantic_hash()}\n")
        fh.write(f"wall time: {wall:.2f} s\n")
        fh.write(f"threads: {config.threads}\n")
        fh.write("result: " + ("PASS" if not failures else "FAIL " + ", ".join(failures)) + "\n")
    print(f"suite: {'PASS' if not failures else 'FAIL: ' + ', '.join(failures)} ({wall:.1f} s) -> {out_dir}")
    return EXIT_OK if not failures else EXIT_THRESHOLD


def _config_dict(config: RunConfig) -> dict:
    return {f.name: getattr(config, f.name) for f in fields(config)}


COMMANDS = {
    "gen": cmd_gen,
    "check-set": cmd_check_set,
    "incidence": cmd_incidence,
    "highlow": cmd_highlow,
    "furstenberg": cmd_furstenberg,
    "mainlem": cmd_mainlem,
    "fourier": cmd_fourier,
    "suite": cmd_suite,
}


# --------------------------------------------------------------------------
# Argument parsing
# --------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's default 2
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> _Parser:
    p = _Parser(prog="furst-lab", description=__doc__)
    p.add_argument("subcommand", choices=sorted(COMMANDS))
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--kind")
    p.add_argument("--delta-exp", dest="delta_exp")
    p.add_argument("--Delta-exp", dest="Delta_exp", type=int)
    p.add_argument("--s", type=float)
    p.add_argument("--t", type=float)
    p.add_argument("--T", type=int)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--S")
    p.add_argument("--eps", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--R")
    p.add_argument("--seeds", type=int)
    p.add_argument("--master-seed", dest="master_seed", type=int)
    p.add_argument("--grid-n", dest="grid_n", type=int)
    p.add_argument("--eta-max", dest="eta_max", type=float)
    p.add_argument("--slope-max", dest="slope_max", type=float)
    p.add_argument("--c0-margin", dest="c0_margin", type=float)
    p.add_argument("--threads", type=int)
    p.add_argument("--out")
    p.add_argument("--input")
    return p


def resolve_config(argv) -> RunConfig:
    args = build_parser().parse_args(argv)
    values: dict = {}
    if args.config:
        values.update(parse_config_file(args.config))
    for key in _CONFIG_PARSERS:
        cli_val = getattr(args, key, None)
        if cli_val is None:
            continue
        values[key] = _CONFIG_PARSERS[key](cli_val) if isinstance(cli_val, str) else cli_val
    values["subcommand"] = args.subcommand
    env_threads = os.environ.get("FURSTLAB_THREADS")
    if env_threads:
        values["threads"] = int(env_threads)
    config = RunConfig(**values)
    _validate(config)
    return config


def _validate(config: RunConfig) -> None:
    if not config.delta_exp:
        raise ValidationError("need at least one delta exponent")
    for de in config.delta_exp:
        if de < 1:
            raise ValidationError(f"delta exponent must be >= 1, got {de}")
    if config.seeds < 1:
        raise ValidationError("seed count must be >= 1")
    if config.eta_max <= 0 or config.slope_max <= 0:
        raise ValidationError("thresholds must be positive")
    for R in config.R:
        e = math.log2(R)
        if abs(e - round(e)) > 1e-9:
            raise ValidationError(f"R values must be dyadic, got {R}")


def run(config: RunConfig) -> int:
    """Execute the configured experiment; returns the process exit code."""
    return COMMANDS[config.subcommand](config)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = resolve_config(argv)
    except SystemExit as e:
        return int(e.code or 0)
    except (ValidationError, OSError) as e:
        print(f"furst-lab: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return run(config)
    except (ValidationError, ParameterError, DomainError) as e:
        print(f"furst-lab: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
