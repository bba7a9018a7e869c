"""Command-line harness: seeded experiment batches and geometry probes.

Batches read a flat key = value config file, run num_seeds independent
descents with seeds seed_base .. seed_base + num_seeds - 1, and write a
summary document (plus per-seed trace CSVs with --save-traces).  All outputs
embed the resolved-config hash and seed base, floats are printed at 17
significant digits, and aggregation is seed-sorted, so rerunning a config
reproduces every file byte for byte regardless of --jobs.

Exit codes: 0 ok, 1 usage or config error, 2 numerical abort (non-finite
objective), 3 gate failure under --check.
"""

import argparse
import concurrent.futures
import hashlib
import math
import os
import sys
from dataclasses import dataclass, fields, replace

import numpy as np

from . import landscape, phase_retrieval
from .datagen import gen_instance
from .descent import (
    STATUS_BALL,
    STATUS_NAN,
    BallStop,
    DescentConfig,
    recovery_error,
    riemannian_gd,
)
from .objectives import (
    default_dl_eta,
    default_sep_eta,
    default_sep_mu,
    dl_objective,
    sep_objective,
)
from .sphere import sample_uniform_sphere, scale_to_zeta

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2
EXIT_GATE = 3

PROBLEMS = ("separable", "dictionary", "phase_retrieval")
TRACE_COLUMNS = ("iter", "f", "grad_norm", "zeta", "w_inf", "dist_target")


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str
    n: int
    num_seeds: int
    seed_base: int
    max_iters: int
    p: int = 0
    theta: float = 0.0
    mu: float = 0.0  # 0 -> problem default
    eta: float = 0.0  # 0 -> problem default
    zeta0: float = 0.1
    r_or_s: float = 0.0  # 0 -> problem default target radius
    c: float = 1.0 / 35.0  # shell constant for phase retrieval
    dictionary_mode: str = "random_orthogonal"
    out_dir: str = "out"
    save_traces: bool = False


@dataclass(frozen=True)
class RunSummary:
    seed: int
    success: bool
    iterations: int
    final_f: float
    final_dist: float
    final_zeta: float
    status: str


_INT_KEYS = {"n", "p", "max_iters", "num_seeds", "seed_base"}
_FLOAT_KEYS = {"theta", "mu", "eta", "zeta0", "r_or_s", "c"}
_BOOL_KEYS = {"save_traces"}
_STR_KEYS = {"problem", "dictionary_mode", "out_dir"}
_ALL_KEYS = _INT_KEYS | _FLOAT_KEYS | _BOOL_KEYS | _STR_KEYS


def parse_config(path):
    """Read a flat key = value file; unknown keys are errors."""
    raw = {}
    try:
        text = open(path, "r", encoding="utf-8").read()
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}")
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in body.split("=", 1))
        if key not in _ALL_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        raw[key] = value
    return _build_config(raw)


def _build_config(raw):
    vals = {}
    for key, value in raw.items():
        try:
            if key in _INT_KEYS:
                vals[key] = int(value)
            elif key in _FLOAT_KEYS:
                vals[key] = float(value)
            elif key in _BOOL_KEYS:
                if value.lower() not in ("true", "false"):
                    raise ValueError("expected true/false")
                vals[key] = value.lower() == "true"
            else:
                vals[key] = value
        except ValueError as e:
            raise ConfigError(f"bad value for {key!r}: {e}")
    required = ("problem", "n", "num_seeds", "seed_base", "max_iters")
    missing = [k for k in required if k not in vals]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    cfg = ExperimentConfig(**vals)
    validate_config(cfg)
    return cfg


def validate_config(cfg):
    if cfg.problem not in PROBLEMS:
        raise ConfigError(f"problem must be one of {PROBLEMS}, got {cfg.problem!r}")
    if cfg.n < 2:
        raise ConfigError("n must be >= 2")
    if cfg.num_seeds < 1 or cfg.max_iters < 1:
        raise ConfigError("num_seeds and max_iters must be >= 1")
    for key in ("mu", "eta", "r_or_s"):
        if getattr(cfg, key) < 0.0:
            raise ConfigError(f"{key} must be positive (or omitted for the default)")
    if cfg.zeta0 <= 0.0:
        raise ConfigError("zeta0 must be positive")
    if cfg.problem == "dictionary":
        if cfg.p < 1:
            raise ConfigError("dictionary problem needs p >= 1")
        if not (0.0 < cfg.theta < 0.5):
            raise ConfigError("dictionary problem needs theta in (0, 1/2)")
        if cfg.dictionary_mode not in ("identity", "random_orthogonal"):
            raise ConfigError(f"unknown dictionary_mode {cfg.dictionary_mode!r}")
    if cfg.problem == "phase_retrieval" and not (0.0 < cfg.c < 0.25):
        raise ConfigError("phase_retrieval needs 0 < c < 1/4")


def resolve_config(cfg):
    """Fill problem defaults for mu, eta and the target radius."""
    mu, eta, r_or_s = cfg.mu, cfg.eta, cfg.r_or_s
    if cfg.problem == "separable":
        if mu == 0.0:
            mu = float(default_sep_mu(cfg.n))
        if eta == 0.0:
            eta = float(default_sep_eta(cfg.n, mu))
        if r_or_s == 0.0:
            r_or_s = float(mu * np.log(1.0 / mu))
    elif cfg.problem == "dictionary":
        if mu == 0.0:
            mu = 0.01
        if r_or_s == 0.0:
            r_or_s = 0.15
        if eta == 0.0:
            eta = float(default_dl_eta(cfg.n, cfg.p, cfg.theta, r_or_s))
    else:  # phase_retrieval: mu unused; eta defaults to 0.95 of the admissible cap
        if eta == 0.0:
            eta = 0.95 * math.sqrt(cfg.c) / 4.0  # unit-norm signal
        if r_or_s == 0.0:
            r_or_s = math.sqrt(5.0 * cfg.c)
    return replace(cfg, mu=mu, eta=eta, r_or_s=r_or_s)


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


# keys that identify the experiment; out_dir / save_traces are presentation only
_PRESENTATION_KEYS = {"out_dir", "save_traces"}


def config_lines(cfg):
    return [
        f"{f.name} = {_fmt(getattr(cfg, f.name))}"
        for f in fields(cfg)
        if f.name not in _PRESENTATION_KEYS
    ]


def config_hash(cfg):
    """Hash of the resolved scientific configuration; embedded in every output."""
    payload = "\n".join(config_lines(cfg)).encode()
    return hashlib.sha256(payload).hexdigest()[:16]


# ---------------------------------------------------------------------------
# batch runners


def _run_sep_seed(cfg, seed):
    rng = np.random.default_rng(seed)
    q0 = sample_uniform_sphere(cfg.n, rng)
    oracle = sep_objective(cfg.mu)
    dcfg = DescentConfig(
        eta=cfg.eta,
        max_iters=cfg.max_iters,
        stop_ball=BallStop(norm="linf", radius=cfg.r_or_s, center_mode="chart_origin"),
    )
    trace = riemannian_gd(oracle, q0, dcfg)
    summary = RunSummary(
        seed=seed,
        success=trace.status == STATUS_BALL,
        iterations=int(trace.iters[-1]),
        final_f=float(trace.f[-1]),
        final_dist=float(trace.dist_target[-1]),
        final_zeta=float(trace.zeta[-1]),
        status=trace.status,
    )
    return summary, trace


def _run_dl_seed(cfg, seed):
    rng = np.random.default_rng(seed)
    inst = gen_instance(cfg.n, cfg.p, cfg.theta, cfg.dictionary_mode, rng)
    q0 = sample_uniform_sphere(cfg.n, rng)
    oracle = dl_objective(inst.Y, cfg.mu)
    dcfg = DescentConfig(
        eta=cfg.eta,
        max_iters=cfg.max_iters,
        stop_ball=BallStop(norm="l2", radius=cfg.r_or_s, center_mode="best_signed_column"),
    )
    trace = riemannian_gd(oracle, q0, dcfg, target_basis=inst.A0)
    _, err = recovery_error(trace.q_final, inst)
    summary = RunSummary(
        seed=seed,
        success=trace.status == STATUS_BALL,
        iterations=int(trace.iters[-1]),
        final_f=float(trace.f[-1]),
        final_dist=err,
        final_zeta=float(trace.zeta[-1]),
        status=trace.status,
    )
    return summary, trace


def _run_one(args):
    cfg, seed = args
    if cfg.problem == "separable":
        summary, trace = _run_sep_seed(cfg, seed)
    else:
        summary, trace = _run_dl_seed(cfg, seed)
    return summary, (trace if cfg.save_traces else None)


def run_batch(cfg, jobs=1):
    """Run the batch; returns (summaries, traces, extras) seed-sorted.

    extras carries problem-specific aggregate fields (theory bounds, band
    statistics).  Results are independent of jobs.
    """
    cfg = resolve_config(cfg)
    if cfg.problem == "phase_retrieval":
        return _run_pr_batch(cfg)
    seeds = list(range(cfg.seed_base, cfg.seed_base + cfg.num_seeds))
    work = [(cfg, s) for s in seeds]
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_run_one, work))
    else:
        results = [_run_one(w) for w in work]
    summaries = [r[0] for r in results]
    traces = {s.seed: t for s, (_, t) in zip(summaries, results) if t is not None}
    extras = {}
    if cfg.problem == "separable":
        extras["theory_success_bound"] = max(0.0, 1.0 - 2.0 * math.log(cfg.n) * cfg.zeta0)
    return summaries, traces, extras


def _run_pr_batch(cfg):
    rng = np.random.default_rng(cfg.seed_base)
    x = np.zeros(cfg.n, dtype=complex)
    x[0] = 1.0  # unit-norm signal; the dynamics only see ||x|| and the span
    exp = phase_retrieval.pr_experiment(
        cfg.n, x, cfg.eta, cfg.c, cfg.zeta0, cfg.num_seeds, rng, max_iters=cfg.max_iters
    )
    summaries = []
    for k, run in enumerate(exp.runs):
        summaries.append(
            RunSummary(
                seed=cfg.seed_base + k,
                success=run.converged,
                iterations=run.iterations,
                final_f=float(phase_retrieval.pr_value(run.final_z, x)),
                final_dist=run.final_dist,
                final_zeta=run.min_zeta,
                status=STATUS_BALL if run.converged else "max_iters",
            )
        )
    extras = {
        "band_fraction": exp.band_fraction,
        "band_bound": exp.band_bound,
        "total_draws": exp.total_draws,
        "max_zeta_dev": max(r.max_zeta_dev for r in exp.runs),
        "max_w_dev": max(r.max_w_dev for r in exp.runs),
    }
    return summaries, {}, extras


# ---------------------------------------------------------------------------
# output writers


def _quantile(sorted_vals, q):
    if not sorted_vals:
        return 0.0
    return float(np.quantile(np.asarray(sorted_vals, dtype=float), q))


def write_summary(path, cfg, summaries, extras):
    h = config_hash(cfg)
    iters = sorted(s.iterations for s in summaries)
    nruns = len(summaries)
    nsucc = sum(s.success for s in summaries)
    lines = ["# spheregd batch summary", f"config_hash = {h}"]
    lines += config_lines(cfg)
    lines += [
        f"num_runs = {nruns}",
        f"num_success = {nsucc}",
        f"success_fraction = {_fmt(nsucc / nruns)}",
        f"iterations_p25 = {_fmt(_quantile(iters, 0.25))}",
        f"iterations_p50 = {_fmt(_quantile(iters, 0.50))}",
        f"iterations_p75 = {_fmt(_quantile(iters, 0.75))}",
    ]
    for key in sorted(extras):
        lines.append(f"{key} = {_fmt(extras[key])}")
    lines.append("[runs]")
    lines.append("seed,success,iterations,final_f,final_dist,final_zeta,status")
    for s in sorted(summaries, key=lambda r: r.seed):
        lines.append(
            f"{s.seed},{int(s.success)},{s.iterations},{_fmt(s.final_f)},"
            f"{_fmt(s.final_dist)},{_fmt(s.final_zeta)},{s.status}"
        )
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")


def write_trace_csv(path, trace, cfg, seed):
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# config_hash={config_hash(cfg)}\n")
        f.write(f"# seed_base={cfg.seed_base}\n")
        f.write(f"# seed={seed}\n")
        f.write(",".join(TRACE_COLUMNS) + "\n")
        for k in range(trace.iters.size):
            row = (
                str(int(trace.iters[k])),
                _fmt(float(trace.f[k])),
                _fmt(float(trace.grad_norm[k])),
                _fmt(float(trace.zeta[k])),
                _fmt(float(trace.w_inf[k])),
                _fmt(float(trace.dist_target[k])),
            )
            f.write(",".join(row) + "\n")


def _emit_table(out_dir, name, meta, columns, rows):
    lines = [f"# spheregd {name}"]
    for k, v in meta.items():
        lines.append(f"# {k}={_fmt(v)}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    text = "\n".join(lines) + "\n"
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, f"{name}.csv")
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        print(path)
    else:
        sys.stdout.write(text)


def _params_meta(args, keys):
    meta = {k: getattr(args, k) for k in keys}
    payload = "\n".join(f"{k}={_fmt(meta[k])}" for k in sorted(meta)).encode()
    meta["params_hash"] = hashlib.sha256(payload).hexdigest()[:16]
    return meta


# ---------------------------------------------------------------------------
# subcommands


def _cmd_run(args):
    cfg = parse_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed_base=args.seed)
    if args.out is not None:
        cfg = replace(cfg, out_dir=args.out)
    if args.save_traces:
        cfg = replace(cfg, save_traces=True)
    expected = {"run-sep": "separable", "run-dl": "dictionary", "run-pr": "phase_retrieval"}[args.command]
    if cfg.problem != expected:
        raise ConfigError(f"{args.command} needs problem = {expected}, config says {cfg.problem!r}")
    cfg = resolve_config(cfg)
    summaries, traces, extras = run_batch(cfg, jobs=args.jobs)

    os.makedirs(cfg.out_dir, exist_ok=True)
    write_summary(os.path.join(cfg.out_dir, "summary.txt"), cfg, summaries, extras)
    for seed in sorted(traces):
        write_trace_csv(
            os.path.join(cfg.out_dir, f"trace_seed{seed}.csv"), traces[seed], cfg, seed
        )
    print(os.path.join(cfg.out_dir, "summary.txt"))

    if any(s.status == STATUS_NAN for s in summaries):
        return EXIT_NUMERIC
    if args.check:
        frac = sum(s.success for s in summaries) / len(summaries)
        sigma = math.sqrt(max(frac * (1.0 - frac), 1.0 / len(summaries)) / len(summaries))
        if cfg.problem == "separable":
            gate = max(0.0, 1.0 - 2.0 * math.log(cfg.n) * cfg.zeta0) - 3.0 * sigma
        elif cfg.problem == "dictionary":
            gate = 0.9
        else:
            band_sigma = math.sqrt(0.25 / extras["total_draws"])
            if extras["band_fraction"] > extras["band_bound"] + 3.0 * band_sigma:
                return EXIT_GATE
            gate = 1.0
        if frac < gate:
            return EXIT_GATE
    return EXIT_OK


def _cmd_probe_volume(args):
    rng = np.random.default_rng(args.seed)
    frac, se = landscape.volume_estimate(args.n, args.zeta, args.samples, rng)
    meta = _params_meta(args, ("n", "zeta", "samples", "seed"))
    _emit_table(
        args.out,
        "probe-volume",
        meta,
        ("n", "zeta", "samples", "fraction", "std_error", "lower_bound"),
        [(args.n, args.zeta, args.samples, frac, se,
          max(0.0, 1.0 / (2 * args.n) - args.zeta * math.log(args.n) / args.n))],
    )
    return EXIT_OK


def _cmd_probe_projection(args):
    rng = np.random.default_rng(args.seed)
    zetas = [float(z) for z in args.zetas.split(",")]
    rows, fitted_c = landscape.projection_scan(args.n, args.mu, zetas, args.samples, rng)
    meta = _params_meta(args, ("n", "mu", "zetas", "samples", "seed"))
    meta["fitted_c"] = fitted_c
    meta["analytic_floor"] = landscape.projection_constant_floor(args.mu)
    _emit_table(
        args.out,
        "probe-projection",
        meta,
        ("zeta", "w_inf", "w_i_abs", "slope", "slope_over_winf_zeta"),
        rows,
    )
    return EXIT_OK


def _cmd_probe_fluctuation(args):
    rng = np.random.default_rng(args.seed)
    d = rng.standard_normal(args.n - 1)
    w = scale_to_zeta(d, args.zeta)
    i = int(np.argmax(np.abs(w)))
    p_list = [int(p) for p in args.p_list.split(",")]
    rows = landscape.fluctuation_probe(w, i, args.mu, args.theta, p_list, args.trials, rng)
    meta = _params_meta(args, ("n", "mu", "theta", "zeta", "p_list", "trials", "seed"))
    _emit_table(args.out, "probe-fluctuation", meta, ("p", "mean_abs_deviation"), rows)
    return EXIT_OK


def _cmd_probe_critical(args):
    pts = landscape.enumerate_critical_points(args.n)
    rows = []
    for cp in pts:
        pat = "".join({1: "+", -1: "-", 0: "0"}[v] for v in cp.pattern)
        rows.append((pat, cp.support_size, cp.kind))
    meta = _params_meta(args, ("n",))
    counts = {}
    for cp in pts:
        counts[cp.kind] = counts.get(cp.kind, 0) + 1
    for kind in sorted(counts):
        meta[f"count_{kind}"] = counts[kind]
    _emit_table(args.out, "probe-critical", meta, ("pattern", "support_size", "kind"), rows)
    return EXIT_OK


def _cmd_probe_pr_identities(args):
    rng = np.random.default_rng(args.seed)
    x = np.zeros(args.n, dtype=complex)
    x[0] = 1.0
    eta = 0.95 * phase_retrieval.max_step_size(x, args.c)
    z0 = phase_retrieval.sample_ball(args.n, 1.0 / math.sqrt(2.0), rng)
    run = phase_retrieval.pr_descend(z0, x, eta, args.c, args.steps)
    meta = _params_meta(args, ("n", "steps", "c", "seed"))
    _emit_table(
        args.out,
        "probe-pr-identities",
        meta,
        ("steps", "max_zeta_rel_dev", "max_w_rel_dev", "converged"),
        [(args.steps, run.max_zeta_dev, run.max_w_dev, int(run.converged))],
    )
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # usage errors exit with code 1 (argparse defaults to 2)
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="spheregd", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("run-sep", "run-dl", "run-pr"):
        sp = sub.add_parser(name, help=f"{name} batch from a config file")
        sp.add_argument("--config", required=True)
        sp.add_argument("--seed", type=int, default=None, help="override seed_base")
        sp.add_argument("--jobs", type=int, default=1)
        sp.add_argument("--out", default=None, help="override out_dir")
        sp.add_argument("--save-traces", action="store_true")
        sp.add_argument("--check", action="store_true", help="exit 3 if the gate fails")
        sp.set_defaults(func=_cmd_run)

    sp = sub.add_parser("probe-volume")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--zeta", type=float, required=True)
    sp.add_argument("--samples", type=int, default=1_000_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=_cmd_probe_volume)

    sp = sub.add_parser("probe-projection")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--mu", type=float, default=0.01)
    sp.add_argument("--zetas", default="0.1,0.2,0.5,1.0")
    sp.add_argument("--samples", type=int, default=100, help="points per zeta")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=_cmd_probe_projection)

    sp = sub.add_parser("probe-fluctuation")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--theta", type=float, default=0.25)
    sp.add_argument("--mu", type=float, default=0.01)
    sp.add_argument("--zeta", type=float, default=0.5)
    sp.add_argument("--p-list", default="100,1000,10000")
    sp.add_argument("--trials", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=_cmd_probe_fluctuation)

    sp = sub.add_parser("probe-critical")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=_cmd_probe_critical)

    sp = sub.add_parser("probe-pr-identities")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--steps", type=int, default=1000)
    sp.add_argument("--c", type=float, default=1.0 / 35.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=_cmd_probe_pr_identities)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"spheregd: config error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
