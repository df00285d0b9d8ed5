"""Command-line experiment runner.

Configuration is a flat ``key=value`` file (``--config``) overridden by
``--key value`` pairs on the command line.  Exit codes: 0 success, 1 bad
configuration, 2 a bound assertion failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import continuous as cont
from . import optimize as opt
from . import regret as rg
from .environments import PayoffStream, SplitMix64
from .errors import ConfigError, NoRegretError, UnsupportedError
from .geometry import ConvexBody, entropy, euclidean, minimal_depth_regularizer
from .schedules import ParameterSchedule
from .strategies import DESCRIPTIONS, NAMES, init, make_named, play_sequence

EXIT_OK, EXIT_CONFIG, EXIT_VIOLATION = 0, 1, 2
SLACK = 1e-8

# key -> (type, default); a default of None marks a key that must be supplied
KEYS: Dict[str, tuple] = {
    "n": (int, 1000),
    "seed": (int, 0),
    "out": (str, "-"),
    "nodes_per_interval": (int, 0),
    "strategy.name": (str, "EW"),
    "strategy.eta": (float, None),
    "strategy.alpha": (float, 0.5),
    "regularizer.kind": (str, "auto"),
    "schedule.kind": (str, "auto"),
    "schedule.eta": (float, 0.0),
    "schedule.alpha": (float, 0.0),
    "body.kind": (str, "simplex"),
    "body.dim": (int, 10),
    "body.norm_tag": (str, "auto"),
    "body.radius": (float, 1.0),
    "env.kind": (str, "iid_uniform"),
    "env.M": (float, 1.0),
    "env.seed": (int, -1),
    "env.noise_scale": (float, 0.5),
    "problem.kind": (str, "quadratic_ball"),
    "problem.dim": (int, 3),
    "problem.radius": (float, 1.0),
    "optimize.method": (str, "md_lazy"),
    "optimize.regularizer": (str, "euclidean"),
    "optimize.steps": (str, "inv_sqrt"),
    "optimize.gamma": (float, 0.0),
    "optimize.R": (int, 200),
}

REQUIRED = {
    "run-regret": ("strategy.eta",),
    "continuous-check": ("strategy.eta",),
    "run-convex": (),
    "run-stochastic": (),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def read_config_file(path: str) -> Dict[str, str]:
    out: Dict[str, str] = {}
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc.strerror}") from None
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = value
    return out


def _pairs(extra: Sequence[str]) -> Dict[str, str]:
    out: Dict[str, str] = {}
    i = 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--"):
            raise ConfigError(f"unexpected argument {tok!r}")
        tok = tok[2:]
        if "=" in tok:
            key, value = tok.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(extra):
                raise ConfigError(f"missing value for key '{tok}'")
            key, value = tok, extra[i + 1]
            i += 2
        out[key] = value
    return out


def resolve(command: str, raw: Dict[str, str]) -> Dict[str, object]:
    """Merge ``raw`` string settings over the defaults, coercing types."""
    cfg: Dict[str, object] = {}
    for key in raw:
        if key not in KEYS:
            raise ConfigError(f"unknown configuration key '{key}'")
    for key, (typ, default) in KEYS.items():
        if key in raw:
            try:
                cfg[key] = typ(raw[key])
            except ValueError:
                raise ConfigError(f"key '{key}' expects {typ.__name__}, got {raw[key]!r}") from None
        else:
            cfg[key] = default
    for key in REQUIRED.get(command, ()):
        if cfg[key] is None:
            raise ConfigError(f"missing required key '{key}'")
    if cfg["env.seed"] == -1:
        cfg["env.seed"] = cfg["seed"]
    if cfg["body.norm_tag"] == "auto":
        cfg["body.norm_tag"] = "l1" if cfg["body.kind"] == "simplex" else "l2"
    if cfg["n"] < 1:
        raise ConfigError("key 'n' must be >= 1")
    return cfg


def echo(cfg: Dict[str, object], stream=None) -> None:
    stream = stream or sys.stderr
    stream.write("# resolved configuration\n")
    for key in sorted(cfg):
        stream.write(f"{key}={cfg[key]}\n")


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".12g")


def write_csv(path: str, header: List[str], rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    text = buf.getvalue()
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _body(cfg) -> ConvexBody:
    d, kind, tag = cfg["body.dim"], cfg["body.kind"], cfg["body.norm_tag"]
    if d < 1:
        raise ConfigError("key 'body.dim' must be >= 1")
    if kind == "simplex":
        return ConvexBody.simplex(d, tag)
    if kind == "box":
        return ConvexBody.box(np.zeros(d), np.ones(d), tag)
    if kind == "ball":
        return ConvexBody.ball(np.zeros(d), cfg["body.radius"], tag)
    raise ConfigError(f"key 'body.kind' must be simplex, box or ball, got {kind!r}")


def _regularizer(kind: str, body: ConvexBody, key: str):
    if kind == "entropy":
        if body.kind != "simplex":
            raise ConfigError(f"key '{key}': entropy needs a simplex body")
        return entropy(body)
    if kind == "euclidean":
        return euclidean(body)
    if kind == "minimal":
        return minimal_depth_regularizer(body)
    raise ConfigError(f"key '{key}' must be entropy, euclidean or minimal, got {kind!r}")


def _strategy(cfg):
    name = cfg["strategy.name"]
    if name not in NAMES:
        raise ConfigError(f"key 'strategy.name' must be one of {', '.join(NAMES)}")
    body = _body(cfg)
    kind = cfg["regularizer.kind"]
    if kind == "auto":
        kind = "entropy" if (name in ("EW", "EW_PRIME") or body.kind == "simplex") and name != "OGD_L" else "euclidean"
    reg = _regularizer(kind, body, "regularizer.kind")
    if name in ("EW", "EW_PRIME") and reg.kind != "entropy":
        raise ConfigError(f"strategy {name} uses the entropic regularizer")
    state = make_named(name, eta=cfg["strategy.eta"], body=body, alpha=cfg["strategy.alpha"], reg=reg)
    named = True
    kind = cfg["schedule.kind"]
    if kind == "anytime":
        state = init(reg, ParameterSchedule.anytime(reg.K, reg.depth, cfg["env.M"]), name)
        named = False
    elif kind != "auto":
        state = init(reg, ParameterSchedule(kind, eta=cfg["schedule.eta"] or cfg["strategy.eta"],
                                            alpha=cfg["schedule.alpha"] or cfg["strategy.alpha"]), name)
        named = False
    stream = PayoffStream(dim=body.dim, M=cfg["env.M"], kind=cfg["env.kind"],
                          norm_tag=body.norm_tag, seed=cfg["env.seed"])
    return state, stream, named


def _first_violation(emp: np.ndarray, bound: np.ndarray, slack: float = SLACK):
    excess = emp - bound - slack * np.maximum(1.0, np.abs(bound))
    bad = np.flatnonzero(excess > 0)
    if bad.size == 0:
        return None
    k = int(bad[0])
    return k, float(emp[k] - bound[k])


def _report(violations) -> int:
    for label, stage, mag in violations:
        sys.stderr.write(f"bound violation: {label} at stage {stage} exceeded by {mag:.6g}\n")
    return EXIT_VIOLATION if violations else EXIT_OK


def cmd_regret(cfg) -> int:
    state, stream, named = _strategy(cfg)
    n = cfg["n"]
    reg, sched = state.reg, state.schedule
    traj = play_sequence(state, stream, n)
    emp = rg.regret_path(reg.body, traj.actions, traj.payoffs)
    norms = rg.dual_norms(reg, traj.payoffs)
    nan = np.full(n + 1, np.nan)

    def guarded(fn, *args, **kw):
        # restarting schedules carry no global bound; leave those columns empty
        try:
            return fn(*args, **kw)
        except UnsupportedError:
            return nan

    cols = {
        "bound_thm2_exact": guarded(rg.bound_thm2_path, reg, sched, n, norms=norms),
        "bound_thm2_M": guarded(rg.bound_thm2_path, reg, sched, n, M=stream.M),
        "bound_thm3": guarded(rg.bound_thm3_path, reg, sched, traj.payoffs),
        "bound_named": rg.named_bound_path(state.name, reg, sched, stream.M, n) if named else nan,
    }
    header = ["stage", "empirical_regret"] + list(cols)
    rows = zip(range(n + 1), emp, *cols.values())
    write_csv(cfg["out"], header, rows)
    violations = []
    for label, bound in cols.items():
        if np.all(np.isnan(bound)):
            continue
        hit = _first_violation(emp, bound)
        if hit:
            violations.append((label, *hit))
    return _report(violations)


def cmd_continuous(cfg) -> int:
    state, stream, _ = _strategy(cfg)
    traj = play_sequence(state, stream, cfg["n"])
    run = cont.InterpolatedRun(traj.payoffs, state.schedule, state.reg,
                               cfg["nodes_per_interval"] or None)
    gaps = cont.interval_gaps(run)
    write_csv(cfg["out"], ["interval", "lhs", "rhs", "abs_diff"],
              ([g.k, g.lhs, g.rhs, g.abs_diff] for g in gaps))
    tol = cont.identity_tolerance(state.reg)
    violations = [("interval_gap", g.k, g.abs_diff - tol) for g in gaps if g.abs_diff > tol][:1]
    creg, bound = cont.continuous_regret(run), cont.continuous_bound(run)
    if creg > bound + cont.BOUND_SLACK:
        violations.append(("continuous_regret", run.n, creg - bound))
    return _report(violations)


def _problem(cfg) -> opt.ConvexProgram:
    d = cfg["problem.dim"]
    if d < 1:
        raise ConfigError("key 'problem.dim' must be >= 1")
    rng = SplitMix64(cfg["seed"])
    kind = cfg["problem.kind"]
    if kind == "quadratic_ball":
        v = rng.uniform(-1.0, 1.0, d)
        radius = cfg["problem.radius"]
        x_star = 0.5 * radius * v / max(1.0, float(np.linalg.norm(v)))
        return opt.quadratic_ball_problem(x_star, radius)
    if kind == "l1_simplex":
        w = rng.floats(d) + 1e-3
        return opt.l1_simplex_problem(w / w.sum())
    raise ConfigError(f"key 'problem.kind' must be quadratic_ball or l1_simplex, got {kind!r}")


def _steps(cfg, reg, M: float, n: int) -> np.ndarray:
    gamma = cfg["optimize.gamma"] or math.sqrt(reg.K * reg.depth) / M
    kind = cfg["optimize.steps"]
    if kind == "inv_sqrt":
        return gamma / np.sqrt(np.arange(1, n + 1))
    if kind == "constant":
        return np.full(n, gamma)
    raise ConfigError(f"key 'optimize.steps' must be inv_sqrt or constant, got {kind!r}")


def cmd_convex(cfg) -> int:
    prog = _problem(cfg)
    n = cfg["n"]
    reg = _regularizer(cfg["optimize.regularizer"], prog.body, "optimize.regularizer")
    method = cfg["optimize.method"]
    steps = _steps(cfg, reg, prog.M, n)
    if method == "md_lazy":
        res = opt.md_lazy(prog, reg, steps, n)
    elif method == "psg_lazy":
        if reg.kind != "euclidean":
            raise ConfigError("psg_lazy uses a Euclidean regularizer")
        res = opt.psg_lazy(prog, steps, n, center=reg.center)
    elif method == "md_greedy":
        res = opt.md_greedy(prog, reg, steps, n)
    elif method == "variable_parameter":
        res = opt.variable_parameter_solve(prog, reg, n)
        steps = res.gammas
    else:
        raise ConfigError("key 'optimize.method' must be md_lazy, psg_lazy, md_greedy or "
                          "variable_parameter")
    stage = np.arange(1, n + 1)
    gap_min = res.f_best - prog.f_min
    gap_avg = res.f_avg - prog.f_min
    varstep = opt.value_bound_varstep_path(reg.depth, reg.K, prog.M, steps)
    vartemp = opt.value_bound_vartemp(reg.depth, reg.K, prog.M, stage)
    write_csv(cfg["out"], ["stage", "f_gap_min", "f_gap_avg", "bound_varstep", "bound_vartemp"],
              zip(stage, gap_min, gap_avg, varstep, vartemp))
    checked = {"md_lazy": varstep, "psg_lazy": varstep, "variable_parameter": vartemp}.get(method)
    violations = []
    if checked is not None:
        for label, emp in (("f_gap_min", gap_min), ("f_gap_avg", gap_avg)):
            hit = _first_violation(emp, checked)
            if hit:
                violations.append((label, hit[0] + 1, hit[1]))
    return _report(violations)


def cmd_stochastic(cfg) -> int:
    prog = _problem(cfg)
    n = cfg["n"]
    reg = _regularizer(cfg["optimize.regularizer"], prog.body, "optimize.regularizer")
    steps = _steps(cfg, reg, prog.M, n)
    res = opt.mdsa_lazy(prog, reg, steps, n, noise_scale=cfg["env.noise_scale"],
                        R=cfg["optimize.R"], seed=cfg["seed"])
    stage = np.arange(1, n + 1)
    varstep = opt.value_bound_varstep_path(reg.depth, reg.K, res.M_noisy, steps)
    vartemp = opt.value_bound_vartemp(reg.depth, reg.K, res.M_noisy, stage)
    write_csv(cfg["out"], ["stage", "f_gap_min", "f_gap_avg", "bound_varstep", "bound_vartemp"],
              zip(stage, res.mean_gap_min, res.mean_gap_avg, varstep, vartemp))
    sys.stderr.write(f"mean gap {res.mean:.6g}, std error {res.std_error:.3g}, "
                     f"95% CI [{res.ci_low:.6g}, {res.ci_high:.6g}]\n")
    violations = []
    limit = varstep[-1] + 3.0 * res.std_error
    if res.mean > limit:
        violations.append(("mean f_gap_avg", n, res.mean - limit))
    return _report(violations)


def cmd_list(_cfg=None) -> int:
    for name in NAMES:
        sys.stdout.write(f"{name}\t{DESCRIPTIONS[name]}\n")
    return EXIT_OK


COMMANDS = {
    "run-regret": cmd_regret,
    "continuous-check": cmd_continuous,
    "run-convex": cmd_convex,
    "run-stochastic": cmd_stochastic,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="noregret", description="No-regret learning experiments.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in list(COMMANDS) + ["list-algorithms"]:
        p = sub.add_parser(name)
        if name == "list-algorithms":
            continue
        p.add_argument("--config", help="flat key=value configuration file")
        p.add_argument("--seed", type=int)
        p.add_argument("--n", type=int)
        p.add_argument("--out", help="CSV output path ('-' for stdout)")
        p.add_argument("--nodes_per_interval", type=int)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args, extra = build_parser().parse_known_args(argv)
        if args.command is None:
            raise ConfigError("a subcommand is required: " + ", ".join(list(COMMANDS) + ["list-algorithms"]))
        if args.command == "list-algorithms":
            if extra:
                raise ConfigError(f"unexpected arguments {extra}")
            return cmd_list()
        raw: Dict[str, str] = {}
        if args.config:
            raw.update(read_config_file(args.config))
        raw.update(_pairs(extra))
        for key in ("seed", "n", "out", "nodes_per_interval"):
            val = getattr(args, key)
            if val is not None:
                raw[key] = str(val)
        cfg = resolve(args.command, raw)
        echo(cfg)
        return COMMANDS[args.command](cfg)
    except (ConfigError, NoRegretError, ValueError, NotImplementedError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
