"""Command-line entry point: ``gqconc <command> [flags]``.

Commands reproduce the tabulated and worked-example values, run randomized
verification sweeps and write plot-ready data. Exit status is 0 when every
check passes, 1 on a numeric mismatch and 2 on a usage or config error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import os
import platform
import sys
from dataclasses import replace
from typing import Any, Callable

import numpy as np

from . import __version__
from .analysis import (
    GridSpec,
    boundary_divergence_probe,
    fd_second_derivative,
    figure_data,
    gradient_M_grid,
    h2_curve,
    h_curve,
    lemma1_scan,
    lemma2_scan,
    limit_t1_gq,
    limit_t1_gq_tilde,
)
from .catalog import (
    TABLE1_K,
    TABLE1_Q,
    TABLE1_VALUES,
    antisymmetric_333,
    family_422,
    family_422_c2,
    l_q_bound,
    m_and_mq_422,
    q0_bracket,
    w_state,
    w_table1_value,
    w_tau,
)
from .measures import concurrence_pure
from .monogamy import (
    DEFAULT_Q_GRID,
    MONOGAMY_TOL,
    HierarchySpec,
    compare_sc_sgqc,
    hierarchy_sweep,
    residual_from_values,
    tau_qk_pure,
)
from .qcore import derive_seed, haar_random_pure, random_mixed
from .roof import RoofConfig, theorem1_checks

SCHEMA_VERSION = 1
TABLE1_TOL = 1.5e-4
THEOREM1_TOL = {(2, 2): 1e-3, (2, 3): 5e-3}
THEOREM1_Q = (1.25, 1.5, 1.75, 2.0)
# block-term roofs in sweeps: one restart, short descent; upper bounds only
# make residuals smaller, and any violation is re-run at 5x restarts
SWEEP_ROOF = RoofConfig(restarts=1, max_iters=30, step_tolerance=1e-7)

DEFAULTS: dict[str, Any] = {
    "seed": 0,
    "samples": None,
    "q_grid": None,
    "k": None,
    "n_qubits": 3,
    "out": None,
    "format": "json",
    "roof_restarts": None,
    "roof_ensemble_size": None,
    "grid_t_points": 99,
    "grid_q_points": 20,
    "dims": "2x2,2x3",
    "ranks": None,
}


class ConfigError(Exception):
    pass


class Report:
    def __init__(self, command: str, config: dict):
        self.command = command
        self.config = config
        self.rows: list[dict] = []
        self.checks: list[dict] = []
        self.extra: dict = {}

    def check(self, name: str, passed: bool, **detail):
        self.checks.append({"check": name, "passed": bool(passed), **detail})

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "metadata": {
                "command": self.command,
                "seed": self.config.get("seed"),
                "config": self.config,
                "versions": {"gqconc": __version__, "numpy": np.__version__, "python": platform.python_version()},
                "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
            },
            "rows": self.rows,
            "summary": {
                "passed": sum(c["passed"] for c in self.checks),
                "failed": sum(not c["passed"] for c in self.checks),
                "checks": self.checks,
                **self.extra,
            },
        }


def _fmt(v):
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, (list, tuple)):
        return ";".join(_fmt(x) for x in v)
    return str(v)


def rows_to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in (r if isinstance(r, (list, tuple)) else [r[h] for h in header])])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def write_report(report: Report, cfg: dict, stdout=None):
    """Write the report to ``cfg["out"]`` (stdout if unset) and print one line per check.

    Check lines go to stderr when the report itself occupies stdout.
    """
    stdout = stdout or sys.stdout
    out = cfg.get("out")
    if cfg["format"] == "csv":
        header = list(report.rows[0].keys()) if report.rows else ["check", "passed"]
        text = rows_to_csv(header, report.rows if report.rows else report.checks)
    else:
        text = json.dumps(_jsonable(report.to_dict()), indent=2) + "\n"
    if out:
        parent = os.path.dirname(out)
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(out, "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    for c in report.checks:
        detail = {k: v for k, v in c.items() if k not in ("check", "passed")}
        short = ", ".join(f"{k}={_fmt(v) if isinstance(v, float) else v}" for k, v in detail.items())
        print(f"[{'PASS' if c['passed'] else 'FAIL'}] {c['check']}" + (f"  ({short})" if short else ""),
              file=stdout if out else sys.stderr)


def _q_grid(cfg, default) -> tuple[float, ...]:
    return tuple(cfg["q_grid"]) if cfg["q_grid"] is not None else tuple(default)


def _roof_cfg(cfg, base: RoofConfig) -> RoofConfig:
    kw = {}
    if cfg["roof_restarts"] is not None:
        kw["restarts"] = cfg["roof_restarts"]
    if cfg["roof_ensemble_size"] is not None:
        kw["ensemble_size"] = cfg["roof_ensemble_size"]
    kw["seed"] = cfg["seed"]
    return replace(base, **kw)


def cmd_table1(cfg) -> Report:
    """W_8 indicator grid against the published table.

    ``computed`` follows the published convention (one pairwise term);
    ``tau_qk`` is the indicator with all ``k - 2`` pairwise terms, evaluated
    on the constructed state.
    """
    rep = Report("table1", cfg)
    psi = w_state(8)
    worst = 0.0
    for k in TABLE1_K:
        spec = HierarchySpec(8, k)
        for j, q in enumerate(TABLE1_Q):
            computed = w_table1_value(8, k, q)
            published = TABLE1_VALUES[k][j]
            delta = computed - published
            worst = max(worst, abs(delta))
            rep.rows.append({
                "k": k, "q": q, "computed": computed, "published": published, "delta": delta,
                "pass": abs(delta) <= TABLE1_TOL,
                "tau_qk": tau_qk_pure(psi, spec, q).residual, "tau_qk_closed": w_tau(8, k, q),
            })
    rep.check("table1 |delta| <= 1.5e-4 (published one-pairwise convention)", worst <= TABLE1_TOL, max_delta=worst)
    return rep


def cmd_examples(cfg) -> Report:
    rep = Report("examples", cfg)
    sc, sg = residual_from_values(0.76, [0.27, 0.27, 0.27], 1.5)
    rep.rows.append({"example": "2", "quantity": "sc_residual", "value": sc, "expected": -0.05})
    rep.rows.append({"example": "2", "quantity": "sgqc_residual", "value": sg, "expected": 0.0229})
    rep.check("example2 sc == -0.05 (to a few ulp)", abs(sc + 0.05) <= 1e-15, value=sc)
    rep.check("example2 sgqc within 5e-4 of 0.0229", abs(sg - 0.0229) <= 5e-4, value=sg, delta=sg - 0.0229)

    rows3 = compare_sc_sgqc(antisymmetric_333(), HierarchySpec(3, 3), [1.1, 1.5, 2.0])
    sc3 = rows3[0].sc_residual
    lo, hi = q0_bracket(1e-12)
    q0 = 0.5 * (lo + hi)
    for r in rows3:
        rep.rows.append({"example": "3", "quantity": f"sgqc_residual(q={r.q})", "value": r.sgqc_residual,
                         "expected": l_q_bound(r.q)})
    rep.rows.append({"example": "3", "quantity": "sc_residual", "value": sc3, "expected": -2.0 / 3.0})
    rep.rows.append({"example": "3", "quantity": "q0", "value": q0, "expected": float("nan")})
    rep.check("example3 sc == -2/3", abs(sc3 + 2.0 / 3.0) <= 1e-10, value=sc3)
    # 1 - 1/3 is rounded in binary, so "exact" means within a few ulp
    rep.check("example3 l_2 == -1/3", abs(l_q_bound(2.0) + 1.0 / 3.0) <= 1e-15, value=l_q_bound(2.0))
    rep.check("example3 q0 in (1.20, 1.22), l(q0) ~ 0", 1.20 < q0 < 1.22 and abs(l_q_bound(q0)) <= 1e-10,
              q0=q0, l_q0=l_q_bound(q0))
    rep.check("example3 SGqC-only at q=1.1", rows3[0].classification == "SGqC-only", cls=rows3[0].classification)

    thetas = np.linspace(0.0, math.pi / 2, 33)
    m_err = 0.0
    for th in thetas:
        direct = concurrence_pure(family_422(th), (0,)) ** 2
        c2 = family_422_c2(th)
        m_direct = direct - c2["AB"] - c2["AC"]
        m_err = max(m_err, abs(m_direct - m_and_mq_422(th, 1.0)[0]))
    qs = np.linspace(1.0, 1.5, 19)
    mq = np.array([[m_and_mq_422(th, q)[1] for q in qs] for th in thetas])
    m1 = max(abs(m_and_mq_422(th, 1.0)[1]) for th in thetas)
    row4 = compare_sc_sgqc(family_422(math.pi / 4), HierarchySpec(3, 3), [1.25])[0]
    rep.rows.append({"example": "4", "quantity": "max|M_direct - M|", "value": m_err, "expected": 0.0})
    rep.rows.append({"example": "4", "quantity": "min M_q", "value": float(mq.min()), "expected": 0.0})
    rep.rows.append({"example": "4", "quantity": "sc_residual(pi/4)", "value": row4.sc_residual, "expected": -0.5})
    rep.rows.append({"example": "4", "quantity": "sgqc_residual(pi/4,1.25)", "value": row4.sgqc_residual,
                     "expected": m_and_mq_422(math.pi / 4, 1.25)[1]})
    rep.check("example4 M matches direct within 1e-10", m_err <= 1e-10, max_err=m_err)
    rep.check("example4 min M_q >= -1e-12", mq.min() >= -1e-12, min_mq=float(mq.min()))
    rep.check("example4 M_1 == 0 within 1e-12", m1 <= 1e-12, max_abs=m1)
    rep.check("example4 SGqC-only at theta=pi/4, q=1.25", row4.classification == "SGqC-only", cls=row4.classification)
    return rep


def cmd_lemmas(cfg) -> Report:
    rep = Report("lemmas", cfg)
    grid = GridSpec(t_points=cfg["grid_t_points"], q_points=cfg["grid_q_points"])
    for scan in (lemma1_scan(grid), lemma2_scan(grid)):
        rep.rows.append({"item": scan.name, "points": scan.n_points, "violations": len(scan.violations),
                         "max_violation": scan.max_violation, **scan.extremes})
        rep.check(f"{scan.name} zero violations", scan.passed, violations=len(scan.violations))
    exact = -1.0 / (4.0 * math.sqrt(2.0))
    lim2 = limit_t1_gq(2.0)
    fd = float(fd_second_derivative(h_curve(2.0), 1.0 - 1e-4, 5e-5))
    rep.check("limit_t1_gq(2) == -1/(4 sqrt 2)", abs(lim2 - exact) <= 1e-12, value=lim2)
    rep.check("limit_t1_gq(2) vs FD at t=1-1e-4", abs(fd / lim2 - 1.0) <= 1e-2, fd=fd)
    rep.check("limit_t1_gq_tilde(2) == 0", limit_t1_gq_tilde(2.0) == 0.0, value=limit_t1_gq_tilde(2.0))
    qs = np.round(np.linspace(1.05, 2.0, 20), 12)
    g = [limit_t1_gq(q) for q in qs]
    gt = [limit_t1_gq_tilde(q) for q in qs]
    for q, a, b in zip(qs, g, gt):
        rep.rows.append({"item": "limits", "q": float(q), "limit_gq": a, "limit_gq_tilde": b})
    rep.check("limit g_q <= 0 on q grid", max(g) <= 0.0, max_value=max(g))
    rep.check("limit g~_q >= 0 on q grid", min(gt) >= 0.0, min_value=min(gt))
    fdt = float(fd_second_derivative(h2_curve(1.5), 1.0 - 1e-4, 5e-5))
    rep.check("limit_t1_gq_tilde(1.5) vs FD", abs(fdt / limit_t1_gq_tilde(1.5) - 1.0) <= 1e-2, fd=fdt)
    for q, fn in ((1.5, "h"), (1.5, "h2"), (2.0, "h2")):
        p = boundary_divergence_probe(q, function=fn)
        rep.rows.append({"item": "probe", "q": q, "function": fn, "values": list(p.values), "trend": p.trend,
                         "note": p.note})
        expected = "bounded" if (q == 2.0 and fn == "h2") else "divergent"
        rep.check(f"t->0 probe {fn} q={q} is {expected}", p.trend == expected, trend=p.trend)
    gm = gradient_M_grid(grid)
    rep.rows.append({"item": "grad_M", "min_norm": gm["min_norm"], "argmin": list(gm["argmin"])})
    rep.check("min |grad M| on grid > 0 (grid check, not a proof)", gm["min_norm"] > 0, min_norm=gm["min_norm"])
    return rep


def cmd_sweep(cfg) -> Report:
    rep = Report("sweep", cfg)
    n = cfg["n_qubits"]
    if n < 3:
        raise ConfigError("--n-qubits must be >= 3")
    samples = cfg["samples"] if cfg["samples"] is not None else 500
    qs = _q_grid(cfg, DEFAULT_Q_GRID)
    roof = _roof_cfg(cfg, SWEEP_ROOF)
    ks = [cfg["k"]] if cfg["k"] is not None else list(range(3, n + 1))
    if any(not 3 <= k <= n for k in ks):
        raise ConfigError(f"--k must lie in [3, {n}]")
    mins = {(k, q): math.inf for k in ks for q in qs}
    half_err = 0.0
    for i in range(samples):
        seed = derive_seed(cfg["seed"], i)
        psi = haar_random_pure((2,) * n, seed)
        for row in hierarchy_sweep(psi, qs, roof):
            if row.k not in ks:
                continue
            rec = {"sample": i, "seed": seed, "k": row.k, "sc_residual": row.sc_residual,
                   "rechecked": row.rechecked}
            for q, t in zip(qs, row.tau):
                rec[f"tau_q{q:g}"] = t
                mins[(row.k, q)] = min(mins[(row.k, q)], t)
                if q == 2.0:
                    half_err = max(half_err, abs(t - row.sc_residual / 2.0))
            rep.rows.append(rec)
    worst = min(mins.values())
    rep.extra["min_residual"] = {f"k={k},q={q:g}": v for (k, q), v in mins.items()}
    rep.check(f"N={n}: min tau_qk >= -1e-9 over {samples} states", worst >= -MONOGAMY_TOL, min_residual=worst)
    if 2.0 in qs:
        rep.check("q=2 residual == SC residual / 2 within 1e-10", half_err <= 1e-10, max_err=half_err)
    return rep


def _parse_dims(text: str) -> list[tuple[int, int]]:
    out = []
    for part in text.split(","):
        try:
            a, b = (int(x) for x in part.lower().split("x"))
        except ValueError:
            raise ConfigError(f"bad --dims entry {part!r}; expected e.g. 2x3")
        if a != 2 or b < 2:
            raise ConfigError("roof-verify needs 2 x d dims")
        out.append((a, b))
    return out


def cmd_roof_verify(cfg) -> Report:
    rep = Report("roof-verify", cfg)
    qs = _q_grid(cfg, THEOREM1_Q)
    roof = _roof_cfg(cfg, RoofConfig())
    index = 0
    for dims in _parse_dims(cfg["dims"]):
        default_samples, default_ranks = ((100, (1, 2, 3, 4)) if dims == (2, 2) else (20, (2,)))
        samples = cfg["samples"] if cfg["samples"] is not None else default_samples
        ranks = tuple(cfg["ranks"]) if cfg["ranks"] else default_ranks
        tol = THEOREM1_TOL.get(dims, 5e-3)
        worst = 0.0
        for i in range(samples):
            seed = derive_seed(cfg["seed"], index)
            index += 1
            rank = ranks[i % len(ranks)]
            rho = random_mixed(dims, rank, seed)
            for chk in theorem1_checks(rho, qs, roof):
                worst = max(worst, chk.residual)
                rep.rows.append({"dims": f"{dims[0]}x{dims[1]}", "rank": rank, "sample": i, "seed": seed,
                                 "q": chk.q, "gq_roof": chk.gq_roof, "concurrence": chk.concurrence,
                                 "method": chk.concurrence_method, "h_q(C^2)": chk.mapped,
                                 "residual": chk.residual, "tolerance": tol, "pass": chk.residual < tol,
                                 "h_q(roof C^2)": chk.mapped_tangle})
        rep.check(f"{dims[0]}x{dims[1]}: |roof G_q - h_q(C^2)| < {tol:g}", worst < tol, max_residual=worst)
    return rep


def cmd_figures(cfg) -> Report:
    rep = Report("figures", cfg)
    out_dir = cfg["out"] or "figures"
    grid = GridSpec(t_points=cfg["grid_t_points"], q_points=cfg["grid_q_points"])
    data = figure_data(grid)
    os.makedirs(out_dir, exist_ok=True)
    for name, (header, rows) in data.items():
        path = os.path.join(out_dir, f"{name}.csv")
        with open(path, "w") as fh:
            fh.write(rows_to_csv(header, rows))
        rep.rows.append({"figure": name, "path": path, "rows": len(rows)})
    lv = np.array([r[1] for r in data["l_q_curve"][1]])
    crossings = int(np.sum(np.sign(lv[:-1]) != np.sign(lv[1:])))
    rep.check("l_q crosses zero once in (1, 2)", crossings == 1, crossings=crossings)
    rep.check("limit g_q curve <= 0", max(r[1] for r in data["limit_gq"][1]) <= 0.0)
    rep.check("limit g~_q curve >= 0", min(r[1] for r in data["limit_gq_tilde"][1]) >= 0.0)
    mq_min = min(r[3] for r in data["mq_surface"][1])
    rep.check("M_q surface min >= -1e-12", mq_min >= -1e-12, min_mq=mq_min)
    return rep


COMMANDS: dict[str, Callable[[dict], Report]] = {
    "table1": cmd_table1,
    "examples": cmd_examples,
    "lemmas": cmd_lemmas,
    "sweep": cmd_sweep,
    "roof-verify": cmd_roof_verify,
    "figures": cmd_figures,
}


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}")


_CONVERTERS: dict[str, Callable[[str], Any]] = {
    "seed": int, "samples": int, "q_grid": _float_list, "k": int, "n_qubits": int, "out": str,
    "format": str, "roof_restarts": int, "roof_ensemble_size": int, "grid_t_points": int,
    "grid_q_points": int, "dims": str, "ranks": _int_list,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("run configuration")
    g.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    g.add_argument("--samples", type=int, default=None, help="number of random states")
    g.add_argument("--q-grid", type=_float_list, default=None, help="comma list of q values")
    g.add_argument("--k", type=int, default=None, help="restrict the sweep to one hierarchy level")
    g.add_argument("--n-qubits", type=int, default=None, help="qubit count for sweep (default 3)")
    g.add_argument("--out", default=None, help="report path (figures: output directory)")
    g.add_argument("--format", choices=("csv", "json"), default=None)
    g.add_argument("--roof-restarts", type=int, default=None)
    g.add_argument("--roof-ensemble-size", type=int, default=None)
    g.add_argument("--grid-t-points", type=int, default=None)
    g.add_argument("--grid-q-points", type=int, default=None)
    g.add_argument("--dims", default=None, help="roof-verify dims, e.g. 2x2,2x3")
    g.add_argument("--ranks", type=_int_list, default=None, help="roof-verify ranks, cycled per sample")
    g.add_argument("--config", default=None, help="flat key=value file; flags override it")
    parser = argparse.ArgumentParser(prog="gqconc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"gqconc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=(fn.__doc__ or name).splitlines()[0])
    return parser


def load_config_file(path: str) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (x.strip() for x in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONVERTERS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = _CONVERTERS[key](value)
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}")
    return out


def resolve_config(args: argparse.Namespace) -> dict:
    """Defaults, overridden by the config file, overridden by flags."""
    cfg = dict(DEFAULTS)
    if args.config:
        cfg.update(load_config_file(args.config))
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if cfg["format"] not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {cfg['format']!r}")
    if cfg["samples"] is not None and cfg["samples"] < 1:
        raise ConfigError("--samples must be positive")
    if cfg["q_grid"] is not None:
        if not cfg["q_grid"] or any(not 1.0 < q <= 2.0 for q in cfg["q_grid"]):
            raise ConfigError("--q-grid values must lie in (1, 2]")
    if cfg["roof_restarts"] is not None and cfg["roof_restarts"] < 1:
        raise ConfigError("--roof-restarts must be >= 1")
    if cfg["roof_ensemble_size"] is not None and cfg["roof_ensemble_size"] < 1:
        raise ConfigError("--roof-ensemble-size must be >= 1")
    if cfg["grid_t_points"] < 3 or cfg["grid_q_points"] < 1:
        raise ConfigError("grid needs at least 3 t points and 1 q point")
    cfg["command"] = args.command
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        report = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"gqconc: error: {exc}", file=sys.stderr)
        return 2
    if args.command == "figures":
        cfg = {**cfg, "out": os.path.join(cfg["out"] or "figures", f"report.{cfg['format']}")}
    write_report(report, cfg)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
