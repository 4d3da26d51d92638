"""Command-line front end: ``rfdepint {solve,bench,spectrum,weights,cond}``.

Settings come from built-in defaults, then an optional JSON file
(``--config``), then command-line flags.  ``--h-inv N`` is the number of grid
cells per side, i.e. ``h = 1/N`` on the unit interval and ``h = 2/N`` on the
``(0, 2)^2`` square.

Exit codes: 0 success, 2 invalid configuration, 3 no convergence,
4 size guard.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np
import scipy.linalg as sla

from rfdepint.allatonce import condition_bound
from rfdepint.analysis import (
    SizeLimitError,
    lambda_scatter,
    preconditioned_spectrum,
    verify_bounds,
    write_spectrum_csv,
)
from rfdepint.benchmark import DOF_GUARD, REFERENCE_TABLES, dof, run_case, run_table
from rfdepint.discretization import centred_weights
from rfdepint.krylov import SolverConfig
from rfdepint.preconditioner import DENSE_LIMIT, PreconditionerKind, build_plan
from rfdepint.problems import build_system, example1, example2

EXIT_OK, EXIT_CONFIG, EXIT_NOCONV, EXIT_GUARD = 0, 2, 3, 4

ROW_COLUMNS = ["N_t", "h", "DoF", "Iter", "CPU", "TRR", "Err"]


class ConfigError(ValueError):
    pass


class GuardError(ValueError):
    pass


@dataclass
class RunConfig:
    problem: str = "example1"
    gamma: float = 1.5
    gamma_x: float = 1.5
    gamma_y: float = 1.5
    nt: int = 64
    h_inv: int = 128
    alpha: str = "auto"
    method: str | None = None
    side: str | None = None
    tol: float = 1e-9
    max_iter: int = 200
    out: str = "."
    repeat: int = 3
    threads: int | None = None
    allow_large: bool = False

    def validate(self):
        if self.problem not in ("example1", "example2"):
            raise ConfigError(f"problem must be example1 or example2, got {self.problem!r}")
        gammas = (self.gamma,) if self.problem == "example1" else (self.gamma_x, self.gamma_y)
        for g in gammas:
            if not (1.0 < float(g) < 2.0):
                raise ConfigError(f"fractional order must lie in (1, 2), got {g}")
        if int(self.nt) < 3:
            raise ConfigError(f"nt must be >= 3, got {self.nt}")
        if int(self.h_inv) < 3:
            raise ConfigError(f"h_inv must be >= 3, got {self.h_inv}")
        self.kind()
        try:
            self.solver()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if int(self.repeat) < 1:
            raise ConfigError(f"repeat must be >= 1, got {self.repeat}")
        if self.threads is not None and int(self.threads) < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")

    def kind(self) -> PreconditionerKind:
        a = str(self.alpha).strip().lower()
        if a == "auto":
            return PreconditionerKind.generalized()
        if a == "strang":
            return PreconditionerKind.strang()
        try:
            return PreconditionerKind.custom(float(a))
        except ValueError as exc:
            raise ConfigError(f"alpha must be auto, strang or a number in (0, 1]: {exc}") from None

    def default_method(self) -> str:
        return "gmres" if self.problem == "example1" else "bicgstab"

    def solver(self) -> SolverConfig:
        return SolverConfig(float(self.tol), int(self.max_iter), self.method or self.default_method(), self.side)

    def make_problem(self):
        if self.problem == "example1":
            return example1(float(self.gamma))
        return example2(float(self.gamma_x), float(self.gamma_y))

    def dof(self) -> int:
        return dof(self.problem, int(self.nt), int(self.h_inv))

    def guard(self):
        n = self.dof()
        if n > DOF_GUARD and not self.allow_large:
            raise GuardError(f"{n} unknowns exceeds the guard of {DOF_GUARD}; pass --allow-large to override")


def _common_parser():
    p = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    p.add_argument("--config", default=S, help="JSON file with any RunConfig fields")
    p.add_argument("--problem", choices=["example1", "example2"], default=S)
    p.add_argument("--gamma", type=float, default=S, help="fractional order (1D)")
    p.add_argument("--gamma-x", dest="gamma_x", type=float, default=S)
    p.add_argument("--gamma-y", dest="gamma_y", type=float, default=S)
    p.add_argument("--nt", type=int, default=S, help="number of time steps")
    p.add_argument("--h-inv", dest="h_inv", type=int, default=S, help="grid cells per side")
    p.add_argument("--alpha", default=S, help="auto | strang | value in (0, 1]")
    p.add_argument("--method", choices=["gmres", "bicgstab"], default=S)
    p.add_argument("--side", choices=["left", "right"], default=S, help="BiCGSTAB preconditioning side")
    p.add_argument("--tol", type=float, default=S)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=S)
    p.add_argument("--out", default=S, help="output directory")
    p.add_argument("--repeat", type=int, default=S, help="timing repeats (default 3)")
    p.add_argument("--threads", type=int, default=S, help="FFT worker threads")
    p.add_argument("--allow-large", dest="allow_large", action="store_true", default=S)
    return p


def build_parser():
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="rfdepint", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="solve one configuration")
    b = sub.add_parser("bench", parents=[common], help="rerun a reference table")
    b.add_argument("--table", type=int, choices=sorted(REFERENCE_TABLES), required=True)
    b.add_argument("--rows", default="all", help="comma-separated 0-based row indices, 'all', or '' for none")
    s = sub.add_parser("spectrum", parents=[common], help="eigenvalue scatter as CSV and SVG")
    s.add_argument("--kind", choices=["lambda", "preconditioned", "self"], default="preconditioned")
    s.add_argument("--alphas", default="0.1,0.5,1.0", help="alpha values for --kind lambda")
    s.add_argument("--inner", choices=["tau", "exact"], default="tau")
    w = sub.add_parser("weights", parents=[common], help="fractional centred weights as CSV")
    w.add_argument("--count", type=int, default=10)
    sub.add_parser("cond", parents=[common], help="condition bounds of the all-at-once matrix")
    return parser


def resolve_config(ns) -> RunConfig:
    values = {}
    if getattr(ns, "config", None):
        try:
            with open(ns.config, encoding="utf-8") as fh:
                values = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {ns.config}: {exc}") from None
        if not isinstance(values, dict):
            raise ConfigError("config file must hold a JSON object")
    names = {f.name for f in fields(RunConfig)}
    unknown = set(values) - names
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for name in names:
        if hasattr(ns, name):
            values[name] = getattr(ns, name)
    cfg = RunConfig(**values)
    try:
        cfg.validate()
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"malformed setting: {exc}") from None
    return cfg


def _outdir(cfg) -> Path:
    p = Path(cfg.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _fmt_row(row):
    return {
        "N_t": row.n_time,
        "h": row.h_label,
        "DoF": row.dof,
        "Iter": f"{row.iterations:g}",
        "CPU": f"{row.cpu:.3f}",
        "TRR": f"{row.trr:.3f}",
        "Err": f"{row.err:.4e}",
    }


def cmd_solve(cfg: RunConfig) -> int:
    cfg.guard()
    row = run_case(cfg.make_problem(), int(cfg.nt), int(cfg.h_inv), cfg.kind(), cfg.solver(), int(cfg.repeat), cfg.threads)
    path = _outdir(cfg) / "solve.csv"
    rec = _fmt_row(row)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=ROW_COLUMNS)
        w.writeheader()
        w.writerow(rec)
    print(" ".join(f"{k}={v}" for k, v in rec.items()) + f" alpha={row.alpha:g}")
    if not row.converged:
        print(f"error: no convergence within {cfg.max_iter} iterations", file=sys.stderr)
        return EXIT_NOCONV
    return EXIT_OK


def _parse_rows(text, n):
    text = text.strip()
    if text == "all":
        return list(range(n))
    if not text:
        return []
    try:
        rows = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"--rows must be comma-separated integers, got {text!r}") from None
    bad = [r for r in rows if not 0 <= r < n]
    if bad:
        raise ConfigError(f"row indices {bad} out of range 0..{n - 1}")
    return rows


def markdown_table(results, title="") -> str:
    head = "| N_t | h | DoF | Iter | CPU | TRR | Err | Iter | CPU | TRR | Err |"
    lines = [f"**{title}**", ""] if title else []
    lines += ["|  |  |  | P_alpha |  |  |  | P_1 |  |  |  |", head, "|" + "---|" * 11]
    for _, ra, r1 in results:
        a, b = _fmt_row(ra), _fmt_row(r1)
        cells = [a["N_t"], a["h"], f"{a['DoF']:,}"] + [a[k] for k in ROW_COLUMNS[3:]] + [b[k] for k in ROW_COLUMNS[3:]]
        lines.append("| " + " | ".join(str(c) for c in cells) + " |")
    return "\n".join(lines) + "\n"


def cmd_bench(cfg: RunConfig, table: int, rows_text: str) -> int:
    ref = REFERENCE_TABLES[table]
    rows = _parse_rows(rows_text, len(ref.rows))
    if not rows:
        print("no rows selected")
        return EXIT_OK
    for i in rows:
        n = dof(ref.problem, ref.rows[i][0], ref.rows[i][1])
        if n > DOF_GUARD and not cfg.allow_large:
            raise GuardError(f"row {i} has {n} unknowns > guard {DOF_GUARD}; pass --allow-large to override")
    solver = SolverConfig(float(cfg.tol), int(cfg.max_iter), cfg.method or ref.method, cfg.side)
    results = run_table(table, rows, solver, int(cfg.repeat), cfg.threads, allow_large=True)
    out = _outdir(cfg)
    cols = ["N_t", "h", "DoF"]
    cols += [f"{c}_Pa" for c in ROW_COLUMNS[3:]] + [f"{c}_P1" for c in ROW_COLUMNS[3:]]
    cols += ["ref_Iter_Pa", "ref_Err_Pa", "ref_Iter_P1", "ref_Err_P1"]
    with open(out / f"table{table}.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for r, ra, r1 in results:
            a, b = _fmt_row(ra), _fmt_row(r1)
            w.writerow(
                [a["N_t"], a["h"], a["DoF"]]
                + [a[k] for k in ROW_COLUMNS[3:]]
                + [b[k] for k in ROW_COLUMNS[3:]]
                + [r[2], r[3], r[4], r[5]]
            )
    gam = ", ".join(f"{g:g}" for g in ref.gammas)
    md = markdown_table(results, f"Reference table {table}: {ref.problem}, gamma = ({gam}), {solver.method}")
    (out / f"table{table}.md").write_text(md, encoding="utf-8")
    print(md)
    return EXIT_OK if all(ra.converged and r1.converged for _, ra, r1 in results) else EXIT_NOCONV


def svg_scatter(path, series, title="", width=480, height=400):
    """Static SVG 1.1 scatter plot of complex points.

    ``series`` is a list of ``(label, points)``.
    """
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
    pts = np.concatenate([np.asarray(p, dtype=complex).ravel() for _, p in series]) if series else np.zeros(1)
    xmin, xmax = float(pts.real.min()), float(pts.real.max())
    ymin, ymax = float(pts.imag.min()), float(pts.imag.max())
    padx = 0.05 * (xmax - xmin) or 0.5
    pady = 0.05 * (ymax - ymin) or 0.5
    xmin, xmax, ymin, ymax = xmin - padx, xmax + padx, ymin - pady, ymax + pady
    left, right, top, bottom = 60, 20, 30, 40
    pw, ph = width - left - right, height - top - bottom

    def sx(x):
        return left + (x - xmin) / (xmax - xmin) * pw

    def sy(y):
        return top + (ymax - y) / (ymax - ymin) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        f'<text x="{width / 2}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<text x="{width / 2}" y="{height - 8}" text-anchor="middle" font-size="12">Re</text>',
        f'<text x="14" y="{top + ph / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {top + ph / 2})">Im</text>',
    ]
    for val, anchor in ((xmin, "start"), (xmax, "end")):
        out.append(f'<text x="{sx(val):.1f}" y="{top + ph + 14}" text-anchor="{anchor}" font-size="10">{val:.3g}</text>')
    for val in (ymin, ymax):
        out.append(f'<text x="{left - 4}" y="{sy(val) + 4:.1f}" text-anchor="end" font-size="10">{val:.3g}</text>')
    if xmin < 0 < xmax:
        out.append(f'<line x1="{sx(0):.1f}" y1="{top}" x2="{sx(0):.1f}" y2="{top + ph}" stroke="#999" stroke-dasharray="3,3"/>')
    if ymin < 0 < ymax:
        out.append(f'<line x1="{left}" y1="{sy(0):.1f}" x2="{left + pw}" y2="{sy(0):.1f}" stroke="#999" stroke-dasharray="3,3"/>')
    for i, (label, p) in enumerate(series):
        c = colors[i % len(colors)]
        for z in np.asarray(p, dtype=complex).ravel():
            out.append(f'<circle cx="{sx(z.real):.2f}" cy="{sy(z.imag):.2f}" r="2" fill="{c}"/>')
        out.append(f'<text x="{left + 8}" y="{top + 16 + 14 * i}" font-size="11" fill="{c}">{escape(label)}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")


def cmd_spectrum(cfg: RunConfig, kind: str, alphas_text: str, inner: str) -> int:
    out = _outdir(cfg)
    if kind == "lambda":
        try:
            alphas = [float(a) for a in alphas_text.split(",") if a.strip()]
        except ValueError:
            raise ConfigError(f"--alphas must be comma-separated numbers, got {alphas_text!r}") from None
        for a in alphas:
            if not 0.0 < a <= 1.0:
                raise ConfigError(f"alpha must lie in (0, 1], got {a}")
        series = []
        for a in alphas:
            lam = lambda_scatter(a, int(cfg.nt))
            stem = f"lambda_alpha{a:g}_nt{cfg.nt}"
            write_spectrum_csv(out / f"{stem}.csv", lam, {"alpha": a, "n_time": cfg.nt, "min_re": float(lam.real.min())})
            svg_scatter(out / f"{stem}.svg", [(f"alpha={a:g}", lam)], f"time eigenvalues, N_t={cfg.nt}")
            series.append((f"alpha={a:g}", lam))
            print(f"{stem}: min Re = {lam.real.min():.6g}")
        svg_scatter(out / f"lambda_nt{cfg.nt}.svg", series, f"time eigenvalues, N_t={cfg.nt}")
        return EXIT_OK

    problem = cfg.make_problem()
    n = cfg.dof()
    if n > DENSE_LIMIT:
        raise SizeLimitError(f"dense spectrum limited to {DENSE_LIMIT} unknowns, got {n}")
    op, _ = build_system(problem, int(cfg.nt), int(cfg.h_inv))
    if kind == "self":
        fac = sla.lu_factor(op.dense())
        report = preconditioned_spectrum(op, lambda v: sla.lu_solve(fac, v), description="self-preconditioned")
        stem = f"self_nt{cfg.nt}_n{cfg.h_inv}"
    else:
        plan = build_plan(cfg.kind(), int(cfg.nt), op.dt, op.jacobian)
        report = preconditioned_spectrum(op, plan, exact_inner=(inner == "exact"))
        stem = f"precond_{inner}_alpha{plan.alpha:g}_nt{cfg.nt}_n{cfg.h_inv}"
    meta = {"description": report.description, "cluster_radius": report.radius, "cluster_fraction": report.cluster_fraction}
    write_spectrum_csv(out / f"{stem}.csv", report.eigenvalues, meta)
    svg_scatter(out / f"{stem}.svg", [(report.description, report.eigenvalues)], "preconditioned spectrum")
    print(f"{stem}: cluster_fraction = {report.cluster_fraction:.4f} (radius {report.radius:g})")
    return EXIT_OK


def cmd_weights(cfg: RunConfig, count: int) -> int:
    try:
        fw = centred_weights(float(cfg.gamma), int(count))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    path = _outdir(cfg) / f"weights_gamma{cfg.gamma:g}.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["ell", "omega"])
        for ell, val in enumerate(fw.weights):
            w.writerow([ell, repr(float(val))])
    print(f"wrote {count + 1} weights to {path}")
    return EXIT_OK


def cmd_cond(cfg: RunConfig) -> int:
    cfg.guard()
    op, _ = build_system(cfg.make_problem(), int(cfg.nt), int(cfg.h_inv))
    rep = condition_bound(op)
    if op.n_time * op.n_space <= DENSE_LIMIT:
        dense = verify_bounds(op)
        rep.update({k: dense[k] for k in ("sigma_max", "sigma_min", "all_ok")})
        rep["cond"] = dense["sigma_max"] / dense["sigma_min"]
    rep = {k: (bool(v) if isinstance(v, (bool, np.bool_)) else float(v)) for k, v in rep.items()}
    print(json.dumps(rep, indent=2))
    (_outdir(cfg) / "cond.json").write_text(json.dumps(rep, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = resolve_config(ns)
        if ns.command == "solve":
            return cmd_solve(cfg)
        if ns.command == "bench":
            return cmd_bench(cfg, ns.table, ns.rows)
        if ns.command == "spectrum":
            return cmd_spectrum(cfg, ns.kind, ns.alphas, ns.inner)
        if ns.command == "weights":
            return cmd_weights(cfg, ns.count)
        return cmd_cond(cfg)
    except (ConfigError, TypeError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GuardError, SizeLimitError) as exc:
        print(f"size guard: {exc}", file=sys.stderr)
        return EXIT_GUARD


if __name__ == "__main__":
    sys.exit(main())
