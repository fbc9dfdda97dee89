"""Command line: matrix export, verification sweeps, spectrograms, sparsity tables.

Exit codes: 0 success, 1 verification failure, 2 configuration error, 3 I/O error.
A JSON config file supplies defaults; explicit flags override it.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analytic import (
    GenHeat,
    Heat,
    Repulsor,
    analytic_window,
    heat_log_modulus,
    repulsor_log_modulus,
)
from .core_tf import (
    GaussianWindow,
    Grid,
    LatticeParams,
    SampledFunction,
    atom_values,
    lattice_indices,
    point_shift_sample,
    stft_grid,
)
from .errors import GaborError, UnsupportedDimensionError
from .metaplectic import repulsor_apply
from .oracle import gabor_entry_oracle_log, multiplier_apply, operator_symbol
from .sparsity import apply_via_gabor, build_sparse_matrix, dual_window, support_radius

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

DEFAULTS = {
    "operator": "heat", "rho": [1.0], "t": [0.1], "k": [2], "dim": 1,
    "alpha": 1.0, "beta": 0.5, "radius": None, "eps": None,
    "grid_n": None, "grid_l": None, "out": None, "format": "csv",
}


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    operator: str
    rho: list
    t: list
    k: list
    dim: int
    alpha: float
    beta: float
    radius: int | None
    eps: list | None
    grid_n: int | None
    grid_l: float | None
    out: str | None
    format: str
    extra: dict = field(default_factory=dict)

    @property
    def params(self) -> LatticeParams:
        return LatticeParams(self.alpha, self.beta, self.dim)


def _listify(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


def _validate(cfg: RunConfig):
    if cfg.operator not in ("heat", "genheat", "repulsor", "all"):
        raise ConfigError(f"unknown operator {cfg.operator!r}")
    if cfg.format not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    if not (isinstance(cfg.dim, int) and 1 <= cfg.dim <= 3):
        raise ConfigError("dim must be 1, 2 or 3")
    if not (cfg.alpha > 0 and cfg.beta > 0):
        raise ConfigError("alpha and beta must be positive")
    if any(not r > 0 for r in cfg.rho):
        raise ConfigError("rho must be positive")
    if cfg.radius is not None and cfg.radius < 0:
        raise ConfigError("radius must be nonnegative")
    if cfg.eps is not None and any(not e >= 0 for e in cfg.eps):
        raise ConfigError("eps must be nonnegative")
    if cfg.grid_n is not None and cfg.grid_n < 16:
        raise ConfigError("grid-n must be at least 16")
    if cfg.grid_l is not None and not cfg.grid_l > 0:
        raise ConfigError("grid-l must be positive")
    if cfg.operator in ("heat", "all") and any(t < 0 for t in cfg.t):
        raise ConfigError("heat evolution needs t >= 0")
    if cfg.operator == "genheat":
        if any(not t > 0 for t in cfg.t):
            raise ConfigError("generalized heat needs t > 0")
        if any(int(k) != k or k < 1 for k in cfg.k):
            raise ConfigError("k must be a positive integer")
        if cfg.dim != 1:
            raise ConfigError("generalized heat is one-dimensional")


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("GABOR_THREADS", "1")))
    except ValueError:
        return 1


def _write(path: Path, text: str):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IOError(f"cannot write {path}: {exc}") from exc


def _out_path(cfg: RunConfig, stem: str, many: bool) -> Path:
    if cfg.out is None:
        raise ConfigError("--out is required")
    out = Path(cfg.out)
    if not many and out.suffix in (".csv", ".json"):
        return out
    return out / f"{stem}.{cfg.format}"


def _tag(x: float) -> str:
    return format(x, "g")


def _operators(cfg: RunConfig):
    ops = []
    for t in cfg.t:
        if cfg.operator == "heat":
            ops += [(f"heat_d{cfg.dim}_rho{_tag(r)}_t{_tag(t)}", Heat(r, t, cfg.dim)) for r in cfg.rho]
        elif cfg.operator == "genheat":
            ops += [(f"genheat_k{k}_t{_tag(t)}", GenHeat(int(k), t)) for k in cfg.k]
        elif cfg.operator == "repulsor":
            ops.append((f"repulsor_d{cfg.dim}_t{_tag(t)}", Repulsor(t, cfg.dim)))
        else:
            raise ConfigError("choose a single operator for this command")
    return ops


# ------------------------------------------------------------------ matrix


def cmd_matrix(cfg: RunConfig, stream=sys.stdout) -> int:
    radius = 5 if cfg.radius is None else cfg.radius
    ops = _operators(cfg)
    many = len(ops) > 1
    slice_only = cfg.dim >= 2 or cfg.extra.get("slice", False)
    for stem, op in ops:
        win = analytic_window(op, cfg.params, radius, nu_origin_only=slice_only)
        text = win.to_csv() if cfg.format == "csv" else win.to_json()
        path = _out_path(cfg, stem, many)
        _write(path, text)
        print(f"{path}\tentries={len(win.entries)}\tmax={win.max_entry():.6g}", file=stream)
    return EXIT_OK


# ------------------------------------------------------------------ verify


def _verify_one(args):
    kind, lam, nu, params, op, flip = args
    if kind == "heat":
        a = heat_log_modulus(lam, nu, op.rho, op.t, params.dim, params, flip_sign=flip)
    else:
        a = repulsor_log_modulus(lam, nu, op.t, params.dim, params)
    o = gabor_entry_oracle_log(op, lam, nu, params, mode="contour")
    return abs(math.expm1(a - o))


def cmd_verify(cfg: RunConfig, stream=sys.stdout) -> int:
    radius = 3 if cfg.radius is None else cfg.radius
    params = cfg.params
    flip = bool(cfg.extra.get("flip_sign", False))
    kinds = ["heat", "repulsor"] if cfg.operator == "all" else [cfg.operator]
    if "genheat" in kinds:
        raise ConfigError("generalized heat has no closed-form entries to verify")
    user_t = cfg.extra.get("t_given", False)
    user_rho = cfg.extra.get("rho_given", False)
    idx = lattice_indices(params.dim, radius)
    status = EXIT_OK
    for kind in kinds:
        if kind == "heat":
            rhos = cfg.rho if user_rho else [0.5, 1.0]
            ts = cfg.t if user_t else [0.1, 1.0]
            ops = [Heat(r, t, params.dim) for r in rhos for t in ts]
            tol = 1e-6
        else:
            ts = cfg.t if user_t else [0.25, 0.5, 1.0]
            ops = [Repulsor(t, params.dim) for t in ts]
            tol = 1e-5
        jobs = [(kind, lam, nu, params, op, flip) for op in ops for lam in idx for nu in idx]
        with ThreadPoolExecutor(max_workers=_workers()) as ex:
            errs = list(ex.map(_verify_one, jobs))
        worst = int(np.argmax(errs))
        ok = errs[worst] < tol
        print(f"{kind}\tpairs={len(jobs)}\tmax_rel_err={errs[worst]:.3e}\ttol={tol:.0e}\t"
              f"{'PASS' if ok else 'FAIL'}", file=stream)
        if not ok:
            _, lam, nu, _, op, _ = jobs[worst]
            print(f"  worst pair: op={op} lambda={lam.as_tuple()} nu={nu.as_tuple()}", file=stream)
            status = EXIT_VERIFY
    return status


# ------------------------------------------------------------- spectrogram


def cmd_spectrogram(cfg: RunConfig, stream=sys.stdout) -> int:
    if cfg.dim != 1:
        raise UnsupportedDimensionError("spectrograms are one-dimensional")
    L = 16.0 if cfg.grid_l is None else cfg.grid_l
    N = 2048 if cfg.grid_n is None else cfg.grid_n
    grid = Grid.symmetric(L, N)
    x0 = float(cfg.extra.get("datum_m", 0.0))
    xi0 = float(cfg.extra.get("datum_n", 0.0))
    datum = point_shift_sample([x0], [xi0], grid)
    ext = float(cfg.extra.get("stft_extent", 8.0))
    pts = int(cfg.extra.get("stft_points", 129))
    axis = np.linspace(-ext, ext, pts)
    many = len(cfg.t) > 1
    for t in cfg.t:
        u = repulsor_apply(datum, t) if t != 0 else datum
        spec = stft_grid(u, GaussianWindow(1), axis, axis)
        if cfg.format == "csv":
            text = spec.to_csv()
        else:
            text = json.dumps({"x": axis.tolist(), "omega": axis.tolist(),
                               "magnitudes": spec.magnitudes.tolist()})
        path = _out_path(cfg, f"spectrogram_t{_tag(t)}", many)
        _write(path, text)
        px, pw = spec.peak()
        print(f"{path}\tt={_tag(t)}\tpeak=({px:.4g}, {pw:.4g})\tenergy={spec.energy():.6f}",
              file=stream)
    return EXIT_OK


# ---------------------------------------------------------------- sparsity


def cmd_sparsity(cfg: RunConfig, stream=sys.stdout) -> int:
    if cfg.dim != 1:
        raise UnsupportedDimensionError("operator application is one-dimensional")
    radius = 6 if cfg.radius is None else cfg.radius
    eps_list = cfg.eps if cfg.eps is not None else [10.0 ** -e for e in range(2, 9)]
    stem, op = _operators(cfg)[0]
    params = cfg.params
    dual = dual_window(params, max(8, radius + 2))
    grid = dual.grid
    f = SampledFunction(grid, atom_values(grid, 0.0, 0.0))
    if isinstance(op, Repulsor):
        truth = repulsor_apply(f, op.t)
    else:
        truth = multiplier_apply(operator_symbol(op), f)
    tnorm = truth.norm()
    rows = []
    for eps in [0.0] + sorted(eps_list, reverse=True):
        M = build_sparse_matrix(op, params, radius, eps, "oracle", grid)
        err = (apply_via_gabor(op, f, params, dual, M) - truth).norm() / tnorm
        rows.append({"table": "threshold", "eps": eps, "radius": radius, "kept": M.kept_count,
                     "considered": M.total_considered, "support_radius": support_radius(M),
                     "apply_rel_error": err})
    sweep_eps = float(cfg.extra.get("sweep_eps", 1e-6))
    if not isinstance(op, GenHeat):
        for r in range(3, 9):
            M = build_sparse_matrix(op, params, r, sweep_eps, "analytic")
            rows.append({"table": "radius", "eps": sweep_eps, "radius": r, "kept": M.kept_count,
                         "considered": M.total_considered, "support_radius": support_radius(M),
                         "apply_rel_error": ""})
        rs = [row["radius"] for row in rows if row["table"] == "radius"]
        ks = [row["kept"] for row in rows if row["table"] == "radius"]
        slope = float(np.polyfit(rs, ks, 1)[0])
    else:
        slope = float("nan")
    cols = ["table", "eps", "radius", "kept", "considered", "support_radius", "apply_rel_error"]
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: (format(v, ".17g") if isinstance(v, float) else v) for k, v in row.items()})
        text = buf.getvalue()
    else:
        text = json.dumps({"rows": rows, "radius_slope": slope}, sort_keys=True)
    for row in rows:
        err = row["apply_rel_error"]
        print(f"{row['table']}\teps={row['eps']:.0e}\tR={row['radius']}\tkept={row['kept']}"
              f"/{row['considered']}\tsupport={row['support_radius']:.4g}\t"
              f"err={err if err == '' else format(err, '.3e')}", file=stream)
    print(f"radius_slope={slope:.4g}", file=stream)
    if cfg.out is not None:
        _write(_out_path(cfg, f"sparsity_{stem}", False), text)
    return EXIT_OK


# ------------------------------------------------------------------ parsing


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat JSON file with defaults for any flag")
    common.add_argument("--operator", choices=["heat", "genheat", "repulsor", "all"], default=None)
    common.add_argument("--rho", type=float, nargs="+", default=None)
    common.add_argument("--t", type=float, nargs="+", default=None)
    common.add_argument("--k", type=int, nargs="+", default=None)
    common.add_argument("--dim", type=int, default=None)
    common.add_argument("--alpha", type=float, default=None)
    common.add_argument("--beta", type=float, default=None)
    common.add_argument("--radius", type=int, default=None)
    common.add_argument("--eps", type=float, nargs="+", default=None)
    common.add_argument("--grid-n", dest="grid_n", type=int, default=None)
    common.add_argument("--grid-l", dest="grid_l", type=float, default=None)
    common.add_argument("--out", default=None)
    common.add_argument("--format", choices=["csv", "json"], default=None)

    p = argparse.ArgumentParser(prog="gabormat", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    m = sub.add_parser("matrix", parents=[common], help="export closed-form entry moduli")
    m.add_argument("--slice", action="store_true", help="only the column nu = 0")
    v = sub.add_parser("verify", parents=[common], help="closed forms against the oracle")
    v.add_argument("--flip-sign", dest="flip_sign", action="store_true",
                   help="negative control: flip the |n+n'|^2 sign in the heat formula")
    s = sub.add_parser("spectrogram", parents=[common], help="STFT magnitudes of repulsor solutions")
    s.add_argument("--datum-m", dest="datum_m", type=float, default=None)
    s.add_argument("--datum-n", dest="datum_n", type=float, default=None)
    s.add_argument("--stft-extent", dest="stft_extent", type=float, default=None)
    s.add_argument("--stft-points", dest="stft_points", type=int, default=None)
    q = sub.add_parser("sparsity", parents=[common], help="threshold and radius sweeps")
    q.add_argument("--sweep-eps", dest="sweep_eps", type=float, default=None)
    return p


def _resolve(ns: argparse.Namespace) -> RunConfig:
    merged = dict(DEFAULTS)
    if ns.command == "spectrogram":
        merged.update(operator="repulsor", t=[0.5, 1.0, 1.5, 2.0])
    if ns.command == "verify":
        merged.update(operator="all")
    file_cfg = {}
    if ns.config:
        try:
            with open(ns.config) as fh:
                file_cfg = json.load(fh)
        except OSError as exc:
            raise IOError(f"cannot read config {ns.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise ConfigError("config must be a flat JSON object")
        file_cfg = {k.replace("-", "_"): v for k, v in file_cfg.items()}
    flags = {k: v for k, v in vars(ns).items() if v is not None and k not in ("config", "command")}
    merged.update(file_cfg)
    merged.update(flags)
    extra = {k: merged.pop(k) for k in list(merged) if k not in DEFAULTS}
    extra["t_given"] = "t" in file_cfg or "t" in flags
    extra["rho_given"] = "rho" in file_cfg or "rho" in flags
    try:
        cfg = RunConfig(
            command=ns.command, operator=str(merged["operator"]),
            rho=[float(v) for v in _listify(merged["rho"])],
            t=[float(v) for v in _listify(merged["t"])],
            k=[int(v) for v in _listify(merged["k"])],
            dim=int(merged["dim"]), alpha=float(merged["alpha"]), beta=float(merged["beta"]),
            radius=None if merged["radius"] is None else int(merged["radius"]),
            eps=None if merged["eps"] is None else [float(v) for v in _listify(merged["eps"])],
            grid_n=None if merged["grid_n"] is None else int(merged["grid_n"]),
            grid_l=None if merged["grid_l"] is None else float(merged["grid_l"]),
            out=merged["out"], format=str(merged["format"]), extra=extra)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    _validate(cfg)
    return cfg


COMMANDS = {"matrix": cmd_matrix, "verify": cmd_verify, "spectrogram": cmd_spectrogram,
            "sparsity": cmd_sparsity}


def main(argv=None, stream=None) -> int:
    stream = stream if stream is not None else sys.stdout
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = _resolve(ns)
        return COMMANDS[cfg.command](cfg, stream)
    except (ConfigError, GaborError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
