"""Batch experiment runner.

Every verification in the library is exposed as a subcommand that reads a
JSON config, runs deterministically under a seed, and writes an RFC-4180
style CSV (17 significant digits, '.' decimal).  Exit codes: 0 when every
checked row passes, 1 when a bound or identity check fails (or the reference
solver gives up), 2 on usage/config errors.  Figure files are opt-in via
--figures DIR and render alongside the delimited output.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from .inequalities import beta_constant, neoclassical_check
from .path_signature import PiecewiseLinearPath, decay_scan, signature
from .rde_taylor import (
    SolverConvergenceError,
    bound_check_1var,
    compensated_riemann_sum,
    controlled_tuple,
    point_removal_delta,
    solve_reference,
    theorem1_profile,
)
from .reports import format_float, write_bound_csv
from .tensor_algebra import project
from .variation import brute_force_pvar, control_omega, homogeneous_p_variation
from .vector_field import VectorFieldJet

__all__ = ["main", "ConfigError"]

ENV_SEED = "ROUGH_TAYLOR_SEED"


class ConfigError(ValueError):
    """Bad usage or config: reported with exit code 2."""


@dataclass
class CmdResult:
    write: object  # callable(fh) emitting the full CSV
    failed: bool = False
    notes: list = dc_field(default_factory=list)
    figure: object = None  # callable(out_dir) -> path, or None


# ---------------------------------------------------------------------------
# config plumbing


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


def _check_keys(cfg: dict, allowed: set, cmd: str):
    unknown = set(cfg) - allowed - {"seed", "out"}
    if unknown:
        raise ConfigError(
            f"unknown config keys for {cmd}: {sorted(unknown)} "
            f"(allowed: {sorted(allowed | {'seed', 'out'})})"
        )


def _number(cfg, key, default=None, minimum=None, integer=False):
    if key not in cfg:
        return default
    v = cfg[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f'config key "{key}" must be a number')
    if integer:
        if int(v) != v:
            raise ConfigError(f'config key "{key}" must be an integer')
        v = int(v)
    v = v if integer else float(v)
    if minimum is not None and v < minimum:
        raise ConfigError(f'config key "{key}" must be >= {minimum}, got {v}')
    return v


def _parse_path(cfg) -> PiecewiseLinearPath:
    if "path" not in cfg:
        raise ConfigError('config needs a "path" object')
    try:
        return PiecewiseLinearPath.from_json(cfg["path"])
    except ValueError as exc:
        raise ConfigError(f"bad path object: {exc}") from None


def _parse_field(cfg) -> VectorFieldJet:
    if "field" not in cfg:
        raise ConfigError('config needs a "field" object')
    try:
        return VectorFieldJet.from_json(cfg["field"])
    except ValueError as exc:
        raise ConfigError(f"bad field object: {exc}") from None


def _parse_y0(cfg, e: int) -> np.ndarray:
    if "y0" not in cfg:
        raise ConfigError('config needs "y0"')
    try:
        y0 = np.asarray(cfg["y0"], dtype=float).reshape(-1)
    except (TypeError, ValueError):
        raise ConfigError('"y0" must be a numeric list') from None
    if y0.shape[0] != e:
        raise ConfigError(f'"y0" has {y0.shape[0]} entries, field expects {e}')
    return y0


def _intervals(cfg, path: PiecewiseLinearPath):
    """[[s, t], ...] from config (explicit list, or s/t keys, or full span)."""
    if "intervals" in cfg:
        raw = cfg["intervals"]
        if not isinstance(raw, list) or not raw:
            raise ConfigError('"intervals" must be a non-empty list of [s, t]')
        out = []
        for pair in raw:
            if (not isinstance(pair, list)) or len(pair) != 2:
                raise ConfigError('each interval must be a [s, t] pair')
            s, t = float(pair[0]), float(pair[1])
            if not (path.t0 <= s <= t <= path.t1):
                raise ConfigError(
                    f"interval [{s}, {t}] outside path domain "
                    f"[{path.t0}, {path.t1}] or reversed"
                )
            out.append((s, t))
        return out
    s = _number(cfg, "s", default=path.t0)
    t = _number(cfg, "t", default=path.t1)
    if not (path.t0 <= s <= t <= path.t1):
        raise ConfigError(f"interval [{s}, {t}] invalid for this path")
    return [(s, t)]


def _resolve_grid(cfg, path: PiecewiseLinearPath, default_count: int):
    raw = cfg.get("grid", default_count)
    if isinstance(raw, bool):
        raise ConfigError('"grid" must be a count or a list of times')
    if isinstance(raw, (int, float)):
        n = int(raw)
        if n != raw or n < 2:
            raise ConfigError('"grid" count must be an integer >= 2')
        return np.linspace(path.t0, path.t1, n)
    if isinstance(raw, list):
        g = np.unique(np.asarray(raw, dtype=float).reshape(-1))
        if g.shape[0] < 2 or g[0] < path.t0 - 1e-12 or g[-1] > path.t1 + 1e-12:
            raise ConfigError('"grid" times must be >= 2 values inside the path domain')
        return g
    raise ConfigError('"grid" must be a count or a list of times')


def _csv_writer(fh):
    return csv.writer(fh, lineterminator="\n")


def _word(level: int, flat: int, d: int) -> str:
    """Letter word for a flat level index, e.g. level 2, d=2, flat 1 -> '1-2'."""
    if level == 0:
        return ""
    letters = []
    for _ in range(level):
        flat, r = divmod(flat, d)
        letters.append(str(r + 1))
    return "-".join(reversed(letters))


def _map_jobs(fn, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# subcommands


def cmd_signature(cfg, args, rng) -> CmdResult:
    _check_keys(cfg, {"path", "depth", "intervals", "s", "t"}, "signature")
    path = _parse_path(cfg)
    depth = args.depth if args.depth is not None else _number(
        cfg, "depth", default=None, integer=True
    )
    if depth is None:
        raise ConfigError('signature needs "depth" (config key or --depth)')
    if depth < 1:
        raise ConfigError(f"depth must be >= 1, got {depth}")
    pairs = _intervals(cfg, path)
    sigs = [(s, t, signature(path, s, t, depth)) for s, t in pairs]

    def write(fh):
        w = _csv_writer(fh)
        w.writerow(["interval_s", "interval_t", "level", "word", "coefficient"])
        for s, t, sig in sigs:
            for level in range(depth + 1):
                block = project(sig, level)
                for flat, c in enumerate(block):
                    w.writerow(
                        [
                            format_float(s),
                            format_float(t),
                            str(level),
                            _word(level, flat, path.dim),
                            format_float(c),
                        ]
                    )

    def figure(out_dir):
        from .figures import render_signature_figure

        norms = {
            (s, t): [float(np.linalg.norm(project(sig, n)))
                     for n in range(depth + 1)]
            for s, t, sig in sigs
        }
        return render_signature_figure(norms, out_dir)

    return CmdResult(write=write, figure=figure)


def cmd_pvar(cfg, args, rng) -> CmdResult:
    _check_keys(cfg, {"path", "p", "s", "t", "brute_force_check"}, "pvar")
    path = _parse_path(cfg)
    p = args.p if args.p is not None else _number(cfg, "p", default=None)
    if p is None:
        raise ConfigError('pvar needs "p" (config key or --p)')
    if p < 1:
        raise ConfigError(f"p must be >= 1, got {p}")
    check = bool(args.brute_force_check or cfg.get("brute_force_check", False))
    (s, t), = _intervals(cfg, path)
    try:
        res = homogeneous_p_variation(path, p, s, t)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    oracle_val = ""
    oracle_gap = ""
    failed = False
    if check:
        try:
            oracle = brute_force_pvar(path, p, s, t)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        gap = abs(oracle.value - res.value)
        oracle_val = format_float(oracle.value)
        oracle_gap = format_float(gap)
        failed = gap > 1e-12 * max(1.0, abs(oracle.value))

    def write(fh):
        w = _csv_writer(fh)
        w.writerow(
            [
                "interval_s", "interval_t", "p", "value", "exact",
                "optimal_partition", "oracle_value", "oracle_gap",
            ]
        )
        w.writerow(
            [
                format_float(s),
                format_float(t),
                format_float(p),
                format_float(res.value),
                "true" if res.exact else "false",
                ";".join(format_float(u) for u in res.optimal_partition),
                oracle_val,
                oracle_gap,
            ]
        )

    def figure(out_dir):
        from .figures import render_pvar_figure

        return render_pvar_figure(
            path, {"optimal partition": res.optimal_partition}, out_dir
        )

    return CmdResult(write=write, failed=failed, figure=figure)


def _parse_int_list(text, what):
    try:
        return [int(x) for x in text.split(",") if x.strip() != ""]
    except ValueError:
        raise ConfigError(f"cannot parse {what} list: {text!r}") from None


def _parse_float_list(text, what):
    try:
        return [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError:
        raise ConfigError(f"cannot parse {what} list: {text!r}") from None


def cmd_remainder(cfg, args, rng) -> CmdResult:
    _check_keys(
        cfg,
        {"field", "path", "y0", "tol", "mode", "orders", "intervals", "s", "t",
         "p", "gamma", "grid", "gamma_sweep", "box_policy"},
        "remainder",
    )
    field = _parse_field(cfg)
    path = _parse_path(cfg)
    y0 = _parse_y0(cfg, field.e)
    if field.d != path.dim:
        raise ConfigError(
            f"field drives {field.d} directions, path has {path.dim}"
        )
    tol = _number(cfg, "tol", default=1e-10, minimum=0.0)
    box_policy = _number(cfg, "box_policy", default=0.1, minimum=0.0)
    mode = cfg.get("mode")
    if args.p1:
        mode = "p1"
    if args.profile:
        mode = "profile"
    if mode not in ("p1", "profile"):
        raise ConfigError(
            'remainder needs --p1 or --profile (or config "mode")'
        )

    if mode == "p1":
        if args.orders is not None:
            orders = _parse_int_list(args.orders, "--orders")
        elif "orders" in cfg:
            orders = cfg["orders"]
            if (not isinstance(orders, list)) or not all(
                isinstance(n, int) and not isinstance(n, bool) for n in orders
            ):
                raise ConfigError('"orders" must be a list of integers')
        else:
            orders = [1, 2, 3]
        if not orders or min(orders) < 1:
            raise ConfigError(f"orders must be >= 1, got {orders}")
        pairs = _intervals(cfg, path)
        sampler = solve_reference(field, path, y0, tol=tol)
        items = [(s, t, n) for s, t in pairs for n in sorted(orders)]

        def one(item):
            s, t, n = item
            return bound_check_1var(
                field, path, y0, s, t, n,
                tol=tol, box_policy=box_policy, sampler=sampler,
            )

        reports = _map_jobs(one, items, args.jobs)
        failed = any(not r.passed for r in reports)

        def figure(out_dir):
            from .figures import render_remainder_figure

            return render_remainder_figure(reports, out_dir)

        return CmdResult(
            write=lambda fh: write_bound_csv(reports, fh),
            failed=failed,
            figure=figure,
        )

    # profile mode
    p = _number(cfg, "p", default=None, minimum=1.0)
    gamma = _number(cfg, "gamma", default=None)
    if p is None or gamma is None:
        raise ConfigError('profile mode needs "p" and "gamma"')
    if args.gamma_sweep is not None:
        sweep = _parse_float_list(args.gamma_sweep, "--gamma-sweep")
    elif "gamma_sweep" in cfg:
        sweep = cfg["gamma_sweep"]
        if (not isinstance(sweep, list)) or not sweep:
            raise ConfigError('"gamma_sweep" must be a non-empty list')
        sweep = [float(g) for g in sweep]
    else:
        sweep = [gamma]
    for g in sweep:
        if g <= p - 1:
            raise ConfigError(
                f"profile needs gamma > p - 1, got gamma={g}, p={p}"
            )
    grid = _resolve_grid(cfg, path, default_count=9)
    sampler = solve_reference(field, path, y0, tol=tol)
    notes = []
    all_reports = []
    first = None
    for g in sweep:
        prof = theorem1_profile(
            field, path, y0, p, g, grid,
            tol=tol, box_policy=box_policy, sampler=sampler,
        )
        if first is None:
            first = prof
        all_reports.extend(prof.reports)
        notes.append(
            f"profile gamma={g:g}: fitted constant {format_float(prof.c_hat)}, "
            f"slope {format_float(prof.slope)}, rows used {prof.n_used}"
        )
    failed = any(not r.passed for r in all_reports)

    def figure(out_dir):
        from .figures import render_profile_figure

        rows = [
            (r.params.get("omega", 0.0), r.measured)
            for r in first.reports
            if not r.note
        ]
        return render_profile_figure(rows, first.c_hat, first.slope, out_dir)

    return CmdResult(
        write=lambda fh: write_bound_csv(all_reports, fh),
        failed=failed,
        notes=notes,
        figure=figure,
    )


def cmd_decay(cfg, args, rng) -> CmdResult:
    _check_keys(cfg, {"path", "p", "s", "t", "max_level"}, "decay")
    path = _parse_path(cfg)
    p = _number(cfg, "p", default=1.0, minimum=1.0)
    max_level = (
        args.max_level if args.max_level is not None
        else _number(cfg, "max_level", default=8, integer=True)
    )
    if max_level < 1:
        raise ConfigError(f"max_level must be >= 1, got {max_level}")
    (s, t), = _intervals(cfg, path)
    table = decay_scan(path, s, t, max_level, p=p)
    failed = False
    rows = []
    for level, measured, one_ref, ext_ref in table.rows:
        if p == 1.0:
            ok = measured <= one_ref * (1.0 + 1e-12)
            within = "true" if ok else "false"
            failed = failed or not ok
        else:
            within = ""
        rows.append((level, measured, one_ref, ext_ref, within))

    def write(fh):
        w = _csv_writer(fh)
        w.writerow(
            [
                "interval_s", "interval_t", "p", "level", "measured",
                "one_var_ref", "extension_ref", "within_one_var",
            ]
        )
        for level, measured, one_ref, ext_ref, within in rows:
            w.writerow(
                [
                    format_float(s),
                    format_float(t),
                    format_float(p),
                    str(level),
                    format_float(measured),
                    format_float(one_ref),
                    format_float(ext_ref),
                    within,
                ]
            )

    def figure(out_dir):
        from .figures import render_decay_figure

        return render_decay_figure(table, out_dir)

    return CmdResult(write=write, failed=failed, figure=figure)


def cmd_neoclassical(cfg, args, rng) -> CmdResult:
    _check_keys(cfg, {"p", "samples", "n_max", "scale"}, "neoclassical")
    p = _number(cfg, "p", default=1.0)
    if p < 1:
        raise ConfigError(f"p must be >= 1, got {p}")
    samples = (
        args.samples if args.samples is not None
        else _number(cfg, "samples", default=1000, minimum=1, integer=True)
    )
    n_max = _number(cfg, "n_max", default=12, minimum=0, integer=True)
    scale = _number(cfg, "scale", default=2.0, minimum=0.0)
    beta = beta_constant(p)
    draws = [
        (
            float(rng.uniform(0.0, scale)),
            float(rng.uniform(0.0, scale)),
            int(rng.integers(0, n_max + 1)),
        )
        for _ in range(samples)
    ]
    results = _map_jobs(
        lambda ab: neoclassical_check(ab[0], ab[1], ab[2], p),
        draws,
        args.jobs,
    )
    failed = any(not r.passed for r in results)

    def write(fh):
        w = _csv_writer(fh)
        w.writerow(
            ["sample", "a", "b", "n", "p", "lhs", "rhs", "ratio", "pass",
             "beta_p"]
        )
        for i, r in enumerate(results):
            w.writerow(
                [
                    str(i),
                    format_float(r.a),
                    format_float(r.b),
                    str(r.n),
                    format_float(r.p),
                    format_float(r.lhs),
                    format_float(r.rhs),
                    format_float(r.ratio),
                    "true" if r.passed else "false",
                    format_float(beta),
                ]
            )

    def figure(out_dir):
        from .figures import render_neoclassical_figure

        return render_neoclassical_figure(results, out_dir)

    return CmdResult(
        write=write,
        failed=failed,
        notes=[f"beta_constant(p={p:g}) = {format_float(beta)}"],
        figure=figure,
    )


def cmd_lemma7(cfg, args, rng) -> CmdResult:
    _check_keys(
        cfg,
        {"field", "path", "y0", "p", "gamma", "grid", "k", "partitions", "tol"},
        "lemma7",
    )
    field = _parse_field(cfg)
    path = _parse_path(cfg)
    y0 = _parse_y0(cfg, field.e)
    p = _number(cfg, "p", default=1.0, minimum=1.0)
    gamma = _number(cfg, "gamma", default=None)
    if gamma is None:
        raise ConfigError('lemma7 needs "gamma"')
    if gamma < 1:
        raise ConfigError(f"gamma must be >= 1, got {gamma}")
    N = int(math.floor(gamma))
    k = args.k if args.k is not None else _number(cfg, "k", default=0, integer=True)
    if not 0 <= k <= N - int(math.floor(p)):
        raise ConfigError(
            f"k must lie in 0..floor(gamma)-floor(p) = 0..{N - int(math.floor(p))}, "
            f"got {k}"
        )
    count = (
        args.partitions if args.partitions is not None
        else _number(cfg, "partitions", default=20, minimum=1, integer=True)
    )
    tol = _number(cfg, "tol", default=1e-10, minimum=0.0)
    grid = _resolve_grid(cfg, path, default_count=11)
    tup = controlled_tuple(field, path, y0, gamma, grid, tol=tol)
    grid = tup.grid
    s, t = float(grid[0]), float(grid[-1])
    omega = control_omega(path, p, grid=grid)
    K = N - k
    sig_st = signature(path, s, t, K)
    e = field.e
    direct = np.zeros((e, field.d**k))
    for r in range(1, K + 1):
        V = tup.value(k + r, s).reshape(e, -1)
        nl = field.d**r
        direct += np.einsum(
            "auw,u->aw", V.reshape(e, nl, -1), project(sig_st, r)
        )
    scale = max(1.0, float(np.linalg.norm(direct)))

    interior = np.arange(1, grid.shape[0] - 1)
    partitions = [np.asarray([s, t])]
    for _ in range(count):
        m = int(rng.integers(1, interior.shape[0] + 1))
        pick = np.sort(rng.choice(interior, size=m, replace=False))
        partitions.append(np.concatenate(([s], grid[pick], [t])))

    def one(item):
        idx, P = item
        cs = compensated_riemann_sum(tup, path, k, P)
        sum_norm = float(np.linalg.norm(cs.value))
        inv_defect = float(np.linalg.norm(cs.algebraic - direct))
        removal_defect = 0.0
        chosen_ratio = ""
        ok = inv_defect <= 1e-12 * scale
        if idx == 0:
            ok = ok and sum_norm <= 1e-12 * scale
        n_pts = P.shape[0]
        if n_pts > 2:
            for j in range(1, n_pts - 1):
                delta = point_removal_delta(tup, path, k, P, j)
                rest = compensated_riemann_sum(
                    tup, path, k, np.delete(P, j)
                )
                defect = float(np.linalg.norm((cs.value - rest.value) - delta))
                removal_defect = max(removal_defect, defect)
            ok = ok and removal_defect <= 1e-12 * scale
            best = min(
                omega(float(P[j - 1]), float(P[j + 1]))
                for j in range(1, n_pts - 1)
            )
            n_interior = n_pts - 2
            cap = min(2.0 / n_interior, 1.0) * omega(s, t)
            ratio = best / cap if cap > 0 else 0.0
            chosen_ratio = format_float(ratio)
            if math.floor(p) == 1:
                ok = ok and ratio <= 1.0 + 1e-12
        return (idx, n_pts, sum_norm, inv_defect, removal_defect,
                chosen_ratio, ok)

    rows = _map_jobs(one, list(enumerate(partitions)), args.jobs)
    failed = any(not r[6] for r in rows)

    def write(fh):
        w = _csv_writer(fh)
        w.writerow(
            [
                "partition", "n_points", "k", "sum_norm",
                "invariance_defect", "removal_defect", "chosenj_ratio", "pass",
            ]
        )
        for idx, n_pts, sum_norm, inv_d, rem_d, ratio, ok in rows:
            w.writerow(
                [
                    str(idx),
                    str(n_pts),
                    str(k),
                    format_float(sum_norm),
                    format_float(inv_d),
                    format_float(rem_d),
                    ratio,
                    "true" if ok else "false",
                ]
            )

    def figure(out_dir):
        from .figures import render_compensated_figure

        return render_compensated_figure(
            [(r[0], r[3], r[4]) for r in rows], out_dir
        )

    return CmdResult(write=write, failed=failed, figure=figure)


# ---------------------------------------------------------------------------
# entry point


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--out", help="CSV output path (default: stdout)")
    common.add_argument("--seed", type=int, default=None,
                        help=f"RNG seed (fallback: config, then ${ENV_SEED})")
    common.add_argument("--jobs", type=int, default=1,
                        help="worker threads for independent rows")
    common.add_argument("--figures", metavar="DIR", default=None,
                        help="also render figure files into DIR")

    parser = argparse.ArgumentParser(
        prog="rough-taylor",
        description="Signature, variation, and Taylor-remainder verification "
                    "runs over piecewise-linear drivers.",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("signature", parents=[common],
                        help="signature coefficients over intervals")
    sp.add_argument("--depth", type=int, default=None, help="truncation level")

    sp = sub.add_parser("pvar", parents=[common], help="p-variation of the driver")
    sp.add_argument("--p", type=float, default=None)
    sp.add_argument("--brute-force-check", action="store_true",
                    help="compare against subset enumeration (small paths)")

    sp = sub.add_parser("remainder", parents=[common],
                        help="Taylor remainder bound checks")
    mode = sp.add_mutually_exclusive_group()
    mode.add_argument("--p1", action="store_true",
                      help="exact bounded-variation bound")
    mode.add_argument("--profile", action="store_true",
                      help="fitted-constant profile over a grid")
    sp.add_argument("--orders", default=None,
                    help="comma list of approximation orders (p1 mode)")
    sp.add_argument("--gamma-sweep", default=None,
                    help="comma list of gamma values (profile mode)")

    sp = sub.add_parser("decay", parents=[common],
                        help="signature level-norm decay columns")
    sp.add_argument("--max-level", type=int, default=None)

    sp = sub.add_parser("neoclassical", parents=[common],
                        help="fractional binomial-sum inequality samples")
    sp.add_argument("--samples", type=int, default=None)

    sp = sub.add_parser("lemma7", parents=[common],
                        help="compensated-sum identity checks")
    sp.add_argument("--partitions", type=int, default=None,
                    help="number of random partitions")
    sp.add_argument("--k", type=int, default=None, help="tensor order of the sum")

    return parser


_DISPATCH = {
    "signature": cmd_signature,
    "pvar": cmd_pvar,
    "remainder": cmd_remainder,
    "decay": cmd_decay,
    "neoclassical": cmd_neoclassical,
    "lemma7": cmd_lemma7,
}


def _resolve_seed(args, cfg) -> int:
    if args.seed is not None:
        return int(args.seed)
    if "seed" in cfg:
        seed = cfg["seed"]
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise ConfigError('config "seed" must be an integer')
        return seed
    env = os.environ.get(ENV_SEED)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"${ENV_SEED} must be an integer, got {env!r}") from None
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    try:
        cfg = _load_config(args.config)
        rng = np.random.default_rng(_resolve_seed(args, cfg))
        result = _DISPATCH[args.cmd](cfg, args, rng)
    except ConfigError as exc:
        print(f"rough-taylor: config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"rough-taylor: invalid input: {exc}", file=sys.stderr)
        return 2
    except SolverConvergenceError as exc:
        print(f"rough-taylor: reference solve failed: {exc}", file=sys.stderr)
        return 1

    out_path = args.out or cfg.get("out")
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            result.write(fh)
    else:
        result.write(sys.stdout)
    for line in result.notes:
        print(line, file=sys.stderr)
    if args.figures and result.figure is not None:
        fig_path = result.figure(args.figures)
        print(f"figure written: {fig_path}", file=sys.stderr)
    return 1 if result.failed else 0


if __name__ == "__main__":
    sys.exit(main())
