"""File-output matplotlib renderings of the CSV reports.

Imported only when figure output is requested, so headless runs without the
flag never touch matplotlib.  Every function writes one PNG and returns its
path.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402


def _save(fig, out_dir: str, name: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    target = os.path.join(out_dir, name)
    fig.savefig(target, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return target


def render_signature_figure(level_norms: dict, out_dir: str) -> str:
    """level_norms: {(s, t): [norm of level 0, 1, ...]}."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for (s, t), norms in sorted(level_norms.items()):
        lv = np.arange(len(norms))
        ax.semilogy(lv, np.maximum(norms, 1e-300), "o-",
                    label=f"[{s:g}, {t:g}]")
    ax.set_xlabel("tensor level")
    ax.set_ylabel("level norm")
    ax.set_title("signature level norms")
    ax.legend(fontsize=8)
    return _save(fig, out_dir, "signature_levels.png")


def render_pvar_figure(path, partitions: dict, out_dir: str) -> str:
    """partitions: {label: times array} marked over the path components."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for c in range(path.dim):
        ax.plot(path.times, path.points[:, c], "-", lw=1,
                label=f"component {c + 1}")
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for k, (label, times) in enumerate(sorted(partitions.items())):
        for u in times:
            ax.axvline(u, color=colors[(path.dim + k) % len(colors)],
                       alpha=0.4, lw=0.8)
        ax.plot([], [], color=colors[(path.dim + k) % len(colors)],
                label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("x(t)")
    ax.set_title("driver and optimal partition")
    ax.legend(fontsize=8)
    return _save(fig, out_dir, "pvar_partition.png")


def render_remainder_figure(reports, out_dir: str) -> str:
    """Measured vs bound scatter on log axes, with the pass/fail diagonal."""
    fig, ax = plt.subplots(figsize=(5, 5))
    meas = np.array([max(r.measured, 1e-300) for r in reports])
    bnd = np.array([max(r.bound, 1e-300) for r in reports])
    ok = np.array([r.passed for r in reports])
    ax.loglog(bnd[ok], meas[ok], "o", ms=4, label="pass")
    if np.any(~ok):
        ax.loglog(bnd[~ok], meas[~ok], "rx", ms=6, label="fail")
    lims = [min(bnd.min(), meas.min()), max(bnd.max(), meas.max())]
    ax.loglog(lims, lims, "k--", lw=1, label="measured = bound")
    ax.set_xlabel("bound")
    ax.set_ylabel("measured remainder")
    ax.set_title("remainder vs bound")
    ax.legend(fontsize=8)
    return _save(fig, out_dir, "remainder_bounds.png")


def render_profile_figure(rows, c_hat: float, slope: float,
                          out_dir: str) -> str:
    """rows: (omega, measured) pairs from a fitted profile."""
    fig, ax = plt.subplots(figsize=(6, 4))
    w = np.array([r[0] for r in rows])
    m = np.array([r[1] for r in rows])
    keep = (w > 0) & (m > 0)
    ax.loglog(w[keep], m[keep], "o", ms=4, label="measured")
    if np.any(keep) and np.isfinite(slope):
        ww = np.sort(w[keep])
        anchor = m[keep][np.argmax(w[keep])]
        ax.loglog(ww, anchor * (ww / ww[-1]) ** slope, "k--", lw=1,
                  label=f"slope {slope:.3f}")
    ax.set_xlabel("control omega(s, t)")
    ax.set_ylabel("measured remainder")
    ax.set_title(f"profile: fitted constant {c_hat:.4g}")
    ax.legend(fontsize=8)
    return _save(fig, out_dir, "profile_fit.png")


def render_decay_figure(table, out_dir: str) -> str:
    fig, ax = plt.subplots(figsize=(6, 4))
    lv = [r[0] for r in table.rows]
    ax.semilogy(lv, [max(r[1], 1e-300) for r in table.rows], "o-",
                label="measured")
    ax.semilogy(lv, [r[2] for r in table.rows], "s--",
                label="1-variation / n!")
    ax.semilogy(lv, [r[3] for r in table.rows], "^:",
                label="extension-rate reference")
    ax.set_xlabel("level n")
    ax.set_ylabel("norm")
    ax.set_title(f"factorial decay on [{table.s:g}, {table.t:g}]")
    ax.legend(fontsize=8)
    return _save(fig, out_dir, "decay_levels.png")


def render_neoclassical_figure(samples, out_dir: str) -> str:
    fig, ax = plt.subplots(figsize=(6, 4))
    ratios = [s.ratio for s in samples]
    ax.hist(ratios, bins=40)
    ax.axvline(1.0, color="k", ls="--", lw=1, label="equality")
    ax.set_xlabel("lhs / rhs")
    ax.set_ylabel("samples")
    ax.set_title("fractional binomial-sum ratio")
    ax.legend(fontsize=8)
    return _save(fig, out_dir, "neoclassical_ratio.png")


def render_compensated_figure(rows, out_dir: str) -> str:
    """rows: (index, invariance defect, removal defect) per partition."""
    fig, ax = plt.subplots(figsize=(6, 4))
    idx = [r[0] for r in rows]
    ax.semilogy(idx, [max(r[1], 1e-300) for r in rows], "o",
                label="partition-invariance defect")
    ax.semilogy(idx, [max(r[2], 1e-300) for r in rows], "s",
                label="point-removal defect")
    ax.axhline(1e-12, color="k", ls="--", lw=1, label="1e-12")
    ax.set_xlabel("partition index")
    ax.set_ylabel("defect")
    ax.set_title("compensated-sum identities")
    ax.legend(fontsize=8)
    return _save(fig, out_dir, "compensated_identities.png")
