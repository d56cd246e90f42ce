"""Bound-check records and their delimited serialization."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

__all__ = ["BoundReport", "make_bound_report", "format_float", "write_bound_csv"]

# Header pinned by the delimited-output contract.
BOUND_CSV_HEADER = [
    "interval_s",
    "interval_t",
    "order",
    "measured",
    "bound",
    "slack_ratio",
    "pass",
    "box_lo",
    "box_hi",
]


@dataclass
class BoundReport:
    """One measured-vs-bound comparison.

    slack_ratio is measured/bound with the 0/0 convention = 0 (a zero bound is
    only ever paired with a zero measurement, e.g. the zero field).  `note`
    carries flags such as "below solver floor".  `params` holds whatever
    context produced the row (interval, order, box, sup norms, ...).
    """

    measured: float
    bound: float
    slack_ratio: float
    passed: bool
    params: dict = field(default_factory=dict)
    note: str = ""


def make_bound_report(measured, bound, tol=1e-9, params=None, note="") -> BoundReport:
    measured = float(measured)
    bound = float(bound)
    if bound == 0.0:
        slack = 0.0 if measured <= 1e-300 else math.inf
    else:
        slack = measured / bound
    return BoundReport(
        measured=measured,
        bound=bound,
        slack_ratio=slack,
        passed=bool(slack <= 1.0 + tol),
        params=dict(params or {}),
        note=note,
    )


def format_float(x) -> str:
    """17-significant-digit decimal rendering, '.' decimal point, no locale."""
    return format(float(x), ".17g")


def _format_vec(v) -> str:
    return ";".join(format_float(x) for x in v)


def write_bound_csv(reports, fh):
    """RFC-4180-style rows, one per report, deterministic byte-for-byte."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(BOUND_CSV_HEADER)
    for r in reports:
        p = r.params
        w.writerow(
            [
                format_float(p.get("s", math.nan)),
                format_float(p.get("t", math.nan)),
                str(int(p.get("order", 0))),
                format_float(r.measured),
                format_float(r.bound),
                format_float(r.slack_ratio),
                "true" if r.passed else "false",
                _format_vec(p.get("box_lo", ())),
                _format_vec(p.get("box_hi", ())),
            ]
        )
