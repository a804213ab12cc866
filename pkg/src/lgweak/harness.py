"""Experiment orchestration: g-sweeps, run reports and their serialization."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import LGWeakError, NearOrthogonalPostSelection, PostSelectionVanished, ValidationError
from .evolution import ScenarioConfig, simulate_displacements
from .extraction import (
    WeakValueEstimate,
    equal_squares_check,
    estimate_l2,
    estimate_single_probe,
    estimate_two_probe,
)
from .probe_field import DisplacementSet
from .quantum_core import WeakValueReport, joint_weak_value_report
from .scenario import scenario_to_dict

CSV_COLUMNS = (
    "g", "l", "prob_plus", "prob_minus",
    "dx_plus", "dy_plus", "dxy_plus", "dx2y2h_plus",
    "dx_minus", "dy_minus", "dxy_minus", "dx2y2h_minus",
    "method", "re_sym_ab", "im_sym_ab", "re_diff_sq", "im_diff_sq",
    "re_residual_sym", "im_residual_sym",
)  # fmt: skip
_DISPLACEMENT_KEYS = ("dx", "dy", "dxy", "dx2y2h")
NAN = float("nan")


@dataclass
class RunReport:
    g: float
    l: int
    scenario: dict | None = None
    plus: DisplacementSet | None = None
    minus: DisplacementSet | None = None
    prob_plus: float = NAN
    prob_minus: float = NAN
    oracle: WeakValueReport | None = None
    estimates: list[WeakValueEstimate] = field(default_factory=list)
    flag: str | None = None

    def residuals(self, est: WeakValueEstimate) -> dict[str, complex | None]:
        """Estimate minus oracle for every component the method recovers."""
        if self.oracle is None:
            return {k: None for k in ("sym_ab_w", "diff_sq_w", "a_w", "b_w")}
        o = self.oracle
        truth = {
            "sym_ab_w": 2 * o.sym_ab_half_w,
            "diff_sq_w": 2 * o.diff_sq_half_w,
            "a_w": o.a_w,
            "b_w": o.b_w,
        }
        out = {}
        for k, t in truth.items():
            v = getattr(est, k)
            out[k] = None if v is None else complex(v) - complex(t)
        return out


def estimates_for(
    dplus: DisplacementSet, dminus: DisplacementSet, l_mag: int, g: float, sign_l: int, equal_squares: bool
) -> list[WeakValueEstimate]:
    """Every estimate the probe pair supports, general method first."""
    out = [estimate_two_probe(dplus, dminus, l_mag, g)]
    if l_mag == 2:
        out.append(estimate_l2(dplus, dminus, g))
        if equal_squares:
            out.append(estimate_single_probe(dplus if sign_l > 0 else dminus, sign_l, g))
    return out


def run_point(sc: ScenarioConfig, g: float, workers: int = 1, tol: float | None = None) -> RunReport:
    """Simulate both probe signs at coupling ``g`` and extract weak values."""
    l_mag = abs(sc.l)
    sign_l = 1 if sc.l >= 0 else -1
    row = RunReport(g=float(g), l=l_mag, scenario=scenario_to_dict(sc.with_(g=g)))
    try:
        row.oracle = joint_weak_value_report(sc.pre, sc.post, sc.a, sc.b)
        row.plus, row.prob_plus = simulate_displacements(sc.with_(g=g, l=l_mag), workers)
        row.minus, row.prob_minus = simulate_displacements(sc.with_(g=g, l=-l_mag), workers)
    except (PostSelectionVanished, NearOrthogonalPostSelection) as exc:
        row.flag = f"{type(exc).__name__}: {exc}"
        return row
    row.estimates = estimates_for(row.plus, row.minus, l_mag, g, sign_l, equal_squares_check(sc.a, sc.b))
    if tol is not None:
        check_tolerance(row, tol)
    return row


def check_tolerance(row: RunReport, tol: float) -> None:
    """Flag ``row`` if any joint estimate misses the oracle by more than ``tol`` (relative)."""
    if row.oracle is None or row.flag:
        return
    ref = max(abs(2 * row.oracle.sym_ab_half_w), 1e-300)
    for est in row.estimates:
        err = row.residuals(est)["sym_ab_w"]
        if err is not None and abs(err) > tol * ref:
            row.flag = f"{est.method.value}: |residual| {abs(err):.3e} exceeds tol {tol:g} (relative)"
            return


def run_sweep(sc: ScenarioConfig, g_values, workers: int = 1, tol: float | None = None) -> list[RunReport]:
    """One :class:`RunReport` per coupling; failed rows are flagged, not raised."""
    g_values = [float(g) for g in g_values]
    if any(not g > 0 for g in g_values):
        raise ValidationError("g values must be positive")
    if any(b <= a for a, b in zip(g_values, g_values[1:])):
        raise ValidationError("g values must be strictly ascending")
    if g_values and sc.l == 0:
        raise ValidationError("two-probe extraction needs |l| >= 1")
    return [run_point(sc, g, workers, tol) for g in g_values]


def g_grid(g_min: float, g_max: float, points: int, log: bool = False) -> list[float]:
    if points < 1 or not 0 < g_min <= g_max:
        raise ValidationError("need 0 < g_min <= g_max and points >= 1")
    if points == 1:
        return [g_min]
    vals = np.geomspace(g_min, g_max, points) if log else np.linspace(g_min, g_max, points)
    return [float(v) for v in vals]


def first_flagged(rows: list[RunReport]) -> tuple[int, RunReport] | None:
    for i, row in enumerate(rows):
        if row.flag:
            return i, row
    return None


# serialization


def _num(v) -> str:
    return format(float(v), ".17g")


def _pair(z) -> list[float] | None:
    return None if z is None else [float(complex(z).real), float(complex(z).imag)]


def _csv_lines(row: RunReport) -> list[dict]:
    base = {"g": row.g, "l": row.l, "prob_plus": row.prob_plus, "prob_minus": row.prob_minus}
    for tag, d in (("plus", row.plus), ("minus", row.minus)):
        for k, v in zip(_DISPLACEMENT_KEYS, d.as_tuple() if d else (NAN,) * 4):
            base[f"{k}_{tag}"] = v
    if not row.estimates:
        return [dict(base, method="none", re_sym_ab=NAN, im_sym_ab=NAN, re_diff_sq=NAN, im_diff_sq=NAN,
                     re_residual_sym=NAN, im_residual_sym=NAN)]  # fmt: skip
    lines = []
    for est in row.estimates:
        diff = est.diff_sq_w if est.diff_sq_w is not None else complex(NAN, NAN)
        res = row.residuals(est)["sym_ab_w"]
        res = complex(NAN, NAN) if res is None else res
        lines.append(
            dict(
                base,
                method=est.method.value,
                re_sym_ab=est.sym_ab_w.real,
                im_sym_ab=est.sym_ab_w.imag,
                re_diff_sq=diff.real,
                im_diff_sq=diff.imag,
                re_residual_sym=res.real,
                im_residual_sym=res.imag,
            )
        )
    return lines


def _report_dict(row: RunReport) -> dict:
    def disp(d):
        return None if d is None else dict(zip(_DISPLACEMENT_KEYS, d.as_tuple()))

    def est_dict(e: WeakValueEstimate):
        return {
            "method": e.method.value,
            "sym_ab_w": _pair(e.sym_ab_w),
            "diff_sq_w": _pair(e.diff_sq_w),
            "a_w": _pair(e.a_w),
            "b_w": _pair(e.b_w),
            "conditioning": e.conditioning,
        }

    return {
        "scenario": row.scenario,
        "g": row.g,
        "l": row.l,
        "plus": disp(row.plus),
        "minus": disp(row.minus),
        "prob_plus": None if math.isnan(row.prob_plus) else row.prob_plus,
        "prob_minus": None if math.isnan(row.prob_minus) else row.prob_minus,
        "oracle": None if row.oracle is None else {k: _pair(v) for k, v in row.oracle.as_dict().items()},
        "estimates": [est_dict(e) for e in row.estimates],
        "residuals": [
            {"method": e.method.value, **{k: _pair(v) for k, v in row.residuals(e).items()}} for e in row.estimates
        ],
        "flag": row.flag,
    }


def emit_report(rows: list[RunReport], fmt: str = "csv") -> bytes:
    """Serialize ``rows`` as CSV (one line per estimate) or JSON."""
    if fmt == "json":
        return (json.dumps([_report_dict(r) for r in rows], indent=1, allow_nan=False) + "\n").encode()
    if fmt != "csv":
        raise ValueError(f"unknown report format {fmt!r}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        for line in _csv_lines(row):
            w.writerow([line[c] if c in ("method", "l") else _num(line[c]) for c in CSV_COLUMNS])
    return buf.getvalue().encode()


def parse_report_csv(data: bytes | str) -> list[dict]:
    """Read a report CSV back into records of floats (``method`` stays a string)."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    reader = csv.DictReader(io.StringIO(data))
    records = []
    for line in reader:
        rec = {}
        for k, v in line.items():
            if k == "method":
                rec[k] = v
            elif k == "l":
                rec[k] = int(v)
            else:
                rec[k] = float(v)
        records.append(rec)
    return records


def records_to_json(records: list[dict]) -> bytes:
    """JSON for parsed CSV records; NaN becomes ``null``."""

    def clean(v):
        return None if isinstance(v, float) and math.isnan(v) else v

    return json.dumps([{k: clean(v) for k, v in r.items()} for r in records], allow_nan=False).encode()


def records_from_json(data: bytes | str) -> list[dict]:
    """Inverse of :func:`records_to_json`: ``null`` numbers come back as NaN."""
    out = []
    for r in json.loads(data):
        rec = {}
        for k, v in r.items():
            if k in ("method", "l"):
                rec[k] = v
            else:
                rec[k] = NAN if v is None else float(v)
        out.append(rec)
    return out


def reports_from_displacements(
    records: list[dict], equal_squares: bool = False, sc: ScenarioConfig | None = None
) -> list[RunReport]:
    """Build reports from measured displacements (one record per g, l pair).

    Records need ``g``, ``l`` and the eight ``d*_plus`` / ``d*_minus`` fields;
    ``prob_plus`` / ``prob_minus`` are optional.  With a scenario, the
    oracle and residuals are filled in and the equal-squares check is run on
    its observables.
    """
    rows = []
    seen = set()
    for rec in records:
        try:
            key = tuple(float(rec[k]) for k in ("g", "l", *[f"{d}_{s}" for s in ("plus", "minus") for d in _DISPLACEMENT_KEYS]))
        except KeyError as exc:
            raise ValidationError(f"displacement record is missing column {exc.args[0]!r}") from None
        if key in seen:
            continue
        seen.add(key)
        g, l_mag = key[0], abs(int(key[1]))
        if l_mag < 1:
            raise ValidationError("measured displacements need |l| >= 1")
        row = RunReport(
            g=g,
            l=l_mag,
            plus=DisplacementSet(*key[2:6]),
            minus=DisplacementSet(*key[6:10]),
            prob_plus=float(rec.get("prob_plus", NAN)),
            prob_minus=float(rec.get("prob_minus", NAN)),
        )
        eq = equal_squares
        if sc is not None:
            row.scenario = scenario_to_dict(sc.with_(g=g))
            row.oracle = joint_weak_value_report(sc.pre, sc.post, sc.a, sc.b)
            eq = eq or equal_squares_check(sc.a, sc.b)
        try:
            row.estimates = estimates_for(row.plus, row.minus, l_mag, g, 1, eq)
        except LGWeakError as exc:
            row.flag = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return rows

