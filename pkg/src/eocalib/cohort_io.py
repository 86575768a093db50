"""Cohort CSV ingestion and report serialization.

Cohort files are header-named CSV with required columns ``z`` (decimal
years of follow-up) and ``delta`` (0/1 event indicator), plus optional
covariate columns for the reproductive-history model: ``age``,
``age_menarche``, ``menopausal``, ``age_menopause``, ``parity``,
``birth_ages`` (semicolon-separated ages within the cell).

Reports serialize to JSON at full precision or CSV at 4 decimals;
serialize -> parse -> serialize is a fixed point for both.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .calibration import (
    CalibrationReport,
    EORatioEstimate,
    GroupCalibration,
    GroupedCalibrationReport,
)
from .errors import CohortFileError, ValidationError
from .risk_models import RCMCovariates
from .simulation import SimulationSummary
from .survival import Cohort

__all__ = [
    "read_cohort_csv",
    "report_to_json",
    "report_from_json",
    "report_to_csv",
    "report_from_csv",
    "grouped_report_to_json",
    "grouped_report_from_json",
    "grouped_report_to_csv",
    "grouped_report_from_csv",
    "parse_grid_file",
    "summaries_to_csv",
]

_COVARIATE_COLUMNS = ("age", "age_menarche", "menopausal", "parity")


def _parse_z(cell: str) -> float:
    value = float(cell)
    if not math.isfinite(value) or value <= 0.0:
        raise ValueError("follow-up time must be a positive finite decimal")
    return value


def _parse_delta(cell: str) -> int:
    if cell not in ("0", "1"):
        raise ValueError(f"delta must be 0 or 1, got {cell!r}")
    return int(cell)


def _parse_covariates(row: dict) -> RCMCovariates:
    def cell(name):
        return (row.get(name) or "").strip()

    missing = [name for name in _COVARIATE_COLUMNS if not cell(name)]
    if missing:
        raise ValueError(f"missing covariate values: {', '.join(missing)}")
    menopausal = cell("menopausal")
    if menopausal not in ("0", "1"):
        raise ValueError(f"menopausal must be 0 or 1, got {menopausal!r}")
    births_text = cell("birth_ages")
    birth_ages = tuple(float(v) for v in births_text.split(";") if v.strip()) if births_text else ()
    age_menopause = float(cell("age_menopause")) if cell("age_menopause") else None
    return RCMCovariates(
        age=float(cell("age")),
        age_menarche=float(cell("age_menarche")),
        menopausal=int(menopausal),
        age_menopause=age_menopause,
        parity=int(cell("parity")),
        birth_ages=birth_ages,
    )


def read_cohort_csv(path, t0: float, with_covariates: bool = False) -> Cohort:
    """Parse a cohort file, reporting every invalid row at once.

    Row numbers in errors are 1-based over data rows (the header is not
    counted).
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValidationError(f"{path}: empty file, header required")
        fields = [name.strip() for name in reader.fieldnames]
        for required in ("z", "delta"):
            if required not in fields:
                raise ValidationError(f"{path}: missing required column {required!r}")

        z_values: List[float] = []
        deltas: List[int] = []
        covariates: List[RCMCovariates] = []
        violations: List[Tuple[int, str]] = []
        for rownum, row in enumerate(reader, start=1):
            row = {(k or "").strip(): (v or "").strip() for k, v in row.items()}
            try:
                z_values.append(_parse_z(row.get("z", "")))
                deltas.append(_parse_delta(row.get("delta", "")))
                if with_covariates:
                    covariates.append(_parse_covariates(row))
            except (ValueError, ValidationError) as exc:
                violations.append((rownum, str(exc)))

    if violations:
        raise CohortFileError(path, violations)
    if not z_values:
        raise ValidationError(f"{path}: no data rows")
    return Cohort(
        np.array(z_values, dtype=np.float64),
        np.array(deltas, dtype=np.int8),
        t0,
        covariates if with_covariates else None,
    )


def _f4(value: Optional[float]) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return f"{value:.4f}"


def _opt_float(cell: str) -> Optional[float]:
    return float(cell) if cell != "" else None


def _estimate_to_dict(est: EORatioEstimate) -> dict:
    return {
        "point": est.point,
        "ci_low": est.ci_low,
        "ci_high": est.ci_high,
        "numerator": est.numerator,
        "denominator": est.denominator,
    }


def _estimate_from_dict(method: str, data: dict) -> EORatioEstimate:
    return EORatioEstimate(
        method=method,
        point=data["point"],
        ci_low=data["ci_low"],
        ci_high=data["ci_high"],
        numerator=data["numerator"],
        denominator=data["denominator"],
    )


def report_to_json(report: CalibrationReport) -> str:
    """Full-precision JSON rendering; NaN variances serialize as null."""
    gw = report.km_greenwood_var
    payload = {
        "t0": report.t0,
        "n": report.n,
        "n_ks": report.n_ks,
        "n_uks": report.n_uks,
        "o_ks": report.o_ks,
        "km": {
            "incidence": report.km_incidence,
            "greenwood_var": None if math.isnan(gw) else gw,
            "degenerate": report.km_degenerate,
        },
        "corrections": {"c0_tilde": report.c0_tilde, "c1": report.c1},
        "estimates": {
            name: _estimate_to_dict(est) for name, est in report.estimates.items()
        },
    }
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


def report_from_json(text: str) -> CalibrationReport:
    data = json.loads(text)
    gw = data["km"]["greenwood_var"]
    return CalibrationReport(
        t0=data["t0"],
        n=data["n"],
        n_ks=data["n_ks"],
        n_uks=data["n_uks"],
        o_ks=data["o_ks"],
        km_incidence=data["km"]["incidence"],
        km_greenwood_var=float("nan") if gw is None else gw,
        km_degenerate=data["km"]["degenerate"],
        c0_tilde=data["corrections"]["c0_tilde"],
        c1=data["corrections"]["c1"],
        estimates={
            name: _estimate_from_dict(name, est)
            for name, est in data["estimates"].items()
        },
    )


_REPORT_CSV_HEADER = [
    "method", "point", "ci_low", "ci_high", "numerator", "denominator",
    "t0", "n", "n_ks", "n_uks", "o_ks",
    "km_incidence", "km_greenwood_var", "c0_tilde", "c1",
]


def report_to_csv(report: CalibrationReport) -> str:
    """One row per method at 4 decimals; cohort scalars repeat per row."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_REPORT_CSV_HEADER)
    for name, est in report.estimates.items():
        writer.writerow(
            [
                name,
                _f4(est.point), _f4(est.ci_low), _f4(est.ci_high),
                _f4(est.numerator), _f4(est.denominator),
                _f4(report.t0), report.n, report.n_ks, report.n_uks, report.o_ks,
                _f4(report.km_incidence), _f4(report.km_greenwood_var),
                _f4(report.c0_tilde), _f4(report.c1),
            ]
        )
    return buf.getvalue()


def report_from_csv(text: str) -> CalibrationReport:
    reader = csv.DictReader(io.StringIO(text))
    estimates = {}
    scalars = None
    for row in reader:
        name = row["method"]
        estimates[name] = EORatioEstimate(
            method=name,
            point=float(row["point"]),
            ci_low=float(row["ci_low"]),
            ci_high=float(row["ci_high"]),
            numerator=float(row["numerator"]),
            denominator=float(row["denominator"]),
        )
        scalars = row
    if scalars is None:
        raise ValidationError("report CSV has no method rows")
    gw = scalars["km_greenwood_var"]
    return CalibrationReport(
        t0=float(scalars["t0"]),
        n=int(scalars["n"]),
        n_ks=int(scalars["n_ks"]),
        n_uks=int(scalars["n_uks"]),
        o_ks=int(scalars["o_ks"]),
        km_incidence=float(scalars["km_incidence"]),
        km_greenwood_var=float("nan") if gw == "" else float(gw),
        km_degenerate=gw == "",
        c0_tilde=_opt_float(scalars["c0_tilde"]),
        c1=_opt_float(scalars["c1"]),
        estimates=estimates,
    )


def grouped_report_to_json(report: GroupedCalibrationReport) -> str:
    payload = {
        "t0": report.t0,
        "n": report.n,
        "groups": [
            {
                "group": g.group,
                "risk_low": g.risk_low,
                "risk_high": g.risk_high,
                "n": g.n,
                "n_ks": g.n_ks,
                "n_uks": g.n_uks,
                "o_ks": g.o_ks,
                "estimates": None
                if g.estimates is None
                else {name: _estimate_to_dict(e) for name, e in g.estimates.items()},
                "note": g.note,
            }
            for g in report.groups
        ],
    }
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


def grouped_report_from_json(text: str) -> GroupedCalibrationReport:
    data = json.loads(text)
    groups = tuple(
        GroupCalibration(
            group=g["group"],
            risk_low=g["risk_low"],
            risk_high=g["risk_high"],
            n=g["n"],
            n_ks=g["n_ks"],
            n_uks=g["n_uks"],
            o_ks=g["o_ks"],
            estimates=None
            if g["estimates"] is None
            else {
                name: _estimate_from_dict(name, est)
                for name, est in g["estimates"].items()
            },
            note=g["note"],
        )
        for g in data["groups"]
    )
    return GroupedCalibrationReport(t0=data["t0"], n=data["n"], groups=groups)


_GROUPED_CSV_HEADER = [
    "group", "risk_low", "risk_high", "n", "n_ks", "n_uks", "o_ks",
    "m0_point", "m0_ci_low", "m0_ci_high",
    "m3_point", "m3_ci_low", "m3_ci_high",
    "t0", "cohort_n", "note",
]


def grouped_report_to_csv(report: GroupedCalibrationReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_GROUPED_CSV_HEADER)
    for g in report.groups:
        cells = [g.group, _f4(g.risk_low), _f4(g.risk_high), g.n, g.n_ks, g.n_uks, g.o_ks]
        for name in ("m0", "m3"):
            est = (g.estimates or {}).get(name)
            if est is None:
                cells += ["", "", ""]
            else:
                cells += [_f4(est.point), _f4(est.ci_low), _f4(est.ci_high)]
        cells += [_f4(report.t0), report.n, g.note or ""]
        writer.writerow(cells)
    return buf.getvalue()


def grouped_report_from_csv(text: str) -> GroupedCalibrationReport:
    reader = csv.DictReader(io.StringIO(text))
    groups = []
    t0 = None
    n = None
    for row in reader:
        t0 = float(row["t0"])
        n = int(row["cohort_n"])
        estimates = {}
        for name in ("m0", "m3"):
            if row[f"{name}_point"] != "":
                point = float(row[f"{name}_point"])
                lo = float(row[f"{name}_ci_low"])
                hi = float(row[f"{name}_ci_high"])
                estimates[name] = EORatioEstimate(name, point, lo, hi, float("nan"), float("nan"))
        groups.append(
            GroupCalibration(
                group=int(row["group"]),
                risk_low=float(row["risk_low"]),
                risk_high=float(row["risk_high"]),
                n=int(row["n"]),
                n_ks=int(row["n_ks"]),
                n_uks=int(row["n_uks"]),
                o_ks=int(row["o_ks"]),
                estimates=estimates or None,
                note=row["note"] or None,
            )
        )
    if t0 is None:
        raise ValidationError("grouped report CSV has no rows")
    return GroupedCalibrationReport(t0=t0, n=n, groups=tuple(groups))


def parse_grid_file(path) -> List[Tuple[float, float, int, float, int, int]]:
    """Parse a design grid: lambda, target_rate, n, t0, replicates, seed.

    One design per line, comma-separated; an optional header line is
    skipped.  Malformed lines are all reported with their row numbers.
    """
    rows: List[Tuple[float, float, int, float, int, int]] = []
    violations: List[Tuple[int, str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.strip() for line in fh]
    start = 0
    if lines and lines[0]:
        first = lines[0].split(",")[0].strip()
        try:
            float(first)
        except ValueError:
            start = 1
    for rownum, line in enumerate(lines[start:], start=1):
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 6:
            violations.append((rownum, f"expected 6 fields, got {len(parts)}"))
            continue
        try:
            rows.append(
                (
                    float(parts[0]),
                    float(parts[1]),
                    int(parts[2]),
                    float(parts[3]),
                    int(parts[4]),
                    int(parts[5]),
                )
            )
        except ValueError as exc:
            violations.append((rownum, str(exc)))
    if violations:
        raise CohortFileError(path, violations)
    if not rows:
        raise ValidationError(f"{path}: no designs")
    return rows


_SUMMARY_CSV_HEADER = [
    "lam", "target_uks_rate", "omega", "n", "t0", "replicates", "seed",
    "observed_cases", "uks_rate", "true_event_rate",
    "m0_mean", "m0_width", "m0_coverage",
    "m1_mean", "m1_width", "m1_coverage",
    "m2_mean", "m2_width", "m2_coverage",
    "m3_mean", "m3_width", "m3_coverage",
    "c0_tilde", "c1", "excluded", "valid",
]


def _f6(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.6f}"


def summaries_to_csv(summaries: Sequence[SimulationSummary]) -> str:
    """One row per design with the per-method and correction-term means."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_SUMMARY_CSV_HEADER)
    for s in summaries:
        d = s.design
        row = [
            _f6(d.lam), _f6(s.target_uks_rate), _f6(d.omega),
            d.n, _f6(d.t0), d.replicates, d.seed,
            _f6(s.mean_observed_cases), _f6(s.mean_uks_rate), _f6(s.mean_true_event_rate),
        ]
        for name in ("m0", "m1", "m2", "m3"):
            m = s.methods[name]
            row += [_f6(m.mean_point), _f6(m.mean_width), _f6(m.coverage)]
        row += [_f6(s.mean_c0_tilde), _f6(s.mean_c1), s.excluded, int(s.valid)]
        writer.writerow(row)
    return buf.getvalue()
