"""Versioned JSON persistence for angle libraries and deterministic CSV output.

Libraries round-trip losslessly (save -> load -> save is byte-identical);
CSV files use '.' decimals, 12 significant digits, and a stable row order,
so identical configurations produce identical bytes.
"""

from __future__ import annotations

import json
from typing import Optional

from .classical import BenchmarkCurve
from .measurement import OutcomeLabel
from .protocol import (
    AngleLibrary,
    FidelityReport,
    LibraryEntry,
    Prior,
    SamplingGrid,
    Scenario,
    params_from_array,
)

SCHEMA_VERSION = 1


class LibraryFormatError(Exception):
    """Raised when a library file is malformed or from another schema."""


def format_float(value: float) -> str:
    return format(float(value), ".12g")


def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "scheme": scenario.scheme,
        "case": scenario.case,
        "n_a": scenario.n_a,
        "n_b": scenario.n_b,
        "n_c": scenario.n_c,
        "t_ab": scenario.t_ab,
        "t_ac": scenario.t_ac,
        "parameterization": scenario.parameterization,
        "prior": {"kind": scenario.prior.kind, "beta": scenario.prior.beta},
        "grid": {"n_theta": scenario.grid.n_theta},
        "obs_a": scenario.obs_a,
        "obs_c": scenario.obs_c,
        "prob_weighted_averaging": scenario.prob_weighted_averaging,
    }


def scenario_from_dict(data: dict) -> Scenario:
    try:
        return Scenario(
            scheme=data["scheme"],
            case=data["case"],
            n_a=data["n_a"],
            n_b=data["n_b"],
            n_c=data["n_c"],
            t_ab=data["t_ab"],
            t_ac=data["t_ac"],
            parameterization=data["parameterization"],
            prior=Prior(data["prior"]["kind"], data["prior"]["beta"]),
            grid=SamplingGrid(data["grid"]["n_theta"]),
            obs_a=data["obs_a"],
            obs_c=data["obs_c"],
            prob_weighted_averaging=data["prob_weighted_averaging"],
        )
    except (KeyError, TypeError, ValueError) as err:
        raise LibraryFormatError(f"invalid scenario snapshot: {err}") from err


def save_library(library: AngleLibrary, path) -> None:
    """Write a library as versioned, diffable JSON (no wall-clock metadata)."""
    payload = {
        "schema_version": SCHEMA_VERSION,
        "scenario": scenario_to_dict(library.scenario),
        "parameterization": library.parameterization,
        "grid_points": library.grid_points,
        "entries": [
            {
                "outcome": entry.label.to_string(),
                "parameterization": library.parameterization,
                "angles": [float(a) for a in entry.params.as_array()],
                "sample_count": entry.sample_count,
                "degenerate": entry.degenerate,
            }
            for entry in library.entries
        ],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def load_library(path) -> AngleLibrary:
    """Read and validate a saved library; any defect raises LibraryFormatError."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as err:
        raise LibraryFormatError(f"cannot read library file {path}: {err}") from err
    if not isinstance(payload, dict):
        raise LibraryFormatError("library file must hold a JSON object")
    version = payload.get("schema_version")
    if version != SCHEMA_VERSION:
        raise LibraryFormatError(
            f"schema version mismatch: file has {version!r}, expected {SCHEMA_VERSION}"
        )
    scenario = scenario_from_dict(payload.get("scenario", {}))
    parameterization = payload.get("parameterization")
    entries = []
    try:
        for item in payload["entries"]:
            if item["parameterization"] != parameterization:
                raise ValueError(
                    f"entry parameterization {item['parameterization']!r} differs "
                    f"from library tag {parameterization!r}"
                )
            entries.append(
                LibraryEntry(
                    label=OutcomeLabel.from_string(item["outcome"]),
                    params=params_from_array(parameterization, item["angles"]),
                    sample_count=int(item["sample_count"]),
                    degenerate=bool(item["degenerate"]),
                )
            )
        return AngleLibrary(
            parameterization=parameterization,
            entries=tuple(entries),
            scenario=scenario,
            grid_points=int(payload["grid_points"]),
            built_at=None,
        )
    except (KeyError, TypeError, ValueError) as err:
        raise LibraryFormatError(f"invalid library payload: {err}") from err


def _write_rows(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _report_rows(report: FidelityReport, optimized: Optional[dict]):
    ordered = sorted(
        report.pairs, key=lambda p: (p.point.theta, p.point.phi, p.label.sort_key)
    )
    for pair in ordered:
        row = [
            format_float(pair.point.theta),
            format_float(pair.point.phi),
            pair.label.to_string(),
            format_float(pair.probability),
        ]
        if optimized is not None:
            key = (pair.point.theta, pair.point.phi, pair.label)
            row.append(format_float(optimized[key]))
        row.append(format_float(pair.fidelity))
        yield row


def emit_csv(data, path, optimized: Optional[dict] = None) -> None:
    """Write a FidelityReport or BenchmarkCurve as headered CSV.

    For reports the rows are per (input, outcome) pairs ordered by
    (theta, phi, outcome); passing ``optimized`` (a map from
    (theta, phi, label) to the optimized fidelity) adds the
    fidelity_optimized column of the raw experiment format.
    """
    if isinstance(data, FidelityReport):
        header = ["theta", "phi", "outcome", "probability"]
        if optimized is not None:
            header.append("fidelity_optimized")
        header.append("fidelity_library")
        _write_rows(path, header, _report_rows(data, optimized))
    elif isinstance(data, BenchmarkCurve):
        rows = (
            [format_float(x), format_float(v)]
            for x, v in zip(data.abscissa, data.values)
        )
        _write_rows(path, [data.abscissa_name, "f_classical"], rows)
    else:
        raise TypeError(f"cannot emit CSV for {type(data).__name__}")


def optimized_fidelity_map(build) -> dict:
    """Join key -> optimized fidelity for merging raw results into the CSV."""
    return {
        (build.inputs[p.input_index].point.theta, build.inputs[p.input_index].point.phi, p.label): p.fidelity
        for p in build.pairs
    }


def write_summary_csv(path, rows) -> None:
    """One-line-per-run summary with a stable column order."""
    if not rows:
        raise ValueError("summary needs at least one row")
    header = list(rows[0].keys())
    body = []
    for row in rows:
        if list(row.keys()) != header:
            raise ValueError("summary rows must share one column set")
        body.append(
            [v if isinstance(v, str) else format_float(v) for v in row.values()]
        )
    _write_rows(path, header, body)
