"""Plot specifications and CSV schema validation.

A spec is a JSON file:

    {
      "input_csv": "runs/bloch/bloch.csv",
      "figure_kind": "timeseries",
      "output": "figs/bloch.png",
      "labels": {"title": "...", "x": "...", "y": "..."},
      "columns": {"x": "j", "y": "p_mean", "group": "epsA_E"}
    }

``columns`` is optional: for the documented experiment layouts the roles
are inferred.  Validation is strict; a dataframe that does not carry the
required columns fails fast naming the first missing one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import pandas as pd

from .errors import MissingFile, SchemaMismatch

FIGURE_KINDS = ("loglog", "timeseries", "heatmap_grid", "scan")

# fixed column roles per figure kind; timeseries infers y/group from the
# known experiment layouts when not given explicitly
_FIXED_COLUMNS = {
    "loglog": {"x": "eps", "y": "delta", "group": ("level", "beta")},
    "heatmap_grid": {"x": "q", "y": "p", "value": "P", "group": ("epsA_E",)},
    "scan": {"x": "epsA_E", "y": "q_spread", "group": ("epsA_B", "j")},
}
_TIMESERIES_Y_CANDIDATES = ("p_mean", "q_spread", "q_front")
_TIMESERIES_GROUP_CANDIDATES = ("epsA_E", "epsA_B")


@dataclass
class PlotSpec:
    input_csv: Path
    figure_kind: str
    output: Path
    labels: dict = field(default_factory=dict)
    columns: dict = field(default_factory=dict)

    @classmethod
    def from_file(cls, path) -> "PlotSpec":
        path = Path(path)
        if not path.exists():
            raise MissingFile(f"spec file {path} does not exist")
        raw = json.loads(path.read_text())
        return cls.from_dict(raw, base=path.parent)

    @classmethod
    def from_dict(cls, raw: dict, base: Path | None = None) -> "PlotSpec":
        try:
            input_csv = Path(raw["input_csv"])
            figure_kind = raw["figure_kind"]
            output = Path(raw["output"])
        except KeyError as exc:
            raise SchemaMismatch(f"spec is missing the {exc.args[0]!r} field") from None
        if figure_kind not in FIGURE_KINDS:
            raise SchemaMismatch(
                f"unknown figure_kind {figure_kind!r}, expected one of {FIGURE_KINDS}"
            )
        if base is not None:
            if not input_csv.is_absolute():
                input_csv = base / input_csv
            if not output.is_absolute():
                output = base / output
        return cls(input_csv, figure_kind, output,
                   dict(raw.get("labels", {})), dict(raw.get("columns", {})))


def _require(frame: pd.DataFrame, column: str) -> None:
    if column not in frame.columns:
        raise SchemaMismatch(f"input CSV lacks required column {column!r}")


def load_table(spec: PlotSpec) -> tuple[pd.DataFrame, dict]:
    """Read and validate the CSV; returns (frame, resolved column roles)."""
    if not spec.input_csv.exists():
        raise MissingFile(f"input CSV {spec.input_csv} does not exist")
    try:
        frame = pd.read_csv(spec.input_csv)
    except pd.errors.EmptyDataError:
        raise SchemaMismatch(f"input CSV {spec.input_csv} is empty") from None
    if spec.figure_kind == "timeseries":
        roles = {
            "x": spec.columns.get("x", "j"),
            "y": spec.columns.get("y"),
            "group": spec.columns.get("group"),
        }
        if roles["y"] is None:
            roles["y"] = next((c for c in _TIMESERIES_Y_CANDIDATES
                               if c in frame.columns), None)
            if roles["y"] is None:
                raise SchemaMismatch(
                    f"input CSV lacks a value column (one of {_TIMESERIES_Y_CANDIDATES})"
                )
        if roles["group"] is None:
            present = [c for c in _TIMESERIES_GROUP_CANDIDATES if c in frame.columns]
            if not present:
                raise SchemaMismatch(
                    f"input CSV lacks a sweep column (one of {_TIMESERIES_GROUP_CANDIDATES})"
                )
            # prefer the column that actually sweeps
            varying = [c for c in present if frame[c].nunique() > 1]
            roles["group"] = (varying or present)[0]
        roles["group"] = (roles["group"],)
        for col in (roles["x"], roles["y"], *roles["group"]):
            _require(frame, col)
    else:
        fixed = _FIXED_COLUMNS[spec.figure_kind]
        roles = {k: v for k, v in fixed.items()}
        needed = [v for k, v in fixed.items() if k != "group"] + list(fixed["group"])
        for col in needed:
            _require(frame, col)
    if len(frame) == 0:
        raise SchemaMismatch(f"input CSV {spec.input_csv} has no data rows")
    return frame, roles
