"""
Writers and readers of the run artifacts.

JSON holds structured results (top subsets, manifest, verification and external reports)
and CSV the per-row streams (GA history, verification replicates). Floats are written
with 17 significant digits so every file reads back to the same values.
"""
from __future__ import absolute_import
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List

import pandas as pd

from ..evaluation import EXTERNAL_SUMMARY_FIELDS, ExternalReport, VerificationReport
from ..fitness import Criterion, FitnessValue
from ..ga_engine import Chromosome, GenerationStats, VariableSubset

HISTORY_COLUMNS = ("generation", "mean_fitness", "best_fitness", "escapes")
VERIFICATION_COLUMNS = ("rank", "replicate", "sep", "fitter", "flag")
FLOAT_FORMAT = "%.17g"


class ReportFormatError(Exception):
    """An artifact file does not have the expected content"""


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(obj, f, indent=2, ensure_ascii=False, allow_nan=False)
        f.write("\n")
    logging.debug("Written %s", path)


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ReportFormatError("{} is not valid JSON: {}".format(path, e)) from e


def _finite_or_none(value):
    return value if value is not None and math.isfinite(value) else None


def _none_to_inf(value):
    return math.inf if value is None else value


def _write_frame(frame, path):
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logging.debug("Written %s", path)


def _read_frame(path, columns):
    frame = pd.read_csv(path, float_precision="round_trip", keep_default_na=False,
                        na_values=[""])
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise ReportFormatError("{} lacks columns {}".format(path, missing))
    return frame


# --- GA history --------------------------------------------------------------

def write_history(path, history: List[GenerationStats]):
    frame = pd.DataFrame([(s.generation, s.mean_fitness, s.best_fitness, s.escapes)
                          for s in history], columns=HISTORY_COLUMNS)
    _write_frame(frame, path)


def read_history(path):
    """The history rows as a list of dicts keyed by HISTORY_COLUMNS"""
    frame = _read_frame(path, HISTORY_COLUMNS)
    return [{"generation": int(row.generation),
             "mean_fitness": float(row.mean_fitness),
             "best_fitness": float(row.best_fitness),
             "escapes": int(row.escapes)}
            for row in frame.itertuples(index=False)]


# --- Top subsets -------------------------------------------------------------

@dataclass
class TopSubsets:
    criterion: Criterion
    variables: List[str]
    subsets: List[Chromosome]
    summary: Dict[str, float] = field(default_factory=dict)

    @property
    def genes(self):
        return [c.genes for c in self.subsets]


def write_top_subsets(path, top: TopSubsets):
    subsets = []
    for rank, chromosome in enumerate(top.subsets, start=1):
        fitness = chromosome.fitness.as_dict()
        subsets.append({
            "rank": rank,
            "genes": list(chromosome.genes),
            "names": [top.variables[g] for g in chromosome.genes],
            "bounds": list(chromosome.subset.bounds),
            "mean": fitness["mean"],
            "sd": fitness["sd"],
            "replicates": fitness["replicates"],
            "a_opt": fitness["a_opt"],
            "feasible": fitness["feasible"],
            "flags": fitness["flags"],
            "selection_flags": list(chromosome.flags),
        })
    _write_json(path, {
        "criterion": top.criterion.value,
        "variables": list(top.variables),
        "subsets": subsets,
        "summary": {k: _finite_or_none(v) for k, v in top.summary.items()},
    })


def read_top_subsets(path) -> TopSubsets:
    info = _read_json(path)
    try:
        criterion = Criterion.parse(info["criterion"])
        variables = list(info["variables"])
        subsets = []
        for entry in sorted(info["subsets"], key=lambda e: e["rank"]):
            fitness = FitnessValue(criterion, tuple(entry["replicates"]),
                                   tuple(tuple(a) for a in entry.get("a_opt", ())),
                                   entry.get("feasible", True), tuple(entry.get("flags", ())))
            bounds = tuple(entry.get("bounds") or (len(entry["genes"]),) * 2)
            subsets.append(Chromosome(VariableSubset(tuple(entry["genes"]), bounds), fitness,
                                      tuple(entry.get("selection_flags", ()))))
        summary = {k: _none_to_inf(v) for k, v in info.get("summary", {}).items()}
    except (KeyError, TypeError, ValueError) as e:
        raise ReportFormatError("Invalid subsets file {}: {}".format(path, e)) from e
    return TopSubsets(criterion, variables, subsets, summary)


# --- Manifest ----------------------------------------------------------------

def write_manifest(path, manifest):
    _write_json(path, manifest)


def read_manifest(path):
    return _read_json(path)


# --- Verification ------------------------------------------------------------

def write_verification(json_path, csv_path, report: VerificationReport):
    _write_json(json_path, _json_safe(report.as_dict()))
    rows = []
    for row in report.rows:
        if not row.feasible:
            reasons = row.simpls.flags + row.oracle.flags
            rows.append((row.rank, None, None, None, "infeasible:" + "|".join(reasons)))
            continue
        for fitter, value in (("simpls", row.simpls), ("oracle", row.oracle)):
            rows.extend((row.rank, r, sep, fitter, "")
                        for r, sep in enumerate(value.replicates, start=1))
    frame = pd.DataFrame(rows, columns=VERIFICATION_COLUMNS)
    frame["replicate"] = frame["replicate"].astype("Int64")
    _write_frame(frame, csv_path)


def read_verification(json_path) -> VerificationReport:
    try:
        return VerificationReport.from_dict(_read_json(json_path))
    except (KeyError, TypeError, ValueError) as e:
        raise ReportFormatError("Invalid verification file {}: {}".format(json_path, e)) from e


def read_verification_csv(csv_path):
    return _read_frame(csv_path, VERIFICATION_COLUMNS)


# --- External validation -----------------------------------------------------

EXTERNAL_TABLE_HEADERS = {
    "n_training": "No. obj. training",
    "n_validation": "No. obj. validation",
    "n_variables": "No. var.",
    "n_components": "No. comp.",
    "rmsep_training": "RMSEP ext. training",
    "rmsep_validation": "RMSEP ext. validation",
    "rmsep_total": "RMSEP total",
}


def write_external(json_path, txt_path, report: ExternalReport):
    _write_json(json_path, _json_safe(report.as_dict()))
    with open(txt_path, "w", encoding="utf-8", newline="\n") as f:
        f.write(format_external_table(report))
    logging.debug("Written %s", txt_path)


def read_external(json_path) -> ExternalReport:
    try:
        return ExternalReport.from_dict(_read_json(json_path))
    except (KeyError, TypeError, ValueError) as e:
        raise ReportFormatError("Invalid external report {}: {}".format(json_path, e)) from e


def format_external_table(report: ExternalReport):
    """One line with median +- MAD of every column, over all repeats"""
    cells = []
    for name in EXTERNAL_SUMMARY_FIELDS:
        stats = report.summary[name]
        fmt = "{:.4g} ± {:.2g}" if name.startswith("rmsep") else "{:g} ± {:g}"
        cells.append(fmt.format(stats["median"], stats["mad"]))
    headers = [EXTERNAL_TABLE_HEADERS[name] for name in EXTERNAL_SUMMARY_FIELDS]
    widths = [max(len(h), len(c)) for h, c in zip(headers, cells)]
    lines = [
        "Criterion: {}   repeats: {}   training ratio: {:g}".format(
            report.criterion.value, len(report.runs), report.ratio),
        "  ".join(h.rjust(w) for h, w in zip(headers, widths)),
        "  ".join(c.rjust(w) for c, w in zip(cells, widths)),
    ]
    return "\n".join(lines) + "\n"


def _json_safe(obj):
    """Replaces non-finite floats by None, recursively"""
    if isinstance(obj, float):
        return _finite_or_none(obj)
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj
