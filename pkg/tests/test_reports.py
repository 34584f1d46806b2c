import json
import math

import pytest

from plsga.evaluation import (ExternalReport, ExternalRun, SubsetVerification,
                              VerificationReport)
from plsga.fitness import Criterion, FitnessValue
from plsga.ga_engine import Chromosome, GenerationStats, VariableSubset
from plsga.io.reports import (ReportFormatError, TopSubsets, format_external_table,
                              read_external, read_history, read_top_subsets, read_verification,
                              read_verification_csv, write_external, write_history,
                              write_top_subsets, write_verification)


def _subset(genes):
    return VariableSubset.from_genes(genes, (1, 4))


def test_history(tmp_path):
    history = [GenerationStats(1, 0.1 + 0.2, 0.25, _subset([0, 1])),
               GenerationStats(2, 1 / 3, 0.2, _subset([1]), escapes=2)]
    path = tmp_path / "history.csv"
    write_history(path, history)
    assert path.read_text().splitlines()[0] == "generation,mean_fitness,best_fitness,escapes"
    rows = read_history(path)
    assert rows[0] == {"generation": 1, "mean_fitness": 0.1 + 0.2, "best_fitness": 0.25,
                       "escapes": 0}
    assert rows[1]["mean_fitness"] == 1 / 3
    assert rows[1]["escapes"] == 2


def test_top_subsets(tmp_path):
    rdcv = Criterion.SEP_RDCV
    subsets = [
        Chromosome(_subset([0, 2]), FitnessValue(rdcv, (0.5, 0.7), ((1, 2), (2, 2)))),
        Chromosome(_subset([1]), FitnessValue(rdcv, (0.9,), ((1, 1),)), ("escape",)),
        Chromosome(_subset([3]), FitnessValue.infeasible(rdcv, "ShapeError")),
    ]
    top = TopSubsets(Criterion.SEP_RDCV, ["a", "b", "c", "d"], subsets,
                     {"initial_mean": 2.0, "final_best": 0.6})
    path = tmp_path / "top_subsets.json"
    write_top_subsets(path, top)
    info = json.loads(path.read_text())
    assert info["subsets"][0]["names"] == ["a", "c"]
    assert info["subsets"][0]["mean"] == pytest.approx(0.6)
    assert info["subsets"][2]["mean"] is None
    again = read_top_subsets(path)
    assert again.genes == [(0, 2), (1,), (3,)]
    assert again.subsets == subsets
    assert again.summary == top.summary


def test_top_subsets_invalid(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"criterion": "rdcv"}')
    with pytest.raises(ReportFormatError):
        read_top_subsets(path)
    path.write_text("not json")
    with pytest.raises(ReportFormatError):
        read_top_subsets(path)


def test_verification(tmp_path):
    good = SubsetVerification(1, (0, 1),
                              FitnessValue(Criterion.SEP_RDCV, (0.5, 0.6), ((1, 1), (2, 1))),
                              FitnessValue(Criterion.SEP_RDCV, (0.5, 0.6), ((1, 1), (2, 1))),
                              ("a", "b"))
    infeasible = FitnessValue.infeasible(Criterion.SEP_RDCV, "InvalidComponentsError")
    bad = SubsetVerification(2, (3,), infeasible, infeasible, ("d",))
    report = VerificationReport([good, bad], 2, 4, 3)
    json_path, csv_path = tmp_path / "verify.json", tmp_path / "verify.csv"
    write_verification(json_path, csv_path, report)
    assert read_verification(json_path) == report
    frame = read_verification_csv(csv_path)
    assert len(frame) == 5
    assert list(frame["fitter"][:4]) == ["simpls", "simpls", "oracle", "oracle"]
    assert frame["flag"].iloc[4].startswith("infeasible:InvalidComponentsError")
    assert frame["sep"].iloc[1] == 0.6


def _external_report():
    runs = [ExternalRun(r, 18, 12, (0, 1, 2), 2, 0.5 + r, 0.8 + r, 0.7 + r, 1.1,
                        ("a", "b", "c")) for r in range(3)]
    return ExternalReport(runs, 0.6, Criterion.SEP_SRCV)


def test_external(tmp_path):
    report = _external_report()
    assert report.summary["rmsep_validation"]["median"] == pytest.approx(1.8)
    assert report.summary["rmsep_validation"]["mad"] == pytest.approx(1.0)
    json_path, txt_path = tmp_path / "external.json", tmp_path / "external.txt"
    write_external(json_path, txt_path, report)
    assert read_external(json_path).runs == report.runs
    table = txt_path.read_text(encoding="utf-8").splitlines()
    assert table[0] == "Criterion: srcv   repeats: 3   training ratio: 0.6"
    assert "RMSEP ext. validation" in table[1]
    assert "1.8 ± 1" in table[2]


def test_external_table_format():
    text = format_external_table(_external_report())
    assert text.endswith("\n")
    assert "18 ± 0" in text
    assert not math.isnan(_external_report().summary["n_variables"]["median"])
