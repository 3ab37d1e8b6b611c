"""Evaluation pipeline contracts: ground truths, sweeps, drop ratios, filtering."""

import pytest

from codeshift import evalpipe as ep
from codeshift.uncertainty import ConfidenceRecord


def rec(sample_id, confidence, predicted, true, method="vanilla", variant="", split="validation"):
    return ConfidenceRecord(
        sample_id=sample_id,
        method=method,
        variant=variant,
        raw_score=confidence,
        confidence=confidence,
        predicted=predicted,
        true=true,
        split=split,
    )


def test_error_success_oracle_confidences():
    records = [
        rec("a", 1.0, 5, 5),
        rec("b", 1.0, 6, 6),
        rec("c", 0.0, 5, 7),
        rec("d", 0.0, 2, 9),
    ]
    result = ep.error_success_eval(records)
    assert result["auc"] == 100.0
    assert result["brier"] == 0.0
    assert result["note"] is None


def test_error_success_constant_confidence_auc_50():
    records = [rec("a", 0.5, 5, 5), rec("b", 0.5, 5, 7)]
    assert ep.error_success_eval(records)["auc"] == 50.0


def test_error_success_single_class_diagnostic():
    records = [rec("a", 0.9, 5, 5), rec("b", 0.8, 6, 6)]
    result = ep.error_success_eval(records)
    assert result["auc"] is None
    assert "auc" in result["note"]
    assert result["aupr"] == 100.0  # all-positive is still defined
    assert result["brier"] is not None


def test_unk_true_label_is_never_correct():
    assert not ep.record_is_correct(rec("a", 0.9, 0, 0))
    assert ep.record_is_correct(rec("a", 0.9, 4, 4))


def test_ood_eval_directions():
    val = [rec(f"v{i}", 1.0, 2, 2) for i in range(4)]
    shifted = [rec(f"s{i}", 0.0, 2, 3, split="test1") for i in range(4)]
    result = ep.ood_eval(val, shifted)
    assert result["auc"] == 100.0
    assert result["brier"] == 0.0
    identical_val = [rec(f"v{i}", 0.7, 2, 2) for i in range(5)]
    identical_shift = [rec(f"s{i}", 0.7, 2, 2, split="test1") for i in range(5)]
    assert ep.ood_eval(identical_val, identical_shift)["auc"] == 50.0
    with pytest.raises(ValueError):
        ep.ood_eval(val, [])


def test_threshold_sweep_monotone_counts():
    records = [rec(f"r{i}", i / 10.0, 1 if i % 2 else 2, 1) for i in range(11)]
    rows = ep.threshold_sweep(records)
    assert rows[0]["threshold"] == 0.0
    assert rows[0]["count"] == len(records)
    counts = [r["count"] for r in rows]
    assert all(a >= b for a, b in zip(counts, counts[1:]))
    assert rows[-1]["count"] == sum(1 for r in records if r.confidence >= 1.0)


def test_threshold_sweep_matches_filter():
    records = [rec(f"r{i}", c, 1 if i % 3 else 2, 1) for i, c in enumerate([0.1, 0.3, 0.55, 0.8, 0.95, 1.0])]
    rows = ep.threshold_sweep(records)
    at = next(r for r in rows if abs(r["threshold"] - 0.5) < 1e-12)
    accepted, rejected = ep.input_filter(records, 0.5)
    assert at["count"] == len(accepted)
    assert len(accepted) + len(rejected) == len(records)
    # post-hoc AUC over the accepted set equals the sweep's value there
    accepted_ids = {d.sample_id for d in accepted}
    retained = [r for r in records if r.sample_id in accepted_ids]
    assert ep.error_success_eval(retained)["auc"] == at["auc"]


def test_filter_inputs_composes_scoring(monkeypatch):
    from codeshift import evalpipe

    sample_records = [rec("a", 0.9, 1, 1), rec("b", 0.2, 1, 2)]
    monkeypatch.setattr(evalpipe, "score_records", lambda *a, **k: sample_records)
    accepted, rejected = evalpipe.filter_inputs(None, "vanilla", 0.5, ["a", "b"])
    assert [d.sample_id for d in accepted] == ["a"]
    assert [d.sample_id for d in rejected] == ["b"]


def test_input_filter_extremes():
    records = [rec(f"r{i}", c, 1, 1) for i, c in enumerate([0.0, 0.4, 1.0])]
    accepted, rejected = ep.input_filter(records, 0.0)
    assert len(accepted) == 3 and not rejected
    accepted, rejected = ep.input_filter(records, 1.01)
    assert not accepted and len(rejected) == 3
    assert all(d.predicted is None for d in rejected)


def test_drop_ratio_and_formatting():
    assert ep.drop_ratio(50.0, 45.0) == -10.0
    assert ep.drop_ratio(50.0, 50.0) == 0.0
    assert ep.format_accuracy_drop(29.96, 29.14) == "29.14(-2.74%)"
    assert ep.format_accuracy_drop(50.0, 50.0) == "50.00(0.00%)"


def test_accuracy_drop_report_rows():
    rows = ep.accuracy_drop_report({"validation": 50.0, "test1": 45.0, "test2": 55.0})
    assert rows["validation"] == {"accuracy": 50.0}
    assert rows["test1"]["drop_ratio"] == -10.0
    assert rows["test1"]["formatted"] == "45.00(-10.00%)"
    assert rows["test2"]["drop_ratio"] == 10.0
    with pytest.raises(ValueError):
        ep.accuracy_drop_report({"test1": 10.0})
    degenerate = ep.accuracy_drop_report({"validation": 0.0, "test1": 5.0})
    assert degenerate["test1"]["drop_ratio"] is None
    assert "zero" in degenerate["test1"]["note"]


def make_records():
    records = []
    for split, base in (("validation", 0.9), ("test1", 0.4)):
        for method, variant in (
            ("vanilla", ""),
            ("mmutant", "GF"),
            ("mmutant", "WS"),
            ("dissector", "linear"),
            ("dissector", "exp"),
        ):
            for i in range(6):
                correct = i % 2 == 0
                conf = base - (0.0 if correct else 0.3) + i * 0.01
                records.append(
                    rec(f"{split}#{i}", round(conf, 3), 3 if correct else 4, 3, method, variant, split)
                )
    return records


def test_build_report_structure_and_flatten():
    records = make_records()
    report = ep.build_report(
        "cs", "project", records, {"validation": 80.0, "test1": 40.0}, config_hash="deadbeef"
    )
    assert report["accuracy"]["test1"]["formatted"] == "40.00(-50.00%)"
    vanilla_block = report["error_success"]["validation"]["vanilla"]
    assert vanilla_block["auc"] is not None
    mm = report["error_success"]["test1"]["mmutant"]
    assert set(mm["variants"]) == {"GF", "WS"}
    assert mm["best"]["auc"]["variant"] in {"GF", "WS"}
    ood = report["ood"]["validation|test1"]
    assert "vanilla" in ood and "dissector" in ood
    assert ood["dissector"]["best"]["brier"]["variant"] in {"linear", "exp"}

    rows = ep.flatten_report(report)
    assert any(r["eval"] == "ood" and r["method"] == "vanilla" for r in rows)
    assert any(r["variant"].startswith("best[auc]") for r in rows)


def test_report_roundtrip_files(tmp_path):
    records = make_records()
    report = ep.build_report("cc", "author", records, {"validation": 70.0, "test1": 60.0})
    json_path = tmp_path / "report.json"
    csv_path = tmp_path / "report.csv"
    ep.write_report_json(json_path, report)
    ep.write_report_csv(csv_path, ep.flatten_report(report), config_hash="cafe")
    assert json_path.read_text().startswith("{")
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "# config_hash=cafe"
    assert lines[1].startswith("task,shift,eval,split,method,variant")


def test_sweep_csv(tmp_path):
    records = [rec(f"r{i}", i / 5.0, 1 if i % 2 else 2, 1) for i in range(6)]
    rows = ep.threshold_sweep(records)
    path = tmp_path / "sweep.csv"
    ep.write_sweep_csv(path, rows, config_hash="beef")
    lines = path.read_text().splitlines()
    assert lines[0] == "# config_hash=beef"
    assert lines[1] == "threshold,count,auc"
    assert len(lines) == 2 + 21


def test_score_records_missing_state():
    from codeshift.uncertainty import EstimatorStateError

    with pytest.raises(EstimatorStateError):
        ep.score_records(None, "temp_scale", [], temperature=None)
    with pytest.raises(EstimatorStateError):
        ep.score_records(None, "mmutant", [], ensembles=None)
    with pytest.raises(EstimatorStateError):
        ep.score_records(None, "dissector", [], probes=None)
    with pytest.raises(ValueError):
        ep.score_records(None, "unknown", [])
