"""End-to-end evaluations over confidence records.

Ground truths: error/success prediction labels a sample positive iff the
model predicted it correctly; in-/out-of-distribution detection labels
validation samples positive and shifted-split samples negative. Metric
results that are undefined for a record set (single-class) are reported as
explicit nulls with a reason, never as zeros or crashes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .extraction import UNK_ID
from .metrics import MetricUndefinedError, ScoredLabel, aupr, brier, roc_auc
from .uncertainty import ConfidenceRecord, EstimatorStateError

SWEEP_THRESHOLDS = np.linspace(0.0, 1.0, 21)  # [0, 1] in steps of 0.05


def record_is_correct(record: ConfidenceRecord) -> bool:
    """Exact-match correctness; UNK true labels can never be correct."""
    return record.predicted == record.true and record.true != UNK_ID


def _metric_block(items: list[ScoredLabel]) -> dict:
    out: dict = {"auc": None, "aupr": None, "brier": None, "note": None}
    notes = []
    try:
        out["auc"] = roc_auc(items)
    except MetricUndefinedError as exc:
        notes.append(f"auc: {exc}")
    try:
        out["aupr"] = aupr(items)
    except MetricUndefinedError as exc:
        notes.append(f"aupr: {exc}")
    try:
        out["brier"] = brier(items)
    except MetricUndefinedError as exc:
        notes.append(f"brier: {exc}")
    if notes:
        out["note"] = "; ".join(notes)
    return out


def error_success_eval(records: list[ConfidenceRecord]) -> dict:
    """AUC/AUPR/Brier for ranking correct (positive) over incorrect samples."""
    if not records:
        raise ValueError("no records to evaluate")
    items = [ScoredLabel(r.confidence, record_is_correct(r)) for r in records]
    return _metric_block(items)


def ood_eval(validation_records: list[ConfidenceRecord], shifted_records: list[ConfidenceRecord]) -> dict:
    """AUC/AUPR/Brier for ranking in-distribution (validation, positive)
    over shifted-split (negative) samples by confidence."""
    if not validation_records or not shifted_records:
        raise ValueError("ood_eval needs records on both sides")
    items = [ScoredLabel(r.confidence, True) for r in validation_records]
    items += [ScoredLabel(r.confidence, False) for r in shifted_records]
    return _metric_block(items)


def threshold_sweep(records: list[ConfidenceRecord]) -> list[dict]:
    """Per threshold in [0, 1] steps of 0.05: retained count and the
    error/success AUC over retained records (None when single-class)."""
    rows = []
    for threshold in SWEEP_THRESHOLDS:
        retained = [r for r in records if r.confidence >= threshold]
        auc = None
        if retained:
            items = [ScoredLabel(r.confidence, record_is_correct(r)) for r in retained]
            try:
                auc = roc_auc(items)
            except MetricUndefinedError:
                auc = None
        rows.append({"threshold": float(threshold), "count": len(retained), "auc": auc})
    return rows


def write_sweep_csv(path, rows: list[dict], config_hash: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        if config_hash:
            f.write(f"# config_hash={config_hash}\n")
        f.write("threshold,count,auc\n")
        for row in rows:
            auc = "" if row["auc"] is None else repr(row["auc"])
            f.write(f"{row['threshold']!r},{row['count']},{auc}\n")


# -- accuracy table -------------------------------------------------------


def drop_ratio(val_acc: float, test_acc: float) -> float:
    """Signed relative accuracy change in percent; negative = degradation."""
    if val_acc == 0:
        raise ValueError("validation accuracy is zero; drop ratio undefined")
    return (test_acc - val_acc) / val_acc * 100.0


def format_accuracy_drop(val_acc: float, test_acc: float) -> str:
    """Render like `29.14(-2.74%)` from (29.96, 29.14)."""
    return f"{test_acc:.2f}({drop_ratio(val_acc, test_acc):.2f}%)"


def accuracy_drop_report(accuracies: dict[str, float], validation_split: str = "validation") -> dict:
    """Rows of accuracy plus signed drop ratio against the validation split.

    A zero validation accuracy makes the ratio undefined; those rows carry
    a null ratio and a reason instead of crashing the report.
    """
    if validation_split not in accuracies:
        raise ValueError(f"missing {validation_split!r} accuracy")
    val_acc = accuracies[validation_split]
    rows: dict[str, dict] = {validation_split: {"accuracy": val_acc}}
    for split, acc in accuracies.items():
        if split == validation_split:
            continue
        if val_acc == 0:
            rows[split] = {
                "accuracy": acc,
                "drop_ratio": None,
                "formatted": f"{acc:.2f}(n/a)",
                "note": "validation accuracy is zero; drop ratio undefined",
            }
        else:
            rows[split] = {
                "accuracy": acc,
                "drop_ratio": drop_ratio(val_acc, acc),
                "formatted": format_accuracy_drop(val_acc, acc),
            }
    return rows


# -- runtime input filter ----------------------------------------------------


@dataclass
class FilterDecision:
    sample_id: str
    confidence: float
    predicted: int | None = None


def input_filter(records: list[ConfidenceRecord], threshold: float) -> tuple[list[FilterDecision], list[FilterDecision]]:
    """Split scored inputs into accepted (prediction emitted) and rejected."""
    accepted, rejected = [], []
    for r in records:
        if r.confidence >= threshold:
            accepted.append(FilterDecision(r.sample_id, r.confidence, r.predicted))
        else:
            rejected.append(FilterDecision(r.sample_id, r.confidence))
    return accepted, rejected


def filter_inputs(model, method: str, threshold: float, samples, split: str = "", **estimator_state):
    """Score an input stream with a fitted estimator and split it at the
    threshold; raises EstimatorStateError when the method's state is missing."""
    records = score_records(model, method, samples, split, **estimator_state)
    return input_filter(records, threshold)


def score_records(model, method: str, samples, split: str = "", *, temperature=None,
                  ensembles=None, probes=None, growth="linear", passes=30,
                  dropout_p=0.5, seed=0) -> list[ConfidenceRecord]:
    """Dispatch a fitted estimator; raises EstimatorStateError when the
    method's state (temperature, ensemble, probes) was not supplied."""
    from . import uncertainty as uq

    if method == "vanilla":
        return uq.score_vanilla(model, samples, split)
    if method == "temp_scale":
        if temperature is None:
            raise EstimatorStateError("temp_scale needs a fitted temperature")
        return uq.score_temp_scale(model, temperature, samples, split)
    if method == "mc_dropout":
        return uq.score_mc_dropout(model, samples, split, passes=passes, p=dropout_p, seed=seed)
    if method == "mmutant":
        if not ensembles:
            raise EstimatorStateError("mmutant needs a built mutant ensemble")
        ensemble = ensembles if not isinstance(ensembles, dict) else next(iter(ensembles.values()))
        return uq.score_mmutant(model, ensemble, samples, split)
    if method == "dissector":
        if probes is None:
            raise EstimatorStateError("dissector needs trained probes")
        return uq.score_dissector(model, probes, growth, samples, split)
    raise ValueError(f"unknown method {method!r}")


# -- report assembly -----------------------------------------------------------

VARIANT_METHODS = {"mmutant", "dissector"}
_METRIC_DIRECTION = {"auc": True, "aupr": True, "brier": False}  # higher-is-better?


def _best_per_metric(variant_blocks: dict[str, dict]) -> dict:
    best: dict = {}
    for metric, higher in _METRIC_DIRECTION.items():
        candidates = [(name, block[metric]) for name, block in variant_blocks.items() if block[metric] is not None]
        if not candidates:
            best[metric] = {"value": None, "variant": None}
            continue
        name, value = (max if higher else min)(candidates, key=lambda nv: nv[1])
        best[metric] = {"value": value, "variant": name}
    return best


def group_records(records: list[ConfidenceRecord]) -> dict[tuple[str, str, str], list[ConfidenceRecord]]:
    """Index records by (method, variant, split)."""
    grouped: dict[tuple[str, str, str], list[ConfidenceRecord]] = {}
    for r in records:
        grouped.setdefault((r.method, r.variant, r.split), []).append(r)
    return grouped


def build_report(
    task: str,
    shift: str,
    records: list[ConfidenceRecord],
    accuracies: dict[str, float],
    validation_split: str = "validation",
    config_hash: str | None = None,
) -> dict:
    """Assemble the full report for one (task, shift): accuracy rows,
    error/success per split, and in-/OOD detection per (validation, test)."""
    grouped = group_records(records)
    methods = sorted({m for m, _, _ in grouped})
    splits = sorted({s for _, _, s in grouped})
    test_splits = [s for s in splits if s != validation_split]

    error_success: dict[str, dict] = {}
    for split in splits:
        per_method: dict[str, dict] = {}
        for method in methods:
            variants = {v: recs for (m, v, s), recs in grouped.items() if m == method and s == split}
            if not variants:
                continue
            if method in VARIANT_METHODS:
                blocks = {v: error_success_eval(recs) for v, recs in sorted(variants.items())}
                per_method[method] = {"variants": blocks, "best": _best_per_metric(blocks)}
            else:
                per_method[method] = error_success_eval(variants[""])
        error_success[split] = per_method

    ood: dict[str, dict] = {}
    for test_split in test_splits:
        per_method = {}
        for method in methods:
            variants = {
                v: (grouped.get((method, v, validation_split)), grouped.get((method, v, test_split)))
                for (m, v, s) in grouped
                if m == method and s == test_split
            }
            variants = {v: pair for v, pair in variants.items() if pair[0] and pair[1]}
            if not variants:
                continue
            if method in VARIANT_METHODS:
                blocks = {v: ood_eval(val, test) for v, (val, test) in sorted(variants.items())}
                per_method[method] = {"variants": blocks, "best": _best_per_metric(blocks)}
            else:
                val, test = variants[""]
                per_method[method] = ood_eval(val, test)
        ood[f"{validation_split}|{test_split}"] = per_method

    return {
        "task": task,
        "shift": shift,
        "config_hash": config_hash,
        "accuracy": accuracy_drop_report(accuracies, validation_split),
        "error_success": error_success,
        "ood": ood,
    }


def flatten_report(report: dict) -> list[dict]:
    """Flat rows (task, shift, eval, split, method, variant, auc, aupr, brier, note)."""
    rows = []

    def emit(eval_kind, split, method, variant, block):
        rows.append(
            {
                "task": report["task"],
                "shift": report["shift"],
                "eval": eval_kind,
                "split": split,
                "method": method,
                "variant": variant,
                "auc": block["auc"],
                "aupr": block["aupr"],
                "brier": block["brier"],
                "note": block["note"],
            }
        )

    for eval_kind, section in (("error_success", report["error_success"]), ("ood", report["ood"])):
        for split, per_method in section.items():
            for method, block in per_method.items():
                if "variants" in block:
                    for variant, sub in block["variants"].items():
                        emit(eval_kind, split, method, variant, sub)
                    for metric, chosen in block["best"].items():
                        rows.append(
                            {
                                "task": report["task"],
                                "shift": report["shift"],
                                "eval": eval_kind,
                                "split": split,
                                "method": method,
                                "variant": f"best[{metric}]={chosen['variant']}",
                                "auc": chosen["value"] if metric == "auc" else None,
                                "aupr": chosen["value"] if metric == "aupr" else None,
                                "brier": chosen["value"] if metric == "brier" else None,
                                "note": None,
                            }
                        )
                else:
                    emit(eval_kind, split, method, "", block)
    return rows


def write_report_json(path, report: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")


def write_report_csv(path, rows: list[dict], config_hash: str | None = None) -> None:
    columns = ("task", "shift", "eval", "split", "method", "variant", "auc", "aupr", "brier", "note")
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        if config_hash:
            f.write(f"# config_hash={config_hash}\n")
        f.write(",".join(columns) + "\n")
        for row in rows:
            cells = []
            for c in columns:
                value = row[c]
                if value is None:
                    cells.append("")
                elif isinstance(value, float):
                    cells.append(repr(value))
                else:
                    cells.append(str(value).replace(",", ";"))
            f.write(",".join(cells) + "\n")
