"""The full three-shift study on a generated corpus, end to end.

Drives the same CLI the operator would use: synthesize a two-style corpus,
split it by project shift, extract both tasks, train, score all five
estimators, and assemble the report. Scaled down so the whole run takes
well under a minute; drop `--seed`/size overrides for the full ~300-file
study.
"""

import json
import tempfile
from pathlib import Path

from codeshift.cli import main
from codeshift.config import bucket_dir, load_config

root = Path(tempfile.mkdtemp(prefix="codeshift-study-"))
config_path = root / "config.json"
config_path.write_text(json.dumps({
    "corpus": {"val_fraction": 0.2},
    "train": {"embedding_dim": 32, "batch_size": 128, "epochs": 40},
    "uncertainty": {"mc_passes": 6, "mutant_count": 8, "probe_epochs": 6},
    "extraction": {"max_contexts": 100},
    "synth": {"timeline_files": 8, "project_files": 20,
              "author_files": {"alice": 10, "adam": 4, "mira": 4, "bogdan": 6}},
    "seed": 11,
}))

flags = ["--config", str(config_path)]
steps = [
    ["synth-corpus"],
    ["make-splits", "--shift", "project"],
    ["extract", "--task", "cs", "--shift", "project"],
    ["extract", "--task", "cc", "--shift", "project"],
    ["train", "--task", "cs", "--shift", "project"],
    ["train", "--task", "cc", "--shift", "project"],
    ["score", "--task", "cs", "--shift", "project"],
    ["score", "--task", "cc", "--shift", "project"],
    ["eval", "--task", "cs", "--shift", "project"],
    ["eval", "--task", "cc", "--shift", "project"],
    ["sweep", "--task", "cs", "--shift", "project", "--method", "vanilla"],
    ["filter", "--task", "cs", "--shift", "project", "--method", "vanilla", "--threshold", "0.6"],
    ["report"],
]
for step in steps:
    code = main(step + flags)
    assert code == 0, f"{step} exited {code}"

bucket = bucket_dir(load_config(config_path))
report = json.loads((bucket / "reports" / "cs-project.json").read_text())
print("\n== accuracy under project shift (cs) ==")
for split, row in sorted(report["accuracy"].items()):
    print(f"  {split:<11} {row.get('formatted', row['accuracy'])}")

print("\n== in-/OOD detection AUC, validation vs test1 (cs) ==")
for method, block in sorted(report["ood"]["validation|test1"].items()):
    auc = block["best"]["auc"]["value"] if "variants" in block else block["auc"]
    shown = "undefined" if auc is None else f"{auc:.1f}"
    print(f"  {method:<11} {shown}")

print(f"\nartifacts under {bucket}")
