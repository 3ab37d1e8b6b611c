"""CLI contracts: exit codes, artifact layout, config hashing, defaults."""

import json

import pytest

from codeshift.cli import main
from codeshift.config import DEFAULT_CONFIG, bucket_dir, config_hash, load_config


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Tiny corpus plus the pipeline artifacts for cs/project."""
    root = tmp_path_factory.mktemp("ws")
    config = {
        "train": {"embedding_dim": 16, "batch_size": 64, "epochs": 8},
        "uncertainty": {"mc_passes": 3, "mutant_count": 4, "probe_epochs": 3},
        "synth": {
            "timeline_files": 4,
            "project_files": 6,
            "author_files": {"alice": 5, "adam": 2, "mira": 2, "bogdan": 2},
        },
    }
    config_path = root / "config.json"
    config_path.write_text(json.dumps(config), encoding="utf-8")
    flags = ["--config", str(config_path)]
    assert main(["synth-corpus", *flags]) == 0
    assert main(["make-splits", "--shift", "project", *flags]) == 0
    assert main(["extract", "--task", "cs", "--shift", "project", *flags]) == 0
    assert main(["train", "--task", "cs", "--shift", "project", *flags]) == 0
    assert main(["score", "--task", "cs", "--shift", "project", *flags]) == 0
    assert main(["eval", "--task", "cs", "--shift", "project", *flags]) == 0
    return root, config_path, flags


def bucket_of(config_path):
    return bucket_dir(load_config(config_path))


def test_default_config_carries_published_values():
    train = DEFAULT_CONFIG["train"]
    assert train["learning_rate"] == 0.001
    assert train["embedding_dim"] == 100
    assert train["dropout"] == 0.5
    assert train["optimizer"] == "adam"
    assert train["batch_size"] == 512
    assert train["epochs"] == 300
    assert DEFAULT_CONFIG["uncertainty"]["mutation_degree"] == 0.05
    assert DEFAULT_CONFIG["uncertainty"]["mc_dropout_p"] == 0.5


def test_usage_errors_exit_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["train", "--task", "java"])
    assert exc.value.code == 1


def test_validation_errors_exit_2(tmp_path, capsys):
    config_path = tmp_path / "c.json"
    config_path.write_text("{}", encoding="utf-8")
    # eval before score
    assert main(["eval", "--task", "cs", "--shift", "project", "--config", str(config_path)]) == 2
    # train before extract
    assert main(["train", "--task", "cs", "--shift", "project", "--config", str(config_path)]) == 2
    # make-splits without a manifest
    assert main(["make-splits", "--shift", "timeline", "--config", str(config_path)]) == 2
    err = capsys.readouterr().err
    assert "manifest" in err


def test_bad_config_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"train": {"epochs": -1}}), encoding="utf-8")
    assert main(["synth-corpus", "--config", str(bad)]) == 2
    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps({"bogus_key": 1}), encoding="utf-8")
    assert main(["synth-corpus", "--config", str(unknown)]) == 2
    assert "config" in capsys.readouterr().err


def test_artifact_layout_and_hash_embedding(workspace):
    root, config_path, flags = workspace
    bucket = bucket_of(config_path)
    hash_hex = config_hash(load_config(config_path))
    assert (bucket / "splits" / "project.json").is_file()
    splits_payload = json.loads((bucket / "splits" / "project.json").read_text())
    assert splits_payload["config"]["config_hash"] == hash_hex
    for split in ("train", "validation", "test1"):
        assert (bucket / "contexts" / f"cs-project-{split}.txt").is_file()
    assert (bucket / "checkpoints" / "cs-project.ckpt").is_file()
    log = (bucket / "logs" / "cs-project-epochs.csv").read_text().splitlines()
    assert log[0] == f"# config_hash={hash_hex}"
    assert log[1] == "epoch,train_acc,val_acc,loss"
    report = json.loads((bucket / "reports" / "cs-project.json").read_text())
    assert report["config_hash"] == hash_hex


def test_score_writes_one_csv_per_method_variant_split(workspace):
    root, config_path, flags = workspace
    bucket = bucket_of(config_path)
    scores = sorted(p.name for p in (bucket / "scores").glob("cs-project-*.csv"))
    splits = ("test1", "validation")
    expected = []
    for split in splits:
        expected.append(f"cs-project-vanilla-{split}.csv")
        expected.append(f"cs-project-temp_scale-{split}.csv")
        expected.append(f"cs-project-mc_dropout-{split}.csv")
        expected.extend(f"cs-project-mmutant-{op}-{split}.csv" for op in ("GF", "WS", "NS", "NAI"))
        expected.extend(f"cs-project-dissector-{g}-{split}.csv" for g in ("linear", "log", "exp"))
    assert scores == sorted(expected)
    one = (bucket / "scores" / "cs-project-vanilla-validation.csv").read_text().splitlines()
    assert one[1] == "sample_id,method,variant,raw_score,confidence,predicted,true,split"
    assert one[2].split(",")[7] == "validation"


def test_sweep_filter_report_commands(workspace):
    root, config_path, flags = workspace
    bucket = bucket_of(config_path)
    assert main(["sweep", "--task", "cs", "--shift", "project", "--method", "temp", *flags]) == 0
    sweep = (bucket / "reports" / "sweeps" / "cs-project-temp_scale-test1.csv").read_text().splitlines()
    assert sweep[1] == "threshold,count,auc"
    counts = [int(line.split(",")[1]) for line in sweep[2:]]
    assert all(a >= b for a, b in zip(counts, counts[1:]))

    assert main(["filter", "--task", "cs", "--shift", "project", "--method", "dissector",
                 "--variant", "exp", "--threshold", "0.5", *flags]) == 0
    accepted = (bucket / "filtered" / "cs-project-dissector-exp-test1-accepted.csv").read_text().splitlines()
    rejected = (bucket / "filtered" / "cs-project-dissector-exp-test1-rejected.csv").read_text().splitlines()
    n_records = sum(1 for line in (bucket / "scores" / "cs-project-dissector-exp-test1.csv").read_text().splitlines()[2:] if line)
    assert (len(accepted) - 2) + (len(rejected) - 2) == n_records

    assert main(["report", *flags]) == 0
    merged = json.loads((bucket / "reports" / "all.json").read_text())
    assert len(merged["reports"]) == 1

    # filtering on a variant the method does not have is a validation error
    assert main(["filter", "--task", "cs", "--shift", "project", "--method", "vanilla",
                 "--variant", "GF", "--threshold", "0.5", *flags]) == 2


def test_seed_override_changes_bucket(workspace):
    root, config_path, flags = workspace
    base = load_config(config_path)
    seeded = load_config(config_path, {"seed": 9})
    assert config_hash(base) != config_hash(seeded)
    assert bucket_dir(base) != bucket_dir(seeded)


def test_mc_dropout_scores_differ_from_vanilla(workspace):
    # dropout is active at score time for CS, so confidences must not all
    # collapse onto the vanilla ones
    root, config_path, flags = workspace
    bucket = bucket_of(config_path)
    def confs(name):
        lines = (bucket / "scores" / name).read_text().splitlines()[2:]
        return [float(l.split(",")[4]) for l in lines if l]
    vanilla = confs("cs-project-vanilla-test1.csv")
    mc = confs("cs-project-mc_dropout-test1.csv")
    assert vanilla != mc
