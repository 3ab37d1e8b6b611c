"""Command-line surface tying the pipeline together.

Subcommands: synth-corpus, make-splits, extract, train, score, eval, sweep,
filter, report. Artifacts land under `work_dir/<config-hash>/` in splits/,
contexts/, checkpoints/, logs/, scores/, reports/, filtered/; every artifact
embeds the effective config hash, so reruns with an identical config are
byte-identical and different configs never collide.

Exit codes: 1 usage, 2 validation (missing/invalid inputs or artifacts),
3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import zlib
from pathlib import Path

from . import corpus, evalpipe, synth, tasks
from . import uncertainty as uq
from .config import (
    ConfigError,
    bucket_dir,
    config_hash,
    corpus_dir,
    echo_config,
    load_config,
    manifest_path,
)
from .extraction import (
    LexicalError,
    ParseError,
    Vocabulary,
    extract_cbow_samples,
    extract_method_samples,
    parse_java_lite,
    read_cc_contexts,
    read_cs_contexts,
    tokenize_java,
    write_cc_contexts,
    write_cs_contexts,
)

TASKS = ("cs", "cc")
SHIFTS = ("timeline", "project", "author")
CLI_METHODS = {
    "vanilla": "vanilla",
    "temp": "temp_scale",
    "mcdropout": "mc_dropout",
    "mmutant": "mmutant",
    "dissector": "dissector",
}
METHOD_VARIANTS = {
    "mmutant": uq.MUTATION_OPERATORS,
    "dissector": uq.GROWTH_TYPES,
}


class ValidationFailure(Exception):
    """Anything that should exit with code 2."""


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="codeshift", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, **flags):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="path to a JSON config file")
        p.add_argument("--seed", type=int, help="override the config seed")
        if flags.get("task"):
            p.add_argument("--task", choices=TASKS, required=True)
        if flags.get("shift"):
            p.add_argument("--shift", choices=SHIFTS, required=True)
        if flags.get("method"):
            p.add_argument("--method", choices=list(CLI_METHODS) + ["all"], default="all")
        if flags.get("variant"):
            p.add_argument("--variant", help="mutation operator or probe growth variant")
        if flags.get("threshold"):
            p.add_argument("--threshold", type=float, required=flags["threshold"] == "required")
        if flags.get("split"):
            p.add_argument("--split", help="restrict to one split (default: all scored splits)")
        return p

    add("synth-corpus", "generate the hermetic two-style corpus and its manifests")
    add("make-splits", "assign train/validation/test splits from a shift manifest", shift=True)
    add("extract", "tokenize/parse files and write context files per split", task=True, shift=True)
    add("train", "train a task model on extracted contexts", task=True, shift=True)
    add("score", "score splits with uncertainty estimators", task=True, shift=True, method=True)
    add("eval", "assemble error/success and in-/OOD reports from scores", task=True, shift=True)
    add("sweep", "confidence-threshold sweep over scored records",
        task=True, shift=True, method=True, variant=True, split=True)
    add("filter", "split inputs into accepted/rejected at a confidence threshold",
        task=True, shift=True, method=True, variant=True, threshold="required", split=True)
    add("report", "merge per-(task,shift) reports into one document")
    return parser


# -- artifact paths -----------------------------------------------------------


def _splits_path(bucket: Path, shift: str) -> Path:
    return bucket / "splits" / f"{shift}.json"


def _contexts_path(bucket: Path, task: str, shift: str, split: str) -> Path:
    return bucket / "contexts" / f"{task}-{shift}-{split}.txt"


def _vocabs_path(bucket: Path, task: str, shift: str) -> Path:
    return bucket / "contexts" / f"{task}-{shift}-vocabs.json"


def _checkpoint_path(bucket: Path, task: str, shift: str) -> Path:
    return bucket / "checkpoints" / f"{task}-{shift}.ckpt"


def _scores_path(bucket: Path, task: str, shift: str, method: str, variant: str, split: str) -> Path:
    variant_part = f"-{variant}" if variant else ""
    return bucket / "scores" / f"{task}-{shift}-{method}{variant_part}-{split}.csv"


def _require(path: Path, hint: str) -> Path:
    if not path.exists():
        raise ValidationFailure(f"missing artifact {path}; run `{hint}` first")
    return path


# -- subcommands ----------------------------------------------------------------


def cmd_synth_corpus(config: dict, args) -> int:
    target = corpus_dir(config)
    params = config["synth"]
    summary = synth.generate_corpus(
        target,
        seed=config["seed"],
        timeline_files=params["timeline_files"],
        project_files=params["project_files"],
        author_files=params["author_files"],
    )
    print(f"wrote {summary['files']} files under {target}")
    for shift, path in summary["manifests"].items():
        print(f"  manifest[{shift}] = {path}")
    return 0


def cmd_make_splits(config: dict, args) -> int:
    source = manifest_path(config, args.shift)
    if not source.is_file():
        raise ValidationFailure(f"manifest not found: {source}; run `synth-corpus` or point paths.manifests at one")
    try:
        manifest = corpus.load_manifest(source)
    except corpus.ManifestError as exc:
        raise ValidationFailure(str(exc)) from exc
    if manifest.shift_kind != args.shift:
        raise ValidationFailure(f"manifest {source} has shift_kind {manifest.shift_kind!r}, expected {args.shift!r}")
    assignment = corpus.assign_splits(manifest, val_fraction=config["corpus"]["val_fraction"])
    bucket = bucket_dir(config)
    out = _splits_path(bucket, args.shift)
    out.parent.mkdir(parents=True, exist_ok=True)
    payload = {"config": echo_config(config), "shift": args.shift, "assignment": assignment.to_json()}
    out.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    sizes = {name: len(files) for name, files in assignment.splits.items()}
    print(f"splits[{args.shift}] -> {out} {sizes}")
    return 0


def _load_assignment(bucket: Path, shift: str) -> corpus.SplitAssignment:
    path = _require(_splits_path(bucket, shift), f"make-splits --shift {shift}")
    payload = json.loads(path.read_text(encoding="utf-8"))
    return corpus.SplitAssignment.from_json(payload["assignment"])


def cmd_extract(config: dict, args) -> int:
    bucket = bucket_dir(config)
    assignment = _load_assignment(bucket, args.shift)
    ext = config["extraction"]
    out_dir = bucket / "contexts"
    out_dir.mkdir(parents=True, exist_ok=True)
    train_samples = None
    recoveries = 0
    for split in assignment.splits:
        samples = []
        for rel, text in corpus.iterate_samples(assignment, split, seed=config["seed"]):
            try:
                tokens = tokenize_java(text)
            except LexicalError as exc:
                raise ValidationFailure(f"{rel}: {exc}") from exc
            if args.task == "cs":
                diagnostics: list[str] = []
                try:
                    tree = parse_java_lite(tokens, diagnostics)
                except ParseError as exc:
                    raise ValidationFailure(f"{rel}: {exc}") from exc
                recoveries += len(diagnostics)
                samples.extend(
                    extract_method_samples(
                        tree,
                        max_contexts=ext["max_contexts"],
                        max_path_len=ext["max_path_len"],
                        seed=config["seed"],
                        origin=rel,
                    )
                )
            else:
                samples.extend(extract_cbow_samples(tokens, window=ext["window"]))
        if not samples:
            raise ValidationFailure(f"split {split!r} produced no {args.task} samples")
        writer = write_cs_contexts if args.task == "cs" else write_cc_contexts
        writer(_contexts_path(bucket, args.task, args.shift, split), samples)
        if split == "train":
            train_samples = samples
        print(f"extract[{args.task}/{args.shift}/{split}] {len(samples)} samples")
    if train_samples is None:
        raise ValidationFailure("assignment has no 'train' split")
    if args.task == "cs":
        from .extraction import build_cs_vocabs

        terminals, paths, labels = build_cs_vocabs(train_samples, min_count=config["corpus"]["min_count"])
        vocabs = {"terminals": terminals.tokens, "paths": paths.tokens, "labels": labels.tokens}
    else:
        from .extraction import build_cc_vocab

        vocabs = {"tokens": build_cc_vocab(train_samples, min_count=config["corpus"]["min_count"]).tokens}
    payload = {"config": echo_config(config), "vocabs": vocabs}
    _vocabs_path(bucket, args.task, args.shift).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    if recoveries:
        print(f"note: parser recovered {recoveries} unrecognized statements")
    return 0


def _load_vocabs(bucket: Path, task: str, shift: str) -> dict[str, Vocabulary]:
    path = _require(_vocabs_path(bucket, task, shift), f"extract --task {task} --shift {shift}")
    payload = json.loads(path.read_text(encoding="utf-8"))
    return {name: Vocabulary.from_tokens(tokens) for name, tokens in payload["vocabs"].items()}


def _load_encoded(bucket: Path, config: dict, task: str, shift: str, split: str, vocabs: dict):
    path = _require(
        _contexts_path(bucket, task, shift, split), f"extract --task {task} --shift {shift}"
    )
    if task == "cs":
        raw = read_cs_contexts(path)
        return tasks.encode_method_samples(
            raw, vocabs["terminals"], vocabs["paths"], vocabs["labels"], id_prefix=split
        )
    raw = read_cc_contexts(path)
    return tasks.encode_cbow_samples(raw, vocabs["tokens"], id_prefix=split)


def _split_names(bucket: Path, task: str, shift: str) -> list[str]:
    prefix = f"{task}-{shift}-"
    names = [
        p.stem[len(prefix):]
        for p in sorted((bucket / "contexts").glob(f"{prefix}*.txt"))
    ]
    return [n for n in names if n]


def cmd_train(config: dict, args) -> int:
    bucket = bucket_dir(config)
    vocabs = _load_vocabs(bucket, args.task, args.shift)
    train_enc = _load_encoded(bucket, config, args.task, args.shift, "train", vocabs)
    val_enc = _load_encoded(bucket, config, args.task, args.shift, "validation", vocabs)
    t = config["train"]
    train_config = tasks.TrainConfig(
        learning_rate=t["learning_rate"],
        embedding_dim=t["embedding_dim"],
        dropout=t["dropout"],
        batch_size=t["batch_size"],
        epochs=t["epochs"],
        seed=config["seed"],
    )
    if args.task == "cs":
        result = tasks.train_cs(
            train_enc, vocabs["terminals"], vocabs["paths"], vocabs["labels"], train_config, val_enc
        )
    else:
        result = tasks.train_cc(train_enc, vocabs["tokens"], train_config, val_enc)
    ckpt = _checkpoint_path(bucket, args.task, args.shift)
    ckpt.parent.mkdir(parents=True, exist_ok=True)
    echo = echo_config(config)
    ckpt.write_bytes(tasks.save_checkpoint(result.model, train_config={**train_config.to_dict(), "config_hash": echo["config_hash"]}))
    log_dir = bucket / "logs"
    log_dir.mkdir(parents=True, exist_ok=True)
    tasks.write_epoch_log(result.history, log_dir / f"{args.task}-{args.shift}-epochs.csv", echo["config_hash"])
    last = result.history[-1]
    print(
        f"train[{args.task}/{args.shift}] epochs={len(result.history)} "
        f"train_acc={last['train_acc']:.2f} val_acc={last['val_acc']:.2f} -> {ckpt}"
    )
    return 0


def _load_model(bucket: Path, task: str, shift: str):
    path = _require(_checkpoint_path(bucket, task, shift), f"train --task {task} --shift {shift}")
    return tasks.load_checkpoint(path.read_bytes(), expect_kind=task)


def _selected_methods(cli_method: str) -> list[str]:
    if cli_method == "all":
        return [CLI_METHODS[m] for m in CLI_METHODS]
    return [CLI_METHODS[cli_method]]


def cmd_score(config: dict, args) -> int:
    bucket = bucket_dir(config)
    model = _load_model(bucket, args.task, args.shift)
    vocabs = _load_vocabs(bucket, args.task, args.shift)
    methods = _selected_methods(args.method)
    u = config["uncertainty"]
    seed = config["seed"]

    split_names = _split_names(bucket, args.task, args.shift)
    eval_splits = [s for s in split_names if s == "validation" or s.startswith("test")]
    if "validation" not in eval_splits:
        raise ValidationFailure("no validation contexts found; run `extract` first")
    encoded = {s: _load_encoded(bucket, config, args.task, args.shift, s, vocabs) for s in eval_splits}

    temperature = None
    if "temp_scale" in methods:
        temperature = uq.fit_temperature(model, encoded["validation"])
        print(f"score[{args.task}/{args.shift}] fitted temperature = {temperature:.4f}")
    ensembles = {}
    if "mmutant" in methods:
        for op in uq.MUTATION_OPERATORS:
            ensembles[op] = uq.build_mutant_ensemble(
                model, op, degree=u["mutation_degree"], count=u["mutant_count"], seed=seed
            )
    probes = None
    if "dissector" in methods:
        train_enc = _load_encoded(bucket, config, args.task, args.shift, "train", vocabs)
        probes = uq.train_probes(
            model, train_enc, epochs=u["probe_epochs"],
            learning_rate=u["probe_learning_rate"], seed=seed,
        )

    out_dir = bucket / "scores"
    out_dir.mkdir(parents=True, exist_ok=True)
    hash_hex = config_hash(config)
    written = 0
    for split, samples in encoded.items():
        split_seed = [seed, zlib.crc32(split.encode())]
        for method in methods:
            if method == "vanilla":
                batches = {"": uq.score_vanilla(model, samples, split)}
            elif method == "temp_scale":
                batches = {"": uq.score_temp_scale(model, temperature, samples, split)}
            elif method == "mc_dropout":
                batches = {
                    "": uq.score_mc_dropout(
                        model, samples, split, passes=u["mc_passes"], p=u["mc_dropout_p"], seed=split_seed
                    )
                }
            elif method == "mmutant":
                batches = {op: uq.score_mmutant(model, ensembles[op], samples, split) for op in uq.MUTATION_OPERATORS}
            else:
                batches = {g: uq.score_dissector(model, probes, g, samples, split) for g in uq.GROWTH_TYPES}
            for variant, records in batches.items():
                uq.write_scores_csv(_scores_path(bucket, args.task, args.shift, method, variant, split), records, hash_hex)
                written += 1
    print(f"score[{args.task}/{args.shift}] wrote {written} score files over splits {eval_splits}")
    return 0


def _read_all_scores(bucket: Path, task: str, shift: str) -> list[uq.ConfidenceRecord]:
    paths = sorted((bucket / "scores").glob(f"{task}-{shift}-*.csv"))
    if not paths:
        raise ValidationFailure(
            f"no scores for {task}/{shift} under {bucket / 'scores'}; run `score --task {task} --shift {shift}` first"
        )
    records: list[uq.ConfidenceRecord] = []
    for path in paths:
        records.extend(uq.read_scores_csv(path))
    return records


def cmd_eval(config: dict, args) -> int:
    bucket = bucket_dir(config)
    records = _read_all_scores(bucket, args.task, args.shift)
    vanilla = [r for r in records if r.method == "vanilla"]
    if not vanilla:
        raise ValidationFailure("eval needs vanilla scores for the accuracy table; run `score` with vanilla or all")
    accuracies: dict[str, float] = {}
    for split in sorted({r.split for r in vanilla}):
        split_records = [r for r in vanilla if r.split == split]
        accuracies[split] = 100.0 * sum(evalpipe.record_is_correct(r) for r in split_records) / len(split_records)
    report = evalpipe.build_report(
        args.task, args.shift, records, accuracies, config_hash=config_hash(config)
    )
    out_dir = bucket / "reports"
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / f"{args.task}-{args.shift}.json"
    evalpipe.write_report_json(json_path, report)
    evalpipe.write_report_csv(out_dir / f"{args.task}-{args.shift}.csv", evalpipe.flatten_report(report), config_hash(config))
    print(f"eval[{args.task}/{args.shift}] -> {json_path}")
    for split, row in report["accuracy"].items():
        shown = row.get("formatted", f"{row['accuracy']:.2f}")
        print(f"  accuracy[{split}] = {shown}")
    return 0


def _variant_records(records, method: str, variant: str | None):
    if method in METHOD_VARIANTS:
        chosen = variant or METHOD_VARIANTS[method][0]
        if chosen not in METHOD_VARIANTS[method]:
            raise ValidationFailure(f"{method} has variants {METHOD_VARIANTS[method]}, not {chosen!r}")
    else:
        if variant:
            raise ValidationFailure(f"method {method} has no variants")
        chosen = ""
    subset = [r for r in records if r.method == method and r.variant == chosen]
    if not subset:
        raise ValidationFailure(f"no records for method={method} variant={chosen!r}")
    return chosen, subset


def cmd_sweep(config: dict, args) -> int:
    if args.method == "all":
        raise ValidationFailure("sweep needs a single --method")
    method = CLI_METHODS[args.method]
    bucket = bucket_dir(config)
    records = _read_all_scores(bucket, args.task, args.shift)
    variant, subset = _variant_records(records, method, args.variant)
    splits = sorted({r.split for r in subset})
    if args.split:
        if args.split not in splits:
            raise ValidationFailure(f"split {args.split!r} not scored; have {splits}")
        splits = [args.split]
    out_dir = bucket / "reports" / "sweeps"
    out_dir.mkdir(parents=True, exist_ok=True)
    for split in splits:
        rows = evalpipe.threshold_sweep([r for r in subset if r.split == split])
        variant_part = f"-{variant}" if variant else ""
        path = out_dir / f"{args.task}-{args.shift}-{method}{variant_part}-{split}.csv"
        evalpipe.write_sweep_csv(path, rows, config_hash(config))
        print(f"sweep[{args.task}/{args.shift}/{split}] -> {path}")
    return 0


def cmd_filter(config: dict, args) -> int:
    if args.method == "all":
        raise ValidationFailure("filter needs a single --method")
    method = CLI_METHODS[args.method]
    bucket = bucket_dir(config)
    records = _read_all_scores(bucket, args.task, args.shift)
    variant, subset = _variant_records(records, method, args.variant)
    splits = sorted({r.split for r in subset if r.split.startswith("test")})
    if args.split:
        splits = [args.split]
    if not splits:
        raise ValidationFailure("no test splits to filter")
    out_dir = bucket / "filtered"
    out_dir.mkdir(parents=True, exist_ok=True)
    for split in splits:
        split_records = [r for r in subset if r.split == split]
        if not split_records:
            raise ValidationFailure(f"no records for split {split!r}")
        accepted, rejected = evalpipe.input_filter(split_records, args.threshold)
        variant_part = f"-{variant}" if variant else ""
        stem = f"{args.task}-{args.shift}-{method}{variant_part}-{split}"
        with open(out_dir / f"{stem}-accepted.csv", "w", encoding="utf-8", newline="\n") as f:
            f.write(f"# config_hash={config_hash(config)}\n")
            f.write("sample_id,confidence,predicted\n")
            for d in accepted:
                f.write(f"{d.sample_id},{d.confidence!r},{d.predicted}\n")
        with open(out_dir / f"{stem}-rejected.csv", "w", encoding="utf-8", newline="\n") as f:
            f.write(f"# config_hash={config_hash(config)}\n")
            f.write("sample_id,confidence\n")
            for d in rejected:
                f.write(f"{d.sample_id},{d.confidence!r}\n")
        print(
            f"filter[{args.task}/{args.shift}/{split}] threshold={args.threshold} "
            f"accepted={len(accepted)} rejected={len(rejected)}"
        )
    return 0


def cmd_report(config: dict, args) -> int:
    bucket = bucket_dir(config)
    report_dir = bucket / "reports"
    paths = sorted(p for p in report_dir.glob("*.json") if p.name != "all.json")
    if not paths:
        raise ValidationFailure(f"no reports under {report_dir}; run `eval` first")
    merged = {"config_hash": config_hash(config), "reports": []}
    rows = []
    for path in paths:
        report = json.loads(path.read_text(encoding="utf-8"))
        merged["reports"].append(report)
        rows.extend(evalpipe.flatten_report(report))
    evalpipe.write_report_json(report_dir / "all.json", merged)
    evalpipe.write_report_csv(report_dir / "all.csv", rows, config_hash(config))
    print(f"report: merged {len(paths)} reports -> {report_dir / 'all.json'}")
    return 0


COMMANDS = {
    "synth-corpus": cmd_synth_corpus,
    "make-splits": cmd_make_splits,
    "extract": cmd_extract,
    "train": cmd_train,
    "score": cmd_score,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "filter": cmd_filter,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {"seed": args.seed} if args.seed is not None else None
    try:
        config = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"codeshift: config error: {exc}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](config, args)
    except ValidationFailure as exc:
        print(f"codeshift: {exc}", file=sys.stderr)
        return 2
    except (corpus.ManifestError, uq.EstimatorStateError) as exc:
        print(f"codeshift: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # anything else is a runtime failure
        print(f"codeshift: runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
