"""Five predictive-uncertainty estimators over a trained task model.

All estimators share one convention: `confidence` lies in [0, 1] and higher
means "more likely within the model's competence". Methods with variants
(mutation operators, probe growth curves) tag each record so reports can
select the best-scoring variant per metric.

- vanilla: max softmax probability.
- temp_scale: max softmax(logits / T), T fitted on validation NLL (BFGS).
- mc_dropout: mean softmax over K stochastic passes; the CC model has no
  dropout layer, so a dropout site is injected after its embedding mean at
  score time only.
- mmutant: label change rate (LCR) across an ensemble of mutated models
  (GF / WS / NS / NAI at a fixed mutation degree); confidence = 1 - LCR
  over a fixed-size ensemble.
- dissector: per-layer linear probes produce snapshot-validity scores that
  are aggregated with linear/log/exp depth weights into a PV score.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp

from . import nn, tasks

METHODS = ("vanilla", "temp_scale", "mc_dropout", "mmutant", "dissector")
MUTATION_OPERATORS = ("GF", "WS", "NS", "NAI")
GROWTH_TYPES = ("linear", "log", "exp")

TEMPERATURE_BOUNDS = (0.05, 100.0)


class EstimatorStateError(RuntimeError):
    """A scorer was invoked without its fitted state (temperature, ensemble, probes)."""


@dataclass(frozen=True)
class ConfidenceRecord:
    sample_id: str
    method: str
    variant: str
    raw_score: float
    confidence: float
    predicted: int
    true: int
    split: str = ""


def _records(method, variant, samples, raw, confidence, predicted, split):
    labels = tasks.true_labels(samples)
    out = []
    for i, s in enumerate(samples):
        c = float(confidence[i])
        if not 0.0 <= c <= 1.0:
            raise ValueError(f"confidence {c} outside [0, 1] for {s.sample_id}")
        out.append(
            ConfidenceRecord(
                sample_id=s.sample_id,
                method=method,
                variant=variant,
                raw_score=float(raw[i]),
                confidence=c,
                predicted=int(predicted[i]),
                true=int(labels[i]),
                split=split,
            )
        )
    return out


# -- vanilla ---------------------------------------------------------------


def score_vanilla(model, samples, split: str = "") -> list[ConfidenceRecord]:
    probs = tasks.infer(model, samples)["probs"]
    conf = probs.max(axis=-1)
    preds = probs.argmax(axis=-1)
    return _records("vanilla", "", samples, conf, conf, preds, split)


def vanilla_confidence(model, sample) -> ConfidenceRecord:
    return score_vanilla(model, [sample])[0]


# -- temperature scaling -----------------------------------------------------


def _nll_at_temperature(logits: np.ndarray, labels: np.ndarray, temperature: float) -> float:
    scaled = logits / temperature
    log_probs = scaled - logsumexp(scaled, axis=-1, keepdims=True)
    return float(-log_probs[np.arange(len(labels)), labels].mean())


def fit_temperature(model, val_samples) -> float:
    """T > 0 minimizing validation NLL of softmax(logits / T).

    Optimized over log T with BFGS; the result is clamped into
    TEMPERATURE_BOUNDS (a degenerate validation set can push T to the
    boundary) and never allowed to be worse than T = 1.
    """
    if not val_samples:
        raise EstimatorStateError("temperature fitting needs a non-empty validation set")
    logits = tasks.infer(model, val_samples, keys=("logits",))["logits"].astype(np.float64)
    labels = tasks.true_labels(val_samples)

    result = minimize(
        lambda x: _nll_at_temperature(logits, labels, float(np.exp(x[0]))),
        x0=np.zeros(1),
        method="BFGS",
    )
    temperature = float(np.exp(result.x[0]))
    lo, hi = TEMPERATURE_BOUNDS
    if not lo <= temperature <= hi:
        clamped = float(np.clip(temperature, lo, hi))
        warnings.warn(
            f"fitted temperature {temperature:.4g} clamped to {clamped:.4g}; "
            "validation set may be degenerate",
            RuntimeWarning,
            stacklevel=2,
        )
        temperature = clamped
    if _nll_at_temperature(logits, labels, temperature) > _nll_at_temperature(logits, labels, 1.0):
        temperature = 1.0
    return temperature


def score_temp_scale(model, temperature: float, samples, split: str = "") -> list[ConfidenceRecord]:
    if temperature is None or temperature <= 0:
        raise EstimatorStateError(f"temperature must be positive, got {temperature}")
    logits = tasks.infer(model, samples, keys=("logits",))["logits"].astype(np.float64)
    scaled = logits / temperature
    log_probs = scaled - logsumexp(scaled, axis=-1, keepdims=True)
    probs = np.exp(log_probs)
    conf = probs.max(axis=-1)
    preds = logits.argmax(axis=-1)  # monotone scaling cannot move the argmax
    return _records("temp_scale", "", samples, conf, conf, preds, split)


def temp_scale_confidence(model, temperature: float, sample) -> ConfidenceRecord:
    return score_temp_scale(model, temperature, [sample])[0]


# -- MC-Dropout ---------------------------------------------------------------


def score_mc_dropout(
    model, samples, split: str = "", passes: int = 30, p: float = 0.5, seed: int = 0
) -> list[ConfidenceRecord]:
    if passes < 1:
        raise ValueError(f"MC-Dropout needs passes >= 1, got {passes}")
    if p == 0.0:
        # every pass is the deterministic forward; short-circuit so the
        # p=0 == vanilla contract holds bitwise
        mean_probs = tasks.infer(model, samples)["probs"]
    else:
        rng = np.random.default_rng([int(s) for s in np.atleast_1d(seed)] + [0xD0])
        total = None
        for _ in range(passes):
            probs = tasks.infer(model, samples, training=True, rng=rng, dropout_p=p)["probs"]
            total = probs.astype(np.float64) if total is None else total + probs
        mean_probs = total / passes
    conf = mean_probs.max(axis=-1)
    preds = mean_probs.argmax(axis=-1)
    return _records("mc_dropout", "", samples, conf, conf, preds, split)


def mc_dropout_confidence(model, sample, passes: int = 30, p: float = 0.5, seed: int = 0) -> ConfidenceRecord:
    return score_mc_dropout(model, [sample], passes=passes, p=p, seed=seed)[0]


# -- mMutant -------------------------------------------------------------------


def _pick(rng: np.random.Generator, n: int, degree: float) -> np.ndarray:
    k = int(np.floor(degree * n + 0.5))
    if k <= 0:
        return np.empty(0, dtype=np.int64)
    return rng.choice(n, size=min(k, n), replace=False)


def mutate_model(model, operator: str, degree: float, seed: int):
    """Return a mutated copy of `model`; the base is never touched.

    GF perturbs a `degree` fraction of scalar weights in every parameter
    array with Gaussian noise scaled by that array's own std. WS, NS, and
    NAI act on output neurons of the affine layers: WS shuffles a neuron's
    incoming weights, NS swaps the incoming weights (and bias) of randomly
    paired neurons, NAI negates incoming weights and bias so the neuron's
    pre-activation flips sign. Returns (mutant, notes) where notes lists
    layers skipped because they were too small to pair.
    """
    if operator not in MUTATION_OPERATORS:
        raise ValueError(f"unknown mutation operator {operator!r}")
    if not 0.0 <= degree <= 1.0:
        raise ValueError(f"mutation degree must lie in [0, 1], got {degree}")
    seed_key = [int(s) for s in np.atleast_1d(seed)] + [MUTATION_OPERATORS.index(operator)]
    rng = np.random.default_rng(seed_key)
    mutant = model.clone()
    params = mutant.params()
    notes: list[str] = []
    if operator == "GF":
        for name, p in params.items():
            flat = p.data.reshape(-1)
            idx = _pick(rng, flat.size, degree)
            if idx.size:
                sigma = float(p.data.std())
                flat[idx] += rng.normal(0.0, sigma, size=idx.size).astype(p.data.dtype)
        return mutant, notes
    for w_name, b_name in mutant.affine_layers():
        w = params[w_name].data
        b = params[b_name].data
        n_out = w.shape[1]
        cols = _pick(rng, n_out, degree)
        if operator == "WS":
            for j in cols:
                w[:, j] = w[rng.permutation(w.shape[0]), j]
        elif operator == "NS":
            if cols.size < 2:
                notes.append(f"{w_name}: too few neurons selected for NS pairing, layer skipped")
                continue
            if cols.size % 2:
                cols = cols[:-1]
            for a, bcol in cols.reshape(-1, 2):
                w[:, [a, bcol]] = w[:, [bcol, a]]
                b[[a, bcol]] = b[[bcol, a]]
        elif operator == "NAI":
            if cols.size:
                w[:, cols] *= -1.0
                b[cols] *= -1.0
    return mutant, notes


@dataclass
class MutantEnsemble:
    operator: str
    degree: float
    count: int
    seed: int
    mutants: list = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


def build_mutant_ensemble(model, operator: str, degree: float = 0.05, count: int = 50, seed: int = 0) -> MutantEnsemble:
    if count < 1:
        raise ValueError(f"ensemble needs count >= 1, got {count}")
    ensemble = MutantEnsemble(operator=operator, degree=degree, count=count, seed=seed)
    for i in range(count):
        mutant, notes = mutate_model(model, operator, degree, seed=[seed, i, 0xEA])
        ensemble.mutants.append(mutant)
        ensemble.notes.extend(f"mutant {i}: {n}" for n in notes)
    return ensemble


def score_mmutant(model, ensemble: MutantEnsemble, samples, split: str = "") -> list[ConfidenceRecord]:
    if not ensemble.mutants:
        raise EstimatorStateError("mMutant scoring needs a built ensemble")
    base_probs = tasks.infer(model, samples)["probs"]
    base_preds = base_probs.argmax(axis=-1)
    changed = np.zeros(len(samples), dtype=np.int64)
    for mutant in ensemble.mutants:
        preds = tasks.infer(mutant, samples)["probs"].argmax(axis=-1)
        changed += preds != base_preds
    lcr = changed / ensemble.count
    return _records("mmutant", ensemble.operator, samples, lcr, 1.0 - lcr, base_preds, split)


def mmutant_confidence(model, ensemble: MutantEnsemble, sample) -> ConfidenceRecord:
    return score_mmutant(model, ensemble, [sample])[0]


# -- Dissector ------------------------------------------------------------------

# Probe taps in shallow-to-deep order; growth weights grow with depth.
CS_PROBE_LAYERS = ("embed_mean", "pooled")
CC_PROBE_LAYERS = ("embed_mean",)


def probe_layer_tags(model) -> tuple[str, ...]:
    return CS_PROBE_LAYERS if model.kind == tasks.CS else CC_PROBE_LAYERS


@dataclass
class Probe:
    tag: str
    w: nn.Tensor
    b: nn.Tensor

    def predict(self, acts: np.ndarray) -> np.ndarray:
        with nn.no_grad():
            return nn.softmax(nn.affine(nn.Tensor(acts), self.w, self.b)).data


@dataclass
class ProbeSet:
    probes: list[Probe]
    n_classes: int


def collect_activations(model, samples, batch_size: int = 512) -> dict[str, np.ndarray]:
    tags = probe_layer_tags(model)
    return tasks.infer(model, samples, batch_size=batch_size, keys=tags)


def train_probes(
    model,
    train_samples,
    epochs: int = 20,
    learning_rate: float = 0.001,
    seed: int = 0,
    batch_size: int = 512,
) -> ProbeSet:
    """Fit one linear probe per tapped layer on frozen training activations."""
    if not train_samples:
        raise EstimatorStateError("probe training needs training-split samples")
    acts = collect_activations(model, train_samples, batch_size=batch_size)
    labels = tasks.true_labels(train_samples)
    n_classes = model.n_classes()
    probes = []
    for layer_index, tag in enumerate(probe_layer_tags(model)):
        features = acts[tag]
        dim = features.shape[1]
        rng = np.random.default_rng([seed, layer_index, 0xDE])
        bound = 1.0 / np.sqrt(dim)
        w = nn.Tensor(rng.uniform(-bound, bound, size=(dim, n_classes)), requires_grad=True)
        b = nn.Tensor(np.zeros(n_classes), requires_grad=True)
        state = nn.AdamState(learning_rate=learning_rate)
        for epoch in range(epochs):
            order = np.random.default_rng([seed, layer_index, epoch]).permutation(len(labels))
            for start in range(0, len(labels), batch_size):
                idx = order[start:start + batch_size]
                nn.zero_grads([w, b])
                probs = nn.softmax(nn.affine(nn.Tensor(features[idx]), w, b))
                loss = nn.mean(nn.cross_entropy(probs, labels[idx]))
                nn.backward(loss)
                nn.adam_step({"w": w, "b": b}, {"w": w.grad, "b": b.grad}, state)
        probes.append(Probe(tag=tag, w=w, b=b))
    return ProbeSet(probes=probes, n_classes=n_classes)


def growth_weights(growth: str, n_layers: int) -> np.ndarray:
    """Depth weights over 1-based layer indices, normalized to sum 1."""
    i = np.arange(1, n_layers + 1, dtype=np.float64)
    if growth == "linear":
        raw = i
    elif growth == "log":
        raw = np.log(i + 1.0)
    elif growth == "exp":
        raw = np.exp(i)
    else:
        raise ValueError(f"unknown growth type {growth!r}")
    return raw / raw.sum()


def _snapshot_validity(q: np.ndarray, base_pred: np.ndarray) -> np.ndarray:
    """sv = q[l]/(q[l]+second) when the probe agrees with the base label l,
    else q[l]/(q[l]+max)."""
    rows = np.arange(len(base_pred))
    ql = q[rows, base_pred]
    part = np.sort(q, axis=-1)
    qmax = part[:, -1]
    qsecond = part[:, -2]
    agrees = q.argmax(axis=-1) == base_pred
    denom = np.where(agrees, ql + qsecond, ql + qmax)
    return ql / denom


def score_dissector(model, probes: ProbeSet, growth: str, samples, split: str = "") -> list[ConfidenceRecord]:
    if probes is None or not probes.probes:
        raise EstimatorStateError("dissector scoring needs trained probes")
    if probes.n_classes != model.n_classes():
        raise EstimatorStateError(
            f"probe label space ({probes.n_classes}) does not match model ({model.n_classes()})"
        )
    weights = growth_weights(growth, len(probes.probes))
    acts = collect_activations(model, samples)
    base_preds = tasks.infer(model, samples)["probs"].argmax(axis=-1)
    pv = np.zeros(len(samples), dtype=np.float64)
    for weight, probe in zip(weights, probes.probes):
        q = probe.predict(acts[probe.tag])
        pv += weight * _snapshot_validity(q, base_preds)
    return _records("dissector", growth, samples, pv, pv, base_preds, split)


def dissector_confidence(model, probes: ProbeSet, growth: str, sample) -> ConfidenceRecord:
    return score_dissector(model, probes, growth, [sample])[0]


# -- scores file --------------------------------------------------------------


SCORES_HEADER = "sample_id,method,variant,raw_score,confidence,predicted,true,split"


def write_scores_csv(path, records: list[ConfidenceRecord], config_hash: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        if config_hash:
            f.write(f"# config_hash={config_hash}\n")
        f.write(SCORES_HEADER + "\n")
        for r in records:
            f.write(
                f"{r.sample_id},{r.method},{r.variant},{r.raw_score!r},"
                f"{r.confidence!r},{r.predicted},{r.true},{r.split}\n"
            )


def read_scores_csv(path) -> list[ConfidenceRecord]:
    records = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line or line.startswith("#") or line == SCORES_HEADER:
                continue
            sample_id, method, variant, raw, conf, pred, true, split = line.split(",")
            records.append(
                ConfidenceRecord(
                    sample_id=sample_id,
                    method=method,
                    variant=variant,
                    raw_score=float(raw),
                    confidence=float(conf),
                    predicted=int(pred),
                    true=int(true),
                    split=split,
                )
            )
    return records


# -- variant selection -------------------------------------------------------


def best_of_variants(records_by_variant: dict[str, list[ConfidenceRecord]], evaluator, higher_is_better: bool = True):
    """Pick the variant whose evaluator score is best; returns (name, records, score).

    Variants whose evaluator returns None (undefined metric) are skipped
    unless every variant is undefined, in which case the first is returned
    with a None score.
    """
    if not records_by_variant:
        raise ValueError("no variants to choose from")
    scored = []
    for name, records in records_by_variant.items():
        scored.append((name, records, evaluator(records)))
    defined = [s for s in scored if s[2] is not None]
    if not defined:
        return scored[0]
    key = (lambda s: s[2]) if higher_is_better else (lambda s: -s[2])
    return max(defined, key=key)
