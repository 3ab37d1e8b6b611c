"""All five uncertainty estimators over one trained model.

Every estimator maps (model, sample) to a confidence in [0, 1] where
higher means "more likely within the model's competence": max softmax
(vanilla), temperature-scaled softmax, MC-Dropout averaging, mutation
label-change rate (1 - LCR), and probe-based PV scores.
"""

from codeshift import extraction as ex
from codeshift import tasks
from codeshift import uncertainty as uq

source = """
class Pair {
    int addPair(int addLeft, int addRight) { return addLeft + addRight; }
    int subPair(int subLeft, int subRight) { return subLeft - subRight; }
    int maxPair(int maxLeft, int maxRight) { if (maxLeft > maxRight) { return maxLeft; } return maxRight; }
    boolean isEmpty(int size) { return size == 0; }
}
"""

tree = ex.parse_java_lite(ex.tokenize_java(source))
samples = ex.extract_method_samples(tree)
terminals, paths, labels = ex.build_cs_vocabs(samples)
encoded = tasks.encode_method_samples(samples, terminals, paths, labels, id_prefix="demo")
model = tasks.train_cs(encoded, terminals, paths, labels,
                       tasks.TrainConfig(embedding_dim=24, epochs=60, seed=5)).model

print("vanilla (max softmax):")
for rec in uq.score_vanilla(model, encoded):
    print(f"  {rec.sample_id}: confidence={rec.confidence:.3f} predicted={labels.decode(rec.predicted)}")

temperature = uq.fit_temperature(model, encoded)
scaled = uq.score_temp_scale(model, temperature, encoded)
print(f"\ntemperature scaling: T*={temperature:.3f}, confidences "
      f"{[round(r.confidence, 3) for r in scaled]}")

mc = uq.score_mc_dropout(model, encoded, passes=30, p=0.5, seed=0)
print(f"mc-dropout (30 passes, p=0.5): confidences {[round(r.confidence, 3) for r in mc]}")

print("\nmMutant label-change rates at degree 0.05 (confidence = 1 - LCR):")
for operator in uq.MUTATION_OPERATORS:
    ensemble = uq.build_mutant_ensemble(model, operator, degree=0.05, count=20, seed=0)
    records = uq.score_mmutant(model, ensemble, encoded)
    print(f"  {operator}: LCR {[round(r.raw_score, 2) for r in records]}")

probes = uq.train_probes(model, encoded, epochs=20, seed=0)
print("\ndissector PV scores per growth type:")
for growth in uq.GROWTH_TYPES:
    weights = uq.growth_weights(growth, len(probes.probes))
    records = uq.score_dissector(model, probes, growth, encoded)
    print(f"  {growth:<6} layer weights {[round(float(w), 3) for w in weights]}, "
          f"PV {[round(r.confidence, 3) for r in records]}")
