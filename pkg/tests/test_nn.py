"""Gradient checks (central finite differences, 64-bit) and op contracts."""

import numpy as np
import pytest

from codeshift import nn

H = 1e-5
TOL = 1e-4


def rel_err(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1.0)


def finite_diff_check(build_loss, params, h=H, tol=TOL):
    """Compare autograd gradients against (f(x+h)-f(x-h))/2h elementwise.

    `build_loss` must be a pure function of the current param values so it
    can be re-evaluated after each coordinate nudge.
    """
    nn.zero_grads(params)
    loss = build_loss()
    nn.backward(loss)
    analytic = [np.zeros_like(p.data) if p.grad is None else p.grad.copy() for p in params]
    for p, grad in zip(params, analytic):
        flat = p.data.reshape(-1)
        gflat = grad.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = float(build_loss().data)
            flat[i] = orig - h
            down = float(build_loss().data)
            flat[i] = orig
            fd = (up - down) / (2.0 * h)
            assert rel_err(gflat[i], fd) < tol, f"grad mismatch at {i}: {gflat[i]} vs {fd}"


def t64(rng, *shape, scale=1.0):
    return nn.Tensor(rng.standard_normal(shape) * scale, requires_grad=True, dtype=np.float64)


N_INSTANCES = 50


@pytest.mark.parametrize("seed", range(N_INSTANCES))
def test_grad_affine_tanh_mean(seed):
    rng = np.random.default_rng(seed)
    x = t64(rng, 3, 4)
    w = t64(rng, 4, 5)
    b = t64(rng, 5)
    finite_diff_check(lambda: nn.mean(nn.tanh(nn.affine(x, w, b))), [x, w, b])


@pytest.mark.parametrize("seed", range(N_INSTANCES))
def test_grad_softmax_cross_entropy(seed):
    rng = np.random.default_rng(100 + seed)
    x = t64(rng, 4, 6)
    labels = rng.integers(0, 6, size=4)
    finite_diff_check(lambda: nn.mean(nn.cross_entropy(nn.softmax(x), labels)), [x])


@pytest.mark.parametrize("seed", range(N_INSTANCES))
def test_grad_masked_softmax(seed):
    rng = np.random.default_rng(200 + seed)
    x = t64(rng, 3, 5)
    mask = rng.random((3, 5)) < 0.7
    mask[:, 0] = True  # keep every row alive
    weights = t64(rng, 5, 2)

    def build():
        return nn.mean(nn.linear(nn.softmax(x, mask=mask), weights))

    finite_diff_check(build, [x, weights])


@pytest.mark.parametrize("seed", range(N_INSTANCES))
def test_grad_embedding_lookup(seed):
    rng = np.random.default_rng(300 + seed)
    table = t64(rng, 7, 4)
    ids = rng.integers(0, 7, size=(2, 5))
    w = t64(rng, 4, 3)
    finite_diff_check(lambda: nn.mean(nn.linear(nn.embedding_lookup(table, ids), w)), [table, w])


@pytest.mark.parametrize("seed", range(N_INSTANCES))
def test_grad_attention_pool(seed):
    rng = np.random.default_rng(400 + seed)
    contexts = t64(rng, 2, 6, 4)
    a = t64(rng, 4)
    mask = np.ones((2, 6), dtype=bool)
    mask[0, 4:] = False

    def build():
        pooled, _ = nn.attention_pool(contexts, a, mask=mask)
        return nn.mean(pooled)

    finite_diff_check(build, [contexts, a])


@pytest.mark.parametrize("seed", range(N_INSTANCES))
def test_grad_dropout(seed):
    rng = np.random.default_rng(500 + seed)
    x = t64(rng, 4, 5)

    def build():
        drop_rng = np.random.default_rng(seed)  # same mask on every re-evaluation
        return nn.mean(nn.dropout(x, 0.4, training=True, rng=drop_rng))

    finite_diff_check(build, [x])


@pytest.mark.parametrize("seed", range(N_INSTANCES))
def test_grad_elementwise_and_reductions(seed):
    rng = np.random.default_rng(600 + seed)
    a = t64(rng, 3, 4)
    b = t64(rng, 4)  # broadcast
    c = t64(rng, 3, 4)

    def build():
        s = nn.mul(nn.add(a, b), c)
        return nn.mean(nn.sum_axis(s, axis=0))

    finite_diff_check(build, [a, b, c])


@pytest.mark.parametrize("seed", range(N_INSTANCES))
def test_grad_concat_weighted_sum(seed):
    rng = np.random.default_rng(700 + seed)
    left = t64(rng, 2, 3, 2)
    right = t64(rng, 2, 3, 3)
    weights = t64(rng, 2, 3, scale=0.5)

    def build():
        cat = nn.concat_last([left, right])
        pooled = nn.weighted_sum(nn.softmax(weights), cat)
        return nn.mean(pooled)

    finite_diff_check(build, [left, right, weights])


def test_grad_full_attention_classifier():
    # One composite of everything the CS model uses, checked end to end.
    rng = np.random.default_rng(42)
    table = t64(rng, 9, 3)
    w_comb = t64(rng, 9, 4)
    b_comb = t64(rng, 4)
    attn = t64(rng, 4)
    w_out = t64(rng, 4, 5)
    b_out = t64(rng, 5)
    ids = rng.integers(0, 9, size=(2, 4, 3))
    labels = rng.integers(0, 5, size=2)

    def build():
        emb = nn.embedding_lookup(table, ids)  # (2, 4, 3, 3)
        cat = nn.reshape(emb, (2, 4, 9))
        combined = nn.tanh(nn.affine(cat, w_comb, b_comb))
        pooled, _ = nn.attention_pool(combined, attn)
        probs = nn.softmax(nn.affine(pooled, w_out, b_out))
        return nn.mean(nn.cross_entropy(probs, labels))

    finite_diff_check(build, [table, w_comb, b_comb, attn, w_out, b_out])


def test_softmax_symmetry_and_stability():
    assert np.allclose(nn.softmax(nn.Tensor([0.0, 0.0])).data, [0.5, 0.5])
    big = nn.softmax(nn.Tensor([1000.0, 0.0])).data
    assert np.all(np.isfinite(big))
    assert big[0] > 0.999 and big[1] < 1e-3


def test_softmax_rows_sum_to_one():
    rng = np.random.default_rng(7)
    for _ in range(20):
        x = nn.Tensor(rng.standard_normal((5, 9)) * rng.uniform(0.1, 50))
        probs = nn.softmax(x).data
        assert np.all(probs > 0)
        assert np.abs(probs.sum(axis=-1) - 1.0).max() < 1e-9


def test_attention_pool_single_row():
    contexts = nn.Tensor([[3.0, -1.0]])
    a = nn.Tensor([0.2, 0.4])
    pooled, weights = nn.attention_pool(contexts, a)
    assert np.allclose(weights.data, [1.0])
    assert np.allclose(pooled.data, [3.0, -1.0])


def test_dropout_identities():
    x = nn.Tensor(np.arange(12.0).reshape(3, 4))
    rng = np.random.default_rng(0)
    assert nn.dropout(x, 0.0, training=True, rng=rng) is x
    assert nn.dropout(x, 0.5, training=False) is x
    with pytest.raises(ValueError):
        nn.dropout(x, 1.0, training=True, rng=rng)
    with pytest.raises(ValueError):
        nn.dropout(x, -0.1, training=True, rng=rng)


def test_dropout_scaling_preserves_mean():
    # Monte-Carlo check of the 1/(1-p) inverted-dropout scaling.
    rng = np.random.default_rng(123)
    x = nn.Tensor(np.ones(100_000))
    y = nn.dropout(x, 0.5, training=True, rng=rng)
    assert abs(y.data.mean() - 1.0) < 0.01


def test_cross_entropy_values():
    certain = nn.cross_entropy(nn.Tensor([[0.0, 1.0, 0.0]]), np.array([1]))
    assert np.allclose(certain.data, [0.0])
    uniform = nn.cross_entropy(nn.Tensor([0.25, 0.25, 0.25, 0.25]), np.array(2))
    assert abs(float(uniform.data) - np.log(4.0)) < 1e-6
    with pytest.raises(IndexError):
        nn.cross_entropy(nn.Tensor([0.5, 0.5]), np.array(2))


def test_shape_mismatch_errors():
    with pytest.raises(nn.ShapeError):
        nn.linear(nn.Tensor(np.ones((2, 3))), nn.Tensor(np.ones((4, 5))))
    with pytest.raises(nn.ShapeError):
        nn.affine(nn.Tensor(np.ones((2, 3))), nn.Tensor(np.ones((3, 5))), nn.Tensor(np.ones(4)))
    with pytest.raises(nn.ShapeError):
        nn.weighted_sum(nn.Tensor(np.ones((2, 3))), nn.Tensor(np.ones((2, 4, 5))))


def test_no_grad_skips_tape():
    x = nn.Tensor(np.ones((2, 2)), requires_grad=True)
    with nn.no_grad():
        y = nn.tanh(x)
    assert y._parents == ()
    z = nn.tanh(x)
    assert z._parents != ()


def test_adam_minimizes_quadratic():
    p = nn.Tensor(np.array([10.0, -6.0]), requires_grad=True, dtype=np.float64)
    state = nn.AdamState(learning_rate=0.1)
    for _ in range(500):
        grads = {"p": 2.0 * p.data}
        nn.adam_step({"p": p}, grads, state)
    assert np.abs(p.data).max() < 1e-3


def test_adam_deterministic():
    def run():
        rng = np.random.default_rng(5)
        p = nn.Tensor(rng.standard_normal(8), requires_grad=True)
        state = nn.AdamState()
        for step in range(50):
            grads = {"p": np.sin(p.data + step)}
            nn.adam_step({"p": p}, grads, state)
        return p.data.copy()

    first, second = run(), run()
    assert np.array_equal(first, second)


def test_checkpoint_roundtrip_bitwise():
    rng = np.random.default_rng(11)
    arrays = {
        "w": rng.standard_normal((4, 3)).astype(np.float32),
        "b": rng.standard_normal(3).astype(np.float32),
    }
    blob = nn.write_checkpoint("cs", {"dim": 4}, {"labels": ["<UNK>", "<PAD>", "f"]}, arrays)
    ck = nn.read_checkpoint(blob)
    assert ck.kind == "cs"
    assert ck.config == {"dim": 4}
    assert ck.vocabs == {"labels": ["<UNK>", "<PAD>", "f"]}
    for name, arr in arrays.items():
        assert np.array_equal(ck.arrays[name], arr)
        assert ck.arrays[name].dtype == np.float32


def test_checkpoint_truncation_and_magic():
    blob = nn.write_checkpoint("cc", {}, {}, {"w": np.zeros((2, 2), dtype=np.float32)})
    with pytest.raises(nn.CheckpointError):
        nn.read_checkpoint(blob[: len(blob) - 3])
    with pytest.raises(nn.CheckpointError):
        nn.read_checkpoint(b"XXXX" + blob[4:])
    with pytest.raises(nn.CheckpointError):
        nn.read_checkpoint(blob + b"\x00")


def test_checkpoint_kind_mismatch():
    blob = nn.write_checkpoint("cs", {}, {}, {})
    with pytest.raises(nn.CheckpointKindError):
        nn.read_checkpoint(blob, expect_kind="cc")
