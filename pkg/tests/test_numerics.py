import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from hydo.numerics import (
    AdamState,
    GraphError,
    MlpParams,
    Tensor,
    TrainingFault,
    adam_step,
    backward,
    concat,
    gaussian_log_prob,
    init_mlp,
    mlp_forward,
    no_grad,
    read_container,
    seeded_rng,
    softmax,
    write_container,
)

from oracles import (
    adam_single_step_delta,
    finite_difference,
    max_rel_error,
    mlp_reference_forward,
)


def grads_by_name(loss, params):
    raw = backward(loss, wrt=params.values())
    return {name: raw[id(t)] for name, t in params.items()}


# ---------------------------------------------------------------------------
# mlp_forward


def test_identity_single_layer():
    p = MlpParams(
        weights=[Tensor(np.eye(2), requires_grad=True)],
        biases=[Tensor(np.zeros(2), requires_grad=True)],
        activations=["identity"],
    )
    out = mlp_forward(p, Tensor([[1.0, 2.0]]))
    np.testing.assert_allclose(out.data, [[1.0, 2.0]])


def test_zero_weights_returns_bias():
    b = np.array([0.3, -0.7, 4.0])
    p = MlpParams(
        weights=[Tensor(np.zeros((5, 3)), requires_grad=True)],
        biases=[Tensor(b, requires_grad=True)],
        activations=["identity"],
    )
    x = np.arange(10.0).reshape(2, 5)
    out = mlp_forward(p, Tensor(x))
    np.testing.assert_allclose(out.data, np.tile(b, (2, 1)))


def test_forward_matches_reference_reimplementation():
    rng = seeded_rng(77)
    p = init_mlp([4, 8, 3], rng, hidden_activation="tanh", name="net")
    x = rng.normal((6, 4))
    ours = mlp_forward(p, Tensor(x)).data
    ref = mlp_reference_forward(
        [w.data for w in p.weights], [b.data for b in p.biases], p.activations, x
    )
    np.testing.assert_allclose(ours, ref, rtol=0, atol=0)


def test_shape_mismatch_rejected():
    p = init_mlp([4, 3], seeded_rng(0))
    with pytest.raises(GraphError):
        mlp_forward(p, Tensor(np.zeros((2, 5))))


# ---------------------------------------------------------------------------
# backward


def test_linear_gradient_is_input():
    x = np.array([[2.0, -3.0, 0.5]])
    w = Tensor(np.ones((3, 1)), requires_grad=True)
    loss = (Tensor(x) @ w).sum()
    grads = backward(loss, wrt=[w])
    np.testing.assert_allclose(grads[id(w)], x.T)


def test_log_softmax_gradient_closed_form():
    z = Tensor(np.array([[0.3, -1.2, 2.0, 0.0]]), requires_grad=True)
    j = 2
    loss = softmax(z, axis=-1).log()[0, j]
    grads = backward(loss, wrt=[z])
    probs = np.exp(z.data[0]) / np.exp(z.data[0]).sum()
    expected = -probs
    expected[j] += 1.0
    np.testing.assert_allclose(grads[id(z)][0], expected, atol=1e-12)


def test_untouched_leaf_gets_zero_gradient():
    a = Tensor(np.ones((2, 2)), requires_grad=True)
    unused = Tensor(np.ones((3,)), requires_grad=True)
    loss = a.sum()
    grads = backward(loss, wrt=[a, unused])
    np.testing.assert_array_equal(grads[id(unused)], np.zeros(3))


def test_non_scalar_loss_rejected():
    a = Tensor(np.ones((2,)), requires_grad=True)
    with pytest.raises(GraphError):
        backward(a + 1.0)


def test_three_layer_net_matches_finite_differences():
    rng = seeded_rng(5)
    p = init_mlp([3, 5, 4, 2], rng, hidden_activation="tanh", name="n")
    x = rng.normal((4, 3))
    named = p.named_params()

    def loss_fn(values):
        h = x
        for i, act in enumerate(p.activations):
            h = h @ values[f"n/w{i}"] + values[f"n/b{i}"]
            if act == "tanh":
                h = np.tanh(h)
        return float((h * h).sum())

    out = mlp_forward(p, Tensor(x))
    loss = (out * out).sum()
    analytic = grads_by_name(loss, named)
    numeric = finite_difference(loss_fn, {k: v.data for k, v in named.items()})
    assert max_rel_error(analytic, numeric) < 1e-4


def test_backward_visits_shared_node_once():
    # y appears twice in loss; gradient must accumulate, not double-run.
    x = Tensor(np.array(3.0), requires_grad=True)
    y = x * 2.0
    loss = (y * y).sum() + y.sum()
    grads = backward(loss, wrt=[x])
    np.testing.assert_allclose(grads[id(x)], 2 * 2.0 * 6.0 + 2.0)


def test_broadcast_add_unbroadcasts_gradient():
    m = Tensor(np.ones((4, 3)), requires_grad=True)
    b = Tensor(np.zeros(3), requires_grad=True)
    loss = (m + b).sum()
    grads = backward(loss, wrt=[m, b])
    np.testing.assert_array_equal(grads[id(b)], np.full(3, 4.0))


def test_concat_and_slice_gradients():
    a = Tensor(np.ones((2, 2)), requires_grad=True)
    b = Tensor(np.ones((2, 3)), requires_grad=True)
    joined = concat([a, b], axis=1)
    loss = (joined * joined)[0, 3]
    grads = backward(loss, wrt=[a, b])
    expected_b = np.zeros((2, 3))
    expected_b[0, 1] = 2.0
    np.testing.assert_array_equal(grads[id(b)], expected_b)
    np.testing.assert_array_equal(grads[id(a)], np.zeros((2, 2)))


def test_clip_straight_through():
    x = Tensor(np.array([0.5, 1.05, 2.0, -1.08, -3.0]), requires_grad=True)
    clipped = x.clip_straight_through(-1.0, 1.0, band=0.1)
    np.testing.assert_allclose(clipped.data, [0.5, 1.0, 1.0, -1.0, -1.0])
    grads = backward(clipped.sum(), wrt=[x])
    # inside the band gradients pass; far outside they stop
    np.testing.assert_array_equal(grads[id(x)], [1.0, 1.0, 0.0, 1.0, 0.0])


def test_no_grad_blocks_graph():
    w = Tensor(np.ones((2, 2)), requires_grad=True)
    with no_grad():
        out = (Tensor(np.ones((1, 2))) @ w).sum()
    grads = backward(out, wrt=[w])
    np.testing.assert_array_equal(grads[id(w)], np.zeros((2, 2)))


# ---------------------------------------------------------------------------
# softmax properties


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(-30, 30), min_size=2, max_size=8),
    st.floats(-50, 50),
)
def test_softmax_sums_to_one_and_shift_invariant(logits, shift):
    z = np.array([logits])
    p0 = softmax(Tensor(z)).data
    p1 = softmax(Tensor(z + shift)).data
    assert abs(p0.sum() - 1.0) < 1e-12
    np.testing.assert_allclose(p0, p1, atol=1e-12)


# ---------------------------------------------------------------------------
# adam_step


def test_zero_gradient_leaves_params():
    p = {"w": Tensor(np.array([1.0, -2.0]), requires_grad=True)}
    state = AdamState(lr=0.1)
    adam_step(p, {"w": np.zeros(2)}, state)
    np.testing.assert_array_equal(p["w"].data, [1.0, -2.0])
    assert state.step == 1


def test_constant_gradient_moves_opposite_sign():
    p = {"w": Tensor(np.zeros(2), requires_grad=True)}
    state = AdamState(lr=0.01)
    for _ in range(50):
        adam_step(p, {"w": np.array([1.0, -1.0])}, state)
    assert p["w"].data[0] < 0 < p["w"].data[1]


def test_single_step_matches_hand_computation():
    state = AdamState(lr=0.1)
    p = {"w": Tensor(np.array([0.0]), requires_grad=True)}
    adam_step(p, {"w": np.array([1.0])}, state)
    expected = adam_single_step_delta(0.1, 1.0, state.beta1, state.beta2, state.eps)
    np.testing.assert_allclose(p["w"].data[0], expected, rtol=1e-14)


def test_nan_gradient_aborts_step():
    p = {"w": Tensor(np.array([1.0]), requires_grad=True)}
    state = AdamState()
    with pytest.raises(TrainingFault):
        adam_step(p, {"w": np.array([np.nan])}, state)
    np.testing.assert_array_equal(p["w"].data, [1.0])
    assert state.step == 0


# ---------------------------------------------------------------------------
# gaussian_log_prob


def test_log_prob_at_mean_unit_variance():
    val = gaussian_log_prob(Tensor(np.zeros(1)), Tensor(np.zeros(1)), 1.0)
    np.testing.assert_allclose(val.item(), -0.5 * math.log(2 * math.pi), rtol=1e-12)


def test_log_prob_one_sigma_away():
    val = gaussian_log_prob(Tensor(np.ones(1)), Tensor(np.zeros(1)), 1.0)
    np.testing.assert_allclose(val.item(), -0.5 * math.log(2 * math.pi) - 0.5, rtol=1e-12)


@pytest.mark.parametrize("var", [0.25, 1.0, 3.7])
def test_density_integrates_to_one(var):
    mean = 0.4
    density = lambda x: math.exp(
        gaussian_log_prob(Tensor([x]), Tensor([mean]), var).item()
    )
    total, _ = integrate.quad(density, mean - 40 * math.sqrt(var), mean + 40 * math.sqrt(var))
    assert abs(total - 1.0) < 1e-6


def test_batch_log_prob_rowwise_axis():
    x = np.array([[0.0, 1.0], [2.0, 2.0]])
    mean = np.zeros((2, 2))
    rows = gaussian_log_prob(Tensor(x), Tensor(mean), 1.0, axis=1).data
    expected = -0.5 * (x**2).sum(axis=1) - math.log(2 * math.pi)
    np.testing.assert_allclose(rows, expected, rtol=1e-12)


def test_nonpositive_variance_rejected():
    with pytest.raises(ValueError):
        gaussian_log_prob(Tensor([0.0]), Tensor([0.0]), 0.0)


# ---------------------------------------------------------------------------
# seeded_rng


def test_same_seed_same_draws():
    a = seeded_rng(123).normal(1000)
    b = seeded_rng(123).normal(1000)
    np.testing.assert_array_equal(a, b)


def test_labeled_splits_differ():
    root = seeded_rng(9)
    actor = root.split("actor").normal(100)
    critic = root.split("critic").normal(100)
    assert not np.allclose(actor, critic)


def test_split_does_not_disturb_parent():
    r1 = seeded_rng(4)
    r1.split("x")
    r2 = seeded_rng(4)
    np.testing.assert_array_equal(r1.normal(50), r2.normal(50))


def test_standard_normal_law_of_large_numbers():
    draws = seeded_rng(2024).normal(1_000_000)
    assert abs(draws.mean()) < 0.005


def test_rng_state_roundtrip():
    from hydo.numerics import RngStream

    r = seeded_rng(11)
    r.normal(7)  # advance, leaving buffered values
    state = r.state()
    clone = RngStream.from_state(state)
    np.testing.assert_array_equal(r.normal(33), clone.normal(33))


# ---------------------------------------------------------------------------
# serialization


def test_container_roundtrip_bit_exact(tmp_path):
    rng = seeded_rng(3)
    arrays = {
        "a/w0": rng.normal((4, 3)),
        "scalar": np.array(3.141592653589793),
        "ints": np.arange(5, dtype=np.int64),
    }
    meta = {"step": 12, "note": "x"}
    path = tmp_path / "params.tcf"
    write_container(path, arrays, meta)
    loaded, loaded_meta = read_container(path)
    assert loaded_meta == meta
    for name, arr in arrays.items():
        assert loaded[name].tobytes() == np.ascontiguousarray(arr).tobytes()
        assert loaded[name].shape == arr.shape


def test_container_rejects_garbage(tmp_path):
    from hydo.numerics import ContainerError

    path = tmp_path / "bad.tcf"
    path.write_bytes(b"not a container at all")
    with pytest.raises(ContainerError):
        read_container(path)


# ---------------------------------------------------------------------------
# determinism


def test_bit_identical_parameter_trajectory():
    def run():
        rng = seeded_rng(55)
        p = init_mlp([3, 8, 1], rng, name="n")
        named = p.named_params()
        state = AdamState(lr=1e-3)
        x = rng.normal((16, 3))
        y = rng.normal((16, 1))
        for _ in range(100):
            out = mlp_forward(p, Tensor(x))
            diff = out - Tensor(y)
            loss = (diff * diff).mean()
            adam_step(named, grads_by_name(loss, named), state)
        return np.concatenate([t.data.ravel() for t in named.values()])

    first, second = run(), run()
    assert first.tobytes() == second.tobytes()
