import numpy as np
import pytest

from moe_offload.errors import ShapeError
from moe_offload.nn import Adam, Mlp, Sgd


def numeric_grads(net, x, upstream, h=1e-5):
    """Central differences of sum(upstream * net(x)) w.r.t. every parameter."""
    out = []
    for p in net.params:
        g = np.zeros_like(p)
        for idx in np.ndindex(p.shape):
            old = p[idx]
            p[idx] = old + h
            plus = np.sum(upstream * net.forward(x))
            p[idx] = old - h
            minus = np.sum(upstream * net.forward(x))
            p[idx] = old
            g[idx] = (plus - minus) / (2 * h)
        out.append(g)
    return out


def random_net(rng):
    depth = rng.integers(1, 4)
    sizes = [int(rng.integers(1, 6)) for _ in range(depth + 1)]
    net = Mlp(sizes, rng)
    for b in net.biases:
        b[...] = rng.normal(0, 0.5, b.shape)
    return net


def test_zero_net_outputs_zero():
    net = Mlp([4, 3, 2])
    assert np.array_equal(net.forward(np.arange(4.0)), np.zeros(2))


def test_one_by_one_linear():
    net = Mlp([1, 1])
    net.weights[0][0, 0] = 2.0
    net.biases[0][0] = 1.0
    assert net.forward(np.array([3.0]))[0] == 7.0
    grads = net.backward(np.array([1.0]))
    assert grads[0][0, 0] == 3.0
    assert grads[1][0] == 1.0


def test_relu_clamps_hidden():
    net = Mlp([1, 1, 1])
    net.weights[0][0, 0] = -1.0
    net.weights[1][0, 0] = 1.0
    net.forward(np.array([5.0]))
    assert net._cache[1][0, 0] == 0.0


def test_zero_upstream_gives_zero_grads():
    rng = np.random.default_rng(0)
    net = Mlp([5, 4, 3], rng)
    net.forward(rng.normal(size=(7, 5)))
    for g in net.backward(np.zeros((7, 3))):
        assert not g.any()


def test_shape_errors():
    net = Mlp([3, 2])
    with pytest.raises(ShapeError):
        net.forward(np.zeros(4))
    net.forward(np.zeros(3))
    with pytest.raises(ShapeError):
        net.backward(np.zeros(3))
    with pytest.raises(ShapeError):
        Mlp([3])


def test_batch_matches_single_rows():
    rng = np.random.default_rng(3)
    net = Mlp([6, 8, 4], rng)
    x = rng.normal(size=(5, 6))
    batch = net.forward(x)
    for i in range(5):
        np.testing.assert_allclose(net.forward(x[i]), batch[i], rtol=1e-13)


@pytest.mark.parametrize("seed", range(100))
def test_gradients_match_finite_differences(seed):
    rng = np.random.default_rng(seed)
    net = random_net(rng)
    x = rng.normal(size=(int(rng.integers(1, 4)), net.layer_sizes[0]))
    upstream = rng.normal(size=(x.shape[0], net.layer_sizes[-1]))
    net.forward(x)
    analytic = net.backward(upstream)
    numeric = numeric_grads(net, x, upstream)
    for a, n in zip(analytic, numeric):
        np.testing.assert_allclose(a, n, rtol=1e-4, atol=1e-8)


def test_copy_is_independent():
    net = Mlp([2, 2], np.random.default_rng(0))
    clone = net.copy()
    clone.weights[0] += 1.0
    assert not np.array_equal(clone.weights[0], net.weights[0])


def test_sgd_step():
    p = [np.array([1.0, 2.0])]
    Sgd(p, 0.5).step([np.array([2.0, -2.0])])
    assert list(p[0]) == [0.0, 3.0]


def test_adam_first_step_moves_by_lr():
    p = [np.array([1.0, -1.0])]
    Adam(p, 0.1).step([np.array([3.0, -0.5])])
    np.testing.assert_allclose(p[0], [0.9, -0.9], rtol=1e-6)
