import numpy as np
import pytest

from radpipe.nn import Adam, Mlp, relu, sigmoid, softplus


class TestActivations:
    def test_relu(self):
        assert np.array_equal(relu(np.array([-2.0, 0.0, 3.0])), [0.0, 0.0, 3.0])

    def test_softplus_stable_and_positive(self):
        x = np.array([-800.0, -1.0, 0.0, 1.0, 800.0])
        out = softplus(x)
        assert np.all(np.isfinite(out))
        assert np.all(out[1:] > 0)
        assert out[1] == pytest.approx(np.log1p(np.exp(-1.0)))
        assert out[2] == pytest.approx(np.log(2.0))
        assert out[4] == pytest.approx(800.0)

    def test_sigmoid_stable(self):
        x = np.array([-800.0, 0.0, 800.0])
        out = sigmoid(x)
        assert out[0] == 0.0 and out[1] == 0.5 and out[2] == 1.0

    def test_sigmoid_is_softplus_derivative(self):
        x = np.linspace(-5, 5, 41)
        eps = 1e-6
        numeric = (softplus(x + eps) - softplus(x - eps)) / (2 * eps)
        assert np.allclose(sigmoid(x), numeric, atol=1e-8)


class TestMlp:
    def test_shapes_and_forward(self):
        mlp = Mlp([3, 8, 2], np.random.default_rng(0))
        out, cache = mlp.forward(np.ones((5, 3)))
        assert out.shape == (5, 2)
        assert len(cache) == 3

    def test_hidden_layers_are_relu(self):
        mlp = Mlp([2, 4, 1], np.random.default_rng(1))
        _, cache = mlp.forward(np.random.default_rng(2).standard_normal((10, 2)))
        assert np.all(cache[1] >= 0)

    def test_backward_matches_finite_differences(self):
        from gradcheck import numeric_grads, relative_error

        rng = np.random.default_rng(3)
        mlp = Mlp([4, 6, 3], rng)
        x = rng.standard_normal((7, 4))
        w = rng.standard_normal((7, 3))  # fixed linear readout weights

        def loss():
            out, _ = mlp.forward(x)
            return float(np.sum(out * w))

        out, cache = mlp.forward(x)
        _, analytic = mlp.backward(cache, w)
        numeric = numeric_grads(loss, mlp.params)
        assert relative_error(analytic, numeric) < 1e-7

    def test_set_params_copies(self):
        mlp = Mlp([2, 3, 1], np.random.default_rng(4))
        snapshot = [p.copy() for p in mlp.params]
        mlp.set_params(snapshot)
        mlp.weights[0][0, 0] += 1.0
        assert snapshot[0][0, 0] != mlp.weights[0][0, 0]


class TestAdam:
    def test_minimizes_quadratic(self):
        x = np.array([5.0, -3.0])
        opt = Adam(lr=0.1)
        for _ in range(500):
            opt.step([x], [2.0 * x])
        assert np.abs(x).max() < 1e-3

    def test_state_tracks_parameter_order(self):
        a, b = np.array([1.0]), np.array([10.0])
        opt = Adam(lr=0.5)
        opt.step([a, b], [np.array([1.0]), np.array([0.0])])
        assert a[0] != 1.0
        assert b[0] == 10.0
