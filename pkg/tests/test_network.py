"""Network tests: forward pass, summary prediction, gradients, weight files."""

import numpy as np
import pytest

from lerpa.cards import InputError
from lerpa.network import INIT_SCALE, Mlp, scalar_prediction

from oracle_helpers import forward_pure_python, max_gradient_error


def random_input(rng, dim=81):
    return rng.integers(0, 2, size=dim).astype(float)


class TestInit:
    def test_deterministic_for_seed(self):
        a = Mlp.init(np.random.default_rng(1))
        b = Mlp.init(np.random.default_rng(1))
        assert np.array_equal(a.w1, b.w1)
        assert np.array_equal(a.w2, b.w2)

    def test_weight_range_and_zero_biases(self):
        mlp = Mlp.init(np.random.default_rng(2))
        assert np.all(np.abs(mlp.w1) <= INIT_SCALE)
        assert np.all(np.abs(mlp.w2) <= INIT_SCALE)
        assert not mlp.b1.any()
        assert not mlp.b2.any()

    def test_default_dimensions(self):
        mlp = Mlp.init(np.random.default_rng(3))
        assert mlp.input_dim == 81
        assert mlp.hidden_dim == 50
        assert mlp.n_outputs == 4

    def test_bad_dimensions_rejected(self):
        with pytest.raises(InputError):
            Mlp.init(np.random.default_rng(4), hidden_dim=0)


class TestForward:
    def test_zero_weights_give_half_activations(self):
        mlp = Mlp(np.zeros((50, 81)), np.zeros(50), np.zeros((4, 50)), np.zeros(4))
        trace = mlp.forward(np.ones(81))
        assert np.allclose(trace.h, 0.5)
        assert np.array_equal(trace.y, np.zeros(4))

    def test_hidden_activations_in_open_interval(self):
        rng = np.random.default_rng(5)
        mlp = Mlp.init(rng)
        for _ in range(20):
            trace = mlp.forward(random_input(rng))
            assert np.all(trace.h > 0.0)
            assert np.all(trace.h < 1.0)

    def test_dimension_mismatch_rejected(self):
        mlp = Mlp.init(np.random.default_rng(6))
        with pytest.raises(ValueError):
            mlp.forward(np.zeros(80))

    def test_matches_pure_python_reimplementation(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            mlp = Mlp.init(rng, hidden_dim=11)
            x = random_input(rng)
            expected = forward_pure_python(mlp, x)
            got = mlp.forward(x).y
            assert np.max(np.abs(got - np.array(expected))) < 1e-12

    def test_deterministic(self):
        rng = np.random.default_rng(8)
        mlp = Mlp.init(rng)
        x = random_input(rng)
        assert np.array_equal(mlp.forward(x).y, mlp.forward(x).y)

    def test_outputs_affine_in_output_weights(self):
        # With the hidden layer fixed, blending two output-weight settings
        # blends the outputs: superposition holds exactly.
        rng = np.random.default_rng(13)
        mlp = Mlp.init(rng)
        x = random_input(rng)
        w2_a = rng.uniform(-1, 1, size=mlp.w2.shape)
        w2_b = rng.uniform(-1, 1, size=mlp.w2.shape)
        ys = []
        for w2 in (w2_a, w2_b, 0.5 * (w2_a + w2_b)):
            mlp.w2 = w2
            ys.append(mlp.forward(x).y)
        assert np.allclose(ys[2], 0.5 * (ys[0] + ys[1]), atol=1e-12)


class TestScalarPrediction:
    def test_pinned_values(self):
        assert scalar_prediction(np.array([1.0, 0, 0, 0])) == 3.0
        assert scalar_prediction(np.array([0, 0, 0, 1.0])) == -3.0
        assert scalar_prediction(np.array([0.25, 0.25, 0.25, 0.25])) == 0.75

    def test_clamp_mode(self):
        y = np.array([1.2, -0.1, 0.5, 2.0])
        assert scalar_prediction(y, clamp=True) == pytest.approx(3 + 0 + 0.5 - 3)
        assert scalar_prediction(y) == pytest.approx(3 * 1.2 - 0.2 + 0.5 - 6.0)


class TestGradients:
    def test_output_layer_structure(self):
        rng = np.random.default_rng(9)
        mlp = Mlp.init(rng)
        trace = mlp.forward(random_input(rng))
        grads = mlp.grad_outputs(trace)
        for k in range(4):
            assert np.array_equal(grads.w2_row[k], trace.h)
        full_w2 = grads.full_w2()
        for k in range(4):
            for m in range(4):
                if m != k:
                    assert not full_w2[k, m].any()
        assert np.array_equal(grads.full_b2(), np.eye(4))

    def test_finite_difference_agreement(self):
        # The full 100-pair battery runs in the acceptance suite; this is a
        # faster smoke check on small networks.
        rng = np.random.default_rng(10)
        for _ in range(3):
            mlp = Mlp.init(rng, input_dim=9, hidden_dim=6)
            x = rng.integers(0, 2, size=9).astype(float)
            assert max_gradient_error(mlp, x) < 1e-4


class TestWeightFile:
    def test_round_trip_exact(self, tmp_path):
        mlp = Mlp.init(np.random.default_rng(11))
        path = tmp_path / "weights.txt"
        mlp.save(path)
        loaded = Mlp.load(path)
        assert np.array_equal(loaded.w1, mlp.w1)
        assert np.array_equal(loaded.b1, mlp.b1)
        assert np.array_equal(loaded.w2, mlp.w2)
        assert np.array_equal(loaded.b2, mlp.b2)

    def test_missing_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("not a weight file\n1 2 3\n")
        with pytest.raises(InputError):
            Mlp.load(path)

    def test_truncated_rejected(self, tmp_path):
        mlp = Mlp.init(np.random.default_rng(12), input_dim=4, hidden_dim=3)
        path = tmp_path / "w.txt"
        mlp.save(path)
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-2]))
        with pytest.raises(InputError):
            Mlp.load(path)
