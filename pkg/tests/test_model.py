import numpy as np
import pytest

import oracles
from freqfed.model import (
    CheckpointError,
    featurize,
    init_params,
    load_checkpoint,
    loss_and_grad,
    num_params,
    predict,
    save_checkpoint,
    sgd_step,
)


def test_constant_image_features():
    f = featurize(np.full((3, 5, 6), 0.37))
    assert f.shape == (6, 5, 6)
    np.testing.assert_allclose(f, 0.37, atol=1e-15)


def test_interior_mean(rng):
    x = rng.random((1, 5, 5))
    assert featurize(x)[1, 2, 2] == pytest.approx(x[0, 1:4, 1:4].mean(), abs=1e-15)


def test_features_match_loop_oracle(rng):
    x = rng.random((2, 5, 5))
    f = featurize(x)
    np.testing.assert_array_equal(f[:2], x)
    np.testing.assert_allclose(f[2:], oracles.box_mean(x), atol=1e-15)


def test_predict_zero_and_bias(rng):
    x = rng.random((3, 4, 4))
    assert np.all(predict(np.zeros(7), x) == 0.5)
    w = np.zeros(7)
    w[-1] = 40.0
    assert np.all(predict(w, x) > 1 - 1e-12)


def test_predict_matches_scalar_oracle(rng):
    for _ in range(5):
        x, w = rng.random((3, 6, 5)), rng.standard_normal(7)
        np.testing.assert_allclose(predict(w, x), oracles.pixel_prob(w, x), atol=1e-12)


def test_dimension_mismatch(rng):
    with pytest.raises(ValueError):
        predict(np.zeros(5), rng.random((3, 4, 4)))
    with pytest.raises(ValueError):
        loss_and_grad(np.zeros(7), rng.random((3, 4, 4)), np.zeros((4, 5)))


def test_confident_correct_prediction_has_small_loss():
    x = np.zeros((1, 4, 4))
    x[0, :2] = 1.0
    y = (x[0] > 0.5).astype(float)
    w = np.array([40.0, 0.0, -20.0])
    loss, grad = loss_and_grad(w, x, y)
    assert loss < 1e-6 and np.max(np.abs(grad)) < 1e-6


def test_prox_at_center_contributes_nothing(rng):
    x, y, w = rng.random((2, 4, 4)), rng.random((4, 4)) > 0.5, rng.standard_normal(5)
    base = loss_and_grad(w, x, y)
    prox = loss_and_grad(w, x, y, prox_center=w.copy(), mu=5.0)
    assert base[0] == prox[0]
    assert np.array_equal(base[1], prox[1])


def test_mu_requires_center(rng):
    with pytest.raises(ValueError):
        loss_and_grad(np.zeros(3), rng.random((1, 3, 3)), np.zeros((3, 3)), mu=0.3)
    with pytest.raises(ValueError):
        loss_and_grad(np.zeros(3), rng.random((1, 3, 3)), np.zeros((3, 3)), mu=-1)


@pytest.mark.parametrize("mu", [0.0, 0.3])
def test_gradient_matches_finite_differences(rng, mu):
    for _ in range(20):
        C = int(rng.integers(1, 4))
        x = rng.random((C, 5, 6))
        y = (rng.random((5, 6)) > 0.6).astype(float)
        w = rng.standard_normal(num_params(C))
        center = rng.standard_normal(w.size) if mu else None
        _, g = loss_and_grad(w, x, y, center, mu)
        num = oracles.central_diff(lambda p: loss_and_grad(p, x, y, center, mu)[0], w)
        assert np.max(np.abs(g - num) / (1 + np.abs(num))) < 1e-5


def test_loss_invariant_under_pixel_permutation(rng):
    x, y, w = rng.random((2, 6, 6)), (rng.random((6, 6)) > 0.5), rng.standard_normal(5)
    feats = featurize(x)
    perm = rng.permutation(36)
    pf = feats.reshape(4, 36)[:, perm].reshape(4, 6, 6)
    py = y.ravel()[perm].reshape(6, 6)
    a = loss_and_grad(w, mask=y, feats=feats)
    b = loss_and_grad(w, mask=py, feats=pf)
    assert a[0] == pytest.approx(b[0], rel=1e-13)
    np.testing.assert_allclose(a[1], b[1], rtol=1e-12, atol=1e-15)


def test_sgd_step_examples(rng):
    w = rng.standard_normal(5)
    assert np.array_equal(sgd_step(w, np.zeros(5), 0.1), w)
    assert np.all(sgd_step(w, w, 1.0) == 0)
    with pytest.raises(ValueError):
        sgd_step(w, w, 0.0)


def test_small_lr_descent_is_monotone(rng):
    x = rng.random((3, 8, 8))
    y = (x[0] > 0.5).astype(float)
    w = np.zeros(7)
    losses = []
    for _ in range(100):
        loss, g = loss_and_grad(w, x, y)
        losses.append(loss)
        w = sgd_step(w, g, 0.2)
    assert all(b <= a for a, b in zip(losses, losses[1:]))
    assert losses[-1] < losses[0]


def test_init_params_deterministic():
    assert np.array_equal(init_params(3, 5), init_params(3, 5))
    assert not np.array_equal(init_params(3, 5), init_params(3, 6))
    assert init_params(3, 5).shape == (7,)


def test_checkpoint_round_trip(tmp_path, rng):
    w = rng.standard_normal(7)
    path = tmp_path / "m.fdgm"
    save_checkpoint(path, w)
    raw = path.read_bytes()
    assert raw[:4] == b"FDGM" and int.from_bytes(raw[6:10], "little") == 7 and len(raw) == 10 + 56
    assert load_checkpoint(path).tobytes() == w.tobytes()


@pytest.mark.parametrize("mutate", [lambda b: b[:5], lambda b: b"FDGX" + b[4:], lambda b: b[:-8], lambda b: b + b"1"])
def test_corrupt_checkpoint(tmp_path, mutate):
    path = tmp_path / "m.fdgm"
    save_checkpoint(path, np.arange(3.0))
    path.write_bytes(mutate(path.read_bytes()))
    with pytest.raises(CheckpointError):
        load_checkpoint(path)
