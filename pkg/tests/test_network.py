"""Network parameters, forward contracts, gradients, model files."""

from __future__ import annotations

import json

import numpy as np
import pytest

from etadm.encoders import ContextEncoderConfig
from etadm.errors import DimensionMismatch, LabelOutOfRange, SchemaError
from etadm.network import (
    INIT_SCALE,
    ModelParams,
    init_params,
    load_model,
    loss_and_grads,
    loss_and_grads_arrays,
    predict,
    predict_batch,
    save_model,
)

from oracles import finite_diff_grads, max_relative_error, naive_forward

SMALL = ContextEncoderConfig(dim=6)


def small_params(seed=0, n_actions=4, d_hidden=5):
    return init_params(n_actions, SMALL, d_hidden=d_hidden, seed=seed)


def test_init_is_seeded_and_bounded():
    a, b = small_params(seed=3), small_params(seed=3)
    for name in ("W_fuse", "b_fuse", "W_pred", "b_pred"):
        arr = getattr(a, name)
        assert np.array_equal(arr, getattr(b, name))
        assert np.all(np.abs(arr) <= INIT_SCALE)
    assert not np.array_equal(a.W_fuse, small_params(seed=4).W_fuse)


def test_init_draw_order_is_pinned():
    params = small_params(seed=7)
    rng = np.random.Generator(np.random.PCG64(7))
    d_in = SMALL.dim + 64
    assert np.array_equal(params.W_fuse, rng.uniform(-INIT_SCALE, INIT_SCALE, (5, d_in)))
    assert np.array_equal(params.b_fuse, rng.uniform(-INIT_SCALE, INIT_SCALE, 5))
    assert np.array_equal(params.W_pred, rng.uniform(-INIT_SCALE, INIT_SCALE, (4, 5)))
    assert np.array_equal(params.b_pred, rng.uniform(-INIT_SCALE, INIT_SCALE, 4))


def test_init_validation():
    with pytest.raises(SchemaError):
        init_params(1, SMALL)
    with pytest.raises(SchemaError):
        init_params(4, SMALL, d_hidden=0)


def test_params_shape_validation():
    good = small_params()
    with pytest.raises(DimensionMismatch):
        ModelParams(SMALL, good.W_fuse, np.zeros(3), good.W_pred, good.b_pred)
    with pytest.raises(DimensionMismatch):
        ModelParams(SMALL, good.W_fuse, good.b_fuse, np.zeros((4, 9)), good.b_pred)
    with pytest.raises(DimensionMismatch):
        ModelParams(
            ContextEncoderConfig(dim=99), good.W_fuse, good.b_fuse, good.W_pred, good.b_pred
        )
    bad = good.W_fuse.copy()
    bad[0, 0] = np.nan
    with pytest.raises(SchemaError):
        ModelParams(SMALL, bad, good.b_fuse, good.W_pred, good.b_pred)


def test_predict_matches_naive_forward():
    rng = np.random.Generator(np.random.PCG64(21))
    for trial in range(10):
        params = small_params(seed=trial)
        ctx = rng.normal(size=6)
        st = rng.integers(0, 2, size=64).astype(float)
        got = predict(ctx, st, params)
        expected = naive_forward(np.concatenate([ctx, st]), params)
        assert np.allclose(got, expected, atol=1e-12)


def test_predict_dimension_errors():
    params = small_params()
    with pytest.raises(DimensionMismatch):
        predict(np.zeros(7), np.zeros(64), params)
    with pytest.raises(DimensionMismatch):
        predict(np.zeros(6), np.zeros(63), params)
    with pytest.raises(DimensionMismatch):
        predict_batch(np.zeros((3, 10)), params)


def test_softmax_contracts_sample():
    rng = np.random.Generator(np.random.PCG64(22))
    params = small_params(seed=1)
    X = rng.normal(size=(100, params.d_in)) * 10.0
    P = predict_batch(X, params)
    assert np.all(P >= 0.0)
    assert np.max(np.abs(P.sum(axis=1) - 1.0)) <= 1e-6
    # shifting every logit equally must not move the argmax: adding a
    # constant column to b_pred realizes the shift
    shifted = ModelParams(
        SMALL, params.W_fuse, params.b_fuse, params.W_pred, params.b_pred + 123.0
    )
    assert np.array_equal(
        np.argmax(P, axis=1), np.argmax(predict_batch(X, shifted), axis=1)
    )


def test_uniform_probabilities_at_zero_weights():
    params = ModelParams(
        SMALL, np.zeros((5, 70)), np.zeros(5), np.zeros((4, 5)), np.zeros(4)
    )
    P = predict(np.ones(6), np.ones(64), params)
    assert np.allclose(P, 0.25)


def test_gradients_match_finite_differences():
    rng = np.random.Generator(np.random.PCG64(23))
    for trial in range(3):
        params = init_params(3, ContextEncoderConfig(dim=4), d_hidden=4, seed=trial)
        # resample inputs that park a pre-activation on the relu kink,
        # where the central difference straddles the nondifferentiability
        for _ in range(50):
            X = rng.normal(size=(5, params.d_in))
            if np.min(np.abs(X @ params.W_fuse.T + params.b_fuse)) > 5e-3:
                break
        labels = rng.integers(0, 3, size=5).astype(np.intp)
        _, analytic = loss_and_grads_arrays(X, labels, params)
        numeric = finite_diff_grads(X, labels, params)
        assert max_relative_error(analytic, numeric) < 1e-4


def test_loss_and_grads_validation():
    params = small_params()
    X = np.zeros((2, params.d_in))
    with pytest.raises(LabelOutOfRange):
        loss_and_grads_arrays(X, np.array([0, 9]), params)
    with pytest.raises(LabelOutOfRange):
        loss_and_grads_arrays(X, np.array([-1, 0]), params)
    with pytest.raises(DimensionMismatch):
        loss_and_grads_arrays(np.zeros((0, params.d_in)), np.zeros(0, dtype=int), params)
    with pytest.raises(DimensionMismatch):
        loss_and_grads_arrays(X, np.array([0]), params)
    with pytest.raises(DimensionMismatch):
        loss_and_grads([], params)


def test_model_file_round_trip(tmp_path):
    params = small_params(seed=9)
    path = tmp_path / "model.json"
    save_model(params, path)
    loaded = load_model(path)
    assert loaded.encoder == params.encoder
    for name in ("W_fuse", "b_fuse", "W_pred", "b_pred"):
        assert np.array_equal(getattr(loaded, name), getattr(params, name))


def test_model_file_rejects_garbage(tmp_path):
    path = tmp_path / "model.json"
    path.write_text("not json")
    with pytest.raises(SchemaError):
        load_model(path)
    path.write_text(json.dumps({"format_version": 99}))
    with pytest.raises(SchemaError):
        load_model(path)
    doc = json.loads(open_saved(tmp_path))
    doc["dims"]["d_hidden"] = 77
    path.write_text(json.dumps(doc))
    with pytest.raises(SchemaError):
        load_model(path)


def open_saved(tmp_path):
    path = tmp_path / "good.json"
    save_model(small_params(), path)
    return path.read_text()
