"""Tests for the objective functions and the finite-difference oracle."""

import numpy as np
import pytest

from adafamily import rng
from adafamily.data import Batch
from adafamily.problems import (
    LogisticRegression,
    MLP1,
    Quadratic,
    Rosenbrock2D,
    default_problems_for_gradcheck,
    eval_loss_grad,
    finite_diff_grad,
    init_params,
    relative_error,
    spd_quadratic,
)


def _toy_batch():
    # 4 linearly separable points in 2-D, two classes
    return Batch(
        features=np.array([[1.0, 1.0], [2.0, 1.0], [-1.0, -1.0], [-2.0, -1.0]]),
        labels=np.array([0, 0, 1, 1], dtype=np.int64),
    )


# -------------------------------------------------------------------------
# quadratic
# -------------------------------------------------------------------------


def test_quadratic_identity_values():
    # f = 0.5*(3^2 + 4^2) = 12.5, grad = theta
    q = Quadratic(np.eye(2), np.zeros(2))
    loss, grad = eval_loss_grad(q, np.array([3.0, 4.0]))
    assert loss == 12.5
    assert grad.tolist() == [3.0, 4.0]


def test_quadratic_minimum_is_floor():
    q = spd_quadratic(7, 6, 30.0)
    at_min, grad_at_min = eval_loss_grad(q, q.optimum)
    assert at_min == pytest.approx(q.min_loss, abs=1e-12)
    assert np.max(np.abs(grad_at_min)) < 1e-10
    for i in range(20):
        theta = rng.normals(rng.derive_key(77, i), q.dim)
        assert q.loss(theta) >= q.min_loss - 1e-12


def test_quadratic_validation():
    with pytest.raises(ValueError):
        Quadratic(np.ones((2, 3)), np.zeros(2))
    with pytest.raises(ValueError):
        Quadratic(np.array([[1.0, 2.0], [0.0, 1.0]]), np.zeros(2))
    with pytest.raises((ValueError, np.linalg.LinAlgError)):
        Quadratic(np.diag([1.0, -1.0]), np.zeros(2))
    with pytest.raises(ValueError):
        Quadratic(np.eye(2), np.zeros(3))


def test_quadratic_starts_at_origin():
    q = spd_quadratic(1, 4, 10.0)
    assert init_params(q, 0).tolist() == [0.0] * 4
    assert init_params(q, 99).tolist() == [0.0] * 4


def test_spd_quadratic_spectrum_and_determinism():
    q = spd_quadratic(42, 10, 100.0)
    eigs = np.linalg.eigvalsh(q.matrix)
    assert eigs[0] > 0.0
    assert eigs[-1] / eigs[0] == pytest.approx(100.0, rel=1e-9)
    q2 = spd_quadratic(42, 10, 100.0)
    assert np.array_equal(q.matrix, q2.matrix)
    assert np.array_equal(q.rhs, q2.rhs)
    q3 = spd_quadratic(43, 10, 100.0)
    assert not np.array_equal(q.matrix, q3.matrix)


# -------------------------------------------------------------------------
# rosenbrock
# -------------------------------------------------------------------------


def test_rosenbrock_global_minimum():
    r = Rosenbrock2D()
    loss, grad = eval_loss_grad(r, np.array([1.0, 1.0]))
    assert loss == 0.0
    assert grad.tolist() == [0.0, 0.0]


def test_rosenbrock_gradient_at_origin():
    # f = (1-x)^2 + 100(y-x^2)^2; df/dx(0,0) = -2, df/dy(0,0) = 0
    r = Rosenbrock2D()
    loss, grad = eval_loss_grad(r, np.zeros(2))
    assert loss == 1.0
    assert grad.tolist() == [-2.0, 0.0]
    fd = finite_diff_grad(r, np.zeros(2))
    assert relative_error(grad, fd) < 1e-5


def test_rosenbrock_fixed_start():
    r = Rosenbrock2D()
    for seed in (0, 1, 12345):
        assert init_params(r, seed).tolist() == [-1.2, 1.0]


def test_rosenbrock_nonnegative():
    r = Rosenbrock2D()
    pts = rng.normals(55, 100).reshape(50, 2) * 2.0
    for p in pts:
        assert r.loss(p) >= 0.0


# -------------------------------------------------------------------------
# classifiers
# -------------------------------------------------------------------------


def test_logreg_zero_params_gives_log_k():
    # all logits equal => softmax is uniform => loss = ln(num_classes)
    lr = LogisticRegression(num_features=2, num_classes=2)
    loss, _ = eval_loss_grad(lr, np.zeros(lr.dim), _toy_batch())
    assert loss == pytest.approx(np.log(2.0), rel=1e-14)

    lr3 = LogisticRegression(num_features=4, num_classes=3)
    batch = Batch(
        features=rng.normals(66, 24).reshape(6, 4),
        labels=np.array([0, 1, 2, 0, 1, 2], dtype=np.int64),
    )
    loss, _ = eval_loss_grad(lr3, np.zeros(lr3.dim), batch)
    assert loss == pytest.approx(np.log(3.0), rel=1e-14)


def test_logreg_gradient_vs_oracle_at_zero():
    lr = LogisticRegression(num_features=2, num_classes=2)
    _, grad = eval_loss_grad(lr, np.zeros(lr.dim), _toy_batch())
    fd = finite_diff_grad(lr, np.zeros(lr.dim), _toy_batch())
    assert relative_error(grad, fd) < 1e-8


def test_cross_entropy_nonnegative():
    lr = LogisticRegression(num_features=3, num_classes=4)
    for i in range(10):
        params = rng.normals(rng.derive_key(67, i), lr.dim)
        batch = Batch(
            features=rng.normals(rng.derive_key(68, i), 15).reshape(5, 3),
            labels=(rng.random_u64(rng.derive_key(69, i), 5) % np.uint64(4)).astype(
                np.int64
            ),
        )
        assert lr.loss(params, batch) >= 0.0


def test_softmax_is_stable_at_huge_logits():
    lr = LogisticRegression(num_features=1, num_classes=2)
    batch = Batch(features=np.array([[1000.0]]), labels=np.array([0], dtype=np.int64))
    params = np.array([1.0, -1.0, 0.0, 0.0])  # W = [[1], [-1]], b = 0
    loss, grad = eval_loss_grad(lr, params, batch)
    assert np.isfinite(loss)
    assert np.all(np.isfinite(grad))
    assert loss == pytest.approx(0.0, abs=1e-12)


def test_mlp_parameter_layout():
    # layout: W1 (h x p) row-major, b1 (h), W2 (k x h) row-major, b2 (k)
    m = MLP1(num_features=2, num_classes=2, hidden=3)
    assert m.dim == 3 * 2 + 3 + 2 * 3 + 2
    params = np.arange(m.dim, dtype=np.float64)
    w1, b1, w2, b2 = m._unpack(params)
    assert w1.tolist() == [[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]]
    assert b1.tolist() == [6.0, 7.0, 8.0]
    assert w2.tolist() == [[9.0, 10.0, 11.0], [12.0, 13.0, 14.0]]
    assert b2.tolist() == [15.0, 16.0]


def test_mlp_rejects_unknown_activation():
    with pytest.raises(ValueError):
        MLP1(num_features=2, num_classes=2, hidden=3, activation="relu")


def test_init_params_seeded_and_scaled():
    lr = LogisticRegression(num_features=16, num_classes=3)
    a = init_params(lr, 5)
    b = init_params(lr, 5)
    c = init_params(lr, 6)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert np.max(np.abs(a)) <= 1.0 / 4.0  # 1/sqrt(16)

    m = MLP1(num_features=16, num_classes=3, hidden=4)
    p = init_params(m, 7)
    n1 = 4 * 16 + 4
    assert np.max(np.abs(p[:n1])) <= 1.0 / 4.0  # fan_in 16
    assert np.max(np.abs(p[n1:])) <= 1.0 / 2.0  # fan_in 4
    assert np.max(np.abs(p[n1:])) > 1.0 / 4.0  # actually uses the larger scale


# -------------------------------------------------------------------------
# eval validation
# -------------------------------------------------------------------------


def test_dimension_mismatch_rejected():
    q = Quadratic(np.eye(2), np.zeros(2))
    with pytest.raises(ValueError):
        q.loss_grad(np.zeros(3))


def test_batch_presence_rules():
    q = Quadratic(np.eye(2), np.zeros(2))
    with pytest.raises(ValueError):
        q.loss_grad(np.zeros(2), _toy_batch())
    lr = LogisticRegression(num_features=2, num_classes=2)
    with pytest.raises(ValueError):
        lr.loss_grad(np.zeros(lr.dim), None)


def test_batch_feature_width_and_label_range_checked():
    lr = LogisticRegression(num_features=3, num_classes=2)
    bad_width = Batch(features=np.zeros((2, 2)), labels=np.zeros(2, dtype=np.int64))
    with pytest.raises(ValueError):
        lr.loss_grad(np.zeros(lr.dim), bad_width)
    bad_labels = Batch(
        features=np.zeros((2, 3)), labels=np.array([0, 2], dtype=np.int64)
    )
    with pytest.raises(ValueError):
        lr.loss_grad(np.zeros(lr.dim), bad_labels)


def test_finite_diff_requires_positive_h():
    q = Quadratic(np.eye(2), np.zeros(2))
    with pytest.raises(ValueError):
        finite_diff_grad(q, np.zeros(2), h=0.0)


# -------------------------------------------------------------------------
# batch-mean semantics
# -------------------------------------------------------------------------


def test_batch_mean_linearity():
    # whole-batch loss/grad equals the average of per-example ones
    m = MLP1(num_features=3, num_classes=2, hidden=4)
    params = init_params(m, 3)
    feats = rng.normals(70, 18).reshape(6, 3)
    labels = (rng.random_u64(71, 6) % np.uint64(2)).astype(np.int64)
    whole = Batch(features=feats, labels=labels)
    loss_w, grad_w = m.loss_grad(params, whole)
    losses, grads = [], []
    for i in range(6):
        li, gi = m.loss_grad(
            params, Batch(features=feats[i : i + 1], labels=labels[i : i + 1])
        )
        losses.append(li)
        grads.append(gi)
    assert loss_w == pytest.approx(np.mean(losses), rel=1e-12)
    np.testing.assert_allclose(grad_w, np.mean(grads, axis=0), rtol=1e-12, atol=1e-15)


def test_permutation_invariance():
    lr = LogisticRegression(num_features=4, num_classes=3)
    params = init_params(lr, 11)
    feats = rng.normals(72, 40).reshape(10, 4)
    labels = (rng.random_u64(73, 10) % np.uint64(3)).astype(np.int64)
    base_loss, base_grad = lr.loss_grad(params, Batch(features=feats, labels=labels))
    perm = rng.permutation(74, 10)
    shuf_loss, shuf_grad = lr.loss_grad(
        params, Batch(features=feats[perm].copy(), labels=labels[perm].copy())
    )
    assert abs(base_loss - shuf_loss) < 1e-12
    assert np.max(np.abs(base_grad - shuf_grad)) < 1e-12


# -------------------------------------------------------------------------
# the full gradient check
# -------------------------------------------------------------------------


def test_gradient_check_all_kinds_20_draws():
    worst = 0.0
    kinds = []
    for problem, pairs in default_problems_for_gradcheck(draws=20):
        kinds.append(problem.kind)
        for params, batch in pairs:
            _, analytic = problem.loss_grad(params, batch)
            numeric = finite_diff_grad(problem, params, batch)
            worst = max(worst, relative_error(analytic, numeric))
    assert kinds == ["quadratic", "rosenbrock", "logreg", "mlp1"]
    assert worst < 1e-5


def test_quadratic_fd_is_tight():
    # central differences are exact for quadratics up to roundoff
    q = Quadratic(np.eye(3), np.array([1.0, -2.0, 0.5]))
    theta = np.array([0.3, -1.0, 2.0])
    _, analytic = q.loss_grad(theta)
    fd = finite_diff_grad(q, theta)
    assert relative_error(analytic, fd) < 1e-8


def test_relative_error_definition():
    assert relative_error(np.array([1.0, 2.0]), np.array([1.0, 2.0])) == 0.0
    # |3-1| / max(3,1,1) = 2/3
    assert relative_error(np.array([3.0]), np.array([1.0])) == pytest.approx(2.0 / 3.0)
    # floor kicks in for small values: |1e-9 - 0| / 1.0
    assert relative_error(np.array([1e-9]), np.array([0.0])) == pytest.approx(1e-9)
