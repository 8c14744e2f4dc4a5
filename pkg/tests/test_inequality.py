import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from homofair.inequality import (DEFAULT, NORMVAR, EntropyConfig, Kernel, KernelError,
                                 blend_inequality, decompose, ge_index, ge_weighted,
                                 ground_truth_kernel, group_free_inequality, partition_between,
                                 prop2_bounds, smooth, std_dispersion)

from scenarios import column_regular_kernel, confounded_kernel, two_group_labels

positive = arrays(np.float64, st.integers(1, 30),
                  elements=st.floats(0.01, 100.0, allow_nan=False, allow_infinity=False))
alphas = st.sampled_from([-1.0, 0.5, 2.0, 3.0])


def brute_ge(x, alpha):
    x = np.asarray(x, float)
    mu = x.mean()
    return np.sum((x / mu) ** alpha - 1) / (len(x) * alpha * (alpha - 1))


# ---------------------------------------------------------------- entropy indices

def test_constant_input_is_zero():
    for a in (0.5, 2.0, -1.0):
        assert ge_index([5, 5, 5, 5], EntropyConfig(alpha=a)) == pytest.approx(0, abs=1e-15)


def test_hand_value_alpha_two():
    assert ge_index([1, 3]) == pytest.approx(0.125)


def test_normalized_variance_two_groups():
    assert ge_index([0.75, 0.25], NORMVAR) == pytest.approx(0.25)
    assert ge_weighted([0.75, 0.25], [1, 1], NORMVAR) == pytest.approx(0.25)


def test_rejects_nonpositive_and_limits():
    with pytest.raises(ValueError):
        ge_index([1.0, 0.0])
    with pytest.raises(ValueError):
        ge_index([1.0, -2.0])
    with pytest.raises(ValueError):
        EntropyConfig(alpha=1)
    with pytest.raises(ValueError):
        EntropyConfig(alpha=0)
    with pytest.raises(ValueError):
        ge_weighted([1.0, 2.0], [0.0, 0.0])


def test_zeros_allowed_on_request_for_positive_alpha():
    assert ge_index([0.0, 1.0], NORMVAR, allow_zeros=True) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        ge_index([0.0, 1.0], EntropyConfig(alpha=-1), allow_zeros=True)


@settings(max_examples=200, deadline=None)
@given(positive, alphas)
def test_matches_defining_formula(x, a):
    assert ge_index(x, EntropyConfig(alpha=a)) == pytest.approx(brute_ge(x, a), rel=1e-9, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(positive, alphas, st.floats(0.001, 1000))
def test_scale_invariance(x, a, c):
    cfg = EntropyConfig(alpha=a)
    assert ge_index(c * x, cfg) == pytest.approx(ge_index(x, cfg), rel=1e-12, abs=1e-14)


@settings(max_examples=100, deadline=None)
@given(positive, alphas, st.integers(2, 5))
def test_replication_invariance(x, a, r):
    cfg = EntropyConfig(alpha=a)
    assert ge_index(np.tile(x, r), cfg) == pytest.approx(ge_index(x, cfg), rel=1e-10, abs=1e-14)


@settings(max_examples=200, deadline=None)
@given(positive, alphas, st.data())
def test_transfer_principle(x, a, data):
    assume(len(x) >= 2 and x.max() - x.min() > 1e-3)
    cfg = EntropyConfig(alpha=a)
    i, j = int(np.argmax(x)), int(np.argmin(x))
    delta = data.draw(st.floats(1e-4, 0.49)) * (x[i] - x[j])
    y = x.copy()
    y[i] -= delta
    y[j] += delta
    assert ge_index(y, cfg) < ge_index(x, cfg)


@settings(max_examples=200, deadline=None)
@given(positive)
def test_normalized_variance_is_twice_ge2(x):
    assert ge_index(x, NORMVAR) == pytest.approx(2 * ge_index(x, DEFAULT), rel=1e-10, abs=1e-14)


@settings(max_examples=100, deadline=None)
@given(positive, alphas)
def test_uniform_weights_reduce_to_unweighted(x, a):
    cfg = EntropyConfig(alpha=a)
    assert ge_weighted(x, np.full(len(x), 3.7), cfg) == pytest.approx(ge_index(x, cfg), rel=1e-10, abs=1e-14)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6), alphas)
def test_weights_equal_replication(seed, a):
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.1, 5, 4)
    w = rng.integers(1, 6, 4)
    cfg = EntropyConfig(alpha=a)
    assert ge_weighted(x, w, cfg) == pytest.approx(ge_index(np.repeat(x, w), cfg), rel=1e-10, abs=1e-14)
    assert ge_weighted(x, 7 * w, cfg) == pytest.approx(ge_weighted(x, w, cfg), rel=1e-12, abs=1e-14)


# ---------------------------------------------------------------- kernels and smoothing

def test_ground_truth_kernel_definition():
    k = ground_truth_kernel([0, 0, 1]).matrix
    assert np.allclose(k, [[.5, .5, 0], [.5, .5, 0], [0, 0, 1]])
    assert np.allclose(ground_truth_kernel([3] * 4).matrix, 0.25)


def test_ground_truth_kernel_is_scaled_sensitive_kernel():
    k = ground_truth_kernel(np.repeat([0, 1], 5)).matrix
    ks = np.kron(np.eye(2), np.ones((5, 5))) * 0.7
    assert np.allclose(ks, 0.7 * 5 * k)


def test_kernel_validation():
    with pytest.raises(KernelError):
        Kernel.from_matrix([[1, 0], [0, 2]])
    with pytest.raises(KernelError):
        Kernel.from_matrix([[1, -1], [0, 2]])
    with pytest.raises(KernelError):
        Kernel.from_matrix(np.ones((2, 3)))
    k = Kernel.from_matrix([[1, 2], [2, 1]])
    assert k.column_sum == 3 and k.n == 2


def test_smooth_basic_cases():
    y = np.array([1.0, 2.0, 6.0])
    assert np.allclose(smooth(np.eye(3), y), y)
    assert np.allclose(smooth(np.ones((3, 3)), y), 3.0)
    assert np.allclose(smooth(ground_truth_kernel([0, 0, 1]), y), [1.5, 1.5, 6.0])
    with pytest.raises(KernelError):
        smooth(np.array([[0.0, 0.0], [1.0, 1.0]]), [1.0, 2.0])


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_smooth_stays_in_range(seed):
    rng = np.random.default_rng(seed)
    k = column_regular_kernel(rng, 12)
    y = rng.normal(size=12)
    a = smooth(k, y)
    assert np.all(a >= y.min() - 1e-12) and np.all(a <= y.max() + 1e-12)


def test_group_free_special_kernels():
    rng = np.random.default_rng(0)
    y = rng.uniform(0.1, 1, 10)
    assert group_free_inequality(np.eye(10), y) == pytest.approx(ge_index(y))
    assert group_free_inequality(np.ones((10, 10)) / 10, y) == pytest.approx(0, abs=1e-15)


def test_group_free_two_groups_epsilon():
    y, labels, eps = two_group_labels(np.random.default_rng(1), 16, eps_index=6)
    assert eps == 0.25
    val = group_free_inequality(ground_truth_kernel(labels), y, NORMVAR, allow_zeros=True)
    assert val == pytest.approx(4 * eps**2) == pytest.approx(0.25)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6), alphas)
def test_ground_truth_equivalence(seed, a):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 30))
    labels = rng.integers(0, int(rng.integers(1, 6)), n)
    y = rng.uniform(0.05, 2.0, n)
    cfg = EntropyConfig(alpha=a)
    gf = group_free_inequality(ground_truth_kernel(labels), y, cfg)
    assert gf == pytest.approx(partition_between(labels, y, cfg), rel=1e-12, abs=1e-12)


# ---------------------------------------------------------------- decomposition

def within_between_partition(labels, y, a):
    # textbook partition decomposition for the generalized entropy family
    mu = y.mean()
    n = len(y)
    w = 0.0
    for g in np.unique(labels):
        yg = y[labels == g]
        w += len(yg) / n * (yg.mean() / mu) ** a * ge_index(yg, EntropyConfig(alpha=a))
    return w, partition_between(labels, y, EntropyConfig(alpha=a))


def test_decompose_ground_truth_matches_partition_formula():
    rng = np.random.default_rng(3)
    labels = np.repeat([0, 1, 2], [4, 7, 5])
    y = rng.uniform(0.1, 1.0, len(labels))
    for a in (0.5, 2.0, 3.0):
        got = decompose(ground_truth_kernel(labels), y, EntropyConfig(alpha=a))
        assert np.allclose(got, within_between_partition(labels, y, a), rtol=1e-12)


def test_decompose_identity():
    y = np.random.default_rng(0).uniform(0.1, 1, 9)
    dw, db = decompose(np.eye(9), y)
    assert dw == pytest.approx(0, abs=1e-15)
    assert db == pytest.approx(ge_index(y))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([0.5, 2.0, -1.0, 3.0]))
def test_decomposition_identity_asymmetric(seed, a):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 25))
    k = column_regular_kernel(rng, n)
    y = rng.uniform(0.1, 1.0, n)
    cfg = EntropyConfig(alpha=a)
    dw, db = decompose(k, y, cfg)
    f = ge_index(y, cfg)
    assert dw >= -1e-12 and db >= -1e-12
    assert abs(dw + db - f) <= 1e-8 * f + 1e-14


def test_decomposition_normalized_variance():
    rng = np.random.default_rng(5)
    k = column_regular_kernel(rng, 15)
    y = rng.uniform(0.1, 1.0, 15)
    dw, db = decompose(k, y, NORMVAR)
    assert dw + db == pytest.approx(ge_index(y, NORMVAR), rel=1e-10)


def test_decompose_rejects_unequal_columns():
    with pytest.raises(KernelError):
        decompose(np.array([[1.0, 0.0], [1.0, 1.0]]), [1.0, 2.0])


# ---------------------------------------------------------------- ranking dispersion

def test_std_dispersion_examples():
    assert std_dispersion([3, 3, 3], 0.1) == pytest.approx(np.sqrt(0.1))
    assert std_dispersion([0, 2], 0.1) == pytest.approx(np.sqrt(2.1))
    assert std_dispersion([0, 2], 0.1) == pytest.approx(1.449, abs=5e-4)
    with pytest.raises(ValueError):
        std_dispersion([0, 2], 0.0)


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, st.integers(1, 20), elements=st.floats(-5, 5)), st.floats(0.1, 9))
def test_std_dispersion_uniform_weights(y, c):
    assert std_dispersion(y, 0.1, np.full(len(y), c)) == pytest.approx(std_dispersion(y, 0.1), rel=1e-10)


def test_std_dispersion_weighted_hand_value():
    # group means (0.2, 0.4) repeated over 4 users, ground-truth row weights 1
    assert std_dispersion([0.2, 0.2, 0.4, 0.4], 0.1, np.ones(4)) == pytest.approx(np.sqrt(0.1 + 4 * 0.01))
    # weights (6, 2) rescale to (1.5, 0.5); weighted mean 0.5, deviations -0.5 and 1.5
    assert std_dispersion([0.0, 2.0], 0.1, [6, 2]) == pytest.approx(np.sqrt(0.1 + 1.5 * 0.25 + 0.5 * 2.25))


# ---------------------------------------------------------------- confounder bounds

def test_confounder_bound_examples():
    assert prop2_bounds(1.0, 0.0, 0.3) == pytest.approx((0.36, 0.36, 0.36))
    assert prop2_bounds(2.0, 2.0, 0.25) == pytest.approx((0.0625, 0.4375, 0.25))


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 10), st.floats(0, 10), st.floats(0, 0.5))
def test_confounder_bounds_ordered(p, q, eps):
    lo, hi, d0 = prop2_bounds(p, q, eps)
    assert lo <= d0 + 1e-15 and d0 <= hi + 1e-15
    assert 0 <= lo and hi <= 1 + 1e-12


def test_confounder_bounds_domain():
    for args in ((0, 1, 0.1), (1, -1, 0.1), (1, 1, 0.6), (1, 1, -0.1)):
        with pytest.raises(ValueError):
            prop2_bounds(*args)


def test_confounded_kernels_respect_bounds():
    rng = np.random.default_rng(11)
    for _ in range(200):
        n = int(rng.choice([8, 16, 32]))
        y, _, eps = two_group_labels(rng, n)
        p, q = rng.uniform(0.1, 2), rng.uniform(0, 2)
        d = group_free_inequality(confounded_kernel(rng, n, p, q), y, NORMVAR, allow_zeros=True)
        lo, hi, _ = prop2_bounds(p, q, eps)
        assert lo - 1e-9 <= d <= hi + 1e-9


def test_blend_examples():
    assert blend_inequality(2.0, 0.0, 0.3) == pytest.approx(0.3)
    assert blend_inequality(3.0, 1.0, 0.8) == pytest.approx(0.2)
    with pytest.raises(ValueError):
        blend_inequality(1.0, 1.0, 0.2)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_blend_matches_direct_kernel(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.choice([4, 8, 12, 20]))
    y, labels, eps = two_group_labels(rng, n)
    p = rng.uniform(0.5, 3)
    q = rng.uniform(0, p * 0.99)
    k = np.where(labels[:, None] == labels[None, :], p, q)
    direct = group_free_inequality(k, y, NORMVAR, allow_zeros=True)
    assert direct == pytest.approx(blend_inequality(p, q, 4 * eps**2), abs=1e-10)


def test_blend_decreasing_in_q():
    qs = np.linspace(0, 0.99, 20)
    vals = [blend_inequality(1.0, q, 0.5) for q in qs]
    assert np.all(np.diff(vals) < 0)
