import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fairsvm.constraints import covariance_gap, mean_difference
from fairsvm.linalg import min_eigenvalue, spectral_split
from fairsvm.metrics import auc, dp_delta, roc

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@st.composite
def symmetric(draw, max_n=8):
    n = draw(st.integers(1, max_n))
    a = draw(arrays(float, (n, n), elements=finite))
    return (a + a.T) / 2.0


@st.composite
def scored_groups(draw, max_n=30):
    n = draw(st.integers(2, max_n))
    s = draw(arrays(float, n, elements=st.integers(-5, 5).map(float)))
    g = draw(arrays(float, n, elements=st.sampled_from([-1.0, 1.0])))
    g[0], g[1] = 1.0, -1.0
    return s, g


@st.composite
def grouped_rows(draw):
    n = draw(st.integers(4, 12))
    p = draw(st.integers(1, 4))
    X = draw(arrays(float, (n, p), elements=finite))
    z = draw(arrays(float, n, elements=st.sampled_from([-1.0, 1.0])))
    z[:4] = [1.0, 1.0, -1.0, -1.0]
    return X, z


@settings(max_examples=60, deadline=None)
@given(symmetric())
def test_split_reconstructs_and_is_psd(a):
    s = spectral_split(a)
    scale = max(1.0, np.abs(a).max())
    assert np.max(np.abs(s.u_plus - s.u_minus - a)) <= 1e-8 * scale
    assert min_eigenvalue(s.u_plus) >= -1e-8 * scale
    assert min_eigenvalue(s.u_minus) >= -1e-8 * scale


@settings(max_examples=60, deadline=None)
@given(scored_groups(), st.floats(0.1, 5.0), st.floats(-3.0, 3.0))
def test_dp_invariant_under_increasing_maps(sg, scale, shift):
    s, z = sg
    assert dp_delta(scale * s + shift, z) == dp_delta(s, z)
    assert dp_delta(np.tanh(s), z) == dp_delta(s, z)


@settings(max_examples=60, deadline=None)
@given(scored_groups())
def test_auc_reversal(sg):
    s, y = sg
    assert abs(auc(roc(s, y)) + auc(roc(-s, y)) - 1.0) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(grouped_rows(), st.data())
def test_split_matches_gap_quadratic(rows, data):
    X, z = rows
    gap = covariance_gap(X, z)
    w = data.draw(arrays(float, X.shape[1], elements=finite))
    plus, minus = gap.split.quadratic_forms(w)
    expected = float(w @ gap.gap @ w)
    assert abs((plus - minus) - expected) <= 1e-8 * max(1.0, np.abs(gap.gap).max()) * max(1.0, w @ w)


@settings(max_examples=40, deadline=None)
@given(grouped_rows(), st.randoms(use_true_random=False))
def test_mean_difference_permutation_invariant(rows, rnd):
    X, z = rows
    perm = list(range(len(z)))
    rnd.shuffle(perm)
    np.testing.assert_allclose(mean_difference(X[perm], z[perm]), mean_difference(X, z), atol=1e-12)
