import numpy as np
import pytest
from enumeration import enumerate_distribution
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_law
from transq import exact
from transq.arrival import derivative_matrix_at_one, from_bernoulli, from_matrices, random_model
from transq.exact import (
    StationaryNotConverged,
    build_slot_matrix,
    distribution,
    factorial_moment_leibniz,
    factorial_moments_from_pgf,
    mean_variance_closed,
    mminf_closed_form,
    mminf_moments,
    mminf_recursion,
    solve,
    stationary_distribution,
    transient_pgf,
    transient_series,
)
from transq.poly import Poly, eval_at, product
from transq.service import Deterministic, ExplicitPmf, Geometric

HALF = [0.65625, 0.3125, 0.03125]


def small_case(seed):
    rng = np.random.default_rng(seed)
    return random_model(rng, int(rng.integers(1, 4)), int(rng.integers(0, 5))), random_law(rng)


# -- slot matrices ---------------------------------------------------------


def test_slot_matrix_collapses_for_unit_service(fig_model):
    model, _ = fig_model
    T = build_slot_matrix(model, Deterministic(1), 2, 5)
    for i in range(2):
        for j in range(2):
            assert np.count_nonzero(T[i][j].coeffs[1:]) == 0
            assert T[i][j].coeffs[0] == pytest.approx(model.transition_matrix[i, j], abs=1e-15)


@pytest.mark.parametrize("k", [0, 3, 6])
def test_slot_matrix_bernoulli_geometric(k):
    p, a, t = 0.3, 0.6, 7
    (entry,) = build_slot_matrix(from_bernoulli(p), Geometric(a), k, t)[0]
    q = p * a ** (t - k)
    np.testing.assert_allclose(entry.coeffs, [1 - q, q], atol=1e-15)


def test_last_slot_uses_one_step_survival():
    (entry,) = build_slot_matrix(from_bernoulli(1.0), Geometric(0.25), 4, 5)[0]
    np.testing.assert_allclose(entry.coeffs, [0.75, 0.25])


def test_slot_matrix_entries_sum_to_transition_matrix(binom_model):
    model, law = binom_model
    T = build_slot_matrix(model, law, 1, 4)
    got = np.array([[eval_at(T[i][j], 1.0) for j in range(2)] for i in range(2)])
    np.testing.assert_allclose(got, model.transition_matrix, atol=1e-13)


def test_slot_index_checked():
    with pytest.raises(ValueError):
        build_slot_matrix(from_bernoulli(0.5), Geometric(0.5), 3, 3)


# -- transient PGF and distribution -----------------------------------------


def test_initial_pgf_is_p0(fig_model):
    model, law = fig_model
    model = from_matrices(model.batch_matrices, [0.25, 0.75])
    g = transient_pgf(model, law, 0)
    assert [e.coeffs.tolist() for e in g.entries] == [[0.25], [0.75]]
    np.testing.assert_array_equal(distribution(g), [1.0])


def test_bernoulli_geometric_t2():
    g = transient_pgf(from_bernoulli(0.5), Geometric(0.5), 2)
    np.testing.assert_allclose(distribution(g), HALF, atol=1e-15)
    assert factorial_moments_from_pgf(g, 1)[0] == pytest.approx(0.375, abs=1e-15)


def test_unit_service_never_holds_customers(fig_model):
    model, _ = fig_model
    for t in (1, 4, 9):
        d = distribution(transient_pgf(model, Deterministic(1), t))
        assert d[0] == pytest.approx(1.0, abs=1e-12)


def test_no_arrivals_point_mass():
    m = from_matrices([[[0.3, 0.7], [0.6, 0.4]], [[0, 0], [0, 0]]])
    for t in range(5):
        d = distribution(transient_pgf(m, Geometric(0.8), t))
        assert d[0] == pytest.approx(1.0) and not np.any(d[1:])


def test_up_to_m_pads():
    g = transient_pgf(from_bernoulli(0.5), Geometric(0.5), 2)
    np.testing.assert_allclose(distribution(g, 4), HALF + [0, 0])
    np.testing.assert_allclose(distribution(g, 1), HALF[:2])


@pytest.mark.parametrize("seed", range(12))
def test_matches_path_enumeration(seed):
    rng = np.random.default_rng(1000 + seed)
    model = random_model(rng, int(rng.integers(1, 3)), int(rng.integers(0, 3)))
    law = random_law(rng)
    for t in range(4):
        want = enumerate_distribution(model, law, t)
        got = distribution(transient_pgf(model, law, t), len(want) - 1)
        np.testing.assert_allclose(got, want, atol=1e-13)


@settings(max_examples=25)
@given(st.integers(0, 2**32 - 1), st.integers(0, 25))
def test_normalization(seed, t):
    model, law = small_case(seed)
    res = solve(model, law, t)
    assert abs(res.normalization_defect) < 1e-9
    assert res.truncation_loss == 0.0
    assert res.distribution.min() >= -1e-12
    assert res.variance >= -1e-9


@pytest.mark.parametrize("seed", range(5))
def test_series_matches_direct_product(seed):
    model, law = small_case(seed)
    for t, g in transient_series(model, law, 12):
        direct = transient_pgf(model, law, t)
        for a, b in zip(g.entries, direct.entries):
            np.testing.assert_allclose(a.coeffs, b.coeffs, atol=1e-13)


def test_degree_cap_accounts_for_loss(binom_model):
    model, law = binom_model
    res = solve(model, law, 10, max_degree=25)
    assert res.distribution.size == 26
    assert res.truncation_loss > 1e-3
    assert res.distribution.sum() + res.truncation_loss == pytest.approx(1.0, abs=1e-12)
    full = solve(model, law, 10)
    np.testing.assert_allclose(res.distribution, full.distribution[:26], atol=1e-13)
    assert res.truncation_loss == pytest.approx(full.distribution[26:].sum(), abs=1e-12)


# -- moments ---------------------------------------------------------------


def test_moments_at_time_zero(fig_model):
    model, law = fig_model
    g = transient_pgf(model, law, 0)
    assert not np.any(factorial_moments_from_pgf(g, 3))


@pytest.mark.parametrize("t", [1, 2, 7, 20])
@pytest.mark.parametrize("p,alpha", [(0.5, 0.5), (0.2, 0.9), (0.9, 0.1)])
def test_closed_mean_variance_bernoulli_geometric(p, alpha, t):
    m, v = mean_variance_closed(from_bernoulli(p), Geometric(alpha), t)
    assert m == pytest.approx(p * alpha * (1 - alpha**t) / (1 - alpha), rel=1e-12)
    want_v = p * alpha * (1 - alpha**t) / (1 - alpha) - p**2 * alpha**2 * (1 - alpha ** (2 * t)) / (1 - alpha**2)
    assert v == pytest.approx(want_v, rel=1e-12)


def test_pgf_moments_against_closed(binom_model, fig_model):
    for model, law in (binom_model, fig_model):
        for t in (1, 3, 12):
            res = solve(model, law, t)
            m, v = mean_variance_closed(model, law, t)
            assert m == pytest.approx(res.mean, rel=1e-9)
            assert v == pytest.approx(res.variance, rel=1e-9)


def _pair_sum_with_shifted_power(model, law, t):
    # the double sum with P^(i-1) in front, i >= 1 (i = 0 has no meaning and is dropped)
    P = model.transition_matrix
    D1 = derivative_matrix_at_one(model, 1)
    D2 = derivative_matrix_at_one(model, 2)
    mp = np.linalg.matrix_power
    phi = [law.survival(t - i) for i in range(t)]
    g2 = np.zeros(model.num_states)
    for i in range(1, t):
        for j in range(i + 1, t):
            g2 += 2 * phi[i] * phi[j] * model.initial_dist @ mp(P, i - 1) @ D1 @ mp(P, j - i - 1) @ D1 @ mp(P, t - 1 - j)
    for i in range(t):
        g2 += phi[i] ** 2 * model.initial_dist @ mp(P, i) @ D2 @ mp(P, t - 1 - i)
    return g2.sum()


def test_shifted_power_reading_disagrees_with_series(fig_model):
    model, law = fig_model
    t = 8
    mu2 = solve(model, law, t).factorial_moments[1]
    assert exact.closed_derivative_vectors(model, law, t)[1].sum() == pytest.approx(mu2, rel=1e-12)
    assert abs(_pair_sum_with_shifted_power(model, law, t) - mu2) > 1e-3 * mu2


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_leibniz_matches_series(fig_model, m):
    model, law = fig_model
    for t in (1, 2, 5, 9):
        mu, vec = factorial_moment_leibniz(model, law, t, m)
        want = solve(model, law, t, moments=4).factorial_moments[m - 1]
        assert mu == pytest.approx(want, rel=1e-9)
        assert vec.sum() == pytest.approx(mu)


def test_leibniz_first_order_equals_closed(binom_model):
    model, law = binom_model
    for t in (1, 4, 10):
        g1, _ = exact.closed_derivative_vectors(model, law, t)
        np.testing.assert_allclose(factorial_moment_leibniz(model, law, t, 1)[1], g1, rtol=1e-12)


def test_leibniz_order_zero_and_limit(fig_model):
    model, law = fig_model
    assert factorial_moment_leibniz(model, law, 6, 0)[0] == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        factorial_moment_leibniz(model, law, 6, 5)


def test_leibniz_bernoulli_second_order():
    model, law = from_bernoulli(0.4), Geometric(0.7)
    for t in (1, 2, 6):
        mu2, _ = factorial_moment_leibniz(model, law, t, 2)
        assert mu2 == pytest.approx(solve(model, law, t).factorial_moments[1], rel=1e-9, abs=1e-15)


# -- stationary limit ------------------------------------------------------


def test_stationary_unit_service(fig_model):
    model, _ = fig_model
    dist, t = stationary_distribution(model, Deterministic(1))
    assert t == 1
    assert dist[0] == pytest.approx(1.0, abs=1e-12) and not np.any(dist[1:])


def test_stationary_bernoulli_geometric_mean():
    dist, t = stationary_distribution(from_bernoulli(0.5), Geometric(0.5), tol=1e-12, t_max=500)
    mean = dist @ np.arange(dist.size)
    assert mean == pytest.approx(0.5, abs=1e-10)


def test_stationary_not_converged():
    heavy = np.array([1.0 / k**1.5 for k in range(1, 2001)])
    heavy /= heavy.sum()
    heavy[-1] = 1.0 - heavy[:-1].sum()
    with pytest.raises(StationaryNotConverged) as info:
        stationary_distribution(from_bernoulli(0.5), ExplicitPmf(tuple(heavy)), tol=1e-10, t_max=5)
    assert info.value.last_tv > 1e-10


# -- geometric arrivals / geometric service --------------------------------


def test_mminf_closed_form_small():
    np.testing.assert_allclose(mminf_closed_form(0.3, 0.6, 1).coeffs, [1 - 0.18, 0.18])
    np.testing.assert_array_equal(mminf_closed_form(0.3, 0.6, 0).coeffs, [1.0])
    np.testing.assert_allclose(mminf_closed_form(0.5, 0.5, 2).coeffs, HALF, atol=1e-16)
    assert mminf_moments(0.5, 0.5, 2)[0] == pytest.approx(0.375)


def test_mminf_moments_values():
    m, v, f = mminf_moments(0.5, 0.5, 2)
    assert (m, v) == pytest.approx((0.375, 0.296875), abs=1e-15)
    assert f == pytest.approx(0.7916666666666666, abs=1e-15)
    assert mminf_moments(0.5, 0.5, 0)[2] is None


def test_mminf_recursion_small():
    p, a = 0.3, 0.6
    np.testing.assert_allclose(mminf_recursion(p, a, 1).coeffs, [0.7, 0.3])
    want = product([Poly([1 - p * a, p * a]), Poly([1 - p, p])])
    np.testing.assert_allclose(mminf_recursion(p, a, 2).coeffs, want.coeffs, atol=1e-15)


@pytest.mark.parametrize("t", [1, 2, 5, 17])
def test_mminf_recursion_thinned_matches_closed_form(t):
    np.testing.assert_allclose(
        mminf_recursion(0.35, 0.8, t, thinned_arrivals=True).coeffs,
        mminf_closed_form(0.35, 0.8, t).coeffs,
        atol=1e-13,
    )


def test_mminf_mean_increasing_and_bounded():
    for p in np.linspace(0.1, 1.0, 10):
        for a in np.linspace(0.05, 0.95, 10):
            means = [mminf_moments(p, a, t)[0] for t in range(1, 51)]
            for t, (x, y) in enumerate(zip(means, means[1:]), start=1):
                # the step p alpha^(t+1) drops below double resolution for small alpha
                if p * a ** (t + 1) > 1e-14 * y:
                    assert x < y
                else:
                    assert x <= y
            assert max(means) <= p * a / (1 - a) * (1 + 1e-12)


def test_result_dict_shape(binom_model):
    model, law = binom_model
    d = solve(model, law, 3).to_dict()
    assert set(d) == {"time", "mean", "variance", "fano", "factorial_moments", "distribution",
                      "normalization_defect", "truncation_loss"}
    assert d["fano"] == pytest.approx(d["variance"] / d["mean"])
    assert solve(model, law, 0).fano is None
