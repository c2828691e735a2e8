"""Filter-coefficient tests.

The load-bearing check is two fully independent routes to the same
polynomial: the per-order summation formulas behind closed_coefficients
versus the recurrence expansion behind geometric_truncation followed by the
basis change.  Exact rational arithmetic keeps the deep-depth comparisons
meaningful where float evaluation would drown the signal.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from gnn_unify import (
    Basis,
    ConfigError,
    FilterCoefficients,
    MAX_EXPANSION_DEPTH,
    Mode,
    Model,
    closed_coefficients,
    coefficient_discrepancies,
    expand_iterate,
    geometric_truncation,
    normalize,
    polynomial_response,
    propagate,
    rational_response,
    to_laplacian_basis,
)
from gnn_unify.spectral import _closed_theta_fractions, _rational_fraction, _recurrence_terms

from _oracles import CLOSED, ITER, cfg, random_graph


def test_filter_coefficients_validation():
    FilterCoefficients(1, (1.0, 2.0), Basis.AHAT_MONOMIAL)
    with pytest.raises(ConfigError):
        FilterCoefficients(2, (1.0, 2.0), Basis.AHAT_MONOMIAL)
    with pytest.raises(ConfigError):
        FilterCoefficients(0, (float("nan"),), Basis.AHAT_MONOMIAL)


def test_expand_iterate_examples():
    c = expand_iterate(cfg(Model.SGC, ITER), 3)
    assert c.basis is Basis.AHAT_MONOMIAL
    assert c.theta == (0.0, 0.0, 0.0, 1.0)

    c = expand_iterate(cfg(Model.APPNP, ITER, alpha=0.5), 2)
    np.testing.assert_allclose(c.theta, [0.5, 0.25, 0.25])

    c = expand_iterate(cfg(Model.GNN_LF, ITER, alpha=0.5, mu=0.5), 1)
    assert c.order == 2
    np.testing.assert_allclose(c.theta, [1 / 3, 5 / 9, 2 / 9], atol=1e-15)

    c = expand_iterate(cfg(Model.GC_ONE_LAYER, ITER), 1)
    assert c.theta == (0.0, 1.0)

    c = expand_iterate(cfg(Model.DAGNN_FIXED, ITER, xi=1.0), 2)
    np.testing.assert_allclose(c.theta, [0.5, 0.25, 0.125])

    c = expand_iterate(cfg(Model.JKNET_FIXED, ITER, xi=1.0, depth=3), 3)
    np.testing.assert_allclose(c.theta, [0.0, 0.5, 0.25, 0.125])


def test_expand_iterate_errors():
    with pytest.raises(ConfigError):
        expand_iterate(cfg(Model.PPNP, CLOSED, alpha=0.5), 3)
    with pytest.raises(ConfigError):
        expand_iterate(cfg(Model.GC_ONE_LAYER, CLOSED, gc_exact=True), 1)
    with pytest.raises(ConfigError):
        expand_iterate(cfg(Model.APPNP, ITER), MAX_EXPANSION_DEPTH + 1)
    with pytest.raises(ConfigError):
        expand_iterate(cfg(Model.JKNET_FIXED, ITER, depth=1), 0)
    expand_iterate(cfg(Model.APPNP, ITER), MAX_EXPANSION_DEPTH)


def test_iterate_polynomial_reproduces_propagation():
    # the formal expansion and the numeric recurrence must agree to
    # round-off when the polynomial is applied as a matrix series
    rng = np.random.default_rng(131)
    g = random_graph(rng, 18)
    ops = normalize(g)
    ahat = ops.a_hat.toarray()
    h = rng.standard_normal((18, 2))
    configs = [
        (cfg(Model.SGC, ITER, depth=4), 4),
        (cfg(Model.APPNP, ITER, alpha=0.3, depth=6), 6),
        (cfg(Model.GNN_LF, ITER, alpha=0.2, mu=0.75, depth=5), 5),
        (cfg(Model.GNN_HF, ITER, alpha=0.8, beta=1.5, depth=5), 5),
        (cfg(Model.JKNET_FIXED, ITER, xi=0.7, depth=6), 6),
        (cfg(Model.DAGNN_FIXED, ITER, xi=1.3, depth=6), 6),
    ]
    for c, depth in configs:
        coeffs = expand_iterate(c, depth)
        z_series = sum(
            t * (np.linalg.matrix_power(ahat, i) @ h)
            for i, t in enumerate(coeffs.theta)
        )
        z_iter = propagate(c, ops, h)
        assert np.abs(z_series - z_iter).max() <= 1e-12, c.model


def test_truncation_delta_structure():
    # gnn-lf leading deltas: a, (a+b) r^j in the middle, b r^K at the top
    alpha, mu, depth = 0.5, 0.5, 4
    c = geometric_truncation(cfg(Model.GNN_LF, ITER, alpha=alpha, mu=mu), depth)
    den = 1 + alpha * mu - alpha
    r = (1 + alpha * mu - 2 * alpha) / den
    a = alpha * mu / den
    b = (alpha - alpha * mu) / (1 + alpha * mu - 2 * alpha)
    expected = [a] + [(a + b) * r ** j for j in range(1, depth)] + [b * r ** depth]
    np.testing.assert_allclose(c.theta, expected, atol=1e-15)

    alpha, beta, depth = 0.4, 1.5, 4
    c = geometric_truncation(cfg(Model.GNN_HF, ITER, alpha=alpha, beta=beta), depth)
    den = alpha * beta + 1
    d = (alpha * beta - alpha + 1) / den
    a = alpha * (beta + 1) / den
    b = alpha * beta / (alpha * beta - alpha + 1)
    expected = [a] + [(a - b) * d ** j for j in range(1, depth)] + [-b * d ** depth]
    np.testing.assert_allclose(c.theta, expected, atol=1e-15)


def test_truncation_reduces_to_ppnp_at_boundaries():
    with pytest.warns(UserWarning):
        lf = geometric_truncation(cfg(Model.GNN_LF, ITER, alpha=0.5, mu=1.0, allow_boundary=True), 6)
    with pytest.warns(UserWarning):
        hf = geometric_truncation(cfg(Model.GNN_HF, ITER, alpha=0.5, beta=0.0, allow_boundary=True), 6)
    pp = geometric_truncation(cfg(Model.APPNP, ITER, alpha=0.5), 6)
    np.testing.assert_allclose(lf.theta, pp.theta, atol=1e-15)
    np.testing.assert_allclose(hf.theta, pp.theta, atol=1e-15)


def test_to_laplacian_basis_examples():
    c = to_laplacian_basis(FilterCoefficients(2, (0.0, 0.0, 1.0), Basis.AHAT_MONOMIAL))
    assert c.basis is Basis.LAPLACIAN_MONOMIAL
    np.testing.assert_allclose(c.theta, [1.0, -2.0, 1.0])

    c = to_laplacian_basis(FilterCoefficients(0, (0.7,), Basis.AHAT_MONOMIAL))
    assert c.theta == (0.7,)

    with pytest.raises(ConfigError):
        to_laplacian_basis(c)


def test_basis_change_preserves_response():
    rng = np.random.default_rng(137)
    for _ in range(10):
        order = int(rng.integers(0, 9))
        theta = tuple(float(t) for t in rng.standard_normal(order + 1))
        c = FilterCoefficients(order, theta, Basis.AHAT_MONOMIAL)
        lap = to_laplacian_basis(c)
        for lam in (0.0, 0.3, 1.0, 1.7, 2.0):
            assert polynomial_response(c, lam) == pytest.approx(
                polynomial_response(lap, lam), abs=1e-10
            )


def test_closed_coefficients_examples():
    c = closed_coefficients(cfg(Model.PPNP, CLOSED, alpha=0.5), 2)
    assert c.basis is Basis.LAPLACIAN_MONOMIAL
    np.testing.assert_allclose(c.theta, [0.75, -0.25, 0.0], atol=1e-15)

    c = closed_coefficients(cfg(Model.SGC, ITER, depth=2), 2)
    np.testing.assert_allclose(c.theta, [1.0, -2.0, 1.0])
    c = closed_coefficients(cfg(Model.SGC, ITER, depth=4), 4)
    np.testing.assert_allclose(c.theta, [1.0, -4.0, 6.0, -4.0, 1.0])


def test_closed_coefficients_match_truncation_oracle():
    rng = np.random.default_rng(139)
    models = [
        lambda: cfg(Model.SGC, ITER),
        lambda: cfg(Model.PPNP, CLOSED, alpha=float(rng.uniform(0.05, 1.0))),
        lambda: cfg(
            Model.GNN_LF, ITER,
            alpha=float(rng.uniform(0.05, 0.6)), mu=float(rng.uniform(0.5, 0.99)),
        ),
        lambda: cfg(
            Model.GNN_HF, ITER,
            alpha=float(rng.uniform(0.05, 1.0)), beta=float(rng.uniform(0.1, 3.0)),
        ),
    ]
    for make in models:
        for depth in range(1, 9):
            c = make()
            got = closed_coefficients(c, depth)
            want = to_laplacian_basis(geometric_truncation(c, depth))
            assert got.order == want.order
            worst = max(abs(g - w) for g, w in zip(got.theta, want.theta))
            assert worst <= 1e-9, (c.model, depth, worst)


def test_verbatim_formulas_differ_where_documented():
    lf = cfg(Model.GNN_LF, ITER, alpha=0.5, mu=0.5)
    hf = cfg(Model.GNN_HF, ITER, alpha=0.5, beta=1.0)
    for c in (lf, hf):
        for depth in (1, 3, 5):
            gaps = coefficient_discrepancies(c, depth)
            # orders 0..K-1 drift, the top order is printed correctly
            assert [k for k, _, _ in gaps] == list(range(depth))
            verbatim = closed_coefficients(c, depth, verbatim=True)
            corrected = closed_coefficients(c, depth)
            assert verbatim.theta[depth] == pytest.approx(corrected.theta[depth], abs=1e-15)
            assert verbatim.theta[0] != pytest.approx(corrected.theta[0])

    assert coefficient_discrepancies(cfg(Model.SGC, ITER), 6) == []
    assert coefficient_discrepancies(cfg(Model.PPNP, CLOSED, alpha=0.3), 6) == []


def test_verbatim_order_zero_gap_value():
    # alpha=mu=1/2, depth 1: head term shrinks by a factor r, a gap of
    # a (r - 1) = (1/3)(1/3 - 1) = -2/9 below the recurrence value 2/3
    gaps = coefficient_discrepancies(cfg(Model.GNN_LF, ITER, alpha=0.5, mu=0.5), 1)
    assert len(gaps) == 1
    k, verbatim, oracle = gaps[0]
    assert k == 0
    assert oracle == pytest.approx(2 / 3)
    assert verbatim == pytest.approx(4 / 9)


def test_polynomial_response_examples():
    c = FilterCoefficients(2, (1.0, -2.0, 1.0), Basis.LAPLACIAN_MONOMIAL)
    assert polynomial_response(c, 0.0) == pytest.approx(1.0)
    assert polynomial_response(c, 1.0) == pytest.approx(0.0)
    assert polynomial_response(c, 2.0) == pytest.approx(1.0)
    assert polynomial_response(c, Fraction(1, 2)) == pytest.approx(0.25)


def test_rational_response_dc_is_exactly_one():
    for c in [
        cfg(Model.PPNP, CLOSED, alpha=0.37),
        cfg(Model.GNN_LF, ITER, alpha=0.13, mu=0.81),
        cfg(Model.GNN_HF, ITER, alpha=0.91, beta=2.3),
    ]:
        assert rational_response(c, 0) == 1.0


def test_rational_response_frozen_values_at_two():
    assert rational_response(cfg(Model.PPNP, CLOSED, alpha=0.5), 2) == pytest.approx(1 / 3)
    assert rational_response(cfg(Model.GNN_LF, ITER, alpha=0.5, mu=0.5), 2) == 0.0
    assert rational_response(cfg(Model.GNN_HF, ITER, alpha=0.5, beta=1.0), 2) == pytest.approx(0.6)


def test_rational_response_rejects_other_models():
    with pytest.raises(ConfigError):
        rational_response(cfg(Model.SGC, ITER), 1.0)
    with pytest.raises(ConfigError):
        rational_response(cfg(Model.JKNET_FIXED, CLOSED), 1.0)


def test_high_frequency_ordering():
    # low-pass suppresses, the teleport filter sits between, high-pass
    # amplifies; ordering holds across the upper half of the spectrum
    lf = cfg(Model.GNN_LF, ITER, alpha=0.5, mu=0.5)
    pp = cfg(Model.PPNP, CLOSED, alpha=0.5)
    hf = cfg(Model.GNN_HF, ITER, alpha=0.5, beta=1.0)
    for lam in np.linspace(1.0, 2.0, 11):
        assert (
            rational_response(lf, lam)
            <= rational_response(pp, lam) + 1e-15
            <= rational_response(hf, lam) + 2e-15
        )


def test_closed_propagation_matches_eigen_filter():
    # eigen-decomposition route: U f(Lambda) U^T H with the rational filter
    rng = np.random.default_rng(149)
    g = random_graph(rng, 28)
    ops = normalize(g)
    lt = ops.l_tilde.toarray()
    lam, u = np.linalg.eigh(lt)
    h = rng.standard_normal((28, 3))
    for c in [
        cfg(Model.PPNP, CLOSED, alpha=0.2),
        cfg(Model.GNN_LF, CLOSED, alpha=0.3, mu=0.65),
        cfg(Model.GNN_HF, CLOSED, alpha=0.5, beta=1.8),
    ]:
        filt = np.array([rational_response(c, float(x)) for x in lam])
        expected = u @ (filt[:, None] * (u.T @ h))
        got = propagate(c, ops, h)
        rel = np.linalg.norm(got - expected) / np.linalg.norm(expected)
        assert rel <= 1e-8, c.model


def _exact_poly(theta, lam: Fraction) -> Fraction:
    acc = Fraction(0)
    for t in reversed(theta):
        acc = acc * lam + t
    return acc


def test_limit_consistency_exact_depth_40():
    """Truncated filter vs limiting rational filter, in exact arithmetic.

    At order K the difference at Laplacian eigenvalue lam is identically
    F(x) (r x)^K / (1 - r x) with x = 1 - lam, where F is the recurrence
    forcing polynomial and r the contraction ratio; float evaluation of a
    degree-40 polynomial cannot resolve that residual, rational arithmetic
    can.  Verifying the identity pins both the coefficient formulas and the
    rational limit at once.
    """
    depth = 40
    for c in [
        cfg(Model.PPNP, CLOSED, alpha=0.3),
        cfg(Model.GNN_LF, ITER, alpha=0.25, mu=0.6),
        cfg(Model.GNN_HF, ITER, alpha=0.5, beta=0.75),
    ]:
        theta = _closed_theta_fractions(c, depth, False)
        ratio, forcing, _ = _recurrence_terms(c)
        bound = Fraction(0)
        for j in range(0, 21):
            lam = Fraction(j, 10)
            x = 1 - lam
            f_x = sum(fc * x ** i for i, fc in enumerate(forcing))
            residual = _rational_fraction(c, lam) - _exact_poly(theta, lam)
            assert residual == f_x * (ratio * x) ** depth / (1 - ratio * x)
            bound = max(bound, abs(f_x) / (1 - abs(ratio)))
        worst = max(
            abs(_rational_fraction(c, Fraction(j, 10)) - _exact_poly(theta, Fraction(j, 10)))
            for j in range(0, 21)
        )
        assert worst <= bound * abs(ratio) ** depth


def test_limit_consistency_float_depth_12():
    for c in [
        cfg(Model.PPNP, CLOSED, alpha=0.3),
        cfg(Model.GNN_LF, ITER, alpha=0.25, mu=0.6),
        cfg(Model.GNN_HF, ITER, alpha=0.5, beta=0.75),
    ]:
        depth = 12
        coeffs = closed_coefficients(c, depth)
        ratio, forcing, _ = _recurrence_terms(c)
        f_max = max(
            abs(sum(fc * (1 - Fraction(j, 10)) ** i for i, fc in enumerate(forcing)))
            for j in range(0, 21)
        )
        tol = float(f_max) * abs(float(ratio)) ** depth / (1 - abs(float(ratio))) + 1e-9
        for j in range(0, 21):
            lam = j / 10
            gap = abs(polynomial_response(coeffs, lam) - rational_response(c, lam))
            assert gap <= tol, (c.model, lam, gap, tol)


def test_closed_coefficients_minimum_depth():
    with pytest.raises(ConfigError):
        closed_coefficients(cfg(Model.PPNP, CLOSED, alpha=0.5), 0)
