import numpy as np
import pytest
import scipy.sparse as sp

from gnn_unify import InvalidEdge, ShapeError, build_graph, normalize, spmm
from gnn_unify.graphs import check_csr

from _oracles import dense_ahat, dense_l_tilde, k2_graph, path3_graph, random_graph


def test_build_graph_dedupes_and_canonicalizes():
    g = build_graph(4, [(1, 0), (0, 1), (2, 3), (3, 2), (1, 3)])
    assert g.edges == ((0, 1), (1, 3), (2, 3))
    assert g.adjacency.shape == (4, 4)
    assert g.adjacency.nnz == 6
    dense = g.adjacency.toarray()
    assert np.array_equal(dense, dense.T)


def test_build_graph_rejects_bad_input():
    with pytest.raises(InvalidEdge):
        build_graph(0, [])
    with pytest.raises(InvalidEdge):
        build_graph(3, [(0, 3)])
    with pytest.raises(InvalidEdge):
        build_graph(3, [(-1, 0)])
    with pytest.raises(InvalidEdge):
        build_graph(3, [(1, 1)])


def test_k2_normalization():
    ops = normalize(k2_graph())
    np.testing.assert_allclose(ops.a_hat.toarray(), [[0.5, 0.5], [0.5, 0.5]])
    np.testing.assert_allclose(ops.l_tilde.toarray(), [[0.5, -0.5], [-0.5, 0.5]])


def test_empty_graph_identity_bitwise():
    ops = normalize(build_graph(3, []))
    eye = sp.identity(3, format="csr")
    assert (ops.a_hat != eye).nnz == 0
    assert np.all(ops.a_hat.data == 1.0)
    assert ops.l_tilde.nnz == 0


def test_path3_oracle_values():
    ops = normalize(path3_graph())
    a = ops.a_hat.toarray()
    np.testing.assert_allclose(np.diag(a), [0.5, 1 / 3, 0.5])
    np.testing.assert_allclose(a[0, 1], 1 / np.sqrt(6))
    np.testing.assert_allclose(a, dense_ahat(path3_graph()), atol=1e-15)


def test_normalize_matches_dense_oracle():
    rng = np.random.default_rng(7)
    for _ in range(20):
        g = random_graph(rng, int(rng.integers(2, 40)))
        ops = normalize(g)
        np.testing.assert_allclose(ops.a_hat.toarray(), dense_ahat(g), atol=1e-13)
        np.testing.assert_allclose(ops.l_tilde.toarray(), dense_l_tilde(g), atol=1e-13)


def test_spectrum_bounds():
    rng = np.random.default_rng(11)
    for _ in range(10):
        g = random_graph(rng, int(rng.integers(2, 50)))
        ops = normalize(g)
        a_eigs = np.linalg.eigvalsh(ops.a_hat.toarray())
        l_eigs = np.linalg.eigvalsh(ops.l_tilde.toarray())
        assert a_eigs.min() > -1.0
        assert a_eigs.max() <= 1.0 + 1e-12
        assert l_eigs.min() >= -1e-12
        assert l_eigs.max() < 2.0


def test_a_hat_fixes_sqrt_degree_vector():
    # a_hat D^{1/2} 1 = D^{1/2} 1 exactly characterizes the top eigenpair
    rng = np.random.default_rng(3)
    g = random_graph(rng, 25)
    ops = normalize(g)
    deg = np.asarray((g.adjacency.sum(axis=1))).ravel() + 1.0
    v = np.sqrt(deg)
    np.testing.assert_allclose(ops.a_hat @ v, v, atol=1e-12)


def test_ring_graph_row_stochastic():
    n = 8
    ring = build_graph(n, [(i, (i + 1) % n) for i in range(n)])
    ops = normalize(ring)
    ones = np.ones((n, 1))
    np.testing.assert_allclose(spmm(ops.a_hat, ones), ones, atol=1e-14)


def test_spmm_k2_average():
    ops = normalize(k2_graph())
    np.testing.assert_allclose(spmm(ops.a_hat, np.array([[1.0], [0.0]])), [[0.5], [0.5]])


def test_spmm_identity_and_vector_promotion():
    eye = sp.identity(4, format="csr")
    x = np.arange(12.0).reshape(4, 3)
    np.testing.assert_array_equal(spmm(eye, x), x)
    out = spmm(eye, np.arange(4.0))
    assert out.shape == (4, 1)


def test_spmm_matches_dense_oracle():
    rng = np.random.default_rng(19)
    for _ in range(10):
        n = int(rng.integers(2, 100))
        g = random_graph(rng, n)
        ops = normalize(g)
        x = rng.standard_normal((n, 3))
        expected = dense_ahat(g) @ x
        got = spmm(ops.a_hat, x)
        scale = np.abs(expected).max() or 1.0
        assert np.abs(got - expected).max() / scale <= 1e-14


def test_spmm_shape_errors():
    eye = sp.identity(4, format="csr")
    with pytest.raises(ShapeError):
        spmm(eye, np.ones((3, 2)))
    with pytest.raises(ShapeError):
        spmm(eye, np.ones((2, 2, 2)))


def test_check_csr_accepts_library_output():
    rng = np.random.default_rng(23)
    ops = normalize(random_graph(rng, 30))
    check_csr(ops.a_hat)
    check_csr(ops.l_tilde)


def test_check_csr_rejects_violations():
    good = normalize(k2_graph()).a_hat
    wrong_dtype = good.astype(np.float32)
    with pytest.raises(ShapeError):
        check_csr(wrong_dtype)

    explicit_zero = good.copy()
    explicit_zero.data[0] = 0.0
    with pytest.raises(ShapeError):
        check_csr(explicit_zero)

    unsorted = good.copy()
    unsorted.indices = unsorted.indices[::-1].copy()
    with pytest.raises(ShapeError):
        check_csr(unsorted)

    with pytest.raises(ShapeError):
        check_csr(good.tocoo())
