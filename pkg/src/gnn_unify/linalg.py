"""Dense solves and seeded randomness.

The closed propagation forms are all solves against symmetric positive
definite operators, done by conjugate gradients without ever forming an
inverse; a dense Cholesky path doubles as the fallback and as the oracle in
tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NotPositiveDefinite, ShapeError

__all__ = [
    "SolveReport",
    "cg_solve",
    "cholesky_solve",
    "seeded_rng",
    "child_seeds",
]


@dataclass(frozen=True)
class SolveReport:
    """Outcome of an iterative solve.

    ``converged`` is computed from the true residual ``||A x - b|| / ||b||``
    per column after iteration stops, so ``converged=True`` implies
    ``residual_norm <= tol``.
    """

    iterations: int
    residual_norm: float
    converged: bool


def as_dense(x, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite float64 2-D array (1-D becomes a column)."""
    out = np.asarray(x, dtype=np.float64)
    if out.ndim == 1:
        out = out[:, None]
    if out.ndim != 2:
        raise ShapeError(f"{name} must be 1-D or 2-D, got {out.ndim}-D")
    if not np.all(np.isfinite(out)):
        raise ShapeError(f"{name} contains non-finite values")
    return out


def cg_solve(apply_operator, rhs, tol: float = 1e-10, max_iter: int | None = None):
    """Conjugate gradients for SPD operators, solved per column.

    Parameters
    ----------
    apply_operator : callable
        Maps an ``(n, k)`` array to the operator applied column-wise.
        Must represent a symmetric positive definite matrix.
    rhs : array_like
        Right-hand side, ``(n,)`` or ``(n, k)``.
    tol : float
        Per-column relative residual target ``||A x - b|| <= tol * ||b||``.
    max_iter : int, optional
        Iteration cap; defaults to ``10 * n``.

    Returns
    -------
    (x, SolveReport)
        ``report.converged`` is False when any column missed the tolerance
        within ``max_iter``; the caller decides whether to fall back.
    """
    b = as_dense(rhs, "rhs")
    if tol <= 0:
        raise ShapeError(f"tol must be positive, got {tol}")
    n, k = b.shape
    if max_iter is None:
        max_iter = 10 * n
    b_norm = np.linalg.norm(b, axis=0)
    # columns with zero rhs have the exact solution x = 0
    scale = np.where(b_norm > 0, b_norm, 1.0)

    x = np.zeros_like(b)
    r = b.copy()
    p = r.copy()
    rs = np.sum(r * r, axis=0)
    active = b_norm > 0
    iterations = 0
    for _ in range(max_iter):
        if not np.any(active):
            break
        iterations += 1
        ap = apply_operator(p)
        denom = np.sum(p * ap, axis=0)
        alpha = np.where(active & (denom > 0), rs / np.where(denom > 0, denom, 1.0), 0.0)
        x += alpha * p
        r -= alpha * ap
        rs_new = np.sum(r * r, axis=0)
        still = np.sqrt(rs_new) > tol * scale
        beta = np.where(active & still, rs_new / np.where(rs > 0, rs, 1.0), 0.0)
        p = r + beta * p
        rs = rs_new
        active = active & still
    true_resid = np.linalg.norm(apply_operator(x) - b, axis=0) / scale
    residual_norm = float(true_resid.max()) if k else 0.0
    return x, SolveReport(
        iterations=iterations,
        residual_norm=residual_norm,
        converged=bool(np.all(true_resid <= tol)),
    )


def cholesky_solve(a, rhs) -> np.ndarray:
    """Direct SPD solve via Cholesky factorization.

    Raises
    ------
    NotPositiveDefinite
        When a pivot fails (the matrix is not positive definite).
    ShapeError
        On dimension mismatch.
    """
    a = as_dense(a, "a")
    b = as_dense(rhs, "rhs")
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"matrix must be square, got {a.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot solve {a.shape} against rhs {b.shape}")
    try:
        factor = scipy.linalg.cho_factor(a, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    return scipy.linalg.cho_solve(factor, b, check_finite=False)


def seeded_rng(seed: int = 0) -> np.random.Generator:
    """Seeded PCG64 generator (numpy's default_rng).

    Identical seeds produce identical streams.  Uniform, normal and
    Bernoulli draws are the generator's own ``random``, ``standard_normal``
    and ``random(...) < p`` methods.
    """
    return np.random.default_rng(seed)


def child_seeds(seed: int, n: int) -> list[int]:
    """Derive ``n`` independent child seeds from a master seed.

    This is the documented split rule for cross-thread / multi-run use:
    ``SeedSequence(seed)`` expanded to ``n`` 64-bit words.  Deterministic in
    ``(seed, n)`` and safe to hand to :func:`seeded_rng` in any order.
    """
    ss = np.random.SeedSequence(seed)
    return [int(s) for s in ss.generate_state(n, dtype=np.uint64)]
