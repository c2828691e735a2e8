"""Propagation operators in closed and iterative form.

Every model here is the minimizer (or the K-step approximant of the
minimizer) of one objective:

    O(Z) = zeta * tr((Z - F2 H)^T M (Z - F2 H)) + xi * tr(Z^T l_tilde Z)

with a model-specific fitting kernel ``M``, target ``F2 H`` and weights
``(zeta, xi)``.  Closed modes solve the stationarity system, which is always
expressible as ``(I - gamma * a_hat) Z = R`` with ``|gamma| < 1``; since the
eigenvalues of ``a_hat`` lie in (-1, 1], that operator is symmetric positive
definite and conjugate gradients apply.  Iterative modes run the model's
fixed-point recurrence for ``depth`` steps and converge to the closed
solution at a known geometric contraction ratio.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigError, ShapeError, SolverError
from .graphs import NormalizedOperators, spmm
from .linalg import as_dense, cg_solve, cholesky_solve

__all__ = [
    "Model",
    "Mode",
    "PropagationConfig",
    "ConvergenceReport",
    "propagate",
    "objective_value",
    "objective_gradient",
    "verify_convergence",
    "jknet_series_weights",
    "contraction_ratio",
]

CG_TOL = 1e-10
CHOLESKY_FALLBACK_MAX_NODES = 2000


class Model(Enum):
    SGC = "sgc"
    GC_ONE_LAYER = "gc"
    PPNP = "ppnp"
    APPNP = "appnp"
    JKNET_FIXED = "jknet"
    DAGNN_FIXED = "dagnn"
    GNN_LF = "gnn-lf"
    GNN_HF = "gnn-hf"


class Mode(Enum):
    CLOSED = "closed"
    ITER = "iter"


# models where xi is tied to the teleport probability as 1/alpha - 1
_ALPHA_TIED = {Model.PPNP, Model.APPNP, Model.GNN_LF, Model.GNN_HF}
_FREE_XI = {Model.JKNET_FIXED, Model.DAGNN_FIXED}


@dataclass(frozen=True)
class PropagationConfig:
    """Validated model family + mode + hyperparameters.

    ``xi`` and ``zeta`` are derived at construction: ``zeta`` is 0 for SGC
    and 1 otherwise; ``xi`` equals ``1/alpha - 1`` for PPNP/APPNP/GNN-LF/
    GNN-HF, is free (positive, default 1.0) for JKNET_FIXED/DAGNN_FIXED, and
    is 1 for SGC and GC_ONE_LAYER.

    Valid ranges:

    - GNN_LF: ``mu`` in [1/2, 1), ``alpha`` in (0, 2/3)
    - GNN_HF: ``beta`` > 0, ``alpha`` in (0, 1]
    - PPNP / APPNP: ``alpha`` in (0, 1]
    - ``depth`` >= 1 for ITER mode

    The boundary points ``mu = 1`` and ``beta = 0`` collapse GNN-LF/GNN-HF
    onto PPNP; they are permitted only with ``allow_boundary=True`` and emit
    a warning.

    Mode validity: SGC has no closed form (its objective drops the fitting
    term entirely, so the stationarity system is singular) and is ITER-only;
    PPNP is the closed form whose iterate is APPNP, so PPNP is CLOSED-only
    and APPNP ITER-only.  GC_ONE_LAYER ignores ``mode``: the ``gc_exact``
    flag chooses between the default one-hop form ``a_hat @ H`` and the
    exact solve ``(I + l_tilde)^{-1} H``.
    """

    model: Model
    mode: Mode
    alpha: float = 0.1
    mu: float = 0.5
    beta: float = 1.0
    xi: float | None = None
    zeta: float = field(init=False, default=1.0)
    depth: int = 10
    gc_exact: bool = False
    allow_boundary: bool = False

    def __post_init__(self):
        model, mode = self.model, self.mode
        if not isinstance(model, Model) or not isinstance(mode, Mode):
            raise ConfigError("model and mode must be Model / Mode members")
        if model is Model.SGC and mode is Mode.CLOSED:
            raise ConfigError(
                "SGC has no closed form (zeta=0 leaves a singular system); use ITER"
            )
        if model is Model.PPNP and mode is Mode.ITER:
            raise ConfigError("PPNP is closed-form only; use APPNP for the iterate")
        if model is Model.APPNP and mode is Mode.CLOSED:
            raise ConfigError("APPNP is iterative only; use PPNP for the closed form")
        if self.depth < 0:
            raise ConfigError(f"depth must be >= 0, got {self.depth}")
        if mode is Mode.ITER and model is not Model.GC_ONE_LAYER and self.depth < 1:
            raise ConfigError("ITER mode requires depth >= 1")

        if model in _ALPHA_TIED:
            hi = 2.0 / 3.0 if model is Model.GNN_LF else 1.0
            open_hi = model is Model.GNN_LF
            if not (0.0 < self.alpha <= hi) or (open_hi and self.alpha == hi):
                bound = f"(0, {'2/3' if open_hi else '1'}" + (")" if open_hi else "]")
                raise ConfigError(
                    f"{model.value}: alpha must be in {bound}, got {self.alpha}"
                )
        if model is Model.GNN_LF:
            if self.mu == 1.0:
                if not self.allow_boundary:
                    raise ConfigError(
                        "gnn-lf: mu=1 is a boundary point; pass allow_boundary=True"
                    )
                warnings.warn("gnn-lf with mu=1 reduces to ppnp", stacklevel=2)
            elif not (0.5 <= self.mu < 1.0):
                raise ConfigError(
                    f"gnn-lf: mu must be in [1/2, 1), got {self.mu}"
                )
        if model is Model.GNN_HF:
            if self.beta == 0.0:
                if not self.allow_boundary:
                    raise ConfigError(
                        "gnn-hf: beta=0 is a boundary point; pass allow_boundary=True"
                    )
                warnings.warn("gnn-hf with beta=0 reduces to ppnp", stacklevel=2)
            elif self.beta < 0.0:
                raise ConfigError(f"gnn-hf: beta must be > 0, got {self.beta}")

        if model in _ALPHA_TIED:
            object.__setattr__(self, "xi", 1.0 / self.alpha - 1.0)
        elif model in _FREE_XI:
            xi = 1.0 if self.xi is None else self.xi
            if xi <= 0:
                raise ConfigError(f"{model.value}: xi must be > 0, got {xi}")
            object.__setattr__(self, "xi", float(xi))
        else:
            object.__setattr__(self, "xi", 1.0)
        object.__setattr__(self, "zeta", 0.0 if model is Model.SGC else 1.0)


@dataclass(frozen=True)
class ConvergenceReport:
    """One (depth, error) sample of iterative-to-closed convergence."""

    depth_checked: int
    relative_error: float
    contraction_ratio: float


def _lf_terms(alpha: float, mu: float):
    den = 1.0 + alpha * mu - alpha
    return (
        (1.0 + alpha * mu - 2.0 * alpha) / den,  # ratio multiplying a_hat Z
        alpha * mu / den,                        # H forcing
        (alpha - alpha * mu) / den,              # a_hat H forcing
        mu / den,                                # H part of Z0
        (1.0 - mu) / den,                        # a_hat H part of Z0
    )


def _hf_terms(alpha: float, beta: float):
    den = alpha * beta + 1.0
    return (
        (alpha * beta - alpha + 1.0) / den,  # ratio multiplying a_hat Z
        alpha / den,                         # H forcing
        alpha * beta / den,                  # l_tilde H forcing
        1.0 / den,                           # H part of Z0
        beta / den,                          # l_tilde H part of Z0
    )


def _closed_system(cfg: PropagationConfig, ops: NormalizedOperators, h: np.ndarray):
    """Reduce a closed-mode model to ``(I - gamma * a_hat) Z = rhs``."""
    m = cfg.model
    if m is Model.PPNP:
        return 1.0 - cfg.alpha, cfg.alpha * h
    if m is Model.GNN_LF:
        p = cfg.mu + 1.0 / cfg.alpha - 1.0
        q = 2.0 - cfg.mu - 1.0 / cfg.alpha
        rhs = (cfg.mu * h + (1.0 - cfg.mu) * spmm(ops.a_hat, h)) / p
        return -q / p, rhs
    if m is Model.GNN_HF:
        p = cfg.beta + 1.0 / cfg.alpha
        q = 1.0 - cfg.beta - 1.0 / cfg.alpha
        rhs = (h + cfg.beta * spmm(ops.l_tilde, h)) / p
        return -q / p, rhs
    if m is Model.JKNET_FIXED:
        return cfg.xi / (1.0 + cfg.xi), spmm(ops.a_hat, h) / (1.0 + cfg.xi)
    if m is Model.DAGNN_FIXED:
        return cfg.xi / (1.0 + cfg.xi), h / (1.0 + cfg.xi)
    if m is Model.GC_ONE_LAYER:
        return 0.5, h / 2.0
    raise ConfigError(f"{m.value} has no closed form")


def _solve_closed(cfg, ops, h):
    gamma, rhs = _closed_system(cfg, ops, h)
    a_hat = ops.a_hat
    op = lambda x: x - gamma * (a_hat @ x)
    n = a_hat.shape[0]
    x, report = cg_solve(op, rhs, tol=CG_TOL, max_iter=10 * n)
    if report.converged:
        return x
    if n <= CHOLESKY_FALLBACK_MAX_NODES:
        dense = np.eye(n) - gamma * a_hat.toarray()
        return cholesky_solve(dense, rhs)
    raise SolverError(
        f"cg missed tol={CG_TOL} after {report.iterations} iterations "
        f"(residual {report.residual_norm:.2e}) and n={n} exceeds the dense fallback"
    )


def propagate(cfg: PropagationConfig, ops: NormalizedOperators, h) -> np.ndarray:
    """Run one propagation model over transformed features ``h``.

    CLOSED mode solves the model's stationarity system; ITER mode runs
    exactly ``cfg.depth`` steps of the model's recurrence, including the
    model-specific initial state.  The map ``h -> Z`` is linear and, being a
    rational function of the symmetric ``a_hat``, symmetric itself.

    Raises
    ------
    ConfigError
        For an invalid model/mode pairing (also raised at config build).
    ShapeError
        If ``h`` does not have ``num_nodes`` rows.
    SolverError
        If CG fails and the instance is too large for the dense fallback.
    """
    h = as_dense(h, "h")
    n = ops.a_hat.shape[0]
    if h.shape[0] != n:
        raise ShapeError(f"h has {h.shape[0]} rows, graph has {n} nodes")
    a_hat = ops.a_hat
    m = cfg.model

    if m is Model.GC_ONE_LAYER:
        if cfg.gc_exact:
            return _solve_closed(cfg, ops, h)
        return spmm(a_hat, h)

    if cfg.mode is Mode.CLOSED:
        return _solve_closed(cfg, ops, h)

    k = cfg.depth
    if m is Model.SGC:
        z = h
        for _ in range(k):
            z = spmm(a_hat, z)
        return z
    if m is Model.APPNP:
        z = h
        for _ in range(k):
            z = (1.0 - cfg.alpha) * spmm(a_hat, z) + cfg.alpha * h
        return z
    if m is Model.JKNET_FIXED:
        weights = jknet_series_weights(cfg.xi, k)
        power = h
        z = np.zeros_like(h)
        for w in weights:
            power = spmm(a_hat, power)
            z += w * power
        return z
    if m is Model.DAGNN_FIXED:
        xi = cfg.xi
        power = h
        z = h / (1.0 + xi)
        coef = 1.0 / (1.0 + xi)
        for _ in range(k):
            power = spmm(a_hat, power)
            coef *= xi / (1.0 + xi)
            z += coef * power
        return z
    if m is Model.GNN_LF:
        ratio, c_h, c_ah, z0_h, z0_ah = _lf_terms(cfg.alpha, cfg.mu)
        ah = spmm(a_hat, h)
        z = z0_h * h + z0_ah * ah
        for _ in range(k):
            z = ratio * spmm(a_hat, z) + c_h * h + c_ah * ah
        return z
    if m is Model.GNN_HF:
        ratio, c_h, c_lh, z0_h, z0_lh = _hf_terms(cfg.alpha, cfg.beta)
        lh = spmm(ops.l_tilde, h)
        z = z0_h * h + z0_lh * lh
        for _ in range(k):
            z = ratio * spmm(a_hat, z) + c_h * h + c_lh * lh
        return z
    raise ConfigError(f"unhandled model {m}")


def _fit_parts(cfg: PropagationConfig, ops: NormalizedOperators, diff: np.ndarray):
    """Apply the model's fitting kernel M to a difference matrix."""
    if cfg.model is Model.GNN_LF:
        return cfg.mu * diff + (1.0 - cfg.mu) * spmm(ops.a_hat, diff)
    if cfg.model is Model.GNN_HF:
        return diff + cfg.beta * spmm(ops.l_tilde, diff)
    return diff


def _fit_target(cfg: PropagationConfig, ops: NormalizedOperators, h: np.ndarray):
    if cfg.model is Model.JKNET_FIXED:
        return spmm(ops.a_hat, h)
    return h


def objective_value(cfg, ops, z, h):
    """Evaluate the model objective at ``z``.

    Returns ``(fit, reg, total)`` where ``fit`` is the kernel-weighted
    fitting term, ``reg = xi * tr(z^T l_tilde z)`` and ``total`` their sum.
    SGC has ``fit == 0`` identically.
    """
    z = as_dense(z, "z")
    h = as_dense(h, "h")
    if z.shape != h.shape:
        raise ShapeError(f"z {z.shape} and h {h.shape} must match")
    n = ops.a_hat.shape[0]
    if z.shape[0] != n:
        raise ShapeError(f"z has {z.shape[0]} rows, graph has {n} nodes")
    if cfg.zeta == 0.0:
        fit = 0.0
    else:
        diff = z - _fit_target(cfg, ops, h)
        fit = cfg.zeta * float(np.sum(diff * _fit_parts(cfg, ops, diff)))
    reg = cfg.xi * float(np.sum(z * spmm(ops.l_tilde, z)))
    return fit, reg, fit + reg


def objective_gradient(cfg, ops, z, h) -> np.ndarray:
    """Gradient of the objective with respect to ``z``:
    ``2 zeta M (z - F2 h) + 2 xi l_tilde z``.
    """
    z = as_dense(z, "z")
    h = as_dense(h, "h")
    if z.shape != h.shape:
        raise ShapeError(f"z {z.shape} and h {h.shape} must match")
    if z.shape[0] != ops.a_hat.shape[0]:
        raise ShapeError(
            f"z has {z.shape[0]} rows, graph has {ops.a_hat.shape[0]} nodes"
        )
    grad = 2.0 * cfg.xi * spmm(ops.l_tilde, z)
    if cfg.zeta != 0.0:
        diff = z - _fit_target(cfg, ops, h)
        grad = grad + 2.0 * cfg.zeta * _fit_parts(cfg, ops, diff)
    return grad


def contraction_ratio(cfg: PropagationConfig) -> float:
    """Theoretical geometric factor for iterative-to-closed convergence."""
    m = cfg.model
    if m in (Model.PPNP, Model.APPNP):
        return 1.0 - cfg.alpha
    if m is Model.GNN_LF:
        den = 1.0 + cfg.alpha * cfg.mu - cfg.alpha
        return abs(1.0 + cfg.alpha * cfg.mu - 2.0 * cfg.alpha) / den
    if m is Model.GNN_HF:
        den = cfg.alpha * cfg.beta + 1.0
        return abs(cfg.alpha * cfg.beta - cfg.alpha + 1.0) / den
    raise ConfigError(f"{m.value} has no iterative/closed pair")


def _closed_iter_pair(cfg: PropagationConfig):
    common = dict(
        alpha=cfg.alpha, mu=cfg.mu, beta=cfg.beta,
        allow_boundary=cfg.allow_boundary,
    )
    if cfg.model in (Model.PPNP, Model.APPNP):
        closed = PropagationConfig(Model.PPNP, Mode.CLOSED, **common)
        make_iter = lambda k: PropagationConfig(Model.APPNP, Mode.ITER, depth=k, **common)
    elif cfg.model in (Model.GNN_LF, Model.GNN_HF):
        closed = PropagationConfig(cfg.model, Mode.CLOSED, **common)
        make_iter = lambda k: PropagationConfig(cfg.model, Mode.ITER, depth=k, **common)
    else:
        raise ConfigError(
            f"{cfg.model.value} has no iterative/closed pair to verify"
        )
    return closed, make_iter


def verify_convergence(cfg, ops, h, depths) -> list[ConvergenceReport]:
    """Measure ``||Z_iter(K) - Z_closed||_F / ||Z_closed||_F`` per depth.

    Supports the three closed/iterative pairs: APPNP against PPNP, GNN-LF
    iter against closed, GNN-HF iter against closed.  Each report carries
    the theoretical contraction ratio; the sequence of errors is
    non-increasing in K up to floating-point slack.
    """
    closed_cfg, make_iter = _closed_iter_pair(cfg)
    h = as_dense(h, "h")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        z_closed = propagate(closed_cfg, ops, h)
        denom = float(np.linalg.norm(z_closed))
        ratio = contraction_ratio(cfg)
        out = []
        for k in depths:
            z_k = propagate(make_iter(int(k)), ops, h)
            err = float(np.linalg.norm(z_k - z_closed)) / denom
            out.append(ConvergenceReport(int(k), err, ratio))
    return out


def jknet_series_weights(xi: float, depth: int) -> list[float]:
    """Truncated geometric layer weights ``xi^(k-1) / (1+xi)^k``, k=1..depth.

    The infinite series sums to 1; the truncation gap shrinks like
    ``(xi/(1+xi))^depth``.
    """
    if xi <= 0:
        raise ConfigError(f"xi must be > 0, got {xi}")
    if depth < 1:
        raise ConfigError(f"depth must be >= 1, got {depth}")
    weights = []
    w = 1.0 / (1.0 + xi)
    for _ in range(depth):
        weights.append(w)
        w *= xi / (1.0 + xi)
    return weights
