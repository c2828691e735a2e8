"""Filter coefficients and frequency responses.

In the eigenbasis of ``l_tilde`` every propagation operator is a scalar
function of the eigenvalue ``lam`` in [0, 2).  Depth-K iterates act as low
order polynomials; closed forms act as rational functions of ``lam``.

Two polynomial objects exist per model and depth and must not be confused:

- ``expand_iterate``: the exact depth-K iterate, initial state included,
  so ``Z^(K) = (sum_i c_i a_hat^i) H`` holds to the last bit.
- ``geometric_truncation``: the leading K terms of the geometric series the
  iterate converges to, equal to the same recurrence started from the zero
  state.  The per-order coefficient formulas in ``closed_coefficients``
  describe this object, not the iterate.

All expansion arithmetic runs on exact rationals and is rounded to float
only when packed into ``FilterCoefficients``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .errors import ConfigError
from .propagation import Model, PropagationConfig

__all__ = [
    "Basis",
    "FilterCoefficients",
    "MAX_EXPANSION_DEPTH",
    "expand_iterate",
    "geometric_truncation",
    "to_laplacian_basis",
    "closed_coefficients",
    "coefficient_discrepancies",
    "polynomial_response",
    "rational_response",
]

# binomial growth keeps exact coefficients representable up to here
MAX_EXPANSION_DEPTH = 64


class Basis(Enum):
    LAPLACIAN_MONOMIAL = "laplacian"
    AHAT_MONOMIAL = "ahat"


@dataclass(frozen=True)
class FilterCoefficients:
    """Polynomial filter: theta[k] multiplies l_tilde^k (or a_hat^k)."""

    order: int
    theta: tuple[float, ...]
    basis: Basis

    def __post_init__(self):
        if len(self.theta) != self.order + 1:
            raise ConfigError(
                f"theta has {len(self.theta)} entries, order {self.order} needs "
                f"{self.order + 1}"
            )
        if not all(math.isfinite(t) for t in self.theta):
            raise ConfigError("theta entries must be finite")


def _check_depth(depth: int, minimum: int) -> int:
    depth = int(depth)
    if depth < minimum:
        raise ConfigError(f"depth must be >= {minimum}, got {depth}")
    if depth > MAX_EXPANSION_DEPTH:
        raise ConfigError(
            f"depth must be <= {MAX_EXPANSION_DEPTH}, got {depth}"
        )
    return depth


def _recurrence_terms(cfg: PropagationConfig):
    """Exact (ratio, forcing, initial) of the scalar recurrence on the
    a_hat-monomial basis.  ``forcing`` and ``initial`` are low-degree
    coefficient lists."""
    al = Fraction(cfg.alpha)
    one = Fraction(1)
    if cfg.model in (Model.PPNP, Model.APPNP):
        return one - al, [al], [one]
    if cfg.model is Model.GNN_LF:
        mu = Fraction(cfg.mu)
        den = one + al * mu - al
        ratio = (one + al * mu - 2 * al) / den
        forcing = [al * mu / den, (al - al * mu) / den]
        initial = [mu / den, (one - mu) / den]
        return ratio, forcing, initial
    if cfg.model is Model.GNN_HF:
        be = Fraction(cfg.beta)
        den = al * be + one
        ratio = (al * be - al + one) / den
        # the l_tilde H forcing re-expressed over {H, a_hat H}
        forcing = [al * (be + one) / den, -al * be / den]
        initial = [(one + be) / den, -be / den]
        return ratio, forcing, initial
    raise ConfigError(f"{cfg.model.value} has no geometric recurrence")


def _run_recurrence(state, ratio, forcing, steps):
    for _ in range(steps):
        new = [Fraction(0)] + [ratio * c for c in state]
        for i, f in enumerate(forcing):
            new[i] += f
        state = new
    return state


def _iterate_fractions(cfg: PropagationConfig, depth: int):
    m = cfg.model
    if m is Model.SGC:
        depth = _check_depth(depth, 0)
        return [Fraction(0)] * depth + [Fraction(1)]
    if m is Model.GC_ONE_LAYER:
        if cfg.gc_exact:
            raise ConfigError("exact gc is not a finite polynomial")
        return [Fraction(0), Fraction(1)]
    if m is Model.PPNP:
        raise ConfigError("ppnp has no iterate; expand appnp instead")
    if m is Model.JKNET_FIXED:
        depth = _check_depth(depth, 1)
        xi = Fraction(cfg.xi)
        return [Fraction(0)] + [
            xi ** (k - 1) / (1 + xi) ** k for k in range(1, depth + 1)
        ]
    if m is Model.DAGNN_FIXED:
        depth = _check_depth(depth, 0)
        xi = Fraction(cfg.xi)
        return [xi ** k / (1 + xi) ** (k + 1) for k in range(depth + 1)]
    depth = _check_depth(depth, 0)
    ratio, forcing, initial = _recurrence_terms(cfg)
    return _run_recurrence(initial, ratio, forcing, depth)


def _truncation_fractions(cfg: PropagationConfig, depth: int):
    m = cfg.model
    if m in (Model.PPNP, Model.APPNP, Model.GNN_LF, Model.GNN_HF):
        depth = _check_depth(depth, 1)
        ratio, forcing, _ = _recurrence_terms(cfg)
        return _run_recurrence([Fraction(0)], ratio, forcing, depth)
    # remaining iterable models are already truncated series
    return _iterate_fractions(cfg, depth)


def _pack(fracs, basis: Basis) -> FilterCoefficients:
    return FilterCoefficients(
        order=len(fracs) - 1,
        theta=tuple(float(c) for c in fracs),
        basis=basis,
    )


def expand_iterate(cfg: PropagationConfig, depth: int) -> FilterCoefficients:
    """Exact a_hat-monomial coefficients of the depth-K iterate.

    The returned ``c`` satisfies ``Z^(K) = (sum_i c[i] a_hat^i) H`` exactly:
    the recurrence is run on the formal monomial basis in exact rational
    arithmetic, initial state included.  Models whose iterate starts at a
    degree-1 state (gnn-lf, gnn-hf) come back with ``order == depth + 1``.

    Raises ConfigError for models without an iterate (ppnp, exact gc) and
    for depth outside [0, 64].
    """
    return _pack(_iterate_fractions(cfg, depth), Basis.AHAT_MONOMIAL)


def geometric_truncation(cfg: PropagationConfig, depth: int) -> FilterCoefficients:
    """Leading ``depth`` terms of the model's limiting geometric series.

    Equivalently: the iterate recurrence started from the zero state.  This
    is the polynomial the closed-form coefficient formulas describe; it
    differs from ``expand_iterate`` by the propagated initial state, a gap
    that shrinks like contraction_ratio^depth.
    """
    return _pack(_truncation_fractions(cfg, depth), Basis.AHAT_MONOMIAL)


def _to_laplacian_fractions(coeffs):
    n = len(coeffs) - 1
    out = []
    for k in range(n + 1):
        sign = Fraction(-1) ** k
        out.append(
            sum(
                (coeffs[i] * sign * math.comb(i, k) for i in range(k, n + 1)),
                Fraction(0),
            )
        )
    return out


def to_laplacian_basis(c: FilterCoefficients) -> FilterCoefficients:
    """Re-expand a_hat monomials over l_tilde monomials.

    Substituting a_hat = I - l_tilde gives
    ``theta[k] = sum_{i>=k} c[i] (-1)^k C(i,k)``; binomials are exact
    integers so each output entry is one compensated float sum.
    """
    if c.basis is not Basis.AHAT_MONOMIAL:
        raise ConfigError("input must be in the a_hat monomial basis")
    n = c.order
    theta = []
    for k in range(n + 1):
        sign = (-1) ** k
        theta.append(
            math.fsum(
                c.theta[i] * sign * math.comb(i, k) for i in range(k, n + 1)
            )
        )
    return FilterCoefficients(n, tuple(theta), Basis.LAPLACIAN_MONOMIAL)


def _lf_deltas(cfg, depth):
    al, mu = Fraction(cfg.alpha), Fraction(cfg.mu)
    den = 1 + al * mu - al
    r = (1 + al * mu - 2 * al) / den
    a = al * mu / den
    b = (al - al * mu) / (1 + al * mu - 2 * al)
    deltas = {0: a, depth: b * r ** depth}
    for j in range(1, depth):
        deltas[j] = (a + b) * r ** j
    return deltas, a, b, r


def _hf_deltas(cfg, depth):
    al, be = Fraction(cfg.alpha), Fraction(cfg.beta)
    den = al * be + 1
    d = (al * be - al + 1) / den
    a = al * (be + 1) / den
    b = al * be / (al * be - al + 1)
    deltas = {0: a, depth: -b * d ** depth}
    for j in range(1, depth):
        deltas[j] = (a - b) * d ** j
    return deltas, a, b, d


def _closed_theta_fractions(cfg, depth, verbatim):
    m = cfg.model
    k_range = range(depth + 1)
    if m is Model.SGC:
        return [Fraction((-1) ** k * math.comb(depth, k)) for k in k_range]
    if m in (Model.PPNP, Model.APPNP):
        al = Fraction(cfg.alpha)
        return [
            al
            * sum(
                ((1 - al) ** i * (-1) ** k * math.comb(i, k) for i in range(k, depth)),
                Fraction(0),
            )
            for k in k_range
        ]
    if m is Model.GNN_LF:
        deltas, a, b, r = _lf_deltas(cfg, depth)
        head_excess, tail_excess = a * (r - 1), a * r ** depth
    elif m is Model.GNN_HF:
        deltas, a, b, r = _hf_deltas(cfg, depth)
        head_excess, tail_excess = a * (r - 1), a * r ** depth
    else:
        raise ConfigError(f"no published coefficient formula for {m.value}")

    theta = [
        sum(
            (deltas[j] * (-1) ** k * math.comb(j, k) for j in range(k, depth + 1)),
            Fraction(0),
        )
        for k in k_range
    ]
    if verbatim:
        # as printed: theta_0 leads with a*r instead of a, and every middle
        # order sums delta_j over j up to K with the geometric delta_K
        # instead of the boundary one
        theta[0] += head_excess
        for k in range(1, depth):
            theta[k] += tail_excess * (-1) ** k * math.comb(depth, k)
    return theta


def closed_coefficients(
    cfg: PropagationConfig, depth: int, verbatim: bool = False
) -> FilterCoefficients:
    """Per-order filter coefficients of the depth-K truncated series.

    Evaluates the published summation formulas for sgc, ppnp/appnp, gnn-lf
    and gnn-hf over l_tilde monomials.  The default corrects two misprints
    in the gnn-lf/gnn-hf versions (a stray contraction factor on the order-0
    head, and the order-K boundary weight leaking into middle orders);
    ``verbatim=True`` evaluates the formulas exactly as printed.  The
    corrected form agrees with ``to_laplacian_basis(geometric_truncation)``
    identically; use ``coefficient_discrepancies`` to see what the misprints
    change.
    """
    depth = _check_depth(depth, 1)
    return FilterCoefficients(
        order=depth,
        theta=tuple(float(t) for t in _closed_theta_fractions(cfg, depth, verbatim)),
        basis=Basis.LAPLACIAN_MONOMIAL,
    )


def coefficient_discrepancies(cfg, depth, tol=1e-9):
    """Orders where the verbatim formulas disagree with the recurrence.

    Returns ``(k, verbatim_value, recurrence_value)`` triples for every
    order whose gap exceeds ``tol``; the recurrence value is ground truth.
    Empty for sgc and ppnp.
    """
    depth = _check_depth(depth, 1)
    verbatim = _closed_theta_fractions(cfg, depth, True)
    oracle = _to_laplacian_fractions(_truncation_fractions(cfg, depth))
    return [
        (k, float(v), float(o))
        for k, (v, o) in enumerate(zip(verbatim, oracle))
        if abs(v - o) > tol
    ]


def polynomial_response(c: FilterCoefficients, lam):
    """Filter response at Laplacian eigenvalue ``lam`` (Horner form).

    Laplacian-basis input evaluates ``sum theta[k] lam^k``; a_hat-basis
    input evaluates the same response via ``sum c[i] (1-lam)^i``.
    """
    x = lam if c.basis is Basis.LAPLACIAN_MONOMIAL else 1 - lam
    acc = 0.0
    for t in reversed(c.theta):
        acc = acc * x + t
    return float(acc)


def _rational_fraction(cfg: PropagationConfig, lam: Fraction) -> Fraction:
    m = cfg.model
    al = Fraction(cfg.alpha)
    if m in (Model.PPNP, Model.APPNP):
        return al / (al + lam - al * lam)
    if m is Model.GNN_LF:
        mu = Fraction(cfg.mu)
        p = mu + 1 / al - 1
        q = 2 - mu - 1 / al
        return (mu + (1 - mu) * (1 - lam)) / (p + q * (1 - lam))
    if m is Model.GNN_HF:
        be = Fraction(cfg.beta)
        p = be + 1 / al
        q = 1 - be - 1 / al
        return (1 + be * lam) / (p + q * (1 - lam))
    raise ConfigError(f"{m.value} has no limiting rational response")


def rational_response(cfg: PropagationConfig, lam) -> float:
    """Exact infinite-depth response at Laplacian eigenvalue ``lam``.

    Computed in rational arithmetic, so ``lam = 0`` returns 1.0 exactly for
    ppnp/appnp, gnn-lf and gnn-hf.  Models without a limiting closed form
    raise ConfigError.
    """
    return float(_rational_fraction(cfg, Fraction(lam)))
