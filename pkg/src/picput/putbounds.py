"""Bounds on the chi-squared privacy-utility function.

The privacy-utility function F(eps) is the largest chi2(X;Y) achievable by
a channel X -> Y with chi2(S;Y) <= eps. It is sandwiched between a linear
lower bound and a piecewise-linear upper bound ``G`` whose slopes are the
reciprocals of the PICs of P_{S,X}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pic import chi2, chi2_via_trace, decompose, maximal_correlation
from .probspace import Channel, JointPmf, ValidationError, compose, joint_from_marginal, marginals

BOUNDARY_TOL = 1e-12
ACHIEVE_TOL = 1e-8


def g_function(m: int, t, eps: float) -> float:
    """Closed-form value of max sum(x) s.t. sum_i t_i x_i <= eps, x in [0,1]^m.

    Only the first ``len(t)`` coordinates are charged in the budget; the
    remaining ``m - len(t)`` are free and always set to 1.
    """
    t = np.asarray(t, dtype=float).ravel()
    n = t.size
    if n > m:
        raise ValidationError(f"n = {n} exceeds m = {m}")
    if np.any(t < 0) or np.any(t > 1) or not np.all(np.isfinite(t)):
        raise ValidationError("every t_i must lie in [0, 1]")
    total = float(t.sum())
    if eps < -BOUNDARY_TOL or eps > total + BOUNDARY_TOL:
        raise ValidationError(f"eps = {eps} outside [0, {total}]")
    eps = min(max(eps, 0.0), total)

    # ascending order: the j-th interval starts after the j smallest t's are spent
    pos = np.sort(t[t > 0], kind="stable")
    s = n - pos.size
    if pos.size == 0:
        return float(m)
    starts = np.concatenate([[0.0], np.cumsum(pos)])
    # a boundary within tolerance is assigned to the left interval
    j = int(np.searchsorted(starts[1:], eps - BOUNDARY_TOL, side="left"))
    j = min(j, pos.size - 1)
    return float(s + (m - n) + j + (eps - starts[j]) / pos[j])


def g_breakpoints(m: int, t) -> list[tuple[float, float]]:
    """(eps, G) vertices of the piecewise-linear curve, eps ascending."""
    t = np.asarray(t, dtype=float).ravel()
    pos = np.sort(t[t > 0])
    base = float(t.size - pos.size + (m - t.size))
    pts = [(0.0, base)]
    acc = 0.0
    for i, ti in enumerate(pos):
        acc += ti
        pts.append((acc, base + i + 1))
    return pts


def _pics(j: JointPmf) -> np.ndarray:
    return decompose(j).lambdas


def _check_eps(eps, upper):
    if eps < -BOUNDARY_TOL or eps > upper + BOUNDARY_TOL:
        raise ValidationError(f"eps = {eps} outside [0, chi2(S;X) = {upper}]")
    return min(max(float(eps), 0.0), upper)


def put_upper_bound(j: JointPmf, eps: float) -> float:
    """PIC-based upper bound on F(eps) for the source ``j`` over (S, X)."""
    lam = _pics(j)
    eps = _check_eps(eps, float(lam.sum()))
    return g_function(j.cols - 1, lam, eps)


def put_lower_bound(j: JointPmf, eps: float, f0: float | None = None) -> float:
    """Linear lower bound on F(eps), optionally lifted by a known F(0).

    When S and X are independent the slope is undefined; disclosing Y = X
    then leaks nothing about S, so the full |X| - 1 is returned.
    """
    m = j.cols - 1
    c = chi2(j)
    if c <= BOUNDARY_TOL:
        if eps < -BOUNDARY_TOL:
            raise ValidationError("eps must be non-negative")
        return float(m)
    eps = _check_eps(eps, c)
    if f0 is None:
        return m / c * eps
    if not 0 <= f0 <= m:
        raise ValidationError(f"F(0) = {f0} outside [0, {m}]")
    return (m - f0) / c * eps + f0


def simple_dpi_bound(j: JointPmf, eps: float) -> float:
    """The data-processing bound eps + |X| - 1 - chi2(S;X)."""
    c = chi2(j)
    eps = _check_eps(eps, c)
    return eps + j.cols - 1 - c


@dataclass(frozen=True)
class PutBoundCurve:
    epsilon_max: float
    breakpoints: list = field(default_factory=list)
    lower_slope: float = float("nan")
    f0: float | None = None

    def upper(self, eps) -> np.ndarray:
        xs, ys = zip(*self.breakpoints)
        return np.interp(eps, xs, ys)

    def lower(self, eps) -> np.ndarray:
        base = 0.0 if self.f0 is None else self.f0
        return base + self.lower_slope * np.asarray(eps, dtype=float)


def bound_curve(j: JointPmf, f0: float | None = None) -> PutBoundCurve:
    lam = _pics(j)
    m = j.cols - 1
    c = float(lam.sum())
    if c <= BOUNDARY_TOL:
        return PutBoundCurve(c, [(0.0, float(m))], 0.0, float(m))
    slope = (m - (f0 or 0.0)) / c
    return PutBoundCurve(c, g_breakpoints(m, lam), slope, f0)


def sweep(j: JointPmf, k: int, f0: float | None = None) -> list[dict]:
    """Evaluate lower/upper/DPI bounds on ``k`` evenly spaced eps in [0, chi2(S;X)]."""
    if k < 1:
        raise ValidationError("eps grid needs at least one point")
    c = chi2(j)
    grid = np.linspace(0.0, c, k) if k > 1 else np.array([c])
    return [
        {
            "eps": float(e),
            "lower": put_lower_bound(j, e, f0),
            "upper": put_upper_bound(j, e),
            "simple_dpi": simple_dpi_bound(j, e),
        }
        for e in grid
    ]


def high_privacy_mechanism(j: JointPmf) -> tuple[Channel, tuple[float, float]]:
    """Binary-output channel achieving chi2(X;Y) = P_Xmin, chi2(S;Y) = P_Xmin * lambda_min.

    Requires the smallest PIC to be positive with |X| <= |S|. The channel is
    P(y|x) = 1/2 + (-1)^y sqrt(P_Xmin) f(x) / 2 with ``f`` the X-side
    principal function of the smallest PIC.
    """
    if j.cols > j.rows:
        raise ValidationError("construction needs |X| <= |S| (delta is 0 otherwise)")
    _, p_x = marginals(j)
    if p_x.min() <= 0:
        raise ValidationError("P_Xmin is 0")
    dec = decompose(j)
    lam_min = float(dec.lambdas[-1])
    if lam_min <= 0:
        raise ValidationError("delta(P_SX) = 0; the high-privacy construction does not apply")
    f = dec.g[:, dec.d]
    pmin = float(p_x.min())
    half = np.sqrt(pmin) * f / 2.0
    # y = 1 gets the minus sign, y = 2 the plus sign
    w = np.column_stack([0.5 - half, 0.5 + half])
    w = np.clip(w, 0.0, 1.0)
    ch = Channel(w)
    achieved = chi2_via_trace(j, ch)
    if abs(achieved[0] - pmin) > ACHIEVE_TOL or abs(achieved[1] - pmin * lam_min) > ACHIEVE_TOL:
        raise ValidationError(f"mechanism check failed: achieved {achieved}, "
                              f"expected ({pmin}, {pmin * lam_min})")
    return ch, achieved


def rho_m_bound_and_mechanism(j: JointPmf, eps: float, mechanism: bool = False):
    """Upper bound eps / sqrt(lambda_min) on the maximal-correlation trade-off.

    With ``mechanism=True`` also returns ``(channel, (rho_xy, rho_sy))`` for
    the high-privacy channel, whose maximal correlations are sqrt(P_Xmin)
    and sqrt(P_Xmin * lambda_min).
    """
    if j.cols > j.rows:
        raise ValidationError("delta(P_SX) = 0; bound undefined")
    dec = decompose(j)
    lam_min = float(dec.lambdas[-1])
    if lam_min <= 0:
        raise ValidationError("delta(P_SX) = 0; bound undefined")
    rho_sx = float(np.sqrt(dec.lambdas[0]))
    if eps < -BOUNDARY_TOL or eps > rho_sx + BOUNDARY_TOL:
        raise ValidationError(f"eps = {eps} outside [0, rho_m(S;X) = {rho_sx}]")
    bound = max(float(eps), 0.0) / np.sqrt(lam_min)
    if not mechanism:
        return bound, None
    ch, _ = high_privacy_mechanism(j)
    _, p_x = marginals(j)
    rho_xy = maximal_correlation(joint_from_marginal(p_x, ch))
    rho_sy = maximal_correlation(compose(j, ch))
    pmin = float(p_x.min())
    if abs(rho_xy - np.sqrt(pmin)) > ACHIEVE_TOL or abs(rho_sy - np.sqrt(pmin * lam_min)) > ACHIEVE_TOL:
        raise ValidationError("maximal-correlation mechanism check failed")
    return bound, (ch, (rho_xy, rho_sy))
