"""MMSE lower bounds from partial correlation knowledge.

Setting: a standardized target phi(X) has known correlations rho_i with an
orthonormal set of reference functions phi_i(X), and every reference is
known to be hard to estimate from Y, ||E[phi_i(X)|Y]||_2 <= nu_i. The
bounds below turn that into a ceiling on ||E[phi(X)|Y]||_2, i.e. a floor on
mmse(phi(X)|Y).

Everything rests on the small quadratic program

    L_n(a, b) = max { a^T y : ||y||_2 <= 1, y <= b },

which has a closed form plus an explicit dual certificate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .pic import conditional_expectation
from .probspace import JointPmf, ValidationError, marginals

SUM_TOL = 1e-10
RHO0_TOL = 1e-12
CROSS_TOL = 1e-8
# keeps the dual finite when 1 - sum(b^2) rounds to zero
C_FLOOR = 1e-300


@dataclass(frozen=True)
class LnResult:
    value: float
    y: np.ndarray
    u: np.ndarray

    def primal(self, a) -> float:
        return float(np.dot(a, self.y))

    def dual(self, a, b) -> float:
        return dual_value(a, b, self.u)

    def to_dict(self) -> dict:
        return {"value": self.value, "y": self.y.tolist(), "u": self.u.tolist()}


def dual_value(a, b, u) -> float:
    """L_D(u) = a^T b + u^T b + ||u||_2, an upper bound on L_n for u >= -a."""
    a, b, u = (np.asarray(v, dtype=float) for v in (a, b, u))
    return float(a @ b + u @ b + np.linalg.norm(u))


def l_n(a, b) -> LnResult:
    """Closed-form L_n(a, b) with primal maximizer and dual certificate.

    Parameters
    ----------
    a : array_like
        Strictly positive weights.
    b : array_like
        Upper limits in [0, 1].

    Returns
    -------
    LnResult
        ``value``, the maximizer ``y`` and a dual point ``u >= -a`` whose
        dual objective equals ``value``.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape or a.size == 0:
        raise ValidationError("a and b must be non-empty vectors of equal length")
    if not np.all(np.isfinite(a)) or np.any(a <= 0):
        raise ValidationError("every a_i must be positive")
    if not np.all(np.isfinite(b)) or np.any(b < 0) or np.any(b > 1):
        raise ValidationError("every b_i must lie in [0, 1]")

    n = a.size
    norm2 = float(a @ a)
    order = np.argsort(b / a, kind="stable")
    a_s, b_s = a[order], b[order]

    # y = a / ||a|| is feasible: the norm constraint alone binds
    if b_s[0] / a_s[0] >= 1.0 / np.sqrt(norm2):
        return LnResult(float(np.sqrt(norm2)), a / np.sqrt(norm2), -a.copy())

    # tail sums taken directly rather than as ||a||^2 minus a prefix, which
    # cancels badly when the tail is small
    a2_tail = np.cumsum((a_s ** 2)[::-1])[::-1]
    b2_before = np.concatenate([[0.0], np.cumsum(b_s ** 2)[:-1]])
    k_star = 0
    for k in range(n):
        rest = a2_tail[k]
        # the tail mass can only vanish through rounding; treat as +inf ratio
        limit = np.inf if rest <= 0 else np.sqrt(max(1.0 - b2_before[k], 0.0) / rest)
        if b_s[k] / a_s[k] <= limit:
            k_star = k + 1

    y_s = np.empty(n)
    u_s = np.empty(n)
    y_s[:k_star] = b_s[:k_star]
    if k_star == n:
        u_s[:] = 0.0
        value = float(a_s @ b_s)
    else:
        rest_a = float(a2_tail[k_star])
        rest_b = max(1.0 - float(np.sum(b_s[:k_star] ** 2)), 0.0)
        c = max(np.sqrt(rest_b / rest_a), C_FLOOR)
        y_s[k_star:] = a_s[k_star:] * c
        u_s[:k_star] = -b_s[:k_star] / c
        u_s[k_star:] = -a_s[k_star:]
        value = float(a_s[:k_star] @ b_s[:k_star] + np.sqrt(rest_a * rest_b))

    y = np.empty(n)
    u = np.empty(n)
    y[order] = y_s
    u[order] = u_s
    return LnResult(value, y, u)


@dataclass(frozen=True)
class CorrelationSpec:
    """Correlations of a target with references plus estimability ceilings.

    The first ``t`` references are those satisfying the cross-orthogonality
    condition E[psi_i(Y) phi_j(X)] = 0 for j != i. Signed correlations are
    folded to absolute values.
    """

    rhos: np.ndarray
    nus: np.ndarray
    t: int = 0
    rho0: float = field(init=False)

    def __post_init__(self):
        rhos = np.abs(np.asarray(self.rhos, dtype=float).ravel())
        nus = np.asarray(self.nus, dtype=float).ravel()
        if rhos.shape != nus.shape:
            raise ValidationError("rhos and nus must have equal length")
        if not (np.all(np.isfinite(rhos)) and np.all(np.isfinite(nus))):
            raise ValidationError("non-finite correlation data")
        if np.any(rhos > 1):
            raise ValidationError("every |rho_i| must be at most 1")
        if np.any(nus < 0) or np.any(nus > 1):
            raise ValidationError("every nu_i must lie in [0, 1]")
        total = float(rhos @ rhos)
        if total > 1 + SUM_TOL:
            raise ValidationError(f"sum of rho_i^2 is {total}, exceeds 1")
        if not 0 <= int(self.t) <= rhos.size:
            raise ValidationError(f"t = {self.t} outside [0, {rhos.size}]")
        rhos.setflags(write=False)
        nus.setflags(write=False)
        object.__setattr__(self, "rhos", rhos)
        object.__setattr__(self, "nus", nus)
        object.__setattr__(self, "t", int(self.t))
        # a deficit at rounding level means the references span the target
        deficit = 1.0 - total if 1.0 - total > SUM_TOL else 0.0
        object.__setattr__(self, "rho0", float(np.sqrt(deficit)))

    @property
    def m(self) -> int:
        return self.rhos.size

    @classmethod
    def from_dict(cls, data: dict) -> "CorrelationSpec":
        try:
            return cls(data["rhos"], data["nus"], data.get("t", 0))
        except KeyError as exc:
            raise ValidationError(f"spec is missing field {exc.args[0]!r}") from None


def _b_weights(rho0, rhos, nus):
    """Weights and limits fed to L for the B_m construction.

    Zero correlations are dropped: they add nothing to a^T y and y_i = 0 is
    always feasible.
    """
    keep = rhos > 0
    a, b = rhos[keep], nus[keep]
    if rho0 > RHO0_TOL:
        a = np.concatenate([[rho0], a])
        b = np.concatenate([[1.0], b])
    return a, b


def _b_generic(rho0, rhos, nus) -> tuple[float, LnResult | None]:
    a, b = _b_weights(rho0, rhos, nus)
    if a.size == 0:
        return 0.0, None
    res = l_n(a, b)
    return min(res.value, 1.0), res


def b_m(spec: CorrelationSpec) -> float:
    """Ceiling on ||E[phi(X)|Y]||_2 that ignores cross-orthogonality."""
    return _b_generic(spec.rho0, spec.rhos, spec.nus)[0]


def estimability_bound(spec: CorrelationSpec) -> tuple[float, LnResult | None]:
    """Ceiling on ||E[phi(X)|Y]||_2 using the first ``spec.t`` references.

    Returns the ceiling and the L_n certificate of the residual term (None
    when no residual term is left).
    """
    t = spec.t
    head = float(np.sum(spec.nus[:t] ** 2 * spec.rhos[:t] ** 2))
    tail, cert = _b_generic(spec.rho0, spec.rhos[t:], spec.nus[t:])
    return float(np.sqrt(min(head + tail ** 2, 1.0))), cert


def mmse_lower_bound(spec: CorrelationSpec) -> float:
    """Lower bound on mmse(phi(X)|Y), clamped to [0, 1]."""
    value, _ = estimability_bound(spec)
    return float(min(max(1.0 - value ** 2, 0.0), 1.0))


def parity_mmse(coeffs: dict, eps: float, tol: float = 1e-10) -> float:
    """MMSE of phi(X^n) from Y^n through a memoryless BSC(eps) on uniform bits.

    ``coeffs`` maps subsets of bit indices (any iterable) to the Fourier
    coefficient c_S of the standardized phi.
    """
    if not 0 <= eps < 0.5:
        raise ValidationError("eps must lie in [0, 0.5)")
    total = sum(float(c) ** 2 for c in coeffs.values())
    if abs(total - 1.0) > tol:
        raise ValidationError(f"sum of c_S^2 is {total}, not 1")
    kept = sum(float(c) ** 2 * (1 - 2 * eps) ** (2 * len(set(s))) for s, c in coeffs.items())
    return float(max(1.0 - kept, 0.0))


def parity_mmse_exhaustive(coeffs: dict, n: int, eps: float) -> float:
    """Same quantity by direct summation over all (x, y) in {-1,1}^n x {-1,1}^n."""
    pts = np.array(np.meshgrid(*[[-1, 1]] * n, indexing="ij")).reshape(n, -1).T
    phi = np.zeros(len(pts))
    for s, c in coeffs.items():
        phi += float(c) * np.prod(pts[:, sorted(set(s))], axis=1)
    flips = (pts[:, None, :] != pts[None, :, :]).sum(axis=2)
    joint = (eps ** flips) * ((1 - eps) ** (n - flips)) / len(pts)
    j = JointPmf(joint / joint.sum())
    cond = conditional_expectation(phi, j)
    p_x, p_y = marginals(j)
    return float(phi ** 2 @ p_x - cond ** 2 @ p_y)


def all_subsets(n: int):
    for k in range(n + 1):
        yield from combinations(range(n), k)


def one_bit_guess_bound(rhos, alphas, means=None) -> float:
    """Lower bound on Pr(B != B_hat) for a one-bit target.

    ``alphas[i]`` is the known error floor for guessing reference bit B_i,
    so nu_i = 1 - 2 alpha_i. The bound is (1 - L_m(rho, nu)) / 2. It drops
    the rho_0 term; see :func:`one_bit_report` for the completeness flag.
    """
    rhos = np.abs(np.asarray(rhos, dtype=float).ravel())
    alphas = np.asarray(alphas, dtype=float).ravel()
    if rhos.shape != alphas.shape or rhos.size == 0:
        raise ValidationError("rhos and alphas must be non-empty and of equal length")
    upper = np.full(alphas.shape, 0.5)
    if means is not None:
        means = np.asarray(means, dtype=float).ravel()
        if means.shape != alphas.shape or np.any(means < 0) or np.any(means > 1):
            raise ValidationError("means must lie in [0, 1], one per reference")
        upper = (1.0 - means) / 2.0
    if np.any(alphas < 0) or np.any(alphas > upper + 1e-15):
        raise ValidationError("every alpha_i must lie in [0, (1 - b_i)/2]")
    if np.any(rhos > 1) or float(rhos @ rhos) > 1 + SUM_TOL:
        raise ValidationError("correlations must satisfy sum rho_i^2 <= 1")
    keep = rhos > 0
    if not keep.any():
        return 0.5
    val = l_n(rhos[keep], 1.0 - 2.0 * alphas[keep]).value
    return float(min(max((1.0 - val) / 2.0, 0.0), 0.5))


def one_bit_report(rhos, alphas, means=None) -> dict:
    rhos = np.abs(np.asarray(rhos, dtype=float).ravel())
    total = float(rhos @ rhos)
    return {
        "bound": one_bit_guess_bound(rhos, alphas, means),
        "sum_rho_sq": total,
        # the printed bound omits rho_0, so it is only fully justified when
        # the references span phi
        "references_span_target": bool(total >= 1 - SUM_TOL),
    }


def spec_from_joint(j_xy: JointPmf, phi, refs, t: int = 0, tol: float = CROSS_TOL) -> CorrelationSpec:
    """Build a spec from a concrete P_{X,Y}, verifying every precondition.

    ``phi`` and each row of ``refs`` are functions of X. The references must
    be orthonormal and standardized; the first ``t`` must satisfy the
    cross-orthogonality condition, which is checked to ``tol``.
    """
    p_x, p_y = marginals(j_xy)
    phi = np.asarray(phi, dtype=float)
    refs = np.atleast_2d(np.asarray(refs, dtype=float))
    if phi.shape != p_x.shape or refs.shape[1] != p_x.size:
        raise ValidationError("functions must be tabulated over the X alphabet")
    gram = (refs * p_x) @ refs.T
    if np.max(np.abs(gram - np.eye(len(refs)))) > tol:
        raise ValidationError("reference functions are not orthonormal")
    if abs(phi @ p_x) > tol or abs(phi ** 2 @ p_x - 1) > tol or np.max(np.abs(refs @ p_x)) > tol:
        raise ValidationError("target and references must be zero-mean, target unit-norm")

    rhos_signed = (refs * p_x) @ phi
    cond = np.array([conditional_expectation(r, j_xy) for r in refs])
    nus = np.sqrt(np.maximum(cond ** 2 @ p_y, 0.0))
    total = float(rhos_signed @ rhos_signed)
    rho0 = np.sqrt(1 - total) if 1 - total > SUM_TOL else 0.0
    if t:
        phi0 = (phi - rhos_signed @ refs) / rho0 if rho0 > RHO0_TOL else np.zeros_like(phi)
        targets = np.vstack([phi0[None, :], refs])
        for i in range(t):
            if nus[i] <= tol:
                continue
            psi = cond[i] / nus[i]
            # E[psi_i(Y) phi_j(X)] = sum_{x,y} P(x,y) phi_j(x) psi_i(y)
            cross = targets @ j_xy.p @ psi
            cross[i + 1] = 0.0
            if np.max(np.abs(cross)) > tol:
                raise ValidationError(
                    f"reference {i} fails the cross-orthogonality check (max {np.max(np.abs(cross)):.3g})")
    return CorrelationSpec(rhos_signed, np.minimum(nus, 1.0), t)
