"""Principal inertia components (PICs) and chi-squared quantities.

The PICs of a joint pmf P_{U,V} are the squared singular values (after the
leading one, which is always 1) of the whitened matrix

    Q = D_U^{-1/2} P D_V^{-1/2},

and the principal functions are the singular vectors mapped back through
D^{-1/2}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .probspace import (
    Channel,
    JointPmf,
    ValidationError,
    compose,
    joint_from_marginal,
    marginals,
    require_positive_marginals,
)

TOP_SV_TOL = 1e-8
LAMBDA_FLOOR = 1e-12


class DecompositionError(ValidationError):
    """SVD failed or produced a top singular value away from 1."""


@dataclass(frozen=True)
class PicDecomposition:
    """PICs plus principal-function tables for both alphabets.

    ``f[:, k]`` is the k-th principal function on the first alphabet and
    ``g[:, k]`` the k-th on the second; column 0 is the constant function.
    ``lambdas[k - 1]`` pairs with column ``k``.
    """

    lambdas: np.ndarray
    f: np.ndarray
    g: np.ndarray
    p_u: np.ndarray
    p_v: np.ndarray

    @property
    def d(self) -> int:
        return len(self.lambdas)

    def chi2(self) -> float:
        return float(self.lambdas.sum())

    def reconstruct(self) -> np.ndarray:
        """Rebuild the joint matrix as D_U F diag(1, sqrt(lambda)) G^T D_V."""
        k = self.d + 1
        sv = np.concatenate([[1.0], np.sqrt(self.lambdas)])
        return (self.p_u[:, None] * self.f[:, :k]) @ np.diag(sv) @ (self.g[:, :k].T * self.p_v[None, :])

    def to_dict(self) -> dict:
        # one inner list per principal function
        return {"lambdas": self.lambdas.tolist(), "f": self.f.T.tolist(), "g": self.g.T.tolist()}


def whitened(j: JointPmf) -> np.ndarray:
    pu, pv = require_positive_marginals(j)
    return j.p / np.sqrt(pu)[:, None] / np.sqrt(pv)[None, :]


def _first_nonzero_sign(col: np.ndarray) -> float:
    scale = np.max(np.abs(col))
    idx = np.flatnonzero(np.abs(col) > 1e-9 * max(scale, 1e-300))
    if idx.size == 0:
        return 1.0
    return 1.0 if col[idx[0]] > 0 else -1.0


def decompose(j: JointPmf) -> PicDecomposition:
    """PIC decomposition of ``j`` via a full SVD of the whitened matrix."""
    pu, pv = require_positive_marginals(j)
    q = j.p / np.sqrt(pu)[:, None] / np.sqrt(pv)[None, :]
    try:
        u, s, vt = np.linalg.svd(q, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(f"SVD failed: {exc}") from exc
    if abs(s[0] - 1.0) > TOP_SV_TOL:
        raise DecompositionError(f"top singular value {s[0]!r} is not 1; invalid pmf?")
    v = vt.T
    r, c = q.shape
    d = min(r, c) - 1

    # paired columns flip together so that u_k^T Q v_k stays >= 0
    for k in range(min(r, c)):
        sign = _first_nonzero_sign(v[:, k])
        u[:, k] *= sign
        v[:, k] *= sign
    for k in range(min(r, c), r):
        u[:, k] *= _first_nonzero_sign(u[:, k])
    for k in range(min(r, c), c):
        v[:, k] *= _first_nonzero_sign(v[:, k])

    lam = np.clip(s[1:d + 1] ** 2, 0.0, 1.0)
    lam[lam < LAMBDA_FLOOR] = 0.0
    f = u / np.sqrt(pu)[:, None]
    g = v / np.sqrt(pv)[:, None]
    # column 0 is +sqrt(p) up to sign; the loop above already made g_0 positive
    for arr in (f, g, lam):
        arr.setflags(write=False)
    return PicDecomposition(lam, f, g, pu, pv)


def chi2(j: JointPmf) -> float:
    """Chi-squared information sum P(u,v)^2 / (P(u) P(v)) - 1."""
    pu, pv = require_positive_marginals(j)
    return float(np.sum(j.p ** 2 / np.outer(pu, pv)) - 1.0)


def chi2_via_trace(j_sx: JointPmf, c: Channel) -> tuple[float, float]:
    """Return ``(chi2(X;Y), chi2(S;Y))`` through the trace identities.

    With A = Q_XY Q_XY^T and B = Q_SX^T Q_SX, chi2(X;Y) = tr(A) - 1 and
    chi2(S;Y) = tr(BA) - 1.
    """
    if c.in_size != j_sx.cols:
        raise ValidationError("channel input size does not match joint columns")
    q_sx = whitened(j_sx)
    p_x = j_sx.p.sum(axis=0)
    p_xy = p_x[:, None] * c.w
    p_y = p_xy.sum(axis=0)
    if p_y.min() <= 0:
        raise ValidationError("output symbol with zero probability under the pushed-forward pmf")
    q_xy = p_xy / np.sqrt(p_x)[:, None] / np.sqrt(p_y)[None, :]
    a = q_xy @ q_xy.T
    b = q_sx.T @ q_sx
    return float(np.trace(a) - 1.0), float(np.trace(b @ a) - 1.0)


def maximal_correlation(j: JointPmf) -> float:
    lam = decompose(j).lambdas
    return float(np.sqrt(lam[0])) if lam.size else 0.0


def conditional_expectation(f, j: JointPmf) -> np.ndarray:
    """Table of E[f(U) | V = v] over the second alphabet."""
    f = np.asarray(f, dtype=float)
    if f.shape != (j.rows,):
        raise ValidationError(f"function has {f.shape} values, first alphabet has {j.rows}")
    pv = j.p.sum(axis=0)
    if pv.min() <= 0:
        raise ValidationError("zero marginal on the conditioning variable")
    return (f @ j.p) / pv


def mmse_of_function(f, j: JointPmf) -> float:
    """MMSE of estimating f(U) from V: E[f^2] - E[E[f(U)|V]^2]."""
    f = np.asarray(f, dtype=float)
    cond = conditional_expectation(f, j)
    pu, pv = marginals(j)
    val = float(np.dot(f ** 2, pu) - np.dot(cond ** 2, pv))
    return max(val, 0.0)


def mmse_decomposition_check(f, dec: PicDecomposition, tol: float = 1e-10) -> float:
    """MMSE of a zero-mean f(U) from V, assembled from the PIC spectrum."""
    f = np.asarray(f, dtype=float)
    if abs(np.dot(f, dec.p_u)) > tol:
        raise ValidationError("function is not zero-mean under the first marginal")
    coef = (dec.f.T * dec.p_u[None, :]) @ f
    lam = np.zeros(dec.f.shape[1] - 1)
    lam[:dec.d] = dec.lambdas
    return float(np.sum(coef[1:] ** 2 * (1.0 - lam)))


def delta(j: JointPmf) -> float:
    """Smallest PIC when the second alphabet is no larger than the first, else 0."""
    if j.cols > j.rows:
        return 0.0
    return float(decompose(j).lambdas[-1])


def chi2_of_chain(j_sx: JointPmf, c: Channel) -> tuple[float, float]:
    """``(chi2(X;Y), chi2(S;Y))`` by composing the joints explicitly."""
    p_x = j_sx.p.sum(axis=0)
    return chi2(joint_from_marginal(p_x, c)), chi2(compose(j_sx, c))
