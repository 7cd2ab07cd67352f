"""Finite-sample robustness of chi-squared privacy/utility figures.

A channel designed on an empirical pmf is deployed on the true one. The
chi-squared values measured at training time differ from the deployed ones
by at most a multiple of the L1 distance between the two pmfs, and that
distance shrinks like 1/sqrt(n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .probspace import Channel, JointPmf, ValidationError, l1_distance, marginals


class _Unbounded:
    """Marker for a bound that degenerates because a minorant is zero."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "unbounded"

    __str__ = __repr__

    def __reduce__(self):
        return (_Unbounded, ())


UNBOUNDED = _Unbounded()


def is_unbounded(x) -> bool:
    return x is UNBOUNDED


def within(value: float, bound) -> bool:
    """True when ``value <= bound``; an unbounded bound holds trivially."""
    return is_unbounded(bound) or value <= bound


def chi2_support(p: np.ndarray) -> float:
    """Chi-squared information of a joint matrix, restricted to its support.

    Symbols with zero marginal carry no mass and are ignored, which is how
    empirical pmfs with unseen symbols are handled.
    """
    p = np.asarray(p, dtype=float)
    pu, pv = p.sum(axis=1), p.sum(axis=0)
    ru, rv = pu > 0, pv > 0
    q = p[ru][:, rv]
    return float(np.sum(q ** 2 / np.outer(pu[ru], pv[rv])) - 1.0)


def _chain_chi2(p_sx: np.ndarray, w: np.ndarray) -> tuple[float, float]:
    p_x = p_sx.sum(axis=0)
    return chi2_support(p_sx @ w), chi2_support(p_x[:, None] * w)


def chi2_gap_bound(j1: JointPmf, j2: JointPmf) -> tuple:
    """Bounds on the chi-squared gaps between two pipelines sharing a channel.

    Returns ``(bound_s, bound_x)`` bounding |chi2(S1;Y1) - chi2(S2;Y2)| and
    |chi2(X1;Y1) - chi2(X2;Y2)|. The minorants are taken over the marginals
    of both pmfs; a zero minorant yields :data:`UNBOUNDED`.
    """
    if j1.shape != j2.shape:
        raise ValidationError(f"shape mismatch {j1.shape} vs {j2.shape}")
    s1, x1 = marginals(j1)
    s2, x2 = marginals(j2)
    m_s = float(min(s1.min(), s2.min()))
    m_x = float(min(x1.min(), x2.min()))
    dist = l1_distance(j1, j2)
    if dist == 0:
        return 0.0, 0.0
    return (4.0 * dist / m_s if m_s > 0 else UNBOUNDED,
            4.0 * dist / m_x if m_x > 0 else UNBOUNDED)


def measured_gaps(j1: JointPmf, j2: JointPmf, c: Channel) -> tuple[float, float]:
    """``(|chi2(S1;Y1) - chi2(S2;Y2)|, |chi2(X1;Y1) - chi2(X2;Y2)|)`` under ``c``."""
    s1, x1 = _chain_chi2(j1.p, c.w)
    s2, x2 = _chain_chi2(j2.p, c.w)
    return abs(s1 - s2), abs(x1 - x2)


@dataclass(frozen=True)
class RobustnessEnvelope:
    n: int
    beta: float
    M: int
    eps_n: float
    m_s: float
    m_x: float
    bound_s: object
    bound_x: object

    def to_dict(self) -> dict:
        def fmt(b):
            return str(b) if is_unbounded(b) else b
        return {"n": self.n, "beta": self.beta, "M": self.M, "eps_n": self.eps_n,
                "m_s": self.m_s, "m_x": self.m_x,
                "bound_s": fmt(self.bound_s), "bound_x": fmt(self.bound_x)}


def eps_n(M: int, n: int, beta: float) -> float:
    """High-probability radius sqrt(2 (M - ln beta) / n) of the L1 deviation."""
    return math.sqrt(2.0 * (M - math.log(beta)) / n)


def sample_envelope(p_s_min: float, p_x_min: float, sizes: tuple[int, int],
                    n: int, beta: float) -> RobustnessEnvelope:
    """Gap bounds holding with probability at least 1 - beta for n samples."""
    if n < 1:
        raise ValidationError("n must be at least 1")
    if not 0 < beta < 1:
        raise ValidationError("beta must lie in (0, 1)")
    if not (0 < p_s_min <= 1 and 0 < p_x_min <= 1):
        raise ValidationError("marginal minima must lie in (0, 1]")
    M = int(sizes[0]) * int(sizes[1])
    e = eps_n(M, n, beta)
    m_s = max(p_s_min - e, 0.0)
    m_x = max(p_x_min - e, 0.0)
    return RobustnessEnvelope(
        n, beta, M, e, m_s, m_x,
        4.0 * e / m_s if m_s > 0 else UNBOUNDED,
        4.0 * e / m_x if m_x > 0 else UNBOUNDED,
    )


def envelope_for(truth: JointPmf, n: int, beta: float) -> RobustnessEnvelope:
    p_s, p_x = marginals(truth)
    return sample_envelope(float(p_s.min()), float(p_x.min()), truth.shape, n, beta)


@dataclass
class MonteCarloReport:
    envelope: RobustnessEnvelope | None
    rows: list = field(default_factory=list)
    skipped: int = 0

    @property
    def trials_run(self) -> int:
        return len(self.rows)

    @property
    def exceedance(self) -> float:
        if not self.rows:
            return 0.0
        return sum(r["exceeded"] for r in self.rows) / len(self.rows)

    def slack(self, sigmas: float = 3.0) -> float:
        """Binomial slack allowed on top of beta for the run's trial count."""
        if not self.rows:
            return 0.0
        b = self.envelope.beta
        return sigmas * math.sqrt(b * (1 - b) / len(self.rows))


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent PCG64 stream for one trial, derived from (seed, trial)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial)]))


def monte_carlo_validate(truth: JointPmf, channel: Channel, n: int, beta: float,
                         trials: int, seed: int = 0) -> MonteCarloReport:
    """Sample empirical pmfs and compare measured gaps with the envelope.

    Each trial draws ``n`` i.i.d. pairs from ``truth``, forms the empirical
    pmf and measures both chi-squared gaps under ``channel``. Trials whose
    empirical pushforward leaves an output symbol unseen that the truth
    does reach are skipped and counted.
    """
    if channel.in_size != truth.cols:
        raise ValidationError("channel input size does not match the X alphabet")
    if trials < 0:
        raise ValidationError("trials must be non-negative")
    if trials == 0:
        return MonteCarloReport(None)
    env = envelope_for(truth, n, beta)
    true_s, true_x = _chain_chi2(truth.p, channel.w)
    true_y = truth.p.sum(axis=0) @ channel.w
    flat = truth.p.ravel()
    report = MonteCarloReport(env)
    for k in range(trials):
        counts = trial_rng(seed, k).multinomial(n, flat)
        emp = (counts / n).reshape(truth.shape)
        emp_y = emp.sum(axis=0) @ channel.w
        if np.any((emp_y <= 0) & (true_y > 0)):
            report.skipped += 1
            continue
        hat_s, hat_x = _chain_chi2(emp, channel.w)
        gap_s, gap_x = abs(true_s - hat_s), abs(true_x - hat_x)
        exceeded = not (within(gap_s, env.bound_s) and within(gap_x, env.bound_x))
        report.rows.append({"trial": k, "n": n, "gap_s": gap_s, "gap_x": gap_x,
                            "bound_s": env.bound_s, "bound_x": env.bound_x,
                            "l1": float(np.abs(emp - truth.p).sum()),
                            "exceeded": exceeded})
    return report


def z_channel_pair(a: float, p: float, eps: float) -> tuple[JointPmf, JointPmf, Channel]:
    """Two S = X binary sources, P(X=1) = p and p + eps/2, with a Z-channel.

    The channel keeps X = 0 at Y = 0 and sends X = 1 to Y = 1 with
    probability ``a``.
    """
    if not (0 < a < 1 and 0 < p < 0.5 and 0 < eps < 0.5):
        raise ValidationError("need a in (0,1) and p, eps in (0, 1/2)")
    def diag(q):
        return JointPmf(np.diag([1.0 - q, q]))
    ch = Channel(np.array([[1.0, 0.0], [1.0 - a, a]]))
    return diag(p), diag(p + eps / 2.0), ch


def z_channel_chi2(a: float, px1: float) -> float:
    """Closed form chi2(X;Y) = 1 - (1 - a) / (1 - a P(X=1)) for the Z-channel."""
    return 1.0 - (1.0 - a) / (1.0 - a * px1)
