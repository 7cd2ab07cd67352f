"""Small dense log-barrier interior-point method.

Solves

    maximize    c^T z
    subject to  G z <= h
                z^T diag(q_i) z <= r_i      (q_i >= 0 elementwise)

from a strictly feasible starting point. Iterates stay strictly feasible,
so the returned point never violates a constraint; accuracy is governed by
the duality-gap bound (#constraints) / t.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class BarrierError(RuntimeError):
    def __init__(self, message, z=None, iterations=0):
        super().__init__(message)
        self.z = z
        self.iterations = iterations


@dataclass
class BarrierResult:
    z: np.ndarray
    value: float
    iterations: int
    gap: float


def _slacks(z, G, h, Q, r):
    lin = h - G @ z
    quad = r - (Q * z[None, :] ** 2).sum(axis=1) if len(r) else np.empty(0)
    return lin, quad


def _strictly_feasible(z, G, h, Q, r):
    lin, quad = _slacks(z, G, h, Q, r)
    return np.all(lin > 0) and np.all(quad > 0)


def maximize(c, G, h, Q=None, r=None, z0=None, *, gap_tol=1e-10, t0=1.0, mu=8.0,
             newton_tol=1e-9, max_newton=4000) -> BarrierResult:
    c = np.asarray(c, dtype=float)
    n = c.size
    G = np.asarray(G, dtype=float).reshape(-1, n)
    h = np.asarray(h, dtype=float)
    Q = np.zeros((0, n)) if Q is None else np.asarray(Q, dtype=float).reshape(-1, n)
    r = np.zeros(0) if r is None else np.asarray(r, dtype=float)
    z = np.asarray(z0, dtype=float).copy()
    if not _strictly_feasible(z, G, h, Q, r):
        raise BarrierError("starting point is not strictly feasible", z, 0)

    n_con = len(h) + len(r)
    t = t0
    iters = 0
    while True:
        # centering: minimize -t c^T z - sum log(slacks)
        for _ in range(200):
            lin, quad = _slacks(z, G, h, Q, r)
            grad = -t * c + G.T @ (1.0 / lin)
            hess = (G.T * (1.0 / lin ** 2)) @ G
            if len(r):
                dq = 2.0 * Q * z[None, :]  # gradient of each quadratic
                grad += (dq / quad[:, None]).sum(axis=0)
                hess += (dq.T / quad ** 2) @ dq + np.diag((2.0 * Q / quad[:, None]).sum(axis=0))
            try:
                step = -np.linalg.solve(hess, grad)
            except np.linalg.LinAlgError:
                step = -np.linalg.lstsq(hess, grad, rcond=None)[0]
            dec2 = float(-grad @ step)
            iters += 1
            if iters > max_newton:
                raise BarrierError("Newton iteration cap reached", z, iters)
            if dec2 / 2.0 <= newton_tol:
                break

            s = 1.0
            while not _strictly_feasible(z + s * step, G, h, Q, r):
                s *= 0.5
                if s < 1e-20:
                    break
            g_step = G @ step
            q_lin = (2.0 * Q * (z * step)[None, :]).sum(axis=1) if len(r) else np.empty(0)
            q_sq = (Q * (step ** 2)[None, :]).sum(axis=1) if len(r) else np.empty(0)

            def change(ss):
                # barrier change evaluated through relative slack changes, which
                # stays accurate when t * c^T z is large
                d_lin = np.log1p(-ss * g_step / lin).sum()
                d_quad = np.log1p(-(ss * q_lin + ss * ss * q_sq) / quad).sum() if len(r) else 0.0
                return -t * ss * (c @ step) - d_lin - d_quad

            # a NaN change (slack rounding to <= 0 right at the boundary) rejects the step
            with np.errstate(invalid="ignore"):
                while s >= 1e-20 and not (change(s) <= -0.25 * s * dec2
                                          and _strictly_feasible(z + s * step, G, h, Q, r)):
                    s *= 0.5
            if s < 1e-20:
                break
            z = z + s * step
        if n_con / t <= gap_tol:
            return BarrierResult(z, float(c @ z), iters, n_con / t)
        t *= mu
