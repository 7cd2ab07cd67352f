"""Privacy-assuring channel design from per-function privacy/utility targets.

Pipeline:

1. Private functions s_i(S) are projected onto the useful variable,
   s_hat_i(x) = E[s_i(S) | X = x] / ||E[s_i(S) | X]||.
2. A basis f_0 = 1, f_1, ... of L2(P_X), orthonormal under P_X, is built
   so that its leading vectors span the useful functions.
3. A joint matrix P_XY = D_X F diag(1, sigma) F^T D_X is chosen by a convex
   program in sigma: every sigma_k in [0, 1], every entry of P_XY
   non-negative and sum_k alpha_ik^2 sigma_k^2 <= 1 - theta_i for each
   projected private function with coefficients alpha_i.

The disclosed variable Y has the same distribution as X and the PICs of
P_XY are sigma_k^2.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import _barrier
from .pic import conditional_expectation, mmse_of_function
from .probspace import (
    Channel,
    JointPmf,
    ValidationError,
    compose,
    l2_norm,
    require_positive_marginals,
    require_standardized,
)

log = logging.getLogger(__name__)

GS_DROP_TOL = 1e-10
PROJ_VANISH_TOL = 1e-12
CLAMP_TOL = 1e-10
CHECK_TOL = 1e-8
PROJECTION_TOL = 1e-9
DEDUP_TOL = 1e-10
OBJECTIVE_SLACK = 1e-9
STAGE2_T0 = 1e6


class SolverError(RuntimeError):
    """The convex program did not converge; ``best`` holds the last iterate."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


@dataclass
class DesignProblem:
    """Joint source, function sets, privacy thresholds and objective.

    ``objective`` is ``"min"`` (maximize the smallest useful sigma) or
    ``"weighted"`` (maximize ``sum(weights * sigma[:n'])``; equal weights
    when ``weights`` is None).
    """

    joint: JointPmf
    useful: list
    private: list
    thetas: list
    objective: str = "weighted"
    weights: list | None = None

    def __post_init__(self):
        p_s, p_x = require_positive_marginals(self.joint)
        self.useful = [require_standardized(u, p_x, f"useful function {i}")
                       for i, u in enumerate(self.useful)]
        self.private = [require_standardized(s, p_s, f"private function {i}")
                        for i, s in enumerate(self.private)]
        self.thetas = [float(t) for t in self.thetas]
        if len(self.thetas) != len(self.private):
            raise ValidationError("need one theta per private function")
        if any(not 0.0 <= t <= 1.0 for t in self.thetas):
            raise ValidationError("thetas must lie in [0, 1]")
        if self.objective not in ("min", "weighted"):
            raise ValidationError(f"unknown objective {self.objective!r}")

    @property
    def p_s(self):
        return self.joint.p.sum(axis=1)

    @property
    def p_x(self):
        return self.joint.p.sum(axis=0)


@dataclass
class BasisF:
    """Columns are basis functions on X; ``F.T @ diag(p_x) @ F = I``."""

    F: np.ndarray
    n_prime: int

    def columns(self):
        return [self.F[:, k] for k in range(self.F.shape[1])]


@dataclass
class DesignSolution:
    sigma: np.ndarray
    p_xy: np.ndarray
    channel: Channel
    achieved_mmse_useful: np.ndarray
    achieved_mmse_private: np.ndarray
    objective_value: float
    basis: BasisF
    solver_report: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "sigma": self.sigma.tolist(),
            "channel": self.channel.to_dict(),
            "p_xy": self.p_xy.tolist(),
            "achieved_mmse_useful": self.achieved_mmse_useful.tolist(),
            "achieved_mmse_private": self.achieved_mmse_private.tolist(),
            "objective_value": self.objective_value,
            "basis": self.basis.F.T.tolist(),
            "n_prime": self.basis.n_prime,
            "solver_report": self.solver_report,
        }


def project_private(s, j: JointPmf) -> np.ndarray:
    """Normalized conditional expectation of s(S) given X, as a function on X."""
    p_s, p_x = require_positive_marginals(j)
    s = np.asarray(s, dtype=float)
    if abs(np.dot(s, p_s)) > 1e-10:
        raise ValidationError("private function must be zero-mean under P_S")
    cond = conditional_expectation(s, j)
    norm = l2_norm(cond, p_x)
    if norm < PROJ_VANISH_TOL:
        raise ValidationError("projection onto X vanishes; function is already hidden")
    return cond / norm


def _inner(a, b, p):
    return float(np.sum(a * b * p))


def build_basis(p_x, useful) -> BasisF:
    """Modified Gram-Schmidt in the P_X inner product.

    Seeds, in order: the constant 1, the useful functions, then coordinate
    indicators to complete the basis. Each candidate is orthogonalized twice.
    """
    p_x = np.asarray(p_x, dtype=float)
    size = p_x.size
    cols = []
    n_useful = 0
    seeds = [(np.ones(size), "const")]
    seeds += [(np.asarray(u, dtype=float), "useful") for u in useful]
    seeds += [(e, "fill") for e in np.eye(size)]
    for vec, kind in seeds:
        if len(cols) == size:
            break
        orig = np.sqrt(_inner(vec, vec, p_x))
        if orig == 0:
            continue
        v = vec.copy()
        for _ in range(2):
            for q in cols:
                v = v - _inner(v, q, p_x) * q
        norm = np.sqrt(_inner(v, v, p_x))
        if norm < GS_DROP_TOL * orig:
            continue
        cols.append(v / norm)
        if kind == "useful":
            n_useful += 1
    F = np.column_stack(cols)
    return BasisF(F, n_useful)


def coefficients(f, basis: BasisF, p_x) -> np.ndarray:
    """Coordinates <f, f_k> of ``f`` in the basis."""
    return basis.F.T @ (np.asarray(p_x, dtype=float) * np.asarray(f, dtype=float))


def joint_from_sigma(p_x, basis: BasisF, sigma) -> np.ndarray:
    dx = np.asarray(p_x, dtype=float)
    a = dx[:, None] * basis.F
    return a @ np.diag(np.concatenate([[1.0], sigma])) @ a.T


def _dedupe(alphas, thetas):
    """Merge parallel projected private functions, keeping the tighter theta."""
    keep_a, keep_t, source = [], [], []
    for i, (a, th) in enumerate(zip(alphas, thetas)):
        for j, b in enumerate(keep_a):
            if abs(abs(a @ b) - 1.0) <= DEDUP_TOL:
                keep_t[j] = max(keep_t[j], th)
                source[j].append(i)
                break
        else:
            keep_a.append(a)
            keep_t.append(th)
            source.append([i])
    return keep_a, keep_t, source


def solve(problem: DesignProblem) -> DesignSolution:
    """Solve the sigma program and assemble the channel."""
    p_x = problem.p_x
    size = p_x.size
    k = size - 1
    basis = build_basis(p_x, problem.useful)
    n_prime = basis.n_prime

    vanished = []
    alphas, thetas = [], []
    for i, (s, th) in enumerate(zip(problem.private, problem.thetas)):
        try:
            s_hat = project_private(s, problem.joint)
        except ValidationError:
            # E[s|X] = 0 forces E[s|Y] = 0, so mmse(s|Y) = 1 >= theta always
            vanished.append(i)
            continue
        alphas.append(coefficients(s_hat, basis, p_x)[1:])
        thetas.append(th)
    alphas, thetas, _ = _dedupe(alphas, thetas)

    # theta = 1 leaves no slack: every sigma the function touches must be 0
    fixed = np.zeros(k, dtype=bool)
    quad_a, quad_r = [], []
    for a, th in zip(alphas, thetas):
        slack = 1.0 - th
        if slack <= 1e-12:
            fixed |= a ** 2 > 1e-12
        else:
            quad_a.append(a ** 2)
            quad_r.append(slack)
    free = np.flatnonzero(~fixed)

    # entrywise non-negativity of P_XY, upper triangle only (P_XY is symmetric)
    a_mat = p_x[:, None] * basis.F
    iu = np.triu_indices(size)
    outer = [np.outer(a_mat[:, c], a_mat[:, c])[iu] for c in range(1, size)]
    lin_coef = np.column_stack(outer) if outer else np.zeros((len(iu[0]), 0))
    base = np.outer(p_x, p_x)[iu]

    nf = free.size
    useful_free = [idx for idx, c in enumerate(free) if c < n_prime]
    useful_fixed = bool(np.any(fixed[:n_prime]))
    weights = problem.weights
    if problem.objective == "weighted":
        weights = np.ones(n_prime) if weights is None else np.asarray(weights, dtype=float)
        if weights.shape != (n_prime,):
            raise ValidationError(f"need {n_prime} weights (one per useful basis direction)")

    report = {"iterations": 0, "vanished_private": vanished, "fixed_sigma": np.flatnonzero(fixed).tolist()}

    def constraints(extra_cols):
        # variables: sigma_free (+ extra epigraph column when present)
        g = [-lin_coef[:, free], -np.eye(nf), np.eye(nf)]
        h = [base, np.zeros(nf), np.ones(nf)]
        if extra_cols:
            g = [np.hstack([m, np.zeros((m.shape[0], extra_cols))]) for m in g]
        q = np.array([qa[free] for qa in quad_a]).reshape(-1, nf)
        if extra_cols:
            q = np.hstack([q, np.zeros((q.shape[0], extra_cols))])
        return g, h, q, np.array(quad_r)

    def interior_start():
        tau = 0.5
        g, h, q, r = constraints(0)
        G, H = np.vstack(g), np.concatenate(h)
        while tau > 1e-16:
            z = np.full(nf, tau)
            if _barrier._strictly_feasible(z, G, H, q, r):
                return z
            tau *= 0.5
        raise SolverError("could not find a strictly feasible start")

    sigma_free = np.zeros(nf)
    obj_value = 0.0
    if nf:
        z0 = interior_start()
        try:
            # stage 1: the requested objective over sigma_1..sigma_n'
            if problem.objective == "min" and n_prime and not useful_fixed:
                g, h, q, r = constraints(1)
                rows = np.zeros((len(useful_free), nf + 1))
                for i, idx in enumerate(useful_free):
                    rows[i, idx] = -1.0
                    rows[i, -1] = 1.0
                G = np.vstack(g + [rows])
                H = np.concatenate(h + [np.zeros(len(useful_free))])
                c = np.zeros(nf + 1)
                c[-1] = 1.0
                start = np.concatenate([z0, [z0.min() - 1.0]])
                res = _barrier.maximize(c, G, H, q, r, start)
                sigma_free = res.z[:nf]
                obj_value = float(sigma_free[useful_free].min())
                # stage 2 keeps sigma_k >= obj - slack
                stage_rows = -np.eye(nf)[useful_free]
                stage_h = -np.full(len(useful_free), obj_value - OBJECTIVE_SLACK)
            elif problem.objective == "weighted" and n_prime and useful_free:
                g, h, q, r = constraints(0)
                c = np.zeros(nf)
                for idx in useful_free:
                    c[idx] = weights[free[idx]]
                res = _barrier.maximize(c, np.vstack(g), np.concatenate(h), q, r, z0)
                sigma_free = res.z
                obj_value = float(c @ sigma_free)
                stage_rows = -c[None, :]
                stage_h = np.array([-(obj_value - OBJECTIVE_SLACK)])
            else:
                res = None
                sigma_free = z0
                stage_rows = np.zeros((0, nf))
                stage_h = np.zeros(0)
            report["iterations"] += res.iterations if res is not None else 0

            # stage 2: canonical choice for the sigmas outside the objective
            rest = [idx for idx, c in enumerate(free) if c >= n_prime]
            if problem.objective == "min" and not n_prime:
                rest = list(range(nf))
            if rest:
                g, h, q, r = constraints(0)
                c = np.zeros(nf)
                c[rest] = 1.0
                G = np.vstack(g + [stage_rows])
                H = np.concatenate(h + [stage_h])
                if not _barrier._strictly_feasible(sigma_free, G, H, q, r):
                    sigma_free = _pull_inside(sigma_free, z0, G, H, q, r)
                res2 = _barrier.maximize(c, G, H, q, r, sigma_free, t0=STAGE2_T0, gap_tol=1e-8)
                sigma_free = res2.z
                report["iterations"] += res2.iterations
        except _barrier.BarrierError as exc:
            best = np.zeros(k)
            if exc.z is not None:
                best[free] = exc.z[:nf]
            raise SolverError(str(exc), best) from exc

    sigma = np.zeros(k)
    sigma[free] = np.clip(sigma_free, 0.0, 1.0)
    if problem.objective == "min":
        obj_value = float(sigma[:n_prime].min()) if n_prime else 0.0
    else:
        obj_value = float(weights @ sigma[:n_prime]) if n_prime else 0.0

    p_xy = joint_from_sigma(p_x, basis, sigma)
    most_negative = float(p_xy.min())
    report["min_entry_before_clamp"] = most_negative
    quad_viol = [float(np.sum(a ** 2 * sigma ** 2) - (1.0 - th)) for a, th in zip(alphas, thetas)]
    report["max_constraint_violation"] = max([0.0, -most_negative] + quad_viol)
    if most_negative < -CLAMP_TOL:
        log.warning("P_XY entry %.3g below clamp tolerance", most_negative)
    p_xy = np.clip(p_xy, 0.0, None)
    p_xy = p_xy / p_xy.sum()
    w = p_xy / p_xy.sum(axis=1, keepdims=True)
    channel = Channel(w)

    return _finish(problem, basis, sigma, p_xy, channel, obj_value, report)


def _pull_inside(z, z0, G, H, q, r):
    # blend towards the stage-1 start until strictly feasible
    for lam in np.linspace(0.0, 1.0, 65)[1:]:
        cand = (1 - lam) * z + lam * z0
        if _barrier._strictly_feasible(cand, G, H, q, r):
            return cand
    raise SolverError("no strictly feasible point for the secondary objective")


def _finish(problem, basis, sigma, p_xy, channel, obj_value, report):
    j_xy = JointPmf(p_xy)
    mm_u = np.array([mmse_of_function(u, j_xy) for u in problem.useful])
    j_sy = compose(problem.joint, channel)
    mm_s = np.array([mmse_of_function(s, j_sy) for s in problem.private])
    return DesignSolution(sigma, p_xy, channel, mm_u, mm_s, obj_value, basis, report)


@dataclass
class VerificationReport:
    checks: list

    @property
    def ok(self) -> bool:
        return all(c["passed"] for c in self.checks)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if not c["passed"]]


def verify_solution(problem: DesignProblem, solution: DesignSolution) -> VerificationReport:
    """Recompute every guarantee of ``solution`` from scratch."""
    checks = []

    def add(name, value, passed):
        checks.append({"check": name, "value": float(value), "passed": bool(passed)})

    p_x = problem.p_x
    p_xy = solution.p_xy
    add("p_xy_nonnegative", p_xy.min(), p_xy.min() >= 0)
    add("row_marginal", np.abs(p_xy.sum(axis=1) - p_x).max(), np.abs(p_xy.sum(axis=1) - p_x).max() <= CHECK_TOL)
    add("col_marginal", np.abs(p_xy.sum(axis=0) - p_x).max(), np.abs(p_xy.sum(axis=0) - p_x).max() <= CHECK_TOL)

    j_sy = compose(problem.joint, solution.channel)
    j_xy = JointPmf(p_x[:, None] * solution.channel.w)
    basis = build_basis(p_x, problem.useful)
    sigma = solution.sigma
    for i, (s, th) in enumerate(zip(problem.private, problem.thetas)):
        mm = mmse_of_function(s, j_sy)
        add(f"private_{i}_mmse_ge_theta", mm - th, mm >= th - CHECK_TOL)
        try:
            s_hat = project_private(s, problem.joint)
        except ValidationError:
            continue
        mm_hat = mmse_of_function(s_hat, j_xy)
        add(f"private_{i}_projection_bound", mm - mm_hat, mm >= mm_hat - PROJECTION_TOL)
        alpha = coefficients(s_hat, basis, p_x)[1:]
        lhs = float(np.sum(alpha ** 2 * sigma ** 2))
        add(f"private_{i}_sigma_constraint", lhs - (1 - th), lhs <= 1 - th + CHECK_TOL)
    for i, u in enumerate(problem.useful):
        mm = mmse_of_function(u, j_xy)
        beta = coefficients(u, basis, p_x)[1:]
        spectral = float(np.sum(beta ** 2 * (1.0 - sigma ** 2)))
        add(f"useful_{i}_spectral_identity", abs(mm - spectral), abs(mm - spectral) <= CHECK_TOL)
    return VerificationReport(checks)
