"""Finite-alphabet probability objects: joint pmfs, channels and helpers.

All math is index based; symbol labels ride along as metadata only.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

STRUCT_TOL = 1e-12
STANDARD_TOL = 1e-10


class ValidationError(ValueError):
    """Raised when an input violates a structural invariant."""


def _labels(labels, size, prefix):
    if labels is None:
        return tuple(str(i) for i in range(size))
    labels = tuple(str(x) for x in labels)
    if len(labels) != size:
        raise ValidationError(f"{prefix} labels: expected {size}, got {len(labels)}")
    return labels


@dataclass(frozen=True)
class JointPmf:
    """Joint distribution of two discrete variables.

    ``p[u, v]`` is the probability of the pair of symbols ``(u, v)``.
    Rows index the first variable (e.g. the private variable S), columns
    the second (e.g. the useful variable X).
    """

    p: np.ndarray
    row_labels: tuple = field(default=None)
    col_labels: tuple = field(default=None)

    def __post_init__(self):
        p = np.array(self.p, dtype=np.float64)
        if p.ndim != 2:
            raise ValidationError("joint pmf must be a 2-d matrix")
        if p.shape[0] < 2 or p.shape[1] < 2:
            raise ValidationError(f"alphabets must have at least 2 symbols, got {p.shape}")
        if not np.all(np.isfinite(p)):
            raise ValidationError("joint pmf has non-finite entries")
        if p.min() < 0:
            raise ValidationError("joint pmf has negative entries")
        if abs(p.sum() - 1.0) > STRUCT_TOL:
            raise ValidationError(f"joint pmf sums to {p.sum()!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "row_labels", _labels(self.row_labels, p.shape[0], "row"))
        object.__setattr__(self, "col_labels", _labels(self.col_labels, p.shape[1], "column"))

    @property
    def rows(self) -> int:
        return self.p.shape[0]

    @property
    def cols(self) -> int:
        return self.p.shape[1]

    @property
    def shape(self):
        return self.p.shape

    def transpose(self) -> "JointPmf":
        return JointPmf(self.p.T, self.col_labels, self.row_labels)

    def to_dict(self) -> dict:
        return {
            "s_labels": list(self.row_labels),
            "x_labels": list(self.col_labels),
            "pmf": self.p.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "JointPmf":
        try:
            pmf = data["pmf"]
        except KeyError:
            raise ValidationError("pmf JSON needs a 'pmf' field") from None
        return cls(np.asarray(pmf, dtype=float), data.get("s_labels"), data.get("x_labels"))


@dataclass(frozen=True)
class Channel:
    """Row-stochastic conditional distribution, ``w[x, y] = P(Y=y | X=x)``."""

    w: np.ndarray
    in_labels: tuple = field(default=None)
    out_labels: tuple = field(default=None)

    def __post_init__(self):
        w = np.array(self.w, dtype=np.float64)
        if w.ndim != 2:
            raise ValidationError("channel must be a 2-d matrix")
        if not np.all(np.isfinite(w)):
            raise ValidationError("channel has non-finite entries")
        if w.min() < 0:
            raise ValidationError("channel has negative entries")
        if np.max(np.abs(w.sum(axis=1) - 1.0)) > STRUCT_TOL:
            raise ValidationError("channel rows must sum to 1")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "in_labels", _labels(self.in_labels, w.shape[0], "input"))
        object.__setattr__(self, "out_labels", _labels(self.out_labels, w.shape[1], "output"))

    @property
    def in_size(self) -> int:
        return self.w.shape[0]

    @property
    def out_size(self) -> int:
        return self.w.shape[1]

    def to_dict(self) -> dict:
        return {"x_labels": list(self.in_labels), "y_labels": list(self.out_labels),
                "w": self.w.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "Channel":
        try:
            w = data["w"]
        except KeyError:
            raise ValidationError("channel JSON needs a 'w' field") from None
        return cls(np.asarray(w, dtype=float), data.get("x_labels"), data.get("y_labels"))

    @classmethod
    def identity(cls, size: int) -> "Channel":
        return cls(np.eye(size))

    @classmethod
    def bsc(cls, crossover: float) -> "Channel":
        e = float(crossover)
        return cls(np.array([[1 - e, e], [e, 1 - e]]))


def marginals(j: JointPmf) -> tuple[np.ndarray, np.ndarray]:
    """Row and column marginals of a joint pmf."""
    return j.p.sum(axis=1), j.p.sum(axis=0)


def compose(j: JointPmf, c: Channel) -> JointPmf:
    """Joint of (S, Y) when Y is produced from X by ``c`` (S -> X -> Y)."""
    if c.in_size != j.cols:
        raise ValidationError(f"channel input size {c.in_size} != joint columns {j.cols}")
    out = j.p @ c.w
    # rounding can leave the total a few ulps away from 1
    out = out / out.sum()
    return JointPmf(out, j.row_labels, c.out_labels)


def push_marginal(pmf: Sequence[float], c: Channel) -> np.ndarray:
    pmf = np.asarray(pmf, dtype=float)
    if pmf.shape != (c.in_size,):
        raise ValidationError(f"pmf of length {pmf.shape} does not match channel input {c.in_size}")
    return pmf @ c.w


def joint_from_marginal(pmf: Sequence[float], c: Channel) -> JointPmf:
    """Joint of (X, Y) for ``X ~ pmf`` passed through ``c``."""
    pmf = np.asarray(pmf, dtype=float)
    if pmf.shape != (c.in_size,):
        raise ValidationError("pmf does not match channel input size")
    p = pmf[:, None] * c.w
    return JointPmf(p / p.sum(), c.in_labels, c.out_labels)


def empirical_from_samples(samples: Iterable[tuple[int, int]], rows: int, cols: int) -> JointPmf:
    """Relative-frequency pmf of integer-coded ``(s, x)`` pairs."""
    arr = np.asarray(list(samples), dtype=np.int64)
    if arr.size == 0:
        raise ValidationError("empty sample list")
    arr = arr.reshape(-1, 2)
    if arr.min() < 0 or arr[:, 0].max() >= rows or arr[:, 1].max() >= cols:
        raise ValidationError("sample symbol outside the declared alphabets")
    counts = np.zeros((rows, cols))
    np.add.at(counts, (arr[:, 0], arr[:, 1]), 1.0)
    return JointPmf(counts / len(arr))


def l1_distance(a: JointPmf, b: JointPmf) -> float:
    if a.shape != b.shape:
        raise ValidationError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.abs(a.p - b.p).sum())


def prune_support(j: JointPmf, tol: float = STRUCT_TOL) -> JointPmf:
    """Drop rows/columns whose marginal mass is below ``tol`` and renormalize.

    Pruning may have to iterate: removing a column can push a row marginal
    below ``tol``.
    """
    p = j.p
    rlab, clab = list(j.row_labels), list(j.col_labels)
    while True:
        r, c = p.sum(axis=1), p.sum(axis=0)
        keep_r, keep_c = r >= tol, c >= tol
        if keep_r.all() and keep_c.all():
            break
        if not keep_r.any() or not keep_c.any():
            raise ValidationError("all mass pruned")
        p = p[keep_r][:, keep_c]
        rlab = [x for x, k in zip(rlab, keep_r) if k]
        clab = [x for x, k in zip(clab, keep_c) if k]
        total = p.sum()
        if total <= 0:
            raise ValidationError("all mass pruned")
        p = p / total
    if p.shape[0] < 2 or p.shape[1] < 2:
        raise ValidationError(f"pruned alphabet too small: {p.shape}")
    if p is j.p:
        return j
    return JointPmf(p, rlab, clab)


def require_positive_marginals(j: JointPmf) -> tuple[np.ndarray, np.ndarray]:
    pu, pv = marginals(j)
    if pu.min() <= 0 or pv.min() <= 0:
        raise ValidationError("joint pmf has a zero marginal; call prune_support first")
    return pu, pv


# -- functions on an alphabet ------------------------------------------------

def expectation(f, pmf) -> float:
    return float(np.dot(f, pmf))


def l2_norm(f, pmf) -> float:
    return float(np.sqrt(np.dot(np.square(f), pmf)))


def standardize(f, pmf) -> np.ndarray:
    """Shift and scale ``f`` to zero mean and unit L2 norm under ``pmf``."""
    f = np.asarray(f, dtype=float)
    pmf = np.asarray(pmf, dtype=float)
    if not np.all(np.isfinite(f)):
        raise ValidationError("function has non-finite values")
    g = f - np.dot(f, pmf)
    norm = l2_norm(g, pmf)
    if norm < STRUCT_TOL:
        raise ValidationError("cannot standardize a function that is constant on the support")
    return g / norm


def is_standardized(f, pmf, tol: float = STANDARD_TOL) -> bool:
    f = np.asarray(f, dtype=float)
    return abs(expectation(f, pmf)) <= tol and abs(l2_norm(f, pmf) - 1.0) <= tol


def require_standardized(f, pmf, what="function") -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != np.shape(pmf):
        raise ValidationError(f"{what} has {f.shape[0] if f.ndim else 0} values, alphabet has {len(pmf)}")
    if not is_standardized(f, pmf):
        raise ValidationError(f"{what} is not zero-mean and unit-norm under its marginal")
    return f


# -- serialization ------------------------------------------------------------

def load_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def read_pmf_json(path) -> JointPmf:
    return JointPmf.from_dict(load_json(path))


def read_channel_json(path) -> Channel:
    return Channel.from_dict(load_json(path))


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def read_samples_csv(path, s_labels=None, x_labels=None) -> JointPmf:
    """Empirical pmf from a two-column ``s,x`` CSV with a header row.

    Symbols are taken as integer indices when every value is an integer and
    no label lists are given, otherwise as labels (sorted order unless the
    label lists fix it).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(row for row in fh if not row.startswith("#"))
        try:
            next(reader)
        except StopIteration:
            raise ValidationError("samples CSV is empty") from None
        pairs = [(row[0].strip(), row[1].strip()) for row in reader if row]
    if not pairs:
        raise ValidationError("samples CSV has no data rows")
    if any(len(p) != 2 for p in pairs):
        raise ValidationError("samples CSV needs exactly two columns")

    def _index(values, labels):
        if labels is None and all(v.lstrip("-").isdigit() for v in values):
            idx = [int(v) for v in values]
            return idx, [str(i) for i in range(max(idx) + 1)]
        labels = list(labels) if labels is not None else sorted(set(values))
        lookup = {lab: i for i, lab in enumerate(labels)}
        try:
            return [lookup[v] for v in values], labels
        except KeyError as exc:
            raise ValidationError(f"unknown symbol {exc.args[0]!r}") from None

    s_idx, s_lab = _index([p[0] for p in pairs], s_labels)
    x_idx, x_lab = _index([p[1] for p in pairs], x_labels)
    j = empirical_from_samples(zip(s_idx, x_idx), len(s_lab), len(x_lab))
    return JointPmf(j.p, s_lab, x_lab)
