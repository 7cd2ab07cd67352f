"""End-to-end experiments: a synthetic parity-bit source and a tabular dataset.

Both write CSV artifacts meant for external plotting.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _io
from .design import DesignProblem, SolverError, solve, verify_solution
from .pic import chi2, chi2_of_chain
from .probspace import JointPmf, ValidationError, marginals, prune_support, standardize
from .putbounds import put_lower_bound, put_upper_bound

log = logging.getLogger(__name__)

DATA_DIR = Path(__file__).parent / "data"
ADULT_SYNTHETIC = DATA_DIR / "adult_synthetic.csv"
DEPENDENCE_TOL = 1e-9


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:count`` (inclusive) or a comma list; clamped to [0, 1]."""
    text = str(text).strip()
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            count = int(count)
            if count < 1:
                raise ValidationError("grid needs at least one point")
            grid = np.linspace(float(start), float(stop), count)
        else:
            grid = np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError:
        raise ValidationError(f"cannot parse grid {text!r}") from None
    if grid.size == 0:
        raise ValidationError("empty grid")
    return np.clip(grid, 0.0, 1.0)


@dataclass
class ExperimentConfig:
    experiment: str
    theta_grid: np.ndarray
    out: Path
    objective: str | None = None
    weights: list | None = None
    samples: Path | None = None
    seed: int = 0
    buckets: tuple = (6, 8, 12)
    inputs: dict = field(default_factory=dict)

    def __post_init__(self):
        self.theta_grid = np.asarray(self.theta_grid, dtype=float)
        if self.theta_grid.size == 0 or np.any(self.theta_grid < 0) or np.any(self.theta_grid > 1):
            raise ValidationError("theta grid must be non-empty and inside [0, 1]")
        self.out = Path(self.out)
        if self.samples is not None and not Path(self.samples).exists():
            raise ValidationError(f"samples file {self.samples} does not exist")


# -- parity-bit source ---------------------------------------------------------

def _bit(p1):
    # index 0 is the value -1, index 1 the value +1
    return np.array([1.0 - p1, p1])


def _bsc(e):
    return np.array([[1.0 - e, e], [e, 1.0 - e]])


@dataclass(frozen=True)
class ParitySource:
    joint: JointPmf
    private: list
    useful: list


def parity_source(p_s=(0.45, 0.4), crossovers=(0.2, 0.15)) -> ParitySource:
    """Two independent bits S observed through componentwise BSCs.

    Private function: S1. Useful functions: the parity X1 X2 and X2. All
    are standardized under their marginals.
    """
    ps = np.kron(_bit(p_s[0]), _bit(p_s[1]))
    w = np.kron(_bsc(crossovers[0]), _bsc(crossovers[1]))
    labels = ("-1,-1", "-1,+1", "+1,-1", "+1,+1")
    joint = JointPmf(ps[:, None] * w, labels, labels)
    vals = np.array([-1.0, 1.0])
    first, second = np.repeat(vals, 2), np.tile(vals, 2)
    p_sm, p_xm = marginals(joint)
    return ParitySource(joint, [standardize(first, p_sm)],
                        [standardize(first * second, p_xm), standardize(second, p_xm)])


def run_parity_experiment(config: ExperimentConfig) -> dict:
    """Sweep theta on the parity source and record the achieved chi2 pairs."""
    src = parity_source()
    chi2_sx = chi2(src.joint)
    rows = []
    for theta in config.theta_grid:
        row = {"theta": float(theta)}
        try:
            problem = DesignProblem(src.joint, src.useful, src.private, [theta],
                                    config.objective or "weighted", config.weights)
            sol = solve(problem)
            report = verify_solution(problem, sol)
            c_xy, c_sy = chi2_of_chain(src.joint, sol.channel)
            c_sy = min(max(c_sy, 0.0), chi2_sx)
            row.update(chi2_sy=c_sy, chi2_xy=c_xy,
                       lower_bound=put_lower_bound(src.joint, c_sy),
                       upper_bound=put_upper_bound(src.joint, c_sy),
                       status="ok" if report.ok else "verify_failed")
        except (SolverError, ValidationError) as exc:
            log.warning("theta=%g failed: %s", theta, exc)
            row["status"] = f"failed: {exc}"
        rows.append(row)

    config.out.mkdir(parents=True, exist_ok=True)
    columns = ["theta", "chi2_sy", "chi2_xy", "lower_bound", "upper_bound", "status"]
    comments = [_io.provenance_line(config.seed, config.inputs),
                f"# chi2_sx={_io.fmt(chi2_sx)}"]
    path = config.out / "parity_curve.csv"
    _io.write_text(path, _io.render_csv(columns, rows, comments))
    return {"csv": path, "rows": rows, "chi2_sx": chi2_sx}


# -- tabular data ----------------------------------------------------------------

RACES = ("White", "Black", "Asian-Pac-Islander", "Amer-Indian-Eskimo", "Other")


def generate_adult_like(n: int = 20000, seed: int = 2024) -> list[dict]:
    """Synthetic rows with the schema gender, race, education_years, income.

    The dependence structure is made up but keeps the flavour of the census
    data: income depends on gender, race and education; education depends
    on race and gender.
    """
    rng = np.random.default_rng(seed)
    gender = rng.choice(["Male", "Female"], size=n, p=[0.67, 0.33])
    race = rng.choice(RACES, size=n, p=[0.85, 0.09, 0.03, 0.01, 0.02])
    shift = np.select([race == "White", race == "Asian-Pac-Islander", race == "Black"], [0.6, 1.2, -0.8], -1.2)
    shift = shift + np.where(gender == "Male", 0.2, 0.0)
    # a mass of school leavers around 8 and 12 years plus a long upper tail
    base = rng.choice([4, 8, 10, 12, 14, 16], size=n, p=[0.04, 0.08, 0.12, 0.40, 0.24, 0.12])
    edu = np.clip(np.round(base + shift + rng.normal(0, 1.0, n)), 1, 16).astype(int)
    logit = -3.2 + 1.3 * (gender == "Male") + 0.45 * (race == "White") + 0.28 * (edu - 10)
    income = np.where(rng.random(n) < 1 / (1 + np.exp(-logit)), ">50K", "<=50K")
    return [{"gender": g, "race": r, "education_years": int(e), "income": i}
            for g, r, e, i in zip(gender, race, edu, income)]


def write_adult_like(path, n: int = 20000, seed: int = 2024) -> None:
    rows = generate_adult_like(n, seed)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# synthetic census-style sample, n={n}, seed={seed}\n")
        writer = csv.DictWriter(fh, ["gender", "race", "education_years", "income"], lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def bucket_education(years: float, thresholds=(6, 8, 12)) -> str:
    """Default buckets <6, 6-8, 8-12, >12 (upper edges inclusive)."""
    lo, mid, hi = thresholds
    if years < lo:
        return f"<{lo}"
    if years <= mid:
        return f"{lo}-{mid}"
    if years <= hi:
        return f"{mid}-{hi}"
    return f">{hi}"


@dataclass
class TabularData:
    joint: JointPmf
    s_symbols: list
    x_symbols: list
    private: list
    private_names: list
    useful: list
    useful_names: list
    provenance: dict


def _indicator_functions(symbols, names, pmf):
    """Centered, normalized indicators of every component level.

    Candidates that are linear combinations of earlier ones (in the P-weighted
    inner product) are dropped and reported.
    """
    kept, kept_names, dropped = [], [], []
    basis = [np.ones(len(symbols))]
    for comp, comp_name in enumerate(names):
        levels = sorted({sym[comp] for sym in symbols}, key=str)
        for level in levels:
            ind = np.array([1.0 if sym[comp] == level else 0.0 for sym in symbols])
            v = ind.copy()
            for _ in range(2):
                for q in basis:
                    v = v - np.dot(v * pmf, q) * q
            norm = np.sqrt(np.dot(v * v, pmf))
            label = f"{comp_name}:{level}"
            if norm < DEPENDENCE_TOL * max(np.sqrt(np.dot(ind * ind, pmf)), 1e-300):
                dropped.append(label)
                continue
            basis.append(v / norm)
            kept.append(standardize(ind, pmf))
            kept_names.append(label)
    return kept, kept_names, dropped


def load_tabular(path, s_columns=("gender", "race"), x_columns=("education_years", "income"),
                 buckets=(6, 8, 12)) -> TabularData:
    """Empirical P_{S,X} plus indicator functions from a samples CSV."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(line for line in fh if not line.startswith("#"))
        header = reader.fieldnames or []
        missing = [c for c in (*s_columns, *x_columns) if c not in header]
        if missing:
            raise ValidationError(f"columns not found in samples CSV: {missing}")
        raw = list(reader)
    if not raw:
        raise ValidationError("samples CSV has no rows")

    def value(row, col):
        v = row[col].strip()
        if col == "education_years":
            try:
                return bucket_education(float(v), buckets)
            except ValueError:
                raise ValidationError(f"non-numeric education_years {v!r}") from None
        return v

    s_vals = [tuple(value(r, c) for c in s_columns) for r in raw]
    x_vals = [tuple(value(r, c) for c in x_columns) for r in raw]
    s_symbols = sorted(set(s_vals))
    x_symbols = sorted(set(x_vals))
    s_index = {s: i for i, s in enumerate(s_symbols)}
    x_index = {x: i for i, x in enumerate(x_symbols)}
    counts = np.zeros((len(s_symbols), len(x_symbols)))
    np.add.at(counts, ([s_index[s] for s in s_vals], [x_index[x] for x in x_vals]), 1.0)
    s_lab = ["|".join(s) for s in s_symbols]
    x_lab = ["|".join(x) for x in x_symbols]
    full = JointPmf(counts / counts.sum(), s_lab, x_lab)
    joint = prune_support(full)
    pruned = {"s": sorted(set(s_lab) - set(joint.row_labels)),
              "x": sorted(set(x_lab) - set(joint.col_labels))}
    if pruned["s"] or pruned["x"]:
        log.info("pruned symbols: %s", pruned)
    s_symbols = [s for s, lab in zip(s_symbols, s_lab) if lab in joint.row_labels]
    x_symbols = [x for x, lab in zip(x_symbols, x_lab) if lab in joint.col_labels]
    p_s, p_x = marginals(joint)
    private, private_names, drop_s = _indicator_functions(s_symbols, s_columns, p_s)
    useful, useful_names, drop_x = _indicator_functions(x_symbols, x_columns, p_x)
    prov = {"n": len(raw), "pruned_symbols": pruned,
            "dropped_functions": {"private": drop_s, "useful": drop_x},
            "s_columns": list(s_columns), "x_columns": list(x_columns),
            "education_buckets": list(buckets)}
    return TabularData(joint, s_symbols, x_symbols, private, private_names, useful, useful_names, prov)


def run_tabular_experiment(config: ExperimentConfig) -> dict:
    """Design channels for both objectives over the theta grid on tabular data."""
    path = config.samples or ADULT_SYNTHETIC
    data = load_tabular(path, buckets=config.buckets)
    objectives = [config.objective] if config.objective else ["min", "weighted"]
    names = [f"useful:{n}" for n in data.useful_names] + [f"private:{n}" for n in data.private_names]
    rows = []
    for obj in objectives:
        for theta in config.theta_grid:
            row = {"objective": obj, "theta": float(theta)}
            try:
                problem = DesignProblem(data.joint, data.useful, data.private,
                                        [theta] * len(data.private), obj)
                sol = solve(problem)
                report = verify_solution(problem, sol)
                for n, v in zip(names, np.concatenate([sol.achieved_mmse_useful, sol.achieved_mmse_private])):
                    row[n] = float(v)
                row["status"] = "ok" if report.ok else "verify_failed"
            except (SolverError, ValidationError) as exc:
                log.warning("%s theta=%g failed: %s", obj, theta, exc)
                row["status"] = f"failed: {exc}"
            rows.append(row)

    config.out.mkdir(parents=True, exist_ok=True)
    inputs = dict(config.inputs)
    inputs.setdefault("samples", path)
    columns = ["objective", "theta"] + names + ["status"]
    csv_path = config.out / "mmse_heatmap.csv"
    _io.write_text(csv_path, _io.render_csv(columns, rows, [_io.provenance_line(config.seed, inputs)]))
    prov = dict(data.provenance, samples=str(path), samples_sha256=_io.sha256_file(path),
                seed=config.seed, theta_grid=config.theta_grid.tolist(), objectives=objectives,
                private_functions=data.private_names, useful_functions=data.useful_names)
    prov_path = config.out / "provenance.json"
    _io.write_text(prov_path, _io.dumps(prov))
    return {"csv": csv_path, "provenance": prov_path, "rows": rows, "names": names}
