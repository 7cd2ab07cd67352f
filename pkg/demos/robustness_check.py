"""Finite-sample robustness of chi2 estimates, checked by simulation.

Run with ``python3 demos/robustness_check.py``.
"""

from picput.probspace import Channel, JointPmf
from picput.robustness import monte_carlo_validate

truth = JointPmf([[0.35, 0.15], [0.15, 0.35]])
rep = monte_carlo_validate(truth, Channel.bsc(0.1), n=10_000, beta=0.05, trials=200, seed=2024)
print("envelope:", rep.envelope.to_dict())
print(f"exceedance rate {rep.exceedance:.3f} (target 0.05, slack {rep.slack():.3f})")
worst = max(rep.rows, key=lambda r: r["gap_s"])
print("largest measured gap on S:", worst["gap_s"], "bound:", worst["bound_s"])
