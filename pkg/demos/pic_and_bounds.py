"""Principal inertia components and the privacy-utility bounds for a small source.

Run with ``python3 demos/pic_and_bounds.py``.
"""

import numpy as np

from picput.pic import chi2, decompose
from picput.probspace import JointPmf
from picput.putbounds import high_privacy_mechanism, put_lower_bound, put_upper_bound

# doubly symmetric binary source with crossover 0.1
joint = JointPmf([[0.45, 0.05], [0.05, 0.45]])
dec = decompose(joint)
print("principal inertias:", dec.lambdas)
print("chi2(S;X):", chi2(joint))

# how much utility can survive a given privacy budget
for eps in np.linspace(0, chi2(joint), 5):
    print(f"eps={eps:.3f}  lower={put_lower_bound(joint, eps):.4f}  upper={put_upper_bound(joint, eps):.4f}")

# the mechanism that is optimal in the high-privacy regime
channel, _ = high_privacy_mechanism(joint)
print("high-privacy channel:\n", channel.w)
