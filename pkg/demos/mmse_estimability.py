"""Lower bounds on the MMSE of a target function from correlation data.

Run with ``python3 demos/mmse_estimability.py``.
"""

from picput.mmsebounds import CorrelationSpec, estimability_bound, l_n, mmse_lower_bound, parity_mmse

# the two-dimensional program has a closed form; y* is the maximizer
res = l_n([1, 1], [0.5, 1])
print("L2((1,1),(0.5,1)) =", res.value, "at y =", res.y)

# target correlated 0.6 and 0.8 with two references, each estimable up to 0.7
spec = CorrelationSpec([0.6, 0.8], [0.7, 0.7], t=2)
value, _ = estimability_bound(spec)
print("estimability bound:", value, " mmse lower bound:", mmse_lower_bound(spec))

# product of two bits observed through a BSC(0.1)
print("parity MMSE:", parity_mmse({(0, 1): 1.0}, 0.1))
