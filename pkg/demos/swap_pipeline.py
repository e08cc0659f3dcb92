"""Swap two lossy TMSS copies and compare the output with the input.

Builds the 8x8 pipeline explicitly, checks it against the closed forms
and prints the entanglement measures before and after swapping.
"""

import numpy as np

from cvswap.channels import ChannelSpec, lossy_tmss
from cvswap.measures import eof, epr_opt_squeezing, log_negativity, purity
from cvswap.swap import (
    GainSetting,
    bell_measurement,
    conditional_cm,
    ensemble_cm,
    optimal_gains,
    swap_optimal,
)

p = lossy_tmss(ChannelSpec(r=1.0, tau_a=1.0, tau_b=np.exp(-0.25)))
print("input   a=%.4f b=%.4f c=%.4f" % (p.a, p.b, p.c))

# constructive route: beam splitter on modes 2,3 then homodyne on (q_u, p_v)
res = bell_measurement(p, outcome=(0.7, -0.3))
print("8x8 route vs closed form: %.1e" % np.abs(res.state.cm - conditional_cm(p)).max())

g = optimal_gains(p)
out = swap_optimal(p)
print("optimal gains g1=%.4f g4=%.4f" % (g.g1q, g.g4q))
print("output  a=%.4f b=%.4f c=%.4f" % (out.a, out.b, out.c))

print("\n%-10s %8s %8s %8s %8s" % ("state", "EoF", "E_N", "EPR", "purity"))
for name, s in [("input", p), ("swapped", out)]:
    print("%-10s %8.4f %8.4f %8.4f %8.4f" % (name, eof(s), log_negativity(s), epr_opt_squeezing(s)[0], purity(s)))

# any other gain averages over outcomes and loses purity
for g1, g4 in [(0.0, 0.0), (0.3, 0.9), (g.g1q, g.g4q)]:
    cm = ensemble_cm(p, GainSetting.per_mode(g1, g4))
    print("gains (%.2f, %.2f): purity %.4f, EoF %.4f" % (g1, g4, purity(cm), eof(cm)))
