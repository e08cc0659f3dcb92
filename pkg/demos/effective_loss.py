"""Effective channel picture of the swapped state.

The swapped state is again a lossy TMSS. Its total effective
transmittivity never exceeds that of direct transmission.
"""

import numpy as np

from cvswap.channels import (
    ChannelSpec,
    effective_decomposition,
    effective_params_after_swap,
    swap_lossy,
)
from cvswap.errors import NotEntangled

print("%5s %5s %5s | %7s %7s %7s | %9s %9s" % ("r", "ta", "tb", "r_eff", "ta_eff", "tb_eff", "product", "direct"))
for r in (0.5, 1.0, 2.0):
    for ta, tb in [(1.0, 1.0), (1.0, 0.8), (0.9, 0.9), (0.7, 0.6)]:
        spec = ChannelSpec(r, ta, tb)
        try:
            e = effective_params_after_swap(spec)
        except NotEntangled:
            print("%5.2f %5.2f %5.2f | separable output" % (r, ta, tb))
            continue
        d = effective_decomposition(swap_lossy(spec))
        assert abs(d.r_eff - e.r_eff) < 1e-9
        print(
            "%5.2f %5.2f %5.2f | %7.4f %7.4f %7.4f | %9.5f %9.5f"
            % (r, ta, tb, e.r_eff, e.tau_a_eff, e.tau_b_eff, e.tau_a_eff * e.tau_b_eff, ta**2 * tb**2)
        )

# perfect links: the swap only reduces squeezing, tanh r_eff = tanh^2 r
e = effective_params_after_swap(ChannelSpec(1.0, 1.0, 1.0))
print("\npure input r=1: tanh r_eff = %.6f, tanh^2 r = %.6f" % (np.tanh(e.r_eff), np.tanh(1.0) ** 2))
