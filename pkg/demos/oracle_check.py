"""Monte Carlo check of the outcome-averaged output state.

Samples the full protocol in phase space and compares the sampled output
covariance with the closed form, entry by entry, in standard errors.
"""

import numpy as np

from cvswap.gaussian import random_physical_params
from cvswap.oracle import OracleConfig, sample_conditional, sample_ensemble
from cvswap.swap import GainSetting, conditional_cm, ensemble_cm

rng = np.random.default_rng(7)
p = random_physical_params(rng)
g = GainSetting.per_mode(0.4, -0.6)

est = sample_ensemble(p, g, OracleConfig(samples=1_000_000, seed=7))
z = est.z_scores(ensemble_cm(p, g))
np.set_printoptions(precision=2, suppress=True)
print("sampled ensemble CM:\n", est.cm)
print("z-scores against the closed form:\n", z)

cond = sample_conditional(p, (1.0, -0.5), OracleConfig(samples=1_000_000, seed=8))
print("max |conditional CM - closed form| = %.3f" % np.abs(cond.cm - conditional_cm(p)).max())
