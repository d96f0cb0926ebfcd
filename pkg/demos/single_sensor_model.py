"""
Single-sensor behavior of subspace pursuit
==========================================

A greedy pursuit run on one sensor returns exactly T indices.  When the
true support is drawn uniformly, every index should be reported equally
often.  When the support is held fixed, the rate at which outside indices
show up gives an estimate of the miss probability eps, since every miss is
paid for by one false alarm.

Here we look at both, then swap the pursuit for the idealized channel run
at the estimated eps and compare per-index frequencies.
"""
import numpy as np

from dgpvote.harness import FIXED_TRUTH, run_model_verification
from dgpvote.sigmodel import ModelConfig

model = ModelConfig(n=50, m_rows=7, t=2, smnr_db=20.0)
trials = 20_000

# %%
# Random supports: the output histogram should look flat.
res = run_model_verification(model, trials, seed=1)
print("random supports")
print("  counts per index: min %d, max %d, mean %.1f"
      % (res.histogram.min(), res.histogram.max(), res.histogram.mean()))
print("  chi-square %.1f on 49 dof, p = %.3f" % (res.chi2, res.p_value))

# %%
# Fixed support {13, 25}: count false alarms to estimate eps.
fixed = run_model_verification(model, trials, seed=2, truth=FIXED_TRUTH)
print("fixed support", FIXED_TRUTH)
print("  eps_hat = %.4f" % fixed.eps_hat)
print("  detect rate of the true indices:", fixed.histogram[list(FIXED_TRUTH)] / trials)

# %%
# The idealized channel at the same eps reproduces those marginals.
ideal = run_model_verification(model, trials, seed=3, engine="ideal", eps=fixed.eps_hat,
                               truth=FIXED_TRUTH)
others = np.setdiff1d(np.arange(model.n), FIXED_TRUTH)
print("ideal channel at eps_hat")
print("  detect rate of the true indices:", ideal.histogram[list(FIXED_TRUTH)] / trials)
print("  mean false-alarm rate: pursuit %.5f, channel %.5f"
      % (fixed.histogram[others].mean() / trials, ideal.histogram[others].mean() / trials))
