"""
Consensus voting over a mixed support
=====================================

Each sensor's support is a shared joint part plus a private part.  A node
keeps the indices that collect at least two votes among its own estimate
and its two neighbors' estimates.  We ask how often a kept index really
belongs to the node's own support, split by whether the node itself
reported it.

Three questions:

* does the simulation follow the closed forms?
* for which eps does a two-vote index beat the node's own estimate?
* what happens as the network size grows with sublinear sparsity?
"""
from dgpvote import analysis as an
from dgpvote.harness import ExperimentConfig, run_mixed_experiment
from dgpvote.sigmodel import ModelConfig
from dgpvote.voting import consensus

# %%
# A toy vote: indices 1 and 2 reach two votes.
print("consensus:", consensus([1, 2], [[1, 3], [2, 4]], t=20, n=10))

# %%
# Simulation with the idealized channel, N=1000, T=20, J=15, I=5.
model = ModelConfig(n=1000, m_rows=96, t=20, l=3, support_model="mixed", j=15)
events = [("hit", 0, 0), ("hit", 1, 0), ("hit", 1, 1), ("miss", 2, 0)]
cfg = ExperimentConfig(model, "ideal", trials=2000, seed=1, events=events, sweep=(0.2, 0.5),
                       voting="consensus")
for rec in run_mixed_experiment(cfg):
    for (branch, h, m), st in rec.per_event.items():
        print("eps_hat %.3f  %-4s (%d,%d)  empirical %.4f  analytic %.4f"
              % (rec.eps_hat, branch, h, m, st.empirical_prob, st.analytic_prob))

# %%
# Where do two votes beat a single estimate?  The three ways to collect
# them are compared against 1 - eps.
for case, roots in an.remark7_roots().items():
    print("case %d sign changes:" % case, ", ".join("%.6f" % r for r in roots))
for eps in (0.005, 0.01, 0.02, 0.5, 0.98):
    chk = an.remark7_check(eps)
    print("eps %.3f holds %s" % (eps, chk.holds))

# %%
# Growing networks: T = ceil(sqrt(N)), J = ceil(3T/4), eps = 0.3.
for row in an.corollary_limit_scan(0.3, [10**3, 10**4, 10**5, 10**6]):
    print("N=%8d T=%4d  own hit %.6f  own miss %.6f"
          % (row["n"], row["t"], row["hit"], row["miss"]))
