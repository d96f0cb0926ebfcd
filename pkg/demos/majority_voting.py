"""
Majority voting over a common support
=====================================

L sensors observe signals that share one support.  A fusion center counts
votes per index.  Given that an index was reported by h sensors and missed
by m others, how likely is it to be in the shared support?

We tabulate the closed form over eps, then check it by simulation, first
with the idealized channel and then with subspace pursuit at a few
operating points (M, SMNR), placing each simulated point at its own
estimated eps.
"""
from dgpvote import analysis as an
from dgpvote.harness import ExperimentConfig, run_common_experiment
from dgpvote.sigmodel import ModelConfig

N, T = 1000, 20
events = [(1, 0), (2, 1), (3, 7)]

# %%
# Closed form.  (1, 0) is just 1 - eps; every curve ends at T/N.
print("eps    " + "  ".join("h=%d,m=%d" % e for e in events))
for eps in (0.05, 0.2, 0.4, 0.6, 0.8, 0.98):
    row = [an.majority_detect_prob(N, T, T, eps, h, m) for h, m in events]
    print("%.2f  " % eps + "  ".join("%8.4f" % v for v in row))

# %%
# More hits than misses should never hurt.
worst = min(an.majority_monotonicity_margin(N, T, T, k / 100, h, m)
            for k in range(1, 99) for h in range(1, 6) for m in range(6))
print("smallest monotonicity margin on the grid: %.2e" % worst)

# %%
# Idealized channel, ten sensors.
model = ModelConfig(n=N, m_rows=96, t=T, l=10)
cfg = ExperimentConfig(model, "ideal", trials=2000, seed=1, events=events, sweep=(0.3, 0.6))
for rec in run_common_experiment(cfg):
    for (_, h, m), st in rec.per_event.items():
        print("eps_hat %.3f  (%d,%d)  n=%6d  empirical %.4f  analytic %.4f"
              % (rec.eps_hat, h, m, st.occurrences, st.empirical_prob, st.analytic_prob))

# %%
# Subspace pursuit, three sensors, a short run.
model = ModelConfig(n=N, m_rows=96, t=T, l=3)
cfg = ExperimentConfig(model, "sp", trials=100, seed=2, events=[(2, 1)],
                       sweep=((96, 20.0), (64, 10.0), (41, 10.0)))
for rec in run_common_experiment(cfg):
    st = rec.per_event[("majority", 2, 1)]
    flag = " (rare)" if st.rare else ""
    print("M=%3d SMNR=%4.1f  eps_hat %.3f  n=%5d  empirical %.4f  analytic %.4f%s"
          % (*rec.cell, rec.eps_hat, st.occurrences, st.empirical_prob, st.analytic_prob, flag))
