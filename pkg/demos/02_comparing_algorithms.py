"""
Query cost of four search strategies
====================================

Same instance, four algorithms. Costs are counted in oracle calls and
compared with the single-oracle optimum (pi/4) sqrt(N/M).
"""

# %%
import warnings

import numpy as np

from artifact.algorithms import ALGORITHMS, q_opt, run_algorithm
from artifact.bench import ExperimentConfig, generate_instance
from artifact.statevector import QueryLedger

cfg = ExperimentConfig(n_total=4096, count_a_only=300, count_b_only=200, count_common=2, seed=1)
sets = generate_instance(cfg)
print(sets.profile())
print(f"q_opt = {q_opt(4096, 2):.2f}")

# %%
# Full state-vector runs. Each driver books every oracle call in a ledger,
# so the totals below are counted, not computed from a formula.
for name in ALGORITHMS:
    ledger = QueryLedger()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        trace = run_algorithm(name, sets, ledger)
    print(f"{name:<17} queries {ledger.total:>4} (A {ledger.oracle_a_calls:>4}, B {ledger.oracle_b_calls:>3})"
          f"  success {trace.final_probability:.3f}  ratio {ledger.total / q_opt(4096, 2):.2f}")

# %%
# The nested search does badly here. Its first stage leaves only about 88%
# of the probability on A (|A| is too large a fraction of N for an exact
# landing), and the stray 12% contains B-only items that O_B marks too.
# Roughly half of what the second stage amplifies is then B-only junk:
# sin^2(21 phi) * 0.48 ~ 0.26 with sin^2 phi = 0.0121, matching the run.

# %%
# The same drivers accept a class profile instead of explicit sets. That
# runs on four amplitudes, so a million items cost nothing extra.
big = ExperimentConfig(n_total=10**6, count_a_only=5000, count_b_only=5000, count_common=1).profile()
for name in ("variant", "algorithm2", "algorithm1"):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        trace = run_algorithm(name, big)
    print(f"{name:<11} planned {trace.planned_queries:>5}  ratio {trace.planned_queries / q_opt(10**6, 1):.3f}"
          f"  success {trace.final_probability:.4f}")

# %%
# Success curves against cumulative queries for the variant. The first
# peak sits at the planned count.
trace = run_algorithm("variant", sets, iterations=60)
p = trace.probabilities()
k = int(np.argmax(p))
print(f"variant peaks at {trace.samples[k].cumulative_queries} queries with p = {p[k]:.4f}")
