"""
Efficiency across recommendation budgets
========================================

Sweep the number of recommended documents ``a`` over a few seeds and print
the median final efficiency and how much of the improvement was already
reached by iteration 3.  Set KKPS_SIM_THREADS to run seeds in parallel.
"""

from kkps import preset, run_sweep, trend_tests

result = run_sweep(preset("fig4", seeds=range(5)))

for row in result.aggregate():
    print(f"a={row['a']:2d}  efficiency={row['final_efficiency_median']:.3f}  "
          f"captured by iter 3={row['captured_3_median']:.2f}")

# the qualitative claims tied to this grid
for outcome in trend_tests(result)[:2]:
    print(outcome.line())

# result.write("results/fig4") stores manifest, records and per-cell trajectories
