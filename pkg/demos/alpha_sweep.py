"""
Sweeping the significance level
===============================

Stored p-values let every rule be re-thresholded without re-simulating.
For the thick t-test with the matching prior the false positive rate tracks
the significance level itself, which is what calibration means.  The
distance rule ignores the level, so its curve is flat.
"""

from thicknull import alpha_sweep, main_scenario, run_study

results = run_study(main_scenario(seed=2021, cases=20_000))
sweep = alpha_sweep(results)

print(f"{'alpha':>6} {'thick fpr':>10} {'conv fpr':>9} {'distance fpr':>13}")
for i in range(0, sweep.alphas.size, 10):
    print(f"{sweep.alphas[i]:6.2f} {sweep.fpr['thick_t'][i]:10.3f} {sweep.fpr['conventional'][i]:9.3f} "
          f"{sweep.fpr['distance_only'][i]:13.3f}")
