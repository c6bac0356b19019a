"""
Simulation against the closed-form throughput ceiling
=====================================================

With no latency, instant pilots, instant radio exchanges and a perfect
link, mean throughput should follow min(beta_max(beta_SI), beta_SI + beta_DW).
The one-hour runs fall short near the ceiling; a longer horizon closes most
of the gap.
"""

import numpy as np

from runway_merge import OracleInput, SimParams, UncertaintyConfig, beta_max, replicate, theoretical_throughput

ideal = UncertaintyConfig.ideal()

# the ceiling dips for mid-range straight-in rates
for b in (5, 15, 25, 35, 45, 55):
    print(f"beta_SI={b:2d}  beta_max={beta_max(b):.2f} AC/h")

cells = [(10.0, 10.0), (25.0, 25.0), (30.0, 50.0)]
for horizon in (3600.0, 4 * 3600.0):
    print(f"\nhorizon {horizon / 3600:.0f} h")
    for bs, bd in cells:
        runs = replicate(bs, bd, SimParams(horizon=horizon), ideal, replications=40, master_seed=1)
        tp = np.mean([r.throughput_per_hour for r in runs])
        theory = theoretical_throughput(OracleInput(bs, bd))
        print(f"  ({bs:g}, {bd:g})  simulated {tp:6.2f}  theory {theory:6.2f}  diff {tp - theory:+.2f}")
