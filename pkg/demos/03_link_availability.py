"""
How link availability eats into capacity
========================================

The radio link is a two-state chain. Lower availability means more
outages, and a voice clearance needs the link up for the whole 2-7 s
exchange, so voice suffers more than RPAS datalink.
"""

import numpy as np

from runway_merge import RngStream, continuity_of, generate_trace, params_from_availability, replicate
from runway_merge import SimParams, UncertaintyConfig

for p_a in (1.0, 0.9, 0.7, 0.5):
    params = params_from_availability(p_a, mean_outage=10.0)
    trace = generate_trace(params, 1e5, RngStream(3))
    # chance that an on-period outlasts a 4 s voice exchange
    print(f"P_A={p_a:.1f}  off rate {params.rate_to_off:.4f}/s  measured on-fraction {trace.on_fraction():.3f}"
          f"  P(on-period > 4 s) {continuity_of(params, 4.0):.3f}")

print()
for scenario in ("voice", "rpas"):
    for p_a in (1.0, 0.5):
        unc = UncertaintyConfig(comm=params_from_availability(p_a))
        runs = replicate(30.0, 30.0, SimParams(scenario=scenario), unc, replications=30, master_seed=5)
        tp = np.mean([r.throughput_per_hour for r in runs])
        hold = np.mean([r.avg_hold_s for r in runs if r.avg_hold_s is not None])
        print(f"{scenario:5s} P_A={p_a:.1f}  throughput {tp:5.2f} AC/h  mean hold {hold:5.0f}s")
