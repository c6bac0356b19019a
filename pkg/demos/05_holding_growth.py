"""
Holding time growth and the finite horizon
==========================================

For light straight-in traffic the mean downwind hold grows roughly
exponentially with the downwind rate. For heavy straight-in traffic most
downwind aircraft are still holding when the hour ends, the measured mean
flattens, and the exponential fit breaks down.
"""

from runway_merge import SimParams, UncertaintyConfig, aggregate, fit_exponential, replicate

unc = UncertaintyConfig()
for beta_si in (10.0, 40.0):
    points = []
    for beta_dw in (5.0, 15.0, 25.0, 35.0, 45.0):
        cell = aggregate(replicate(beta_si, beta_dw, SimParams(), unc, replications=20, master_seed=2))
        censored = cell.censored_count / cell.downwind_count
        points.append((beta_dw, cell.avg_hold_s))
        print(f"beta_SI={beta_si:g} beta_DW={beta_dw:g}  hold {cell.avg_hold_s:6.0f}s  censored {censored:.0%}")
    fit = fit_exponential(points)
    print(f"  fit hold = {fit.amplitude:.1f} * exp({fit.rate:.3f} beta_DW), r^2 = {fit.r_squared:.3f}\n")
