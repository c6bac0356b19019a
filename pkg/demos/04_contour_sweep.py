"""
A small contour sweep written to disk
=====================================

Sweep a coarse grid of arrival rates at two availability levels for both
communication scenarios, then write per-metric CSV grids and a manifest.
"""

import sys
import tempfile
from pathlib import Path

from runway_merge import SweepSpec, run_sweep, smooth_contours
from runway_merge.export import write_sweep

spec = SweepSpec(
    beta_si_axis=(10.0, 25.0, 40.0),
    beta_dw_axis=(10.0, 25.0, 40.0),
    p_a_levels=(1.0, 0.6),
    scenarios=("voice", "rpas"),
    replications_per_cell=8,
    master_seed=11,
)
grids = run_sweep(spec)

for g in grids:
    tp = g.values("throughput_per_hour")
    print(f"P_A={g.metadata['p_a']} {g.metadata['scenario']}")
    for bs, row in zip(g.beta_si, tp):
        print(f"  beta_SI={bs:4.0f}  " + "  ".join(f"{v:5.1f}" for v in row))

# optional smoothing, the way contour plots are usually drawn
smoothed = [smooth_contours(g, 3) for g in grids]

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="runway_sweep_"))
write_sweep(smoothed, out, {"demo": "04_contour_sweep"}, spec.master_seed)
print("wrote", sorted(p.name for p in out.iterdir()))
