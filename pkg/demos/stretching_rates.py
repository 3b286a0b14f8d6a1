"""Four rates on the stretching spheroid Z = (sin y¹ cos y², sin y¹ sin y², (1+t) cos y¹).

The initial field is r₀ = (−1/√2, 1/(√2 sin y¹)): unit length at 45° to the
meridian.  The material and Jaumann rates keep length and angle, the upper
convected rate keeps contravariant components so the field grows, and the lower
convected rate keeps covariant ones so it shrinks as the poles move apart.

    python3 demos/stretching_rates.py
"""
import numpy as np

from mosaic import Scenario, TransportProblem, diagnostics, evaluate_frame, solve_transport

scen = Scenario.get("stretching-spheroid")
print(f"{'rate':>16s} {'y1':>6s} {'norm':>10s} {'angle φ²':>10s} {'r1':>11s} {'r2':>10s}")
for kind in ("material", "jaumann", "upper-convected", "lower-convected"):
    tr = solve_transport(TransportProblem(scen.name, kind, grid=(4, 1), dt=1e-2, t_end=1.0))
    d = diagnostics(tr.final, evaluate_frame(scen.chart, 1.0, tr.nodes))
    for i, (y1, _) in enumerate(tr.nodes):
        r1, r2 = tr.final[i]
        print(f"{kind:>16s} {y1:6.3f} {d['norm'][i]:10.6f} {d['phi2'][i]:10.6f} {r1:11.6f} {r2:10.6f}")
    print()
