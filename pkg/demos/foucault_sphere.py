"""Material transport on a rigidly rotating unit sphere.

In the co-rotating (Lagrangian) chart a vector carried by the material rate
turns by 2πt·cos y¹ per unit time, clockwise north of the equator.  At
latitude ±30° that is two full turns by t = 2.  Convected and Jaumann
solutions stay fixed in these coordinates.

    python3 demos/foucault_sphere.py
"""
import numpy as np

from mosaic import Scenario, TransportProblem, evaluate_frame, solve_lagrangian_transport

scen = Scenario.get("rotating-sphere")
lat = np.radians([60.0, 30.0, 10.0, -30.0])
y = np.stack([np.pi / 2 - lat, np.zeros_like(lat)], -1)

for kind in ("material", "jaumann", "upper-convected"):
    tr = solve_lagrangian_transport(TransportProblem(scen.name, kind, dt=1e-3, t_end=2.0), nodes=y)
    f = evaluate_frame(scen.chart, tr.times[:, None], np.broadcast_to(y, (len(tr.times),) + y.shape))
    r0 = np.broadcast_to(tr.values[0], tr.values.shape)
    sin = f.eps[..., 0, 1] * (r0[..., 0] * tr.values[..., 1] - r0[..., 1] * tr.values[..., 0])
    turns = np.unwrap(np.arctan2(sin, f.inner(r0, tr.values)), axis=0) / (2 * np.pi)
    print(f"{kind}: turns at t = 2")
    for k, la in enumerate(np.degrees(lat)):
        expect = -2 * np.cos(y[k, 0]) if kind == "material" else 0.0
        print(f"  latitude {la:+5.0f}°  {turns[-1, k]:+.8f}   (expected {expect:+.8f})")
