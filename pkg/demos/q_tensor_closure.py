"""Apolar transport on the helical spheroid.

A Q-tensor must stay trace-free and symmetric.  The ♯♯ and ♭♭ rates keep it
trace-free only if q¹¹ starts at zero; the mixed ♯♭ and ♭♯ rates keep it
symmetric only if q¹² starts at zero.  The default Q₀ built from the 45°
vector satisfies the first condition and breaks the second; a Q₀ built from
∂₁ does the opposite.  The script also prints the half-circulation times of
the material field against the Jaumann field at 30° latitude.

    python3 demos/q_tensor_closure.py
"""
import numpy as np

from mosaic import Scenario, TransportProblem, circulation_times, diagnostics, evaluate_frame, solve_transport
from mosaic.scenarios import circulation_time_closed_form

scen = Scenario.get("helical-spheroid")


def along_e1(y):
    return np.stack([np.ones(y.shape[:-1]), np.zeros(y.shape[:-1])], -1)


starts = {"Q0 from 45° vector": None, "Q0 from ∂1": lambda y: scen.initial_tensor(y, along_e1)}
print(f"{'rate':>22s} {'start':>20s} {'max |tr q|':>12s} {'max |q - qᵀ|':>13s}")
for kind in ("upper-convected", "lower-convected", "upper-lower-convected", "lower-upper-convected", "jaumann"):
    for label, init in starts.items():
        p = TransportProblem(scen.name, kind, grid=(6, 1), dt=2e-3, t_end=1.0, rank=2, initial=init)
        tr = solve_transport(p)
        d = diagnostics(tr.final, evaluate_frame(scen.chart, 1.0, tr.nodes), rank=2)
        print(f"{kind:>22s} {label:>20s} {np.abs(d['trace']).max():12.2e} {np.abs(d['asym']).max():13.2e}")

y1 = np.pi / 2 - np.pi / 6
print()
for alpha in (1, 2, 3):
    t_root = circulation_times(y1, alpha)
    print(f"half-circulation {alpha}: t = {t_root:.10f}  (closed form {circulation_time_closed_form(alpha):.10f})")
