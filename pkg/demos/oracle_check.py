"""Bundle-form rates against the coordinate-level oracle on one random chart.

The chart is a Fourier-perturbed moving sphere with a drifting, spinning
parametrisation, and the material slides past the observer.  For each rank
the material, every convected and the Jaumann derivative are computed from
the bundle formulas and from spacetime covariant and Lie derivatives in
coordinates, then compared.

    python3 demos/oracle_check.py [seed]
"""
import sys

from mosaic.verification import oracle_suite

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
report = oracle_suite(seed=seed, charts=1)
for check in report.checks:
    print(f"{check.name:34s} {check.value:.2e}  {'ok' if check.passed else 'FAILED'}")
print(f"all passed: {report.passed}")
