"""Solve a problem whose measurements never see part of the space.

Run with ``python3 demos/kernel_reduction.py``.
"""

import numpy as np

from qmle import model, solvers
from qmle.model import MeasurementEnsemble

# Three levels, but every outcome is blind to |2>.
p0 = np.diag([1.0, 0.0, 0.0]).astype(complex)
p1 = np.diag([0.0, 1.0, 0.0]).astype(complex)
plus = np.zeros((3, 3), complex)
plus[:2, :2] = 0.5
ens = MeasurementEnsemble(np.array([p0, p1, plus]), [0.3, 0.2, 0.5])

reduced, rmap = model.kernel_reduce(ens)
print(f"original dimension {rmap.original_dim}, reduced dimension {rmap.reduced_dim}")

rep = solvers.run(ens, solvers.SolverOptions("qem", max_iters=10_000, certificate_tol=1e-10))
print("estimate (lifted back):")
print(np.round(rep.final_rho.real, 4))
print(f"weight on the unseen level: {rep.final_rho[2, 2].real:.1e}")
