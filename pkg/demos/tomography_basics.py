"""Reconstruct a qubit-pair state from simulated measurement counts.

Run with ``python3 demos/tomography_basics.py``.
"""

import numpy as np

from qmle import model, problems, solvers

# A rank-one state on four levels, measured in three bases with 10k shots each.
inst = problems.gen_instance(dim=4, bases=3, shots=10_000, rank=1, seed=7)
ens = inst.ensemble
print(f"{len(ens)} distinct outcomes on a {ens.dim}-level system")

# Run the exponentiated iteration until the optimality gap is certified below 1e-6.
report = solvers.run(ens, solvers.SolverOptions("qem", max_iters=20_000, certificate_tol=1e-6))
print(f"stopped after {report.iterations} iterations ({report.stop_reason})")
print(f"certified gap: {report.final_certificate:.2e}")

# The estimate sits close to the state that generated the data.
rho = report.final_rho
fidelity = np.real(np.trace(inst.true_state @ rho))  # true state is pure
print(f"fidelity with the true state: {fidelity:.4f}")
print("estimated spectrum:", np.round(np.linalg.eigvalsh(rho)[::-1], 4))

# Every iterate comes with a bound on how far it is from optimal.
cert = model.certificate(ens, np.eye(4) / 4)
print(f"gap bound at the maximally mixed start: {cert.bound:.3f}")
