"""Watch the averaged iterate's gap shrink below log(D)/k.

The reference optimum is the best objective seen in a ten times longer run.
Run with ``python3 demos/convergence_rate.py``.
"""

import math

from qmle import model, problems, solvers

inst = problems.gen_instance(dim=8, bases=4, shots=10_000, seed=3)
ens, _ = model.kernel_reduce(inst.ensemble)
rep = solvers.run(ens, solvers.SolverOptions("qem", max_iters=1000, certificate_tol=0.0, record_every=100))

st = solvers.initial_state(ens.dim)
f_best = math.inf
for _ in range(10_000):
    st = solvers.step_qem(ens, st)
    f_best = min(f_best, model.objective(ens, st.rho), model.objective(ens, st.rho_bar))

print(f"{'k':>6} {'gap(avg)':>10} {'log(D)/k':>10} {'cert(rho)':>10}")
for r in rep.records:
    print(f"{r.k:6d} {r.objective_at_rho_bar - f_best:10.2e} {math.log(ens.dim) / r.k:10.2e} "
          f"{r.certificate_at_rho:10.2e}")
