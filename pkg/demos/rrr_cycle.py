"""Compare the four quantum algorithms on a two-outcome instance where RrhoR cycles.

Run with ``python3 demos/rrr_cycle.py``.
"""

from qmle import problems, solvers

ens = problems.rrr_cycle_instance().ensemble

for alg in ("qem", "rrr", "drrr_exact", "drrr_armijo"):
    rep = solvers.run(ens, solvers.SolverOptions(alg, max_iters=200, certificate_tol=1e-8))
    tail = [r.objective_at_rho for r in rep.records[-4:]]
    print(f"{alg:12s} {rep.stop_reason:16s} iters={rep.iterations:4d}  last objectives:",
          " ".join(f"{v:.5f}" for v in tail))

# Plain RrhoR overshoots: from I/2 it jumps to diag(0.9, 0.1) and back.
st = solvers.initial_state(2)
for _ in range(4):
    st = solvers.step_rrr(ens, st)
    print("rrr iterate diagonal:", st.rho.diagonal().real.round(4))

# The damped update with an exact line search lands on the optimum in one step.
st = solvers.step_diluted(ens, solvers.initial_state(2), "exact")
print(f"exact line search alpha = {st.last_alpha:.6f}, iterate diagonal = {st.rho.diagonal().real.round(6)}")
