"""Log-optimal portfolio with Cover's multiplicative update.

Cash returns 1 every period; two volatile stocks each double or halve at
random, so each has zero expected log growth, yet rebalancing among the three
does. Run with ``python3 demos/growth_portfolio.py``.
"""

import numpy as np

from qmle import problems, solvers
from qmle.model import MeasurementEnsemble

rng = np.random.default_rng(11)
periods = 400
stocks = rng.choice([2.0, 0.5], size=(periods, 2))
returns = np.column_stack([np.ones(periods), stocks])

prob = problems.portfolio_from_returns(returns)
rep = solvers.solve_portfolio(prob, max_iters=200_000, certificate_tol=1e-9, record_every=1000)
print("weights (cash, stock A, stock B):", np.round(rep.final_x, 4))
print(f"log growth per period: {-solvers.portfolio_objective(prob, rep.final_x):.5f}")
print(f"certified gap: {solvers.portfolio_certificate(prob, rep.final_x):.1e} after {rep.iterations} steps")

# Posed as tomography with diagonal outcomes, qem walks the same path.
elems = np.array([np.diag(row).astype(complex) for row in prob.vectors])
ens = MeasurementEnsemble(elems, prob.weights)
q = solvers.run(ens, solvers.SolverOptions("qem", max_iters=200_000, certificate_tol=1e-9))
print("qem diagonal:                    ", np.round(q.final_rho.diagonal().real, 4))
