"""Iterative maximum-likelihood solvers.

Four update rules are provided, all started from the maximally mixed state:

``qem``
    Matrix exponentiated update ``rho <- N(exp(log rho + log R(rho)))``.
    Parameter-free, and its running average converges at rate
    ``log(D) / k`` in objective value.
``rrr``
    The classical fixed-point rule ``rho <- N(R rho R)``. Fast when it
    works, but may cycle forever.
``drrr_exact`` / ``drrr_armijo``
    Diluted fixed point ``rho <- N((R + a I) rho (R + a I))`` with ``a``
    chosen by exact or Armijo line search.
``cover``
    The multiplicative update ``x <- x * (-grad g(x))`` on the probability
    simplex, applicable when all effects commute.

``N`` scales to unit trace and ``R = -grad f``. ``run`` drives any of them
with certificate-based stopping and per-iteration trace records.
"""

import math
import time
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from . import linalg
from .errors import (
    DegenerateAsset,
    InvariantViolation,
    LineSearchFailed,
    NonPositiveLikelihood,
    NotCommuting,
    ValidationError,
)
from .model import MeasurementEnsemble, Point, kernel_reduce, lift_state

ALGORITHMS = ("qem", "rrr", "drrr_exact", "drrr_armijo", "cover")
GOLDEN_THOMPSON_SLACK = 1e-12


@dataclass(frozen=True)
class SolverOptions:
    algorithm: str = "qem"
    max_iters: int = 1000
    certificate_tol: float = 1e-8
    record_every: int = 1

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.certificate_tol >= 0:
            raise ValueError("certificate_tol must be >= 0")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


@dataclass(frozen=True, eq=False)
class SolverState:
    """Iterate ``rho`` (= rho_k), running mean ``rho_bar`` and counter ``k``.

    ``log_rho`` caches the matrix logarithm of ``rho`` for the exponentiated
    update, which then never has to take the log of a nearly singular matrix.
    """

    k: int
    rho: np.ndarray
    rho_bar: np.ndarray
    last_tau: float = 1.0
    log_rho: Optional[np.ndarray] = field(default=None, repr=False)
    last_alpha: Optional[float] = None


def initial_state(dim) -> SolverState:
    rho = linalg.maximally_mixed(dim)
    log_rho = np.eye(dim, dtype=complex) * -math.log(dim)
    return SolverState(1, rho, rho.copy(), 1.0, log_rho)


def _advance(state, rho, tau, log_rho=None, alpha=None):
    k = state.k + 1
    rho_bar = state.rho_bar + (rho - state.rho_bar) / k
    return SolverState(k, rho, rho_bar, tau, log_rho, alpha)


def _point(ens, state, point):
    if point is None or point.rho is not state.rho:
        return Point(ens, state.rho)
    return point


def step_qem(ens: MeasurementEnsemble, state: SolverState, point=None) -> SolverState:
    """One matrix exponentiated step.

    The pre-normalization trace ``tau`` is at most one by Golden-Thompson,
    and the new logarithm is exactly ``log rho + log R - log(tau) I``.
    """
    pt = _point(ens, state, point)
    log_rho = state.log_rho if state.log_rho is not None else linalg.matrix_log(state.rho)
    logsum = linalg.hermitize(log_rho + linalg.log_from_eigh(pt.r_eigh, what="R(rho)"))
    w, v = linalg.eigh(logsum)
    shift = w[-1]
    e = np.exp(w - shift)
    log_tau = shift + math.log(e.sum())
    rho = linalg.hermitize((v * (e / e.sum())) @ v.conj().T)
    new_log = linalg.hermitize((v * (w - log_tau)) @ v.conj().T)
    return _advance(state, rho, math.exp(log_tau), new_log)


def step_rrr(ens: MeasurementEnsemble, state: SolverState, point=None) -> SolverState:
    r = _point(ens, state, point).r
    rho, tau = linalg.trace_normalize(r @ state.rho @ r)
    return _advance(state, rho, tau)


class _Dilution:
    """The curve ``alpha -> N((R + alpha I) rho (R + alpha I))``."""

    def __init__(self, rho, r):
        self.rho = rho
        self.rrr = r @ rho @ r
        self.cross = r @ rho + rho @ r

    def __call__(self, alpha):
        if math.isinf(alpha):
            return self.rho, 1.0
        return linalg.trace_normalize(self.rrr + alpha * self.cross + alpha * alpha * self.rho)


def diluted_update(rho, r, alpha):
    """Return ``(N((R + alpha I) rho (R + alpha I)), trace before scaling)``."""
    return _Dilution(rho, r)(alpha)


def exact_line_search(ens, rho, r, alpha_max=None, xtol=1e-10):
    """Minimize the objective along the dilution curve over ``[0, alpha_max]``.

    Uses bounded Brent minimization (golden section with parabolic steps).
    ``alpha_max`` defaults to ``10 lambda_max(R)``. Returns ``(alpha, value)``;
    ``alpha = inf`` signals that no point of the curve improves on ``rho``.
    """
    curve = _Dilution(rho, r)
    if alpha_max is None:
        alpha_max = 10.0 * float(np.linalg.eigvalsh(r)[-1])

    def phi(alpha):
        try:
            return Point(ens, curve(alpha)[0]).value
        except NonPositiveLikelihood:
            return math.inf

    res = minimize_scalar(
        phi,
        bounds=(0.0, alpha_max),
        method="bounded",
        options={"xatol": xtol * max(alpha_max, 1.0), "maxiter": 500},
    )
    if not res.success:
        raise LineSearchFailed(f"exact line search did not converge: {res.message}")
    best_alpha, best = float(res.x), float(res.fun)
    for alpha in (0.0, alpha_max):
        val = phi(alpha)
        if val < best:
            best_alpha, best = alpha, val
    return best_alpha, best


def armijo_line_search(ens, rho, r, f0, c=1e-4, max_halvings=60):
    """Backtracking on ``t = 1 / (1 + alpha)``, starting from ``t = 1``.

    Accepts the first ``t`` with ``f(rho_t) <= f0 - c t s`` where
    ``s = 2 (tr(R rho R) - 1) >= 0`` is the decrease rate of the curve as
    ``t -> 0``. Returns ``(alpha, value)``; ``alpha = inf`` at a stationary
    point, where no step is taken.
    """
    curve = _Dilution(rho, r)
    slope = 2.0 * (float(np.trace(curve.rrr).real) - 1.0)
    if slope <= 1e-14:
        return math.inf, f0
    t = 1.0
    for _ in range(max_halvings + 1):
        alpha = 1.0 / t - 1.0
        try:
            val = Point(ens, curve(alpha)[0]).value
        except NonPositiveLikelihood:
            val = math.inf
        if val <= f0 - c * t * slope:
            return alpha, val
        t *= 0.5
    raise LineSearchFailed(
        f"Armijo backtracking failed after {max_halvings} halvings (slope {slope:.3e})"
    )


def step_diluted(ens, state: SolverState, strategy="exact", point=None, alpha=None):
    """Diluted fixed-point step; ``alpha`` overrides the line search when given."""
    pt = _point(ens, state, point)
    r = pt.r
    if alpha is None:
        if strategy == "exact":
            alpha, val = exact_line_search(ens, state.rho, r)
        elif strategy == "armijo":
            alpha, val = armijo_line_search(ens, state.rho, r, pt.value)
        else:
            raise ValueError(f"unknown line-search strategy {strategy!r}")
        if val > pt.value:
            alpha = math.inf
    rho, tau = diluted_update(state.rho, r, alpha)
    return _advance(state, rho, tau, alpha=alpha)


# --- classical special case ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class PortfolioProblem:
    """Minimize ``g(x) = -sum_n w_n log <a_n, x>`` over the probability simplex.

    ``basis`` is set when the problem was extracted from a commuting
    quantum ensemble: column ``d`` is the eigenvector for coordinate ``d``.
    """

    vectors: np.ndarray
    weights: np.ndarray
    basis: Optional[np.ndarray] = None

    def __post_init__(self):
        a = np.asarray(self.vectors, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if a.ndim != 2 or w.shape != (a.shape[0],):
            raise ValidationError(f"vectors {a.shape} and weights {w.shape} do not match")
        if np.any(a < 0):
            raise ValidationError("vectors must be entrywise non-negative")
        if np.any(w <= 0) or abs(w.sum() - 1) > 1e-12:
            raise ValidationError("weights must be positive and sum to 1")
        if not np.all((a > 0).any(axis=0)):
            raise DegenerateAsset(
                f"coordinates {np.flatnonzero(~(a > 0).any(axis=0)).tolist()} are zero in every vector"
            )
        object.__setattr__(self, "vectors", a)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self):
        return self.vectors.shape[1]


def _portfolio_ratio(prob, x):
    p = prob.vectors @ x
    bad = np.flatnonzero(~(p > 0))
    if bad.size:
        raise NonPositiveLikelihood(bad[0], p[bad[0]])
    return p, (prob.weights / p) @ prob.vectors


def portfolio_objective(prob: PortfolioProblem, x) -> float:
    p, _ = _portfolio_ratio(prob, np.asarray(x, dtype=float))
    return float(-np.dot(prob.weights, np.log(p)))


def portfolio_certificate(prob: PortfolioProblem, x) -> float:
    """``log max_d (-grad g(x))_d``, an upper bound on ``g(x) - min g``."""
    _, r = _portfolio_ratio(prob, np.asarray(x, dtype=float))
    return float(np.log(r.max()))


def step_cover(prob: PortfolioProblem, x):
    """Cover's multiplicative update; the output already lies on the simplex."""
    x = np.asarray(x, dtype=float)
    _, r = _portfolio_ratio(prob, x)
    new = x * r
    if abs(new.sum() - 1) > 1e-12:
        raise InvariantViolation(f"Cover iterate left the simplex: sum = {new.sum()!r}")
    return new


def common_eigenbasis(ens: MeasurementEnsemble, tol=1e-9):
    """Unitary whose columns jointly diagonalize every element.

    Diagonalizes a generic combination ``sum_n c_n M_n`` with distinct
    decreasing coefficients, which separates joint eigenspaces, and orders
    columns by descending eigenvalue of that combination.
    """
    n = len(ens)
    coef = np.sort(np.random.default_rng(0x5EED).uniform(1.0, 2.0, n))[::-1]
    combo = linalg.hermitize(np.tensordot(coef, ens.elements, axes=1))
    basis = linalg.eigh(combo).eigenvectors[:, ::-1]
    rotated = basis.conj().T @ ens.elements @ basis
    off = rotated.copy()
    idx = np.arange(ens.dim)
    off[:, idx, idx] = 0
    err = np.linalg.norm(off, axis=(1, 2))
    scale = np.linalg.norm(ens.elements, axis=(1, 2)).max()
    if err.max() > tol * scale:
        worst = int(np.argmax(err))
        raise NotCommuting(
            f"element {worst} is not diagonal in the common basis "
            f"(off-diagonal norm {err[worst]:.3e})"
        )
    return basis, np.einsum("nii->ni", rotated).real


def diagonal_extract(ens: MeasurementEnsemble) -> PortfolioProblem:
    """Classical problem equivalent to a commuting ensemble."""
    basis, diag = common_eigenbasis(ens)
    return PortfolioProblem(np.clip(diag, 0.0, None), ens.weights, basis)


# --- driver -------------------------------------------------------------------


class TraceRecord(NamedTuple):
    k: int
    objective_at_rho: float
    objective_at_rho_bar: float
    certificate_at_rho: float
    certificate_at_rho_bar: float
    tau: float
    elapsed: float  # milliseconds since the start of the run


@dataclass(eq=False)
class ConvergenceReport:
    final_rho: np.ndarray
    final_rho_bar: np.ndarray
    records: list
    stop_reason: str
    total_time: float  # seconds
    algorithm: str = "qem"
    iterations: int = 0
    reduction: object = None

    @property
    def final_certificate(self):
        last = self.records[-1]
        return min(last.certificate_at_rho, last.certificate_at_rho_bar)


def _cover_stepper(ens):
    prob = diagonal_extract(ens)
    v = prob.basis
    x = np.full(prob.dim, 1.0 / prob.dim)

    def step(state, point):
        nonlocal x
        x = step_cover(prob, x)
        rho = linalg.hermitize((v * x) @ v.conj().T)
        return _advance(state, rho, float(x.sum()))

    return step


def _stepper(ens, algorithm):
    if algorithm == "qem":
        return lambda s, p: step_qem(ens, s, p)
    if algorithm == "rrr":
        return lambda s, p: step_rrr(ens, s, p)
    if algorithm == "drrr_exact":
        return lambda s, p: step_diluted(ens, s, "exact", p)
    if algorithm == "drrr_armijo":
        return lambda s, p: step_diluted(ens, s, "armijo", p)
    return _cover_stepper(ens)


def run(ens: MeasurementEnsemble, opts: SolverOptions = SolverOptions(), callback=None):
    """Solve the maximum-likelihood problem for ``ens``.

    The ensemble is first reduced to the support of its elements, the
    chosen algorithm is run from the maximally mixed state, and the final
    iterate and running average are lifted back to the original space.
    Iteration stops once ``min(cert(rho_k), cert(rho_bar_k))`` drops to
    ``opts.certificate_tol`` or after ``opts.max_iters`` iterates.

    ``callback(state)``, if given, is called with every iterate.
    """
    start = time.perf_counter()
    reduced, reduction = kernel_reduce(ens)
    step = _stepper(reduced, opts.algorithm)
    tol = opts.certificate_tol

    state = initial_state(reduced.dim)
    records = []
    while True:
        pt = Point(reduced, state.rho)
        pt_bar = None
        met = pt.bound <= tol
        if not met:
            pt_bar = Point(reduced, state.rho_bar)
            met = pt_bar.bound <= tol
        last = met or state.k >= opts.max_iters
        if callback is not None:
            callback(state)
        if last or state.k == 1 or state.k % opts.record_every == 0:
            if pt_bar is None:
                pt_bar = Point(reduced, state.rho_bar)
            records.append(
                TraceRecord(
                    state.k,
                    pt.value,
                    pt_bar.value,
                    pt.bound,
                    pt_bar.bound,
                    state.last_tau,
                    (time.perf_counter() - start) * 1e3,
                )
            )
        if last:
            break
        state = step(state, pt)
        if opts.algorithm == "qem" and state.last_tau > 1 + GOLDEN_THOMPSON_SLACK:
            raise InvariantViolation(
                f"trace before normalization {state.last_tau!r} exceeds 1 at k={state.k}"
            )

    return ConvergenceReport(
        final_rho=lift_state(state.rho, reduction),
        final_rho_bar=lift_state(state.rho_bar, reduction),
        records=records,
        stop_reason="certificate_met" if met else "max_iters",
        total_time=time.perf_counter() - start,
        algorithm=opts.algorithm,
        iterations=state.k,
        reduction=reduction,
    )


@dataclass(eq=False)
class PortfolioReport:
    final_x: np.ndarray
    final_x_bar: np.ndarray
    records: list
    stop_reason: str
    total_time: float
    iterations: int = 0


def solve_portfolio(prob: PortfolioProblem, max_iters=10000, certificate_tol=1e-8, record_every=1):
    """Cover's method on a growth-optimal portfolio problem."""
    start = time.perf_counter()
    x = np.full(prob.dim, 1.0 / prob.dim)
    x_bar = x.copy()
    k, tau = 1, 1.0
    records = []
    while True:
        cert = portfolio_certificate(prob, x)
        cert_bar = portfolio_certificate(prob, x_bar)
        met = min(cert, cert_bar) <= certificate_tol
        last = met or k >= max_iters
        if last or k == 1 or k % record_every == 0:
            records.append(
                TraceRecord(
                    k,
                    portfolio_objective(prob, x),
                    portfolio_objective(prob, x_bar),
                    cert,
                    cert_bar,
                    tau,
                    (time.perf_counter() - start) * 1e3,
                )
            )
        if last:
            break
        x = step_cover(prob, x)
        tau = float(x.sum())
        k += 1
        x_bar = x_bar + (x - x_bar) / k
    return PortfolioReport(
        x, x_bar, records, "certificate_met" if met else "max_iters",
        time.perf_counter() - start, k,
    )
