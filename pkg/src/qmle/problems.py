"""Synthetic tomography instances and classical portfolio problems.

Randomness comes from ``numpy.random.default_rng`` (PCG64). A seed is
expanded with ``SeedSequence``; ``gen_projective_ensemble`` and
``sample_counts`` spawn one child stream per measurement basis, so basis
``b`` always consumes the ``b``-th child regardless of how many bases follow.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.stats import unitary_group

from . import linalg
from .errors import DegenerateAsset, InvalidReturns, ValidationError
from .model import MeasurementEnsemble
from .solvers import PortfolioProblem


@dataclass(eq=False)
class ProblemInstance:
    ensemble: MeasurementEnsemble
    true_state: Optional[np.ndarray] = None
    metadata: dict = field(default_factory=dict)
    counts: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.true_state is not None:
            shape = np.shape(self.true_state)
            if shape != (self.ensemble.dim, self.ensemble.dim):
                raise ValidationError(
                    f"true_state has shape {shape}, ensemble dim is {self.ensemble.dim}"
                )
        if self.counts is not None and len(self.counts) != len(self.ensemble):
            raise ValidationError("counts and ensemble elements differ in length")


def _seed_sequence(seed):
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def _complex_normal(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def gen_true_state(dim, rank, seed):
    """Random density matrix ``G G^H / tr(G G^H)`` of the given rank."""
    if not 1 <= rank <= dim:
        raise ValueError(f"rank must lie in [1, {dim}], got {rank}")
    g = _complex_normal(np.random.default_rng(seed), (dim, rank))
    rho, _ = linalg.trace_normalize(g @ g.conj().T)
    return rho


def gen_projective_ensemble(dim, bases, seed):
    """Rank-one projectors of ``bases`` orthonormal bases, shape (bases*dim, dim, dim).

    The first basis is the computational basis; the rest are Haar-random
    (scipy's ``unitary_group``, QR of a complex Gaussian with phase fix).
    Projectors of basis ``b`` occupy rows ``b*dim:(b+1)*dim``.
    """
    if bases < 1 or dim < 1:
        raise ValueError("dim and bases must be positive")
    children = _seed_sequence(seed).spawn(bases)
    out = np.empty((bases * dim, dim, dim), dtype=complex)
    for b in range(bases):
        if b == 0:
            u = np.eye(dim, dtype=complex)
        elif dim == 1:
            u = np.ones((1, 1), dtype=complex)
        else:
            u = unitary_group.rvs(dim, random_state=np.random.default_rng(children[b]))
        for d in range(dim):
            col = u[:, d]
            out[b * dim + d] = np.outer(col, col.conj())
    return out


def _basis_probabilities(elements, true_state):
    dim = true_state.shape[0]
    p = np.einsum("nij,ji->n", elements, true_state).real
    p = np.clip(p, 0.0, None).reshape(-1, dim)
    sums = p.sum(axis=1)
    if np.abs(sums - 1).max() > 1e-10:
        raise ValidationError("Born probabilities of a basis do not sum to 1")
    return p / sums[:, None]


def sample_counts(elements, true_state, shots_per_basis, seed):
    """Finite-shot measurement record, returned as a ``ProblemInstance``.

    Each basis gets an independent multinomial draw of ``shots_per_basis``
    outcomes; zero-count outcomes are dropped from the ensemble.
    """
    elements = np.asarray(elements, dtype=complex)
    p = _basis_probabilities(elements, true_state)
    children = _seed_sequence(seed).spawn(p.shape[0])
    counts = np.concatenate(
        [np.random.default_rng(c).multinomial(shots_per_basis, pb) for c, pb in zip(children, p)]
    )
    keep = counts > 0
    ens = MeasurementEnsemble.from_counts(elements[keep], counts[keep], validate=False)
    return ProblemInstance(
        ens,
        true_state,
        {"shots": int(shots_per_basis), "seed": seed if isinstance(seed, int) else None},
        counts[keep].astype(np.int64),
    )


def ideal_ensemble(elements, true_state):
    """Infinite-shot limit: weights equal to Born probabilities over all bases."""
    elements = np.asarray(elements, dtype=complex)
    p = _basis_probabilities(elements, true_state).ravel()
    keep = p > 0
    return MeasurementEnsemble(elements[keep], p[keep] / p[keep].sum(), validate=False)


def gen_instance(dim, bases, shots, rank=1, seed=0):
    """True state, ensemble and finite-shot counts from a single seed."""
    state_seed, basis_seed, shot_seed = _seed_sequence(seed).spawn(3)
    rho = gen_true_state(dim, rank, state_seed)
    elements = gen_projective_ensemble(dim, bases, basis_seed)
    inst = sample_counts(elements, rho, shots, shot_seed)
    inst.metadata = {
        "generator": "qmle.problems.gen_instance",
        "dim": dim,
        "bases": bases,
        "shots": shots,
        "rank": rank,
        "seed": seed,
    }
    return inst


def rrr_cycle_instance():
    """Two-outcome instance on which the plain fixed-point rule cycles.

    Starting from ``I/2``, ``rho <- N(R rho R)`` alternates between ``I/2`` and
    ``diag(0.9, 0.1)`` and never reaches the optimum ``diag(0.75, 0.25)``.
    """
    elements = np.array([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])], dtype=complex)
    ens = MeasurementEnsemble(elements, np.array([0.75, 0.25]))
    return ProblemInstance(
        ens,
        np.diag([0.75, 0.25]).astype(complex),
        {"generator": "qmle.problems.rrr_cycle_instance", "dim": 2},
    )


def portfolio_from_returns(returns, weights=None):
    returns = np.asarray(returns, dtype=float)
    if returns.ndim == 1:
        returns = returns[None]
    if returns.ndim != 2 or returns.size == 0:
        raise InvalidReturns(f"returns must be a non-empty N x D matrix, got {returns.shape}")
    if np.any(returns < 0) or not np.all(np.isfinite(returns)):
        raise InvalidReturns("returns must be finite and non-negative")
    dead = np.flatnonzero(~(returns > 0).any(axis=0))
    if dead.size:
        raise DegenerateAsset(f"assets {dead.tolist()} have zero return in every period")
    if weights is None:
        weights = np.full(returns.shape[0], 1.0 / returns.shape[0])
    return PortfolioProblem(returns, weights)
