"""Likelihood model for state tomography.

A measurement record is summarized by a weighted ensemble of PSD effects
``M_n`` (weights are empirical outcome frequencies). The negative
log-likelihood is

    f(rho) = -sum_n w_n log tr(M_n rho)

and its negative gradient is ``R(rho) = sum_n w_n M_n / tr(M_n rho)``.
``R`` is positive definite whenever the effects have no common kernel,
which ``kernel_reduce`` enforces by restricting to the joint support.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from . import linalg
from .errors import DimensionError, EmptyEnsemble, NonPositiveLikelihood, ValidationError


@dataclass(frozen=True, eq=False)
class MeasurementEnsemble:
    """Weighted list of PSD measurement effects on a ``dim``-dimensional space.

    Parameters
    ----------
    elements : array_like, shape (N, D, D)
        Hermitian positive semi-definite effects.
    weights : array_like, shape (N,)
        Positive weights summing to one.
    validate : bool
        Check PSD-ness of every element (O(N D^3)); skip for trusted input.
    """

    elements: np.ndarray
    weights: np.ndarray
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        elements = np.asarray(self.elements, dtype=complex)
        weights = np.asarray(self.weights, dtype=float)
        if elements.ndim == 2:
            elements = elements[None]
        if elements.ndim != 3 or elements.shape[1] != elements.shape[2]:
            raise DimensionError(f"elements must have shape (N, D, D), got {elements.shape}")
        if weights.shape != (elements.shape[0],):
            raise DimensionError(
                f"{elements.shape[0]} elements but weights of shape {weights.shape}"
            )
        if elements.shape[0] == 0:
            raise EmptyEnsemble("ensemble has no elements")
        if not np.all(weights > 0):
            raise ValidationError("weights must be strictly positive")
        if abs(weights.sum() - 1) > 1e-12:
            raise ValidationError(f"weights sum to {weights.sum()!r}, expected 1")
        if self.validate:
            herm_err = np.abs(elements - elements.conj().transpose(0, 2, 1)).max()
            if herm_err > 1e-12 * max(1.0, np.abs(elements).max()):
                raise ValidationError(f"elements are not Hermitian (error {herm_err:.3e})")
            for n, m in enumerate(elements):
                w = np.linalg.eigvalsh(m)
                if w[0] < -1e-10 * max(w[-1], 0.0) or w[-1] < 0:
                    raise ValidationError(f"element {n} is not positive semi-definite")
        elements = (elements + elements.conj().transpose(0, 2, 1)) / 2
        elements.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_counts(cls, elements, counts, validate=True):
        """Build an ensemble from raw outcome counts; zero counts are dropped."""
        elements = np.asarray(elements, dtype=complex)
        counts = np.asarray(counts, dtype=float)
        if np.any(counts < 0):
            raise ValidationError("counts must be non-negative")
        keep = counts > 0
        total = counts[keep].sum()
        if total <= 0:
            raise EmptyEnsemble("all counts are zero")
        return cls(elements[keep], counts[keep] / total, validate=validate)

    @property
    def dim(self):
        return self.elements.shape[1]

    def __len__(self):
        return self.elements.shape[0]

    def total(self):
        """Weighted sum of elements; positive definite iff no common kernel."""
        return linalg.hermitize(np.tensordot(self.weights, self.elements, axes=1))


class ReductionMap(NamedTuple):
    original_dim: int
    reduced_dim: int
    isometry: np.ndarray  # (original_dim, reduced_dim), orthonormal columns

    @classmethod
    def identity(cls, dim):
        return cls(dim, dim, np.eye(dim, dtype=complex))

    @property
    def is_identity(self):
        return self.original_dim == self.reduced_dim


def _check_dim(ens, rho):
    rho = np.asarray(rho)
    if rho.shape != (ens.dim, ens.dim):
        raise DimensionError(f"state has shape {rho.shape}, ensemble dim is {ens.dim}")
    return rho


def born_probabilities(ens: MeasurementEnsemble, rho):
    """Return ``p_n = tr(M_n rho)``; raises NonPositiveLikelihood if any p_n <= 0."""
    rho = _check_dim(ens, rho)
    # tr(M rho) = sum_ij M_ij rho_ji
    p = np.einsum("nij,ji->n", ens.elements, rho).real
    bad = np.flatnonzero(~(p > 0))
    if bad.size:
        raise NonPositiveLikelihood(bad[0], p[bad[0]])
    return p


def objective(ens: MeasurementEnsemble, rho) -> float:
    p = born_probabilities(ens, rho)
    return float(-np.dot(ens.weights, np.log(p)))


def r_from_probabilities(ens, p):
    d = ens.dim
    r = ((ens.weights / p) @ ens.elements.reshape(-1, d * d)).reshape(d, d)
    return (r + r.conj().T) / 2


def r_map(ens: MeasurementEnsemble, rho):
    """Negative gradient of the objective, ``sum_n w_n M_n / tr(M_n rho)``."""
    return r_from_probabilities(ens, born_probabilities(ens, rho))


class Certificate(NamedTuple):
    bound: float
    direction: np.ndarray


def certificate_from_eigh(dec: linalg.EigenDecomposition) -> Certificate:
    linalg.check_positive_spectrum(dec.eigenvalues, "R(rho)", strict=True)
    top = dec.eigenvectors[:, -1]
    return Certificate(float(np.log(dec.eigenvalues[-1])), np.outer(top, top.conj()))


def certificate(ens: MeasurementEnsemble, rho) -> Certificate:
    """Upper bound on the optimality gap ``f(rho) - min f``.

    The bound is ``log lambda_max(R(rho))``, the largest eigenvalue of
    ``log R(rho)``. Since ``tr(R(rho) rho) = 1`` it is never negative, and it
    vanishes exactly at a maximum-likelihood state. ``direction`` is the
    projector onto the top eigenvector of ``R(rho)``, i.e. the pure state
    attaining the maximum over density matrices of ``<log R(rho), sigma>``.
    """
    return certificate_from_eigh(linalg.eigh(r_map(ens, rho)))


class Point:
    """Objective, gradient and certificate at one state, computed on demand."""

    def __init__(self, ens: MeasurementEnsemble, rho):
        self.ens = ens
        self.rho = rho

    @cached_property
    def probabilities(self):
        return born_probabilities(self.ens, self.rho)

    @cached_property
    def value(self):
        return float(-np.dot(self.ens.weights, np.log(self.probabilities)))

    @cached_property
    def r(self):
        return r_from_probabilities(self.ens, self.probabilities)

    @cached_property
    def r_eigh(self):
        return linalg.eigh(self.r)

    @cached_property
    def certificate(self):
        return certificate_from_eigh(self.r_eigh)

    @cached_property
    def bound(self):
        w = self.r_eigh.eigenvalues
        linalg.check_positive_spectrum(w, "R(rho)", strict=True)
        return float(np.log(w[-1]))


def kernel_reduce(ens: MeasurementEnsemble, tol=1e-10):
    """Restrict an ensemble to the orthogonal complement of its common kernel.

    Returns the reduced ensemble (elements ``U^H M_n U``) and the
    ``ReductionMap`` holding ``U``. When the ensemble already has trivial
    kernel intersection it is returned unchanged with ``U = I``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    dec = linalg.eigh(ens.total())
    w, v = dec
    top = w[-1]
    if not top > 0 or not np.isfinite(top):
        raise EmptyEnsemble("sum of ensemble elements is numerically zero")
    keep = w > tol * top
    if keep.all():
        return ens, ReductionMap.identity(ens.dim)
    # descending eigenvalue order for a stable, readable basis
    u = v[:, keep][:, ::-1]
    reduced = u.conj().T @ ens.elements @ u
    new = MeasurementEnsemble(reduced, ens.weights, validate=False)
    return new, ReductionMap(ens.dim, int(keep.sum()), u)


def lift_state(rho_reduced, reduction: ReductionMap):
    """Embed a reduced-space state back into the original space, ``U rho U^H``."""
    rho_reduced = np.asarray(rho_reduced)
    d = reduction.reduced_dim
    if rho_reduced.shape != (d, d):
        raise DimensionError(f"expected a {d}x{d} state, got {rho_reduced.shape}")
    if reduction.is_identity:
        return rho_reduced
    u = reduction.isometry
    return linalg.hermitize(u @ rho_reduced @ u.conj().T)
