"""Dense Hermitian linear algebra.

Matrix functions are evaluated through a full Hermitian eigendecomposition,
so ``matrix_log`` and ``matrix_exp`` share the same spectral machinery and
cost O(D^3) each. Hermitian matrices and density matrices are plain complex
``numpy`` arrays; the helpers here validate and repair them.
"""

from typing import NamedTuple

import numpy as np

from .errors import (
    DimensionError,
    NotNormalizable,
    NotPositiveDefinite,
    NumericError,
    ValidationError,
)

LOG_FLOOR = 1e-300
EXP_MAX = 700.0


class EigenDecomposition(NamedTuple):
    eigenvalues: np.ndarray  # ascending, real
    eigenvectors: np.ndarray  # column j pairs with eigenvalue j

    def reconstruct(self):
        v = self.eigenvectors
        return hermitize((v * self.eigenvalues) @ v.conj().T)


def _square(a):
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    return a


def hermitize(a):
    """Return the Hermitian part ``(A + A^H) / 2`` as a complex array."""
    a = _square(a).astype(complex, copy=False)
    return (a + a.conj().T) / 2


def eigh(h) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    h = _square(h)
    if not np.isfinite(h).all():
        raise NumericError("eigendecomposition of a matrix with non-finite entries")
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericError(
            f"eigendecomposition failed (||H||_F = {np.linalg.norm(h):.3e}): {exc}"
        ) from exc
    return EigenDecomposition(w, v)


def apply_spectral(fun, dec: EigenDecomposition):
    """Evaluate ``V diag(fun(w)) V^H`` from an existing decomposition."""
    v = dec.eigenvectors
    return hermitize((v * fun(dec.eigenvalues)) @ v.conj().T)


def matrix_exp(h):
    """Matrix exponential of a Hermitian matrix.

    Raises
    ------
    NumericError
        If the largest eigenvalue exceeds 700 (``exp`` would overflow).
    """
    dec = eigh(h)
    if dec.eigenvalues[-1] > EXP_MAX:
        raise NumericError(
            f"matrix_exp overflow: largest eigenvalue {dec.eigenvalues[-1]:.6g} > {EXP_MAX}"
        )
    return apply_spectral(np.exp, dec)


def check_positive_spectrum(w, what="matrix", strict=False):
    """Raise unless every eigenvalue in ``w`` is positive up to roundoff.

    With ``strict`` the smallest eigenvalue must be strictly positive.
    """
    top = w[-1]
    if not top > 0 or w[0] < -1e-10 * top or (strict and not w[0] > 0):
        raise NotPositiveDefinite(
            f"{what} is not positive definite: eigenvalue range [{w[0]:.3e}, {top:.3e}]"
        )


def log_from_eigh(dec: EigenDecomposition, floor=LOG_FLOOR, what="matrix"):
    check_positive_spectrum(dec.eigenvalues, what)
    return apply_spectral(lambda w: np.log(np.maximum(w, floor)), dec)


def matrix_log(p, floor=LOG_FLOOR):
    """Matrix logarithm of a positive definite Hermitian matrix.

    Eigenvalues below ``floor`` (roundoff or underflow) are clamped to it,
    so the result stays finite.
    """
    if not floor > 0:
        raise ValueError("floor must be positive")
    return log_from_eigh(eigh(p), floor)


def hs_inner(a, b) -> float:
    """Hilbert-Schmidt inner product ``tr(A^H B)``, real part."""
    a, b = _square(a), _square(b)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.vdot(a, b).real)


def trace_normalize(p):
    """Scale ``p`` to unit trace.

    Returns
    -------
    rho : ndarray
        ``p / tr(p)``.
    tau : float
        The trace before normalization.
    """
    p = hermitize(p)
    tau = float(np.trace(p).real)
    if not tau > 0 or not np.isfinite(tau):
        raise NotNormalizable(f"cannot normalize a matrix with trace {tau!r}")
    return p / tau, tau


def is_density_matrix(rho, atol=1e-10):
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return False
    scale = max(1.0, float(np.abs(rho).max()))
    if np.abs(rho - rho.conj().T).max() > 1e-12 * scale:
        return False
    if abs(np.trace(rho).real - 1) > atol:
        return False
    return bool(np.linalg.eigvalsh(hermitize(rho))[0] >= -atol)


def check_density_matrix(rho, name="rho"):
    """Validate the density-matrix invariants, returning the hermitized matrix."""
    if not is_density_matrix(rho):
        raise ValidationError(f"{name} is not a density matrix (PSD, unit trace)")
    return hermitize(rho)


def maximally_mixed(dim):
    return np.eye(dim, dtype=complex) / dim
