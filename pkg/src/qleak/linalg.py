"""Complex-matrix kernel: Hermitian eigendecomposition, PSD inverse square
roots, trace pairings, tensor products and the trace metric.

Everything downstream (states, channels, the ascent loop) funnels its linear
algebra through these functions, so the tolerances live here in one place.
All functions are pure; inputs are never modified.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    NonSquareError,
    NotHermitianError,
    NotPsdError,
    NumericalFailureError,
)

# Asymmetry tolerance for matrices that must be Hermitian, measured on the
# Frobenius-normalized defect ||m - m^dag||_F / max(1, ||m||_F).
HERMITIAN_ATOL = 1e-9

# Eigenvalues above this (negative) threshold count as numerical noise on a
# PSD matrix; anything below is a genuinely invalid operator.
PSD_EIG_FLOOR = -1e-9


class HermitianEig(NamedTuple):
    """Spectral decomposition of a Hermitian matrix.

    eigenvalues are real and sorted descending; eigenvectors holds the
    matching orthonormal eigenvectors as columns, so that
    ``eigenvectors @ diag(eigenvalues) @ eigenvectors.conj().T``
    reconstructs the input.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_cmatrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D complex128 array and reject non-finite entries."""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2:
        raise DimensionMismatchError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise NumericalFailureError(f"{name} contains NaN or Inf entries")
    return arr


def hermiticity_defect(m: np.ndarray) -> float:
    """Frobenius-normalized distance of m from its Hermitian part."""
    norm = np.linalg.norm(m)
    return float(np.linalg.norm(m - m.conj().T) / max(1.0, norm))


def hermitize(m: np.ndarray) -> np.ndarray:
    """Return the Hermitian part (m + m^dag) / 2."""
    return (m + m.conj().T) / 2


def herm_eig(m, symmetrize: bool = False) -> HermitianEig:
    """Eigendecompose a Hermitian matrix, eigenvalues descending.

    Parameters
    ----------
    m : array_like
        Square matrix. Must be Hermitian within tolerance unless
        ``symmetrize`` is set, in which case (m + m^dag)/2 is decomposed.
    symmetrize : bool
        Replace m by its Hermitian part before decomposing.

    Returns
    -------
    HermitianEig
        Real eigenvalues sorted descending and matching eigenvector
        columns.

    Raises
    ------
    NonSquareError, NotHermitianError, NumericalFailureError
    """
    arr = as_cmatrix(m)
    if arr.shape[0] != arr.shape[1]:
        raise NonSquareError(f"expected square matrix, got shape {arr.shape}")
    if symmetrize:
        arr = hermitize(arr)
    elif hermiticity_defect(arr) > HERMITIAN_ATOL:
        raise NotHermitianError(
            f"asymmetry {hermiticity_defect(arr):.3e} exceeds {HERMITIAN_ATOL:.0e}; "
            "pass symmetrize=True to decompose the Hermitian part"
        )
    try:
        vals, vecs = np.linalg.eigh(arr)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"eigensolver failed: {exc}") from exc
    # eigh returns ascending order
    return HermitianEig(vals[::-1].copy(), vecs[:, ::-1].copy())


def inv_sqrt_psd(s, reg: float = 0.0) -> np.ndarray:
    """Regularized inverse square root of a PSD matrix.

    Computes ``V diag((lambda_i + reg)^(-1/2)) V^dag`` after clamping
    eigenvalues in [PSD_EIG_FLOOR, 0) to zero. ``reg <= 0`` is replaced by
    machine epsilon so the result is always finite.

    Raises
    ------
    NotPsdError
        If any eigenvalue lies below the PSD floor.
    """
    vals, vecs = herm_eig(s, symmetrize=True)
    if vals[-1] < PSD_EIG_FLOOR:
        raise NotPsdError(f"eigenvalue {vals[-1]:.3e} below PSD floor {PSD_EIG_FLOOR:.0e}")
    if reg <= 0.0:
        reg = np.finfo(np.float64).eps
    clamped = np.maximum(vals, 0.0)
    inv = 1.0 / np.sqrt(clamped + reg)
    return hermitize((vecs * inv) @ vecs.conj().T)


def trace_product(a, b) -> complex:
    """tr(a @ b) as the pairing sum a_ij b_ji, without forming the product.

    Requires the product a @ b to exist and be square.
    """
    am = as_cmatrix(a, "a")
    bm = as_cmatrix(b, "b")
    if am.shape[1] != bm.shape[0] or am.shape[0] != bm.shape[1]:
        raise DimensionMismatchError(
            f"shapes {am.shape} and {bm.shape} do not contract to a square product"
        )
    return complex(np.einsum("ij,ji->", am, bm))


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product; block (i, j) of the result is a_ij * b."""
    return np.kron(as_cmatrix(a, "a"), as_cmatrix(b, "b"))


def trace_distance(a, b) -> float:
    """Trace distance (1/2) sum |eig(a - b)| between Hermitian operators.

    Equals half the nuclear norm of the difference; lies in [0, 1] when a
    and b are density operators.
    """
    am = as_cmatrix(a, "a")
    bm = as_cmatrix(b, "b")
    if am.shape != bm.shape:
        raise DimensionMismatchError(f"shape mismatch {am.shape} vs {bm.shape}")
    for name, mat in (("a", am), ("b", bm)):
        if hermiticity_defect(mat) > HERMITIAN_ATOL:
            raise NotHermitianError(f"{name} is not Hermitian within {HERMITIAN_ATOL:.0e}")
    vals, _ = herm_eig(am - bm, symmetrize=True)
    return float(0.5 * np.sum(np.abs(vals)))
