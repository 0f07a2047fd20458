"""Dense real-symmetric eigendecomposition.

Thin contract wrapper around LAPACK's divide-and-conquer solver (via
``numpy.linalg.eigh``): validates symmetry, caps the problem size, and returns
eigenvalues in ascending order with orthonormal eigenvectors as columns.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericalError, ValidationError

MAX_DIM = 4096
SYMMETRY_RTOL = 1e-12


def symmetric_eigendecomposition(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix.

    The residual ||A v_i - lam_i v_i|| stays below 1e-10 * ||A|| (max row sum)
    and V^T V = I to 1e-10 entrywise.

    Raises
    ------
    ValidationError
        Non-square, oversized, or non-symmetric input (asymmetry above
        1e-12 relative to the matrix scale).
    NumericalError
        The underlying iteration failed to converge.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n > MAX_DIM:
        raise ValidationError(f"matrix dimension {n} exceeds the cap {MAX_DIM}")
    scale = np.abs(a).sum(axis=1).max()
    if scale > 0:
        asym = np.abs(a - a.T).max()
        if asym > SYMMETRY_RTOL * scale:
            raise ValidationError(
                f"matrix is not symmetric: max asymmetry {asym:.3e} "
                f"(scale {scale:.3e})"
            )
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition did not converge: {exc}") from exc
    return w, v
