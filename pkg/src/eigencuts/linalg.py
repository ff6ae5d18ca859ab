"""Dense symmetric eigendecomposition and the PSD separation oracle."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidMatrixError

# Inputs may arrive slightly asymmetric (file round-trips, solver output);
# anything beyond this relative tolerance is treated as a real error.
ASYMMETRY_REL_TOL = 1e-6


class SymMatrix:
    """Dense real symmetric matrix with value semantics.

    The constructor symmetrizes via (A + A')/2 and records the worst
    asymmetry seen; asymmetry beyond ASYMMETRY_REL_TOL * ||A||_F is rejected.
    The stored array is read-only.
    """

    __slots__ = ("entries", "max_asymmetry")

    def __init__(self, entries) -> None:
        A = np.array(entries, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise InvalidMatrixError(f"expected a square matrix, got shape {A.shape}")
        if A.shape[0] < 1:
            raise InvalidMatrixError("matrix must be at least 1x1")
        if not np.all(np.isfinite(A)):
            raise InvalidMatrixError("matrix has non-finite entries")
        asym = float(np.max(np.abs(A - A.T))) if A.size else 0.0
        fro = float(np.linalg.norm(A))
        if asym > ASYMMETRY_REL_TOL * fro:
            raise InvalidMatrixError(
                f"asymmetry {asym:.3e} exceeds {ASYMMETRY_REL_TOL:.0e} * ||A||_F = "
                f"{ASYMMETRY_REL_TOL * fro:.3e}"
            )
        S = (A + A.T) / 2.0
        S.flags.writeable = False
        self.entries = S
        self.max_asymmetry = asym

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def fro_norm(self) -> float:
        return float(np.linalg.norm(self.entries))

    def __repr__(self) -> str:
        return f"SymMatrix(n={self.n})"

    def __eq__(self, other) -> bool:
        return isinstance(other, SymMatrix) and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash((self.n, self.entries.tobytes()))


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues sorted descending; column i of `vectors` pairs with values[i]."""

    values: np.ndarray
    vectors: np.ndarray

    @property
    def lam_max(self) -> float:
        return float(self.values[0])

    @property
    def lam_min(self) -> float:
        return float(self.values[-1])


def eig_decompose(A: SymMatrix) -> EigenDecomposition:
    """Full orthonormal eigendecomposition, eigenvalues descending.

    numpy's eigh returns ascending order; both arrays are flipped so that
    values[0] is the largest eigenvalue.
    """
    w, V = np.linalg.eigh(A.entries)
    values = w[::-1].copy()
    vectors = V[:, ::-1].copy()
    values.flags.writeable = False
    vectors.flags.writeable = False
    return EigenDecomposition(values=values, vectors=vectors)


def min_eig_cut(X: SymMatrix, tol: float) -> tuple[float, np.ndarray] | None:
    """PSD separation oracle.

    Returns None when lambda_min(X) >= -tol (X accepted as PSD at tolerance),
    otherwise (lambda_min, v) with v the corresponding unit eigenvector, so
    that v'Xv = lambda_min < -tol is a violated cut.
    """
    decomp = eig_decompose(X)
    lam_min = decomp.lam_min
    if lam_min >= -tol:
        return None
    return lam_min, decomp.vectors[:, -1].copy()
