"""Hermitian eigendecomposition with deterministic conventions.

Everything downstream consumes :class:`EigenSystem` objects: ascending
eigenvalues, orthonormal columns with a fixed phase convention (the
largest-magnitude component of each eigenvector is made real positive),
and a partition of the labels into degenerate groups. The phase convention
matters: cross products between eigenvectors of *different* operators enter
the hierarchical distribution formulas, so the decomposition has to be
reproducible rather than whatever the backend returns.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, DimensionMismatch, NotHermitian

HERMITIAN_TOL = 1e-10
GROUPING_TOL = 1e-9


def canonical_phases(vectors: np.ndarray) -> np.ndarray:
    """Rescale each column so its largest-magnitude entry is real positive."""
    V = np.array(vectors, copy=True)
    for m in range(V.shape[1]):
        i = int(np.argmax(np.abs(V[:, m])))
        z = V[i, m]
        a = abs(z)
        if a > 0:
            V[:, m] = V[:, m] * (np.conj(z) / a)
    if np.isrealobj(vectors):
        V = V.real
    return V


def group_by_gap(values: np.ndarray, tol: float) -> list[list[int]]:
    """Partition ascending values into clusters separated by gaps > tol."""
    groups: list[list[int]] = []
    for i, v in enumerate(values):
        if groups and v - values[groups[-1][-1]] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


@dataclass(frozen=True)
class EigenSystem:
    """Ascending eigenvalues with an orthonormal eigenvector basis.

    ``vectors[:, m]`` pairs with ``values[m]``; ``groups`` clusters indices
    of (numerically) degenerate eigenvalues.
    """

    values: np.ndarray
    vectors: np.ndarray
    groups: tuple

    @property
    def dimension(self) -> int:
        return self.values.shape[0]

    def reconstruct(self) -> np.ndarray:
        """V diag(values) V^H."""
        return (self.vectors * self.values) @ self.vectors.conj().T

    def orthonormality_defect(self) -> float:
        V = self.vectors
        return float(np.max(np.abs(V.conj().T @ V - np.eye(self.dimension))))


def eigh(A: np.ndarray, tol: float = GROUPING_TOL) -> EigenSystem:
    """Eigendecompose a Hermitian matrix with canonical ordering and phases.

    Raises :class:`NotHermitian` when ``max|A - A^H|`` exceeds 1e-10.
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch("eigh expects a square matrix")
    defect = float(np.max(np.abs(A - A.conj().T))) if A.size else 0.0
    if defect > HERMITIAN_TOL:
        raise NotHermitian(f"hermiticity defect {defect:.3e} exceeds {HERMITIAN_TOL:.1e}")
    try:
        w, V = np.linalg.eigh(A)
    except np.linalg.LinAlgError as e:
        raise ConvergenceFailure(str(e)) from e
    V = canonical_phases(V)
    return EigenSystem(values=w, vectors=V, groups=tuple(tuple(g) for g in group_by_gap(w, tol)))


@dataclass(frozen=True)
class TransitionSpectrum:
    """Left/right eigensystem of a reversible transition matrix.

    values[m] = 1 - mu[m] where mu are the normalized-Laplacian eigenvalues;
    right[:, m] = D^{-1/2} v_m and left[m, :] = v_m^H D^{1/2} satisfy
    left @ right = I and sum_m values[m] right_m left_m = P.
    """

    values: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.right_vectors * self.values) @ self.left_vectors


def transition_spectrum(laplacian_system: EigenSystem, pi: np.ndarray) -> TransitionSpectrum:
    """Convert a normalized-Laplacian eigensystem into P's left/right pairs."""
    pi = np.asarray(pi, dtype=float)
    if pi.shape[0] != laplacian_system.dimension:
        raise DimensionMismatch("measure dimension does not match the eigensystem")
    d = np.sqrt(pi)
    V = laplacian_system.vectors
    return TransitionSpectrum(
        values=1.0 - laplacian_system.values,
        right_vectors=V / d[:, None],
        left_vectors=(V * d[:, None]).conj().T,
    )


@dataclass(frozen=True)
class SpectralShift:
    """Record of the offset applied to make a spectrum nonnegative."""

    offset: float
    mode: str


def shift_to_nonnegative(system: EigenSystem, mode: str = "min-shift",
                         tol: float = GROUPING_TOL) -> tuple[EigenSystem, SpectralShift]:
    """Shift or reflect a Hermitian spectrum into the nonnegative half-line.

    ``min-shift`` subtracts the minimum eigenvalue; ``max-reflect`` returns
    ``max - values`` (reversing the order, eigenvectors following their
    eigenvalues). Either way the evolution operator changes by at most a
    global phase and a time reversal, so single-walk statistics are kept.
    """
    w = system.values
    if mode == "min-shift":
        offset = float(w[0])
        new = EigenSystem(values=w - offset, vectors=system.vectors,
                          groups=system.groups)
    elif mode == "max-reflect":
        offset = float(w[-1])
        values = offset - w[::-1]
        vectors = system.vectors[:, ::-1].copy()
        new = EigenSystem(values=values, vectors=vectors,
                          groups=tuple(tuple(g) for g in group_by_gap(values, tol)))
    else:
        raise ValueError(f"unknown shift mode {mode!r}")
    return new, SpectralShift(offset=offset, mode=mode)


def tuple_iterator(systems):
    """Yield (index tuple, eigenvalue tuple, eigenvector tuple) over all labels.

    Lexicographic order with the last system's label varying fastest.
    """
    systems = list(systems)
    if not systems:
        raise ValueError("tuple_iterator needs at least one eigensystem")
    for idx in itertools.product(*(range(s.dimension) for s in systems)):
        values = tuple(float(s.values[i]) for s, i in zip(systems, idx))
        vectors = tuple(s.vectors[:, i] for s, i in zip(systems, idx))
        yield idx, values, vectors
