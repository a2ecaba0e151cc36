"""Independent brute-force ground truth for cross-checking the fast paths.

Nothing here imports from :mod:`hierwalk.hierarchy` or
:mod:`hierwalk.quantum`; the duplication is deliberate so that agreement
between an oracle and a production path actually validates both. The
matrix exponential is a scaled-and-squared Taylor series (with an
eigendecomposition shortcut for Hermitian input), operators are assembled
by explicit loops over matrix entries, and the joint distribution is a
direct nested summation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionCapExceeded, ExponentOverflow, ShapeMismatch

ENTRY_CAP = 1e3
TAYLOR_TERMS = 18
DENSE_CAP = 4096


@dataclass(frozen=True)
class ComparisonReport:
    max_abs_diff: float
    location: tuple
    tolerance: float
    passed: bool


def compare(A: np.ndarray, B: np.ndarray, tol: float) -> ComparisonReport:
    """Entrywise comparison; reports the worst entry and its multi-index."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise ShapeMismatch(f"shapes differ: {A.shape} vs {B.shape}")
    diff = np.abs(A - B)
    if diff.size == 0:
        return ComparisonReport(0.0, (), tol, True)
    loc = np.unravel_index(int(np.argmax(diff)), diff.shape)
    worst = float(diff[loc])
    return ComparisonReport(max_abs_diff=worst, location=tuple(int(i) for i in loc),
                            tolerance=tol, passed=worst <= tol)


def matrix_exp(M: np.ndarray, hermitian_hint: bool = False) -> np.ndarray:
    """exp(M) by scaling and squaring a truncated Taylor series.

    With ``hermitian_hint`` the exponential is taken through the
    eigendecomposition instead; the two routes agree to 1e-9 on Hermitian
    input, which the self-tests pin down. Entries above 1e3 are refused.
    """
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ShapeMismatch("matrix_exp expects a square matrix")
    if M.size and float(np.max(np.abs(M))) > ENTRY_CAP:
        raise ExponentOverflow(f"entries exceed {ENTRY_CAP:g}")
    if hermitian_hint:
        w, V = np.linalg.eigh(M)
        return (V * np.exp(w)) @ V.conj().T
    norm1 = float(np.max(np.abs(M).sum(axis=0))) if M.size else 0.0
    nsq = max(0, int(math.ceil(math.log2(norm1 / 0.5)))) if norm1 > 0.5 else 0
    T = M / (2.0 ** nsq)
    out = np.eye(M.shape[0], dtype=complex)
    for k in range(TAYLOR_TERMS, 0, -1):
        out = np.eye(M.shape[0], dtype=complex) + (T @ out) / k
    for _ in range(nsq):
        out = out @ out
    if np.isrealobj(M):
        out = out.real
    return out


# ---------------------------------------------------------------------------
# Direct operator assembly
# ---------------------------------------------------------------------------

def dense_hdtrw(P_H: np.ndarray, local_Ps, convention: str = "destination") -> np.ndarray:
    """Entrywise hierarchical walk matrix, no tensor algebra.

    Entry ((y,k),(y',k')) multiplies the global step probability by the
    selected local graph's step and identity on every other register. The
    selected register is y' under the destination convention, y under the
    source convention.
    """
    P_H = np.asarray(P_H, dtype=float)
    local_Ps = [np.asarray(P, dtype=float) for P in local_Ps]
    d1 = P_H.shape[0]
    dims = [P.shape[0] for P in local_Ps]
    N = d1 * int(np.prod(dims))
    out = np.zeros((N, N))
    row = 0
    for y in range(d1):
        for ks in itertools.product(*(range(n) for n in dims)):
            col = 0
            for y2 in range(d1):
                sel = y2 if convention == "destination" else y
                for ks2 in itertools.product(*(range(n) for n in dims)):
                    if all(ks[j] == ks2[j] for j in range(len(dims)) if j != sel):
                        out[row, col] = P_H[y, y2] * local_Ps[sel][ks[sel], ks2[sel]]
                    col += 1
            row += 1
    return out


def _eigh_canonical(A: np.ndarray):
    """Own eigendecomposition with the largest-entry-positive phase convention."""
    w, V = np.linalg.eigh(A)
    V = np.array(V, dtype=complex)
    for m in range(V.shape[1]):
        i = int(np.argmax(np.abs(V[:, m])))
        z = V[i, m]
        if abs(z) > 0:
            V[:, m] *= np.conj(z) / abs(z)
    return w, V


def dense_hamiltonian(global_ham: np.ndarray, local_hams, cap: int = DENSE_CAP) -> np.ndarray:
    """Full hierarchical Hamiltonian from raw ingredient matrices."""
    global_ham = np.asarray(global_ham)
    d1 = global_ham.shape[0]
    systems = [_eigh_canonical(np.asarray(H)) for H in local_hams]
    dims = [w.shape[0] for w, _ in systems]
    N = d1 * int(np.prod(dims))
    if N > cap:
        raise DimensionCapExceeded(f"dimension {N} exceeds cap {cap}")
    out = np.zeros((N, N), dtype=complex)
    for labels in itertools.product(*(range(n) for n in dims)):
        lam = np.array([max(systems[j][0][labels[j]], 0.0) for j in range(d1)])
        root = np.sqrt(lam)
        block = root[:, None] * global_ham * root[None, :]
        proj = np.eye(1, dtype=complex)
        for j in range(d1):
            v = systems[j][1][:, labels[j]]
            proj = np.kron(proj, np.outer(v, v.conj()))
        out += np.kron(block, proj)
    return out


def dense_evolve(global_ham: np.ndarray, local_hams, t: float, psi: np.ndarray,
                 cap: int = DENSE_CAP) -> np.ndarray:
    """exp(i t H) psi through the dense Hamiltonian and the series exponential."""
    H = dense_hamiltonian(global_ham, local_hams, cap)
    U = matrix_exp(1j * t * H)
    return U @ np.asarray(psi, dtype=complex)


# ---------------------------------------------------------------------------
# Joint distribution, two bases
# ---------------------------------------------------------------------------

def dense_joint_distribution(global_ham: np.ndarray, local_hams, t: float,
                             psi_global: np.ndarray, psi_locals,
                             basis: str = "branch", cap: int = DENSE_CAP) -> np.ndarray:
    """Joint law of the local positions by direct summation.

    ``basis="branch"`` evaluates the identity-anchored branch formula with
    nested loops and independently computed eigensystems: for every branch
    of every tuple block the phased and unphased amplitudes are accumulated
    position by position. ``basis="vertex"`` marginalizes the evolved dense
    state over the global register; the two need not coincide.
    """
    global_ham = np.asarray(global_ham)
    d1 = global_ham.shape[0]
    psi_global = np.asarray(psi_global, dtype=complex)
    psi_locals = [np.asarray(p, dtype=complex) for p in psi_locals]
    systems = [_eigh_canonical(np.asarray(H)) for H in local_hams]
    dims = [w.shape[0] for w, _ in systems]
    if d1 * int(np.prod(dims)) > cap:
        raise DimensionCapExceeded(f"dimension {d1 * int(np.prod(dims))} exceeds cap {cap}")

    if basis == "vertex":
        full = psi_global
        for p in psi_locals:
            full = np.kron(full, p)
        out = dense_evolve(global_ham, local_hams, t, full, cap)
        field = out.reshape(d1, -1)
        return np.sum(np.abs(field) ** 2, axis=0).reshape(dims)

    if basis != "branch":
        raise ValueError(f"unknown basis {basis!r}")

    anchor_w, anchor_V = _eigh_canonical(global_ham)
    tol = 1e-9
    tuples = list(itertools.product(*(range(n) for n in dims)))
    blocks = {}
    for labels in tuples:
        lam = np.array([max(systems[j][0][labels[j]], 0.0) for j in range(d1)])
        if np.max(lam) <= tol:
            blocks[labels] = (np.zeros(d1), anchor_V)
        else:
            root = np.sqrt(lam)
            blocks[labels] = _eigh_canonical(root[:, None] * global_ham * root[None, :])

    prob = np.zeros(dims)
    for ks in itertools.product(*(range(n) for n in dims)):
        ident = complex(1.0)
        for j in range(len(dims)):
            ident *= psi_locals[j][ks[j]]
        total = abs(ident) ** 2
        for m in range(d1):
            amp_t = complex(0.0)
            amp_0 = complex(0.0)
            for labels in tuples:
                w, V = blocks[labels]
                factor = np.vdot(V[:, m], psi_global)
                for j in range(len(dims)):
                    v = systems[j][1][:, labels[j]]
                    factor *= v[ks[j]] * np.vdot(v, psi_locals[j])
                amp_t += factor * np.exp(1j * t * w[m])
                amp_0 += factor
            total += abs(amp_t) ** 2 - abs(amp_0) ** 2
        prob[ks] = total
    return prob
