"""Hierarchical walk operators on a global graph coordinating local graphs.

The model couples a global graph H on vertices 0..d with one local graph
per global vertex. One step of the discrete-time walk moves the global
walker and advances a single local walker; the whole operator is

    P = sum_j  P_H |j><j|  (x)  lift_j(P_j),

acting on the tensor space (global register) x (local registers 0..d),
flattened with the global index slowest and local register d fastest. The
column selector |j><j| means the local graph that steps is indexed by the
*destination* of the global move; ``convention="source"`` transposes the
selector to |j><j| P_H so the source vertex chooses instead.

The continuous-time variant replaces each local step by the heat semigroup
exp(-t_j (I - P_j)). Both operators diagonalize blockwise over tuples of
local eigenlabels, which is what every function below exploits.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, qr

from .errors import (
    DimensionCapExceeded,
    DimensionMismatch,
    MissingTransition,
    NegativeTime,
    NonpositiveDiagonal,
    NotReversible,
)
from .graphs import GraphModel, normalized_laplacian, prepare_walk, verify_detailed_balance
from .spectral import EigenSystem, TransitionSpectrum, eigh, transition_spectrum

DENSE_CAP = 4096
DEFECT_TOL = 1e-8


@dataclass(frozen=True)
class WalkSpectralData:
    """One graph's walk data: measure, Laplacian eigensystem, P-spectrum."""

    graph: GraphModel
    laplacian: np.ndarray
    system: EigenSystem
    spectrum: TransitionSpectrum

    @property
    def dimension(self) -> int:
        return self.graph.vertex_count


def walk_spectral_data(g: GraphModel) -> WalkSpectralData:
    g = prepare_walk(g)
    report = verify_detailed_balance(g.transition, g.measure)
    if not report.ok:
        raise NotReversible(f"detailed balance defect {report.max_defect:.3e}")
    L = normalized_laplacian(g.transition, g.measure).matrix
    system = eigh(L)
    return WalkSpectralData(graph=g, laplacian=L, system=system,
                            spectrum=transition_spectrum(system, g.measure))


@dataclass(frozen=True)
class HierarchicalModel:
    """The pair (H; G_0..G_d) with per-graph spectral data and index layout."""

    global_walk: WalkSpectralData
    locals: tuple

    def __post_init__(self):
        if self.global_walk.dimension != len(self.locals):
            raise DimensionMismatch(
                f"global graph has {self.global_walk.dimension} vertices "
                f"but {len(self.locals)} local graphs were supplied")

    @property
    def branching(self) -> int:
        """Number of local graphs (= global vertex count)."""
        return len(self.locals)

    @property
    def local_dims(self) -> tuple:
        return tuple(loc.dimension for loc in self.locals)

    @property
    def local_dimension(self) -> int:
        return int(np.prod(self.local_dims))

    @property
    def dimension(self) -> int:
        return self.branching * self.local_dimension

    def flat_index(self, y: int, ks) -> int:
        """Flatten (global vertex, local positions); register d is fastest."""
        return int(np.ravel_multi_index((y, *ks), (self.branching, *self.local_dims)))

    def unflatten(self, index: int) -> tuple:
        return tuple(int(i) for i in np.unravel_index(index, (self.branching, *self.local_dims)))


def hierarchical_model(global_graph: GraphModel, local_graphs) -> HierarchicalModel:
    """Prepare walks on every graph and bundle their spectral data."""
    return HierarchicalModel(
        global_walk=walk_spectral_data(global_graph),
        locals=tuple(walk_spectral_data(g) for g in local_graphs),
    )


def lift_local(A: np.ndarray, dims, j: int) -> np.ndarray:
    """Embed a matrix acting on register j as identity on all other registers."""
    A = np.asarray(A)
    dims = tuple(int(n) for n in dims)
    if A.shape != (dims[j], dims[j]):
        raise DimensionMismatch(f"matrix is {A.shape}, register {j} has dimension {dims[j]}")
    out = np.eye(1, dtype=A.dtype)
    for m, n in enumerate(dims):
        out = np.kron(out, A if m == j else np.eye(n, dtype=A.dtype))
    return out


def _selector(P_H: np.ndarray, j: int, convention: str) -> np.ndarray:
    sel = np.zeros_like(P_H)
    if convention == "destination":
        sel[:, j] = P_H[:, j]
    elif convention == "source":
        sel[j, :] = P_H[j, :]
    else:
        raise ValueError(f"unknown selection convention {convention!r}")
    return sel


def build_hdtrw(model: HierarchicalModel, convention: str = "destination",
                cap: int = DENSE_CAP) -> np.ndarray:
    """Dense one-step transition matrix of the hierarchical walk.

    Materialization is refused above ``cap``; use :func:`apply_hdtrw` there.
    """
    if model.dimension > cap:
        raise DimensionCapExceeded(f"dimension {model.dimension} exceeds cap {cap}; "
                                   "use apply_hdtrw for matrix-free application")
    P_H = model.global_walk.graph.transition
    if P_H is None:
        raise MissingTransition("global graph has no transition matrix")
    dims = model.local_dims
    out = np.zeros((model.dimension, model.dimension))
    for j, loc in enumerate(model.locals):
        if loc.graph.transition is None:
            raise MissingTransition(f"local graph {j} has no transition matrix")
        out += np.kron(_selector(P_H, j, convention), lift_local(loc.graph.transition, dims, j))
    return out


def _apply_register(matrix: np.ndarray, field: np.ndarray, register: int) -> np.ndarray:
    moved = np.tensordot(matrix, field, axes=([1], [register]))
    return np.moveaxis(moved, 0, register)


def _apply_selected(P_H: np.ndarray, local_mats, x: np.ndarray, dims,
                    convention: str) -> np.ndarray:
    """Apply sum_j selector_j(P_H) (x) lift_j(local_mats[j]) to a flat vector."""
    d1 = P_H.shape[0]
    field = np.asarray(x).reshape((d1, *dims))
    if convention == "destination":
        # local graph indexed by the destination: step register j of slice j,
        # then mix slices with P_H
        stepped = np.stack([_apply_register(local_mats[j], field[j], j) for j in range(d1)])
        out = np.tensordot(P_H, stepped, axes=([1], [0]))
    elif convention == "source":
        mixed = np.tensordot(P_H, field, axes=([1], [0]))
        out = np.stack([_apply_register(local_mats[j], mixed[j], j) for j in range(d1)])
    else:
        raise ValueError(f"unknown selection convention {convention!r}")
    return out.reshape(-1)


def apply_hdtrw(model: HierarchicalModel, x: np.ndarray,
                convention: str = "destination") -> np.ndarray:
    """Matrix-free action of the hierarchical walk on a state vector."""
    x = np.asarray(x)
    if x.shape != (model.dimension,):
        raise DimensionMismatch(f"vector has shape {x.shape}, expected ({model.dimension},)")
    return _apply_selected(model.global_walk.graph.transition,
                           [loc.graph.transition for loc in model.locals],
                           x, model.local_dims, convention)


@dataclass(frozen=True)
class HdtrwEigenpair:
    """One eigenpair of the discrete-time walk, tagged by its tuple block."""

    value: complex
    vector: np.ndarray
    labels: tuple
    block_index: int


@dataclass(frozen=True)
class HdtrwEigenpairs:
    """All eigenpairs recovered blockwise, plus the defective blocks."""

    pairs: tuple
    defective_blocks: tuple

    @property
    def complete(self) -> bool:
        return not self.defective_blocks


def hdtrw_eigenpairs(model: HierarchicalModel, convention: str = "destination",
                     defect_tol: float = DEFECT_TOL) -> HdtrwEigenpairs:
    """Eigenpairs of the hierarchical walk from its (d+1)-dimensional blocks.

    For each tuple of local eigenlabels the walk restricts to the block
    P_H Lambda (Lambda diagonal with the locals' P-eigenvalues), solved by a
    general eigensolver. Blocks whose eigenvector matrix is numerically
    singular are reported as defective; only an independent subset of their
    eigenvectors is returned, so the pair set is incomplete in that case.
    """
    P_H = model.global_walk.graph.transition
    d1 = model.branching
    pairs = []
    defective = []
    for labels in itertools.product(*(range(loc.dimension) for loc in model.locals)):
        lam = np.array([model.locals[j].spectrum.values[labels[j]] for j in range(d1)])
        block = P_H * lam[None, :] if convention == "destination" else lam[:, None] * P_H
        w, W = np.linalg.eig(block)
        sv = np.linalg.svd(W, compute_uv=False)
        keep = range(d1)
        if sv[-1] <= defect_tol * max(1.0, sv[0]):
            defective.append(labels)
            # keep a maximal independent subset of the returned eigenvectors
            _, R, piv = qr(W, pivoting=True)
            rank = int(np.sum(np.abs(np.diag(R)) > defect_tol * max(1.0, abs(R[0, 0]))))
            keep = sorted(piv[:rank])
        local_factor = np.ones(1)
        for j in range(d1):
            local_factor = np.kron(local_factor, model.locals[j].spectrum.right_vectors[:, labels[j]])
        for m in keep:
            pairs.append(HdtrwEigenpair(
                value=complex(w[m]),
                vector=np.kron(W[:, m], local_factor),
                labels=labels,
                block_index=int(m),
            ))
    return HdtrwEigenpairs(pairs=tuple(pairs), defective_blocks=tuple(defective))


def _semigroups(model: HierarchicalModel, times) -> list[np.ndarray]:
    times = np.asarray(times, dtype=float)
    if times.shape != (model.branching,):
        raise DimensionMismatch(f"need {model.branching} times, got {times.shape}")
    if np.any(times < 0):
        raise NegativeTime(f"times must be nonnegative, got {times}")
    return [expm(-times[j] * (np.eye(loc.dimension) - loc.graph.transition))
            for j, loc in enumerate(model.locals)]


def build_hctrw(model: HierarchicalModel, times, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense deformed transition matrix with per-graph heat semigroups."""
    if model.dimension > cap:
        raise DimensionCapExceeded(f"dimension {model.dimension} exceeds cap {cap}; "
                                   "use apply_hctrw for matrix-free application")
    P_H = model.global_walk.graph.transition
    dims = model.local_dims
    out = np.zeros((model.dimension, model.dimension))
    for j, semigroup in enumerate(_semigroups(model, times)):
        out += np.kron(_selector(P_H, j, "destination"), lift_local(semigroup, dims, j))
    return out


def apply_hctrw(model: HierarchicalModel, times, x: np.ndarray) -> np.ndarray:
    """Matrix-free action of the deformed walk on a state vector."""
    x = np.asarray(x)
    if x.shape != (model.dimension,):
        raise DimensionMismatch(f"vector has shape {x.shape}, expected ({model.dimension},)")
    return _apply_selected(model.global_walk.graph.transition, _semigroups(model, times),
                           x, model.local_dims, "destination")


def hctrw_lambda(p_values, times) -> np.ndarray:
    """Diagonal of exp(-t_j (1 - lambda_j)) for one tuple of P-eigenvalues."""
    p_values = np.asarray(p_values, dtype=float)
    times = np.asarray(times, dtype=float)
    return np.exp(-times * (1.0 - p_values))


def hctrw_core(model: HierarchicalModel, lam_diag) -> np.ndarray:
    """Symmetric core Lambda^{1/2} (I - L_H) Lambda^{1/2} of one tuple block."""
    lam_diag = np.asarray(lam_diag, dtype=float)
    if np.any(lam_diag <= 0):
        raise NonpositiveDiagonal(f"diagonal must be strictly positive, got {lam_diag}")
    root = np.sqrt(lam_diag)
    inner = np.eye(model.branching) - model.global_walk.laplacian
    core = root[:, None] * inner * root[None, :]
    return (core + core.T) / 2.0


@dataclass(frozen=True)
class DeformedBlock:
    """Per-tuple eigendata of the deformed walk: values and left/right pairs."""

    labels: tuple
    values: np.ndarray
    right: np.ndarray
    left: np.ndarray


@dataclass(frozen=True)
class DeformedSpectrum:
    times: np.ndarray
    blocks: tuple


def hctrw_spectral(model: HierarchicalModel, times) -> DeformedSpectrum:
    """Blockwise spectral decomposition of the deformed transition matrix.

    Each tuple block P_H Lambda_t is similar to the symmetric core through
    D_H^{1/2} Lambda_t^{1/2}; diagonalizing the core gives eigenvalues and
    biorthogonal left/right vectors of the block.
    """
    times = np.asarray(times, dtype=float)
    if times.shape != (model.branching,):
        raise DimensionMismatch(f"need {model.branching} times, got {times.shape}")
    if np.any(times < 0):
        raise NegativeTime(f"times must be nonnegative, got {times}")
    pi_H = model.global_walk.graph.measure
    dH = np.sqrt(pi_H)
    blocks = []
    for labels in itertools.product(*(range(loc.dimension) for loc in model.locals)):
        lam = np.array([model.locals[j].spectrum.values[labels[j]] for j in range(model.branching)])
        diag = hctrw_lambda(lam, times)
        core = hctrw_core(model, diag)
        system = eigh(core)
        root = np.sqrt(diag)
        right = system.vectors / (root * dH)[:, None]
        left = (system.vectors * (root * dH)[:, None]).T
        blocks.append(DeformedBlock(labels=labels, values=system.values, right=right, left=left))
    return DeformedSpectrum(times=times, blocks=tuple(blocks))


def reconstruct_hctrw(model: HierarchicalModel, spectrum: DeformedSpectrum) -> np.ndarray:
    """Assemble the dense deformed matrix from its blockwise decomposition."""
    out = np.zeros((model.dimension, model.dimension))
    for block in spectrum.blocks:
        local_factor = np.eye(1)
        for j, loc in enumerate(model.locals):
            r = loc.spectrum.right_vectors[:, block.labels[j]]
            l = loc.spectrum.left_vectors[block.labels[j], :]
            local_factor = np.kron(local_factor, np.outer(r, l))
        global_part = (block.right * block.values) @ block.left
        out += np.kron(global_part, local_factor)
    return out
