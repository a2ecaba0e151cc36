"""Hierarchical continuous-time quantum walks and their joint position laws.

The Hamiltonian on (global register) x (local registers) is assembled
blockwise: for each tuple of local eigenlabels, the global Hamiltonian is
sandwiched between the square roots of the locals' eigenvalues,

    H_block(T) = Lambda_T^{1/2} H_global Lambda_T^{1/2},
    H_total    = sum_T H_block(T) (x) projector onto the tuple's local
                 eigenvector product,

so exp(i t H_total) acts independently on every tuple block. The joint
distribution of the local positions is evaluated in the identity-anchored
form: each block propagator is expanded as I + sum_m (e^{i t w_m} - 1)
|u_m><u_m| before squaring, i.e.

    P[k] = |A_I[k]|^2 + sum_m ( |A_m(t)[k]|^2 - |A_m(0)[k]|^2 ),

where A_I is the initial product amplitude and A_m accumulates branch m
over all tuples. Written this way, blocks with degenerate zero eigenvalues
contribute nothing basis-dependent (their phased and unphased amplitudes
cancel exactly), which makes the result well defined and reproduces the
closed-form complete-graph evaluation. Blocks that vanish identically are
anchored to the global Hamiltonian's own eigenbasis, the zero-coupling
limit of the sandwich.

Note the evaluated law is a quadratic form in the evolved state, not a
projective measurement in a fixed basis; it sums to one exactly but single
entries may dip below zero for some initial states. ``JointDistribution``
records the minimum entry instead of forbidding this.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConstantOverlapViolated,
    DimensionCapExceeded,
    DimensionMismatch,
    InvalidP,
    InvalidProbabilityVector,
    NegativeLocalEigenvalue,
    NegativeWeight,
)
from .graphs import GraphModel
from .hierarchy import DENSE_CAP, walk_spectral_data
from .spectral import GROUPING_TOL, EigenSystem, eigh

NORM_TOL = 1e-12
MASS_TOL = 1e-9
LOCAL_EIGENVALUE_TOL = 1e-12


@dataclass(frozen=True)
class QuantumState:
    """Unit-norm complex amplitude vector over a declared register space."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        norm = float(np.linalg.norm(amp))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm} deviates from 1 by more than {NORM_TOL}")
        object.__setattr__(self, "amplitudes", amp)

    @property
    def dimension(self) -> int:
        return self.amplitudes.shape[0]


def vertex_state(n: int, k: int) -> QuantumState:
    amp = np.zeros(n, dtype=complex)
    amp[k] = 1.0
    return QuantumState(amp)


def uniform_state(n: int) -> QuantumState:
    return QuantumState(np.full(n, 1.0 / np.sqrt(n), dtype=complex))


def random_state(n: int, rng: np.random.Generator) -> QuantumState:
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return QuantumState(v / np.linalg.norm(v))


@dataclass(frozen=True)
class JointDistribution:
    """Joint law of the local positions, tagged by the producing formula.

    ``probabilities[k_0, ..., k_d]`` sums to 1 within 1e-9; ``min_entry``
    records the smallest entry (the evaluated form is not guaranteed
    pointwise nonnegative for every initial state).
    """

    probabilities: np.ndarray
    time: float
    formula: str

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        mass = float(p.sum())
        if abs(mass - 1.0) > MASS_TOL:
            raise ValueError(f"total mass {mass} deviates from 1 by more than {MASS_TOL}")
        object.__setattr__(self, "probabilities", p)

    @property
    def total_mass(self) -> float:
        return float(self.probabilities.sum())

    @property
    def min_entry(self) -> float:
        return float(self.probabilities.min())


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HamiltonianAssembly:
    """Per-tuple spectral data of the hierarchical Hamiltonian.

    ``block_values[i]`` / ``block_vectors[i]`` hold the eigendata of the
    sandwiched global block for the i-th tuple in lexicographic order
    (last register fastest); ``local_dims`` fixes that order.
    """

    global_ham: np.ndarray
    local_systems: tuple
    block_values: np.ndarray
    block_vectors: np.ndarray
    anchor_system: EigenSystem
    grouping_tol: float

    @property
    def branching(self) -> int:
        return self.global_ham.shape[0]

    @property
    def local_dims(self) -> tuple:
        return tuple(s.dimension for s in self.local_systems)

    @property
    def dimension(self) -> int:
        return self.branching * int(np.prod(self.local_dims))

    def tuples(self):
        return itertools.product(*(range(n) for n in self.local_dims))

    def dense_hamiltonian(self, cap: int = DENSE_CAP) -> np.ndarray:
        """Materialize the full Hamiltonian; refuses above the dimension cap."""
        if self.dimension > cap:
            raise DimensionCapExceeded(f"dimension {self.dimension} exceeds cap {cap}")
        out = np.zeros((self.dimension, self.dimension), dtype=complex)
        for i, labels in enumerate(self.tuples()):
            block = (self.block_vectors[i] * self.block_values[i]) @ self.block_vectors[i].conj().T
            proj = np.eye(1, dtype=complex)
            for j, s in enumerate(self.local_systems):
                v = s.vectors[:, labels[j]]
                proj = np.kron(proj, np.outer(v, v.conj()))
            out += np.kron(block, proj)
        return out


def assemble_hamiltonian(global_ham: np.ndarray, local_systems,
                         tol: float = GROUPING_TOL) -> HamiltonianAssembly:
    """Eigendecompose every tuple block of the hierarchical Hamiltonian.

    ``local_systems`` are the (nonnegative) eigensystems of the local
    Hamiltonians; eigenvalues below -1e-12 are rejected, tiny negatives are
    clamped. Tuples whose eigenvalue diagonal vanishes entirely produce the
    zero block; those are anchored to the global Hamiltonian's eigenbasis.
    """
    global_ham = np.asarray(global_ham)
    anchor = eigh(global_ham, tol)  # also validates hermiticity
    local_systems = tuple(local_systems)
    d1 = global_ham.shape[0]
    if len(local_systems) != d1:
        raise DimensionMismatch(f"{len(local_systems)} local systems for a "
                                f"{d1}-dimensional global Hamiltonian")
    clamped = []
    for j, s in enumerate(local_systems):
        if np.any(s.values < -LOCAL_EIGENVALUE_TOL):
            raise NegativeLocalEigenvalue(
                f"local system {j} has eigenvalue {s.values.min():.3e}; shift it first")
        clamped.append(np.maximum(s.values, 0.0))
    dims = [s.dimension for s in local_systems]
    count = int(np.prod(dims))
    block_values = np.empty((count, d1))
    block_vectors = np.empty((count, d1, d1), dtype=complex)
    for i, labels in enumerate(itertools.product(*(range(n) for n in dims))):
        lam = np.array([clamped[j][labels[j]] for j in range(d1)])
        if np.max(lam) <= tol:
            block_values[i] = 0.0
            block_vectors[i] = anchor.vectors
        else:
            root = np.sqrt(lam)
            block = root[:, None] * global_ham * root[None, :]
            system = eigh((block + block.conj().T) / 2.0, tol)
            block_values[i] = system.values
            block_vectors[i] = system.vectors
    return HamiltonianAssembly(
        global_ham=global_ham,
        local_systems=local_systems,
        block_values=block_values,
        block_vectors=block_vectors,
        anchor_system=anchor,
        grouping_tol=tol,
    )


# ---------------------------------------------------------------------------
# Evolution
# ---------------------------------------------------------------------------

def _apply_along_axis(matrix: np.ndarray, tensor: np.ndarray, axis: int) -> np.ndarray:
    """Contract ``matrix`` with ``tensor`` along ``axis`` (matrix acts on that index)."""
    moved = np.tensordot(matrix, tensor, axes=([1], [axis]))
    return np.moveaxis(moved, 0, axis)


def evolve(assembly: HamiltonianAssembly, t: float, psi: QuantumState) -> QuantumState:
    """Apply exp(i t H) blockwise; works without materializing the operator."""
    if psi.dimension != assembly.dimension:
        raise DimensionMismatch(f"state has dimension {psi.dimension}, "
                                f"assembly expects {assembly.dimension}")
    d1 = assembly.branching
    dims = assembly.local_dims
    field = psi.amplitudes.reshape((d1, *dims))
    # Rotate each local register into its eigenbasis.
    for j, s in enumerate(assembly.local_systems):
        field = _apply_along_axis(s.vectors.conj().T, field, j + 1)
    flat = field.reshape(d1, -1)
    phases = np.exp(1j * t * assembly.block_values)
    rotated = np.einsum("lam,lm,lbm,bl->al",
                        assembly.block_vectors, phases,
                        assembly.block_vectors.conj(), flat)
    field = rotated.reshape((d1, *dims))
    for j, s in enumerate(assembly.local_systems):
        field = _apply_along_axis(s.vectors, field, j + 1)
    # unitarity keeps the norm; QuantumState's validation would flag drift
    return QuantumState(field.reshape(-1))


# ---------------------------------------------------------------------------
# Joint distributions
# ---------------------------------------------------------------------------

def _local_overlap_matrices(local_systems, psi_locals) -> list[np.ndarray]:
    """W_j[k, l] = V_j[k, l] <v_l | psi_j> for each local register."""
    mats = []
    for s, psi in zip(local_systems, psi_locals):
        if psi.dimension != s.dimension:
            raise DimensionMismatch("local state dimension does not match its eigensystem")
        overlaps = s.vectors.conj().T @ psi.amplitudes
        mats.append(s.vectors * overlaps[None, :])
    return mats


def _contract_lattice(coeff: np.ndarray, mats) -> np.ndarray:
    """Contract a tuple-lattice coefficient tensor with one matrix per axis."""
    out = coeff
    for j, W in enumerate(mats):
        out = _apply_along_axis(W, out, j)
    return out


def _product_amplitudes(psi_locals) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for psi in psi_locals:
        out = np.multiply.outer(out, psi.amplitudes)
    return out.reshape(tuple(p.dimension for p in psi_locals))


def joint_distribution(assembly: HamiltonianAssembly, t: float,
                       psi_global: QuantumState, psi_locals) -> JointDistribution:
    """Joint law of the local positions under the assembled evolution.

    Identity-anchored evaluation: branch m of every tuple block contributes
    its phased minus unphased amplitude square on top of the initial product
    law. Exactly normalized for unit product states.
    """
    psi_locals = list(psi_locals)
    if psi_global.dimension != assembly.branching:
        raise DimensionMismatch("global state dimension does not match the assembly")
    d1 = assembly.branching
    dims = assembly.local_dims
    W = _local_overlap_matrices(assembly.local_systems, psi_locals)
    # a[i, m] = <u_m^{(i)} | psi_global> per tuple i and branch m
    overlaps = np.einsum("iam,a->im", assembly.block_vectors.conj(), psi_global.amplitudes)
    phases = np.exp(1j * t * assembly.block_values)
    prob = np.abs(_product_amplitudes(psi_locals)) ** 2
    for m in range(d1):
        phased = (overlaps[:, m] * phases[:, m]).reshape(dims)
        plain = overlaps[:, m].reshape(dims)
        prob += np.abs(_contract_lattice(phased, W)) ** 2
        prob -= np.abs(_contract_lattice(plain, W)) ** 2
    return JointDistribution(probabilities=prob, time=float(t), formula="general")


# ---------------------------------------------------------------------------
# Complete-graph-with-loops specialization
# ---------------------------------------------------------------------------

def _validate_q(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.ndim != 1 or np.any(q <= 0.0) or np.any(q >= 1.0):
        raise InvalidProbabilityVector("all jump probabilities must lie strictly in (0, 1)")
    if abs(q.sum() - 1.0) > NORM_TOL:
        raise InvalidProbabilityVector(f"jump probabilities sum to {q.sum()}, expected 1")
    return q


def kbar_hamiltonian(q) -> np.ndarray:
    """Rank-1 global Hamiltonian sqrt(q) sqrt(q)^T of the loopy complete graph."""
    q = _validate_q(q)
    root = np.sqrt(q)
    return np.outer(root, root)


def kbar_tuple_vector(one_minus_lambdas, q, tol: float = GROUPING_TOL):
    """Distinguished unit vector of one tuple block on the loopy complete graph.

    Weighted branch sqrt((1-lambda_j) q_j), normalized, when some 1-lambda
    is nonzero; the uniform sqrt(q) branch otherwise. Returns the vector and
    the branch tag ("weighted" | "uniform").
    """
    oml = np.asarray(one_minus_lambdas, dtype=float)
    q = np.asarray(q, dtype=float)
    weights = oml * q
    if np.any(weights < -tol):
        raise NegativeWeight(f"weight {weights.min():.3e} below -{tol:.1e}")
    if np.max(np.abs(oml)) > tol:
        weights = np.maximum(weights, 0.0)
        return np.sqrt(weights / weights.sum()), "weighted"
    return np.sqrt(q), "uniform"


@dataclass(frozen=True)
class KbarSpec:
    """Closed-form spectral data of a loopy-complete-graph global walk.

    One distinguished unit vector and phase rate per tuple of local
    eigenlabels, plus the squared overlap with an optional global state when
    it is tuple-independent (``p`` stays None otherwise).
    """

    q: np.ndarray
    labels: tuple
    vectors: np.ndarray
    branches: tuple
    rates: np.ndarray
    p: float | None
    overlap_spread: float | None


def kbar_spec(q, local_systems, psi_global: QuantumState | None = None,
              tol: float = GROUPING_TOL) -> KbarSpec:
    """Tabulate the per-tuple vectors, branch tags and phase rates."""
    q = _validate_q(q)
    local_systems = tuple(local_systems)
    dims = tuple(s.dimension for s in local_systems)
    labels_list = list(itertools.product(*(range(n) for n in dims)))
    vectors = np.empty((len(labels_list), len(q)))
    branches = []
    rates = np.empty(len(labels_list))
    for i, labels in enumerate(labels_list):
        oml = np.array([local_systems[j].values[labels[j]] for j in range(len(dims))])
        vectors[i], branch = kbar_tuple_vector(oml, q, tol)
        branches.append(branch)
        rates[i] = float(np.dot(oml, q))
    p = spread = None
    if psi_global is not None:
        sq = np.abs(vectors @ psi_global.amplitudes) ** 2
        spread = float(sq.max() - sq.min())
        p = float(sq.mean()) if spread <= tol else None
    return KbarSpec(q=q, labels=tuple(labels_list), vectors=vectors,
                    branches=tuple(branches), rates=rates, p=p,
                    overlap_spread=spread)


def _kbar_coefficients(q, local_systems, psi_global, tol):
    """Per-tuple overlap a_T and phase rate s_T = sum_j (1-lambda) q_j."""
    dims = tuple(s.dimension for s in local_systems)
    count = int(np.prod(dims))
    a = np.empty(count, dtype=complex)
    s_rate = np.empty(count)
    for i, labels in enumerate(itertools.product(*(range(n) for n in dims))):
        oml = np.array([local_systems[j].values[labels[j]] for j in range(len(dims))])
        v, _ = kbar_tuple_vector(oml, q, tol)
        a[i] = np.vdot(v, psi_global.amplitudes)
        s_rate[i] = float(np.dot(oml, q))
    return a.reshape(dims), s_rate.reshape(dims)


def kbar_joint_distribution(q, local_systems, t: float, psi_global: QuantumState,
                            psi_locals, tol: float = GROUPING_TOL) -> JointDistribution:
    """Closed-form three-term law for the loopy-complete-graph global walk.

    phased term + initial product law - unphased term, with per-tuple phase
    exp(i t sum_j (1-lambda_j) q_j). Requires local Hamiltonians equal to
    the normalized Laplacians (their eigensystems are passed directly).
    """
    q = _validate_q(q)
    psi_locals = list(psi_locals)
    local_systems = tuple(local_systems)
    W = _local_overlap_matrices(local_systems, psi_locals)
    a, s_rate = _kbar_coefficients(q, local_systems, psi_global, tol)
    phased = _contract_lattice(a * np.exp(1j * t * s_rate), W)
    plain = _contract_lattice(a, W)
    middle = np.ones(1)
    for psi in psi_locals:
        middle = np.multiply.outer(middle, np.abs(psi.amplitudes) ** 2)
    middle = middle.reshape(tuple(p.dimension for p in psi_locals))
    prob = np.abs(phased) ** 2 + middle - np.abs(plain) ** 2
    return JointDistribution(probabilities=prob, time=float(t), formula="three-term")


def operator_split_joint_distribution(q, local_systems, t: float, psi_global: QuantumState,
                              psi_locals, tol: float = GROUPING_TOL) -> JointDistribution:
    """Same law evaluated through the operator split of the evolution.

    The propagator is the identity plus one phased rank-1 branch per tuple;
    the identity amplitude is accumulated over the tuple lattice instead of
    taken as the product law, so agreement with the three-term form checks
    the completeness identity as well.
    """
    q = _validate_q(q)
    psi_locals = list(psi_locals)
    local_systems = tuple(local_systems)
    dims = tuple(s.dimension for s in local_systems)
    W = _local_overlap_matrices(local_systems, psi_locals)
    a, s_rate = _kbar_coefficients(q, local_systems, psi_global, tol)
    identity_amp = _contract_lattice(np.ones(dims, dtype=complex), W)
    phased = _contract_lattice(a * np.exp(1j * t * s_rate), W)
    plain = _contract_lattice(a, W)
    prob = np.abs(identity_amp) ** 2 + np.abs(phased) ** 2 - np.abs(plain) ** 2
    return JointDistribution(probabilities=prob, time=float(t), formula="operator-split")


def constant_overlap(q, local_systems, psi_global: QuantumState,
                     tol: float = GROUPING_TOL) -> tuple[float, float]:
    """Return (p, spread) of the squared tuple-vector overlaps with psi_global."""
    q = _validate_q(q)
    a, _ = _kbar_coefficients(q, tuple(local_systems), psi_global, tol)
    sq = np.abs(a.reshape(-1)) ** 2
    return float(sq.mean()), float(sq.max() - sq.min())


def factorized_distribution(q, local_systems, t: float, p: float, psi_locals,
                            psi_global: QuantumState | None = None,
                            tol: float = GROUPING_TOL) -> JointDistribution:
    """p-mixture of the time-rescaled product law and the initial product law.

    Walker j runs for time q_j * t under its own Laplacian. When
    ``psi_global`` is supplied, the squared tuple overlaps must be constant
    within ``tol`` of spread and match ``p``; otherwise the asserted ``p``
    is refused.
    """
    if not 0.0 <= p <= 1.0:
        raise InvalidP(f"mixture weight must lie in [0, 1], got {p}")
    q = _validate_q(q)
    psi_locals = list(psi_locals)
    local_systems = tuple(local_systems)
    if psi_global is not None:
        mean, spread = constant_overlap(q, local_systems, psi_global, tol)
        if spread > tol:
            raise ConstantOverlapViolated(
                f"squared overlaps spread {spread:.3e} exceeds {tol:.1e}")
        if abs(mean - p) > max(tol, 1e-9):
            raise ConstantOverlapViolated(
                f"asserted p={p} but overlaps give {mean:.12f}")
    moved = np.ones(1)
    frozen = np.ones(1)
    for j, (s, psi) in enumerate(zip(local_systems, psi_locals)):
        moved = np.multiply.outer(moved, ctqw_distribution_from_system(s, psi, q[j] * t))
        frozen = np.multiply.outer(frozen, np.abs(psi.amplitudes) ** 2)
    dims = tuple(s.dimension for s in local_systems)
    prob = p * moved.reshape(dims) + (1.0 - p) * frozen.reshape(dims)
    return JointDistribution(probabilities=prob, time=float(t), formula="factorized")


# ---------------------------------------------------------------------------
# Single-graph walk
# ---------------------------------------------------------------------------

def ctqw_distribution_from_system(system: EigenSystem, psi: QuantumState, t: float) -> np.ndarray:
    """Position law |sum_l e^{i t w_l} <k|v_l><v_l|psi>|^2 of one walker."""
    if psi.dimension != system.dimension:
        raise DimensionMismatch("state dimension does not match the eigensystem")
    overlaps = system.vectors.conj().T @ psi.amplitudes
    amp = system.vectors @ (np.exp(1j * t * system.values) * overlaps)
    return np.abs(amp) ** 2


def single_ctqw_distribution(g: GraphModel, psi: QuantumState, t: float) -> np.ndarray:
    """Continuous-time quantum walk law on one reversible graph.

    The Hamiltonian is the graph's normalized Laplacian; phases carry the
    plus sign, exp(+i t mu).
    """
    data = walk_spectral_data(g)
    return ctqw_distribution_from_system(data.system, psi, t)
