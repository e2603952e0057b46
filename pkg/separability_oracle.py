"""
Maximum overlap of the HE state with pure states that are biseparable across
a cut separating A_j from B_j.

For a fixed cut the maximum of |<target|phi_1 (x) phi_2>|^2 is the largest
squared singular value of the target's matricization. Each cut is evaluated
exactly (SVD) and, as a cross-check, by alternating maximization.

Only pure states are scanned. Mixtures of biseparable states cannot exceed
the pure-state maximum because the overlap <target|rho|target> is linear in
rho.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

import config
from errors import CapacityError, ConsistencyError, DimensionError, DomainError
from pauli_algebra import QubitIndexMap
from state_engine import StateVector, build_he_state, build_saturating_state

log = logging.getLogger("separability_oracle")

BOUND = 0.5
BOUND_TOL = 1e-9
TIE_TOL = 1e-12


# ─────────────────────────────── MODELS ────────────────────────────── #

class BipartitionFamily(BaseModel):
    """Cut {A_j} + inside | {B_j} + outside over the DOFs of an HE system"""

    model_config = ConfigDict(frozen=True)

    n_dofs: int = Field(gt=0)
    j: int = Field(gt=0)
    inside: Tuple[str, ...] = ()
    outside: Tuple[str, ...] = ()

    @property
    def index_map(self) -> QubitIndexMap:
        return QubitIndexMap(n_dofs=self.n_dofs)

    @property
    def left(self) -> List[int]:
        qmap = self.index_map
        return sorted([qmap.position(f"A{self.j}")] + [qmap.position(x) for x in self.inside])

    @property
    def right(self) -> List[int]:
        qmap = self.index_map
        return sorted([qmap.position(f"B{self.j}")] + [qmap.position(x) for x in self.outside])

    @property
    def split_pairs(self) -> int:
        """Bell pairs with A and B on opposite sides"""
        left = set(self.left)
        return sum(1 for k in range(self.n_dofs) if (2 * k in left) != (2 * k + 1 in left))

    def label(self) -> str:
        return f"j={self.j};I={','.join(self.inside)};J={','.join(self.outside)}"


class OracleRow(BaseModel):
    partition: str
    split_pairs: int
    max_overlap_sq: float
    iterations: int = 0


class OracleResult(BaseModel):
    """Family (or single-cut) maximum of the product-state overlap"""

    max_overlap_sq: float = Field(ge=0, le=1 + BOUND_TOL)
    argmax_partition: BipartitionFamily
    method: str
    iterations: int = 0
    rows: List[OracleRow] = []
    saturating_overlap_sq: Optional[float] = None


# ───────────────────────────── PARTITIONS ──────────────────────────── #

def enumerate_partitions(n: int) -> List[BipartitionFamily]:
    """n choices of j times every split of the remaining 2n-2 DOF labels."""
    if n < 1:
        raise DomainError(f"need at least one DOF, got {n}")
    ordering = QubitIndexMap(n_dofs=n).ordering
    families = []
    for j in range(1, n + 1):
        rest = [x for x in ordering if x not in (f"A{j}", f"B{j}")]
        for mask in range(1 << len(rest)):
            inside = tuple(x for k, x in enumerate(rest) if (mask >> k) & 1)
            outside = tuple(x for k, x in enumerate(rest) if not (mask >> k) & 1)
            families.append(BipartitionFamily(n_dofs=n, j=j, inside=inside, outside=outside))
    return families


def _matricize(target: StateVector, left: Sequence[int], right: Sequence[int]) -> np.ndarray:
    n = target.n_qubits
    if sorted(list(left) + list(right)) != list(range(n)):
        raise DimensionError(f"cut {list(left)}|{list(right)} does not cover {n} qubits")
    psi = target.amplitudes.reshape([2] * n).transpose(list(left) + list(right))
    return psi.reshape(1 << len(left), 1 << len(right))


def _check_target(target: StateVector, partition: BipartitionFamily) -> None:
    if target.n_qubits > config.DENSE_VECTOR_CAP:
        raise CapacityError(f"{target.n_qubits} qubits exceed the dense vector cap of {config.DENSE_VECTOR_CAP}")
    if target.n_qubits != 2 * partition.n_dofs:
        raise DimensionError(f"partition of {partition.n_dofs} DOFs, target on {target.n_qubits} qubits")


def cut_overlap_svd(target: StateVector, left: Sequence[int], right: Sequence[int]) -> float:
    """Largest squared Schmidt coefficient across left|right."""
    singular = np.linalg.svd(_matricize(target, left, right), compute_uv=False)
    return float(singular[0] ** 2)


def max_overlap_svd(target: StateVector, partition: BipartitionFamily) -> float:
    _check_target(target, partition)
    return cut_overlap_svd(target, partition.left, partition.right)


def _family_max(rows: List[OracleRow]) -> OracleRow:
    top = max(r.max_overlap_sq for r in rows)
    return min((r for r in rows if r.max_overlap_sq >= top - TIE_TOL), key=lambda r: r.partition)


def verify_appendix_bound(n: int) -> OracleResult:
    """SVD maximum over every biseparable cut of the n-DOF HE state."""
    if 2 * n > config.DENSE_VECTOR_CAP:
        raise CapacityError(f"{2 * n} qubits exceed the dense vector cap of {config.DENSE_VECTOR_CAP}")
    target = build_he_state(n)
    families = enumerate_partitions(n)
    log.info(f"Evaluating {len(families)} cuts of the {n}-DOF HE state")

    def evaluate(partition: BipartitionFamily) -> OracleRow:
        return OracleRow(
            partition=partition.label(),
            split_pairs=partition.split_pairs,
            max_overlap_sq=max_overlap_svd(target, partition),
        )

    with ThreadPoolExecutor(max_workers=max(1, config.ORACLE_WORKERS)) as pool:
        rows = list(pool.map(evaluate, families))

    best = _family_max(rows)
    if best.max_overlap_sq > BOUND + BOUND_TOL:
        raise ConsistencyError(f"cut {best.partition} reaches {best.max_overlap_sq} > {BOUND}")
    argmax = families[[r.partition for r in rows].index(best.partition)]

    saturating = build_saturating_state(n, argmax.j)
    sat_overlap = target.overlap_sq(saturating)
    if abs(sat_overlap - best.max_overlap_sq) > BOUND_TOL:
        raise ConsistencyError(f"saturating state reaches {sat_overlap}, family maximum is {best.max_overlap_sq}")
    log.info(f"Family maximum {best.max_overlap_sq:.12f} at {best.partition}")
    return OracleResult(
        max_overlap_sq=best.max_overlap_sq,
        argmax_partition=argmax,
        method="svd",
        rows=rows,
        saturating_overlap_sq=sat_overlap,
    )


# ────────────────────────────── SEARCH ─────────────────────────────── #

def _random_unit(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def _assemble(phi1: np.ndarray, phi2: np.ndarray, left: Sequence[int], right: Sequence[int]) -> StateVector:
    """phi1 (x) phi2 laid out in the original qubit order"""
    perm = list(left) + list(right)
    n = len(perm)
    psi = np.kron(phi1, phi2).reshape([2] * n).transpose(np.argsort(perm))
    return StateVector.normalized(n, psi.reshape(-1))


def search_product_state(target: StateVector, partition: BipartitionFamily, restarts: int,
                         seed: int) -> Tuple[float, StateVector, int]:
    """
    Alternating maximization of |phi_1^T conj(M) phi_2|^2 over unit phi_1,
    phi_2. Returns (best overlap, best product state, total iterations).
    """
    if restarts <= 0:
        raise DomainError(f"restarts must be positive, got {restarts}")
    _check_target(target, partition)
    left, right = partition.left, partition.right
    m = _matricize(target, left, right).conj()
    rng = np.random.default_rng(seed)
    best_value, best_pair, total = -1.0, None, 0

    for _ in range(restarts):
        phi2 = _random_unit(rng, m.shape[1])
        value = 0.0
        phi1 = None
        for _ in range(config.SEARCH_MAX_ITER):
            total += 1
            w1 = m @ phi2
            norm1 = np.linalg.norm(w1)
            if norm1 == 0:
                phi2 = _random_unit(rng, m.shape[1])
                continue
            phi1 = w1.conj() / norm1
            w2 = m.T @ phi1
            norm2 = np.linalg.norm(w2)
            phi2 = w2.conj() / norm2
            step = norm2 ** 2 - value
            value = float(norm2 ** 2)
            if step < config.SEARCH_TOL:
                break
        if phi1 is not None and value > best_value:
            best_value, best_pair = value, (phi1, phi2)

    return best_value, _assemble(best_pair[0], best_pair[1], left, right), total


def search_overlap(target: StateVector, partition: BipartitionFamily, restarts: Optional[int] = None,
                   seed: int = config.DEFAULT_SEED) -> OracleResult:
    restarts = config.SEARCH_RESTARTS if restarts is None else restarts
    value, _, iterations = search_product_state(target, partition, restarts, seed)
    row = OracleRow(partition=partition.label(), split_pairs=partition.split_pairs,
                    max_overlap_sq=value, iterations=iterations)
    return OracleResult(max_overlap_sq=min(value, 1.0), argmax_partition=partition, method="search",
                        iterations=iterations, rows=[row])


def search_family(n: int, restarts: Optional[int] = None, seed: int = config.DEFAULT_SEED) -> OracleResult:
    """Alternating search on every cut; cut i uses seed + i."""
    target = build_he_state(n)
    families = enumerate_partitions(n)
    rows = []
    for i, partition in enumerate(families):
        rows.extend(search_overlap(target, partition, restarts, seed + i).rows)
    best = _family_max(rows)
    argmax = families[[r.partition for r in rows].index(best.partition)]
    return OracleResult(
        max_overlap_sq=min(best.max_overlap_sq, 1.0),
        argmax_partition=argmax,
        method="search",
        iterations=sum(r.iterations for r in rows),
        rows=rows,
    )


# ─────────────────────────────── QUDIT ─────────────────────────────── #

def qudit_overlap_bound(n: int) -> float:
    """Max product-state overlap across the particle cut (all A | all B)."""
    if 2 * n > config.DENSE_VECTOR_CAP:
        raise CapacityError(f"{2 * n} qubits exceed the dense vector cap of {config.DENSE_VECTOR_CAP}")
    target = build_he_state(n)
    return cut_overlap_svd(target, list(range(0, 2 * n, 2)), list(range(1, 2 * n, 2)))
