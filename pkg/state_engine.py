"""
Dense construction of HE states, graph states, the two-DOF example states,
mixtures, white noise and partial traces.

Amplitude index b addresses qubit 0 as its most significant bit, so an HE
state over [A1, B1, A2, B2, ...] is a plain kron product of Bell pairs.
"""

import logging
import string
from typing import Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

import config
from errors import CapacityError, DimensionError, DomainError, ResolutionError
from pauli_algebra import QubitIndexMap, StabilizerSet, apply_to_amplitudes

log = logging.getLogger("state_engine")

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-9

SQRT_HALF = 1 / np.sqrt(2)
PHI_PLUS = np.array([SQRT_HALF, 0, 0, SQRT_HALF], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) * SQRT_HALF
S_DAG = np.array([[1, 0], [0, -1j]], dtype=complex)
# rotate X / Y eigenbases onto the computational basis
BASIS_ROTATIONS = {"Z": None, "X": HADAMARD, "Y": HADAMARD @ S_DAG}


# ───────────────────────────── STATE TYPES ─────────────────────────── #

class StateVector:
    """Normalized pure state over n_qubits qubits"""

    def __init__(self, n_qubits: int, amplitudes):
        if n_qubits < 1:
            raise DomainError("a state needs at least one qubit")
        if n_qubits > config.DENSE_VECTOR_CAP:
            raise CapacityError(f"{n_qubits} qubits exceed the dense vector cap of {config.DENSE_VECTOR_CAP}")
        amps = np.array(amplitudes, dtype=complex)
        if amps.shape != (1 << n_qubits,):
            raise DimensionError(f"expected {1 << n_qubits} amplitudes, got shape {amps.shape}")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1) > NORM_TOL:
            raise DomainError(f"state is not normalized (|v|^2 = {norm!r})")
        amps.setflags(write=False)
        self._n_qubits = n_qubits
        self._amplitudes = amps

    @classmethod
    def normalized(cls, n_qubits: int, amplitudes) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex)
        return cls(n_qubits, amps / np.linalg.norm(amps))

    @property
    def n_qubits(self) -> int:
        return self._n_qubits

    @property
    def dim(self) -> int:
        return 1 << self._n_qubits

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amplitudes

    def inner(self, other: "StateVector") -> complex:
        """<self|other>"""
        if other.n_qubits != self.n_qubits:
            raise DimensionError(f"states on {self.n_qubits} and {other.n_qubits} qubits")
        return complex(np.vdot(self._amplitudes, other.amplitudes))

    def overlap_sq(self, other: "StateVector") -> float:
        return abs(self.inner(other)) ** 2

    def density(self) -> "DensityOperator":
        return DensityOperator(self._n_qubits, np.outer(self._amplitudes, self._amplitudes.conj()))

    def __repr__(self) -> str:
        return f"StateVector(n_qubits={self._n_qubits})"


class DensityOperator:
    """Hermitian, unit-trace, positive semidefinite 2^N x 2^N matrix"""

    def __init__(self, n_qubits: int, matrix):
        if n_qubits < 1:
            raise DomainError("a state needs at least one qubit")
        if n_qubits > config.DENSE_DENSITY_CAP:
            raise CapacityError(f"{n_qubits} qubits exceed the dense density cap of {config.DENSE_DENSITY_CAP}")
        mat = np.array(matrix, dtype=complex)
        dim = 1 << n_qubits
        if mat.shape != (dim, dim):
            raise DimensionError(f"expected a {dim}x{dim} matrix, got shape {mat.shape}")
        if np.max(np.abs(mat - mat.conj().T)) > HERMITIAN_TOL:
            raise DomainError("density operator is not Hermitian")
        trace = np.trace(mat).real
        if abs(trace - 1) > TRACE_TOL:
            raise DomainError(f"density operator has trace {trace!r}")
        if n_qubits <= config.PSD_CHECK_MAX_QUBITS:
            lowest = np.linalg.eigvalsh(mat)[0]
            if lowest < -PSD_TOL:
                raise DomainError(f"density operator has negative eigenvalue {lowest!r}")
        mat.setflags(write=False)
        self._n_qubits = n_qubits
        self._matrix = mat

    @property
    def n_qubits(self) -> int:
        return self._n_qubits

    @property
    def dim(self) -> int:
        return 1 << self._n_qubits

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self._matrix)

    def __repr__(self) -> str:
        return f"DensityOperator(n_qubits={self._n_qubits})"


State = Union[StateVector, DensityOperator]


def as_density(state: State) -> DensityOperator:
    return state.density() if isinstance(state, StateVector) else state


# ─────────────────────────────── GRAPHS ────────────────────────────── #

class GraphSpec(BaseModel):
    """Simple undirected graph on vertices 0..n_vertices-1"""

    model_config = ConfigDict(frozen=True)

    n_vertices: int = Field(gt=0)
    edges: Tuple[Tuple[int, int], ...] = ()
    name: Optional[str] = None

    @model_validator(mode="after")
    def _normalize_edges(self):
        seen = set()
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop on vertex {u}")
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise ValueError(f"edge {u}-{v} outside 0..{self.n_vertices - 1}")
            seen.add((min(u, v), max(u, v)))
        # frozen model: write the canonical edge tuple through object.__setattr__
        object.__setattr__(self, "edges", tuple(sorted(seen)))
        return self

    @property
    def connected(self) -> bool:
        reached = {0}
        frontier = [0]
        while frontier:
            u = frontier.pop()
            for k in range(self.n_vertices):
                if k not in reached and self.neighbours(u) >> k & 1:
                    reached.add(k)
                    frontier.append(k)
        return len(reached) == self.n_vertices

    def neighbours(self, k: int) -> int:
        mask = 0
        for u, v in self.edges:
            if u == k:
                mask |= 1 << v
            elif v == k:
                mask |= 1 << u
        return mask

    def stabilizers(self) -> StabilizerSet:
        return StabilizerSet.graph(self.n_vertices, self.edges)

    def edge_list(self) -> str:
        return ",".join(f"{u}-{v}" for u, v in self.edges)

    def to_dot(self) -> str:
        lines = [f"graph {self.name or 'G'} {{"]
        lines += [f"  {k};" for k in range(self.n_vertices)]
        lines += [f"  {u} -- {v};" for u, v in self.edges]
        lines.append("}")
        return "\n".join(lines) + "\n"

    @classmethod
    def path(cls, n: int) -> "GraphSpec":
        return cls(n_vertices=n, edges=tuple((k, k + 1) for k in range(n - 1)), name=f"path{n}")

    @classmethod
    def star(cls, n: int) -> "GraphSpec":
        return cls(n_vertices=n, edges=tuple((0, k) for k in range(1, n)), name=f"star{n}")

    @classmethod
    def ring(cls, n: int) -> "GraphSpec":
        if n < 3:
            raise DomainError(f"a ring needs at least 3 vertices, got {n}")
        return cls(n_vertices=n, edges=tuple((k, (k + 1) % n) for k in range(n)), name=f"ring{n}")

    @classmethod
    def disjoint_edges(cls, n_pairs: int) -> "GraphSpec":
        return cls(n_vertices=2 * n_pairs, edges=tuple((2 * j, 2 * j + 1) for j in range(n_pairs)),
                   name=f"pairs{n_pairs}")

    @classmethod
    def parse(cls, text: str) -> "GraphSpec":
        """Preset ("path4", "star5", "ring6") or edge list ("0-1,1-2")."""
        text = text.strip().lower()
        for prefix, builder in (("path", cls.path), ("star", cls.star), ("ring", cls.ring)):
            if text.startswith(prefix) and text[len(prefix):].isdigit():
                return builder(int(text[len(prefix):]))
        edges = []
        try:
            for part in text.split(","):
                u, v = part.split("-")
                edges.append((int(u), int(v)))
        except ValueError:
            raise ResolutionError(f"Cannot parse graph {text!r}")
        n = max(max(e) for e in edges) + 1
        return cls(n_vertices=n, edges=tuple(edges))


class SystemSpec(BaseModel):
    """HE(n) on 2n qubits, or the graph state of a GraphSpec"""

    model_config = ConfigDict(frozen=True)

    kind: str
    n_dofs: Optional[int] = None
    graph: Optional[GraphSpec] = None

    @model_validator(mode="after")
    def _check_kind(self):
        if self.kind == "he" and (self.n_dofs is None or self.n_dofs < 1):
            raise ValueError("an HE system needs n_dofs >= 1")
        if self.kind == "graph" and self.graph is None:
            raise ValueError("a graph system needs a graph")
        if self.kind not in ("he", "graph"):
            raise ValueError(f"unknown system kind {self.kind!r}")
        return self

    @classmethod
    def he(cls, n_dofs: int) -> "SystemSpec":
        return cls(kind="he", n_dofs=n_dofs)

    @classmethod
    def of_graph(cls, graph: GraphSpec) -> "SystemSpec":
        return cls(kind="graph", graph=graph)

    @classmethod
    def parse(cls, n: Optional[int] = None, graph: Optional[str] = None) -> "SystemSpec":
        if graph:
            return cls.of_graph(GraphSpec.parse(graph))
        if n is None:
            raise ResolutionError("either n or a graph is required")
        return cls.he(n)

    @property
    def is_he(self) -> bool:
        return self.kind == "he"

    @property
    def n_qubits(self) -> int:
        return 2 * self.n_dofs if self.is_he else self.graph.n_vertices

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def stabilizers(self) -> StabilizerSet:
        return StabilizerSet.he(self.n_dofs) if self.is_he else self.graph.stabilizers()

    def reference_state(self) -> StateVector:
        return build_he_state(self.n_dofs) if self.is_he else build_graph_state(self.graph)

    def label(self) -> str:
        if self.is_he:
            return f"he:n={self.n_dofs}"
        return f"graph:{self.graph.name or self.graph.edge_list()}"


# ──────────────────────────── BUILDERS ─────────────────────────────── #

def _check_vector_cap(n_qubits: int) -> None:
    if n_qubits > config.DENSE_VECTOR_CAP:
        raise CapacityError(f"{n_qubits} qubits exceed the dense vector cap of {config.DENSE_VECTOR_CAP}")


def apply_local_unitaries(state: State, gates: Dict[int, np.ndarray]) -> State:
    """Apply single-qubit gates {qubit: 2x2} to a vector or density operator."""
    n = state.n_qubits
    if isinstance(state, StateVector):
        psi = state.amplitudes.reshape([2] * n)
        for q, gate in sorted(gates.items()):
            if gate is None:
                continue
            psi = np.moveaxis(np.tensordot(gate, psi, axes=([1], [q])), 0, q)
        return StateVector(n, psi.reshape(-1))
    rho = state.matrix.reshape([2] * (2 * n))
    for q, gate in sorted(gates.items()):
        if gate is None:
            continue
        rho = np.moveaxis(np.tensordot(gate, rho, axes=([1], [q])), 0, q)
        rho = np.moveaxis(np.tensordot(gate.conj(), rho, axes=([1], [n + q])), 0, n + q)
    return DensityOperator(n, rho.reshape(1 << n, 1 << n))


def build_he_state(n: int, local_unitaries: Optional[Dict[int, np.ndarray]] = None) -> StateVector:
    """|Xi> = |phi+>_{A1B1} ... |phi+>_{AnBn}, optionally rotated qubit-wise."""
    if n < 1:
        raise DomainError(f"need at least one DOF, got {n}")
    _check_vector_cap(2 * n)
    amps = np.ones(1, dtype=complex)
    for _ in range(n):
        amps = np.kron(amps, PHI_PLUS)
    state = StateVector(2 * n, amps)
    if local_unitaries:
        state = apply_local_unitaries(state, local_unitaries)
    return state


def build_graph_state(g: GraphSpec) -> StateVector:
    """prod_{edges} CZ |+>^N. CZ gates commute, so edge order is irrelevant."""
    n = g.n_vertices
    _check_vector_cap(n)
    idx = np.arange(1 << n, dtype=np.int64)
    phase_bits = np.zeros(1 << n, dtype=np.int64)
    for u, v in g.edges:
        phase_bits ^= ((idx >> (n - 1 - u)) & 1) & ((idx >> (n - 1 - v)) & 1)
    amps = (1 - 2 * phase_bits) / np.sqrt(1 << n)
    return StateVector(n, amps.astype(complex))


def build_saturating_state(n: int, j: int) -> StateVector:
    """|00> on pair j, |phi+> on every other pair."""
    if not 1 <= j <= n:
        raise DomainError(f"DOF index {j} outside 1..{n}")
    _check_vector_cap(2 * n)
    zero_pair = np.array([1, 0, 0, 0], dtype=complex)
    amps = np.ones(1, dtype=complex)
    for k in range(1, n + 1):
        amps = np.kron(amps, zero_pair if k == j else PHI_PLUS)
    return StateVector(2 * n, amps)


def build_example_states() -> Tuple[StateVector, StateVector, DensityOperator]:
    """psi1 = |00>|phi+>, psi2 = |phi+>|00>, rho' = (|psi1><psi1| + |psi2><psi2|)/2."""
    psi1 = build_saturating_state(2, 1)
    psi2 = build_saturating_state(2, 2)
    return psi1, psi2, mixture([psi1, psi2], [0.5, 0.5])


def mixture(states: Sequence[State], weights: Sequence[float]) -> DensityOperator:
    if len(states) != len(weights) or not states:
        raise DomainError("need one weight per state")
    if any(w < 0 for w in weights) or abs(sum(weights) - 1) > TRACE_TOL:
        raise DomainError(f"weights must be a probability vector, got {list(weights)}")
    n = states[0].n_qubits
    if any(s.n_qubits != n for s in states):
        raise DimensionError("mixed states act on different qubit counts")
    mat = sum(w * as_density(s).matrix for s, w in zip(states, weights))
    return DensityOperator(n, mat)


def add_white_noise(rho: State, p_noise: float) -> DensityOperator:
    """(1-p) rho + p 1/D"""
    if not 0 <= p_noise <= 1:
        raise DomainError(f"p_noise must lie in [0, 1], got {p_noise}")
    rho = as_density(rho)
    mat = (1 - p_noise) * rho.matrix + p_noise * np.eye(rho.dim) / rho.dim
    return DensityOperator(rho.n_qubits, mat)


def random_state(n_qubits: int, seed: int) -> StateVector:
    """Haar-random pure state."""
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
    return StateVector.normalized(n_qubits, amps)


def random_density(n_qubits: int, rank: int, seed: int) -> DensityOperator:
    rng = np.random.default_rng(seed)
    dim = 1 << n_qubits
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    mat = g @ g.conj().T
    return DensityOperator(n_qubits, mat / np.trace(mat).real)


# ─────────────────────────── PARTIAL TRACE ─────────────────────────── #

def partial_trace(state: State, keep: Iterable[int]) -> DensityOperator:
    """Reduced density operator on the `keep` qubits (in increasing order)."""
    n = state.n_qubits
    keep = sorted(set(keep))
    if not keep or keep[0] < 0 or keep[-1] >= n:
        raise DomainError(f"qubits {keep} outside 0..{n - 1}")
    traced = [q for q in range(n) if q not in keep]
    k = len(keep)
    if isinstance(state, StateVector):
        psi = state.amplitudes.reshape([2] * n)
        red = np.tensordot(psi, psi.conj(), axes=(traced, traced))
        return DensityOperator(k, red.reshape(1 << k, 1 << k))
    letters = string.ascii_letters
    rows = [letters[q] for q in range(n)]
    cols = [letters[q] if q in traced else letters[n + q] for q in range(n)]
    out = [rows[q] for q in keep] + [cols[q] for q in keep]
    spec = "".join(rows) + "".join(cols) + "->" + "".join(out)
    red = np.einsum(spec, state.matrix.reshape([2] * (2 * n)))
    return DensityOperator(k, red.reshape(1 << k, 1 << k))


def reduce_to_dof(rho: State, j: int) -> DensityOperator:
    """rho_j: trace out every DOF except (A_j, B_j)."""
    if rho.n_qubits % 2:
        raise DimensionError(f"an HE state has an even qubit count, got {rho.n_qubits}")
    pair = QubitIndexMap(n_dofs=rho.n_qubits // 2).pair(j)
    return partial_trace(rho, pair)


# ─────────────────────────── STABILIZER BASIS ──────────────────────── #

def stabilizer_basis_state(stabilizers: StabilizerSet, s: int, reference: StateVector) -> StateVector:
    """|s>: S_k|s> = (-1)^{s_k}|s>, bit k of s belonging to generator k."""
    if reference.n_qubits != stabilizers.n_qubits:
        raise DimensionError("reference state and stabilizers differ in size")
    amps = reference.amplitudes
    for k, destab in enumerate(stabilizers.destabilizers):
        if (s >> k) & 1:
            amps = apply_to_amplitudes(destab, amps)
    return StateVector(reference.n_qubits, amps)


def stabilizer_basis(stabilizers: StabilizerSet, reference: StateVector) -> np.ndarray:
    """Unitary whose column s is |s>."""
    dim = 1 << stabilizers.n_qubits
    cols = [stabilizer_basis_state(stabilizers, s, reference).amplitudes for s in range(dim)]
    return np.stack(cols, axis=1)


def dephase(rho: State, stabilizers: StabilizerSet, reference: StateVector) -> DensityOperator:
    """Project rho onto the stabilizer eigenbasis (drop off-diagonal terms)."""
    rho = as_density(rho)
    basis = stabilizer_basis(stabilizers, reference)
    populations = np.real(np.einsum("is,ij,js->s", basis.conj(), rho.matrix, basis))
    return DensityOperator(rho.n_qubits, (basis * populations) @ basis.conj().T)


# ──────────────────────────── IDENTIFIERS ──────────────────────────── #

def _parse_params(text: str) -> Dict[str, int]:
    params = {}
    for part in text.split(","):
        if not part:
            continue
        key, _, value = part.partition("=")
        if not value.strip().isdigit():
            raise ResolutionError(f"Bad parameter {part!r}")
        params[key.strip()] = int(value)
    return params


def resolve_state(identifier: str) -> Tuple[State, SystemSpec]:
    """
    "he:n=2", "graph:path4", "graph:0-1,1-2", "psi1", "psi2", "rhoprime",
    "saturating:n=3,j=2" -> (state, system it lives on)
    """
    ident = identifier.strip()
    head, _, tail = ident.partition(":")
    head = head.lower()
    if head in ("psi1", "psi2", "rhoprime"):
        psi1, psi2, rho_prime = build_example_states()
        return {"psi1": psi1, "psi2": psi2, "rhoprime": rho_prime}[head], SystemSpec.he(2)
    if head == "he":
        params = _parse_params(tail) if "=" in tail else {"n": int(tail)} if tail.isdigit() else {}
        if "n" not in params:
            raise ResolutionError(f"HE state needs n: {identifier!r}")
        return build_he_state(params["n"]), SystemSpec.he(params["n"])
    if head == "saturating":
        params = _parse_params(tail)
        if "n" not in params or "j" not in params:
            raise ResolutionError(f"saturating state needs n and j: {identifier!r}")
        return build_saturating_state(params["n"], params["j"]), SystemSpec.he(params["n"])
    if head == "graph":
        g = GraphSpec.parse(tail)
        return build_graph_state(g), SystemSpec.of_graph(g)
    raise ResolutionError(f"Unknown state identifier {identifier!r}")
