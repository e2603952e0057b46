"""
Pauli string algebra on N qubits.

A PauliString is stored as two bitmasks plus a power of i:

    P = i^phase * prod_k X_k^{x_k} Z_k^{z_k}

with X written before Z on every qubit, so a qubit carrying both bits is
XZ = -iY. Bit k of a mask is qubit k. Dense vectors use the kron ordering
(qubit 0 is the most significant bit of a basis index); `index_mask` converts
between the two.

Qubit k of an HE system is DOF A_{k//2+1} for even k and B_{k//2+1} for odd k.
"""

import logging
from typing import Iterable, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from errors import DimensionError, DomainError, ResolutionError

log = logging.getLogger("pauli_algebra")

MAX_MASK_QUBITS = 62

_PHASE_VALUES = (1.0 + 0j, 1j, -1.0 + 0j, -1j)
_PHASE_PREFIX = ("", "i", "-", "-i")


# ─────────────────────────────── BITS ──────────────────────────────── #

def index_mask(mask: int, n_qubits: int) -> int:
    """Reorder a qubit mask (bit k = qubit k) into basis-index bit order."""
    out = 0
    for k in range(n_qubits):
        if (mask >> k) & 1:
            out |= 1 << (n_qubits - 1 - k)
    return out


def parity(values: np.ndarray) -> np.ndarray:
    """Bitwise parity of non-negative int64 values (0 or 1 per entry)."""
    v = np.array(values, dtype=np.int64, copy=True)
    for shift in (32, 16, 8, 4, 2, 1):
        v ^= v >> shift
    return v & 1


def popcount(value: int) -> int:
    return bin(value).count("1")


# ─────────────────────────── PAULI STRINGS ─────────────────────────── #

class PauliString(BaseModel):
    """Signed tensor product of single-qubit Pauli operators"""

    model_config = ConfigDict(frozen=True)

    n_qubits: int = Field(gt=0, le=MAX_MASK_QUBITS)
    x_mask: int = Field(0, ge=0)
    z_mask: int = Field(0, ge=0)
    phase: int = Field(0, ge=0, le=3)

    @model_validator(mode="after")
    def _masks_fit(self):
        limit = 1 << self.n_qubits
        if self.x_mask >= limit or self.z_mask >= limit:
            raise ValueError(f"masks do not fit in {self.n_qubits} qubits")
        return self

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(n_qubits=n_qubits)

    @classmethod
    def on_qubits(cls, n_qubits: int, letter: str, qubits: Iterable[int]) -> "PauliString":
        """Same single-qubit Pauli (X or Z) on every listed qubit."""
        mask = 0
        for q in qubits:
            mask |= 1 << q
        if letter == "X":
            return cls(n_qubits=n_qubits, x_mask=mask)
        if letter == "Z":
            return cls(n_qubits=n_qubits, z_mask=mask)
        raise DomainError(f"on_qubits supports X and Z, not {letter!r}")

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """
        Parse "XXIZ", "-ZZ", "iXY" ... One letter per qubit, qubit 0 first.
        The optional prefix is the sign in front of the Y-form operator.
        """
        text = label.strip()
        sign = 0
        for exponent, prefix in sorted(enumerate(_PHASE_PREFIX), key=lambda p: -len(p[1])):
            if prefix and text.startswith(prefix):
                sign = exponent
                text = text[len(prefix):]
                break
        if text.startswith("+"):
            text = text[1:]
        if not text:
            raise ResolutionError(f"Empty Pauli label: {label!r}")
        x_mask = z_mask = 0
        n_y = 0
        for k, ch in enumerate(text.upper()):
            if ch == "I":
                continue
            if ch in "XY":
                x_mask |= 1 << k
            if ch in "ZY":
                z_mask |= 1 << k
            if ch == "Y":
                n_y += 1
            if ch not in "XYZ":
                raise ResolutionError(f"Unknown Pauli letter {ch!r} in {label!r}")
        # i^e Y = i^e (i XZ) -> stored phase is e + n_y
        return cls(n_qubits=len(text), x_mask=x_mask, z_mask=z_mask, phase=(sign + n_y) % 4)

    @property
    def y_mask(self) -> int:
        return self.x_mask & self.z_mask

    @property
    def support(self) -> int:
        return self.x_mask | self.z_mask

    @property
    def weight(self) -> int:
        return popcount(self.support)

    @property
    def phase_value(self) -> complex:
        return _PHASE_VALUES[self.phase]

    @property
    def label_sign(self) -> int:
        """Power of i in front of the Y-form letters (0..3)."""
        return (self.phase - popcount(self.y_mask)) % 4

    @property
    def is_hermitian(self) -> bool:
        return self.label_sign % 2 == 0

    @property
    def sign(self) -> int:
        """+1/-1 for Hermitian strings: P = sign * (product of letters)."""
        if not self.is_hermitian:
            raise DomainError(f"{self.label()} is not Hermitian")
        return 1 if self.label_sign == 0 else -1

    def letters(self) -> str:
        out = []
        for k in range(self.n_qubits):
            x = (self.x_mask >> k) & 1
            z = (self.z_mask >> k) & 1
            out.append("Y" if x and z else "X" if x else "Z" if z else "I")
        return "".join(out)

    def label(self) -> str:
        return _PHASE_PREFIX[self.label_sign] + self.letters()

    def to_matrix(self) -> np.ndarray:
        """Dense 2^N x 2^N matrix; a signed permutation."""
        dim = 1 << self.n_qubits
        idx = np.arange(dim, dtype=np.int64)
        xm = index_mask(self.x_mask, self.n_qubits)
        zm = index_mask(self.z_mask, self.n_qubits)
        signs = 1 - 2 * parity(idx & zm)
        out = np.zeros((dim, dim), dtype=complex)
        out[idx ^ xm, idx] = self.phase_value * signs
        return out

    def __str__(self) -> str:
        return self.label()


def _check_sizes(p: PauliString, q: PauliString) -> None:
    if p.n_qubits != q.n_qubits:
        raise DimensionError(f"Pauli strings act on {p.n_qubits} and {q.n_qubits} qubits")


def multiply(p: PauliString, q: PauliString) -> PauliString:
    """Operator product p*q with exact phase."""
    _check_sizes(p, q)
    # Z^{z1} X^{x2} = (-1)^{|z1 & x2|} X^{x2} Z^{z1}
    phase = (p.phase + q.phase + 2 * popcount(p.z_mask & q.x_mask)) % 4
    return PauliString(
        n_qubits=p.n_qubits,
        x_mask=p.x_mask ^ q.x_mask,
        z_mask=p.z_mask ^ q.z_mask,
        phase=phase,
    )


def commutes(p: PauliString, q: PauliString) -> bool:
    _check_sizes(p, q)
    return (popcount(p.x_mask & q.z_mask) + popcount(p.z_mask & q.x_mask)) % 2 == 0


def apply_to_amplitudes(p: PauliString, amplitudes: np.ndarray) -> np.ndarray:
    dim = 1 << p.n_qubits
    if amplitudes.shape != (dim,):
        raise DimensionError(f"{p.n_qubits}-qubit Pauli string applied to a vector of shape {amplitudes.shape}")
    idx = np.arange(dim, dtype=np.int64)
    xm = index_mask(p.x_mask, p.n_qubits)
    zm = index_mask(p.z_mask, p.n_qubits)
    signs = 1 - 2 * parity(idx & zm)
    out = np.empty_like(amplitudes, dtype=complex)
    out[idx ^ xm] = p.phase_value * signs * amplitudes
    return out


def apply(p: PauliString, v):
    """p|v> for a StateVector-like object (n_qubits, amplitudes)."""
    if p.n_qubits != v.n_qubits:
        raise DimensionError(f"Pauli string on {p.n_qubits} qubits, state on {v.n_qubits}")
    return type(v)(v.n_qubits, apply_to_amplitudes(p, v.amplitudes))


# ─────────────────────────── QUBIT ORDERING ────────────────────────── #

class QubitIndexMap(BaseModel):
    """Fixed DOF ordering [A1, B1, A2, B2, ...]"""

    model_config = ConfigDict(frozen=True)

    n_dofs: int = Field(gt=0)

    @property
    def ordering(self) -> List[str]:
        labels = []
        for j in range(1, self.n_dofs + 1):
            labels += [f"A{j}", f"B{j}"]
        return labels

    def position(self, label: str) -> int:
        label = label.strip().upper()
        if len(label) < 2 or label[0] not in "AB" or not label[1:].isdigit():
            raise ResolutionError(f"Unknown DOF label: {label!r}")
        j = int(label[1:])
        if not 1 <= j <= self.n_dofs:
            raise ResolutionError(f"DOF index {j} outside 1..{self.n_dofs}")
        return 2 * j - 2 if label[0] == "A" else 2 * j - 1

    def label(self, position: int) -> str:
        if not 0 <= position < 2 * self.n_dofs:
            raise ResolutionError(f"Qubit position {position} outside 0..{2 * self.n_dofs - 1}")
        return f"{'AB'[position % 2]}{position // 2 + 1}"

    def pair(self, j: int) -> Tuple[int, int]:
        if not 1 <= j <= self.n_dofs:
            raise DomainError(f"DOF index {j} outside 1..{self.n_dofs}")
        return 2 * j - 2, 2 * j - 1


# ──────────────────────────── STABILIZERS ──────────────────────────── #

class StabilizerSet(BaseModel):
    """
    The N commuting generators of an HE or graph state, plus one
    destabilizer per generator (anticommutes with that generator only).
    Generator index k (0-based) is S_{k+1} in 1-based notation.
    """

    model_config = ConfigDict(frozen=True)

    kind: str
    generators: Tuple[PauliString, ...]
    destabilizers: Tuple[PauliString, ...]

    @model_validator(mode="after")
    def _consistent(self):
        if not self.generators or len(self.generators) != len(self.destabilizers):
            raise ValueError("one destabilizer per generator is required")
        sizes = {p.n_qubits for p in self.generators + self.destabilizers}
        if len(sizes) != 1:
            raise ValueError("generators act on different qubit counts")
        return self

    @property
    def n_qubits(self) -> int:
        return self.generators[0].n_qubits

    def __len__(self) -> int:
        return len(self.generators)

    @classmethod
    def he(cls, n_dofs: int) -> "StabilizerSet":
        """S_{2j-1} = X_{A_j} X_{B_j}, S_{2j} = Z_{A_j} Z_{B_j}."""
        if n_dofs < 1 or 2 * n_dofs > MAX_MASK_QUBITS:
            raise DomainError(f"HE system needs 1 <= n <= {MAX_MASK_QUBITS // 2}, got {n_dofs}")
        nq = 2 * n_dofs
        gens, destabs = [], []
        for j in range(n_dofs):
            a, b = 2 * j, 2 * j + 1
            gens.append(PauliString.on_qubits(nq, "X", (a, b)))
            gens.append(PauliString.on_qubits(nq, "Z", (a, b)))
            destabs.append(PauliString.on_qubits(nq, "Z", (a,)))
            destabs.append(PauliString.on_qubits(nq, "X", (a,)))
        return cls(kind="he", generators=tuple(gens), destabilizers=tuple(destabs))

    @classmethod
    def graph(cls, n_vertices: int, edges: Iterable[Tuple[int, int]]) -> "StabilizerSet":
        """S_k = X_k prod_{j in N(k)} Z_j."""
        if n_vertices < 1 or n_vertices > MAX_MASK_QUBITS:
            raise DomainError(f"graph needs 1..{MAX_MASK_QUBITS} vertices, got {n_vertices}")
        neighbours = [0] * n_vertices
        for u, v in edges:
            neighbours[u] |= 1 << v
            neighbours[v] |= 1 << u
        gens = tuple(
            PauliString(n_qubits=n_vertices, x_mask=1 << k, z_mask=neighbours[k])
            for k in range(n_vertices)
        )
        destabs = tuple(PauliString.on_qubits(n_vertices, "Z", (k,)) for k in range(n_vertices))
        return cls(kind="graph", generators=gens, destabilizers=destabs)

    def product(self, mask: int) -> PauliString:
        """Product of the generators whose bit is set in `mask` (increasing index)."""
        result = PauliString.identity(self.n_qubits)
        k = 0
        while mask:
            if mask & 1:
                result = multiply(result, self.generators[k])
            mask >>= 1
            k += 1
        return result

    def is_commuting(self) -> bool:
        gens = self.generators
        return all(commutes(gens[i], gens[j]) for i in range(len(gens)) for j in range(i + 1, len(gens)))

    def labels(self) -> List[str]:
        return [g.label() for g in self.generators]

