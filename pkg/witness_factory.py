"""
Witness operators for HE and graph states.

Every witness is a polynomial in the stabilizer generators S_k, so it has
three interchangeable forms:

    expansion   {generator-subset mask: exact coefficient}
    diagonal    eigenvalue lambda(s) on the stabilizer basis |s>, obtained by
                substituting S_k -> (-1)^{s_k}
    dense       2^N x 2^N matrix (small N only)

Bit k of a bit-string integer s is s_{k+1}, the eigenvalue bit of generator k.
"""

import logging
import math
from fractions import Fraction
from typing import Callable, Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

import config
from errors import CapacityError, ConsistencyError, DimensionError, DomainError, RepresentationError, ResolutionError
from pauli_algebra import index_mask, parity
from state_engine import State, StateVector, SystemSpec, add_white_noise, stabilizer_basis

log = logging.getLogger("witness_factory")

KINDS = ("wtilde", "w1", "w2", "w3", "wj", "wjalt", "qudit")
DISPLAY_NAMES = {
    "wtilde": "Wtilde", "w1": "W1", "w2": "W2", "w3": "W3",
    "wj": "WperDOF", "wjalt": "WperDOFAlt", "qudit": "QuditBipartite",
}
TABLE_KINDS = ("w1", "w2", "w3", "wtilde")

NEGATIVITY_TOL = 1e-12
CERTIFY_TOL = 1e-9

Expansion = Dict[int, Fraction]


# ─────────────────────────────── SPECS ─────────────────────────────── #

class WitnessSpec(BaseModel):
    """Witness kind bound to the system it acts on"""

    model_config = ConfigDict(frozen=True)

    kind: Literal["wtilde", "w1", "w2", "w3", "wj", "wjalt", "qudit"]
    system: SystemSpec
    j: Optional[int] = None
    c0: int = Field(2, description="constant term of W3")

    @model_validator(mode="after")
    def _fits_system(self):
        if self.kind in ("wj", "wjalt"):
            if not self.system.is_he:
                raise ValueError(f"{self.kind} needs an HE system")
            if self.j is None or not 1 <= self.j <= self.system.n_dofs:
                raise ValueError(f"DOF index {self.j} outside 1..{self.system.n_dofs}")
        elif self.j is not None:
            raise ValueError(f"{self.kind} takes no DOF index")
        if self.kind == "qudit" and not self.system.is_he:
            raise ValueError("the bipartite qudit witness needs an HE system")
        if self.kind == "w2" and self.system.n_qubits < 2:
            raise ValueError("W2 needs at least two generators")
        return self

    @property
    def n_qubits(self) -> int:
        return self.system.n_qubits

    @property
    def dim(self) -> int:
        return self.system.dim

    @property
    def normalized(self) -> bool:
        return self.kind != "qudit"

    @property
    def identifier(self) -> str:
        return f"{self.kind}:{self.j}" if self.j is not None else self.kind

    def display_name(self) -> str:
        name = DISPLAY_NAMES[self.kind]
        return f"{name}({self.j})" if self.j is not None else name


def make_witness(kind: str, system: SystemSpec, j: Optional[int] = None, c0: int = 2) -> WitnessSpec:
    """WitnessSpec constructor that reports misfits as RepresentationError."""
    try:
        return WitnessSpec(kind=kind, system=system, j=j, c0=c0)
    except ValidationError as err:
        raise RepresentationError(f"{kind} on {system.label()}: {err.errors()[0]['msg']}")


def parse_witness(identifier: str, system: SystemSpec, c0: int = 2) -> WitnessSpec:
    """"wtilde", "w1", "w2", "w3", "wj:1", "wjalt:1", "qudit"."""
    kind, _, arg = identifier.strip().lower().partition(":")
    if kind not in KINDS:
        raise ResolutionError(f"Unknown witness {identifier!r}")
    j = None
    if kind in ("wj", "wjalt"):
        if not arg.isdigit():
            raise ResolutionError(f"{kind} needs a DOF index, e.g. {kind}:1")
        j = int(arg)
    elif arg:
        raise ResolutionError(f"{kind} takes no argument: {identifier!r}")
    return make_witness(kind, system, j=j, c0=c0)


# ────────────────────────────── EXPANSION ──────────────────────────── #

def _poly_mul(a: Expansion, b: Expansion) -> Expansion:
    out: Expansion = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = ma ^ mb
            out[m] = out.get(m, 0) + ca * cb
    return {m: c for m, c in out.items() if c != 0}


def _poly_add(*terms: Tuple[Fraction, Expansion]) -> Expansion:
    out: Expansion = {}
    for scale, poly in terms:
        for m, c in poly.items():
            out[m] = out.get(m, 0) + scale * c
    return {m: c for m, c in out.items() if c != 0}


def _projector(bits: Sequence[int]) -> Expansion:
    """prod_k (1 + S_k)/2"""
    poly: Expansion = {0: Fraction(1)}
    for k in bits:
        poly = _poly_mul(poly, {0: Fraction(1, 2), 1 << k: Fraction(1, 2)})
    return poly


def expansion(spec: WitnessSpec) -> Expansion:
    """Stabilizer polynomial of the witness."""
    n = spec.n_qubits
    if n > config.DENSE_VECTOR_CAP:
        raise CapacityError(f"expansion of a {n}-generator witness exceeds the cap of {config.DENSE_VECTOR_CAP}")
    one = {0: Fraction(1)}
    if spec.kind == "wtilde":
        return _poly_add((Fraction(1), one), (Fraction(-2), _projector(range(n))))
    if spec.kind == "qudit":
        return _poly_add((Fraction(1, 2 ** spec.system.n_dofs), one), (Fraction(-1), _projector(range(n))))
    if spec.kind == "w1":
        return _poly_add((Fraction(n - 1), one), *((Fraction(-1), {1 << k: Fraction(1)}) for k in range(n)))
    if spec.kind == "w2":
        # 1-based odd k sit at even 0-based positions
        return _poly_add((Fraction(3), one),
                         (Fraction(-2), _projector(range(0, n, 2))),
                         (Fraction(-2), _projector(range(1, n, 2))))
    if spec.kind == "w3":
        poly = {0: Fraction(1)}
        for j in range(n // 2):
            poly = _poly_mul(poly, {0: Fraction(1, 3), 1 << 2 * j: Fraction(1, 3), 1 << 2 * j + 1: Fraction(1, 3)})
        if n % 2:
            poly = _poly_mul(poly, _projector([n - 1]))
        return _poly_add((Fraction(spec.c0), one), (Fraction(-3), poly))
    a, b = 1 << 2 * spec.j - 2, 1 << 2 * spec.j - 1
    if spec.kind == "wj":
        return {0: Fraction(1), a: Fraction(-1), b: Fraction(-1)}
    return {0: Fraction(1, 2), a: Fraction(-1, 2), b: Fraction(-1, 2), a | b: Fraction(-1, 2)}


# ────────────────────────────── DIAGONAL ───────────────────────────── #

def _bit(bits: np.ndarray, k: int) -> np.ndarray:
    return (bits >> k) & 1


def _sigma(bits: np.ndarray, k: int) -> np.ndarray:
    return 1 - 2 * _bit(bits, k)


class DiagonalWitness:
    """
    lambda(s) = numerator(s) / denominator with integer numerators, evaluated
    on int64 arrays of bit-strings.
    """

    def __init__(self, n_stabilizers: int, numerator_fn: Callable[[np.ndarray], np.ndarray],
                 denominator: int, label: str):
        if n_stabilizers < 1:
            raise DomainError("a diagonal witness needs at least one stabilizer")
        self.n_stabilizers = n_stabilizers
        self.numerator_fn = numerator_fn
        self.denominator = int(denominator)
        self.label = label

    @classmethod
    def from_expansion(cls, poly: Expansion, n_stabilizers: int, label: str) -> "DiagonalWitness":
        den = 1
        for c in poly.values():
            den = math.lcm(den, c.denominator)
        terms = [(m, int(c * den)) for m, c in sorted(poly.items())]

        def numerators(bits: np.ndarray) -> np.ndarray:
            out = np.zeros(bits.shape, dtype=np.int64)
            for m, c in terms:
                out += c * (1 - 2 * parity(bits & m))
            return out

        return cls(n_stabilizers, numerators, den, label)

    @property
    def size(self) -> int:
        return 1 << self.n_stabilizers

    def _check_scan(self) -> None:
        if self.n_stabilizers > config.DIAGONAL_SCAN_CAP:
            raise CapacityError(f"{self.n_stabilizers} stabilizers exceed the scan cap of {config.DIAGONAL_SCAN_CAP}")

    def numerators(self, bits) -> np.ndarray:
        return self.numerator_fn(np.asarray(bits, dtype=np.int64))

    def value(self, s: int) -> Fraction:
        if not 0 <= s < self.size:
            raise DomainError(f"bit-string {s} outside 0..{self.size - 1}")
        return Fraction(int(self.numerators(np.array([s]))[0]), self.denominator)

    def values(self, bits=None) -> np.ndarray:
        """Float eigenvalues; every bit-string when `bits` is omitted."""
        if bits is None:
            self._check_scan()
            bits = np.arange(self.size, dtype=np.int64)
        return self.numerators(bits) / self.denominator

    def chunks(self):
        self._check_scan()
        for start in range(0, self.size, config.SCAN_CHUNK):
            yield np.arange(start, min(start + config.SCAN_CHUNK, self.size), dtype=np.int64)

    def exact_sum(self) -> Fraction:
        total = 0
        for bits in self.chunks():
            total += int(self.numerators(bits).sum())
        return Fraction(total, self.denominator)

    def minimum(self) -> Tuple[Fraction, int]:
        """(min lambda, lowest bit-string attaining it)"""
        best, best_s = None, 0
        for bits in self.chunks():
            nums = self.numerators(bits)
            k = int(np.argmin(nums))
            if best is None or nums[k] < best:
                best, best_s = int(nums[k]), int(bits[k])
        return Fraction(best, self.denominator), best_s

    def expectation(self, populations: np.ndarray) -> float:
        """sum_s p_s lambda(s)"""
        p = np.asarray(populations, dtype=float)
        if p.shape != (self.size,):
            raise DimensionError(f"need {self.size} populations, got {p.shape}")
        return float(p @ self.values())

    def __repr__(self) -> str:
        return f"DiagonalWitness({self.label}, N={self.n_stabilizers})"


def build_diagonal(spec: WitnessSpec) -> DiagonalWitness:
    """Closed-form lambda(s) for the witness kind."""
    n = spec.n_qubits
    kind = spec.kind
    label = spec.display_name()

    if kind == "wtilde":
        return DiagonalWitness(n, lambda b: 1 - 2 * (b == 0).astype(np.int64), 1, label)

    if kind == "w1":
        def w1(b):
            flips = sum(_bit(b, k) for k in range(n))
            return (n - 1) - (n - 2 * flips)
        return DiagonalWitness(n, w1, 1, label)

    if kind == "w2":
        odd_positions = sum(1 << k for k in range(0, n, 2))
        even_positions = sum(1 << k for k in range(1, n, 2))

        def w2(b):
            return 3 - 2 * (((b & odd_positions) == 0).astype(np.int64) + ((b & even_positions) == 0))
        return DiagonalWitness(n, w2, 1, label)

    if kind == "w3":
        pairs = n // 2
        den = 3 ** pairs

        def w3(b):
            prod = np.ones(b.shape, dtype=np.int64)
            for j in range(pairs):
                prod *= 1 + _sigma(b, 2 * j) + _sigma(b, 2 * j + 1)
            if n % 2:
                prod *= 1 - _bit(b, n - 1)
            return spec.c0 * den - 3 * prod
        return DiagonalWitness(n, w3, den, label)

    if kind == "qudit":
        den = 2 ** spec.system.n_dofs
        return DiagonalWitness(n, lambda b: 1 - den * (b == 0).astype(np.int64), den, label)

    a, b_ = 2 * spec.j - 2, 2 * spec.j - 1
    if kind == "wj":
        return DiagonalWitness(n, lambda b: 1 - _sigma(b, a) - _sigma(b, b_), 1, label)
    return DiagonalWitness(
        n, lambda b: 1 - _sigma(b, a) - _sigma(b, b_) - _sigma(b, a) * _sigma(b, b_), 2, label
    )


# ──────────────────────────────── DENSE ────────────────────────────── #

def _check_dense(spec: WitnessSpec) -> None:
    if spec.n_qubits > config.DENSE_DENSITY_CAP:
        raise CapacityError(f"{spec.n_qubits} qubits exceed the dense cap of {config.DENSE_DENSITY_CAP}")


def dense_from_expansion(poly: Expansion, system: SystemSpec) -> np.ndarray:
    """sum_m c_m S_m, filled one signed permutation at a time."""
    stabs = system.stabilizers()
    n = system.n_qubits
    dim = 1 << n
    idx = np.arange(dim, dtype=np.int64)
    out = np.zeros((dim, dim), dtype=complex)
    for m, c in sorted(poly.items()):
        p = stabs.product(m)
        xm = index_mask(p.x_mask, n)
        signs = 1 - 2 * parity(idx & index_mask(p.z_mask, n))
        out[idx ^ xm, idx] += float(c) * p.phase_value * signs
    return out


def build_dense(spec: WitnessSpec) -> np.ndarray:
    """Hermitian 2^N x 2^N witness matrix."""
    _check_dense(spec)
    if spec.kind in ("wtilde", "qudit"):
        ref = spec.system.reference_state().amplitudes
        projector = np.outer(ref, ref.conj())
        if spec.kind == "wtilde":
            return np.eye(spec.dim, dtype=complex) - 2 * projector
        return np.eye(spec.dim, dtype=complex) / 2 ** spec.system.n_dofs - projector
    return dense_from_expansion(expansion(spec), spec.system)


# ──────────────────────────── TRACES ───────────────────────────────── #

class TraceResult(BaseModel):
    """Tr[W] by three independent routes"""

    model_config = ConfigDict(frozen=True)

    witness: str
    n_qubits: int
    closed_form: str
    bitstring_sum: Optional[str] = None
    dense: Optional[float] = None


def closed_form_trace(spec: WitnessSpec) -> Fraction:
    n = spec.n_qubits
    dim = spec.dim
    kind = spec.kind
    if kind == "wtilde":
        return Fraction(dim - 2)
    if kind == "w1":
        return Fraction((n - 1) * dim)
    if kind == "w2":
        # 3D - 4 sqrt(D) for even N, 3D - 3 sqrt(2D) for odd N
        if n % 2 == 0:
            return Fraction(3 * dim - 4 * 2 ** (n // 2))
        return Fraction(3 * dim - 3 * 2 ** ((n + 1) // 2))
    if kind == "w3":
        pairs = n // 2
        tail = Fraction(3 * dim, 3 ** pairs) if n % 2 == 0 else Fraction(3 * dim, 2 * 3 ** pairs)
        return spec.c0 * dim - tail
    if kind == "wj":
        return Fraction(dim)
    if kind == "wjalt":
        return Fraction(dim, 2)
    return Fraction(2 ** spec.system.n_dofs - 1)


def trace_report(spec: WitnessSpec, dense: Optional[bool] = None) -> TraceResult:
    """Closed form, bit-string sum and (small N) dense trace, cross-checked."""
    closed = closed_form_trace(spec)
    summed = None
    if spec.n_qubits <= config.DIAGONAL_SCAN_CAP:
        summed = build_diagonal(spec).exact_sum()
        if summed != closed:
            raise ConsistencyError(f"{spec.display_name()} N={spec.n_qubits}: closed form {closed} != bit-string sum {summed}")
    dense_value = None
    if dense is None:
        dense = spec.n_qubits <= min(8, config.DENSE_DENSITY_CAP)
    if dense:
        dense_value = float(np.trace(build_dense(spec)).real)
        if abs(dense_value - float(closed)) > 1e-9 * max(1.0, abs(float(closed))):
            raise ConsistencyError(f"{spec.display_name()} N={spec.n_qubits}: dense trace {dense_value} != {closed}")
    return TraceResult(
        witness=spec.identifier,
        n_qubits=spec.n_qubits,
        closed_form=str(closed),
        bitstring_sum=None if summed is None else str(summed),
        dense=dense_value,
    )


def trace(spec: WitnessSpec) -> Fraction:
    trace_report(spec)
    return closed_form_trace(spec)


def value_at_reference(spec: WitnessSpec) -> Fraction:
    """lambda(0...0) = <ref|W|ref>"""
    if spec.kind == "qudit":
        return Fraction(1, 2 ** spec.system.n_dofs) - 1
    if spec.kind == "w3":
        return Fraction(spec.c0 - 3)
    return Fraction(-1)


def noise_threshold(spec: WitnessSpec) -> Fraction:
    """
    Largest white-noise fraction p with Tr[W rho_p] <= 0, where
    rho_p = (1-p)|ref><ref| + p 1/D. Equals D/(Tr[W]+D) when lambda(0) = -1.
    """
    lam0 = value_at_reference(spec)
    if lam0 >= 0:
        raise RepresentationError(f"{spec.display_name()} is not negative on its reference state")
    tr = closed_form_trace(spec)
    return -lam0 * spec.dim / (tr - lam0 * spec.dim)


def table_threshold_printed(spec: WitnessSpec) -> Optional[Fraction]:
    """p_M cell as it appears in the published noise table, or None."""
    if spec.kind not in TABLE_KINDS or (spec.kind == "w3" and spec.c0 != 2):
        return None
    n = spec.n_qubits
    dim = spec.dim
    half = Fraction(1, 2)
    if spec.kind == "w1":
        return Fraction(1, n)
    if spec.kind == "wtilde":
        return half / (1 - Fraction(1, dim))
    if spec.kind == "w3":
        pairs = n // 2
        tail = Fraction(1, 3 ** pairs) if n % 2 == 0 else Fraction(1, 2 * 3 ** pairs)
        return Fraction(1, 3) / (1 - tail)
    if n % 2 == 0:
        return Fraction(1, 4) / (1 - Fraction(1, 2 ** (n // 2)))
    # printed odd-N denominator: 1 - 3/(4 sqrt(2D))
    return Fraction(1, 4) / (1 - Fraction(3, 4 * 2 ** ((n + 1) // 2)))


def threshold_discrepancy(spec: WitnessSpec) -> Optional[str]:
    printed = table_threshold_printed(spec)
    derived = noise_threshold(spec)
    if printed is None or printed == derived:
        return None
    note = f"printed p_M {printed} differs from D/(Tr+D) = {derived}; derived value is authoritative"
    log.warning(f"{spec.display_name()} N={spec.n_qubits}: {note}")
    return note


# ─────────────────────────── EXPECTATIONS ──────────────────────────── #

def _as_exact(p: Union[float, Fraction, str]) -> Fraction:
    if isinstance(p, Fraction):
        return p
    try:
        return Fraction(str(p).strip())
    except (ValueError, ZeroDivisionError):
        raise DomainError(f"not a rational number: {p!r}")


def noisy_expectation(spec: WitnessSpec, p_noise: Union[float, Fraction, str]) -> Fraction:
    """Tr[W rho_p] on (1-p)|ref><ref| + p 1/D, exact and size-independent."""
    p = _as_exact(p_noise)
    if not 0 <= p <= 1:
        raise DomainError(f"p_noise must lie in [0, 1], got {p_noise}")
    return (1 - p) * value_at_reference(spec) + p * closed_form_trace(spec) / spec.dim


def expectation(spec: WitnessSpec, rho: State) -> float:
    """Tr[W rho] from the dense witness."""
    if rho.n_qubits != spec.n_qubits:
        raise DimensionError(f"witness on {spec.n_qubits} qubits, state on {rho.n_qubits}")
    w = build_dense(spec)
    if isinstance(rho, StateVector):
        v = rho.amplitudes
        return float(np.vdot(v, w @ v).real)
    return float(np.einsum("ij,ji->", w, rho.matrix).real)


def stabilizer_populations(rho: State, system: SystemSpec) -> np.ndarray:
    """p_s = <s|rho|s> for every bit-string s."""
    basis = stabilizer_basis(system.stabilizers(), system.reference_state())
    if isinstance(rho, StateVector):
        return np.abs(basis.conj().T @ rho.amplitudes) ** 2
    return np.real(np.einsum("is,ij,js->s", basis.conj(), rho.matrix, basis))


def expectation_diagonal(spec: WitnessSpec, rho: State) -> float:
    """Tr[W rho] through the stabilizer-basis populations of rho."""
    if rho.n_qubits != spec.n_qubits:
        raise DimensionError(f"witness on {spec.n_qubits} qubits, state on {rho.n_qubits}")
    return build_diagonal(spec).expectation(stabilizer_populations(rho, spec.system))


class SweepPoint(BaseModel):
    p_noise: float
    exact: str
    value: float
    dense: Optional[float] = None


def noise_sweep(spec: WitnessSpec, p_values: Sequence[Union[float, str]], dense: bool = False) -> List[SweepPoint]:
    points = []
    ref = spec.system.reference_state() if dense else None
    for raw in p_values:
        p = _as_exact(raw)
        exact = noisy_expectation(spec, p)
        dense_value = expectation(spec, add_white_noise(ref, float(p))) if dense else None
        points.append(SweepPoint(p_noise=float(p), exact=str(exact), value=float(exact), dense=dense_value))
    return points


# ──────────────────────────── CERTIFICATES ─────────────────────────── #

def bitstring(s: int, n: int) -> str:
    """s_1 s_2 ... s_N"""
    return "".join(str((s >> k) & 1) for k in range(n))


class Certificate(BaseModel):
    """min_s lambda_candidate(s) - alpha lambda_Wtilde(s)"""

    model_config = ConfigDict(frozen=True)

    candidate: str
    n_stabilizers: int
    alpha: str
    min_value: str
    min_value_float: float
    argmin: str
    value_at_zero: str
    min_single_bit: str
    valid: bool


def certify_witness(candidate: Union[WitnessSpec, DiagonalWitness], alpha: Union[float, Fraction, str] = 1,
                    system: Optional[SystemSpec] = None) -> Certificate:
    """Positivity of W' - alpha Wtilde over the full stabilizer basis."""
    a = _as_exact(alpha)
    if a <= 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if isinstance(candidate, WitnessSpec):
        system = candidate.system
        cand = build_diagonal(candidate)
    else:
        if system is None:
            raise RepresentationError("an explicit diagonal form needs the system it lives on")
        cand = candidate
    if cand.n_stabilizers != system.n_qubits:
        raise RepresentationError(f"{cand.label} has {cand.n_stabilizers} stabilizers, system has {system.n_qubits}")
    ref = build_diagonal(make_witness("wtilde", system))

    den = cand.denominator * a.denominator
    scale_c = a.denominator
    scale_w = a.numerator * cand.denominator

    def combined(bits):
        return scale_c * cand.numerators(bits) - scale_w * ref.numerators(bits)

    diff = DiagonalWitness(cand.n_stabilizers, combined, den, f"{cand.label} - {a} Wtilde")
    log.info(f"Certifying {diff.label} over {diff.size} bit-strings")
    low, arg = diff.minimum()
    singles = [diff.value(1 << k) for k in range(diff.n_stabilizers)]
    return Certificate(
        candidate=cand.label,
        n_stabilizers=cand.n_stabilizers,
        alpha=str(a),
        min_value=str(low),
        min_value_float=float(low),
        argmin=bitstring(arg, cand.n_stabilizers),
        value_at_zero=str(diff.value(0)),
        min_single_bit=str(min(singles)),
        valid=float(low) >= -CERTIFY_TOL,
    )


# ──────────────────────────── DETECTION ────────────────────────────── #

class DetectionReport(BaseModel):
    """Per-DOF and main witness values with the resulting verdict"""

    model_config = ConfigDict(frozen=True)

    main_witness: str
    per_dof: List[float]
    main_value: float
    margin: float
    detected: bool
    verdict: str


def is_negative(value: float, margin: float = 0.0) -> bool:
    return value < -(margin + NEGATIVITY_TOL)


def detect_hyperentanglement(rho: State, main_witness: WitnessSpec,
                             margin: Optional[float] = None) -> DetectionReport:
    """
    Detected iff every per-DOF witness and the main witness are negative.
    A negative verdict is "not detected", never a separability claim.
    """
    if not main_witness.system.is_he:
        raise RepresentationError("hyperentanglement detection needs an HE system")
    if rho.n_qubits != main_witness.n_qubits:
        raise DimensionError(f"witness on {main_witness.n_qubits} qubits, state on {rho.n_qubits}")
    margin = config.DETECTION_MARGIN if margin is None else margin
    system = main_witness.system
    per_dof = [expectation(make_witness("wj", system, j=j), rho) for j in range(1, system.n_dofs + 1)]
    main_value = expectation(main_witness, rho)
    detected = all(is_negative(v, margin) for v in per_dof) and is_negative(main_value, margin)
    verdict = "hyperentanglement detected" if detected else "not detected"
    log.info(f"{main_witness.display_name()}: per-DOF {per_dof}, main {main_value:.6g} -> {verdict}")
    return DetectionReport(
        main_witness=main_witness.identifier,
        per_dof=per_dof,
        main_value=main_value,
        margin=margin,
        detected=detected,
        verdict=verdict,
    )
