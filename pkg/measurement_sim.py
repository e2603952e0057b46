"""
Local measurement settings for witness expansions and a finite-shot sampler.

A setting fixes one single-qubit basis per qubit. A stabilizer product P is
measurable in a setting when every non-identity letter of P matches the
setting's basis on that qubit; its value is then the sign of P times the
outcome parity over P's support.
"""

import json
import logging
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

import config
from errors import CoverageError, DimensionError, DomainError, ResolutionError
from pauli_algebra import PauliString, index_mask, parity
from state_engine import BASIS_ROTATIONS, State, StateVector, apply_local_unitaries
from witness_factory import WitnessSpec, expansion

log = logging.getLogger("measurement_sim")


# ─────────────────────────────── MODELS ────────────────────────────── #

class MeasurementSetting(BaseModel):
    """Per-qubit basis letters, qubit 0 first ("XZXZ")"""

    model_config = ConfigDict(frozen=True)

    bases: str

    @field_validator("bases")
    @classmethod
    def _letters(cls, value: str) -> str:
        value = value.strip().upper()
        if not value or set(value) - set("XYZ"):
            raise ValueError(f"bases must be a non-empty string over X, Y, Z: {value!r}")
        return value

    @property
    def n_qubits(self) -> int:
        return len(self.bases)

    @property
    def uses_y(self) -> bool:
        return "Y" in self.bases

    def accepts(self, pauli: PauliString) -> bool:
        letters = pauli.letters()
        return len(letters) == self.n_qubits and all(p in ("I", b) for p, b in zip(letters, self.bases))

    def __str__(self) -> str:
        return self.bases


class MeasuredTerm(BaseModel):
    """c_m S_m with S_m = sign * (letters)"""

    model_config = ConfigDict(frozen=True)

    mask: int
    pauli: str
    coefficient: str

    @property
    def value(self) -> Fraction:
        return Fraction(self.coefficient)

    def operator(self) -> PauliString:
        return PauliString.from_label(self.pauli)


class SettingGroup(BaseModel):
    model_config = ConfigDict(frozen=True)

    setting: MeasurementSetting
    terms: List[MeasuredTerm]


class Decomposition(BaseModel):
    """Constant term plus stabilizer products grouped by setting"""

    model_config = ConfigDict(frozen=True)

    witness: str
    n_qubits: int
    constant: str
    groups: List[SettingGroup]
    naive_count: Optional[int] = None

    @property
    def settings(self) -> List[MeasurementSetting]:
        return [g.setting for g in self.groups]

    @property
    def emitted_count(self) -> int:
        return len(self.groups)

    @property
    def xz_count(self) -> int:
        """Settings that need no Y basis"""
        return sum(1 for g in self.groups if not g.setting.uses_y)

    @property
    def n_terms(self) -> int:
        return sum(len(g.terms) for g in self.groups)

    def expansion(self) -> Dict[int, Fraction]:
        out = {0: Fraction(self.constant)} if Fraction(self.constant) else {}
        for group in self.groups:
            for term in group.terms:
                out[term.mask] = out.get(term.mask, 0) + term.value
        return out


class SampleRecord(BaseModel):
    """Outcome counts of one setting; bitstring char k is qubit k"""

    model_config = ConfigDict(frozen=True)

    setting: MeasurementSetting
    shots: int = Field(gt=0)
    counts: Dict[str, int]

    @field_validator("setting", mode="before")
    @classmethod
    def _setting_from_text(cls, value):
        return MeasurementSetting(bases=value) if isinstance(value, str) else value

    @model_validator(mode="after")
    def _counts_match(self):
        n = self.setting.n_qubits
        for outcome, count in self.counts.items():
            if len(outcome) != n or set(outcome) - set("01"):
                raise ValueError(f"outcome {outcome!r} is not a {n}-bit string")
            if count < 0:
                raise ValueError(f"negative count for {outcome}")
        if sum(self.counts.values()) != self.shots:
            raise ValueError(f"counts sum to {sum(self.counts.values())}, not {self.shots}")
        return self

    def to_json_line(self) -> str:
        payload = {"setting": self.setting.bases, "shots": self.shots, "counts": dict(sorted(self.counts.items()))}
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json_line(cls, line: str) -> "SampleRecord":
        return cls.model_validate(json.loads(line))


class Estimate(BaseModel):
    witness: str
    value: float
    stderr: float
    shots_total: Optional[int] = None
    settings_used: int


# ────────────────────────────── DECOMPOSE ──────────────────────────── #

class _OpenSetting:
    """Setting under construction: bases fixed on `fixed`, free elsewhere"""

    def __init__(self):
        self.x = 0
        self.z = 0
        self.fixed = 0
        self.terms: List[MeasuredTerm] = []

    def accepts(self, pauli: PauliString) -> bool:
        clash = (self.x ^ pauli.x_mask) | (self.z ^ pauli.z_mask)
        return clash & self.fixed & pauli.support == 0

    def add(self, pauli: PauliString, term: MeasuredTerm) -> None:
        self.x |= pauli.x_mask
        self.z |= pauli.z_mask
        self.fixed |= pauli.support
        self.terms.append(term)

    def close(self, n_qubits: int) -> MeasurementSetting:
        letters = []
        for k in range(n_qubits):
            x, z = (self.x >> k) & 1, (self.z >> k) & 1
            letters.append("Y" if x and z else "X" if x else "Z" if z else "")
        filler = next((c for c in letters if c), "Z")
        return MeasurementSetting(bases="".join(c or filler for c in letters))


def decompose(spec: WitnessSpec) -> Decomposition:
    """
    First-fit grouping of the witness expansion into local settings, heaviest
    products first. Qubits no term of a setting touches take the setting's
    first basis letter.
    """
    poly = expansion(spec)
    constant = poly.pop(0, Fraction(0))
    stabs = spec.system.stabilizers()
    products = [(stabs.product(m), m, c) for m, c in poly.items()]
    products.sort(key=lambda item: (-item[0].weight, item[1]))

    open_settings: List[_OpenSetting] = []
    for pauli, mask, coeff in products:
        term = MeasuredTerm(mask=mask, pauli=pauli.label(), coefficient=str(coeff))
        target = next((s for s in open_settings if s.accepts(pauli)), None)
        if target is None:
            target = _OpenSetting()
            open_settings.append(target)
        target.add(pauli, term)

    groups = [SettingGroup(setting=s.close(spec.n_qubits), terms=s.terms) for s in open_settings]
    naive = 3 ** spec.system.n_dofs if spec.system.is_he and spec.kind in ("wtilde", "qudit") else None
    log.info(f"{spec.display_name()} N={spec.n_qubits}: {len(products)} terms in {len(groups)} settings")
    return Decomposition(
        witness=spec.identifier,
        n_qubits=spec.n_qubits,
        constant=str(constant),
        groups=groups,
        naive_count=naive,
    )


# ─────────────────────────────── SAMPLE ────────────────────────────── #

def setting_distribution(rho: State, setting: MeasurementSetting) -> np.ndarray:
    """Born probabilities of every outcome index in the rotated product basis."""
    if setting.n_qubits != rho.n_qubits:
        raise DimensionError(f"setting on {setting.n_qubits} qubits, state on {rho.n_qubits}")
    gates = {q: BASIS_ROTATIONS[b] for q, b in enumerate(setting.bases) if BASIS_ROTATIONS[b] is not None}
    rotated = apply_local_unitaries(rho, gates) if gates else rho
    if isinstance(rotated, StateVector):
        probs = np.abs(rotated.amplitudes) ** 2
    else:
        probs = np.real(np.diag(rotated.matrix))
    probs = np.clip(probs, 0, None)
    return probs / probs.sum()


def sample(rho: State, setting: MeasurementSetting, shots: int, seed: int) -> SampleRecord:
    if shots <= 0:
        raise DomainError(f"shots must be positive, got {shots}")
    probs = setting_distribution(rho, setting)
    rng = np.random.default_rng(seed)
    drawn = rng.multinomial(shots, probs)
    n = rho.n_qubits
    counts = {format(int(b), f"0{n}b"): int(c) for b, c in enumerate(drawn) if c}
    return SampleRecord(setting=setting, shots=shots, counts=counts)


def sample_all(rho: State, decomposition: Decomposition, shots: int, seed: int) -> List[SampleRecord]:
    """One record per setting; setting i is drawn with seed + i."""
    return [sample(rho, s, shots, seed + i) for i, s in enumerate(decomposition.settings)]


# ────────────────────────────── ESTIMATE ───────────────────────────── #

def _group_moments(group: SettingGroup, outcomes: np.ndarray, weights: np.ndarray, n_qubits: int):
    """(value, variance per shot) of one setting's term sum, weights summing to 1."""
    coeffs = []
    parities = []
    for term in group.terms:
        op = term.operator()
        coeffs.append(float(term.value) * op.sign)
        parities.append(1 - 2 * parity(outcomes & index_mask(op.support, n_qubits)))
    c = np.array(coeffs)
    y = np.array(parities, dtype=float)
    means = y @ weights
    second = (y * weights) @ y.T
    cov = second - np.outer(means, means)
    return float(c @ means), float(c @ cov @ c)


def _records_by_setting(records: Iterable[SampleRecord]) -> Dict[str, Dict[str, int]]:
    merged: Dict[str, Dict[str, int]] = {}
    for rec in records:
        bucket = merged.setdefault(rec.setting.bases, {})
        for outcome, count in rec.counts.items():
            bucket[outcome] = bucket.get(outcome, 0) + count
    return merged


def estimate(spec: WitnessSpec, records: Sequence[SampleRecord],
             decomposition: Optional[Decomposition] = None) -> Estimate:
    """Plug-in parity estimator; settings are treated as independent."""
    dec = decomposition or decompose(spec)
    merged = _records_by_setting(records)
    missing = [s.bases for s in dec.settings if s.bases not in merged]
    if missing:
        raise CoverageError(f"no samples for settings {missing}")
    value = float(Fraction(dec.constant))
    variance = 0.0
    shots_total = 0
    for group in dec.groups:
        counts = merged[group.setting.bases]
        shots = sum(counts.values())
        if shots == 0:
            raise CoverageError(f"setting {group.setting.bases} has zero shots")
        outcomes = np.array([int(o, 2) for o in counts], dtype=np.int64)
        weights = np.array(list(counts.values()), dtype=float) / shots
        mean, var = _group_moments(group, outcomes, weights, dec.n_qubits)
        value += mean
        variance += var / shots
        shots_total += shots
    return Estimate(
        witness=spec.identifier,
        value=value,
        stderr=float(np.sqrt(max(variance, 0.0))),
        shots_total=shots_total,
        settings_used=dec.emitted_count,
    )


def estimate_exact(spec: WitnessSpec, rho: State, decomposition: Optional[Decomposition] = None) -> Estimate:
    """The estimator fed exact Born probabilities instead of counts."""
    dec = decomposition or decompose(spec)
    outcomes = np.arange(1 << dec.n_qubits, dtype=np.int64)
    value = float(Fraction(dec.constant))
    for group in dec.groups:
        mean, _ = _group_moments(group, outcomes, setting_distribution(rho, group.setting), dec.n_qubits)
        value += mean
    return Estimate(witness=spec.identifier, value=value, stderr=0.0, settings_used=dec.emitted_count)


def read_records(lines: Iterable[str]) -> List[SampleRecord]:
    records = []
    for number, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            records.append(SampleRecord.from_json_line(line))
        except ValueError as err:
            raise ResolutionError(f"record line {number}: {err}")
    return records


def sampled_negative(est: Estimate, k: Optional[float] = None) -> bool:
    """value + k*stderr < 0"""
    k = config.SAMPLED_MARGIN_K if k is None else k
    return est.value + k * est.stderr < 0
