"""
Qutrit Clifford+T gate catalogue in the computational basis |0>, |1>, |2>.

Multi-qutrit matrices use the lexicographic ordering |q_0 q_1 ...>, qutrit 0 most
significant. Diagonal families that are naturally written with magnetic labels
(CR(z, phi)) are built in the angular-momentum ordering and reordered, so there is
a single source of truth shared with the pulse compiler.
"""

from __future__ import annotations

import cmath
import itertools
import math
import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .config import DEFAULT_TOL
from .errors import CatalogueError, DomainError, ShapeError, ValidationError
from .spin_algebra import (
    ANGULAR,
    COMPUTATIONAL,
    UnitaryMatrix,
    embed_operator,
    max_deviation,
    reorder,
    unitarity_deviation,
)
from .utils import format_real, get_logger, parse_angle

logger = get_logger(__name__)

OMEGA = cmath.exp(2j * math.pi / 3)
ETA = cmath.exp(2j * math.pi / 9)
# 2^{-1} mod 3, used for the half-integer exponents of S(1, xi, 0) and S(1, 0, xi)
INVERSE_OF_TWO = 2

SINGLE_QUTRIT = ('Z', 'X', 'F', 'T', 'S(1,1,0)', 'S(1,2,0)', 'S(1,0,1)', 'S(1,0,2)', 'X01', 'X02', 'X12')
TWO_QUTRIT = ('CZ', 'CX', 'CR')
GATE_NAMES = SINGLE_QUTRIT + TWO_QUTRIT

# S(2,0,0) multiplies labels by 2 mod 3, which is the X12 permutation
ALIASES = {'S(2,0,0)': 'X12'}

CR_SAMPLE_ANGLES = (math.pi / 5, 2 * math.pi / 3, -1.3)

_CR_PATTERN = re.compile(r'^CR\(\s*z\s*,\s*(?P<angle>[^)]+)\)$', re.IGNORECASE)


@dataclass(frozen=True)
class GateId:
    name: str
    parameter: float | None = None

    def __post_init__(self):
        if self.name not in GATE_NAMES:
            raise CatalogueError(f"unknown gate {self.name!r}", details={'known': list(GATE_NAMES)})
        if self.name == 'CR':
            if self.parameter is None or not math.isfinite(self.parameter):
                raise DomainError("CR(z, phi) needs a finite angle")
            object.__setattr__(self, 'parameter', float(self.parameter))
        elif self.parameter is not None:
            raise DomainError(f"gate {self.name} takes no parameter")

    @property
    def arity(self) -> int:
        return 2 if self.name in TWO_QUTRIT else 1

    @property
    def label(self) -> str:
        if self.name == 'CR':
            return f"CR(z,{format_real(self.parameter)})"
        return self.name

    def __str__(self):
        return self.label

    @classmethod
    def parse(cls, text) -> 'GateId':
        if isinstance(text, GateId):
            return text
        raw = str(text).strip()
        match = _CR_PATTERN.match(raw)
        if match:
            return cls('CR', parse_angle(match.group('angle')))
        name = re.sub(r'\s+', '', raw).upper()
        name = ALIASES.get(name, name)
        if name not in GATE_NAMES or name == 'CR':
            raise CatalogueError(f"unknown gate {raw!r}", details={'known': list(GATE_NAMES)})
        return cls(name)


def catalogue() -> tuple[GateId, ...]:
    """Every gate verified by the compiler, with CR sampled at a few angles."""
    gates = [GateId(name) for name in SINGLE_QUTRIT + ('CZ', 'CX')]
    gates.extend(GateId('CR', angle) for angle in CR_SAMPLE_ANGLES)
    return tuple(gates)


def clifford_catalogue() -> tuple[GateId, ...]:
    """Single-qutrit Clifford gates (every catalogue entry except T)."""
    return tuple(GateId(name) for name in SINGLE_QUTRIT if name != 'T')


def _permutation(mapping) -> np.ndarray:
    matrix = np.zeros((3, 3), dtype=complex)
    for source, target in enumerate(mapping):
        matrix[target, source] = 1.0
    return matrix


def _fourier() -> np.ndarray:
    q, k = np.meshgrid(range(3), range(3), indexing='ij')
    return OMEGA ** (q * k) / math.sqrt(3)


def _cr_angular(phi: float) -> np.ndarray:
    m = np.array([1, 0, -1])
    return np.diag(np.exp(1j * phi * np.outer(m, m).ravel()))


@lru_cache(maxsize=None)
def _single_qutrit_matrix(name: str) -> np.ndarray:
    labels = np.arange(3)
    if name == 'Z':
        return np.diag(OMEGA ** labels)
    if name == 'X':
        return _permutation([1, 2, 0])
    if name == 'F':
        return _fourier()
    if name == 'T':
        return np.diag([1.0, ETA, 1 / ETA])
    if name in ('X01', 'X02', 'X12'):
        a, b = int(name[1]), int(name[2])
        mapping = [0, 1, 2]
        mapping[a], mapping[b] = b, a
        return _permutation(mapping)
    if name.startswith('S(1,'):
        xi_clock, xi_shift = int(name[4]), int(name[6])
        half_squares = INVERSE_OF_TWO * labels ** 2
        if xi_clock:
            # omega^{xi q^2 / 2}
            return np.diag(OMEGA ** (xi_clock * half_squares % 3))
        # sum_q omega^{-xi q^2 / 2} |p_q><p_q|
        f = _fourier()
        return f @ np.diag(OMEGA ** (-xi_shift * half_squares % 3)) @ f.conj().T
    raise CatalogueError(f"unknown gate {name!r}")


def gate(gate_id) -> UnitaryMatrix:
    """[G]_c for a catalogue gate (3x3 or 9x9)."""
    gid = GateId.parse(gate_id)
    if gid.name == 'CZ':
        return controlled(gate('Z'))
    if gid.name == 'CX':
        return controlled(gate('X'))
    if gid.name == 'CR':
        return reorder(UnitaryMatrix(_cr_angular(gid.parameter)), ANGULAR, COMPUTATIONAL)
    return UnitaryMatrix(_single_qutrit_matrix(gid.name))


def embed(matrix, targets, register_size: int) -> UnitaryMatrix:
    """Place a gate on ``targets`` of a register (computational ordering)."""
    return UnitaryMatrix(embed_operator(np.asarray(matrix), targets, register_size), tol=DEFAULT_TOL)


def momentum_state(q: int) -> np.ndarray:
    """|p_q> = F|q>; |p_0> is |+>."""
    if q not in (0, 1, 2):
        raise DomainError(f"momentum label must be 0, 1 or 2, got {q!r}")
    return _fourier()[:, q].copy()


def controlled(w) -> UnitaryMatrix:
    """blockdiag(I, W, W^2) in the two-qutrit computational basis."""
    w = np.asarray(w, dtype=complex)
    if w.shape != (3, 3):
        raise ShapeError(f"controlled() takes a 3x3 gate, got {w.shape}")
    deviation = unitarity_deviation(w)
    if deviation > DEFAULT_TOL:
        raise ValidationError(f"controlled() needs a unitary (deviation {deviation:.3e})")
    result = np.zeros((9, 9), dtype=complex)
    power = np.eye(3, dtype=complex)
    for block in range(3):
        result[3 * block:3 * block + 3, 3 * block:3 * block + 3] = power
        power = w @ power
    return UnitaryMatrix(result)


def pauli_product(j: int, k: int) -> UnitaryMatrix:
    """X^j Z^k."""
    if j not in (0, 1, 2) or k not in (0, 1, 2):
        raise DomainError(f"Pauli exponents must be in {{0, 1, 2}}, got ({j}, {k})")
    x = np.linalg.matrix_power(_single_qutrit_matrix('X'), j)
    z = np.linalg.matrix_power(_single_qutrit_matrix('Z'), k)
    return UnitaryMatrix(x @ z)


@dataclass(frozen=True)
class PhaseEquivalenceReport:
    equal_up_to_phase: bool
    phase: complex | None
    max_residual: float
    phase_defined: bool = True

    def __bool__(self):
        return bool(self.equal_up_to_phase)

    def exact_phase(self, tol: float = DEFAULT_TOL) -> bool:
        """True when the matrices are equal, not only projectively."""
        return bool(self.equal_up_to_phase and abs(self.phase - 1.0) <= tol)


def equal_up_to_phase(a, b, tol: float = DEFAULT_TOL) -> PhaseEquivalenceReport:
    """Compare b against e^{i theta} a using the dim-normalized trace overlap."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ShapeError(f"cannot compare shapes {a.shape} and {b.shape}")
    dim = a.shape[0]
    overlap = np.trace(a.conj().T @ b) / dim
    magnitude = float(abs(overlap))
    if magnitude < tol:
        return PhaseEquivalenceReport(False, None, float(max_deviation(a, b)), phase_defined=False)

    phase = complex(overlap / magnitude)
    residual = float(max_deviation(b, phase * a))
    equal = bool(residual <= tol and magnitude >= 1.0 - tol)
    return PhaseEquivalenceReport(equal, phase, residual)


@dataclass(frozen=True)
class CliffordConjugation:
    """Result of searching for c p c^dagger = omega^s X^j Z^k."""

    found: bool
    j: int | None = None
    k: int | None = None
    omega_power: int | None = None

    def __bool__(self):
        return bool(self.found)


def clifford_conjugation_check(c, p, tol: float = DEFAULT_TOL) -> CliffordConjugation:
    c = np.asarray(c)
    p = np.asarray(p)
    if c.shape != (3, 3) or p.shape != (3, 3):
        raise ShapeError("Clifford conjugation check works on single-qutrit matrices")
    conjugate = c @ p @ c.conj().T
    for j, k, s in itertools.product(range(3), repeat=3):
        candidate = OMEGA ** s * pauli_product(j, k).entries
        if max_deviation(conjugate, candidate) <= tol:
            return CliffordConjugation(True, j, k, s)
    logger.debug("No Pauli element matches the conjugate")
    return CliffordConjugation(False)
