"""
Truncated multimode Fock simulator for the two-modes-per-qutrit encoding.

Basis states |n_1, ..., n_M> are ordered lexicographically with mode 0 most
significant and every occupation capped at ``cutoff``. Qutrit mu lives on the mode
pair (2 mu, 2 mu + 1) = (a_mu, b_mu); on the two-photon sector the Jordan-Schwinger
map reproduces the spin-1 algebra with |2,0> = |m=+1>, |1,1> = |m=0>, |0,2> = |m=-1>.

Every generator used here conserves the photon number of each mode pair, so the
encoded sector is exact at any cutoff >= 2.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from .compiler import GateVerification, PulseKind, PulseSequence, compile
from .config import DEFAULT_CUTOFF, DEFAULT_TOL, IDENTITY_TOL, MIN_CUTOFF
from .errors import ArityError, CapacityError, DomainError, LeakageError, ParseError, ShapeError, ValidationError
from .qutrit_gates import catalogue, controlled, equal_up_to_phase, gate
from .spin_algebra import (
    ANGULAR,
    COMPUTATIONAL,
    Axis,
    HermitianOperator,
    UnitaryMatrix,
    angular_momentum,
    angular_momentum_squared,
    convention as resolve_convention,
    max_deviation,
    oat,
    rotation,
    unitarity_deviation,
)
from .utils import format_real, get_logger

logger = get_logger(__name__)

TWO_PI = 2 * math.pi
# dense cap: two qutrits at cutoff 4 (625) or three at cutoff 2 (729)
MAX_FOCK_DIM = 729


@dataclass(frozen=True)
class FockSpace:
    modes: int
    cutoff: int = DEFAULT_CUTOFF

    def __post_init__(self):
        if self.modes < 1:
            raise ValidationError(f"a Fock space needs at least one mode, got {self.modes}")
        if self.cutoff < MIN_CUTOFF:
            raise ValidationError(f"cutoff must be >= {MIN_CUTOFF} for qutrit work, got {self.cutoff}")

    @property
    def levels(self) -> int:
        return self.cutoff + 1

    @property
    def dim(self) -> int:
        return self.levels ** self.modes

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.levels,) * self.modes

    @cached_property
    def occupation_table(self) -> np.ndarray:
        """Row i holds the occupations of basis state i."""
        table = np.array(list(itertools.product(range(self.levels), repeat=self.modes)), dtype=int)
        table.setflags(write=False)
        return table

    def index(self, occupations) -> int:
        occupations = tuple(int(n) for n in occupations)
        if len(occupations) != self.modes:
            raise ShapeError(f"expected {self.modes} occupations, got {len(occupations)}")
        if any(n < 0 or n > self.cutoff for n in occupations):
            raise DomainError(f"occupations {occupations} outside 0..{self.cutoff}")
        return int(np.ravel_multi_index(occupations, self.shape))

    def occupations(self, index: int) -> tuple[int, ...]:
        return tuple(int(n) for n in self.occupation_table[index])

    def basis_state(self, occupations) -> np.ndarray:
        vector = np.zeros(self.dim, dtype=complex)
        vector[self.index(occupations)] = 1.0
        return vector

    def check_mode(self, mode: int) -> int:
        if not 0 <= int(mode) < self.modes:
            raise DomainError(f"mode {mode} out of range for {self.modes} mode(s)")
        return int(mode)

    def check_pair(self, pair) -> tuple[int, int]:
        if len(pair) != 2:
            raise ArityError(f"expected a mode pair, got {tuple(pair)}")
        a, b = (self.check_mode(m) for m in pair)
        if a == b:
            raise DomainError(f"mode pair needs two distinct modes, got ({a}, {b})")
        return a, b


@dataclass(frozen=True)
class FockOperator:
    space: FockSpace
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        matrix = np.array(self.entries, dtype=complex)
        if matrix.shape != (self.space.dim, self.space.dim):
            raise ShapeError(f"operator shape {matrix.shape} does not match Fock dimension {self.space.dim}")
        matrix.setflags(write=False)
        object.__setattr__(self, 'entries', matrix)

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __matmul__(self, other):
        if isinstance(other, FockOperator):
            if other.space != self.space:
                raise ShapeError("operators live on different Fock spaces")
            return FockOperator(self.space, self.entries @ other.entries)
        if isinstance(other, FockState):
            return FockState(self.space, self.entries @ other.amplitudes)
        return self.entries @ np.asarray(other)

    def scaled(self, factor: complex) -> 'FockOperator':
        return FockOperator(self.space, factor * self.entries)

    def dagger(self) -> 'FockOperator':
        return FockOperator(self.space, self.entries.conj().T)

    def is_diagonal(self) -> bool:
        return not np.any(self.entries - np.diag(np.diag(self.entries)))


@dataclass(frozen=True)
class FockState:
    space: FockSpace
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        vector = np.array(self.amplitudes, dtype=complex)
        if vector.shape != (self.space.dim,):
            raise ShapeError(f"state of shape {vector.shape} does not match Fock dimension {self.space.dim}")
        norm = np.linalg.norm(vector)
        if abs(norm - 1.0) > DEFAULT_TOL:
            raise ValidationError(f"Fock state is not normalized (norm {norm:.12f})")
        vector.setflags(write=False)
        object.__setattr__(self, 'amplitudes', vector)

    def amplitude(self, occupations) -> complex:
        return complex(self.amplitudes[self.space.index(occupations)])

    def support(self, threshold: float = 1e-12) -> list[tuple[int, ...]]:
        return [self.space.occupations(i) for i in np.flatnonzero(np.abs(self.amplitudes) > threshold)]


def _single_mode_annihilation(levels: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, levels)), k=1).astype(complex)


def _lift(single: np.ndarray, mode: int, space: FockSpace) -> np.ndarray:
    result = np.ones((1, 1), dtype=complex)
    identity = np.eye(space.levels, dtype=complex)
    for m in range(space.modes):
        result = np.kron(result, single if m == mode else identity)
    return result


@lru_cache(maxsize=64)
def _ladder_matrix(mode: int, kind: str, space: FockSpace) -> np.ndarray:
    a = _lift(_single_mode_annihilation(space.levels), mode, space)
    matrix = a if kind == 'annihilate' else a.conj().T
    matrix.setflags(write=False)
    return matrix


def ladder(mode: int, kind: str, space: FockSpace) -> FockOperator:
    """Annihilation (``'annihilate'``) or creation (``'create'``) operator on one mode."""
    if kind not in ('create', 'annihilate'):
        raise DomainError(f"ladder kind must be 'create' or 'annihilate', got {kind!r}")
    return FockOperator(space, _ladder_matrix(space.check_mode(mode), kind, space))


def number_operator(mode: int, space: FockSpace) -> FockOperator:
    return FockOperator(space, np.diag(space.occupation_table[:, space.check_mode(mode)].astype(complex)))


def _number_diagonal(space: FockSpace, *modes) -> np.ndarray:
    occupations = space.occupation_table
    result = np.ones(space.dim)
    for mode in modes:
        result = result * occupations[:, mode]
    return result


def jordan_schwinger(axis, pair, space: FockSpace) -> FockOperator:
    """J_x = (a^dag b + a b^dag)/2, J_y = (a^dag b - a b^dag)/2i, J_z = (N_a - N_b)/2."""
    a_mode, b_mode = space.check_pair(pair)
    axis = Axis.parse(axis)
    if axis is Axis.Z:
        diagonal = (_number_diagonal(space, a_mode) - _number_diagonal(space, b_mode)) / 2
        return FockOperator(space, np.diag(diagonal.astype(complex)))

    a = _ladder_matrix(a_mode, 'annihilate', space)
    b = _ladder_matrix(b_mode, 'annihilate', space)
    hop = a.conj().T @ b
    if axis is Axis.X:
        return FockOperator(space, (hop + hop.conj().T) / 2)
    return FockOperator(space, (hop - hop.conj().T) / 2j)


def kerr_hamiltonian(kind: str, modes, strength: float, space: FockSpace) -> FockOperator:
    """Self-Kerr chi N_m^2 or cross-Kerr chi' N_m N_m'."""
    modes = tuple(modes)
    if kind == 'self':
        if len(modes) != 1:
            raise ArityError(f"self-Kerr acts on one mode, got {modes}")
        diagonal = strength * _number_diagonal(space, space.check_mode(modes[0])) ** 2
    elif kind == 'cross':
        if len(modes) != 2:
            raise ArityError(f"cross-Kerr couples two modes, got {modes}")
        if modes[0] == modes[1]:
            raise ArityError(f"cross-Kerr needs two distinct modes, got {modes}")
        diagonal = strength * _number_diagonal(space, *(space.check_mode(m) for m in modes))
    else:
        raise DomainError(f"Kerr kind must be 'self' or 'cross', got {kind!r}")
    return FockOperator(space, np.diag(diagonal.astype(complex)))


def kerr_unitary(hamiltonian: FockOperator, duration: float) -> FockOperator:
    """exp(i t H) for a diagonal Kerr Hamiltonian."""
    if not hamiltonian.is_diagonal():
        raise ValidationError("Kerr Hamiltonians are diagonal in the occupation basis")
    return FockOperator(hamiltonian.space, np.diag(np.exp(1j * duration * np.diag(hamiltonian.entries))))


def _check_strength(chi: float) -> float:
    if not (math.isfinite(chi) and chi > 0):
        raise DomainError(f"Kerr strength must be positive and finite, got {chi!r}")
    return float(chi)


def kerr_phase(angle: float) -> float:
    """Canonical Kerr phase in [0, 2pi); N-polynomials have integer spectra."""
    return math.fmod(math.fmod(angle, TWO_PI) + TWO_PI, TWO_PI)


def oat_via_self_kerr(phi: float, pair, n: int = 2, space: FockSpace | None = None, chi: float = 1.0) -> FockOperator:
    """exp[i phi N_a^2/2] exp[i phi N_b^2/2] e^{-i phi n^2/4}, equal to exp(i phi J_z^2) on the n-photon sector.

    Each self-Kerr factor runs for t = phi / (2 chi).
    """
    space = space or FockSpace(2)
    a_mode, b_mode = space.check_pair(pair)
    chi = _check_strength(chi)
    duration = phi / (2 * chi)
    u_a = kerr_unitary(kerr_hamiltonian('self', (a_mode,), chi, space), duration)
    u_b = kerr_unitary(kerr_hamiltonian('self', (b_mode,), chi, space), duration)
    return (u_a @ u_b).scaled(np.exp(-1j * phi * n * n / 4))


def projector_pi0(pair, space: FockSpace) -> FockOperator:
    """N_a N_b: the |m=0><m=0| projector, but only on the n=2 sector."""
    a_mode, b_mode = space.check_pair(pair)
    return FockOperator(space, np.diag(_number_diagonal(space, a_mode, b_mode).astype(complex)))


def phase_shifter(theta: float, pair, space: FockSpace) -> FockOperator:
    """exp[i theta (N_a - N_b)/2], the z-rotation in two modes."""
    generator = jordan_schwinger(Axis.Z, pair, space)
    return FockOperator(space, np.diag(np.exp(1j * theta * np.diag(generator.entries))))


def _subsystem_modes(subsystem: int, space: FockSpace) -> tuple[int, int]:
    if space.modes % 2:
        raise ArityError(f"qutrit encoding needs an even number of modes, got {space.modes}")
    if not 0 <= subsystem < space.modes // 2:
        raise ArityError(f"subsystem {subsystem} needs modes {2 * subsystem}, {2 * subsystem + 1}; "
                         f"space has {space.modes}")
    return 2 * subsystem, 2 * subsystem + 1


def cross_kerr_phases(phi: float) -> tuple[float, float, float, float]:
    """Phases of N_a N_a', N_a N_b', N_b N_a', N_b N_b' realizing exp(i phi J_z (x) J_z)."""
    quarter = phi / 4
    return kerr_phase(quarter), kerr_phase(-quarter), kerr_phase(-quarter), kerr_phase(quarter)


def cross_kerr_zz(phi: float, subsystems=(0, 1), space: FockSpace | None = None, chi: float = 1.0) -> FockOperator:
    """CR(z, phi) on two encoded qutrits from four cross-Kerr factors."""
    space = space or FockSpace(4)
    mu, nu = subsystems
    if mu == nu:
        raise ArityError(f"cross-Kerr coupling needs two distinct subsystems, got {tuple(subsystems)}")
    a_mu, b_mu = _subsystem_modes(mu, space)
    a_nu, b_nu = _subsystem_modes(nu, space)
    chi = _check_strength(chi)

    total = np.ones(space.dim, dtype=complex)
    for (m1, m2), phase in zip(((a_mu, a_nu), (a_mu, b_nu), (b_mu, a_nu), (b_mu, b_nu)), cross_kerr_phases(phi)):
        factor = kerr_unitary(kerr_hamiltonian('cross', (m1, m2), chi, space), phase / chi)
        total = total * np.diag(factor.entries)
    return FockOperator(space, np.diag(total))


def cz_via_cross_kerr(subsystems=(0, 1), space: FockSpace | None = None) -> FockOperator:
    """Phases pi/6, 11pi/6, 11pi/6, pi/6: CZ on the encoded sector."""
    return cross_kerr_zz(2 * math.pi / 3, subsystems, space)


def beam_splitter(theta: float, axis, pair, space: FockSpace) -> FockOperator:
    """exp(i theta J_{x|y}) exponentiated exactly on each photon-number block."""
    axis = Axis.parse(axis)
    if axis is Axis.Z:
        raise DomainError("beam splitters couple modes along x or y; use phase_shifter for z")
    a_mode, b_mode = space.check_pair(pair)
    generator = jordan_schwinger(axis, (a_mode, b_mode), space).entries

    occupations = space.occupation_table
    others = [m for m in range(space.modes) if m not in (a_mode, b_mode)]
    blocks = defaultdict(list)
    for index, row in enumerate(occupations):
        blocks[(tuple(row[others]), row[a_mode] + row[b_mode])].append(index)

    result = np.zeros((space.dim, space.dim), dtype=complex)
    for indices in blocks.values():
        window = np.ix_(indices, indices)
        values, vectors = np.linalg.eigh(generator[window])
        result[window] = (vectors * np.exp(1j * theta * values)) @ vectors.conj().T
    return FockOperator(space, result)


def fock_rotation(axis, phi: float, pair, space: FockSpace) -> FockOperator:
    axis = Axis.parse(axis)
    if axis is Axis.Z:
        return phase_shifter(phi, pair, space)
    return beam_splitter(phi, axis, pair, space)


# B J_z B^dagger = J_x for B = exp(-i pi/2 J_y); = J_y for B = exp(i pi/2 J_x)
OAT_FRAMES = {Axis.X: (Axis.Y, -math.pi / 2), Axis.Y: (Axis.X, math.pi / 2)}


def fock_oat(axis, phi: float, pair, space: FockSpace, n: int = 2) -> FockOperator:
    """exp(i phi J_l^2): the self-Kerr z-twist conjugated by a beam splitter for x and y."""
    axis = Axis.parse(axis)
    twist = oat_via_self_kerr(phi, pair, n, space)
    if axis is Axis.Z:
        return twist
    splitter_axis, angle = OAT_FRAMES[axis]
    frame = beam_splitter(angle, splitter_axis, pair, space)
    return frame @ twist @ frame.dagger()


def _space_for(sequence: PulseSequence, space: FockSpace | None, cutoff: int) -> FockSpace:
    modes = 2 * sequence.register_size
    space = space or FockSpace(modes, cutoff)
    if space.modes != modes:
        raise ArityError(f"a {sequence.register_size}-qutrit sequence needs {modes} modes, space has {space.modes}")
    if space.dim > MAX_FOCK_DIM:
        raise CapacityError(f"Fock dimension {space.dim} exceeds the dense cap {MAX_FOCK_DIM}")
    return space


def fock_playback(sequence: PulseSequence, space: FockSpace | None = None, n: int = 2,
                  cutoff: int = DEFAULT_CUTOFF) -> FockOperator:
    """Replay a compiled pulse sequence with beam splitters, phase shifters and Kerr terms."""
    space = _space_for(sequence, space, cutoff)
    total = np.eye(space.dim, dtype=complex)
    for pulse in sequence:
        if pulse.kind is PulseKind.GLOBALPHASE:
            total = np.exp(1j * pulse.angle) * total
            continue
        if pulse.kind is PulseKind.TWOBODYZZ:
            step = cross_kerr_zz(pulse.angle, pulse.targets, space)
        else:
            pair = _subsystem_modes(pulse.targets[0], space)
            if pulse.kind is PulseKind.ROTATION:
                step = fock_rotation(pulse.axis, pulse.angle, pair, space)
            else:
                step = fock_oat(pulse.axis, pulse.angle, pair, space, n)
        logger.debug(f"Fock pulse {pulse}")
        total = step.entries @ total
    return FockOperator(space, total)


# computational label -> occupations (n_a, n_b)
ENCODING = {0: (1, 1), 1: (2, 0), 2: (0, 2)}
# m-slot (m=+1, 0, -1) -> occupations
ANGULAR_OCCUPATIONS = ((2, 0), (1, 1), (0, 2))


@dataclass(frozen=True)
class SectorEmbedding:
    """The fixed-photon-number sector of ``subsystems`` mode pairs.

    For ``total_n == 2`` each pair is a qutrit; other sectors are available in the
    angular ordering (n_a = n - k, n_b = k) for diagnostics.
    """

    subsystems: int = 1
    total_n: int = 2

    def __post_init__(self):
        if self.subsystems < 1:
            raise ValidationError(f"need at least one subsystem, got {self.subsystems}")
        if self.total_n < 0:
            raise ValidationError(f"photon number must be nonnegative, got {self.total_n}")

    @property
    def local_dim(self) -> int:
        return self.total_n + 1

    def local_occupations(self, convention=COMPUTATIONAL) -> list[tuple[int, int]]:
        convention = resolve_convention(convention)
        if self.total_n != 2:
            if convention != ANGULAR:
                raise ValidationError(f"the n={self.total_n} sector has no computational labelling")
            return [(self.total_n - k, k) for k in range(self.total_n + 1)]
        ordered = [None] * 3
        for slot, occupation in enumerate(ANGULAR_OCCUPATIONS):
            ordered[convention.ordering[slot]] = occupation
        return ordered

    def indices(self, space: FockSpace, convention=COMPUTATIONAL) -> list[int]:
        if space.modes != 2 * self.subsystems:
            raise ArityError(f"{self.subsystems} subsystem(s) need {2 * self.subsystems} modes, space has {space.modes}")
        local = self.local_occupations(convention)
        if any(max(occ) > space.cutoff for occ in local):
            raise ValidationError(f"the n={self.total_n} sector exceeds cutoff {space.cutoff}")
        return [space.index(sum(combo, ())) for combo in itertools.product(local, repeat=self.subsystems)]

    def isometry(self, space: FockSpace, convention=COMPUTATIONAL) -> np.ndarray:
        indices = self.indices(space, convention)
        matrix = np.zeros((space.dim, len(indices)), dtype=complex)
        matrix[indices, range(len(indices))] = 1.0
        return matrix

    def encode_state(self, vector, space: FockSpace, convention=COMPUTATIONAL) -> FockState:
        vector = np.asarray(vector, dtype=complex)
        if vector.shape != (self.local_dim ** self.subsystems,):
            raise ShapeError(f"encoded state must have {self.local_dim ** self.subsystems} amplitudes")
        return FockState(space, self.isometry(space, convention) @ vector)

    def decode_state(self, state: FockState, convention=COMPUTATIONAL) -> np.ndarray:
        return np.asarray(state.amplitudes)[self.indices(state.space, convention)]


def sector_restrict(operator: FockOperator, embedding: SectorEmbedding | None = None,
                    convention=COMPUTATIONAL, tol: float = IDENTITY_TOL):
    """Matrix of ``operator`` on the encoded sector; raises LeakageError if it escapes."""
    space = operator.space
    embedding = embedding or SectorEmbedding(space.modes // 2)
    inside = embedding.indices(space, convention)
    outside = np.setdiff1d(np.arange(space.dim), inside)
    matrix = operator.entries

    leakage = 0.0
    if outside.size:
        leakage = max(np.linalg.norm(matrix[np.ix_(outside, inside)]), np.linalg.norm(matrix[np.ix_(inside, outside)]))
    if leakage > tol:
        raise LeakageError(f"operator leaks out of the n={embedding.total_n} sector (norm {leakage:.3e})",
                           leakage=float(leakage))

    block = matrix[np.ix_(inside, inside)]
    if unitarity_deviation(block) <= DEFAULT_TOL:
        return UnitaryMatrix(block, tol=DEFAULT_TOL)
    if max_deviation(block, block.conj().T) <= DEFAULT_TOL:
        return HermitianOperator(block, tol=DEFAULT_TOL)
    raise ValidationError("restricted operator is neither unitary nor hermitian")


def sector_playback(sequence: PulseSequence, cutoff: int = DEFAULT_CUTOFF) -> UnitaryMatrix:
    """Replay a sequence element by element on the encoded n=2 sector.

    Every optical element is built in the full Fock space, checked for leakage and
    restricted; only the 3^k blocks are multiplied, so the result is bit-identical
    for every cutoff >= 2.
    """
    space = _space_for(sequence, None, cutoff)
    embedding = SectorEmbedding(sequence.register_size)

    def block(operator: FockOperator) -> np.ndarray:
        return sector_restrict(operator, embedding).entries

    total = np.eye(3 ** sequence.register_size, dtype=complex)
    for pulse in sequence:
        if pulse.kind is PulseKind.GLOBALPHASE:
            total = np.exp(1j * pulse.angle) * total
            continue
        if pulse.kind is PulseKind.TWOBODYZZ:
            step = block(cross_kerr_zz(pulse.angle, pulse.targets, space))
        else:
            pair = _subsystem_modes(pulse.targets[0], space)
            if pulse.kind is PulseKind.ROTATION:
                step = block(fock_rotation(pulse.axis, pulse.angle, pair, space))
            else:
                step = block(oat_via_self_kerr(pulse.angle, pair, 2, space))
                if pulse.axis is not Axis.Z:
                    splitter_axis, angle = OAT_FRAMES[pulse.axis]
                    frame = block(beam_splitter(angle, splitter_axis, pair, space))
                    step = frame @ step @ frame.conj().T
        total = step @ total
    return UnitaryMatrix(total)


def fock_construction(gate_id, cutoff: int = DEFAULT_CUTOFF) -> UnitaryMatrix:
    """Sector-restricted bosonic realization of a catalogue gate (computational ordering)."""
    return sector_playback(compile(gate_id), cutoff)


@dataclass(frozen=True)
class KerrStep:
    pulse_index: int
    element: str
    modes: tuple[int, ...]
    phase: float
    duration: float | None


def kerr_schedule(sequence: PulseSequence, chi: float = 1.0, chi_cross: float | None = None) -> list[KerrStep]:
    """Optical elements and durations t = phase / chi for a compiled sequence.

    Linear elements (beam splitters, phase shifters) and global phases carry no
    Kerr duration.
    """
    chi = _check_strength(chi)
    chi_cross = _check_strength(chi if chi_cross is None else chi_cross)
    steps = []
    for index, pulse in enumerate(sequence):
        if pulse.kind is PulseKind.GLOBALPHASE:
            steps.append(KerrStep(index, 'global-phase', (), pulse.angle, None))
        elif pulse.kind is PulseKind.ROTATION:
            element = 'phase-shifter' if pulse.axis is Axis.Z else f'beam-splitter-{pulse.axis.value}'
            steps.append(KerrStep(index, element, (2 * pulse.targets[0], 2 * pulse.targets[0] + 1), pulse.angle, None))
        elif pulse.kind is PulseKind.OAT:
            a_mode, b_mode = 2 * pulse.targets[0], 2 * pulse.targets[0] + 1
            phase = kerr_phase(pulse.angle / 2)
            frame = OAT_FRAMES.get(pulse.axis)
            if frame is not None:
                steps.append(KerrStep(index, f'frame-beam-splitter-{frame[0].value}', (a_mode, b_mode), -frame[1], None))
            for mode in (a_mode, b_mode):
                steps.append(KerrStep(index, 'self-kerr', (mode,), phase, phase / chi))
            if frame is not None:
                steps.append(KerrStep(index, f'frame-beam-splitter-{frame[0].value}', (a_mode, b_mode), frame[1], None))
        else:
            mu, nu = pulse.targets
            pairs = ((2 * mu, 2 * nu), (2 * mu, 2 * nu + 1), (2 * mu + 1, 2 * nu), (2 * mu + 1, 2 * nu + 1))
            for modes, phase in zip(pairs, cross_kerr_phases(pulse.angle)):
                steps.append(KerrStep(index, 'cross-kerr', modes, phase, phase / chi_cross))
    return steps


@dataclass(frozen=True)
class HongOuMandelReport:
    axis: Axis
    amplitudes: dict
    relative_phase: complex
    reference_relative_phase: complex = -1.0

    @property
    def support(self) -> list[tuple[int, int]]:
        return [occ for occ, amp in self.amplitudes.items() if abs(amp) > 1e-12]

    @property
    def matches_reference_sign(self) -> bool:
        return abs(self.relative_phase - self.reference_relative_phase) <= 1e-12


def hong_ou_mandel(axis='x', cutoff: int = DEFAULT_CUTOFF) -> HongOuMandelReport:
    """Balanced splitter (theta = pi/2) on |1,1>.

    The reference convention is (|0,2> - |2,0>)/sqrt(2); ``relative_phase`` is
    amp(0,2)/amp(2,0) for the chosen splitter axis.
    """
    space = FockSpace(2, cutoff)
    output = beam_splitter(math.pi / 2, axis, (0, 1), space) @ FockState(space, space.basis_state((1, 1)))
    amplitudes = {occ: output.amplitude(occ) for occ in ANGULAR_OCCUPATIONS}
    ratio = amplitudes[(0, 2)] / amplitudes[(2, 0)]
    report = HongOuMandelReport(Axis.parse(axis), amplitudes, complex(ratio / abs(ratio)))
    logger.info(f"HOM ({report.axis.value} splitter): relative phase {report.relative_phase}")
    return report


def format_fock_state(state: FockState, threshold: float = 1e-14) -> str:
    """Rows of ``re im n_1 ... n_M`` for the nonzero amplitudes."""
    header = '# re im ' + ' '.join(f"n{m + 1}" for m in range(state.space.modes))
    lines = [header]
    for index in np.flatnonzero(np.abs(state.amplitudes) > threshold):
        amp = state.amplitudes[index]
        occupations = ' '.join(str(n) for n in state.space.occupations(index))
        lines.append(f"{format_real(amp.real)} {format_real(amp.imag)} {occupations}")
    return '\n'.join(lines) + '\n'


def parse_fock_state(text: str, space: FockSpace) -> FockState:
    vector = np.zeros(space.dim, dtype=complex)
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        tokens = line.split()
        if len(tokens) != 2 + space.modes:
            raise ParseError(f"expected {2 + space.modes} columns, got {len(tokens)}", line=number)
        try:
            amplitude = complex(float(tokens[0]), float(tokens[1]))
            index = space.index(int(t) for t in tokens[2:])
        except ValueError as exc:
            raise ParseError(str(exc), line=number) from exc
        vector[index] += amplitude
    return FockState(space, vector)


def _comparison(name, reference, candidate, tol, **notes) -> GateVerification:
    result = equal_up_to_phase(reference, candidate, tol)
    return GateVerification(name, result.equal_up_to_phase, result.max_residual, result.phase,
                            result.exact_phase(tol), dict(notes))


def _deviation(name, reference, candidate, tol, **notes) -> GateVerification:
    residual = max_deviation(reference, candidate)
    return GateVerification(name, residual <= tol, residual, None, residual <= tol, dict(notes))


def _verify_cutoff(cutoff: int, tol: float) -> tuple[list[GateVerification], dict]:
    items = []
    single = FockSpace(2, cutoff)
    pair = (0, 1)
    ang = SectorEmbedding(1)

    for axis in Axis:
        restricted = sector_restrict(jordan_schwinger(axis, pair, single), ang, ANGULAR)
        items.append(_deviation(f"fock:js-J{axis.value}@c{cutoff}", angular_momentum(axis), restricted, tol))
    for axis in Axis:
        for angle in (math.pi, 2 * math.pi / 3, -0.7):
            restricted = sector_restrict(fock_rotation(axis, angle, pair, single), ang, ANGULAR)
            items.append(_comparison(f"fock:rotation({axis.value},{format_real(angle)})@c{cutoff}",
                                     rotation(axis, angle), restricted, tol))
    for angle in (2 * math.pi / 3, math.pi / 3, -1.1):
        restricted = sector_restrict(oat_via_self_kerr(angle, pair, 2, single), ang, ANGULAR)
        items.append(_comparison(f"fock:oat-self-kerr({format_real(angle)})@c{cutoff}", oat(Axis.Z, angle), restricted, tol))

    pi0 = projector_pi0(pair, single)
    reference = np.eye(3) - angular_momentum_squared(Axis.Z).entries
    items.append(_deviation(f"fock:pi0@c{cutoff}", reference, sector_restrict(pi0, ang, ANGULAR), tol))
    if cutoff >= 3:
        n3 = sector_restrict(pi0, SectorEmbedding(1, total_n=3), ANGULAR).entries
        eigenvalues = np.linalg.eigvalsh(n3)
        has_two = bool(np.any(np.abs(eigenvalues - 2.0) <= tol))
        items.append(GateVerification(f"fock:pi0-n3-not-projector@c{cutoff}", has_two,
                                      float(np.min(np.abs(eigenvalues - 2.0))), None, has_two,
                                      {'eigenvalues': [format_real(v) for v in eigenvalues]}))

    double = FockSpace(4, cutoff)
    cz = sector_restrict(cz_via_cross_kerr((0, 1), double), SectorEmbedding(2))
    items.append(_comparison(f"fock:cz-cross-kerr@c{cutoff}", controlled(gate('Z')), cz, tol))

    restricted_gates = {}
    for gid in catalogue():
        restricted = fock_construction(gid, cutoff)
        restricted_gates[gid.label] = restricted.entries
        items.append(_comparison(f"fock:{gid.label}@c{cutoff}", gate(gid), restricted, tol))
    logger.info(f"Fock checks at cutoff {cutoff}: {sum(i.passed for i in items)}/{len(items)} passed")
    return items, restricted_gates


def verify_fock(tol: float = DEFAULT_TOL, cutoffs=(2, 3, 4), workers: int | None = None) -> list[GateVerification]:
    """Sector equivalence of every bosonic construction, plus cutoff independence."""
    cutoffs = tuple(cutoffs)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_cutoff = list(pool.map(lambda c: _verify_cutoff(c, tol), cutoffs))
    else:
        per_cutoff = [_verify_cutoff(c, tol) for c in cutoffs]

    results = [item for items, _ in per_cutoff for item in items]
    if len(cutoffs) > 1:
        base = per_cutoff[0][1]
        for label, reference in base.items():
            others = [restricted[label] for _, restricted in per_cutoff[1:]]
            identical = all(np.array_equal(reference, other) for other in others)
            spread = max(max_deviation(reference, other) for other in others)
            results.append(GateVerification(f"fock:cutoff-independence:{label}", identical, spread, None, identical,
                                            {'cutoffs': list(cutoffs), 'bit_identical': identical}))
    return results
