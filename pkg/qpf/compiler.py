"""
Pulse compiler: lowers catalogue gates to sequences of spin-1 primitives.

Primitives are rotations exp(i phi J_l), one-axis twists exp(i phi J_l^2), the two-body
coupling exp(i phi J_z (x) J_z) and explicit global phases. Sequences are time ordered:
the first pulse acts first, so playback multiplies right-to-left.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .config import DEFAULT_TOL, MAX_REGISTER
from .errors import ArityError, CapacityError, CatalogueError, DomainError, PulseParseError, QpfError, ValidationError
from .qutrit_gates import GateId, catalogue, embed, equal_up_to_phase, gate
from .reports import ReportItem
from .spin_algebra import (
    ANGULAR,
    COMPUTATIONAL,
    MAGIC_ANGLE,
    Axis,
    UnitaryMatrix,
    convention as resolve_convention,
    embed_operator,
    oat,
    reorder,
    rotation,
)
from .utils import format_real, get_logger, parse_angle

logger = get_logger(__name__)

TWO_PI = 2 * math.pi
FORMAT_HEADER = '# qpf pulse sequence v1'

# Clifford words (time ordered) for the permutations without a direct pulse form
CLIFFORD_WORDS = {
    'X01': ('X12', 'X'),
    'X02': ('X', 'X12'),
}


class PulseKind(str, Enum):
    ROTATION = 'ROTATION'
    OAT = 'OAT'
    TWOBODYZZ = 'TWOBODYZZ'
    GLOBALPHASE = 'GLOBALPHASE'


_TARGET_COUNT = {
    PulseKind.ROTATION: 1,
    PulseKind.OAT: 1,
    PulseKind.TWOBODYZZ: 2,
    PulseKind.GLOBALPHASE: 0,
}

_COST_KEYS = {
    PulseKind.ROTATION: 'rotation',
    PulseKind.OAT: 'oat',
    PulseKind.TWOBODYZZ: 'two_body',
    PulseKind.GLOBALPHASE: 'global_phase',
}


def canonical_angle(angle: float) -> float:
    """Wrap into (-2pi, 2pi) keeping the sign; every primitive is 2pi-periodic."""
    value = math.fmod(float(angle), TWO_PI)
    return value + 0.0


@dataclass(frozen=True)
class Pulse:
    kind: PulseKind
    angle: float
    targets: tuple[int, ...] = ()
    axis: Axis | None = None

    def __post_init__(self):
        kind = PulseKind(self.kind)
        object.__setattr__(self, 'kind', kind)
        if not math.isfinite(self.angle):
            raise DomainError(f"pulse angle must be finite, got {self.angle!r}")
        object.__setattr__(self, 'angle', canonical_angle(self.angle))

        targets = tuple(int(t) for t in self.targets)
        if len(targets) != _TARGET_COUNT[kind]:
            raise ArityError(f"{kind.value} takes {_TARGET_COUNT[kind]} target(s), got {len(targets)}")
        if len(set(targets)) != len(targets):
            raise ArityError(f"{kind.value} targets must be distinct, got {targets}")
        if any(t < 0 for t in targets):
            raise DomainError(f"negative target index in {targets}")
        object.__setattr__(self, 'targets', targets)

        if kind in (PulseKind.ROTATION, PulseKind.OAT):
            if self.axis is None:
                raise ValidationError(f"{kind.value} needs an axis")
            object.__setattr__(self, 'axis', Axis.parse(self.axis))
        elif self.axis is not None:
            raise ValidationError(f"{kind.value} takes no axis")

    def inverse(self) -> 'Pulse':
        return Pulse(self.kind, -self.angle, self.targets, self.axis)

    def local_unitary(self) -> np.ndarray:
        """The pulse on its own targets, angular-momentum ordering."""
        if self.kind is PulseKind.ROTATION:
            return rotation(self.axis, self.angle).entries
        if self.kind is PulseKind.OAT:
            return oat(self.axis, self.angle).entries
        if self.kind is PulseKind.TWOBODYZZ:
            m = np.array([1, 0, -1])
            return np.diag(np.exp(1j * self.angle * np.outer(m, m).ravel()))
        return np.array([[np.exp(1j * self.angle)]])

    def to_line(self) -> str:
        parts = [self.kind.value]
        if self.axis is not None:
            parts.append(self.axis.value)
        parts.append(format_real(self.angle))
        parts.extend(str(t) for t in self.targets)
        return ' '.join(parts)

    @classmethod
    def from_line(cls, line: str, line_number: int | None = None) -> 'Pulse':
        tokens = line.split()
        if not tokens:
            raise PulseParseError("empty pulse line", line=line_number)
        try:
            kind = PulseKind(tokens[0].upper())
        except ValueError:
            raise PulseParseError(f"unknown pulse kind {tokens[0]!r}", line=line_number) from None

        rest = tokens[1:]
        axis = None
        if kind in (PulseKind.ROTATION, PulseKind.OAT):
            if not rest:
                raise PulseParseError(f"{kind.value} needs an axis", line=line_number)
            axis, rest = rest[0], rest[1:]
        if not rest:
            raise PulseParseError("missing angle", line=line_number)
        try:
            angle = parse_angle(rest[0])
            targets = tuple(int(t) for t in rest[1:])
            return cls(kind, angle, targets, axis)
        except ValueError as exc:
            message = exc.message if isinstance(exc, QpfError) else str(exc)
            raise PulseParseError(message, line=line_number) from exc

    def __str__(self):
        return self.to_line()


def rotation_pulse(axis, angle, target) -> Pulse:
    return Pulse(PulseKind.ROTATION, angle, (target,), axis)


def oat_pulse(axis, angle, target) -> Pulse:
    return Pulse(PulseKind.OAT, angle, (target,), axis)


def zz_pulse(angle, pair) -> Pulse:
    return Pulse(PulseKind.TWOBODYZZ, angle, tuple(pair))


def global_phase(angle) -> Pulse:
    return Pulse(PulseKind.GLOBALPHASE, angle)


@dataclass(frozen=True)
class PulseSequence:
    pulses: tuple[Pulse, ...] = ()
    register_size: int = 1

    def __post_init__(self):
        object.__setattr__(self, 'pulses', tuple(self.pulses))
        if self.register_size < 1:
            raise ValidationError(f"register_size must be positive, got {self.register_size}")
        for pulse in self.pulses:
            if any(t >= self.register_size for t in pulse.targets):
                raise ValidationError(
                    f"pulse '{pulse}' targets a qutrit outside a register of {self.register_size}"
                )

    def __len__(self):
        return len(self.pulses)

    def __iter__(self):
        return iter(self.pulses)

    def __add__(self, other: 'PulseSequence') -> 'PulseSequence':
        """Concatenation: ``self`` runs first."""
        return PulseSequence(self.pulses + other.pulses, max(self.register_size, other.register_size))

    def inverse(self) -> 'PulseSequence':
        return PulseSequence(tuple(p.inverse() for p in reversed(self.pulses)), self.register_size)

    def to_text(self) -> str:
        lines = [f"{FORMAT_HEADER} register_size={self.register_size}"]
        lines.extend(p.to_line() for p in self.pulses)
        return '\n'.join(lines) + '\n'

    @classmethod
    def from_text(cls, text: str) -> 'PulseSequence':
        pulses = []
        register_size = None
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if line.startswith('#'):
                if 'register_size=' in line:
                    value = line.split('register_size=', 1)[1].split()[0]
                    try:
                        register_size = int(value)
                    except ValueError:
                        raise PulseParseError(f"bad register_size {value!r}", line=number) from None
                continue
            if not line:
                continue
            pulses.append(Pulse.from_line(line, number))

        if register_size is None:
            register_size = max((max(p.targets) + 1 for p in pulses if p.targets), default=1)
        try:
            return cls(tuple(pulses), register_size)
        except ValidationError as exc:
            raise PulseParseError(exc.message) from exc

    @classmethod
    def load(cls, path) -> 'PulseSequence':
        with open(path, 'r', encoding='utf-8') as handle:
            return cls.from_text(handle.read())

    def save(self, path) -> None:
        with open(path, 'w', encoding='utf-8') as handle:
            handle.write(self.to_text())


def _fourier_pulses(target: int) -> list[Pulse]:
    # F = e^{i pi/2} C U_oat(z, pi/2) with C = U_oat(y, -pi/2) R(x, -alpha)
    return [
        global_phase(math.pi / 2),
        oat_pulse(Axis.Z, math.pi / 2, target),
        rotation_pulse(Axis.X, -MAGIC_ANGLE, target),
        oat_pulse(Axis.Y, -math.pi / 2, target),
    ]


def _theta_conjugation(target: int) -> tuple[list[Pulse], list[Pulse]]:
    """Pulses for C^dagger and C, where Theta_z = C J_z C^dagger."""
    c_dagger = [oat_pulse(Axis.Y, math.pi / 2, target), rotation_pulse(Axis.X, MAGIC_ANGLE, target)]
    c = [rotation_pulse(Axis.X, -MAGIC_ANGLE, target), oat_pulse(Axis.Y, -math.pi / 2, target)]
    return c_dagger, c


def _local_pulses(name: str, target: int) -> list[Pulse]:
    if name == 'Z':
        return [rotation_pulse(Axis.Z, 2 * math.pi / 3, target)]
    if name == 'T':
        return [rotation_pulse(Axis.Z, 2 * math.pi / 9, target)]
    if name == 'X12':
        return [rotation_pulse(Axis.X, math.pi, target), global_phase(math.pi)]
    if name == 'S(1,1,0)':
        return [oat_pulse(Axis.Z, 4 * math.pi / 3, target)]
    if name == 'S(1,2,0)':
        return [oat_pulse(Axis.Z, 2 * math.pi / 3, target)]
    if name == 'F':
        return _fourier_pulses(target)
    if name == 'X':
        # exp[(4 pi i / 3) Theta_z] = C R(z, 4pi/3) C^dagger
        c_dagger, c = _theta_conjugation(target)
        return c_dagger + [rotation_pulse(Axis.Z, 4 * math.pi / 3, target)] + c
    if name in ('S(1,0,1)', 'S(1,0,2)'):
        xi = int(name[6])
        f = PulseSequence(tuple(_fourier_pulses(target)), target + 1)
        twist = oat_pulse(Axis.Z, 2 * math.pi * xi / 3, target)
        return list(f.inverse().pulses) + [twist] + list(f.pulses)
    if name in CLIFFORD_WORDS:
        pulses = []
        for word in CLIFFORD_WORDS[name]:
            pulses.extend(_local_pulses(word, target))
        return pulses
    raise CatalogueError(f"no pulse form for {name!r}")


def _check_targets(gid: GateId, targets) -> tuple[int, ...]:
    if targets is None:
        targets = tuple(range(gid.arity))
    targets = tuple(int(t) for t in targets)
    if len(targets) != gid.arity:
        raise ArityError(f"{gid.label} acts on {gid.arity} qutrit(s), got targets {targets}")
    if len(set(targets)) != len(targets):
        raise ArityError(f"{gid.label} targets must be distinct, got {targets}")
    if any(t < 0 for t in targets):
        raise DomainError(f"negative target index in {targets}")
    return targets


def compile(gate_id, targets=None) -> PulseSequence:
    """Pulse sequence realizing ``gate_id`` on ``targets`` (default 0 or (0, 1))."""
    gid = GateId.parse(gate_id)
    targets = _check_targets(gid, targets)
    register_size = max(targets) + 1

    if gid.name == 'CZ':
        pulses = [zz_pulse(2 * math.pi / 3, targets)]
    elif gid.name == 'CR':
        pulses = [zz_pulse(gid.parameter, targets)]
    elif gid.name == 'CX':
        # CX = exp[(4 pi i / 3) J_z (x) Theta_z]: conjugate the coupling on the target
        control, target = targets
        c_dagger, c = _theta_conjugation(target)
        pulses = c_dagger + [zz_pulse(4 * math.pi / 3, (control, target))] + c
    else:
        pulses = _local_pulses(gid.name, targets[0])

    sequence = PulseSequence(tuple(pulses), register_size)
    logger.debug(f"Compiled {gid.label} on {targets}: {len(sequence)} pulses")
    return sequence


def compile_cx_fourier(targets=(0, 1)) -> PulseSequence:
    """CX through local Fourier gates: (I (x) F^dagger) CZ (I (x) F)."""
    control, target = _check_targets(GateId('CX'), targets)
    fourier = PulseSequence(tuple(_fourier_pulses(target)), target + 1)
    coupling = PulseSequence((zz_pulse(2 * math.pi / 3, (control, target)),), max(control, target) + 1)
    return fourier + coupling + fourier.inverse()


def playback(sequence: PulseSequence, convention=COMPUTATIONAL) -> UnitaryMatrix:
    """Multiply pulse unitaries P_n ... P_1 and express the result in ``convention``."""
    n = sequence.register_size
    if n > MAX_REGISTER:
        raise CapacityError(f"playback is capped at {MAX_REGISTER} qutrits, got {n}")

    total = np.eye(3 ** n, dtype=complex)
    for pulse in sequence:
        if pulse.kind is PulseKind.GLOBALPHASE:
            total = np.exp(1j * pulse.angle) * total
            continue
        step = embed_operator(pulse.local_unitary(), pulse.targets, n)
        total = step @ total
    return reorder(UnitaryMatrix(total, tol=DEFAULT_TOL), ANGULAR, resolve_convention(convention))


def pulse_cost(sequence: PulseSequence) -> Counter:
    return Counter(_COST_KEYS[p.kind] for p in sequence)


def format_cost(cost: Counter) -> str:
    return ' '.join(f"{key}={cost.get(key, 0)}" for key in _COST_KEYS.values())


@dataclass(frozen=True)
class GateVerification:
    name: str
    passed: bool
    residual: float
    phase: complex | None
    exact_phase: bool
    notes: dict = field(default_factory=dict)

    def to_item(self) -> ReportItem:
        return ReportItem(self.name, 'pass' if self.passed else 'fail', self.residual, self.phase, self.notes)


def verify_gate(gate_id, tol: float = DEFAULT_TOL) -> GateVerification:
    gid = GateId.parse(gate_id)
    sequence = compile(gid)
    comparison = equal_up_to_phase(gate(gid), playback(sequence), tol)
    verification = GateVerification(
        name=f"spin:{gid.label}",
        passed=comparison.equal_up_to_phase,
        residual=comparison.max_residual,
        phase=comparison.phase,
        exact_phase=comparison.exact_phase(tol),
        notes={'pulses': len(sequence), 'cost': format_cost(pulse_cost(sequence)),
               'exact_phase': comparison.exact_phase(tol)},
    )
    if not verification.passed:
        logger.warning(f"{gid.label} failed: residual {comparison.max_residual:.3e} > {tol:.1e}")
    return verification


def verify_all(tol: float = DEFAULT_TOL, workers: int | None = None) -> list[GateVerification]:
    """playback(compile(g)) against gate(g) for the whole catalogue, in catalogue order."""
    gates = catalogue()
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda g: verify_gate(g, tol), gates))
    else:
        results = [verify_gate(g, tol) for g in gates]
    logger.info(f"Verified {len(results)} gates, {sum(r.passed for r in results)} passed")
    return results


def fourier_identity(twist_sign: int = 1, tol: float = DEFAULT_TOL) -> GateVerification:
    """U_oat(y,-pi/2) R(x,-alpha) U_oat(z, +-pi/2) e^{i pi/2} against [F]_c."""
    pulses = [global_phase(math.pi / 2), oat_pulse(Axis.Z, twist_sign * math.pi / 2, 0),
              rotation_pulse(Axis.X, -MAGIC_ANGLE, 0), oat_pulse(Axis.Y, -math.pi / 2, 0)]
    comparison = equal_up_to_phase(gate('F'), playback(PulseSequence(tuple(pulses))), tol)
    logger.info(f"Fourier identity (twist sign {twist_sign:+d}): phase {comparison.phase}")
    return GateVerification(
        name=f"fourier-identity(oat-z sign {twist_sign:+d})",
        passed=comparison.equal_up_to_phase,
        residual=comparison.max_residual,
        phase=comparison.phase,
        exact_phase=comparison.exact_phase(tol),
    )


def cost_report() -> dict:
    """Pulse counts per catalogue gate, both CX routes and the Clifford words used."""
    per_gate = {g.label: dict(pulse_cost(compile(g))) for g in catalogue()}
    return {
        'gates': per_gate,
        'cx_routes': {
            'theta-conjugation': dict(pulse_cost(compile('CX'))),
            # the Fourier route pays the extra z-twist of each F for the |m=0><m=0| projection
            'fourier': dict(pulse_cost(compile_cx_fourier())),
        },
        'clifford_words': {name: list(word) for name, word in CLIFFORD_WORDS.items()},
    }


def embed_gate(gate_id, targets, register_size: int) -> UnitaryMatrix:
    """Catalogue gate lifted into a register; the oracle for register-level playback."""
    gid = GateId.parse(gate_id)
    return embed(gate(gid), _check_targets(gid, targets), register_size)
