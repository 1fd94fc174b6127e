import math

import numpy as np
import pytest

from conftest import COMPOSED, EXACT, random_qutrit_state
from qpf.compiler import (
    CLIFFORD_WORDS,
    Pulse,
    PulseKind,
    PulseSequence,
    canonical_angle,
    compile,
    compile_cx_fourier,
    cost_report,
    embed_gate,
    fourier_identity,
    global_phase,
    oat_pulse,
    playback,
    pulse_cost,
    rotation_pulse,
    verify_all,
    verify_gate,
    zz_pulse,
)
from qpf.errors import ArityError, CapacityError, CatalogueError, DomainError, PulseParseError, ValidationError
from qpf.qutrit_gates import GateId, catalogue, controlled, equal_up_to_phase, gate
from qpf.spin_algebra import ANGULAR, kron_all, max_deviation


def test_compile_z():
    sequence = compile('Z', [0])
    assert sequence.pulses == (rotation_pulse('z', 2 * math.pi / 3, 0),)


def test_compile_cz():
    sequence = compile('CZ', [0, 1])
    assert sequence.pulses == (zz_pulse(2 * math.pi / 3, (0, 1)),)
    assert sequence.pulses[0].to_line() == 'TWOBODYZZ 2.0943951023931953 0 1'


def test_compile_t_is_one_rotation():
    sequence = compile('T')
    assert len(sequence) == 1
    pulse = sequence.pulses[0]
    assert pulse.kind is PulseKind.ROTATION
    assert pulse.axis.value == 'z'
    assert pulse.angle == 2 * math.pi / 9


def test_compile_x12_carries_a_global_phase():
    kinds = [p.kind for p in compile('X12')]
    assert kinds == [PulseKind.ROTATION, PulseKind.GLOBALPHASE]


def test_compile_cr_uses_the_parameter():
    sequence = compile(GateId('CR', -1.3), (1, 0))
    assert sequence.pulses == (zz_pulse(-1.3, (1, 0)),)
    assert sequence.register_size == 2


@pytest.mark.parametrize('gid', catalogue(), ids=str)
def test_soundness(gid):
    result = equal_up_to_phase(gate(gid), playback(compile(gid)), COMPOSED)
    assert result, (gid.label, result.max_residual)


@pytest.mark.parametrize('name', ['T', 'CZ', 'Z', 'F', 'S(1,0,1)', 'S(1,0,2)', 'X', 'CX', 'X12'])
def test_exact_phase_entries(name):
    verification = verify_gate(name)
    assert verification.passed
    assert verification.exact_phase


def test_verify_all_covers_catalogue_in_order():
    results = verify_all()
    assert [r.name for r in results] == [f"spin:{g.label}" for g in catalogue()]
    assert all(r.passed for r in results)


def test_verify_all_concurrent_matches_serial():
    serial = verify_all()
    concurrent = verify_all(workers=4)
    assert [(r.name, r.residual) for r in serial] == [(r.name, r.residual) for r in concurrent]


def test_verify_gate_reports_failure_at_impossible_tolerance():
    assert not verify_gate('F', tol=1e-30).passed


def test_fourier_identity_sign():
    assert fourier_identity(+1).passed
    wrong = fourier_identity(-1)
    assert not wrong.passed
    # the wrong sign differs from F by diag(1, -1, -1)
    pulses = (global_phase(math.pi / 2), oat_pulse('z', -math.pi / 2, 0),
              rotation_pulse('x', -math.atan(math.sqrt(2)), 0), oat_pulse('y', -math.pi / 2, 0))
    product = playback(PulseSequence(pulses)).entries
    assert max_deviation(product, gate('F').entries @ np.diag([1, -1, -1])) <= EXACT


def test_cx_matches_controlled_x():
    result = equal_up_to_phase(controlled(gate('X')), playback(compile('CX', [0, 1])), COMPOSED)
    assert result


def test_cx_routes_agree():
    theta_route = playback(compile('CX'))
    fourier_route = playback(compile_cx_fourier())
    assert equal_up_to_phase(theta_route, fourier_route, COMPOSED)
    f = np.kron(np.eye(3), gate('F').entries)
    assert equal_up_to_phase(f.conj().T @ gate('CZ').entries @ f, theta_route, COMPOSED)


def test_other_fourier_ordering_gives_cx_squared():
    f = np.kron(np.eye(3), gate('F').entries)
    other = f @ gate('CZ').entries @ f.conj().T
    cx = gate('CX').entries
    assert equal_up_to_phase(cx @ cx, other, COMPOSED)


@pytest.mark.parametrize('name', ['X01', 'X02'])
def test_clifford_words(name):
    word = CLIFFORD_WORDS[name]
    expected = np.eye(3)
    for step in word:
        expected = gate(step).entries @ expected
    assert max_deviation(expected, gate(name)) <= EXACT


def test_compile_errors():
    with pytest.raises(CatalogueError):
        compile('BOGUS')
    with pytest.raises(ArityError):
        compile('CZ', [0])
    with pytest.raises(ArityError):
        compile('Z', [0, 1])
    with pytest.raises(ArityError):
        compile('CX', [1, 1])
    with pytest.raises(DomainError):
        compile('T', [-1])


def test_playback_trivial_sequences(random_angles):
    assert max_deviation(playback(PulseSequence()), np.eye(3)) == 0.0
    for phi in random_angles[:20]:
        pair = PulseSequence((rotation_pulse('z', phi, 0), rotation_pulse('z', -phi, 0)))
        assert max_deviation(playback(pair), np.eye(3)) <= EXACT


def test_playback_capacity():
    with pytest.raises(CapacityError):
        playback(PulseSequence((rotation_pulse('x', 0.1, 4),), 5))


def test_playback_in_angular_convention():
    u = playback(compile('Z'), ANGULAR)
    assert max_deviation(u, np.diag(np.exp(2j * math.pi / 3 * np.array([1, 0, -1])))) <= EXACT


def test_composition(rng):
    names = ['Z', 'F', 'T', 'X', 'S(1,1,0)', 'X12']
    for _ in range(20):
        first = compile(rng.choice(names))
        second = compile(rng.choice(names))
        combined = playback(first + second).entries
        expected = playback(second).entries @ playback(first).entries
        assert max_deviation(combined, expected) <= COMPOSED


def test_inverse_sequence():
    for gid in catalogue():
        sequence = compile(gid)
        assert max_deviation(playback(sequence + sequence.inverse()), np.eye(3 ** gid.arity)) <= COMPOSED


@pytest.mark.parametrize('name', ['Z', 'X', 'F', 'T', 'S(1,0,1)', 'X01'])
def test_locality(name, rng):
    sequence = compile(name, [1])
    unitary = playback(PulseSequence(sequence.pulses, 3)).entries
    reference = gate(name).entries
    for _ in range(10):
        parts = [random_qutrit_state(rng) for _ in range(3)]
        state = unitary @ kron_all(*(p.reshape(-1, 1) for p in parts)).ravel()
        tensor = state.reshape(3, 3, 3)
        for spectator in (0, 2):
            moved = np.moveaxis(tensor, spectator, 0).reshape(3, -1)
            rho = moved @ moved.conj().T
            fidelity = np.real(np.vdot(parts[spectator], rho @ parts[spectator]))
            assert fidelity == pytest.approx(1.0, abs=COMPOSED)
        middle = np.moveaxis(tensor, 1, 0).reshape(3, -1)
        rho = middle @ middle.conj().T
        target = reference @ parts[1]
        assert np.real(np.vdot(target, rho @ target)) == pytest.approx(1.0, abs=COMPOSED)


def test_register_level_playback_matches_embedded_gate():
    for name, targets in (('CZ', (2, 0)), ('CX', (1, 2)), ('F', (1,))):
        sequence = compile(name, targets)
        padded = PulseSequence(sequence.pulses, 3)
        assert equal_up_to_phase(embed_gate(name, targets, 3), playback(padded), COMPOSED)


def test_pulse_cost_examples():
    assert pulse_cost(compile('T')) == {'rotation': 1}
    assert pulse_cost(compile('CZ')) == {'two_body': 1}
    cx_total = sum(pulse_cost(compile('CX')).values())
    assert cx_total >= sum(pulse_cost(compile('CZ')).values())


def test_cost_report_documents_both_routes():
    report = cost_report()
    assert set(report['cx_routes']) == {'theta-conjugation', 'fourier'}
    assert report['cx_routes']['fourier']['oat'] > report['cx_routes']['theta-conjugation']['oat']
    assert report['clifford_words'] == {'X01': ['X12', 'X'], 'X02': ['X', 'X12']}
    assert 'CR(z,0.62831853071795862)' in report['gates']


def test_pulse_validation():
    with pytest.raises(ArityError):
        Pulse(PulseKind.ROTATION, 0.1, (0, 1), 'x')
    with pytest.raises(ArityError):
        zz_pulse(0.1, (2, 2))
    with pytest.raises(ValidationError):
        Pulse(PulseKind.OAT, 0.1, (0,))
    with pytest.raises(ValidationError):
        Pulse(PulseKind.TWOBODYZZ, 0.1, (0, 1), 'z')
    with pytest.raises(DomainError):
        rotation_pulse('x', math.inf, 0)
    with pytest.raises(ValidationError):
        PulseSequence((rotation_pulse('x', 0.1, 2),), 2)


def test_canonical_angle():
    assert canonical_angle(2 * math.pi) == 0.0
    assert canonical_angle(-3 * math.pi) == pytest.approx(-math.pi)
    assert canonical_angle(11 * math.pi / 6) == pytest.approx(11 * math.pi / 6)
    assert rotation_pulse('z', 5 * math.pi, 0).angle == pytest.approx(math.pi)


def test_pulse_text_format():
    sequence = compile('CX', [0, 1])
    text = sequence.to_text()
    assert text.startswith('# qpf pulse sequence v1 register_size=2\n')
    parsed = PulseSequence.from_text(text)
    assert parsed == sequence


def test_pulse_file_round_trip(tmp_path):
    path = tmp_path / 'f.pulses'
    compile('F').save(path)
    assert PulseSequence.load(path) == compile('F')


def test_pulse_parse_accepts_pi_expressions():
    parsed = PulseSequence.from_text('ROTATION z 2pi/9 0\nGLOBALPHASE pi\n')
    assert parsed.register_size == 1
    assert parsed.pulses[0].angle == 2 * math.pi / 9
    assert parsed.pulses[1].kind is PulseKind.GLOBALPHASE


@pytest.mark.parametrize('text, line', [
    ('ROTATION z 0.1 0\nWOBBLE 0.2 0\n', 2),
    ('# header\n\nOAT\n', 3),
    ('ROTATION z banana 0\n', 1),
    ('ROTATION q 0.1 0\n', 1),
    ('TWOBODYZZ 0.1 0\n', 1),
])
def test_pulse_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(PulseParseError) as excinfo:
        PulseSequence.from_text(text)
    assert excinfo.value.line == line


def test_pulse_parse_rejects_targets_outside_register():
    with pytest.raises(PulseParseError):
        PulseSequence.from_text('# qpf pulse sequence v1 register_size=1\nROTATION x 0.1 3\n')
