import cmath
import itertools
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import COMPOSED, EXACT
from qpf.errors import CatalogueError, DomainError, ShapeError, ValidationError
from qpf.qutrit_gates import (
    CR_SAMPLE_ANGLES,
    ETA,
    OMEGA,
    SINGLE_QUTRIT,
    GateId,
    catalogue,
    clifford_catalogue,
    clifford_conjugation_check,
    controlled,
    embed,
    equal_up_to_phase,
    gate,
    momentum_state,
    pauli_product,
)
from qpf.spin_algebra import ANGULAR, COMPUTATIONAL, max_deviation, oat, reorder, rotation, unitarity_deviation


def test_gate_id_parse():
    assert GateId.parse(' x12 ').name == 'X12'
    assert GateId.parse('S(2,0,0)') == GateId('X12')
    cr = GateId.parse('CR(z, 2pi/3)')
    assert cr.name == 'CR'
    assert cr.parameter == pytest.approx(2 * math.pi / 3, abs=0)
    assert cr.label == 'CR(z,2.0943951023931953)'


@pytest.mark.parametrize('text', ['BOGUS', 'S(1,0,0)', 'CR', 'S(0,0,0)'])
def test_unknown_gates_are_catalogue_errors(text):
    with pytest.raises(CatalogueError):
        GateId.parse(text)


def test_gate_parameters_are_validated():
    with pytest.raises(DomainError):
        GateId('CR')
    with pytest.raises(DomainError):
        GateId('CR', math.nan)
    with pytest.raises(DomainError):
        GateId('Z', 1.0)
    with pytest.raises(DomainError):
        GateId.parse('CR(z, tau)')


def test_catalogue_contents():
    labels = [g.label for g in catalogue()]
    for name in SINGLE_QUTRIT + ('CZ', 'CX'):
        assert name in labels
    assert sum(1 for g in catalogue() if g.name == 'CR') == len(CR_SAMPLE_ANGLES)
    assert GateId('T') not in clifford_catalogue()


@pytest.mark.parametrize('gid', catalogue(), ids=str)
def test_catalogue_gates_are_unitary(gid):
    u = gate(gid)
    assert u.dim == 3 ** gid.arity
    assert unitarity_deviation(u) <= EXACT


def test_gate_examples():
    assert_allclose(gate('Z').entries, np.diag([1, OMEGA, OMEGA ** 2]), atol=EXACT)
    t = np.diag([1, cmath.exp(2j * math.pi / 9), cmath.exp(-2j * math.pi / 9)])
    assert_allclose(gate('T').entries, t, atol=EXACT)
    f = gate('F').entries
    assert_allclose(f @ f.conj().T, np.eye(3), atol=EXACT)


def test_x_is_the_cyclic_shift():
    x = gate('X').entries
    for q in range(3):
        assert_allclose(x @ np.eye(3)[q], np.eye(3)[(q + 1) % 3], atol=EXACT)


@pytest.mark.parametrize('name, swapped', [('X01', (0, 1)), ('X02', (0, 2)), ('X12', (1, 2))])
def test_transpositions(name, swapped):
    p = gate(name).entries
    a, b = swapped
    assert_allclose(p @ np.eye(3)[a], np.eye(3)[b], atol=EXACT)
    assert_allclose(p @ p, np.eye(3), atol=EXACT)


def test_fourier_powers():
    f = gate('F').entries
    assert equal_up_to_phase(np.eye(3), np.linalg.matrix_power(f, 4))
    f2 = f @ f
    for q in range(3):
        assert_allclose(f2 @ np.eye(3)[q], np.eye(3)[(-q) % 3], atol=EXACT)


def test_s_gates_compose_to_identity_and_match_twists():
    product = gate('S(1,1,0)').entries @ gate('S(1,2,0)').entries
    assert equal_up_to_phase(np.eye(3), product)
    twist = reorder(oat('z', 4 * math.pi / 3), ANGULAR, COMPUTATIONAL)
    assert max_deviation(twist, gate('S(1,1,0)')) <= EXACT
    twist = reorder(oat('z', 2 * math.pi / 3), ANGULAR, COMPUTATIONAL)
    assert max_deviation(twist, gate('S(1,2,0)')) <= EXACT


@pytest.mark.parametrize('xi', [1, 2])
def test_shift_squeeze_is_fourier_conjugate(xi):
    f = gate('F').entries
    twist = reorder(oat('z', 2 * math.pi * xi / 3), ANGULAR, COMPUTATIONAL).entries
    result = equal_up_to_phase(f @ twist @ f.conj().T, gate(f'S(1,0,{xi})'))
    assert result
    assert result.exact_phase()


def test_permutation_composition():
    x01, x12, x02 = (gate(n).entries for n in ('X01', 'X12', 'X02'))
    assert max_deviation(x01 @ x12 @ x01, x02) <= EXACT


def test_t_gate_powers():
    t = gate('T').entries
    assert equal_up_to_phase(np.eye(3), np.linalg.matrix_power(t, 9))
    t3 = np.diag(np.linalg.matrix_power(t, 3))
    roots = np.array([1, OMEGA, OMEGA ** 2])
    for entry in t3:
        assert np.min(np.abs(roots - entry)) <= EXACT
    assert abs(ETA ** 9 - 1) <= EXACT


def test_cr_matches_angular_definition():
    for phi in CR_SAMPLE_ANGLES:
        m = np.array([1, 0, -1])
        angular = np.diag(np.exp(1j * phi * np.outer(m, m).ravel()))
        assert max_deviation(reorder(gate(GateId('CR', phi)), COMPUTATIONAL, ANGULAR), angular) <= EXACT


def test_cr_at_two_thirds_is_cz():
    assert max_deviation(gate(GateId('CR', 2 * math.pi / 3)), gate('CZ')) <= EXACT


def test_momentum_states():
    assert_allclose(momentum_state(0), np.ones(3) / math.sqrt(3), atol=EXACT)
    assert_allclose(momentum_state(1), np.array([1, OMEGA, OMEGA ** 2]) / math.sqrt(3), atol=EXACT)
    for q, r in itertools.product(range(3), repeat=2):
        assert abs(np.vdot(momentum_state(q), momentum_state(r)) - (q == r)) <= EXACT
    with pytest.raises(DomainError):
        momentum_state(3)


def test_controlled_examples():
    cz = np.diag([1, 1, 1, 1, OMEGA, OMEGA ** 2, 1, OMEGA ** 2, OMEGA])
    assert_allclose(controlled(gate('Z')).entries, cz, atol=EXACT)
    assert_allclose(controlled(np.eye(3)).entries, np.eye(9), atol=EXACT)
    cx = controlled(gate('X')).entries
    for q in range(3):
        basis = np.kron(np.eye(3)[1], np.eye(3)[q])
        assert_allclose(cx @ basis, np.kron(np.eye(3)[1], np.eye(3)[(q + 1) % 3]), atol=EXACT)


def test_controlled_validates_input():
    with pytest.raises(ShapeError):
        controlled(np.eye(9))
    with pytest.raises(ValidationError):
        controlled(2 * np.eye(3))


def test_pauli_products():
    assert_allclose(pauli_product(0, 0).entries, np.eye(3), atol=EXACT)
    xz = pauli_product(1, 1).entries
    for q in range(3):
        assert_allclose(xz @ np.eye(3)[q], OMEGA ** q * np.eye(3)[(q + 1) % 3], atol=EXACT)
    with pytest.raises(DomainError):
        pauli_product(3, 0)


def test_pauli_group_closure():
    products = {(j, k): pauli_product(j, k).entries for j, k in itertools.product(range(3), repeat=2)}
    for a, b in itertools.product(products.values(), repeat=2):
        found = any(
            max_deviation(a @ b, OMEGA ** s * p) <= EXACT
            for p in products.values()
            for s in range(3)
        )
        assert found


def test_equal_up_to_phase_examples():
    z = gate('Z')
    theta = 0.77
    result = equal_up_to_phase(z, np.exp(1j * theta) * z.entries)
    assert result
    assert abs(result.phase - np.exp(1j * theta)) <= EXACT
    assert not result.exact_phase()

    x12 = equal_up_to_phase(gate('X12'), reorder(rotation('x', math.pi), ANGULAR, COMPUTATIONAL))
    assert x12
    assert abs(x12.phase + 1) <= EXACT

    assert not equal_up_to_phase(gate('Z'), gate('X'))


def test_equal_up_to_phase_reports_plain_bools():
    for a, b in ((gate('Z'), gate('Z')), (gate('Z'), gate('X')), (np.eye(3), gate('X'))):
        report = equal_up_to_phase(a, b)
        assert isinstance(bool(report), bool)
        assert type(report.equal_up_to_phase) is bool
        assert type(report.exact_phase()) is bool
        assert type(report.max_residual) is float
    assert bool(equal_up_to_phase(gate('Z'), gate('Z'))) is True
    assert type(clifford_conjugation_check(gate('F'), gate('Z')).__bool__()) is bool


def test_equal_up_to_phase_flags_orthogonal_matrices():
    result = equal_up_to_phase(np.eye(3), gate('X'))
    assert not result
    assert not result.phase_defined
    assert result.phase is None


def test_equal_up_to_phase_shape_mismatch():
    with pytest.raises(ShapeError):
        equal_up_to_phase(np.eye(3), np.eye(9))


def test_fourier_conjugates_z_to_x_squared():
    result = clifford_conjugation_check(gate('F'), gate('Z'))
    assert result
    assert (result.j, result.k, result.omega_power) == (2, 0, 0)
    # exp[(4 pi i / 3) Theta_z] is X itself
    f = gate('F').entries
    assert max_deviation(f.conj().T @ gate('Z').entries @ f, gate('X')) <= EXACT


def test_conjugation_check_examples():
    assert clifford_conjugation_check(gate('T'), gate('Z'))
    assert not clifford_conjugation_check(gate('T'), gate('X'))


def test_every_clifford_normalizes_the_pauli_group():
    for gid in clifford_catalogue():
        for j, k in itertools.product(range(3), repeat=2):
            assert clifford_conjugation_check(gate(gid), pauli_product(j, k)), (gid.label, j, k)


def test_embed_places_gate_on_target():
    lifted = embed(gate('X'), (1,), 2)
    assert max_deviation(lifted, np.kron(np.eye(3), gate('X').entries)) == 0.0
    assert unitarity_deviation(embed(gate('CZ'), (2, 0), 3)) <= COMPOSED
