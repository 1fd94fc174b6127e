import io
import json
from pathlib import Path

import pytest

from qpf.cli import main

GRAPHS_DIR = Path(__file__).resolve().parent.parent / 'graphs'


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_gates_lists_the_catalogue():
    code, text = run('gates')
    assert code == 0
    assert text.splitlines()[0].startswith('gate')
    assert any(line.startswith('CZ ') for line in text.splitlines())
    assert 'X12' in text


def test_gates_show_matrix():
    code, text = run('gates', '--show-matrix', 'T')
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == '[T]_c'
    assert len(lines) == 4


def test_unknown_gate_is_a_usage_error(capsys):
    code, _ = run('gates', '--show-matrix', 'BOGUS')
    assert code == 2
    assert 'error:' in capsys.readouterr().err


def test_unknown_verb_is_a_usage_error():
    assert run('teleport')[0] == 2


def test_compile_cz():
    code, text = run('compile', 'CZ', '0', '1')
    assert code == 0
    assert 'TWOBODYZZ 2.0943951023931953 0 1' in text
    assert 'two_body=1' in text


def test_compile_t_is_one_rotation():
    code, text = run('compile', 'T', '0')
    assert code == 0
    pulses = [line for line in text.splitlines() if not line.startswith('#')]
    assert len(pulses) == 1
    assert pulses[0].startswith('ROTATION z ')


def test_compile_prints_kerr_schedule():
    code, text = run('compile', 'CZ', '0', '1', '--chi', '1', '--chi-cross', '0.5')
    assert code == 0
    assert sum(1 for line in text.splitlines() if line.startswith('# pulse 0 ')) == 4


def test_compile_then_playback_against_gate(tmp_path):
    path = tmp_path / 'cz.pulses'
    assert run('compile', 'CZ', '0', '1', '--out', str(path))[0] == 0
    assert path.exists()
    code, text = run('playback', str(path), '--against', 'CZ')
    assert code == 0
    assert 'PASS' in text


def test_playback_against_wrong_arity(tmp_path):
    path = tmp_path / 't.pulses'
    run('compile', 'T', '0', '--out', str(path))
    assert run('playback', str(path), '--against', 'CZ')[0] == 2


def test_playback_missing_file(tmp_path):
    assert run('playback', str(tmp_path / 'absent.pulses'))[0] == 2


def test_verify_spin_passes_and_writes_reports(tmp_path):
    reports = tmp_path / 'out'
    code, text = run('verify', '--scope', 'spin', '--report-dir', str(reports))
    assert code == 0
    assert text.rstrip().endswith('0 failed')
    data = json.loads((reports / 'verify-spin.json').read_text())
    assert data['format'] == 'qpf-report/1'
    assert data['summary']['fail'] == 0
    assert (reports / 'verify-spin.txt').exists()


def test_verify_fails_at_impossible_tolerance(tmp_path):
    code, text = run('verify', '--tol', '1e-30', '--scope', 'spin', '--report-dir', str(tmp_path))
    assert code == 1
    assert 'FAIL' in text


def test_verify_report_dir_from_environment(tmp_path):
    assert run('verify', '--scope', 'spin')[0] == 0
    assert (tmp_path / 'reports' / 'verify-spin.json').exists()


def test_state_ghz():
    code, text = run('state', 'ghz')
    assert code == 0
    indices = [int(line.split()[0]) for line in text.splitlines() if line.startswith('  ') and '|' in line
               and 'cut' not in line]
    assert indices == [0, 13, 26]
    assert text.count('rank 3') == 3


def test_state_am_graph_at_pi():
    code, text = run('state', 'am-graph', '--graph', str(GRAPHS_DIR / 'star3.g'), '--phi', 'pi')
    assert code == 0
    assert 'cut 0|12: rank 2' in text
    assert 'slocc ghz-equivalent: false' in text


def test_state_am_graph_needs_a_weight():
    assert run('state', 'am-graph')[0] == 2


def test_state_plus2mode():
    code, text = run('state', 'plus2mode', '--cutoff', '2')
    assert code == 0
    assert 'mode schmidt rank (a|b): 3' in text


@pytest.mark.parametrize('axis, matched', [('x', 'false'), ('y', 'true')])
def test_state_hom(axis, matched):
    code, text = run('state', 'hom', '--axis', axis)
    assert code == 0
    assert f"sign matched: {matched}" in text


def test_sweep_csv():
    code, text = run('sweep', '--steps', '2')
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == 'phi,cut,rank,slocc'
    assert len(lines) == 1 + 2 * 3
    assert all(line.split(',')[2] == '1' for line in lines[1:])


def test_sweep_rejects_single_step():
    assert run('sweep', '--steps', '1')[0] == 2


def test_sweep_to_file(tmp_path):
    path = tmp_path / 'sweep.csv'
    assert run('sweep', '--steps', '5', '--out', str(path))[0] == 0
    assert path.read_text().startswith('phi,cut,rank,slocc\n')


def test_costs():
    code, text = run('costs')
    assert code == 0
    assert 'CX via theta-conjugation:' in text
    assert 'X01 = X12 then X' in text


def test_bad_graph_file(tmp_path):
    path = tmp_path / 'bad.g'
    path.write_text('vertices 3\nedges\n0 1 colour=red\n')
    assert run('state', 'graph', '--graph', str(path))[0] == 2


def test_commands_are_deterministic(tmp_path):
    assert run('compile', 'CX', '0', '1') == run('compile', 'CX', '0', '1')
    assert run('sweep', '--steps', '7') == run('sweep', '--steps', '7')
    first, second = tmp_path / 'a', tmp_path / 'b'
    run('verify', '--scope', 'spin', '--report-dir', str(first))
    run('verify', '--scope', 'spin', '--report-dir', str(second))
    strip = lambda path: {k: v for k, v in json.loads(path.read_text()).items() if k != 'created_at'}
    assert strip(first / 'verify-spin.json') == strip(second / 'verify-spin.json')


def test_verify_fock_scope(tmp_path):
    code, text = run('verify', '--scope', 'fock', '--report-dir', str(tmp_path))
    assert code == 0
    data = json.loads((tmp_path / 'verify-fock.json').read_text())
    names = {item['name']: item['status'] for item in data['items']}
    cross_kerr = [name for name in names if name.startswith('fock:cz-cross-kerr@c')]
    self_kerr = [name for name in names if name.startswith('fock:oat-self-kerr')]
    assert cross_kerr and self_kerr
    assert all(names[name] == 'pass' for name in cross_kerr + self_kerr)
    independence = [item for item in data['items'] if item['name'].startswith('fock:cutoff-independence:')]
    assert independence and all(item['notes']['bit_identical'] for item in independence)


@pytest.mark.parametrize('argv', [('compile', 'BOGUS', '0'), ('compile', 'CZ', '0'), ('compile', 'T', '0', '1')])
def test_compile_errors_exit_two(argv, capsys):
    assert run(*argv)[0] == 2
    assert 'error:' in capsys.readouterr().err
