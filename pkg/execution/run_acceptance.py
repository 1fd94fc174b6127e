import math
import os
import sys

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from qpf.compiler import fourier_identity, verify_all
from qpf.config import load_settings
from qpf.entanglement_lab import (
    WeightedGraph,
    dual_preparation_check,
    ghz_recover,
    ghz_state,
    graph_state,
    jghz_terms,
    slocc_ghz_check,
    sweep_jghz,
)
from qpf.fock_backend import hong_ou_mandel, verify_fock
from qpf.qutrit_gates import gate
from qpf.reports import Report, ReportItem
from qpf.utils import configure_logging, ensure_directory, get_logger

output_dir = os.path.join(".tmp", "acceptance")

# Ensure the log directory exists
ensure_directory(".tmp")
configure_logging("INFO", os.path.join(".tmp", "execution.log"))
logger = get_logger("run_acceptance")


def _item(name, passed, residual, phase=None, **notes):
    return ReportItem(name, "pass" if passed else "fail", residual, phase, notes)


def expected_rank(phi):
    """3 off multiples of pi, 2 at odd multiples, 1 at even multiples."""
    turns = phi / math.pi
    nearest = round(turns)
    if abs(turns - nearest) > 1e-9:
        return 3
    return 1 if nearest % 2 == 0 else 2


def entanglement_items(tol):
    items = []

    recovered = ghz_recover(graph_state(WeightedGraph.ghz()))
    fidelity = recovered.fidelity(ghz_state(3))
    items.append(_item("ghz-pipeline", fidelity >= 1 - tol, 1 - fidelity))

    ranks = {}
    for row in sweep_jghz(0.0, 2 * math.pi, 25):
        if row.cut == "0|12":
            ranks[row.phi] = (row.rank, row.slocc)
    trichotomy = all(rank == expected_rank(phi) and slocc == (rank == 3) for phi, (rank, slocc) in ranks.items())
    items.append(_item("jghz-trichotomy", trichotomy, 0.0, points=len(ranks)))

    for phi in (2 * math.pi / 3, -2 * math.pi / 3):
        result = slocc_ghz_check(jghz_terms(phi))
        witness = result.witness.fidelity if result.witness else 0.0
        items.append(_item(f"slocc-ghz({phi:+.6f})", result.equivalent and witness >= 1 - tol, 1 - witness))

    hom = hong_ou_mandel("x")
    magnitudes = [abs(hom.amplitudes[(2, 0)]), abs(hom.amplitudes[(0, 2)])]
    residual = max(abs(m - 1 / math.sqrt(2)) for m in magnitudes)
    items.append(_item("hong-ou-mandel", sorted(hom.support) == [(0, 2), (2, 0)] and residual <= 1e-12, residual,
                       hom.relative_phase, reference_sign_matched=hom.matches_reference_sign))

    doubled = graph_state(WeightedGraph.ghz(multiplicity=2))
    flipped = graph_state(WeightedGraph.ghz()).apply(gate("X12"), (0,))
    overlap = abs(np.vdot(doubled.amplitudes, flipped.amplitudes))
    items.append(_item("x12-multiplicity-doubling", abs(overlap - 1) <= tol, abs(overlap - 1)))

    dual = dual_preparation_check(tol=tol)
    items.append(_item("dual-preparation", dual.passed, dual.residual, dual.phase))
    return items


def run_acceptance(directory=output_dir):
    settings = load_settings()
    report = Report("acceptance", seed=settings.seed, tol=settings.tol)
    report.extend(v.to_item() for v in verify_all(settings.tol, workers=4))
    report.add(fourier_identity(+1, settings.tol).to_item())
    report.extend(v.to_item() for v in verify_fock(settings.tol, workers=3))
    report.extend(entanglement_items(settings.tol))

    json_path, text_path = report.write(directory)
    logger.info(f"Acceptance: {report.summary['pass']} passed, {report.summary['fail']} failed")
    print(f"Report written to {json_path} and {text_path}")
    return report.exit_status


if __name__ == "__main__":
    raise SystemExit(run_acceptance())
