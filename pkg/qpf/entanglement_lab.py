"""
Entangled-state preparation and entanglement diagnostics.

Graph vertices are 0-indexed; vertex k here is vertex k + 1 in the usual 1-based
labels. States are stored in the computational ordering; angular-momentum graph
states are built with magnetic labels and reordered.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .compiler import PulseSequence, compile, playback, rotation_pulse, zz_pulse
from .config import DEFAULT_CUTOFF, DEFAULT_TOL, IDENTITY_TOL, MAX_REGISTER
from .errors import CapacityError, DomainError, GraphParseError, ShapeError, UnsupportedFormError, ValidationError
from .fock_backend import FockSpace, FockState, SectorEmbedding, fock_playback
from .qutrit_gates import GateId, embed, gate, momentum_state
from .spin_algebra import (
    ANGULAR,
    COMPUTATIONAL,
    Axis,
    UnitaryMatrix,
    convention as resolve_convention,
    embed_operator,
    kron_all,
    reorder_state,
    rotation,
)
from .utils import format_real, get_logger, parse_angle

logger = get_logger(__name__)

# vertex k here is vertex k + 1 in 1-based labels
VERTEX_LABEL_OFFSET = 1
SCHMIDT_THRESHOLD = 1e-9
GAP_RATIO = 1e3
SLOCC_THRESHOLD = 1e-9

# |x+> in m-order (m=+1, 0, -1)
X_PLUS = np.array([0.5, math.sqrt(2) / 2, 0.5], dtype=complex)


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    weight: float | None = None
    multiplicity: int | None = None

    def __post_init__(self):
        if self.u == self.v:
            raise ValidationError(f"edge endpoints must differ, got ({self.u}, {self.v})")
        if (self.weight is None) == (self.multiplicity is None):
            raise ValidationError("an edge carries exactly one of weight or multiplicity")
        if self.multiplicity is not None and self.multiplicity not in (0, 1, 2):
            raise ValidationError(f"multiplicity must be 0, 1 or 2, got {self.multiplicity}")
        if self.weight is not None and not math.isfinite(self.weight):
            raise DomainError(f"edge weight must be finite, got {self.weight}")

    @property
    def endpoints(self) -> tuple[int, int]:
        return self.u, self.v

    def to_line(self) -> str:
        if self.multiplicity is not None:
            return f"{self.u} {self.v} mult={self.multiplicity}"
        return f"{self.u} {self.v} weight={format_real(self.weight)}"


@dataclass(frozen=True)
class WeightedGraph:
    vertices: int
    edges: tuple[Edge, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'edges', tuple(self.edges))
        if self.vertices < 1:
            raise ValidationError(f"a graph needs at least one vertex, got {self.vertices}")
        for edge in self.edges:
            if not (0 <= edge.u < self.vertices and 0 <= edge.v < self.vertices):
                raise ValidationError(f"edge {edge.endpoints} outside vertices 0..{self.vertices - 1}")
        kinds = {self._edge_kind(e) for e in self.edges}
        if len(kinds) > 1:
            raise ValidationError("graph mixes real weights and multiplicities")

    @staticmethod
    def _edge_kind(edge: Edge) -> str:
        return 'multiplicity' if edge.multiplicity is not None else 'weight'

    @property
    def kind(self) -> str:
        """'multiplicity', 'weight' or 'empty'."""
        if not self.edges:
            return 'empty'
        return self._edge_kind(self.edges[0])

    @classmethod
    def ghz(cls, multiplicity: int = 1) -> 'WeightedGraph':
        """Star on three vertices centred at vertex 0; GHZ up to local Fourier gates."""
        return cls(3, (Edge(0, 1, multiplicity=multiplicity), Edge(0, 2, multiplicity=multiplicity)))

    @classmethod
    def star(cls, vertices: int, phi: float) -> 'WeightedGraph':
        return cls(vertices, tuple(Edge(0, v, weight=phi) for v in range(1, vertices)))

    def with_weight(self, phi: float) -> 'WeightedGraph':
        """Same topology, every edge weighted ``phi``."""
        return WeightedGraph(self.vertices, tuple(Edge(e.u, e.v, weight=phi) for e in self.edges))

    def to_text(self) -> str:
        lines = [f"vertices {self.vertices}", 'edges']
        lines.extend(edge.to_line() for edge in self.edges)
        return '\n'.join(lines) + '\n'

    @classmethod
    def parse(cls, text: str) -> 'WeightedGraph':
        """Grammar::

            # comment
            vertices <N>
            edges
            <u> <v> weight=<angle>      (real weights, radians or pi-expression)
            <u> <v> mult=<0|1|2>        (Clifford multiplicities)

        Vertices are 0-indexed; a graph may not mix the two edge forms.
        """
        vertices = None
        in_edges = False
        edges = []
        kind = None
        last_line = 0
        for number, raw in enumerate(text.splitlines(), start=1):
            last_line = number
            line = raw.split('#', 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            keyword = tokens[0].lower()
            if keyword == 'vertices':
                if vertices is not None:
                    raise GraphParseError("duplicate 'vertices' line", line=number)
                if len(tokens) != 2 or not tokens[1].isdigit():
                    raise GraphParseError("expected 'vertices <N>'", line=number)
                vertices = int(tokens[1])
                continue
            if keyword == 'edges':
                if vertices is None:
                    raise GraphParseError("'edges' before 'vertices'", line=number)
                in_edges = True
                continue
            if not in_edges:
                raise GraphParseError(f"unexpected line {line!r}", line=number)

            edge = cls._parse_edge(tokens, number, vertices)
            edge_kind = cls._edge_kind(edge)
            if kind is not None and edge_kind != kind:
                raise GraphParseError("graph mixes weight= and mult= edges", line=number)
            kind = edge_kind
            edges.append(edge)

        if vertices is None:
            raise GraphParseError("missing 'vertices' line", line=last_line or None)
        return cls(vertices, tuple(edges))

    @staticmethod
    def _parse_edge(tokens, number, vertices) -> Edge:
        if len(tokens) != 3 or '=' not in tokens[2]:
            raise GraphParseError("expected '<u> <v> weight=<angle>' or '<u> <v> mult=<0|1|2>'", line=number)
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise GraphParseError("vertex labels must be integers", line=number) from None
        if not (0 <= u < vertices and 0 <= v < vertices):
            raise GraphParseError(f"edge ({u}, {v}) outside vertices 0..{vertices - 1}", line=number)
        key, value = tokens[2].split('=', 1)
        try:
            if key.lower() == 'weight':
                return Edge(u, v, weight=parse_angle(value))
            if key.lower() == 'mult':
                if not value.isdigit():
                    raise ValidationError(f"multiplicity must be 0, 1 or 2, got {value!r}")
                return Edge(u, v, multiplicity=int(value))
        except ValueError as exc:
            raise GraphParseError(getattr(exc, 'message', str(exc)), line=number) from exc
        raise GraphParseError(f"unknown edge attribute {key!r}", line=number)

    @classmethod
    def load(cls, path) -> 'WeightedGraph':
        with open(path, 'r', encoding='utf-8') as handle:
            return cls.parse(handle.read())


@dataclass(frozen=True)
class MultiQutritState:
    num_parties: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        vector = np.array(self.amplitudes, dtype=complex)
        if vector.shape != (3 ** self.num_parties,):
            raise ShapeError(f"{self.num_parties} parties need {3 ** self.num_parties} amplitudes, got {vector.shape}")
        norm = np.linalg.norm(vector)
        if abs(norm - 1.0) > IDENTITY_TOL:
            raise ValidationError(f"state is not normalized (norm {norm:.15f})")
        vector.setflags(write=False)
        object.__setattr__(self, 'amplitudes', vector)

    def in_convention(self, convention) -> np.ndarray:
        return reorder_state(self.amplitudes, COMPUTATIONAL, resolve_convention(convention))

    def fidelity(self, other) -> float:
        other = other.amplitudes if isinstance(other, MultiQutritState) else np.asarray(other)
        return float(abs(np.vdot(self.amplitudes, other)) ** 2)

    def apply(self, operator, targets) -> 'MultiQutritState':
        lifted = embed_operator(np.asarray(operator), targets, self.num_parties)
        return MultiQutritState(self.num_parties, lifted @ self.amplitudes)


def _check_capacity(vertices: int) -> None:
    if vertices > MAX_REGISTER:
        raise CapacityError(f"dense states are capped at {MAX_REGISTER} parties, got {vertices}")


def _product(vectors) -> np.ndarray:
    return kron_all(*(np.asarray(v).reshape(-1, 1) for v in vectors)).ravel()


def plus_state_direct(cutoff: int = DEFAULT_CUTOFF) -> FockState:
    """(|2,0> + |1,1> + |0,2>)/sqrt(3)."""
    space = FockSpace(2, cutoff)
    return SectorEmbedding(1).encode_state(np.ones(3) / math.sqrt(3), space)


def plus_state_two_modes(cutoff: int = DEFAULT_CUTOFF) -> FockState:
    """The compiled Fourier sequence replayed optically on |1,1> = |0_L>."""
    space = FockSpace(2, cutoff)
    fourier = fock_playback(compile('F'), space)
    return fourier @ FockState(space, space.basis_state((1, 1)))


def mode_schmidt_rank(state: FockState, split: int = 1, threshold: float = SCHMIDT_THRESHOLD) -> int:
    """Schmidt rank between modes [0, split) and the rest."""
    space = state.space
    if not 0 < split < space.modes:
        raise DomainError(f"split must lie in 1..{space.modes - 1}, got {split}")
    matrix = np.asarray(state.amplitudes).reshape(space.levels ** split, -1)
    return int(np.sum(np.linalg.svd(matrix, compute_uv=False) > threshold))


def product_state(vectors) -> MultiQutritState:
    return MultiQutritState(len(vectors), _product(vectors))


def graph_state(graph: WeightedGraph) -> MultiQutritState:
    """prod_e CZ_e^{g_e} |+>^V."""
    if graph.kind == 'weight':
        raise ValidationError("graph_state needs multiplicity edges; use am_graph_state for real weights")
    _check_capacity(graph.vertices)
    cz = gate('CZ').entries
    state = _product([momentum_state(0)] * graph.vertices)
    for edge in graph.edges:
        power = np.linalg.matrix_power(cz, edge.multiplicity)
        state = embed_operator(power, edge.endpoints, graph.vertices) @ state
    return MultiQutritState(graph.vertices, state)


def ghz_state(parties: int = 3) -> MultiQutritState:
    amplitudes = np.zeros(3 ** parties, dtype=complex)
    for q in range(3):
        amplitudes[sum(q * 3 ** k for k in range(parties))] = 1 / math.sqrt(3)
    return MultiQutritState(parties, amplitudes)


def ghz_recover(state: MultiQutritState) -> MultiQutritState:
    """F^dagger on parties 1 and 2 (vertices 2 and 3 in 1-based labels)."""
    if state.num_parties != 3:
        raise ShapeError(f"GHZ recovery works on 3 parties, got {state.num_parties}")
    f_dagger = gate('F').dagger()
    return state.apply(f_dagger, (1,)).apply(f_dagger, (2,))


def x_plus_state() -> np.ndarray:
    """Maximal J_x eigenstate in m-order."""
    return X_PLUS.copy()


def am_graph_state(graph: WeightedGraph) -> MultiQutritState:
    """prod_e exp(i phi_e J_z (x) J_z) |x+>^V, returned in computational ordering."""
    if graph.kind == 'multiplicity':
        raise ValidationError("am_graph_state needs real edge weights; use graph_state for multiplicities")
    _check_capacity(graph.vertices)
    m = np.array([1, 0, -1])
    state = _product([X_PLUS] * graph.vertices)
    for edge in graph.edges:
        coupling = np.diag(np.exp(1j * edge.weight * np.outer(m, m).ravel()))
        state = embed_operator(coupling, edge.endpoints, graph.vertices) @ state
    return MultiQutritState(graph.vertices, reorder_state(state, ANGULAR, COMPUTATIONAL))


def cr_z(phi: float, pair=(0, 1), register_size: int = 2) -> UnitaryMatrix:
    """exp(i phi J_z (x) J_z) on ``pair``, computational ordering."""
    return embed(gate(GateId('CR', phi)), pair, register_size)


def reduced_density_matrix(state: MultiQutritState, keep) -> np.ndarray:
    keep = sorted(keep)
    traced = [p for p in range(state.num_parties) if p not in keep]
    tensor = np.asarray(state.amplitudes).reshape([3] * state.num_parties).transpose(keep + traced)
    matrix = tensor.reshape(3 ** len(keep), -1)
    return matrix @ matrix.conj().T


@dataclass(frozen=True)
class SchmidtCut:
    parties: tuple[int, ...]
    complement: tuple[int, ...]
    rank: int
    singular_values: tuple[float, ...]
    # smallest kept over largest discarded singular value; inf when nothing is discarded
    gap_ratio: float

    @property
    def label(self) -> str:
        """e.g. '0|12'."""
        return ''.join(map(str, self.parties)) + '|' + ''.join(map(str, self.complement))


@dataclass(frozen=True)
class SchmidtProfile:
    num_parties: int
    cuts: tuple[SchmidtCut, ...]

    def cut(self, parties) -> SchmidtCut:
        wanted = tuple(sorted(parties))
        for cut in self.cuts:
            if cut.parties == wanted or cut.complement == wanted:
                return cut
        raise DomainError(f"no bipartition {wanted} for {self.num_parties} parties")

    def ranks(self) -> tuple[int, ...]:
        return tuple(cut.rank for cut in self.cuts)


def bipartitions(num_parties: int) -> list[tuple[int, ...]]:
    """Subsets containing party 0, excluding the whole register: one per cut."""
    rest = range(1, num_parties)
    return [
        (0,) + extra
        for size in range(num_parties - 1)
        for extra in itertools.combinations(rest, size)
    ]


def _schmidt_cut(amplitudes: np.ndarray, num_parties: int, parties: tuple[int, ...], threshold: float) -> SchmidtCut:
    complement = tuple(p for p in range(num_parties) if p not in parties)
    tensor = amplitudes.reshape([3] * num_parties).transpose(parties + complement)
    singular = np.linalg.svd(tensor.reshape(3 ** len(parties), -1), compute_uv=False)
    rank = int(np.sum(singular > threshold))

    gap = math.inf
    if 0 < rank < len(singular) and singular[rank] > 0:
        gap = float(singular[rank - 1] / singular[rank])
    if gap < GAP_RATIO:
        logger.warning(f"Schmidt spectrum on cut {parties} is nearly degenerate at the threshold "
                       f"(gap ratio {gap:.3e})")
    return SchmidtCut(parties, complement, rank, tuple(float(s) for s in singular), gap)


def schmidt_profile(state: MultiQutritState, threshold: float = SCHMIDT_THRESHOLD,
                    workers: int | None = None) -> SchmidtProfile:
    """Bipartition Schmidt ranks for every nontrivial cut."""
    if not 2 <= state.num_parties <= MAX_REGISTER:
        raise ShapeError(f"Schmidt profiles need 2..{MAX_REGISTER} parties, got {state.num_parties}")
    amplitudes = np.asarray(state.amplitudes)
    cuts = bipartitions(state.num_parties)

    def evaluate(parties):
        return _schmidt_cut(amplitudes, state.num_parties, parties, threshold)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = tuple(pool.map(evaluate, cuts))
    else:
        results = tuple(evaluate(parties) for parties in cuts)
    return SchmidtProfile(state.num_parties, results)


@dataclass(frozen=True)
class ProductTerm:
    """coefficient * |a> (x) |b> (x) |c>."""

    coefficient: complex
    vectors: tuple[np.ndarray, ...]


@dataclass(frozen=True)
class SloccWitness:
    maps: tuple[np.ndarray, ...]
    weights: tuple[complex, ...]
    fidelity: float


@dataclass(frozen=True)
class SloccResult:
    equivalent: bool
    gram_determinants: tuple[float, ...]
    witness: SloccWitness | None = None

    def __bool__(self):
        return bool(self.equivalent)


def terms_to_state(terms, convention=ANGULAR) -> MultiQutritState:
    """Sum a product-term decomposition whose local vectors use ``convention``."""
    terms = list(terms)
    parties = len(terms[0].vectors)
    amplitudes = sum(term.coefficient * _product(term.vectors) for term in terms)
    return MultiQutritState(parties, reorder_state(amplitudes, resolve_convention(convention), COMPUTATIONAL))


def star_terms(graph: WeightedGraph) -> list[ProductTerm]:
    """Three-term decomposition of a 3-vertex weighted star centred at vertex 0 (m-order vectors)."""
    if graph.vertices != 3 or graph.kind == 'multiplicity':
        raise UnsupportedFormError("star decomposition needs a weighted graph on three vertices")
    weights = {}
    for edge in graph.edges:
        if 0 not in edge.endpoints:
            raise UnsupportedFormError("star decomposition needs every edge to touch vertex 0")
        leaf = edge.v if edge.u == 0 else edge.u
        weights[leaf] = weights.get(leaf, 0.0) + edge.weight
    terms = []
    for slot, m in enumerate((1, 0, -1)):
        local = np.zeros(3, dtype=complex)
        local[slot] = 1.0
        leaves = tuple(rotation(Axis.Z, m * weights.get(leaf, 0.0)).entries @ X_PLUS for leaf in (1, 2))
        terms.append(ProductTerm(X_PLUS[slot], (local,) + leaves))
    return terms


def jghz_terms(phi: float) -> list[ProductTerm]:
    """(1/2)|1,phi,phi> + (sqrt2/2)|0,x+,x+> + (1/2)|-1,-phi,-phi>, |phi> = R(z, phi)|x+>."""
    return star_terms(WeightedGraph.star(3, phi))


def slocc_ghz_check(terms, threshold: float = SLOCC_THRESHOLD) -> SloccResult:
    """GHZ-class test for sum_k c_k |a_k>|b_k>|c_k> with exactly three terms.

    Equivalent iff every coefficient is nonzero and every party's three local vectors
    are linearly independent; the witness inverts each party's vector matrix and
    rescales by 1/c_k.
    """
    terms = list(terms)
    if len(terms) != 3 or any(len(t.vectors) != 3 for t in terms):
        raise UnsupportedFormError(f"SLOCC check needs exactly 3 tripartite product terms, got {len(terms)}")

    matrices = [np.column_stack([np.asarray(t.vectors[p], dtype=complex) for t in terms]) for p in range(3)]
    determinants = tuple(float(abs(np.linalg.det(m.conj().T @ m))) for m in matrices)
    if min(determinants) <= threshold:
        return SloccResult(False, determinants)
    # a vanishing c_k leaves at most two product terms
    if min(abs(t.coefficient) for t in terms) <= threshold:
        return SloccResult(False, determinants)

    maps = tuple(np.linalg.inv(m) for m in matrices)
    weights = tuple(1 / t.coefficient for t in terms)
    state = sum(t.coefficient * _product(t.vectors) for t in terms)
    local = [np.diag(weights) @ maps[0], maps[1], maps[2]]
    mapped = kron_all(*local) @ state
    mapped = mapped / np.linalg.norm(mapped)
    fidelity = float(abs(np.vdot(ghz_state(3).amplitudes, mapped)) ** 2)
    return SloccResult(True, determinants, SloccWitness(maps, weights, fidelity))


def jghz_preparation_sequence(phi: float, parties: int = 3) -> PulseSequence:
    """Optical preparation of the weighted star from |2,0> = |m=+1> on every subsystem.

    R(y, -pi/2) turns |m=+1> into |x+>; the star couplings follow.
    """
    pulses = [rotation_pulse(Axis.Y, -math.pi / 2, p) for p in range(parties)]
    pulses.extend(zz_pulse(phi, (0, leaf)) for leaf in range(1, parties))
    return PulseSequence(tuple(pulses), parties)


def _initial_m_plus(parties: int) -> np.ndarray:
    up = np.array([1, 0, 0], dtype=complex)
    return reorder_state(_product([up] * parties), ANGULAR, COMPUTATIONAL)


@dataclass(frozen=True)
class DualPreparation:
    phi: float
    cutoff: int
    fidelity: float
    residual: float
    phase: complex
    passed: bool


def dual_preparation_check(phi: float = 2 * math.pi / 3, cutoff: int = DEFAULT_CUTOFF,
                           tol: float = DEFAULT_TOL) -> DualPreparation:
    """Two-vertex weighted graph: spin playback versus the optical replay (cross-Kerr coupling)."""
    sequence = jghz_preparation_sequence(phi, parties=2)
    spin = am_graph_state(WeightedGraph.star(2, phi))
    via_pulses = playback(sequence) @ _initial_m_plus(2)

    space = FockSpace(4, cutoff)
    embedding = SectorEmbedding(2)
    start = embedding.encode_state(_initial_m_plus(2), space)
    optical = embedding.decode_state(fock_playback(sequence, space) @ start)

    overlap = np.vdot(spin.amplitudes, optical)
    phase = complex(overlap / abs(overlap)) if abs(overlap) > 0 else 1.0
    residual = max(float(np.max(np.abs(optical - phase * spin.amplitudes))),
                   float(np.max(np.abs(via_pulses - spin.amplitudes))))
    fidelity = float(abs(overlap) ** 2)
    return DualPreparation(phi, cutoff, fidelity, residual, phase, residual <= tol)


@dataclass(frozen=True)
class SweepRow:
    phi: float
    cut: str
    rank: int
    slocc: bool


def sweep_jghz(phi_min: float = 0.0, phi_max: float = 2 * math.pi, steps: int = 25,
               threshold: float = SCHMIDT_THRESHOLD) -> list[SweepRow]:
    """Schmidt ranks of every cut and the SLOCC flag along a phi sweep of the weighted star."""
    if steps < 2:
        raise DomainError(f"a sweep needs at least 2 steps, got {steps}")
    rows = []
    for phi in np.linspace(phi_min, phi_max, steps):
        phi = float(phi)
        profile = schmidt_profile(am_graph_state(WeightedGraph.star(3, phi)), threshold)
        slocc = slocc_ghz_check(jghz_terms(phi)).equivalent
        rows.extend(SweepRow(phi, cut.label, cut.rank, slocc) for cut in profile.cuts)
    logger.info(f"Swept {steps} angles in [{phi_min}, {phi_max}]")
    return rows
