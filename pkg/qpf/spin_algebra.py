"""
Exact spin-1 angular momentum operators and the closed-form unitaries built from them.

Matrices are stored in the angular-momentum ordering (m=+1, m=0, m=-1) unless a
BasisConvention says otherwise. Because J_l^3 = J_l for j=1, every rotation and
one-axis twist is a quadratic polynomial in J_l:

    R(l, phi)     = exp(i phi J_l)   = I + i sin(phi) J_l + (cos(phi) - 1) J_l^2
    U_oat(l, phi) = exp(i phi J_l^2) = I + (e^{i phi} - 1) J_l^2

No generic matrix exponential is used outside ``dense_exponential``, which exists
only as an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .config import DEFAULT_TOL, IDENTITY_TOL
from .errors import DomainError, ShapeError, ValidationError
from .utils import get_logger

logger = get_logger(__name__)

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)
MAGIC_ANGLE = math.atan(math.sqrt(2.0))
QUTRIT_DIM = 3


class Axis(str, Enum):
    X = 'x'
    Y = 'y'
    Z = 'z'

    @classmethod
    def parse(cls, value) -> 'Axis':
        if isinstance(value, Axis):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise DomainError(f"unknown axis {value!r}; expected one of x, y, z") from None


class _SquareMatrix:
    """Immutable dense complex square matrix; subclasses add their invariant."""

    __slots__ = ('entries',)

    def __init__(self, entries, tol: float = IDENTITY_TOL):
        matrix = np.array(entries, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ShapeError(f"expected a square matrix, got shape {matrix.shape}")
        matrix.setflags(write=False)
        object.__setattr__(self, 'entries', matrix)
        self._validate(tol)

    def _validate(self, tol: float) -> None:
        pass

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.entries
        return self.entries.astype(dtype)

    def dagger(self) -> np.ndarray:
        return self.entries.conj().T

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"


class HermitianOperator(_SquareMatrix):
    __slots__ = ()

    def _validate(self, tol: float) -> None:
        deviation = max_deviation(self.entries, self.entries.conj().T)
        if deviation > tol:
            raise ValidationError(
                f"operator is not hermitian (max |H - H^dagger| = {deviation:.3e})",
                details={'deviation': deviation},
            )


class UnitaryMatrix(_SquareMatrix):
    __slots__ = ()

    def _validate(self, tol: float) -> None:
        deviation = unitarity_deviation(self.entries)
        if deviation > tol:
            raise ValidationError(
                f"matrix is not unitary (max |U^dagger U - I| = {deviation:.3e})",
                details={'deviation': deviation},
            )

    def __matmul__(self, other):
        product = self.entries @ np.asarray(other)
        if isinstance(other, UnitaryMatrix):
            return UnitaryMatrix(product, tol=DEFAULT_TOL)
        return product


def max_deviation(a, b) -> float:
    """Entrywise max-norm of a - b."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch {a.shape} vs {b.shape}")
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b)))


def unitarity_deviation(matrix) -> float:
    m = np.asarray(matrix)
    return max_deviation(m.conj().T @ m, np.eye(m.shape[0]))


def qutrit_count(dim: int) -> int:
    """Number of qutrits k with 3**k == dim."""
    k = 0
    size = 1
    while size < dim:
        size *= QUTRIT_DIM
        k += 1
    if size != dim or dim < 1:
        raise ShapeError(f"dimension {dim} is not a power of 3")
    return k


def _check_angle(phi) -> float:
    value = float(phi)
    if not math.isfinite(value):
        raise DomainError(f"angle must be finite, got {phi!r}")
    return value


_J_MATRICES = {
    Axis.X: np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex) / SQRT2,
    Axis.Y: np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex) / SQRT2,
    Axis.Z: np.diag([1.0, 0.0, -1.0]).astype(complex),
}


def angular_momentum(axis) -> HermitianOperator:
    """[J_l]_j for j=1."""
    return HermitianOperator(_J_MATRICES[Axis.parse(axis)])


def angular_momentum_squared(axis) -> HermitianOperator:
    j = _J_MATRICES[Axis.parse(axis)]
    return HermitianOperator(j @ j)


def casimir() -> HermitianOperator:
    """J^2 = J_x^2 + J_y^2 + J_z^2, equal to j(j+1) I = 2 I."""
    total = sum(m @ m for m in _J_MATRICES.values())
    return HermitianOperator(total)


def rotation(axis, phi) -> UnitaryMatrix:
    """R(l, phi) = exp(i phi J_l) from the cubic identity J_l^3 = J_l."""
    phi = _check_angle(phi)
    j = _J_MATRICES[Axis.parse(axis)]
    u = np.eye(3, dtype=complex) + 1j * math.sin(phi) * j + (math.cos(phi) - 1.0) * (j @ j)
    return UnitaryMatrix(u)


def oat(axis, phi) -> UnitaryMatrix:
    """One-axis twist U_oat(l, phi) = exp(i phi J_l^2)."""
    phi = _check_angle(phi)
    j = _J_MATRICES[Axis.parse(axis)]
    u = np.eye(3, dtype=complex) + (np.exp(1j * phi) - 1.0) * (j @ j)
    return UnitaryMatrix(u)


def dense_exponential(generator, phi) -> np.ndarray:
    """exp(i phi G) for hermitian G by eigendecomposition. Test oracle only."""
    g = np.asarray(generator)
    values, vectors = np.linalg.eigh(g)
    return (vectors * np.exp(1j * _check_angle(phi) * values)) @ vectors.conj().T


def theta_z_direct() -> HermitianOperator:
    """The d=3 Pegg-Barnett phase operator F J_z F^dagger, written out in m-order."""
    theta = np.array(
        [[0, 1j, -1j],
         [-1j, 0, 1j],
         [1j, -1j, 0]],
        dtype=complex,
    ) / SQRT3
    return HermitianOperator(theta)


def _anticommutator(a, b):
    return a @ b + b @ a


def theta_z_anticommutator() -> HermitianOperator:
    """Theta_z = sqrt(1/3) {J_y, J_x} - sqrt(2/3) J_y."""
    jx, jy = _J_MATRICES[Axis.X], _J_MATRICES[Axis.Y]
    theta = math.sqrt(1.0 / 3.0) * _anticommutator(jy, jx) - math.sqrt(2.0 / 3.0) * jy
    return HermitianOperator(theta)


def theta_z_magic_form(alpha: float = MAGIC_ANGLE) -> HermitianOperator:
    """cos(alpha) {J_y, J_x} - sin(alpha) J_y; equals Theta_z at the magic angle."""
    alpha = _check_angle(alpha)
    jx, jy = _J_MATRICES[Axis.X], _J_MATRICES[Axis.Y]
    return HermitianOperator(math.cos(alpha) * _anticommutator(jy, jx) - math.sin(alpha) * jy)


def theta_conjugator(alpha: float = MAGIC_ANGLE) -> UnitaryMatrix:
    """C = U_oat(y, -pi/2) R(x, -alpha); Theta_z = C J_z C^dagger."""
    return UnitaryMatrix(oat(Axis.Y, -math.pi / 2).entries @ rotation(Axis.X, -alpha).entries)


def theta_z_conjugated(alpha: float = MAGIC_ANGLE) -> HermitianOperator:
    c = theta_conjugator(alpha).entries
    return HermitianOperator(c @ _J_MATRICES[Axis.Z] @ c.conj().T)


def theta_z_squared_lmg() -> HermitianOperator:
    """Lipkin-Meshkov-Glick form of Theta_z^2: (1/3)(-sqrt(2) J_x + 2 J_y^2 + J_z^2)."""
    jx, jy, jz = (_J_MATRICES[a] for a in (Axis.X, Axis.Y, Axis.Z))
    return HermitianOperator((-SQRT2 * jx + 2.0 * (jy @ jy) + jz @ jz) / 3.0)


@dataclass(frozen=True)
class BasisConvention:
    """Where each angular-momentum slot (m=+1, m=0, m=-1) sits in storage order.

    ``ordering[s]`` is the storage index of m-slot ``s``.
    """

    name: str
    ordering: tuple[int, int, int]

    def __post_init__(self):
        if sorted(self.ordering) != [0, 1, 2]:
            raise ValidationError(f"ordering {self.ordering} is not a permutation of (0, 1, 2)")


ANGULAR = BasisConvention('angular', (0, 1, 2))
# m=0 -> 0_L, m=+1 -> 1_L, m=-1 -> 2_L
COMPUTATIONAL = BasisConvention('computational', (1, 0, 2))

CONVENTIONS = {c.name: c for c in (ANGULAR, COMPUTATIONAL)}


def convention(name) -> BasisConvention:
    if isinstance(name, BasisConvention):
        return name
    try:
        return CONVENTIONS[str(name).lower()]
    except KeyError:
        raise DomainError(f"unknown basis convention {name!r}; expected one of {sorted(CONVENTIONS)}") from None


def _permutation(source: BasisConvention, target: BasisConvention, k: int) -> np.ndarray:
    """Matrix P with P[target[s], source[s]] = 1, lifted to k qutrits."""
    single = np.zeros((3, 3))
    for slot in range(3):
        single[target.ordering[slot], source.ordering[slot]] = 1.0
    full = np.ones((1, 1))
    for _ in range(k):
        full = np.kron(full, single)
    return full


def reorder(matrix, source: BasisConvention, target: BasisConvention):
    """Simultaneous row/column permutation from one per-qutrit ordering to another."""
    m = np.asarray(matrix)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {m.shape}")
    p = _permutation(convention(source), convention(target), qutrit_count(m.shape[0]))
    result = p @ m @ p.T
    if isinstance(matrix, _SquareMatrix):
        return type(matrix)(result, tol=DEFAULT_TOL)
    return result


def reorder_state(vector, source: BasisConvention, target: BasisConvention) -> np.ndarray:
    v = np.asarray(vector, dtype=complex)
    if v.ndim != 1:
        raise ShapeError(f"expected a state vector, got shape {v.shape}")
    return _permutation(convention(source), convention(target), qutrit_count(v.shape[0])) @ v


def kron_all(*operators) -> np.ndarray:
    result = np.ones((1, 1), dtype=complex)
    for op in operators:
        result = np.kron(result, np.asarray(op))
    return result


def embed_operator(op, targets, register_size: int) -> np.ndarray:
    """Lift a k-qutrit operator acting on ``targets`` into a register of qutrits."""
    op = np.asarray(op)
    targets = tuple(int(t) for t in targets)
    k = len(targets)
    if op.shape != (3 ** k, 3 ** k):
        raise ShapeError(f"operator of shape {op.shape} does not act on {k} qutrit(s)")
    if len(set(targets)) != k or any(t < 0 or t >= register_size for t in targets):
        raise ShapeError(f"targets {targets} invalid for a register of {register_size}")

    rest = [q for q in range(register_size) if q not in targets]
    order = list(targets) + rest
    full = np.kron(op, np.eye(3 ** (register_size - k), dtype=complex))
    tensor = full.reshape([3] * (2 * register_size))
    inverse = list(np.argsort(order))
    tensor = tensor.transpose(inverse + [register_size + i for i in inverse])
    return tensor.reshape(3 ** register_size, 3 ** register_size)


def commutator(a, b) -> np.ndarray:
    a = np.asarray(a)
    b = np.asarray(b)
    return a @ b - b @ a


def property_checks(seed: int, samples: int = 100, tol: float = IDENTITY_TOL) -> list[dict]:
    """Randomized algebraic checks, one summary per property.

    Returns dicts with ``name``, ``passed``, ``residual`` (worst case) and ``cases``.
    """
    rng = np.random.default_rng(seed)
    results = []

    def record(name, residuals):
        worst = float(max(residuals)) if residuals else 0.0
        results.append({'name': name, 'passed': worst <= tol, 'residual': worst, 'cases': len(residuals)})

    jx, jy, jz = (_J_MATRICES[a] for a in (Axis.X, Axis.Y, Axis.Z))
    record('su2-commutators', [
        max_deviation(commutator(jx, jy), 1j * jz),
        max_deviation(commutator(jy, jz), 1j * jx),
        max_deviation(commutator(jz, jx), 1j * jy),
    ])
    record('cubic-identity', [max_deviation(j @ j @ j, j) for j in (jx, jy, jz)])

    additivity, unitarity = [], []
    for _ in range(samples):
        axis = Axis(rng.choice(['x', 'y', 'z']))
        phi, psi = rng.uniform(-2 * math.pi, 2 * math.pi, size=2)
        combined = rotation(axis, phi).entries @ rotation(axis, psi).entries
        additivity.append(max_deviation(combined, rotation(axis, phi + psi)))
        unitarity.append(unitarity_deviation(rotation(axis, phi)))
        unitarity.append(unitarity_deviation(oat(axis, psi)))
    record('rotation-additivity', additivity)
    record('unitarity', unitarity)

    logger.info(f"Property checks done: seed={seed}, samples={samples}")
    return results
