"""Two-mode Gaussian states: representation, standard form and invariants.

All covariance matrices use quadrature ordering ``(q1, p1, q2, p2)`` and
units in which the vacuum quadrature variance equals 1. Use
:func:`to_hbar_units` / :func:`from_hbar_units` to convert to or from the
``hbar``-convention where the vacuum variance is ``hbar / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import DegenerateInvariants, NonPhysicalState

#: absolute slack for the physicality and separability predicates
PREDICATE_TOL = 1e-12
#: slack for comparisons between symplectic eigenvalues and 1
EIGEN_TOL = 1e-9

OMEGA = np.array([[0.0, 1.0], [-1.0, 0.0]])


@dataclass(frozen=True)
class TwoModeState:
    """Covariance matrix and first moments of a two-mode Gaussian state.

    Args:
        cm: real symmetric 4x4 covariance matrix
        mean: first-moment vector; defaults to zero
    """

    cm: np.ndarray
    mean: np.ndarray = field(default_factory=lambda: np.zeros(4))

    def __post_init__(self):
        cm = np.array(self.cm, dtype=float)
        mean = np.array(self.mean, dtype=float).reshape(-1)
        if cm.shape != (4, 4):
            raise ValueError(f"covariance matrix must be 4x4, got {cm.shape}")
        if mean.shape != (4,):
            raise ValueError(f"mean must have 4 entries, got {mean.shape}")
        scale = max(1.0, np.abs(cm).max())
        if np.abs(cm - cm.T).max() > 1e-12 * scale:
            raise ValueError("covariance matrix is not symmetric")
        cm.setflags(write=False)
        mean.setflags(write=False)
        object.__setattr__(self, "cm", cm)
        object.__setattr__(self, "mean", mean)

    def is_physical(self) -> bool:
        return cm_is_physical(self.cm)

    def displaced(self, d) -> "TwoModeState":
        return TwoModeState(self.cm, self.mean + np.asarray(d, dtype=float))


@dataclass(frozen=True)
class StandardFormParams:
    """Parameters ``(a, b, c_plus, c_minus)`` of the Simon standard form."""

    a: float
    b: float
    c_plus: float
    c_minus: float

    def cm(self) -> np.ndarray:
        return standard_form_cm(self.a, self.b, self.c_plus, self.c_minus)

    def state(self) -> TwoModeState:
        return TwoModeState(self.cm())

    def is_simple(self, tol: float = 1e-12) -> bool:
        return abs(self.c_plus + self.c_minus) <= tol * max(1.0, abs(self.c_plus))

    def to_simple(self) -> "SimpleFormParams":
        if not self.is_simple():
            raise ValueError(f"c_plus={self.c_plus} and c_minus={self.c_minus} are not opposite")
        return SimpleFormParams(self.a, self.b, self.c_plus)


@dataclass(frozen=True)
class SimpleFormParams:
    """Standard form with ``c_plus = -c_minus = c``."""

    a: float
    b: float
    c: float

    def to_standard(self) -> StandardFormParams:
        return StandardFormParams(self.a, self.b, self.c, -self.c)

    def cm(self) -> np.ndarray:
        return standard_form_cm(self.a, self.b, self.c, -self.c)

    def state(self) -> TwoModeState:
        return TwoModeState(self.cm())


Params = Union[StandardFormParams, SimpleFormParams]


def as_standard(p: Params) -> StandardFormParams:
    if isinstance(p, SimpleFormParams):
        return p.to_standard()
    if isinstance(p, StandardFormParams):
        return p
    a, b, cp, cm = p
    return StandardFormParams(float(a), float(b), float(cp), float(cm))


def as_cm(state) -> np.ndarray:
    """Return the covariance matrix of a state, parameter set or raw array."""
    if isinstance(state, TwoModeState):
        return state.cm
    if isinstance(state, (StandardFormParams, SimpleFormParams)):
        return state.cm()
    cm = np.asarray(state, dtype=float)
    if cm.shape != (4, 4):
        raise ValueError(f"expected a 4x4 covariance matrix, got shape {cm.shape}")
    return cm


def standard_form_cm(a, b, c_plus, c_minus) -> np.ndarray:
    return np.array(
        [
            [a, 0.0, c_plus, 0.0],
            [0.0, a, 0.0, c_minus],
            [c_plus, 0.0, b, 0.0],
            [0.0, c_minus, 0.0, b],
        ],
        dtype=float,
    )


def tmss_cm(r: float) -> np.ndarray:
    """Covariance matrix of a pure two-mode squeezed state with squeezing ``r``."""
    ch, sh = np.cosh(2 * r), np.sinh(2 * r)
    return standard_form_cm(ch, ch, sh, -sh)


def rotation(theta: float) -> np.ndarray:
    """Single-mode phase rotation acting on ``(q, p)``."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [-s, c]])


def squeezer(s: float) -> np.ndarray:
    """Single-mode squeezer: ``q -> exp(-s) q``, ``p -> exp(s) p``."""
    return np.diag([np.exp(-s), np.exp(s)])


def local_symplectic(s1: np.ndarray, s2: np.ndarray) -> np.ndarray:
    out = np.zeros((4, 4))
    out[:2, :2] = s1
    out[2:, 2:] = s2
    return out


def apply_symplectic(cm, s) -> np.ndarray:
    return s @ as_cm(cm) @ s.T


def blocks(cm):
    cm = as_cm(cm)
    return cm[:2, :2], cm[2:, 2:], cm[:2, 2:]


def seralian(cm) -> float:
    """``det A + det B + 2 det C``, the invariant entering the symplectic spectrum."""
    A, B, C = blocks(cm)
    return np.linalg.det(A) + np.linalg.det(B) + 2 * np.linalg.det(C)


def _two_mode_spectrum(delta: float, det: float):
    disc = max(delta * delta - 4 * det, 0.0)
    root = np.sqrt(disc)
    lo = max((delta - root) / 2, 0.0)
    hi = max((delta + root) / 2, 0.0)
    return np.sqrt(lo), np.sqrt(hi)


def symplectic_eigenvalues(state, check: bool = False):
    """Symplectic eigenvalues ``(nu_minus, nu_plus)`` of a two-mode covariance matrix.

    Args:
        state: :class:`TwoModeState`, parameter set or 4x4 array
        check: raise :class:`NonPhysicalState` if ``nu_minus < 1 - 1e-9``

    Returns:
        tuple: ``(nu_minus, nu_plus)`` with ``nu_minus <= nu_plus``
    """
    cm = as_cm(state)
    nu_m, nu_p = _two_mode_spectrum(seralian(cm), np.linalg.det(cm))
    if check and nu_m < 1 - EIGEN_TOL:
        raise NonPhysicalState(f"smallest symplectic eigenvalue {nu_m} < 1")
    return nu_m, nu_p


def ptranspose_eigenvalues(state, check: bool = False):
    """Symplectic eigenvalues of the partially transposed covariance matrix.

    Partial transposition flips the sign of ``det C`` in the invariant
    ``det A + det B + 2 det C``; the determinant is unchanged.
    """
    cm = as_cm(state)
    if check:
        symplectic_eigenvalues(cm, check=True)
    A, B, C = blocks(cm)
    delta = np.linalg.det(A) + np.linalg.det(B) - 2 * np.linalg.det(C)
    return _two_mode_spectrum(delta, np.linalg.det(cm))


def cm_is_physical(cm, tol: float = EIGEN_TOL) -> bool:
    """Robertson-Schrodinger test ``cm + i Omega >= 0`` for a 4x4 matrix."""
    cm = as_cm(cm)
    omega = np.kron(np.eye(2), OMEGA)
    scale = max(1.0, np.abs(cm).max())
    return bool(np.linalg.eigvalsh(cm + 1j * omega).min() >= -tol * scale)


def _eq21_slacks(a, b, c):
    return (a - 1) * (b + 1) - c * c, (a + 1) * (b - 1) - c * c


def is_physical(p: Params) -> bool:
    """Physicality of a standard-form parameter set.

    For ``c_plus = -c_minus`` this is exactly the pair of inequalities
    ``(a-1)(b+1) >= c**2`` and ``(a+1)(b-1) >= c**2``, each with slack
    ``1e-12 * max(1, (a+1)(b+1))``. For general
    ``(c_plus, c_minus)`` those inequalities are necessary but not
    sufficient, so the symplectic spectrum is checked as well.
    """
    p = as_standard(p)
    a, b, cp, cm = p.a, p.b, p.c_plus, p.c_minus
    if not all(np.isfinite([a, b, cp, cm])) or a < 0 or b < 0:
        return False
    # the slack is 1e-12 relative to the size of the products; pure states sit
    # on the boundary and rounding grows with the matrix entries
    tol = PREDICATE_TOL * max(1.0, (a + 1) * (b + 1))
    for c in (cp, cm):
        if min(_eq21_slacks(a, b, c)) < -tol:
            return False
    if p.is_simple():
        return True
    # exact condition: nu_minus**2 >= 1, i.e. g(1) >= 0 with sum of squares >= 2
    det = (a * b - cp * cp) * (a * b - cm * cm)
    delta = a * a + b * b + 2 * cp * cm
    if a * b - cp * cp <= 0 or a * b - cm * cm <= 0:
        return False
    return 1 - delta + det >= -PREDICATE_TOL * max(1.0, det) and delta >= 2 - PREDICATE_TOL


def require_physical(p: Params) -> StandardFormParams:
    sp = as_standard(p)
    if not is_physical(sp):
        raise NonPhysicalState(f"parameters {sp} violate the uncertainty principle")
    return sp


def is_separable(p) -> bool:
    """PPT test ``a + b + c**2 - 1 <= a b`` for simple-form parameters."""
    if isinstance(p, StandardFormParams):
        p = p.to_simple()
    elif not isinstance(p, SimpleFormParams):
        p = SimpleFormParams(*map(float, p))
    require_physical(p)
    return p.a + p.b + p.c * p.c - 1 <= p.a * p.b + PREDICATE_TOL


def is_entangled_cm(state) -> bool:
    """PPT test for an arbitrary two-mode covariance matrix."""
    return ptranspose_eigenvalues(state)[0] < 1 - PREDICATE_TOL


def to_standard_form(state) -> StandardFormParams:
    """Reduce a physical two-mode covariance matrix to ``(a, b, c_plus, c_minus)``.

    Each local block is first brought to a multiple of the identity by the
    symplectic ``sqrt(a) A^(-1/2)`` (any real 2x2 matrix of unit determinant
    is symplectic); the correlation block is then diagonalised by local
    rotations, i.e. its singular values give ``|c_plus|`` and ``|c_minus|``.
    This avoids the near-double root of the invariant quadratic when
    ``c_plus**2 ~ c_minus**2``. Sign convention: ``c_plus >= |c_minus|``;
    the sign of ``c_minus`` is that of ``det C``. Ties
    ``|c_plus| = |c_minus|`` with ``det C < 0`` therefore give
    ``c_plus >= 0 >= c_minus``.

    Raises:
        NonPhysicalState: if the matrix is not a valid covariance matrix
        DegenerateInvariants: if a local block is not positive definite
    """
    cm = as_cm(state)
    if not cm_is_physical(cm):
        raise NonPhysicalState("covariance matrix violates the uncertainty principle")
    A, B, C = blocks(cm)
    wa, va = np.linalg.eigh(A)
    wb, vb = np.linalg.eigh(B)
    if wa.min() <= 0 or wb.min() <= 0:
        raise DegenerateInvariants("local blocks must be positive definite")
    a = np.sqrt(wa[0] * wa[1])
    b = np.sqrt(wb[0] * wb[1])
    s1 = np.sqrt(a) * (va / np.sqrt(wa)) @ va.T
    s2 = np.sqrt(b) * (vb / np.sqrt(wb)) @ vb.T
    sv = np.linalg.svd(s1 @ C @ s2.T, compute_uv=False)
    det_c = np.linalg.det(C)
    c_plus = sv[0]
    c_minus = np.copysign(sv[1], det_c) if det_c != 0 else 0.0
    return StandardFormParams(float(a), float(b), float(c_plus), float(c_minus))


def random_physical_params(rng: np.random.Generator, max_ab: float = 6.0) -> StandardFormParams:
    """Draw a physical standard form by rejection sampling.

    The draw covers entangled and separable states; ``c_plus >= |c_minus|``
    is not enforced so that both orderings are exercised.
    """
    while True:
        a, b = rng.uniform(1.0, max_ab, size=2)
        bound = np.sqrt(max(min((a - 1) * (b + 1), (a + 1) * (b - 1)), 0.0))
        cp, cm = rng.uniform(-bound, bound, size=2)
        p = StandardFormParams(float(a), float(b), float(cp), float(cm))
        if is_physical(p):
            return p


def random_physical_simple(rng: np.random.Generator, max_ab: float = 6.0) -> SimpleFormParams:
    a, b = rng.uniform(1.0, max_ab, size=2)
    bound = np.sqrt(min((a - 1) * (b + 1), (a + 1) * (b - 1)))
    return SimpleFormParams(float(a), float(b), float(rng.uniform(0.0, bound)))


def to_hbar_units(cm, hbar: float = 1.0) -> np.ndarray:
    """Rescale a covariance matrix to vacuum variance ``hbar / 2``."""
    return as_cm(cm) * hbar / 2


def from_hbar_units(cm, hbar: float = 1.0) -> np.ndarray:
    return np.asarray(cm, dtype=float) * 2 / hbar
