"""Quality measures of two-mode Gaussian states.

Conventions: vacuum quadrature variance 1. The EPR variance is
``(Var(q1 - q2) + Var(p1 + p2)) / 2`` with vacuum value 2 and value
``2 exp(-2 r)`` for a two-mode squeezed state. Log-negativity is returned in
nats unless ``base=2``; entanglement of formation is in bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import NonPhysicalState, OptimizerDidNotConverge
from .gaussian import (
    as_cm,
    cm_is_physical,
    local_symplectic,
    ptranspose_eigenvalues,
    rotation,
    squeezer,
    to_standard_form,
)


def _physical_cm(state) -> np.ndarray:
    cm = as_cm(state)
    if not cm_is_physical(cm):
        raise NonPhysicalState("covariance matrix violates the uncertainty principle")
    return cm


def purity(state) -> float:
    """``tr(rho**2) = 1 / sqrt(det cm)`` for a two-mode Gaussian state."""
    cm = _physical_cm(state)
    return float(1.0 / np.sqrt(np.linalg.det(cm)))


def log_negativity(state, base: float = np.e) -> float:
    """``max(0, -log(nu_tilde_minus))`` from the partially transposed spectrum."""
    cm = _physical_cm(state)
    nu = ptranspose_eigenvalues(cm)[0]
    return float(max(0.0, -np.log(nu) / np.log(base)))


def epr_variance(state) -> float:
    """Unoptimised EPR variance ``(Var(q1 - q2) + Var(p1 + p2)) / 2``."""
    s = as_cm(state)
    return float(0.5 * (s[0, 0] + s[2, 2] - 2 * s[0, 2] + s[1, 1] + s[3, 3] + 2 * s[1, 3]))


@dataclass(frozen=True)
class EprResult:
    """Optimised EPR variance and the local operation attaining it.

    Attributes:
        value: minimal EPR variance over local Gaussian unitaries
        local_params: ``(phi1, s1, theta1, s2, theta2)``; mode 1 gets
            ``R(phi1) S(s1) R(theta1)`` and mode 2 gets ``S(s2) R(theta2)``
    """

    value: float
    local_params: tuple


def local_operation(params) -> np.ndarray:
    """4x4 local symplectic for the ``EprResult.local_params`` layout."""
    phi1, s1, th1, s2, th2 = params
    return local_symplectic(
        rotation(phi1) @ squeezer(s1) @ rotation(th1),
        squeezer(s2) @ rotation(th2),
    )


def _epr_objective(cm):
    # EPR variance = (wq^T cm wq + wp^T cm wp) / 2, where wq, wp collect the
    # q and p rows of the two local symplectics (mode 2 q row negated)
    s = np.asarray(cm, dtype=float)
    s00, s11, s22, s33 = (float(s[i, i]) for i in range(4))
    s01, s02, s03 = 2 * float(s[0, 1]), 2 * float(s[0, 2]), 2 * float(s[0, 3])
    s12, s13, s23 = 2 * float(s[1, 2]), 2 * float(s[1, 3]), 2 * float(s[2, 3])

    def quad(w):
        w0, w1, w2, w3 = w
        return (
            s00 * w0 * w0 + s11 * w1 * w1 + s22 * w2 * w2 + s33 * w3 * w3
            + s01 * w0 * w1 + s02 * w0 * w2 + s03 * w0 * w3
            + s12 * w1 * w2 + s13 * w1 * w3 + s23 * w2 * w3
        )

    def f(x):
        phi1, s1, th1, s2, th2 = x
        e1m, e1p = math.exp(-s1), math.exp(s1)
        e2m, e2p = math.exp(-s2), math.exp(s2)
        c, sn = math.cos(phi1), math.sin(phi1)
        ct, st = math.cos(th1), math.sin(th1)
        c2, sn2 = math.cos(th2), math.sin(th2)
        # rows of R(phi1) S(s1) R(theta1)
        u0, u1 = c * e1m, sn * e1p
        v0, v1 = -sn * e1m, c * e1p
        wq = (u0 * ct - u1 * st, u0 * st + u1 * ct, -e2m * c2, -e2m * sn2)
        wp = (v0 * ct - v1 * st, v0 * st + v1 * ct, -e2p * sn2, e2p * c2)
        return 0.5 * (quad(wq) + quad(wp))

    return f


# deterministic multi-start points; the first is the identity
_STARTS = np.array(
    [
        [0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.5, 0.0, -0.5, 0.0],
        [0.0, -0.5, 0.0, 0.5, 0.0],
        [0.7, 0.3, -0.4, 0.3, 0.9],
        [-1.1, -0.3, 0.6, 0.2, -0.5],
    ]
)


def epr_opt(state, tol: float = 1e-8, maxiter: int = 20000) -> EprResult:
    """Minimise the EPR variance over local Gaussian unitaries.

    Nelder-Mead from five deterministic starts (one is the identity), then a
    restart from the best point. The global phase-conjugate rotation leaves
    the objective unchanged, so five parameters span all local operations.

    Raises:
        OptimizerDidNotConverge: if the best run and its restart differ by
            more than ``tol`` or hit the iteration budget
    """
    cm = _physical_cm(state)
    f = _epr_objective(cm)
    opts = {"xatol": 1e-7, "fatol": tol * 1e-3, "maxiter": maxiter, "maxfev": maxiter}
    best = None
    for x0 in _STARTS:
        res = optimize.minimize(f, x0, method="Nelder-Mead", options=opts)
        if best is None or res.fun < best.fun:
            best = res
    polish = optimize.minimize(f, best.x, method="Nelder-Mead", options=opts)
    if not polish.success or best.fun - polish.fun > tol:
        raise OptimizerDidNotConverge(
            f"EPR minimisation unstable: {best.fun} -> {polish.fun} ({polish.message})"
        )
    x = polish.x if polish.fun <= best.fun else best.x
    return EprResult(float(min(polish.fun, best.fun)), tuple(float(v) for v in x))


def epr_opt_squeezing(state):
    """EPR variance minimised over local squeezings of the standard form.

    With ``u = s1 + s2`` the inner minimum over ``s1 - s2`` is analytic,
    leaving a one-dimensional problem
    ``min_u sqrt(a^2 + b^2 + 2ab cosh 2u) - c_plus e^-u + c_minus e^u``.

    Returns:
        tuple: ``(value, u_opt)``
    """
    p = to_standard_form(state)
    a, b, cp, cm = p.a, p.b, p.c_plus, p.c_minus

    def f(u):
        return np.sqrt(a * a + b * b + 2 * a * b * np.cosh(2 * u)) - cp * np.exp(-u) + cm * np.exp(u)

    grid = np.linspace(-12.0, 12.0, 481)
    vals = f(grid)
    i = int(np.argmin(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = optimize.minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-13})
    if res.fun <= vals[i]:
        return float(res.fun), float(res.x)
    return float(vals[i]), float(grid[i])


def eof_pure(cosh2r) -> float:
    """Entanglement of formation (bits) of a two-mode squeezed state with ``cosh(2r) = x``."""
    x = float(cosh2r)
    if x <= 1.0:
        return 0.0
    cp, cm = (x + 1) / 2, (x - 1) / 2
    return float(cp * np.log2(cp) - cm * np.log2(cm))


def eof_from_delta(delta: float) -> float:
    """EoF of the pure two-mode squeezed state with EPR variance ``2 * delta``."""
    if delta >= 1.0:
        return 0.0
    return eof_pure((1 / delta + delta) / 2)


def eof(state) -> float:
    """Entanglement of formation (bits) from the minimal EPR variance.

    The EPR variance is minimised over local squeezings of the standard
    form and mapped to the pure two-mode squeezed state with the same value.
    For symmetric states this equals the exact formula based on the smallest
    partially transposed symplectic eigenvalue. For asymmetric states it can
    vanish on entangled states; see :func:`gaussian_eof` for a measure that
    is zero exactly on separable states.
    """
    cm = _physical_cm(state)
    p = to_standard_form(cm)
    if abs(p.a - p.b) <= 1e-12 * max(p.a, p.b):
        delta = ptranspose_eigenvalues(cm)[0]
    else:
        delta = epr_opt_squeezing(p.cm())[0] / 2
    return eof_from_delta(delta)


# Gaussian entanglement of formation -------------------------------------


def _interval_corr2(lo, mh, k1, k2, phi):
    """Squared correlation coefficient of ``lo + mh R diag(k) R^T mh``; vectorised."""
    c, s = np.cos(phi), np.sin(phi)
    # R diag(k) R^T entries
    k00 = k1 * c * c + k2 * s * s
    k11 = k1 * s * s + k2 * c * c
    k01 = (k1 - k2) * c * s
    m00, m01, m11 = mh[0, 0], mh[0, 1], mh[1, 1]
    # mh K mh with symmetric mh
    t00 = m00 * m00 * k00 + 2 * m00 * m01 * k01 + m01 * m01 * k11
    t11 = m01 * m01 * k00 + 2 * m01 * m11 * k01 + m11 * m11 * k11
    t01 = m00 * m01 * k00 + (m00 * m11 + m01 * m01) * k01 + m01 * m11 * k11
    g00, g11, g01 = lo[0, 0] + t00, lo[1, 1] + t11, lo[0, 1] + t01
    return g01 * g01 / (g00 * g11)


def gaussian_eof(state, return_cosh: bool = False):
    """Gaussian entanglement of formation (bits).

    Minimum of the pure-state entanglement over pure Gaussian states ``g``
    with ``g <= cm``. For a standard form the search is restricted to pure
    states without q-p correlations, ``g = g_q (+) inv(g_q)``, so the
    constraint becomes ``inv(cm_p) <= g_q <= cm_q`` and the objective is
    the squared correlation coefficient of ``g_q``.

    Args:
        state: physical two-mode state
        return_cosh: also return ``cosh(2 r0)`` of the optimal pure component
    """
    cm = _physical_cm(state)
    if ptranspose_eigenvalues(cm)[0] >= 1 - 1e-12:
        return (0.0, 1.0) if return_cosh else 0.0
    p = to_standard_form(cm)
    sq = np.array([[p.a, p.c_plus], [p.c_plus, p.b]])
    sp = np.array([[p.a, p.c_minus], [p.c_minus, p.b]])
    lo = np.linalg.inv(sp)
    w, v = np.linalg.eigh(sq - lo)
    mh = v @ np.diag(np.sqrt(np.clip(w, 0.0, None))) @ v.T

    k = np.linspace(0.0, 1.0, 21)
    phis = np.linspace(0.0, np.pi, 73)[:-1]
    K1, K2, PH = np.meshgrid(k, k, phis, indexing="ij")
    vals = _interval_corr2(lo, mh, K1, K2, PH)
    order = np.argsort(vals, axis=None)[:6]

    def f(x):
        return _interval_corr2(lo, mh, x[0], x[1], x[2])

    best = float(vals.flat[order[0]])
    for idx in order:
        x0 = np.array([K1.flat[idx], K2.flat[idx], PH.flat[idx]])
        res = optimize.minimize(
            f,
            x0,
            method="L-BFGS-B",
            bounds=[(0.0, 1.0), (0.0, 1.0), (None, None)],
            options={"ftol": 1e-15, "gtol": 1e-13, "maxiter": 2000},
        )
        best = min(best, float(res.fun))
    x = 1.0 / np.sqrt(1.0 - best)
    e = eof_pure(x)
    return (e, float(x)) if return_cosh else e
