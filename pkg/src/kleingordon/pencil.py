"""Finite-dimensional operator pairs and the phase-space operator K = JL.

The quadratic problem ``(U^2 - (lam - V)^2) psi = 0`` is linearized as
``K = [[V, I], [U^2, V]]`` acting on ``[psi; (lam - V) psi]``.  ``K`` is
selfadjoint in the indefinite product ``[x, y] = (Jx, y)`` with
``J = [[0, I], [I, 0]]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import linalg
from scipy.linalg import lapack
from scipy.optimize import bisect

from .errors import (
    CholeskyFailure,
    ConditionViolated,
    DefinitenessEmpty,
    DimensionMismatch,
    PositivityFailure,
)

PLUS = "plus"
MINUS = "minus"

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
BETA_TOL = 1e-12


def as_symmetric(a) -> np.ndarray:
    """Return ``a`` as a float square matrix averaged with its transpose."""
    m = np.array(a, dtype=float)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return 0.5 * (m + m.T)


def sym_function(a: np.ndarray, fn) -> np.ndarray:
    """Apply ``fn`` to the eigenvalues of the symmetric matrix ``a``."""
    w, q = np.linalg.eigh(a)
    return (q * fn(w)) @ q.T


@dataclass(frozen=True)
class OperatorPair:
    """Kinetic-plus-mass square ``u2`` (positive definite) and potential ``v``."""

    u2: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u2 = as_symmetric(self.u2)
        v = as_symmetric(self.v)
        if u2.shape != v.shape:
            raise DimensionMismatch(f"u2 has shape {u2.shape}, v has shape {v.shape}")
        _, info = lapack.dpotrf(u2, lower=1)
        if info != 0:
            raise PositivityFailure(f"u2 is not positive definite (pivot {info - 1})")
        object.__setattr__(self, "u2", u2)
        object.__setattr__(self, "v", v)

    @property
    def dim(self) -> int:
        return self.u2.shape[0]

    @cached_property
    def _u2_eig(self):
        return np.linalg.eigh(self.u2)

    @cached_property
    def u(self) -> np.ndarray:
        """Principal square root of ``u2``."""
        w, q = self._u2_eig
        return (q * np.sqrt(w)) @ q.T

    @cached_property
    def u_inv(self) -> np.ndarray:
        w, q = self._u2_eig
        return (q / np.sqrt(w)) @ q.T

    @cached_property
    def u_inv_norm(self) -> float:
        """``||U^-1|| = 1 / sqrt(min eig u2)``."""
        return float(1.0 / math.sqrt(self._u2_eig[0][0]))

    @cached_property
    def scale(self) -> float:
        """Magnitude used for residual tolerances."""
        return float(np.linalg.norm(self.u2, 2) + np.linalg.norm(self.v, 2) + 1.0)

    @cached_property
    def _g_quadratic(self):
        # g(mu)^2 = lam_max(A - 2 mu B + mu^2 C)
        w_inv = self.u_inv
        vw = self.v @ w_inv
        return vw.T @ vw, w_inv @ vw, w_inv @ w_inv

    def condition_norm_squared(self, mu: float) -> float:
        a, b, c = self._g_quadratic
        m = a - (2.0 * mu) * b + (mu * mu) * c
        return float(np.linalg.eigvalsh(0.5 * (m + m.T))[-1])

    def with_potential(self, v) -> "OperatorPair":
        return OperatorPair(self.u2, v)

    def phase_operator(self) -> np.ndarray:
        """The non-symmetric matrix ``K = [[V, I], [U^2, V]]``."""
        n = self.dim
        eye = np.eye(n)
        return np.block([[self.v, eye], [self.u2, self.v]])


def j_matrix(n: int) -> np.ndarray:
    z = np.zeros((n, n))
    eye = np.eye(n)
    return np.block([[z, eye], [eye, z]])


@dataclass(frozen=True)
class DefinitenessInterval:
    lo: float
    hi: float
    beta_min: float
    mu_star: float

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def __contains__(self, mu: float) -> bool:
        return self.lo < mu < self.hi


@dataclass(frozen=True)
class EigenPoint:
    value: float
    signature: str
    vector: np.ndarray = field(repr=False)
    residual: float

    @property
    def psi1(self) -> np.ndarray:
        return self.vector[: self.vector.size // 2]

    @property
    def psi2(self) -> np.ndarray:
        return self.vector[self.vector.size // 2 :]


@dataclass(frozen=True)
class PhaseSpaceSpectrum:
    points: list[EigenPoint]
    mu_used: float
    definite: bool = True

    @property
    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.points])

    @property
    def signatures(self) -> list[str]:
        return [p.signature for p in self.points]

    def plus(self) -> list[EigenPoint]:
        """Plus points ascending, ``lam_1^+ <= lam_2^+ <= ...``."""
        return [p for p in self.points if p.signature == PLUS]

    def minus(self) -> list[EigenPoint]:
        """Minus points descending, ``lam_1^- >= lam_2^- >= ...``."""
        return [p for p in reversed(self.points) if p.signature == MINUS]

    def plus_values(self) -> np.ndarray:
        return np.array([p.value for p in self.plus()])

    def minus_values(self) -> np.ndarray:
        return np.array([p.value for p in self.minus()])


def condition_norm(pair: OperatorPair, mu: float) -> float:
    """``g(mu) = ||(V - mu I) U^-1||_2``."""
    a = (pair.v - mu * np.eye(pair.dim)) @ pair.u_inv
    return float(np.linalg.norm(a, 2))


def _search_radius(pair: OperatorPair) -> float:
    # g(mu) >= (|mu| - ||V||) / ||U||, so g > 1 outside this radius
    return float(np.linalg.norm(pair.v, 2) + np.linalg.norm(pair.u, 2) + 1.0)


def golden_section(f, a: float, b: float, tol: float = 1e-12, maxiter: int = 200):
    """Minimize a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``."""
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(maxiter):
        if b - a <= tol * (1.0 + abs(a) + abs(b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    x = c if fc <= fd else d
    return x, min(fc, fd)


def minimize_condition(pair: OperatorPair, tol: float = 1e-9) -> tuple[float, float]:
    """Return ``(mu_star, min g)`` by golden-section search on the convex ``g``."""
    radius = _search_radius(pair)
    center = float(np.trace(pair.v)) / pair.dim
    mu, _ = golden_section(pair.condition_norm_squared, center - radius, center + radius, tol=tol)
    return mu, condition_norm(pair, mu)


def definiteness_interval(
    pair: OperatorPair, tol: float = 1e-10, beta_tol: float = BETA_TOL
) -> DefinitenessInterval | None:
    """Open interval of ``mu`` with ``g(mu) < 1``; ``None`` when empty.

    ``g`` is convex, so a golden-section search locates its minimum and the
    two level-one crossings are then bracketed and bisected.  A minimum
    within ``beta_tol`` of one is treated as a closed interval: at an exact
    plus/minus collision roundoff leaves a sliver of width ``~sqrt(eps)``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    mu_star, beta = minimize_condition(pair)
    if beta >= 1.0 - beta_tol:
        return None
    radius = _search_radius(pair)
    center = float(np.trace(pair.v)) / pair.dim
    h = lambda mu: pair.condition_norm_squared(mu) - 1.0  # noqa: E731
    lo = bisect(h, center - radius, mu_star, xtol=tol)
    hi = bisect(h, mu_star, center + radius, xtol=tol)
    if hi - lo < tol:
        return None
    return DefinitenessInterval(lo=lo, hi=hi, beta_min=beta, mu_star=mu_star)


def _cholesky_upper(a: np.ndarray) -> np.ndarray:
    c, info = lapack.dpotrf(a, lower=0, clean=1)
    if info > 0:
        raise CholeskyFailure(info - 1)
    if info < 0:
        raise ValueError("invalid argument passed to dpotrf")
    return c


def spectrum(pair: OperatorPair, mu: float | None = None) -> PhaseSpaceSpectrum:
    """Classified spectrum of ``K`` through the definite pencil ``L - mu J``.

    With ``L - mu J = R^T R`` the symmetric matrix ``T = R^-T J R^-1`` has
    eigenvalues ``theta = 1 / (lam - mu)``; the Krein signature of the
    eigenvector ``x = R^-1 y`` is the sign of ``theta``.
    """
    if mu is None:
        interval = definiteness_interval(pair)
        if interval is None:
            raise DefinitenessEmpty("no mu with ||(V - mu) U^-1|| < 1")
        mu = interval.mu_star
    n = pair.dim
    eye = np.eye(n)
    shifted = pair.v - mu * eye
    l_mu = np.block([[pair.u2, shifted], [shifted, eye]])
    r = _cholesky_upper(l_mu)
    r_inv = linalg.solve_triangular(r, np.eye(2 * n))
    jr = np.vstack([r_inv[n:], r_inv[:n]])
    t = r_inv.T @ jr
    theta, y = np.linalg.eigh(0.5 * (t + t.T))
    values = mu + 1.0 / theta
    vectors = r_inv @ y
    k = pair.phase_operator()
    order = np.argsort(values, kind="stable")
    points = []
    for i in order:
        x = vectors[:, i]
        x = x / np.linalg.norm(x)
        res = float(np.linalg.norm(k @ x - values[i] * x))
        points.append(EigenPoint(float(values[i]), PLUS if theta[i] > 0 else MINUS, x, res))
    return PhaseSpaceSpectrum(points=points, mu_used=float(mu), definite=True)


def eig_general(pair: OperatorPair) -> tuple[np.ndarray, np.ndarray]:
    """Unstructured eigen-decomposition of ``K``, sorted by (real, imag)."""
    w, x = np.linalg.eig(pair.phase_operator())
    order = np.lexsort((w.imag, w.real))
    return w[order], x[:, order]


def spectrum_general(pair: OperatorPair) -> np.ndarray:
    """Eigenvalues of ``K`` without any definiteness assumption."""
    w = np.linalg.eigvals(pair.phase_operator())
    return w[np.lexsort((w.imag, w.real))]


def gap_radius(pair: OperatorPair, mu: float) -> float:
    """Radius around ``mu`` free of spectrum: ``(1 - g(mu)) / ||U^-1||``."""
    beta = condition_norm(pair, mu)
    if beta >= 1.0:
        raise ConditionViolated(beta)
    return (1.0 - beta) / pair.u_inv_norm


def gap_radius_printed(pair: OperatorPair, mu: float) -> float:
    """The alternative form ``||U^-1||^-1 / (1 - g(mu))``, kept for comparison."""
    beta = condition_norm(pair, mu)
    if beta >= 1.0:
        raise ConditionViolated(beta)
    return 1.0 / (pair.u_inv_norm * (1.0 - beta))


def margin(pair: OperatorPair) -> float:
    """``M``: the gap radius at the best-conditioned ``mu``."""
    interval = definiteness_interval(pair)
    if interval is None:
        raise DefinitenessEmpty("no mu with ||(V - mu) U^-1|| < 1")
    return gap_radius(pair, interval.mu_star)
