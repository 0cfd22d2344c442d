"""The quadratic-family view of the eigenproblem.

For real ``lam`` the symmetric matrix ``Q_lam = U^2 - (lam - V)^2`` is
singular exactly at eigenvalues of ``K``, and for a unit vector ``psi`` the
scalar equation ``(psi, Q_lam psi) = 0`` has the two roots ``p_-(psi)`` and
``p_+(psi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import pencil
from .errors import ConditionViolated, DegenerateDenominator, DimensionMismatch, NegativeRadicand
from .pencil import MINUS, PLUS, OperatorPair


@dataclass(frozen=True)
class RayleighTriple:
    """``(psi, V psi)``, ``(V psi, V psi)`` and ``(U psi, U psi)`` for unit ``psi``."""

    v_mean: float
    w_mean: float
    chi: float

    @property
    def radicand(self) -> float:
        return self.v_mean**2 + self.chi - self.w_mean


def _vec(pair: OperatorPair, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if x.size != pair.dim:
        raise DimensionMismatch(f"vector of length {x.size} for dimension {pair.dim}")
    return x


def q_matrix(pair: OperatorPair, lam: float) -> np.ndarray:
    """``Q_lam = U^2 - (V - lam I)^2`` as a symmetric matrix."""
    s = pair.v - lam * np.eye(pair.dim)
    return pair.u2 - s @ s


def q_value(pair: OperatorPair, mu: float, psi, phi) -> float:
    """``(U psi, U phi) - ((V - mu) psi, (V - mu) phi)``."""
    psi, phi = _vec(pair, psi), _vec(pair, phi)
    s = pair.v - mu * np.eye(pair.dim)
    return float(psi @ pair.u2 @ phi - (s @ psi) @ (s @ phi))


def q_residual(pair: OperatorPair, lam: float, psi) -> float:
    """``||Q_lam psi|| / ||psi||``; vanishes on first components of eigenvectors."""
    psi = _vec(pair, psi)
    return float(np.linalg.norm(q_matrix(pair, lam) @ psi) / np.linalg.norm(psi))


def rayleigh_triple(pair: OperatorPair, psi) -> RayleighTriple:
    psi = _vec(pair, psi)
    psi = psi / np.linalg.norm(psi)
    vpsi = pair.v @ psi
    return RayleighTriple(
        v_mean=float(psi @ vpsi),
        w_mean=float(vpsi @ vpsi),
        chi=float(psi @ pair.u2 @ psi),
    )


def p_functionals(pair: OperatorPair, psi) -> tuple[float, float]:
    """Return ``(p_-(psi), p_+(psi))``, the roots of ``(psi, Q_lam psi) = 0``.

    ``psi`` is normalized first.
    """
    tr = rayleigh_triple(pair, psi)
    rad = tr.radicand
    if rad < 0:
        raise NegativeRadicand(rad)
    root = math.sqrt(rad)
    return tr.v_mean - root, tr.v_mean + root


def _projected_extreme(pair: OperatorPair, frame: np.ndarray, sign: str, mu: float) -> float:
    """Exact ``max p_+`` (or ``min p_-``) over the span of ``frame``.

    For ``lam`` right of the definiteness interval, ``p_+(psi) <= lam`` holds
    iff ``(psi, Q_lam psi) <= 0``; so the maximum of ``p_+`` on a subspace is
    the point where the largest eigenvalue of the compressed ``Q_lam`` changes
    sign.  The minus side is the mirror image.
    """
    q, _ = np.linalg.qr(frame)

    def top(lam):
        m = q.T @ q_matrix(pair, lam) @ q
        return float(np.linalg.eigvalsh(0.5 * (m + m.T))[-1])

    # every p_+ lies below ||V|| + sqrt(||V||^2 + ||U^2||)
    vn = float(np.linalg.norm(pair.v, 2))
    reach = vn + math.sqrt(vn * vn + float(np.linalg.norm(pair.u2, 2))) + 1.0
    if sign == PLUS:
        a, b = mu, reach
    else:
        a, b = -reach, mu
    fa, fb = top(a), top(b)
    if (fa if sign == PLUS else fb) <= 0:
        # mu itself is not inside the definiteness interval for this frame
        raise ConditionViolated(1.0, "reference mu outside the definiteness interval")
    return brentq(top, a, b, xtol=1e-14, rtol=4 * np.finfo(float).eps)


def minimax_estimate(
    pair: OperatorPair,
    k: int,
    sign: str = PLUS,
    samples: int = 64,
    seed: int = 0,
    include_eigen_frames: bool = True,
) -> float:
    """Subspace minimax estimate of ``lam_k^+`` (or max-min for ``lam_k^-``).

    Ranges over ``samples`` random ``k``-frames and, unless disabled, two
    structured frames: the first components of the ``k`` extreme eigenvectors
    and the ``k`` extreme eigenvectors of ``Q`` at the exact eigenvalue.
    Random frames give values on the outer side of ``lam_k``; the eigenvector
    frames make the estimate attain it.
    """
    if sign not in (PLUS, MINUS):
        raise ValueError(f"sign must be {PLUS!r} or {MINUS!r}")
    if not 1 <= k <= pair.dim:
        raise ValueError(f"k must lie in [1, {pair.dim}]")
    interval = pencil.definiteness_interval(pair)
    if interval is None:
        raise pencil.DefinitenessEmpty("no mu with ||(V - mu) U^-1|| < 1")
    mu = interval.mu_star
    rng = np.random.default_rng(seed)
    frames = [rng.standard_normal((pair.dim, k)) for _ in range(samples)]
    if include_eigen_frames:
        spec = pencil.spectrum(pair, mu=mu)
        pts = spec.plus() if sign == PLUS else spec.minus()
        frames.append(np.column_stack([p.psi1 for p in pts[:k]]))
        lam_k = pts[k - 1].value
        _, vecs = np.linalg.eigh(q_matrix(pair, lam_k))
        frames.append(vecs[:, :k])
    values = [_projected_extreme(pair, f, sign, mu) for f in frames]
    return min(values) if sign == PLUS else max(values)


def lambda_derivative(pair0: OperatorPair, delta_v, t: float, lam: float, psi1) -> float:
    """Slope of an eigenvalue curve along ``V_t = V_0 + t dV``.

    ``(psi, (V_t - lam) dV psi) / (psi, (V_t - lam) psi)`` evaluated at the
    first component ``psi1`` of the eigenvector at ``t``.
    """
    psi = _vec(pair0, psi1)
    dv = pencil.as_symmetric(delta_v)
    a = pair0.v + t * dv - lam * np.eye(pair0.dim)
    den = float(psi @ a @ psi)
    if abs(den) < 1e-12 * float(psi @ psi):
        raise DegenerateDenominator(den)
    return float(psi @ a @ dv @ psi) / den
