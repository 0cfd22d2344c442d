"""Enclosures for eigenvalues under a change of potential ``V -> V + dV``."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import models, pencil
from .errors import ConditionViolated, FamilyUndefined, NonCommuting, NotComparable, OutOfValidity
from .pencil import OperatorPair

ABSOLUTE = "absolute"
REFINED = "refined"
RELATIVE = "relative"
COMBINED = "combined"
NV = "nv"


@dataclass(frozen=True)
class PerturbationBound:
    kind: str
    lower: float
    upper: float
    hypotheses_ok: bool = True
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(f"empty enclosure [{self.lower}, {self.upper}]")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, x: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= x <= self.upper + slack

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class GammaPair:
    """Relative constants with ``gamma_- |V| <= dV <= gamma_+ |V|`` for ``V <= 0``."""

    gamma_minus: float
    gamma_plus: float


def _norm(a) -> float:
    return float(np.linalg.norm(pencil.as_symmetric(a), 2))


def extremes(delta_v) -> tuple[float, float]:
    """``(delta_-, delta_+)``: the extreme Rayleigh quotients of ``dV``."""
    w = np.linalg.eigvalsh(pencil.as_symmetric(delta_v))
    return float(w[0]), float(w[-1])


def _margins(pair: OperatorPair | None, dv_norm: float) -> tuple[bool, dict]:
    if pair is None:
        return True, {}
    interval = pencil.definiteness_interval(pair)
    if interval is None:
        return False, {"M": None}
    m = pencil.gap_radius(pair, interval.mu_star)
    v_min = float(np.linalg.eigvalsh(pair.v)[0])
    # minus eigenvalues sit below mu_star - M; the shifted potential must stay above that
    marg1 = v_min - dv_norm >= interval.mu_star - m
    marg2 = dv_norm <= m
    return bool(marg1), {"M": m, "marg1": bool(marg1), "marg2": bool(marg2)}


def absolute_bound(lam: float, delta_v, pair: OperatorPair | None = None) -> PerturbationBound:
    """``[lam - ||dV||, lam + ||dV||]``; ``pair`` (unperturbed) enables the margin checks."""
    nrm = _norm(delta_v)
    ok, detail = _margins(pair, nrm)
    detail["norm_delta_v"] = nrm
    return PerturbationBound(ABSOLUTE, lam - nrm, lam + nrm, ok, detail)


def refined_bound(lam: float, delta_v, pair: OperatorPair | None = None) -> PerturbationBound:
    """``[lam + delta_-, lam + delta_+]``."""
    lo, hi = extremes(delta_v)
    ok, detail = _margins(pair, max(abs(lo), abs(hi)))
    detail.update(delta_minus=lo, delta_plus=hi)
    return PerturbationBound(REFINED, lam + lo, lam + hi, ok, detail)


def joint_diagonal(a: np.ndarray, b: np.ndarray, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Diagonals of two commuting symmetric matrices in a common eigenbasis."""
    a, b = pencil.as_symmetric(a), pencil.as_symmetric(b)
    scale = 1.0 + np.linalg.norm(a, 2) + np.linalg.norm(b, 2)
    if np.linalg.norm(a @ b - b @ a, 2) > tol * scale**2:
        raise NonCommuting("potential and perturbation do not commute")
    if np.count_nonzero(a - np.diag(np.diag(a))) == 0 and np.count_nonzero(b - np.diag(np.diag(b))) == 0:
        return np.diag(a).copy(), np.diag(b).copy()
    # a generic combination separates every joint eigenspace
    _, q = np.linalg.eigh(a + (np.sqrt(2.0) - 1.0) * b)
    return np.einsum("ij,ik,kj->j", q, a, q), np.einsum("ij,ik,kj->j", q, b, q)


def relative_gammas(v, delta_v, tol: float = 1e-10) -> GammaPair:
    """Tightest ``gamma_- <= gamma_+`` with ``-gamma_- V <= dV <= -gamma_+ V``.

    One-dimensional inputs are read as diagonals.  Entries where both ``V``
    and ``dV`` vanish impose nothing.
    """
    v_arr, d_arr = np.asarray(v, dtype=float), np.asarray(delta_v, dtype=float)
    if v_arr.ndim == 1 and d_arr.ndim == 1:
        if v_arr.shape != d_arr.shape:
            raise ValueError("diagonals differ in length")
        vd, dd = v_arr, d_arr
    else:
        vd, dd = joint_diagonal(v_arr, d_arr, tol)
    scale = 1.0 + np.max(np.abs(vd)) + np.max(np.abs(dd))
    if np.any(vd > tol * scale):
        raise NotComparable("potential is not non-positive")
    depth = -vd
    zero = depth <= tol * scale
    if np.any(zero & (np.abs(dd) > tol * scale)):
        raise NotComparable("perturbation nonzero where the potential vanishes")
    if np.all(zero):
        return GammaPair(0.0, 0.0)
    ratios = dd[~zero] / depth[~zero]
    return GammaPair(float(ratios.min()), float(ratios.max()))


def _family(lambda_family: Callable[[float], float], eps: float) -> float:
    try:
        return float(lambda_family(eps))
    except (OutOfValidity, ValueError, ArithmeticError) as exc:
        raise FamilyUndefined(f"eigenvalue family undefined at coupling {eps:.6g}: {exc}") from exc


def relative_bound(lambda_family: Callable[[float], float], gammas: GammaPair) -> PerturbationBound:
    """Enclosure between the family values at couplings ``1 - gamma_-`` and ``1 - gamma_+``."""
    a = _family(lambda_family, 1.0 - gammas.gamma_minus)
    b = _family(lambda_family, 1.0 - gammas.gamma_plus)
    return PerturbationBound(
        RELATIVE,
        min(a, b),
        max(a, b),
        True,
        {"gamma_minus": gammas.gamma_minus, "gamma_plus": gammas.gamma_plus},
    )


def combined_bound(
    lambda_family: Callable[[float], float],
    gammas: GammaPair,
    delta_minus: float,
    delta_plus: float,
) -> PerturbationBound:
    """For ``delta_- + gamma_- |V| <= dV <= delta_+ + gamma_+ |V|``."""
    rel = relative_bound(lambda_family, gammas)
    return PerturbationBound(
        COMBINED,
        delta_minus + rel.lower,
        delta_plus + rel.upper,
        True,
        {**rel.detail, "delta_minus": delta_minus, "delta_plus": delta_plus},
    )


def intersect(*bounds: PerturbationBound, kind: str = COMBINED) -> PerturbationBound:
    """The common part of several valid enclosures."""
    lo = max(b.lower for b in bounds)
    hi = min(b.upper for b in bounds)
    detail = {}
    for b in bounds:
        detail.update(b.detail)
    return PerturbationBound(kind, lo, hi, all(b.hypotheses_ok for b in bounds), detail)


def nv_bound(lam: float, v, delta_v, u2) -> PerturbationBound:
    """Symmetric enclosure of radius ``|lam| ||dV U^-1|| / (1 - ||V U^-1||)``."""
    pair = OperatorPair(u2, v)
    vu = float(np.linalg.norm(pair.v @ pair.u_inv, 2))
    if vu >= 1.0:
        raise ConditionViolated(vu)
    dvu = float(np.linalg.norm(pencil.as_symmetric(delta_v) @ pair.u_inv, 2))
    radius = abs(lam) * dvu / (1.0 - vu)
    zeta = abs(lam) * pair.u_inv_norm / (1.0 - vu)
    dv_norm = _norm(delta_v)
    detail = {
        "zeta": zeta,
        "zeta_times_norm": zeta * dv_norm,
        "norms": {"v_u_inv": vu, "delta_v_u_inv": dvu, "u_inv": pair.u_inv_norm, "delta_v": dv_norm},
    }
    return PerturbationBound(NV, lam - radius, lam + radius, True, detail)


def coulomb_bounds(model: models.CoulombModel, p: models.CutoffPerturbation) -> list[PerturbationBound]:
    """Refined, relative, combined and NV enclosures of the perturbed Coulomb ground state.

    The cutoff perturbation satisfies both ``0 <= dV <= delta_+`` and
    ``0 <= dV <= tau |V|``, so the combined record is the intersection of
    the refined and relative ones.  The NV radius uses the smaller of
    ``tau ||V U^-1|| = 2 tau Z alpha`` and ``||dV|| ||U^-1||`` for
    ``||dV U^-1||``.
    """
    vu = models.coulomb_vu_norm(model)
    if vu >= 1.0:
        raise OutOfValidity(f"2 Z alpha = {vu:.6g} >= 1")
    lam = models.coulomb_lambda(model)
    d_lo, d_hi, g_lo, g_hi = models.cutoff_deltas(model, p)
    refined = PerturbationBound(REFINED, lam + d_lo, lam + d_hi, True, {"delta_minus": d_lo, "delta_plus": d_hi})
    rel = relative_bound(lambda eps: models.coulomb_lambda(model, eps), GammaPair(g_lo, g_hi))
    comb = intersect(refined, rel)
    u_inv = 1.0 / model.units.rest_energy
    dvu = min(p.tau * vu, d_hi * u_inv)
    radius = abs(lam) * dvu / (1.0 - vu)
    zeta = models.penalty(model)
    nv = PerturbationBound(
        NV,
        lam - radius,
        lam + radius,
        True,
        {
            "zeta": zeta,
            "zeta_times_norm": zeta * d_hi,
            "norms": {"v_u_inv": vu, "delta_v_u_inv": dvu, "u_inv": u_inv, "delta_v": d_hi},
        },
    )
    return [refined, rel, comb, nv]
