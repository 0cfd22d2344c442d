"""Closed-form models: relativistic Coulomb ground state and the Klein-Gordon oscillator."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import OutOfValidity

ALPHA_CODATA = 1 / 137.035999084
ALPHA_FIGURE = 1 / 137


@dataclass(frozen=True)
class PhysicalUnits:
    m: float = 1.0
    c: float = 1.0
    h: float = 1.0
    alpha: float = ALPHA_CODATA

    def __post_init__(self):
        for name in ("m", "c", "h", "alpha"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def rest_energy(self) -> float:
        return self.m * self.c**2

    @property
    def e2(self) -> float:
        """Squared charge ``e^2 = alpha h c``."""
        return self.alpha * self.h * self.c

    @property
    def electron_radius(self) -> float:
        """Classical electron radius ``e^2 / (m c^2)``."""
        return self.e2 / self.rest_energy


@dataclass(frozen=True)
class CoulombModel:
    Z: float
    units: PhysicalUnits = PhysicalUnits()

    @property
    def coupling(self) -> float:
        """``Z alpha``."""
        return self.Z * self.units.alpha

    @property
    def valid(self) -> bool:
        return self.coupling <= 0.5 and 2 * self.coupling < 1

    @property
    def coulomb_length(self) -> float:
        """``h / (m c Z alpha)``, the Bohr-type radius of the ground state."""
        return self.units.h / (self.units.m * self.units.c * self.coupling)

    def potential(self, r):
        """``-Z e^2 / r``."""
        return -self.Z * self.units.e2 / r


@dataclass(frozen=True)
class CutoffPerturbation:
    """``dV(r) = tau * min(Z e^2 / r, Z e^2 / l)``."""

    l: float
    tau: float

    def __post_init__(self):
        if not self.l > 0:
            raise ValueError("l must be positive")
        if not 0 <= self.tau < 1:
            raise ValueError("tau must lie in [0, 1)")

    def delta_v(self, model: CoulombModel, r):
        ze2 = model.Z * model.units.e2
        return self.tau * ze2 / np.maximum(r, self.l)


@dataclass(frozen=True)
class OscillatorModel:
    n: int = 1
    omega: float = 1.0
    alpha_field: float = 0.0
    units: PhysicalUnits = PhysicalUnits()

    @property
    def a(self) -> float:
        """``|alpha| / (m c omega)``."""
        return abs(self.alpha_field) / (self.units.m * self.units.c * self.omega)


def coulomb_lambda(model: CoulombModel, epsilon: float = 1.0) -> float:
    """Ground-state energy for the potential ``-epsilon Z e^2 / r``."""
    x = epsilon * model.coupling
    rad = 0.25 - x * x
    if rad < 0:
        raise OutOfValidity(f"epsilon Z alpha = {x:.6g} exceeds 1/2")
    return model.units.rest_energy / math.sqrt(1.0 + x * x / (0.5 + math.sqrt(rad)) ** 2)


def coulomb_vu_norm(model: CoulombModel) -> float:
    """``||V U^-1|| = 2 Z alpha`` (sharp Hardy constant)."""
    return 2.0 * model.coupling


def penalty(model: CoulombModel) -> float:
    """``zeta = |lambda_0| ||U^-1|| / (1 - ||V U^-1||)`` for the Coulomb ground state."""
    vu = coulomb_vu_norm(model)
    if vu >= 1.0:
        raise OutOfValidity(f"2 Z alpha = {vu:.6g} >= 1")
    return coulomb_lambda(model) / model.units.rest_energy / (1.0 - vu)


def penalty_curve(z_values, units: PhysicalUnits = PhysicalUnits()):
    """``(Z, zeta)`` pairs; points outside ``2 Z alpha < 1`` are skipped.

    Returns ``(points, skipped)``.
    """
    points, skipped = [], []
    for z in z_values:
        try:
            points.append((float(z), penalty(CoulombModel(float(z), units))))
        except OutOfValidity:
            skipped.append(float(z))
    return points, skipped


def cutoff_deltas(model: CoulombModel, p: CutoffPerturbation) -> tuple[float, float, float, float]:
    """``(delta_-, delta_+, gamma_-, gamma_+)`` of the cutoff perturbation.

    ``0 <= dV <= tau Z e^2 / l`` and ``0 <= dV <= tau |V|``.
    """
    return 0.0, p.tau * model.Z * model.units.e2 / p.l, 0.0, p.tau


@dataclass(frozen=True)
class BoundRow:
    l: float
    refined_lower: float
    refined_upper: float
    relative_lower: float
    relative_upper: float

    @property
    def refined_width(self) -> float:
        return self.refined_upper - self.refined_lower

    @property
    def relative_width(self) -> float:
        return self.relative_upper - self.relative_lower


def coulomb_bound_table(model: CoulombModel, tau: float, l_values) -> list[BoundRow]:
    """Refined and relative enclosures of the perturbed ground state per radius ``l``."""
    lam = coulomb_lambda(model)
    rows = []
    for l in l_values:
        d_lo, d_hi, g_lo, g_hi = cutoff_deltas(model, CutoffPerturbation(l, tau))
        ends = sorted((coulomb_lambda(model, 1 - g_lo), coulomb_lambda(model, 1 - g_hi)))
        rows.append(BoundRow(float(l), lam + d_lo, lam + d_hi, ends[0], ends[1]))
    return rows


def crossover_radius(model: CoulombModel, tau: float) -> float:
    """Radius beyond which the refined enclosure is narrower than the relative one."""
    width = coulomb_lambda(model, 1 - tau) - coulomb_lambda(model)
    if width <= 0:
        return math.inf
    return tau * model.Z * model.units.e2 / width


def _nu(k, a: float) -> float:
    return math.sqrt(1 - a * a) * (k[0] + 0.5) + sum(ki + 0.5 for ki in k[1:])


def oscillator_level(model: OscillatorModel, k) -> tuple[float, float]:
    """``(lambda_k^+, lambda_k^-)`` for the multi-index ``k``."""
    a = model.a
    if a >= 1:
        raise OutOfValidity(f"a = {a:.6g} >= 1")
    u = model.units
    mc2 = u.rest_energy
    lam = math.sqrt((2 * mc2 * u.h * model.omega * _nu(k, a) + mc2 * mc2) * (1 - a * a))
    return lam, -lam


def oscillator_spectrum(model: OscillatorModel, level_cutoff: int):
    """All ``(k, lambda_plus, lambda_minus)`` with ``sum(k) <= level_cutoff``, by ascending ``lambda_plus``."""
    if level_cutoff < 0:
        raise ValueError("level_cutoff must be non-negative")
    if model.a >= 1:
        raise OutOfValidity(f"a = {model.a:.6g} >= 1")
    out = []
    for k in itertools.product(range(level_cutoff + 1), repeat=model.n):
        if sum(k) <= level_cutoff:
            out.append((k, *oscillator_level(model, k)))
    out.sort(key=lambda row: (row[1], row[0]))
    return out


def oscillator_bound_ratio(model: OscillatorModel, k) -> float:
    """``|lambda_k| / M`` with ``M = |lambda_0^-|``; the advantage over the NV bound."""
    if model.a != 0:
        raise OutOfValidity("the ratio is defined for the pure oscillator, a = 0")
    ground = oscillator_level(model, (0,) * model.n)[0]
    return oscillator_level(model, k)[0] / ground
