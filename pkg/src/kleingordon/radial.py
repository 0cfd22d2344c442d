"""Finite-difference oracle for the radial (s-wave) problem and the 1-D oscillator.

The reduced radial function ``u(r) = r R(r)`` vanishes at ``r = 0`` and at
the outer radius, so the three-point stencil on the interior nodes
``r_j = j h`` gives a tridiagonal ``U^2`` and a diagonal ``V``.  Then
``Q_lam = U^2 - (lam - V)^2`` is tridiagonal as well, and by Sylvester's law
of inertia the number of its negative eigenvalues counts the plus
eigenvalues in ``(mu, lam)`` whenever ``Q_mu`` is positive definite.  The
k-th plus eigenvalue is therefore the zero of the k-th smallest eigenvalue
of ``Q_lam``, which needs only O(n) work per evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import cholesky_banded, eigvalsh_tridiagonal, solve_banded
from scipy.optimize import brentq
from scipy.sparse.linalg import LinearOperator, eigsh

from . import bounds
from .errors import ConditionViolated, InclusionViolation
from .models import CoulombModel, CutoffPerturbation, OscillatorModel, PhysicalUnits, coulomb_lambda, cutoff_deltas
from .pencil import OperatorPair

DEFAULT_N = 4000
DEFAULT_RMAX_LENGTHS = 50.0


@dataclass(frozen=True)
class RadialGrid:
    n: int
    r_max: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 16:
            raise ValueError("n must be an integer >= 16")
        if not (self.r_max > 0 and math.isfinite(self.r_max)):
            raise ValueError("r_max must be positive and finite")

    @property
    def h(self) -> float:
        return self.r_max / (self.n + 1)

    @property
    def r(self) -> np.ndarray:
        return self.h * np.arange(1, self.n + 1)


@dataclass(frozen=True)
class RadialProblem:
    grid: RadialGrid
    potential: Callable[[np.ndarray], np.ndarray]
    ell: int = 0
    units: PhysicalUnits = field(default_factory=PhysicalUnits)

    def __post_init__(self):
        if self.ell < 0:
            raise ValueError("ell must be non-negative")
        v = self.potential_values()
        if not np.all(np.isfinite(v)):
            raise ValueError("potential is not finite at every grid node")

    def potential_values(self) -> np.ndarray:
        v = np.asarray(self.potential(self.grid.r), dtype=float)
        return np.broadcast_to(v, (self.grid.n,)).copy()


@dataclass(frozen=True)
class Tridiagonal:
    """``U^2`` as (diagonal, off-diagonal) plus the potential diagonal."""

    d: np.ndarray
    e: np.ndarray
    v: np.ndarray

    @property
    def n(self) -> int:
        return self.d.size

    def q_diagonal(self, lam: float) -> np.ndarray:
        return self.d - (lam - self.v) ** 2


def _stencil(n: int, h: float, hc2: float, mc4: float) -> tuple[np.ndarray, np.ndarray]:
    d = np.full(n, 2.0 * hc2 / h**2 + mc4)
    e = np.full(n - 1, -hc2 / h**2)
    return d, e


def tridiagonal(prob: RadialProblem) -> Tridiagonal:
    u = prob.units
    hc2 = (u.h * u.c) ** 2
    d, e = _stencil(prob.grid.n, prob.grid.h, hc2, u.rest_energy**2)
    if prob.ell > 0:
        d = d + prob.ell * (prob.ell + 1) * hc2 / prob.grid.r**2
    return Tridiagonal(d, e, prob.potential_values())


def discretize(prob: RadialProblem) -> OperatorPair:
    """Dense ``OperatorPair`` for the discretized radial problem."""
    t = tridiagonal(prob)
    u2 = np.diag(t.d) + np.diag(t.e, 1) + np.diag(t.e, -1)
    return OperatorPair(u2, np.diag(t.v))


def _require_definite(t: Tridiagonal, mu: float) -> None:
    ab = np.zeros((2, t.n))
    ab[0, 1:] = t.e
    ab[1] = t.q_diagonal(mu)
    try:
        cholesky_banded(ab, lower=False)
    except np.linalg.LinAlgError as exc:
        raise ConditionViolated(1.0, f"Q at mu = {mu:.6g} is not positive definite on the grid") from exc


def _kth_q_eigenvalue(t: Tridiagonal, lam: float, k: int) -> float:
    w = eigvalsh_tridiagonal(t.q_diagonal(lam), t.e, select="i", select_range=(k - 1, k - 1))
    return float(w[0])


def negative_count(t: Tridiagonal, lam: float) -> int:
    """Number of negative eigenvalues of ``Q_lam``."""
    w = eigvalsh_tridiagonal(t.q_diagonal(lam), t.e, select="v", select_range=(-np.inf, 0.0))
    return int(np.count_nonzero(w < 0))


def plus_eigenvalues(prob: RadialProblem | Tridiagonal, count: int = 1, mu: float = 0.0) -> np.ndarray:
    """The ``count`` smallest plus eigenvalues, assuming ``Q_mu`` is positive definite.

    Raises ``ConditionViolated`` if it is not.
    """
    t = prob if isinstance(prob, Tridiagonal) else tridiagonal(prob)
    if not 1 <= count <= t.n:
        raise ValueError(f"count must lie in [1, {t.n}]")
    _require_definite(t, mu)
    out = []
    lo = mu
    for k in range(1, count + 1):
        f = lambda lam, k=k: _kth_q_eigenvalue(t, lam, k)  # noqa: E731
        step = max(1.0, abs(lo)) * 0.5
        hi = max(lo, float(np.max(t.v))) + step
        while f(hi) > 0:
            step *= 2.0
            hi += step
        root = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
        out.append(root)
        lo = root
    return np.array(out)


def condition_norm_at(prob: RadialProblem | Tridiagonal, mu: float = 0.0) -> float:
    """``||(V - mu) U^-1||`` on the grid, by Lanczos on ``(V-mu) U^-2 (V-mu)``."""
    t = prob if isinstance(prob, Tridiagonal) else tridiagonal(prob)
    s = t.v - mu
    if not np.any(s):
        return 0.0
    lower_ab = np.zeros((3, t.n))
    lower_ab[0, 1:] = t.e
    lower_ab[1] = t.d
    lower_ab[2, :-1] = t.e

    def matvec(x):
        x = np.ravel(x)
        return s * solve_banded((1, 1), lower_ab, s * x)

    op = LinearOperator((t.n, t.n), matvec=matvec, dtype=float)
    w = eigsh(op, k=1, which="LA", return_eigenvectors=False, tol=1e-10,
              v0=np.ones(t.n), maxiter=20 * t.n)
    return float(math.sqrt(max(w[0], 0.0)))


def coulomb_problem(model: CoulombModel, n: int = DEFAULT_N, r_max: float | None = None,
                    delta: CutoffPerturbation | None = None, ell: int = 0) -> RadialProblem:
    """Radial problem for ``-Z e^2 / r`` (plus the cutoff perturbation if given)."""
    if r_max is None:
        r_max = DEFAULT_RMAX_LENGTHS * model.coulomb_length
    if delta is None:
        pot = model.potential
    else:
        pot = lambda r: model.potential(r) + delta.delta_v(model, r)  # noqa: E731
    return RadialProblem(RadialGrid(n, r_max), pot, ell, model.units)


def verify_ground(model: CoulombModel, n_list, r_max: float | None = None) -> dict:
    """Grid-refinement study of the ground state against the closed form."""
    if not model.coupling < 0.5:
        raise ValueError(f"Z alpha = {model.coupling:.6g} is not below 1/2")
    exact = coulomb_lambda(model)
    rows = []
    for n in n_list:
        t = tridiagonal(coulomb_problem(model, int(n), r_max))
        g0 = condition_norm_at(t, 0.0)
        if g0 >= 1.0:
            raise ConditionViolated(g0, f"discrete ||V U^-1|| = {g0:.6g} >= 1 at n = {n}")
        ground = float(plus_eigenvalues(t, 1, 0.0)[0])
        rows.append({
            "n": int(n),
            "ground_computed": ground,
            "ground_formula": exact,
            "rel_error": abs(ground - exact) / abs(exact),
            "condition_norm": g0,
        })
    errors = [row["rel_error"] for row in rows]
    return {
        "Z": model.Z,
        "alpha": model.units.alpha,
        "r_max": float(r_max if r_max is not None else DEFAULT_RMAX_LENGTHS * model.coulomb_length),
        "rows": rows,
        "decreasing": all(b < a for a, b in zip(errors, errors[1:])),
        "final_error": errors[-1] if errors else None,
    }


def verify_inclusion(model: CoulombModel, p: CutoffPerturbation, n: int = DEFAULT_N,
                     r_max: float | None = None, raise_on_failure: bool = True) -> dict:
    """Check the perturbed grid ground state against the relative enclosure.

    The continuum enclosure uses the closed-form family ``lam(eps)`` and is
    inflated by the relative grid error of the unperturbed ground state at
    the same ``n``.  The report also carries the exact discrete enclosure,
    built from the grid family ``eps V``.
    """
    if r_max is None:
        r_max = DEFAULT_RMAX_LENGTHS * model.coulomb_length
    base = coulomb_problem(model, n, r_max)
    pert = coulomb_problem(model, n, r_max, delta=p)
    t0, t1 = tridiagonal(base), tridiagonal(pert)
    v = t0.v
    gam = bounds.relative_gammas(v, t1.v - v)

    g0 = condition_norm_at(t0, 0.0)
    if g0 >= 1.0:
        raise ConditionViolated(g0, f"discrete ||V U^-1|| = {g0:.6g} >= 1")
    ground = float(plus_eigenvalues(t0, 1)[0])
    value = float(plus_eigenvalues(t1, 1)[0])
    exact = coulomb_lambda(model)
    grid_error = abs(ground - exact) / exact

    # the grid constants only hold on the nodes; the continuum needs (0, tau)
    _, _, c_lo, c_hi = cutoff_deltas(model, p)
    cont = bounds.GammaPair(c_lo, c_hi)
    rel = bounds.relative_bound(lambda eps: coulomb_lambda(model, eps), cont)
    lower = rel.lower * (1.0 - grid_error)
    upper = rel.upper * (1.0 + grid_error)

    def grid_family(eps):
        return float(plus_eigenvalues(Tridiagonal(t0.d, t0.e, eps * v), 1)[0])

    drel = bounds.relative_bound(grid_family, gam)
    slack = 1e-12 * max(1.0, abs(value))
    edge = model.units.rest_energy
    count0, count1 = negative_count(t0, edge), negative_count(t1, edge)
    edge_ok = value < edge and count1 <= count0

    report = {
        "n": int(n),
        "r_max": float(r_max),
        "ground_computed": ground,
        "ground_formula": exact,
        "rel_error": grid_error,
        "condition_norm": g0,
        "gammas": {"gamma_minus": cont.gamma_minus, "gamma_plus": cont.gamma_plus},
        "grid_gammas": {"gamma_minus": gam.gamma_minus, "gamma_plus": gam.gamma_plus},
        "inclusion": {
            "lower": lower,
            "upper": upper,
            "value": value,
            "ok": bool(lower <= value <= upper),
        },
        "discrete_inclusion": {
            "lower": drel.lower,
            "upper": drel.upper,
            "value": value,
            "ok": bool(drel.lower - slack <= value <= drel.upper + slack),
        },
        "continuum_edge": {"edge": edge, "count_unperturbed": count0, "count_perturbed": count1, "ok": bool(edge_ok)},
    }
    report["ok"] = report["inclusion"]["ok"] and report["discrete_inclusion"]["ok"] and edge_ok
    if raise_on_failure and not report["ok"]:
        raise InclusionViolation(report)
    return report


def oscillator_tridiagonal(model: OscillatorModel, n: int = 2000, half_width: float | None = None) -> Tridiagonal:
    """1-D ``U^2 = -h^2 c^2 d^2/dx^2 + m^2 c^2 omega^2 x^2 + m^2 c^4`` on ``(-L, L)``, ``V = 0``."""
    if model.n != 1:
        raise ValueError("the grid oscillator is one-dimensional")
    u = model.units
    if half_width is None:
        # twelve oscillator lengths sqrt(h / (m omega))
        half_width = 12.0 * math.sqrt(u.h / (u.m * model.omega))
    h = 2.0 * half_width / (n + 1)
    x = -half_width + h * np.arange(1, n + 1)
    d, e = _stencil(n, h, (u.h * u.c) ** 2, u.rest_energy**2)
    d = d + (u.m * u.c * model.omega * x) ** 2
    return Tridiagonal(d, e, np.zeros(n))


def oscillator_levels(model: OscillatorModel, count: int = 5, n: int = 2000,
                      half_width: float | None = None) -> np.ndarray:
    """Lowest ``count`` plus eigenvalues of the grid oscillator: ``sqrt(eig U^2)``."""
    t = oscillator_tridiagonal(model, n, half_width)
    w = eigvalsh_tridiagonal(t.d, t.e, select="i", select_range=(0, count - 1))
    return np.sqrt(w)


def sub_edge_count(prob: RadialProblem | Tridiagonal, mu: float = 0.0) -> int:
    """Number of plus eigenvalues in ``(mu, m c^2)``."""
    t = prob if isinstance(prob, Tridiagonal) else tridiagonal(prob)
    units = prob.units if isinstance(prob, RadialProblem) else PhysicalUnits()
    _require_definite(t, mu)
    return negative_count(t, units.rest_energy)
