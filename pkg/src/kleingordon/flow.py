"""Eigenvalue curves of ``K_t`` along the homotopy ``V_t = V_0 + t dV``."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import pencil
from .errors import LemmaViolation
from .pencil import MINUS, PLUS, OperatorPair

UNDEFINED = "undefined"
MONO_UP = "monotone_nondecreasing"
MONO_DOWN = "monotone_nonincreasing"
NONMONO = "nonmonotone"

COLLISION = "collision"
DEFINITENESS_LOST = "definiteness_lost"
NONREAL = "nonreal"


@dataclass(frozen=True)
class Homotopy:
    u2: np.ndarray
    v0: np.ndarray
    v1: np.ndarray

    def __post_init__(self):
        # validates shapes and positivity once
        OperatorPair(self.u2, self.v0)
        OperatorPair(self.u2, self.v1)
        for name in ("u2", "v0", "v1"):
            object.__setattr__(self, name, pencil.as_symmetric(getattr(self, name)))

    @property
    def dim(self) -> int:
        return self.u2.shape[0]

    @property
    def delta_v(self) -> np.ndarray:
        return self.v1 - self.v0

    def pair(self, t: float) -> OperatorPair:
        return OperatorPair(self.u2, connect(self, t))

    def to_dict(self) -> dict:
        return {"u2": self.u2.tolist(), "v0": self.v0.tolist(), "v1": self.v1.tolist()}


def connect(h: Homotopy, t: float) -> np.ndarray:
    """``V_0 + t dV = t V_1 + (1 - t) V_0``."""
    return h.v0 + t * h.delta_v


def common_mu(h: Homotopy) -> tuple[float, float]:
    """``mu`` minimizing ``max(g_0(mu), g_1(mu))`` and that maximum."""
    p0, p1 = h.pair(0.0), h.pair(1.0)
    radius = max(pencil._search_radius(p0), pencil._search_radius(p1))
    center = 0.5 * (np.trace(h.v0) + np.trace(h.v1)) / h.dim
    f = lambda mu: max(p0.condition_norm_squared(mu), p1.condition_norm_squared(mu))  # noqa: E731
    mu, _ = pencil.golden_section(f, center - radius, center + radius, tol=1e-10)
    return mu, max(pencil.condition_norm(p0, mu), pencil.condition_norm(p1, mu))


def interpolation_bound_check(h: Homotopy, mu: float, grid) -> float:
    """Largest ``||(V_t - mu) U^-1||`` over ``grid``; must not exceed the endpoints."""
    p0 = h.pair(0.0)
    bound = max(pencil.condition_norm(p0, mu), pencil.condition_norm(h.pair(1.0), mu))
    worst = 0.0
    for t in grid:
        g = pencil.condition_norm(p0.with_potential(connect(h, t)), mu)
        if 0.0 <= t <= 1.0 and g > bound + 1e-10:
            raise LemmaViolation(f"g_t({mu}) = {g} exceeds {bound} at t = {t}")
        worst = max(worst, g)
    return worst


@dataclass(frozen=True)
class HypothesisCheck:
    commuting: bool
    delta_psd: bool
    v0_psd: bool
    beta0: float
    beta1: float
    mu: float
    order_ok: bool
    condition_ok: bool
    squares_ordered: bool
    condition_at_zero: bool
    starts_at_zero: bool

    @property
    def theorem1(self) -> bool:
        """Commuting, ordered potentials under a common definiteness condition."""
        return self.commuting and self.delta_psd and self.order_ok and self.condition_ok

    @property
    def theorem2(self) -> bool:
        """``0 <= V_0 <= V_1`` under a common definiteness condition."""
        return self.v0_psd and self.delta_psd and self.condition_ok

    @property
    def theorem2_strict(self) -> bool:
        """Theorem-2 data whose squares are ordered and which are definite at ``mu = 0``."""
        return self.theorem2 and self.squares_ordered and self.condition_at_zero

    @property
    def corollary(self) -> bool:
        """The proportional family ``V_t = t V`` with ``V >= 0``."""
        return self.starts_at_zero and self.delta_psd

    def applicable(self) -> str | None:
        if self.theorem1:
            return "theorem1"
        if self.theorem2:
            return "theorem2"
        if self.corollary:
            return "corollary"
        return None


def check_hypotheses(h: Homotopy, tol: float = 1e-10) -> HypothesisCheck:
    scale = float(np.linalg.norm(h.u2, 2) + np.linalg.norm(h.v0, 2) + np.linalg.norm(h.v1, 2) + 1.0)
    dv = h.delta_v
    comm = h.v0 @ dv - dv @ h.v0
    mu, beta = common_mu(h)
    p0, p1 = h.pair(0.0), h.pair(1.0)
    b0, b1 = pencil.condition_norm(p0, mu), pencil.condition_norm(p1, mu)
    delta_psd = bool(np.linalg.eigvalsh(dv)[0] >= -1e-12 * scale)
    condition_ok = beta < 1.0
    order_ok = False
    if condition_ok:
        # minus eigenvalues of every K_t lie below mu - gap
        floor = mu - (1.0 - beta) / p0.u_inv_norm
        order_ok = delta_psd and bool(np.linalg.eigvalsh(h.v0)[0] >= floor)
    sq = h.v1 @ h.v1 - h.v0 @ h.v0
    return HypothesisCheck(
        commuting=bool(np.linalg.norm(comm, 2) <= tol * scale),
        delta_psd=delta_psd,
        v0_psd=bool(np.linalg.eigvalsh(h.v0)[0] >= -1e-12 * scale),
        beta0=b0,
        beta1=b1,
        mu=mu,
        order_ok=order_ok,
        condition_ok=condition_ok,
        squares_ordered=bool(np.linalg.eigvalsh(0.5 * (sq + sq.T))[0] >= -1e-12 * scale**2),
        condition_at_zero=max(pencil.condition_norm(p0, 0.0), pencil.condition_norm(p1, 0.0)) < 1.0,
        starts_at_zero=bool(np.all(h.v0 == 0.0)),
    )


@dataclass
class EigenCurve:
    t_grid: np.ndarray
    values: np.ndarray
    signature: list[str]
    matched: np.ndarray

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    def is_real(self, tol: float = 1e-10) -> np.ndarray:
        return np.abs(self.values.imag) <= tol * (1.0 + np.abs(self.values.real))


@dataclass(frozen=True)
class Event:
    t: float
    kind: str
    detail: str
    value: float | None = None


@dataclass
class FlowReport:
    homotopy: Homotopy
    grid: np.ndarray
    curves: list[EigenCurve]
    sorted_top: np.ndarray
    sorted_plus: np.ndarray
    definite: np.ndarray
    events: list[Event] = field(default_factory=list)
    hypothesis: HypothesisCheck | None = None


def _point_data(pair: OperatorPair, mu: float | None, beta_tol: float):
    """Values, unit vectors, signatures at one homotopy point."""
    if mu is None:
        mu_star, beta = pencil.minimize_condition(pair)
        if beta < 1.0 - beta_tol:
            mu = mu_star
    if mu is not None:
        try:
            spec = pencil.spectrum(pair, mu=mu)
        except pencil.CholeskyFailure:
            spec = None
        if spec is not None:
            vals = spec.values.astype(complex)
            vecs = np.column_stack([p.vector for p in spec.points]).astype(complex)
            return vals, vecs, spec.signatures, True
    vals, vecs = pencil.eig_general(pair)
    vecs = vecs / np.linalg.norm(vecs, axis=0)
    return vals, vecs, [UNDEFINED] * len(vals), False


def _match(prev_vecs, prev_vals, vecs, vals, threshold):
    """Permutation ``perm`` with current index ``perm[i]`` continuing curve slot ``i``."""
    overlap = np.abs(prev_vecs.conj().T @ vecs)
    rows, cols = linear_sum_assignment(-overlap)
    perm = np.empty(len(vals), dtype=int)
    perm[rows] = cols
    ok = overlap[rows, cols] >= threshold
    weak_rows = rows[~ok]
    if weak_rows.size:
        weak_cols = cols[~ok]
        dist = np.abs(prev_vals[weak_rows][:, None] - vals[weak_cols][None, :])
        r2, c2 = linear_sum_assignment(dist)
        perm[weak_rows[r2]] = weak_cols[c2]
    matched = np.ones(len(vals), dtype=bool)
    matched[weak_rows] = False
    return perm, matched


def _locate_collision(h: Homotopy, t_good: float, t_bad: float, beta_tol: float, iters: int = 60):
    """Bisect for the parameter where the definiteness interval closes."""
    def definite(t):
        return pencil.minimize_condition(h.pair(t))[1] < 1.0 - beta_tol

    a, b = t_good, t_bad
    for _ in range(iters):
        m = 0.5 * (a + b)
        if definite(m):
            a = m
        else:
            b = m
        if b - a < 1e-13:
            break
    mu, _ = pencil.minimize_condition(h.pair(a))
    return 0.5 * (a + b), mu


def trace(
    h: Homotopy,
    grid=None,
    overlap_threshold: float = 0.9,
    collision_tol: float = 1e-8,
    beta_tol: float = pencil.BETA_TOL,
) -> FlowReport:
    """Follow every eigenvalue of ``K_t`` across ``grid``.

    Points are continued by maximal eigenvector overlap; pairs whose overlap
    falls below ``overlap_threshold`` are re-matched by nearest value and
    flagged ``matched=False``.  When both endpoints satisfy the definiteness
    condition at one ``mu`` that ``mu`` is used on all of ``[0, 1]``;
    otherwise each point gets its own.
    """
    grid = np.linspace(0.0, 1.0, 201) if grid is None else np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly ascending")
    if not 0.5 < overlap_threshold <= 1.0:
        raise ValueError("overlap_threshold must lie in (0.5, 1]")
    hyp = check_hypotheses(h)
    shared_mu = hyp.mu if hyp.condition_ok and hyp.beta0 < 1 - beta_tol and hyp.beta1 < 1 - beta_tol else None

    n2 = 2 * h.dim
    nt = grid.size
    values = np.empty((nt, n2), dtype=complex)
    sigs = [[UNDEFINED] * n2 for _ in range(nt)]
    matched = np.ones((nt, n2), dtype=bool)
    definite = np.zeros(nt, dtype=bool)
    events: list[Event] = []
    prev = None
    for k, t in enumerate(grid):
        mu = shared_mu if shared_mu is not None and 0.0 <= t <= 1.0 else None
        vals, vecs, sg, is_def = _point_data(h.pair(float(t)), mu, beta_tol)
        definite[k] = is_def
        if prev is None:
            perm = np.arange(n2)
        else:
            perm, matched[k] = _match(prev[1], prev[0], vecs, vals, overlap_threshold)
        vals, vecs = vals[perm], vecs[:, perm]
        values[k] = vals
        sigs[k] = [sg[j] for j in perm]
        prev = (vals, vecs)

        if not is_def and (k == 0 or definite[k - 1]):
            events.append(Event(float(t), DEFINITENESS_LOST, "no mu with ||(V_t - mu) U^-1|| < 1"))
            if k > 0:
                tc, lam = _locate_collision(h, float(grid[k - 1]), float(t), beta_tol)
                events.append(Event(tc, COLLISION, f"plus/minus collision at value {lam:.12g}", float(lam)))
        nonreal = int(np.sum(np.abs(vals.imag) > 1e-10 * (1.0 + np.abs(vals.real))))
        if nonreal:
            events.append(Event(float(t), NONREAL, f"{nonreal} non-real eigenvalues"))
        order = np.argsort(vals.real)
        for a, b in zip(order[:-1], order[1:]):
            if abs(vals[a] - vals[b]) < collision_tol:
                events.append(
                    Event(float(t), COLLISION, f"curves {a} and {b} meet at value {vals[a].real:.12g}",
                          float(vals[a].real))
                )

    curves = [
        EigenCurve(grid, values[:, j].copy(), [sigs[k][j] for k in range(nt)], matched[:, j].copy())
        for j in range(n2)
    ]
    sorted_top = np.full((nt, h.dim), np.nan)
    sorted_plus = np.full((nt, h.dim), np.nan)
    for k in range(nt):
        if definite[k]:
            re = values[k].real
            minus = np.sort(re[[s == MINUS for s in sigs[k]]])[::-1]
            plus = np.sort(re[[s == PLUS for s in sigs[k]]])
            sorted_top[k, : minus.size] = minus
            sorted_plus[k, : plus.size] = plus
    events.sort(key=lambda e: e.t)
    return FlowReport(h, grid, curves, sorted_top, sorted_plus, definite, events, hyp)


@dataclass(frozen=True)
class CurveVerdict:
    verdict: str
    signature: str
    max_rise: float
    max_drop: float


@dataclass
class Verdicts:
    curves: list[CurveVerdict]
    sorted_top: list[CurveVerdict]
    theorem: str | None
    counterexample: dict | None = None


def _verdict(values: np.ndarray, signature: str, tol: float) -> CurveVerdict:
    v = values[np.isfinite(values)]
    d = np.diff(v)
    rise = float(d.max()) if d.size else 0.0
    drop = float((-d).max()) if d.size else 0.0
    if drop <= tol:
        kind = MONO_UP
    elif rise <= tol:
        kind = MONO_DOWN
    else:
        kind = NONMONO
    return CurveVerdict(kind, signature, max(rise, 0.0), max(drop, 0.0))


def _curve_signature(c: EigenCurve, mask: np.ndarray) -> str:
    s = {c.signature[k] for k in np.flatnonzero(mask)}
    return s.pop() if len(s) == 1 else UNDEFINED


def guaranteed_mask(report: FlowReport, hyp: HypothesisCheck | None) -> np.ndarray:
    """Grid points on which some theorem forces minus curves to be nondecreasing."""
    mask = np.zeros(report.grid.size, dtype=bool)
    if hyp is None:
        return mask
    inside = (report.grid >= 0.0) & (report.grid <= 1.0)
    if hyp.theorem1 or hyp.theorem2:
        mask |= inside & report.definite
    if hyp.corollary:
        prefix = report.definite.copy()
        lost = np.flatnonzero(~report.definite)
        if lost.size:
            prefix[lost[0]:] = False
        mask |= prefix & (report.grid >= 0.0)
    return mask


def monotonicity_verdict(
    report: FlowReport, hyp: HypothesisCheck | None = None, tol: float = 1e-9
) -> Verdicts:
    """Classify every curve; flag minus curves that fall where a theorem forbids it.

    Curve verdicts use the whole definite part of the trace.  The
    obligation is checked on the guaranteed range only, for the sorted
    minus eigenvalues and for each individually tracked minus curve; a
    violation is returned as a serializable counterexample.
    """
    hyp = hyp if hyp is not None else report.hypothesis
    theorem = hyp.applicable() if hyp is not None else None
    curves = [
        _verdict(np.where(report.definite, c.real, np.nan), _curve_signature(c, report.definite), tol)
        for c in report.curves
    ]
    top = [
        _verdict(report.sorted_top[:, i], MINUS, tol) for i in range(report.sorted_top.shape[1])
    ]

    counterexample = None
    mask = guaranteed_mask(report, hyp)
    if theorem is not None and mask.any():
        drops = [
            _verdict(np.where(mask, report.sorted_top[:, i], np.nan), MINUS, tol).max_drop
            for i in range(report.sorted_top.shape[1])
        ]
        drops += [
            _verdict(np.where(mask, c.real, np.nan), MINUS, tol).max_drop
            for c in report.curves
            if _curve_signature(c, mask) == MINUS
        ]
        worst = max(drops)
        if worst > tol:
            counterexample = {
                "theorem": theorem,
                "max_drop": worst,
                "homotopy": report.homotopy.to_dict(),
                "grid": [float(report.grid[0]), float(report.grid[-1]), int(report.grid.size)],
                "hypothesis": {
                    k: (bool(v) if isinstance(v, (bool, np.bool_)) else float(v))
                    for k, v in vars(hyp).items()
                },
            }
    return Verdicts(curves, top, theorem, counterexample)


def lipschitz_slack(h: Homotopy) -> float:
    """``max |eig dV|``: the slope bound of a curve under the theorem hypotheses."""
    return float(np.max(np.abs(np.linalg.eigvalsh(h.delta_v))))


def max_step(report: FlowReport) -> float:
    """Largest jump between neighbouring grid points over all sorted minus curves."""
    d = np.abs(np.diff(report.sorted_top, axis=0))
    d = d[np.isfinite(d)]
    return float(d.max()) if d.size else 0.0

