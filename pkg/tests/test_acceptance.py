"""The nine acceptance criteria, one test each.

Every test records a ``PASS``/``FAIL`` line that is printed in the pytest
terminal summary.  Run standalone with ``python3 tests/test_acceptance.py``.
"""

import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import conftest  # noqa: E402
from families import example_pair, example_homotopy, random_pair, theorem1_family, theorem2_family  # noqa: E402
from kleingordon import bounds, flow, models, pencil, quadratic, radial  # noqa: E402
from kleingordon.pencil import OperatorPair  # noqa: E402


def report(k, ok, text):
    line = f"{'PASS' if ok else 'FAIL'} criterion {k}: {text}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def double_root():
    """The double real root of ``det(U^2 - (lam - V)^2)`` at ``t = 2``, by polynomial roots."""
    # det [[2 - (lam - 2)^2, -1], [-1, 2 - lam^2]]
    a = np.polysub([2.0], np.polymul([1.0, -2.0], [1.0, -2.0]))
    b = np.polysub([2.0], [1.0, 0.0, 0.0])
    roots = np.roots(np.polysub(np.polymul(a, b), [1.0]))
    roots = roots[np.abs(roots.imag) < 1e-6].real
    gaps = np.abs(roots[:, None] - roots[None, :]) + np.eye(roots.size)
    i, j = np.unravel_index(np.argmin(gaps), gaps.shape)
    return 0.5 * (roots[i] + roots[j])


def test_criterion_1_nonmonotone_example():
    start = time.perf_counter()
    rep = flow.trace(example_homotopy(), np.linspace(0.0, 2.0, 201))
    elapsed = time.perf_counter() - start
    plus = rep.sorted_plus[:, 0]
    inner = plus[1:-1][np.isfinite(plus[1:-1])]
    k = int(np.nanargmax(plus[:-1]))
    extremum = 0 < k < np.count_nonzero(np.isfinite(plus)) - 1 and np.nanmax(inner) > max(plus[0], plus[-2])
    collisions = [e for e in rep.events if e.kind == flow.COLLISION and e.value is not None]
    located = [e for e in collisions if abs(e.t - 2.0) <= 0.01]
    root = double_root()
    value_ok = any(abs(e.value - root) <= 1e-6 for e in located)
    nonreal = np.abs(pencil.spectrum_general(example_pair(2.1)).imag).max() > 1e-8
    ok = extremum and bool(located) and value_ok and nonreal and elapsed < 1.0
    at = located[0] if located else None
    report(
        1, ok,
        f"lambda_1^+ interior max {np.nanmax(plus):.6f} at t={rep.grid[k]:.2f}; "
        f"collision t={at.t if at else float('nan'):.6f} value={at.value if at else float('nan'):.9f} "
        f"(root {root:.9f}); non-real at t=2.1: {nonreal}; {elapsed:.2f} s",
    )


def test_criterion_2_coulomb_ground_state():
    start = time.perf_counter()
    res = radial.verify_ground(models.CoulombModel(40), [2000, 4000])
    elapsed = time.perf_counter() - start
    e2000, e4000 = (row["rel_error"] for row in res["rows"])
    ratio = e2000 / e4000
    ok = e4000 <= 1e-3 and ratio >= 2.0 / 1.5 and elapsed < 120
    report(2, ok, f"rel error n=2000 {e2000:.3e}, n=4000 {e4000:.3e}, ratio {ratio:.3f}; {elapsed:.2f} s")


def test_criterion_3_relative_inclusion():
    model = models.CoulombModel(40)
    tau = 0.01
    r_e = model.units.electron_radius
    res = radial.verify_inclusion(model, models.CutoffPerturbation(10 * r_e, tau), raise_on_failure=False)
    inc = res["inclusion"]
    cross = models.crossover_radius(model, tau) / r_e
    below = np.geomspace(1.0, 0.99 * cross, 25)
    above = np.geomspace(1.01 * cross, 10 * cross, 10)
    rows_below = models.coulomb_bound_table(model, tau, below * r_e)
    rows_above = models.coulomb_bound_table(model, tau, above * r_e)
    narrower = all(r.relative_width < r.refined_width for r in rows_below)
    wider = all(r.relative_width > r.refined_width for r in rows_above)
    ok = res["ok"] and narrower and wider and cross > 100
    report(
        3, ok,
        f"value {inc['value']:.8f} in [{inc['lower']:.8f}, {inc['upper']:.8f}] ({res['ok']}); "
        f"crossover {cross:.1f} r_e; relative narrower below: {narrower}, refined narrower above: {wider}",
    )


def test_criterion_4_penalty_curve():
    start = time.perf_counter()
    units = models.PhysicalUnits(alpha=models.ALPHA_FIGURE)
    points, skipped = models.penalty_curve(np.arange(1, 69), units)
    fine, _ = models.penalty_curve(np.linspace(1, 68, 2000), units)
    elapsed = time.perf_counter() - start
    zeta = np.array([z for _, z in points])
    zf = np.array([z for _, z in fine])
    ok = (
        not skipped
        and np.all(zeta >= 1)
        and np.all(np.diff(zeta) > 0)
        and np.all(np.diff(zf) > 0)
        and zeta[-1] > 10 * zeta[0]
        and elapsed < 1.0
    )
    report(4, ok, f"zeta(1)={zeta[0]:.6f}, zeta(68)={zeta[-1]:.4f}, increasing: {np.all(np.diff(zf) > 0)}; {elapsed:.3f} s")


def _counterexamples(generator, count, rng):
    found, accepted = [], 0
    while accepted < count:
        h = generator(rng)
        if h is None:
            continue
        verdicts = flow.monotonicity_verdict(flow.trace(h))
        if verdicts.counterexample is not None:
            found.append((accepted, verdicts.counterexample))
        accepted += 1
    return found


@pytest.mark.slow
def test_criterion_5_monotonicity_suites():
    start = time.perf_counter()
    # each suite draws from its own stream seeded with 0
    bad1 = _counterexamples(theorem1_family, 200, np.random.default_rng(0))
    bad2 = _counterexamples(theorem2_family, 200, np.random.default_rng(0))
    elapsed = time.perf_counter() - start
    worst = max((c["max_drop"] for _, c in bad1 + bad2), default=0.0)
    first = bad2[0] if bad2 else (bad1[0] if bad1 else None)
    note = ""
    if first is not None:
        hyp = first[1]["hypothesis"]
        note = (
            f"; first counterexample family {first[0]} ({first[1]['theorem']}), "
            f"drop {first[1]['max_drop']:.3e}, V_1^2 >= V_0^2: {hyp['squares_ordered']}, "
            f"definite at mu=0: {hyp['condition_at_zero']}"
        )
    ok = not bad1 and not bad2 and elapsed < 120
    report(
        5, ok,
        f"theorem-1 counterexamples {len(bad1)}/200, theorem-2 counterexamples {len(bad2)}/200, "
        f"worst drop {worst:.3e}; {elapsed:.1f} s{note}",
    )


def test_criterion_6_derivative():
    rng = np.random.default_rng(6)
    dt = 1e-4
    errors = []
    for _ in range(50):
        h = theorem1_family(rng)
        t = float(rng.uniform(0.1, 0.9))
        mu = h.pair(t)
        interval = pencil.definiteness_interval(mu)
        at = pencil.spectrum(mu, interval.mu_star)
        up = pencil.spectrum(h.pair(t + dt), interval.mu_star).values
        down = pencil.spectrum(h.pair(t - dt), interval.mu_star).values
        pair0 = h.pair(0.0)
        for i, p in enumerate(at.points):
            fd = (up[i] - down[i]) / (2 * dt)
            d = quadratic.lambda_derivative(pair0, h.delta_v, t, p.value, p.psi1)
            errors.append(abs(d - fd) / max(abs(fd), abs(d)))
    errors = np.array(errors)
    median, worst = float(np.median(errors)), float(errors.max())
    ok = median <= 1e-5 and worst <= 1e-3
    report(6, ok, f"{errors.size} eigenvalues: median rel error {median:.2e}, worst {worst:.2e}")


def _sound_family(rng):
    pair = random_pair(rng)
    q = np.linalg.eigh(pair.v)[1]
    dv = (q * rng.uniform(-1, 1, pair.dim)) @ q.T
    dv *= rng.uniform(0, 1) * pencil.margin(pair) / np.linalg.norm(dv, 2)
    if not bounds.refined_bound(0.0, dv, pair).hypotheses_ok:
        return None
    if pencil.definiteness_interval(pair.with_potential(pair.v + dv)) is None:
        return None
    return pair, dv


def test_criterion_7_bound_soundness_and_sharpness():
    rng = np.random.default_rng(7)
    checked, misses = 0, 0
    while checked < 100:
        fam = _sound_family(rng)
        if fam is None:
            continue
        pair, dv = fam
        s0 = pencil.spectrum(pair)
        s1 = pencil.spectrum(pair.with_potential(pair.v + dv))
        for old, new in ((s0.minus_values(), s1.minus_values()), (s0.plus_values(), s1.plus_values())):
            for lam, lam_new in zip(old, new):
                misses += not bounds.absolute_bound(lam, dv).contains(lam_new, 1e-9)
                misses += not bounds.refined_bound(lam, dv).contains(lam_new, 1e-9)
        checked += 1

    shift_width = 0.0
    for _ in range(20):
        pair = random_pair(rng)
        eps = float(rng.uniform(-0.5, 0.5))
        dv = eps * np.eye(pair.dim)
        new = pencil.spectrum(pair.with_potential(pair.v + dv)).values
        for lam, lam_new in zip(pencil.spectrum(pair).values, new):
            b = bounds.refined_bound(lam, dv)
            shift_width = max(shift_width, b.width, abs(b.lower - lam_new))

    rel_err = 0.0
    for _ in range(20):
        n = int(rng.integers(2, 6))
        q = np.linalg.qr(rng.standard_normal((n, n)))[0]
        v = (q * -rng.uniform(0.1, 1.0, n)) @ q.T
        pair = OperatorPair(random_pair(rng, n).u2, 0.3 * v / np.linalg.norm(v, 2))
        c = float(rng.uniform(-0.5, 0.5))
        exact = pencil.spectrum(pair.with_potential((1 + c) * pair.v)).plus_values()
        gam = bounds.relative_gammas(pair.v, c * pair.v)
        for k in range(n):
            b = bounds.relative_bound(
                lambda e, k=k: pencil.spectrum(pair.with_potential(e * pair.v)).plus_values()[k], gam
            )
            rel_err = max(rel_err, b.width, abs(b.lower - exact[k]))
    ok = misses == 0 and shift_width <= 1e-12 and rel_err <= 1e-9
    report(
        7, ok,
        f"{checked} families, {misses} misses; eps*I refined width/offset {shift_width:.1e}; "
        f"c*V relative width/offset {rel_err:.1e}",
    )


def test_criterion_8_minimax():
    rng = np.random.default_rng(8)
    low_gap, eq_err, mm_err = np.inf, 0.0, 0.0
    for i in range(100):
        pair = random_pair(rng)
        spec = pencil.spectrum(pair)
        sigma = spec.plus_values()[0]
        x = rng.standard_normal((1000, pair.dim))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        p_plus = np.array([quadratic.p_functionals(pair, xi)[1] for xi in x])
        low_gap = min(low_gap, float(p_plus.min() - sigma))
        for p in spec.points:
            p_minus, p_plus_eig = quadratic.p_functionals(pair, p.psi1)
            eq_err = max(eq_err, abs((p_plus_eig if p.signature == pencil.PLUS else p_minus) - p.value))
        if i < 20:
            for sign, vals in ((pencil.PLUS, spec.plus_values()), (pencil.MINUS, spec.minus_values())):
                for k in range(1, min(3, pair.dim) + 1):
                    est = quadratic.minimax_estimate(pair, k, sign, samples=8, seed=i)
                    mm_err = max(mm_err, abs(est - vals[k - 1]))
    ok = low_gap >= -1e-9 and eq_err <= 1e-9 and mm_err <= 1e-6
    report(
        8, ok,
        f"min(p_+ - min sigma_+) {low_gap:.3e}; eigenvector equality error {eq_err:.1e}; "
        f"minimax error {mm_err:.1e}",
    )


def test_criterion_9_oscillator():
    model = models.OscillatorModel(n=1)
    grid = radial.oscillator_levels(model, 5)
    closed = np.array([models.oscillator_level(model, (k,))[0] for k in range(5)])
    rel = np.abs(grid - closed) / closed
    ratios = np.array([models.oscillator_bound_ratio(model, (k,)) for k in range(20)])
    ok = rel.max() <= 1e-3 and ratios[0] == pytest.approx(1.0, abs=1e-15) and np.all(np.diff(ratios) > 0)
    report(9, ok, f"max rel error over 5 levels {rel.max():.2e}; ratios {np.round(ratios[:5], 4).tolist()}")


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion") and callable(fn):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
