import math

import numpy as np
import pytest

from mbpei.errors import BlowUpError
from mbpei.grid import Field, Grid2, apply_exp, apply_phi1, build_operator, sup_norm
from mbpei.integrator import (
    LevelEvaluator,
    SchemeSpec,
    StepContext,
    default_node_count,
    ei1,
    ei_level,
    evolve,
    make_scheme,
    step,
)
from mbpei.model import apply_N, flory_huggins, polynomial
from mbpei.quadrature import QuadratureFamily as QF, build_rule, exp_residue_sign

R6 = math.sqrt(6.0)
SMALL = Grid2.square(4)
G32 = Grid2.square(32)


def logistic(u0, t):
    """Exact solution of u' = u - u^3."""
    e = math.exp(2 * t)
    return math.copysign(math.sqrt(u0 * u0 * e / (1 - u0 * u0 + u0 * u0 * e)), u0)


def ctx_for(order, tau, family="left_radau", grid=G32, model=None, eps=0.1, **kw):
    model = model or polynomial()
    op = build_operator(grid, eps, model.kappa)
    return StepContext(op, model, make_scheme(order, tau, family, **kw))


def smooth_field(grid):
    return Field.from_function(grid, lambda x, y: 0.5 * np.sin(x) * np.cos(2 * y) + 0.2 * np.cos(3 * x))


def test_default_node_policy():
    assert [default_node_count(QF.LEFT_RADAU, j) for j in (2, 3, 4, 5, 6, 7)] == [2, 2, 3, 3, 4, 4]
    assert [default_node_count(QF.GAUSS_LEGENDRE, j) for j in (2, 3, 4, 5)] == [1, 2, 2, 3]
    assert [default_node_count(QF.RIGHT_RADAU, j) for j in (2, 3, 4)] == [2, 2, 3]
    assert [default_node_count(QF.LOBATTO, j) for j in (2, 3, 4, 5)] == [2, 3, 3, 4]


def test_scheme_validation():
    with pytest.raises(ValueError):
        make_scheme(3, 0.1, "right_radau")
    assert not make_scheme(3, 0.1, "right_radau", allow_non_mbp=True).mbp_certified
    assert make_scheme(3, 0.1, "gauss_legendre").mbp_certified
    with pytest.raises(ValueError):
        # degree 0 rule at level 2
        SchemeSpec(2, 0.1, (build_rule(QF.LEFT_RADAU, 1),))
    with pytest.raises(ValueError):
        make_scheme(3, 0.1, nodes_per_level=[2])
    with pytest.raises(ValueError):
        make_scheme(2, -0.1)


def test_context_requires_matching_kappa():
    op = build_operator(SMALL, 0.1, 3.0)
    with pytest.raises(ValueError):
        StepContext(op, polynomial(2.0), make_scheme(1, 0.1))


def test_ei1_matches_operator_form():
    ctx = ctx_for(1, 0.3)
    u = smooth_field(G32)
    expect = apply_exp(ctx.operator, 0.3, u).values + apply_phi1(ctx.operator, 0.3, apply_N(ctx.model, u)).values
    np.testing.assert_allclose(ei1(ctx, u, 0.3).values, expect, atol=1e-14)


@pytest.mark.parametrize("h", [0.01, 1.0, 50.0])
def test_ei1_fixed_points(h):
    ctx = ctx_for(1, h, grid=SMALL)
    np.testing.assert_allclose(ei1(ctx, Field.constant(SMALL, 0.0), h).values, 0.0, atol=0)
    np.testing.assert_allclose(ei1(ctx, Field.constant(SMALL, 1.0), h).values, 1.0, atol=1e-14)


def test_ei1_local_error_is_second_order():
    ctx = ctx_for(1, 0.01, grid=SMALL)
    errs = [abs(ei1(ctx, Field.constant(SMALL, 0.1), h).values[0, 0] - logistic(0.1, h)) for h in (0.02, 0.01)]
    # leading term h^2/2 * N'(u) u' = 1.47e-5 at h = 0.01
    assert errs[1] < 2e-5
    assert math.log2(errs[0] / errs[1]) == pytest.approx(2.0, abs=0.1)


def test_level2_matches_closed_form_scheme():
    h = 0.4
    ctx = ctx_for(2, h)
    op, mdl = ctx.operator, ctx.model
    u = smooth_field(G32)
    w1 = ei1(ctx, u, 2 * h / 3)
    expect = (
        apply_exp(op, h, u).values
        + h / 4 * apply_exp(op, h, apply_N(mdl, u)).values
        + 3 * h / 4 * apply_exp(op, h / 3, apply_N(mdl, w1)).values
    )
    np.testing.assert_allclose(ei_level(ctx, 2, u, h).values, expect, atol=1e-14)


@pytest.mark.parametrize("level", [4, 5])
def test_three_node_levels_match_closed_form_scheme(level):
    h = 0.3
    ctx = ctx_for(5, h)
    op, mdl = ctx.operator, ctx.model
    u = smooth_field(G32)
    c = [(16 + R6) / 36, (16 - R6) / 36]
    th = [(6 - R6) / 10, (6 + R6) / 10]
    expect = apply_exp(op, h, u).values + h / 9 * apply_exp(op, h, apply_N(mdl, u)).values
    for ci, ti in zip(c, th):
        inner = ei_level(ctx, level - 1, u, ti * h)
        expect = expect + h * ci * apply_exp(op, (1 - ti) * h, apply_N(mdl, inner)).values
    np.testing.assert_allclose(ei_level(ctx, level, u, h).values, expect, atol=1e-13)


@pytest.mark.parametrize("level", [2, 3, 4, 5])
def test_zero_is_fixed_at_every_level(level):
    ctx = ctx_for(5, 0.7, grid=SMALL)
    assert np.all(ei_level(ctx, level, Field.constant(SMALL, 0.0), 0.7).values == 0.0)


def test_step_order1_is_ei1():
    ctx = ctx_for(1, 0.2)
    u = smooth_field(G32)
    assert np.array_equal(step(ctx, u).values, ei1(ctx, u, 0.2).values)


def test_step_order3_scalar_oracle():
    tau = 0.1
    ctx = ctx_for(3, tau, grid=SMALL)
    u = evolve(ctx, Field.constant(SMALL, 0.1), 10)
    exact = logistic(0.1, 1.0)
    assert exact == pytest.approx(0.26354, abs=5e-6)
    err = abs(u.values[0, 0] - exact)
    assert np.ptp(u.values) < 1e-15
    # third order: the error constant at tau = 0.1 is O(1) (measured ~0.25)
    assert err < 2.0 * tau**3


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_scalar_observed_order(k):
    taus = [1 / 32, 1 / 64]
    errs = []
    for tau in taus:
        u = evolve(ctx_for(k, tau, grid=SMALL), Field.constant(SMALL, 0.1), round(1 / tau))
        errs.append(abs(u.values[0, 0] - logistic(0.1, 1.0)))
    assert math.log2(errs[0] / errs[1]) == pytest.approx(k, abs=0.15)


def test_large_step_stays_in_bound():
    for family in ("left_radau", "gauss_legendre"):
        for k in range(1, 6):
            ctx = ctx_for(k, 10.0, family)
            rng = np.random.default_rng(k)
            u = Field(G32, rng.uniform(-1, 1, G32.shape))
            assert sup_norm(step(ctx, u)) <= 1.0 + 1e-12


class SpyEvaluator(LevelEvaluator):
    def __init__(self, *a):
        super().__init__(*a)
        self.calls = []

    def spectrum(self, level, h):
        self.calls.append((level, h))
        return super().spectrum(level, h)


@pytest.mark.parametrize(
    "family,order",
    [("left_radau", 2), ("left_radau", 3), ("left_radau", 5), ("gauss_legendre", 5), ("right_radau", 4), ("lobatto", 4)],
)
def test_recursion_cost(family, order):
    ctx = ctx_for(order, 0.1, family, allow_non_mbp=True)
    ev = SpyEvaluator(ctx, smooth_field(G32).values)
    ev.evaluate(order, 0.1)
    expected = 1
    for rule in ctx.spec.level_rules:
        expected *= sum(1 for s in rule.nodes if s != 0.0)
    assert ev.ei1_calls == expected
    assert all(h > 0 for _, h in ev.calls)


def test_node_zero_uses_u_itself():
    ctx = ctx_for(2, 0.1)
    ev = SpyEvaluator(ctx, smooth_field(G32).values)
    ev.evaluate(2, 0.1)
    assert ev.calls == [(2, 0.1), (1, 0.1 * 2 / 3)]


@pytest.mark.parametrize("k", range(1, 6))
def test_zero_steady_state(k):
    ctx = ctx_for(k, 0.5, grid=SMALL)
    assert np.all(evolve(ctx, Field.constant(SMALL, 0.0), 100).values == 0.0)


@pytest.mark.parametrize("c", [1.0, -1.0])
def test_unit_steady_state_ei1(c):
    ctx = ctx_for(1, 0.5, grid=SMALL)
    assert np.max(np.abs(evolve(ctx, Field.constant(SMALL, c), 100).values - c)) <= 1e-12


@pytest.mark.parametrize("h", [0.05, 0.5, 2.0])
def test_unit_state_defect_is_quadrature_residue(h):
    # with u = 1 the inner EI1 value is exactly 1, so level 2 misses 1 by
    # kappa e^{-kappa h} times the rule's error on e^{kappa s}
    ctx = ctx_for(2, h, grid=SMALL)
    kappa = ctx.model.kappa
    got = step(ctx, Field.constant(SMALL, 1.0)).values
    defect = kappa * math.exp(-kappa * h) * exp_residue_sign(build_rule(QF.LEFT_RADAU, 2), kappa, h)
    assert defect > 0
    np.testing.assert_allclose(1.0 - got, defect, rtol=1e-9)


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_unit_state_drifts_inside_bound(k):
    ctx = ctx_for(k, 0.5, grid=SMALL)
    u = evolve(ctx, Field.constant(SMALL, 1.0), 100).values
    assert np.ptp(u) == 0.0 and 0.99 < u[0, 0] < 1.0


def test_evolve_observer_and_single_step():
    ctx = ctx_for(3, 0.05)
    u0 = smooth_field(G32)
    seen = []
    out = evolve(ctx, u0, 4, lambda n, t, v: seen.append((n, t, sup_norm(v))))
    assert [s[0] for s in seen] == [1, 2, 3, 4]
    assert seen[-1][1] == pytest.approx(0.2)
    assert np.array_equal(evolve(ctx, u0, 1).values, step(ctx, u0).values)
    assert out.grid == G32
    with pytest.raises(ValueError):
        evolve(ctx, u0, 0)


def test_evolve_reports_blowup_step():
    fh = flory_huggins(0.8, 1.6)
    ctx = ctx_for(2, 0.1, model=fh)
    vals = np.zeros(G32.shape)
    vals[0, 0] = 1.0
    with pytest.raises(BlowUpError) as exc:
        evolve(ctx, Field(G32, vals), 5)
    assert exc.value.step == 1 and exc.value.time == pytest.approx(0.1)
    assert exc.value.max_abs == 1.0
