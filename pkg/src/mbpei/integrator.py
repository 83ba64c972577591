"""Iterated exponential integrators EIk.

Level 1 is the stabilised ETD1 step

    w1(h) = e^{hL} u + phi_1(h) N(u),

and level j >= 2 replaces the Duhamel integral by a quadrature rule whose
integrand is evaluated with the level-(j-1) approximation,

    wj(h) = e^{hL} u + sum_i w_i e^{(h - s_i) L} N(w_{j-1}(s_i)).

With Gauss-Legendre or left Radau rules at every level the step keeps
|u| <= beta for every step size.  All combinations are formed in Fourier space,
so each level costs one inverse FFT plus one forward FFT per non-zero node.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import BlowUpError, DomainViolationError
from .grid import Field, StabilizedOperator, _check_same_grid
from .model import Nonlinearity
from .quadrature import QuadratureFamily, QuadratureRule, build_rule, scale_to_interval


def default_node_count(family: QuadratureFamily, level: int) -> int:
    """Fewest nodes whose rule integrates degree level-1 polynomials exactly."""
    family = QuadratureFamily.parse(family)
    m = 2 if family is QuadratureFamily.LOBATTO else 1
    k = family.boundary_count
    while 2 * (m - k) + k - 1 < level - 1:
        m += 1
    return m


@dataclass(frozen=True)
class SchemeSpec:
    order: int
    tau: float
    level_rules: tuple = ()
    allow_non_mbp: bool = False

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 1:
            raise ValueError(f"order must be a positive integer, got {self.order!r}")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau!r}")
        object.__setattr__(self, "level_rules", tuple(self.level_rules))
        if len(self.level_rules) != self.order - 1:
            raise ValueError(f"order {self.order} needs {self.order - 1} level rules, got {len(self.level_rules)}")
        for j, rule in enumerate(self.level_rules, start=2):
            if rule.degree < j - 1:
                raise ValueError(f"level {j} rule has degree {rule.degree}, needs at least {j - 1}")
        if not self.mbp_certified and not self.allow_non_mbp:
            bad = sorted({r.family.value for r in self.level_rules if not r.family.underestimates_exponentials})
            raise ValueError(f"families {bad} do not preserve the maximum bound; pass allow_non_mbp=True to use them")

    @property
    def mbp_certified(self) -> bool:
        return all(r.family.underestimates_exponentials for r in self.level_rules)

    @property
    def label(self) -> str:
        fams = {r.family.value for r in self.level_rules}
        fam = fams.pop() if len(fams) == 1 else ("mixed" if fams else "etd1")
        return f"EI{self.order}_{fam}"


def make_scheme(
    order: int,
    tau: float,
    family="left_radau",
    nodes_per_level: Sequence[int] | None = None,
    allow_non_mbp: bool = False,
) -> SchemeSpec:
    """EIk with one quadrature family at every level.

    By default level j uses the fewest nodes reaching degree j-1, which for left
    Radau gives 2 nodes at levels 2-3 and 3 nodes at levels 4-5.
    """
    family = QuadratureFamily.parse(family)
    if nodes_per_level is None:
        counts = [default_node_count(family, j) for j in range(2, order + 1)]
    else:
        counts = list(nodes_per_level)
        if len(counts) != order - 1:
            raise ValueError(f"nodes_per_level needs {order - 1} entries for order {order}, got {len(counts)}")
    rules = tuple(build_rule(family, m) for m in counts)
    return SchemeSpec(order, float(tau), rules, allow_non_mbp)


@dataclass(frozen=True)
class StepContext:
    operator: StabilizedOperator
    model: Nonlinearity
    spec: SchemeSpec

    def __post_init__(self):
        if self.operator.kappa != self.model.kappa:
            raise ValueError(f"operator kappa {self.operator.kappa} != model kappa {self.model.kappa}")


class LevelEvaluator:
    """Evaluates w_j(h) for one starting field u, sharing FFT(u) and FFT(N(u)).

    ``ei1_calls`` counts the level-1 evaluations, for cost accounting.
    """

    def __init__(self, ctx: StepContext, u: np.ndarray):
        self.ctx = ctx
        self.op = ctx.operator
        self.u_hat = self.op.fft(u)
        self.n0_hat = self.op.fft(ctx.model.N(u))
        self.ei1_calls = 0

    def spectrum(self, level: int, h: float) -> np.ndarray:
        op = self.op
        if level == 1:
            self.ei1_calls += 1
            return op.exp_factor(h) * self.u_hat + op.phi1_factor(h) * self.n0_hat
        rule = self.ctx.spec.level_rules[level - 2]
        nodes, weights = scale_to_interval(rule, h)
        acc = op.exp_factor(h) * self.u_hat
        for s, w in zip(nodes, weights):
            if s == 0.0:
                # w_{j-1}(0) = u exactly
                n_hat = self.n0_hat
            else:
                inner = op.ifft(self.spectrum(level - 1, float(s)))
                n_hat = op.fft(self.ctx.model.N(inner))
            acc = acc + w * op.exp_factor(h - s) * n_hat
        return acc

    def evaluate(self, level: int, h: float) -> np.ndarray:
        return self.op.ifft(self.spectrum(level, h))


def _check(ctx: StepContext, u: Field, h: float):
    _check_same_grid(ctx.operator.grid, u.grid)
    if not h > 0:
        raise ValueError(f"step size must be positive, got {h!r}")


def ei1(ctx: StepContext, u: Field, h: float) -> Field:
    _check(ctx, u, h)
    return Field(u.grid, LevelEvaluator(ctx, u.values).evaluate(1, h))


def ei_level(ctx: StepContext, level: int, u: Field, h: float) -> Field:
    _check(ctx, u, h)
    if not 1 <= level <= ctx.spec.order:
        raise ValueError(f"level must lie in [1, {ctx.spec.order}], got {level}")
    return Field(u.grid, LevelEvaluator(ctx, u.values).evaluate(level, h))


def step(ctx: StepContext, u: Field) -> Field:
    """u^{n+1} = w_k(tau)."""
    return ei_level(ctx, ctx.spec.order, u, ctx.spec.tau)


Observer = Callable[[int, float, Field], None]


def evolve(ctx: StepContext, u0: Field, n_steps: int, observer: Observer | None = None) -> Field:
    """Take ``n_steps`` uniform steps; the observer sees (step, time, field) after each.

    A domain violation of the nonlinearity is re-raised as BlowUpError carrying
    the index and time of the step that was being computed.
    """
    if int(n_steps) != n_steps or n_steps < 1:
        raise ValueError(f"n_steps must be a positive integer, got {n_steps!r}")
    _check(ctx, u0, ctx.spec.tau)
    tau = ctx.spec.tau
    level = ctx.spec.order
    u = u0
    for n in range(1, int(n_steps) + 1):
        try:
            values = LevelEvaluator(ctx, u.values).evaluate(level, tau)
        except DomainViolationError as err:
            raise BlowUpError(n, n * tau, err.max_abs) from err
        u = Field(u0.grid, values)
        if observer is not None:
            observer(n, n * tau, u)
    return u
