"""Gauss-type quadrature rules on the reference interval [0, 1].

Four members of the Gauss family are supported: Gauss-Legendre (no fixed
endpoints), left and right Gauss-Radau (one fixed endpoint) and Gauss-Lobatto
(both endpoints fixed).  Interior nodes are found by deflated Newton iteration
on the matching Jacobi polynomial; weights come from the classical Legendre
closed forms.  Whether a family under- or over-estimates integrals of
functions with positive high derivatives is what decides if an exponential
integrator built on it keeps the maximum bound, see :func:`exp_residue_sign`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import QuadratureError

NEWTON_TOL = 1e-15
NEWTON_MAXITER = 100
CROSSCHECK_TOL = 1e-13


class QuadratureFamily(enum.Enum):
    GAUSS_LEGENDRE = "gauss_legendre"
    LEFT_RADAU = "left_radau"
    RIGHT_RADAU = "right_radau"
    LOBATTO = "lobatto"

    @property
    def boundary_count(self) -> int:
        return {"gauss_legendre": 0, "left_radau": 1, "right_radau": 1, "lobatto": 2}[self.value]

    @property
    def underestimates_exponentials(self) -> bool:
        """True for the families whose remainder on e^{ks}, k > 0, is non-negative."""
        return self in (QuadratureFamily.GAUSS_LEGENDRE, QuadratureFamily.LEFT_RADAU)

    @classmethod
    def parse(cls, name: "str | QuadratureFamily") -> "QuadratureFamily":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("-", "_").replace(" ", "_")
        aliases = {
            "gausslegendre": "gauss_legendre",
            "gauss": "gauss_legendre",
            "legendre": "gauss_legendre",
            "gl": "gauss_legendre",
            "leftradau": "left_radau",
            "left": "left_radau",
            "lgr": "left_radau",
            "rightradau": "right_radau",
            "right": "right_radau",
            "rgr": "right_radau",
            "gauss_lobatto": "lobatto",
        }
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            names = ", ".join(f.value for f in cls)
            raise QuadratureError(f"unknown quadrature family {name!r} (expected one of {names})") from None


@dataclass(frozen=True)
class QuadratureRule:
    family: QuadratureFamily
    nodes: tuple
    weights: tuple
    degree: int

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def boundary_count(self) -> int:
        return self.family.boundary_count

    @property
    def interior_count(self) -> int:
        return len(self.nodes) - self.family.boundary_count

    def integrate(self, g) -> float:
        """Apply the rule on [0, 1] to a vectorised callable."""
        return float(np.dot(self.weights, g(np.asarray(self.nodes))))


# --- orthogonal polynomials -------------------------------------------------


def jacobi(n: int, a: float, b: float, x):
    """P_n^{(a,b)}(x) by the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    if n == 0:
        return p_prev
    p = (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0
    for k in range(2, n + 1):
        c = 2.0 * k + a + b
        a1 = 2.0 * k * (k + a + b) * (c - 2.0)
        a2 = (c - 1.0) * (a * a - b * b)
        a3 = (c - 2.0) * (c - 1.0) * c
        a4 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * c
        p_prev, p = p, ((a2 + a3 * x) * p - a4 * p_prev) / a1
    return p


def jacobi_deriv(n: int, a: float, b: float, x):
    x = np.asarray(x, dtype=float)
    if n == 0:
        return np.zeros_like(x)
    return 0.5 * (n + a + b + 1.0) * jacobi(n - 1, a + 1.0, b + 1.0, x)


def jacobi_roots(n: int, a: float, b: float) -> np.ndarray:
    """Roots of P_n^{(a,b)} on (-1, 1), ascending.

    Deflated Newton from Chebyshev points: each iterate is corrected by the
    roots already found, so distinct guesses cannot collapse onto one root.
    """
    if n == 0:
        return np.empty(0)
    guesses = -np.cos((2.0 * np.arange(n) + 1.0) * np.pi / (2.0 * n))
    roots = []
    for x in guesses:
        x = float(x)
        for _ in range(NEWTON_MAXITER):
            p = float(jacobi(n, a, b, x))
            dp = float(jacobi_deriv(n, a, b, x))
            defl = sum(1.0 / (x - r) for r in roots)
            dx = p / (dp - p * defl)
            x -= dx
            if abs(dx) <= NEWTON_TOL:
                break
        else:
            raise QuadratureError(f"Newton did not converge for P_{n}^({a},{b}) root near {x}")
        roots.append(x)
    roots = np.sort(np.array(roots))
    if np.any(np.diff(roots) <= 0.0) or roots[0] <= -1.0 or roots[-1] >= 1.0:
        raise QuadratureError(f"degenerate roots for P_{n}^({a},{b}): {roots}")
    return roots


def _legendre(n, x):
    return jacobi(n, 0.0, 0.0, x)


def _rule_on_symmetric(family: QuadratureFamily, m: int):
    """Nodes and weights on [-1, 1]."""
    if family is QuadratureFamily.GAUSS_LEGENDRE:
        x = jacobi_roots(m, 0.0, 0.0)
        dp = jacobi_deriv(m, 0.0, 0.0, x)
        w = 2.0 / ((1.0 - x * x) * dp * dp)
    elif family is QuadratureFamily.LEFT_RADAU:
        inner = jacobi_roots(m - 1, 0.0, 1.0)
        p = _legendre(m - 1, inner)
        x = np.concatenate(([-1.0], inner))
        w = np.concatenate(([2.0 / m**2], (1.0 - inner) / (m**2 * p * p)))
    elif family is QuadratureFamily.RIGHT_RADAU:
        x, w = _rule_on_symmetric(QuadratureFamily.LEFT_RADAU, m)
        x, w = -x[::-1], w[::-1]
    else:
        inner = jacobi_roots(m - 2, 1.0, 1.0)
        p = _legendre(m - 1, inner)
        c = 2.0 / (m * (m - 1))
        x = np.concatenate(([-1.0], inner, [1.0]))
        w = np.concatenate(([c], c / (p * p), [c]))
    return np.asarray(x, dtype=float), np.asarray(w, dtype=float)


# Closed forms on [0, 1] for the cross-check of small rules.
_R6 = math.sqrt(6.0)
_R3 = math.sqrt(3.0)
_R15 = math.sqrt(15.0)
_CLOSED_FORMS = {
    (QuadratureFamily.GAUSS_LEGENDRE, 1): ((0.5,), (1.0,)),
    (QuadratureFamily.GAUSS_LEGENDRE, 2): (((3 - _R3) / 6, (3 + _R3) / 6), (0.5, 0.5)),
    (QuadratureFamily.GAUSS_LEGENDRE, 3): (
        ((5 - _R15) / 10, 0.5, (5 + _R15) / 10),
        (5 / 18, 8 / 18, 5 / 18),
    ),
    (QuadratureFamily.LEFT_RADAU, 1): ((0.0,), (1.0,)),
    (QuadratureFamily.LEFT_RADAU, 2): ((0.0, 2 / 3), (0.25, 0.75)),
    (QuadratureFamily.LEFT_RADAU, 3): (
        (0.0, (6 - _R6) / 10, (6 + _R6) / 10),
        (1 / 9, (16 + _R6) / 36, (16 - _R6) / 36),
    ),
    (QuadratureFamily.RIGHT_RADAU, 1): ((1.0,), (1.0,)),
    (QuadratureFamily.RIGHT_RADAU, 2): ((1 / 3, 1.0), (0.75, 0.25)),
    (QuadratureFamily.RIGHT_RADAU, 3): (
        ((4 - _R6) / 10, (4 + _R6) / 10, 1.0),
        ((16 - _R6) / 36, (16 + _R6) / 36, 1 / 9),
    ),
    (QuadratureFamily.LOBATTO, 2): ((0.0, 1.0), (0.5, 0.5)),
    (QuadratureFamily.LOBATTO, 3): ((0.0, 0.5, 1.0), (1 / 6, 4 / 6, 1 / 6)),
}


def build_rule(family, node_count: int) -> QuadratureRule:
    """Gauss-type rule with ``node_count`` nodes on [0, 1].

    The stored degree is 2J + K - 1 (J interior nodes, K fixed endpoints).
    Rules with up to three nodes are checked against closed forms, which
    then replace the Newton values.
    """
    family = QuadratureFamily.parse(family)
    m = int(node_count)
    if m != node_count or m < 1:
        raise QuadratureError(f"node_count must be a positive integer, got {node_count!r}")
    if family is QuadratureFamily.LOBATTO and m < 2:
        raise QuadratureError("Gauss-Lobatto needs at least 2 nodes")

    x, w = _rule_on_symmetric(family, m)
    nodes = 0.5 * (x + 1.0)
    weights = 0.5 * w

    closed = _CLOSED_FORMS.get((family, m))
    if closed is not None:
        err = max(np.max(np.abs(nodes - closed[0])), np.max(np.abs(weights - closed[1])))
        if err > CROSSCHECK_TOL:
            raise QuadratureError(f"{family.value} {m}-node rule off its closed form by {err:.3e}")
        # agreed to roundoff; keep the correctly rounded values
        nodes, weights = np.asarray(closed[0]), np.asarray(closed[1])

    if np.any(weights <= 0.0) or np.any(np.diff(nodes) <= 0.0):
        raise QuadratureError(f"{family.value} {m}-node rule lost positivity or ordering")

    k = family.boundary_count
    degree = 2 * (m - k) + k - 1
    return QuadratureRule(family, tuple(float(v) for v in nodes), tuple(float(v) for v in weights), degree)


def scale_to_interval(rule: QuadratureRule, length: float):
    """Nodes and weights of ``rule`` mapped affinely onto [0, length]."""
    if not length > 0.0:
        raise QuadratureError(f"interval length must be positive, got {length!r}")
    return length * np.asarray(rule.nodes), length * np.asarray(rule.weights)


def exp_residue_sign(rule: QuadratureRule, growth_rate: float, length: float) -> float:
    """Remainder of the rule on exp(k s) over [0, length].

    Returns  int_0^L e^{ks} ds - sum_i w_i e^{k s_i}.  Non-negative for
    Gauss-Legendre and left Radau, non-positive for right Radau and Lobatto.
    """
    if not growth_rate > 0.0:
        raise QuadratureError(f"growth_rate must be positive, got {growth_rate!r}")
    nodes, weights = scale_to_interval(rule, length)
    exact = math.expm1(growth_rate * length) / growth_rate
    terms = [exact] + [-float(wi) * math.exp(growth_rate * float(si)) for si, wi in zip(nodes, weights)]
    return math.fsum(terms)
