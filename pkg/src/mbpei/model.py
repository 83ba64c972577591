"""Allen-Cahn nonlinearities and their stabilised forms.

Two reaction terms are provided: the cubic f(u) = u - u^3 and the logarithmic
Flory-Huggins term.  Each ``Nonlinearity`` carries its maximum bound beta and
a stabilisation constant kappa >= max_{|xi| <= beta} |f'(xi)|, which makes
N(u) = f(u) + kappa u non-decreasing and bounded by kappa*beta on [-beta, beta].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .errors import DomainViolationError, ModelParameterError
from .grid import Field

POLYNOMIAL = "polynomial"
FLORY_HUGGINS = "flory_huggins"

KAPPA_CHECK_POINTS = 10_000
KAPPA_CHECK_RTOL = 1e-12
BETA_BRACKET = (1e-12, 1.0 - 1e-12)


def fh_f(u, theta, theta_c):
    """(theta/2) ln((1-u)/(1+u)) + theta_c u, unscaled."""
    u = np.asarray(u, dtype=float)
    return 0.5 * theta * (np.log1p(-u) - np.log1p(u)) + theta_c * u


def find_beta(theta: float, theta_c: float) -> float:
    """Positive root of the Flory-Huggins reaction term."""
    if not (theta > 0 and theta_c > 0):
        raise ModelParameterError("theta and theta_c must be positive")
    lo, hi = BETA_BRACKET
    flo, fhi = float(fh_f(lo, theta, theta_c)), float(fh_f(hi, theta, theta_c))
    if not (flo > 0.0 > fhi):
        raise ModelParameterError(
            f"f_FH has no sign change on [{lo}, {hi}] for theta={theta}, theta_c={theta_c}"
            " (need theta_c > theta)"
        )
    beta = bisect(lambda u: float(fh_f(u, theta, theta_c)), lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    # bisect stops within a few ulps; near theta_c >> theta the slope is steep, so take the best neighbour
    cands = [beta]
    for direction in (0.0, 1.0):
        b = beta
        for _ in range(8):
            b = float(np.nextafter(b, direction))
            cands.append(b)
    return min(cands, key=lambda b: abs(float(fh_f(b, theta, theta_c))))


@dataclass(frozen=True)
class Nonlinearity:
    kind: str
    beta: float
    kappa: float
    theta: float | None = None
    theta_c: float | None = None
    scale: float = 1.0  # multiplies f; 1/eps for the eps-scaled Flory-Huggins form

    def __post_init__(self):
        if self.kind not in (POLYNOMIAL, FLORY_HUGGINS):
            raise ModelParameterError(f"unknown model kind {self.kind!r}")
        if not self.kappa > 0:
            raise ModelParameterError("kappa must be positive")
        fb, fmb = float(self.f(self.beta)), float(self.f(-self.beta))
        tol = 1e-12 * self.kappa * self.beta
        if fb > tol or fmb < -tol:
            raise ModelParameterError(f"f(beta) <= 0 <= f(-beta) fails: f(beta)={fb}, f(-beta)={fmb}")
        need = self.max_abs_df()
        if self.kappa < need * (1.0 - KAPPA_CHECK_RTOL):
            raise ModelParameterError(f"kappa={self.kappa} is below max |f'| = {need} on [-beta, beta]")

    # pointwise maps on arrays

    def f(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == POLYNOMIAL:
            return u - u**3
        return self.scale * fh_f(u, self.theta, self.theta_c)

    def df(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == POLYNOMIAL:
            return 1.0 - 3.0 * u * u
        return self.scale * (self.theta_c - self.theta / (1.0 - u * u))

    def F(self, u):
        """Potential with F' = -f."""
        u = np.asarray(u, dtype=float)
        if self.kind == POLYNOMIAL:
            return 0.25 * (u * u - 1.0) ** 2
        ent = (1.0 + u) * np.log1p(u) + (1.0 - u) * np.log1p(-u)
        return self.scale * (0.5 * self.theta * ent - 0.5 * self.theta_c * u * u)

    def N(self, u):
        self.check_domain(u)
        u = np.asarray(u, dtype=float)
        return self.f(u) + self.kappa * u

    def check_domain(self, u):
        if self.kind == FLORY_HUGGINS:
            m = float(np.max(np.abs(u)))
            if not m < 1.0:
                raise DomainViolationError(m)

    def max_abs_df(self, points: int = KAPPA_CHECK_POINTS) -> float:
        xi = np.linspace(-self.beta, self.beta, points)
        return float(np.max(np.abs(self.df(xi))))


def polynomial(kappa: float = 2.0) -> Nonlinearity:
    return Nonlinearity(POLYNOMIAL, beta=1.0, kappa=float(kappa))


def flory_huggins(theta: float, theta_c: float, epsilon: float | None = None, kappa_override: float | None = None) -> Nonlinearity:
    """Flory-Huggins model; pass ``epsilon`` for the u_t = eps Lap u + f/eps scaling.

    kappa defaults to theta/(1 - beta^2) - theta_c (divided by eps when scaled).
    An override is accepted only if it still dominates max |f'|.
    """
    beta = find_beta(theta, theta_c)
    scale = 1.0 if epsilon is None else 1.0 / float(epsilon)
    kappa = (theta / (1.0 - beta * beta) - theta_c) * scale
    if kappa_override is not None:
        if kappa_override < kappa * (1.0 - KAPPA_CHECK_RTOL):
            raise ModelParameterError(f"kappa_override={kappa_override} is below the stabilisation minimum {kappa}")
        kappa = float(kappa_override)
    return Nonlinearity(FLORY_HUGGINS, beta=beta, kappa=kappa, theta=float(theta), theta_c=float(theta_c), scale=scale)


def apply_N(model: Nonlinearity, v: Field) -> Field:
    return Field(v.grid, model.N(v.values))


def potential(model: Nonlinearity, v: Field) -> Field:
    model.check_domain(v.values)
    return Field(v.grid, model.F(v.values))
