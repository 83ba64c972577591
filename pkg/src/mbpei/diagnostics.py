"""Energy, error norms, convergence tables and time-series recording."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainViolationError, GridMismatchError
from .grid import Field, Grid2, build_operator, l2_norm, sup_norm, write_csv_matrix, write_pgm
from .integrator import SchemeSpec, StepContext, evolve, make_scheme
from .model import Nonlinearity

ENERGY_GRADIENT = "spectral"

TIMESERIES_HEADER = "step,time,energy,sup_norm,mbp_violation"
CONVERGENCE_HEADER = "order,tau,l2_rel_err,l2_rate,linf_rel_err,linf_rate"


def _wavenumbers(n: int, length: float) -> np.ndarray:
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=length / n)
    if n % 2 == 0:
        k[n // 2] = 0.0  # odd derivative of the Nyquist mode
    return k


def spectral_gradient(grid: Grid2, values: np.ndarray):
    kx = _wavenumbers(grid.nx, grid.x1 - grid.x0)[:, None]
    ky = _wavenumbers(grid.ny, grid.y1 - grid.y0)[: grid.ny // 2 + 1][None, :]
    if grid.ny % 2 == 0:
        ky = ky.copy()
        ky[0, -1] = 0.0
    vh = np.fft.rfft2(values)
    ux = np.fft.irfft2(1j * kx * vh, s=grid.shape)
    uy = np.fft.irfft2(1j * ky * vh, s=grid.shape)
    return ux, uy


def gradient_coefficient(model: Nonlinearity, epsilon: float) -> float:
    """Half the diffusion coefficient: eps^2/2, or eps/2 when f carries the 1/eps factor."""
    return 0.5 * epsilon**2 * model.scale


def energy(grid: Grid2, model: Nonlinearity, epsilon: float, v: Field) -> float:
    """hx*hy * sum[(c/2)|grad v|^2 + F(v)] with a Fourier-differentiated gradient."""
    if v.grid != grid:
        raise GridMismatchError("field is not on the given grid")
    model.check_domain(v.values)
    ux, uy = spectral_gradient(grid, v.values)
    dens = gradient_coefficient(model, epsilon) * (ux * ux + uy * uy) + model.F(v.values)
    return float(grid.hx * grid.hy * np.sum(dens))


def relative_errors(u: Field, u_ref: Field):
    """(L2, Linf) norms of u - u_ref relative to those of u_ref."""
    if u.grid != u_ref.grid:
        raise GridMismatchError("fields live on different grids")
    l2_ref, inf_ref = l2_norm(u_ref), sup_norm(u_ref)
    if l2_ref == 0.0 or inf_ref == 0.0:
        raise ValueError("reference field has zero norm")
    diff = Field(u.grid, u.values - u_ref.values)
    return l2_norm(diff) / l2_ref, sup_norm(diff) / inf_ref


def absolute_errors(u: Field, u_ref: Field):
    """(plain vector 2-norm, max) of u - u_ref, with no grid weighting or normalisation."""
    if u.grid != u_ref.grid:
        raise GridMismatchError("fields live on different grids")
    diff = Field(u.grid, u.values - u_ref.values)
    return float(np.linalg.norm(diff.values.ravel())), sup_norm(diff)


def observed_rates(taus: Sequence[float], errors: Sequence[float]):
    """Rate between consecutive entries; None for the first."""
    rates = [None]
    for i in range(1, len(errors)):
        e0, e1 = errors[i - 1], errors[i]
        if e0 > 0 and e1 > 0:
            rates.append(math.log(e0 / e1) / math.log(taus[i - 1] / taus[i]))
        else:
            rates.append(None)
    return rates


@dataclass
class ConvergenceRow:
    order: int
    tau: float
    l2_rel_err: float
    linf_rel_err: float
    l2_rate: float | None = None
    linf_rate: float | None = None


@dataclass
class ConvergenceSetup:
    grid: Grid2
    model: Nonlinearity
    epsilon: float
    u0: Field
    T: float = 1.0
    family: str = "left_radau"
    eps_scaling: bool = False

    def context(self, spec: SchemeSpec) -> StepContext:
        op = build_operator(self.grid, self.epsilon, self.model.kappa, self.eps_scaling)
        return StepContext(op, self.model, spec)

    def run(self, spec: SchemeSpec) -> Field:
        return evolve(self.context(spec), self.u0, steps_for(self.T, spec.tau))


def steps_for(T: float, tau: float) -> int:
    n = round(T / tau)
    if n < 1 or abs(n * tau - T) > 1e-9 * max(T, 1.0):
        raise ValueError(f"T={T} is not an integer multiple of tau={tau}")
    return n


def convergence_table(
    setup: ConvergenceSetup,
    orders,
    taus,
    reference_spec: SchemeSpec | None = None,
    scheme_factory: Callable[[int, float], SchemeSpec] | None = None,
):
    """Error/rate rows per order against a fine reference run.

    The reference defaults to EI5 (left Radau) at min(taus)/16.  Tested schemes
    come from ``scheme_factory(order, tau)``, by default the family's standard
    node layout.  Returns a dict order -> list of ConvergenceRow sorted by
    decreasing tau.
    """
    taus = [float(t) for t in taus]
    if any(b >= a for a, b in zip(taus, taus[1:])):
        raise ValueError("taus must be strictly decreasing")
    if reference_spec is None:
        reference_spec = make_scheme(5, min(taus) / 16, "left_radau")
    if reference_spec.tau >= min(taus):
        raise ValueError("reference step must be smaller than every tested step")
    if scheme_factory is None:
        scheme_factory = lambda k, tau: make_scheme(k, tau, setup.family)  # noqa: E731
    u_ref = setup.run(reference_spec)
    table = {}
    for k in sorted(orders):
        errs = [relative_errors(setup.run(scheme_factory(k, tau)), u_ref) for tau in taus]
        l2 = [e[0] for e in errs]
        li = [e[1] for e in errs]
        r2, ri = observed_rates(taus, l2), observed_rates(taus, li)
        table[k] = [ConvergenceRow(k, t, a, b, c, d) for t, a, b, c, d in zip(taus, l2, li, r2, ri)]
    return table


def _fmt(x) -> str:
    return "" if x is None else f"{x:.17g}"


def write_convergence_csv(path, table):
    lines = [CONVERGENCE_HEADER]
    for k in sorted(table):
        for r in sorted(table[k], key=lambda r: -r.tau):
            lines.append(",".join([str(r.order), _fmt(r.tau), _fmt(r.l2_rel_err), _fmt(r.l2_rate), _fmt(r.linf_rel_err), _fmt(r.linf_rate)]))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


# --- time series ------------------------------------------------------------


@dataclass
class TimeSeriesRecord:
    step: int
    time: float
    energy: float
    sup_norm: float
    mbp_violation: float


@dataclass
class TimeSeries:
    grid: Grid2
    model: Nonlinearity
    epsilon: float
    records: list = field(default_factory=list)

    def record(self, step: int, time: float, v: Field):
        if self.records and time < self.records[-1].time:
            raise ValueError("time series must be non-decreasing in time")
        s = sup_norm(v)
        try:
            e = energy(self.grid, self.model, self.epsilon, v)
        except DomainViolationError:
            # out of the log domain; the next step reports the blow-up
            e = math.nan
        self.records.append(TimeSeriesRecord(step, time, e, s, max(0.0, s - self.model.beta)))

    @property
    def max_violation(self) -> float:
        return max((r.mbp_violation for r in self.records), default=0.0)

    def energy_increases(self, rtol: float = 1e-9):
        """(step, E_prev, E_next) wherever E_next > E_prev + rtol*|E_prev|."""
        out = []
        for a, b in zip(self.records, self.records[1:]):
            if b.energy > a.energy + rtol * abs(a.energy):
                out.append((b.step, a.energy, b.energy))
        return out

    def write_csv(self, path):
        lines = [TIMESERIES_HEADER]
        for r in self.records:
            lines.append(f"{r.step},{r.time:.17g},{r.energy:.17g},{r.sup_norm:.17g},{r.mbp_violation:.17g}")
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")


def format_time(t: float) -> str:
    return f"{t:.6g}"


def record_observer(
    series: TimeSeries,
    every: int = 1,
    snapshot_times: Sequence[float] = (),
    tau: float | None = None,
    outdir: str | None = None,
) -> Callable[[int, float, Field], None]:
    """Observer appending a record every ``every`` steps and writing snapshots.

    A snapshot at time t is written after step round(t / tau) into ``outdir``
    as snap_t<time>.csv and .pgm.
    """
    snaps = {}
    if snapshot_times and outdir is not None:
        if tau is None:
            raise ValueError("snapshots need tau to map times onto steps")
        snaps = {round(t / tau): t for t in snapshot_times}

    def observe(step: int, time: float, v: Field):
        if step % every == 0:
            series.record(step, time, v)
        if step in snaps:
            stem = os.path.join(outdir, f"snap_t{format_time(snaps[step])}")
            write_csv_matrix(stem + ".csv", v)
            write_pgm(stem + ".pgm", v, series.model.beta)

    return observe
