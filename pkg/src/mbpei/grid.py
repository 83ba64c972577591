"""Periodic 2D grids, scalar fields, and the FFT-diagonalised stabilised operator.

The operator is L = d * Delta_h - kappa with Delta_h the 5-point central
difference Laplacian on a periodic grid.  Its eigenvectors are Fourier modes,
so exp(tL) and phi_1 reduce to elementwise multiplication in Fourier space.
Values are stored with shape (nx, ny), index [i, j] <-> (x_i, y_j).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FieldCorruptionError, GridMismatchError


@dataclass(frozen=True)
class Grid2:
    nx: int
    ny: int
    x0: float = 0.0
    x1: float = 2.0 * np.pi
    y0: float = 0.0
    y1: float = 2.0 * np.pi

    def __post_init__(self):
        if int(self.nx) != self.nx or int(self.ny) != self.ny or self.nx < 2 or self.ny < 2:
            raise ValueError(f"grid needs integer nx, ny >= 2, got ({self.nx}, {self.ny})")
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError("grid extents must satisfy x1 > x0 and y1 > y0")

    @classmethod
    def square(cls, n: int, lo: float = 0.0, hi: float = 2.0 * np.pi) -> "Grid2":
        return cls(n, n, lo, hi, lo, hi)

    @property
    def hx(self) -> float:
        return (self.x1 - self.x0) / self.nx

    @property
    def hy(self) -> float:
        return (self.y1 - self.y0) / self.ny

    @property
    def shape(self):
        return (self.nx, self.ny)

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    def coords(self):
        """Meshgrid (X, Y), both of shape (nx, ny); the right endpoint is excluded."""
        x = self.x0 + self.hx * np.arange(self.nx)
        y = self.y0 + self.hy * np.arange(self.ny)
        return np.meshgrid(x, y, indexing="ij")


@dataclass(frozen=True, eq=False)
class Field:
    grid: Grid2
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise GridMismatchError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise FieldCorruptionError("field contains NaN or Inf")
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, grid: Grid2, c: float) -> "Field":
        return cls(grid, np.full(grid.shape, float(c)))

    @classmethod
    def from_function(cls, grid: Grid2, fn) -> "Field":
        X, Y = grid.coords()
        return cls(grid, np.broadcast_to(fn(X, Y), grid.shape).copy())


def _check_same_grid(a: Grid2, b: Grid2):
    if a != b:
        raise GridMismatchError(f"grid mismatch: {a} vs {b}")


def laplacian_eigenvalues(grid: Grid2) -> np.ndarray:
    """Eigenvalues of the periodic central-difference Laplacian, shape (nx, ny)."""
    p = np.arange(grid.nx)[:, None]
    q = np.arange(grid.ny)[None, :]
    return -(4.0 / grid.hx**2) * np.sin(np.pi * p / grid.nx) ** 2 - (4.0 / grid.hy**2) * np.sin(
        np.pi * q / grid.ny
    ) ** 2


@dataclass(eq=False)
class StabilizedOperator:
    """Spectral form of L = diffusion * Delta_h - kappa.

    ``diffusion`` is epsilon**2 for the standard scaling and epsilon for the
    u_t = eps Delta u + f/eps scaling.  Exponential and phi_1 factor arrays are
    cached per time value; a racing insert only duplicates work.
    """

    grid: Grid2
    epsilon: float
    kappa: float
    diffusion: float
    symbol: np.ndarray
    _exp_cache: dict = field(default_factory=dict, repr=False)
    _phi_cache: dict = field(default_factory=dict, repr=False)

    @property
    def _half(self) -> np.ndarray:
        # rfft2 keeps the first ny//2 + 1 columns; the symbol is even so nothing is lost
        return self.symbol[:, : self.grid.ny // 2 + 1]

    def fft(self, values: np.ndarray) -> np.ndarray:
        return np.fft.rfft2(values)

    def ifft(self, spectrum: np.ndarray) -> np.ndarray:
        return np.fft.irfft2(spectrum, s=self.grid.shape)

    def exp_factor(self, t: float) -> np.ndarray:
        key = float(t)
        fac = self._exp_cache.get(key)
        if fac is None:
            fac = np.exp(key * self._half)
            self._exp_cache[key] = fac
        return fac

    def phi1_factor(self, tau: float) -> np.ndarray:
        """(e^{tau L} - I) L^{-1} per mode; symbol <= -kappa < 0 so no division by zero."""
        key = float(tau)
        fac = self._phi_cache.get(key)
        if fac is None:
            fac = np.expm1(key * self._half) / self._half
            self._phi_cache[key] = fac
        return fac


def build_operator(grid: Grid2, epsilon: float, kappa: float, eps_scaling: bool = False) -> StabilizedOperator:
    if not epsilon > 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")
    if not kappa > 0.0:
        raise ValueError(f"kappa must be positive, got {kappa!r}")
    diffusion = float(epsilon) if eps_scaling else float(epsilon) ** 2
    symbol = diffusion * laplacian_eigenvalues(grid) - float(kappa)
    symbol[0, 0] = -float(kappa)
    return StabilizedOperator(grid, float(epsilon), float(kappa), diffusion, symbol)


def apply_exp(op: StabilizedOperator, t: float, v: Field) -> Field:
    _check_same_grid(op.grid, v.grid)
    if not t >= 0.0:
        raise ValueError(f"t must be non-negative, got {t!r}")
    if t == 0.0:
        return Field(v.grid, v.values.copy())
    return Field(v.grid, op.ifft(op.exp_factor(t) * op.fft(v.values)))


def apply_phi1(op: StabilizedOperator, tau: float, v: Field) -> Field:
    _check_same_grid(op.grid, v.grid)
    if not tau > 0.0:
        raise ValueError(f"tau must be positive, got {tau!r}")
    return Field(v.grid, op.ifft(op.phi1_factor(tau) * op.fft(v.values)))


def apply_operator(op: StabilizedOperator, v: Field) -> Field:
    """L v, evaluated spectrally."""
    _check_same_grid(op.grid, v.grid)
    return Field(v.grid, op.ifft(op._half * op.fft(v.values)))


def _finite_values(v) -> np.ndarray:
    vals = v.values if isinstance(v, Field) else np.asarray(v, dtype=float)
    if not np.all(np.isfinite(vals)):
        raise FieldCorruptionError("field contains NaN or Inf")
    return vals


def sup_norm(v) -> float:
    return float(np.max(np.abs(_finite_values(v))))


def l2_norm(v, grid: Grid2 | None = None) -> float:
    """sqrt(hx * hy * sum v^2)."""
    vals = _finite_values(v)
    g = v.grid if isinstance(v, Field) else grid
    return float(np.sqrt(g.hx * g.hy * np.sum(vals * vals)))


# --- snapshot export --------------------------------------------------------


def write_csv_matrix(path, v: Field):
    """Headerless CSV, ny rows x nx columns (row j holds y_j), 17 significant digits."""
    rows = [",".join(f"{x:.17g}" for x in row) for row in v.values.T]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(rows) + "\n")


def read_csv_matrix(path, grid: Grid2) -> Field:
    data = np.loadtxt(path, delimiter=",", ndmin=2)
    return Field(grid, data.T)


def write_pgm(path, v: Field, beta: float):
    """Binary 8-bit PGM in the CSV orientation, [-beta, beta] mapped onto [0, 255]; out-of-range values clip."""
    scaled = np.rint((v.values.T + beta) / (2.0 * beta) * 255.0)
    img = np.clip(scaled, 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{v.grid.nx} {v.grid.ny}\n255\n".encode("ascii"))
        fh.write(img.tobytes())
