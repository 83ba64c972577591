"""Run configuration: flat ``section.key = value`` files plus command-line overrides.

Values are JSON literals (numbers, true/false, "strings", [lists], null) or
arithmetic in ``pi`` such as ``2*pi``; bare words are read as strings.  Every
entry remembers where it came from so errors can point at a file line.
"""

from __future__ import annotations

import ast
import json
import math
import operator
import re
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import ConfigError, ModelParameterError, QuadratureError
from .grid import Field, Grid2, build_operator
from .integrator import SchemeSpec, StepContext, default_node_count, make_scheme
from .model import FLORY_HUGGINS, POLYNOMIAL, Nonlinearity, flory_huggins, polynomial
from .quadrature import QuadratureFamily

INITIAL_PRESETS = ("sine", "random", "two_circles", "constant")

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv, ast.Pow: operator.pow}


def _arith(node):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return node.value
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _arith(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_arith(node.left), _arith(node.right))
    if isinstance(node, (ast.List, ast.Tuple)):
        return [_arith(e) for e in node.elts]
    raise ValueError("not arithmetic")


def parse_value(text: str):
    text = text.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        pass
    try:
        return _arith(ast.parse(text, mode="eval").body)
    except (SyntaxError, ValueError, ZeroDivisionError):
        pass
    return text


def _pos_int(v):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v or v < 1:
        raise ValueError("expected a positive integer")
    return int(v)


def _real(v):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ValueError("expected a real number")
    return float(v)


def _pos_real(v):
    v = _real(v)
    if v <= 0:
        raise ValueError("expected a positive number")
    return v


def _nonneg_int(v):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v or v < 0:
        raise ValueError("expected a non-negative integer")
    return int(v)


def _bool(v):
    if isinstance(v, bool):
        return v
    if isinstance(v, str) and v.lower() in ("true", "false", "yes", "no", "1", "0"):
        return v.lower() in ("true", "yes", "1")
    raise ValueError("expected true or false")


def _text(v):
    if not isinstance(v, str):
        raise ValueError("expected a string")
    return v


def _opt(conv):
    def inner(v):
        return None if v is None or v == "" else conv(v)

    return inner


def _listof(conv):
    def inner(v):
        if isinstance(v, str):
            items = [parse_value(s) for s in v.split(",")]
        else:
            items = v if isinstance(v, list) else [v]
        return tuple(conv(x) for x in items)

    return inner


def _family(v):
    return QuadratureFamily.parse(_text(v)).value


def _model_name(v):
    v = _text(v).lower().replace("-", "_")
    if v not in (POLYNOMIAL, FLORY_HUGGINS):
        raise ValueError(f"expected {POLYNOMIAL!r} or {FLORY_HUGGINS!r}")
    return v


def _initial(v):
    v = _text(v).strip()
    m = re.fullmatch(r"(\w+)\s*(?:\((.*)\))?", v)
    if m is None or m.group(1) not in INITIAL_PRESETS:
        raise ValueError(f"expected one of {INITIAL_PRESETS}")
    return v


@dataclass
class GridConfig:
    nx: int = 256
    ny: int = 256
    x0: float = 0.0
    x1: float = 2 * math.pi
    y0: float = 0.0
    y1: float = 2 * math.pi


@dataclass
class ModelConfig:
    name: str = POLYNOMIAL
    epsilon: float = 0.1
    theta: float = 0.8
    theta_c: float = 1.6
    kappa: float = 2.0
    kappa_override: float | None = None
    eps_scaling: bool = False


@dataclass
class SchemeConfig:
    order: tuple = (2, 3, 4, 5)
    quadrature_family: str = "left_radau"
    nodes_per_level: tuple | None = None
    uniform_nodes: bool = False
    tau: float = 0.1
    allow_non_mbp: bool = False


@dataclass
class RunBlock:
    T: float = 1.0
    record_every: int = 1
    snapshot_times: tuple = (0.0, 0.25, 0.5, 1.0, 1.5)
    seed: int = 42
    initial: str = "sine"
    initial_lo: float = -0.8
    initial_hi: float = 0.8
    initial_value: float = 0.0
    out: str = "runs/out"


@dataclass
class ConvergeBlock:
    orders: tuple = (2, 3, 4, 5)
    taus: tuple = (0.1, 0.05, 0.025, 0.0125, 0.00625)
    reference_order: int = 5
    reference_divisor: int = 16


SCHEMA = {
    "grid.nx": _pos_int,
    "grid.ny": _pos_int,
    "grid.x0": _real,
    "grid.x1": _real,
    "grid.y0": _real,
    "grid.y1": _real,
    "model.name": _model_name,
    "model.epsilon": _pos_real,
    "model.theta": _pos_real,
    "model.theta_c": _pos_real,
    "model.kappa": _pos_real,
    "model.kappa_override": _opt(_pos_real),
    "model.eps_scaling": _bool,
    "scheme.order": _listof(_pos_int),
    "scheme.quadrature_family": _family,
    "scheme.nodes_per_level": _opt(_listof(_pos_int)),
    "scheme.uniform_nodes": _bool,
    "scheme.tau": _pos_real,
    "scheme.allow_non_mbp": _bool,
    "run.T": _pos_real,
    "run.record_every": _pos_int,
    "run.snapshot_times": _listof(_real),
    "run.seed": _nonneg_int,
    "run.initial": _initial,
    "run.initial_lo": _real,
    "run.initial_hi": _real,
    "run.initial_value": _real,
    "run.out": _text,
    "converge.orders": _listof(_pos_int),
    "converge.taus": _listof(_pos_real),
    "converge.reference_order": _pos_int,
    "converge.reference_divisor": _pos_int,
}
ALIASES = {"model": "model.name"}


def read_config_file(path):
    """key -> (raw value, origin) for a config file."""
    entries = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            origin = f"{path}:{lineno}"
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise ConfigError(f"{origin}: expected 'key = value', got {line.strip()!r}")
            key, raw = (s.strip() for s in body.split("=", 1))
            key = ALIASES.get(key, key)
            if key not in SCHEMA:
                raise ConfigError(f"{origin}: unknown key {key!r}")
            if key in entries:
                raise ConfigError(f"{origin}: duplicate key {key!r} (first set at {entries[key][1]})")
            entries[key] = (parse_value(raw), origin)
    return entries


@dataclass
class RunConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    scheme: SchemeConfig = field(default_factory=SchemeConfig)
    run: RunBlock = field(default_factory=RunBlock)
    converge: ConvergeBlock = field(default_factory=ConvergeBlock)
    origins: dict = field(default_factory=dict)

    @classmethod
    def from_entries(cls, entries: dict) -> "RunConfig":
        cfg = cls()
        for key, (raw, origin) in entries.items():
            key = ALIASES.get(key, key)
            if key not in SCHEMA:
                raise ConfigError(f"{origin}: unknown key {key!r}")
            try:
                value = SCHEMA[key](raw)
            except (ValueError, QuadratureError) as err:
                raise ConfigError(f"{origin}: {key} = {raw!r}: {err}") from None
            section, attr = key.split(".")
            setattr(getattr(cfg, section), attr, value)
            cfg.origins[key] = origin
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path=None, overrides: dict | None = None) -> "RunConfig":
        entries = read_config_file(path) if path else {}
        for key, raw in (overrides or {}).items():
            key = ALIASES.get(key, key)
            entries[key] = (raw, f"--{key}")
        return cls.from_entries(entries)

    def _where(self, *keys) -> str:
        for k in keys:
            if k in self.origins:
                return self.origins[k]
        return "<defaults>"

    def validate(self):
        try:
            self.build_grid()
        except ValueError as err:
            raise ConfigError(f"{self._where('grid.nx', 'grid.ny', 'grid.x0', 'grid.x1', 'grid.y0', 'grid.y1')}: {err}") from None
        try:
            self.build_model()
        except (ModelParameterError, ValueError) as err:
            raise ConfigError(
                f"{self._where('model.kappa_override', 'model.kappa', 'model.theta_c', 'model.theta', 'model.name')}: {err}"
            ) from None
        try:
            for k in self.scheme.order:
                self.build_scheme(k, self.scheme.tau)
        except (ValueError, QuadratureError) as err:
            raise ConfigError(
                f"{self._where('scheme.nodes_per_level', 'scheme.quadrature_family', 'scheme.allow_non_mbp', 'scheme.order')}: {err}"
            ) from None
        name, args = self._initial_parts()
        if name == "random" and not self.random_bounds()[0] < self.random_bounds()[1]:
            raise ConfigError(f"{self._where('run.initial_lo', 'run.initial')}: random initial data needs lo < hi")
        c = self.converge
        if any(b >= a for a, b in zip(c.taus, c.taus[1:])):
            raise ConfigError(f"{self._where('converge.taus')}: taus must be strictly decreasing")
        if self.run.T / self.scheme.tau - round(self.run.T / self.scheme.tau) > 1e-9 * self.run.T / self.scheme.tau:
            raise ConfigError(f"{self._where('run.T', 'scheme.tau')}: T must be an integer multiple of tau")

    # builders

    def build_grid(self) -> Grid2:
        g = self.grid
        return Grid2(g.nx, g.ny, g.x0, g.x1, g.y0, g.y1)

    def build_model(self) -> Nonlinearity:
        m = self.model
        if m.name == POLYNOMIAL:
            return polynomial(m.kappa_override if m.kappa_override is not None else m.kappa)
        return flory_huggins(m.theta, m.theta_c, m.epsilon if m.eps_scaling else None, m.kappa_override)

    def node_counts(self, order: int):
        s = self.scheme
        if s.nodes_per_level is not None:
            return list(s.nodes_per_level)
        if s.uniform_nodes and order > 1:
            m = default_node_count(QuadratureFamily.parse(s.quadrature_family), order)
            return [m] * (order - 1)
        return None

    def build_scheme(self, order: int, tau: float, family: str | None = None) -> SchemeSpec:
        s = self.scheme
        return make_scheme(order, tau, family or s.quadrature_family, self.node_counts(order), s.allow_non_mbp)

    def build_context(self, spec: SchemeSpec, model: Nonlinearity | None = None) -> StepContext:
        model = model or self.build_model()
        op = build_operator(self.build_grid(), self.model.epsilon, model.kappa, self.model.eps_scaling)
        return StepContext(op, model, spec)

    def _initial_parts(self):
        m = re.fullmatch(r"(\w+)\s*(?:\((.*)\))?", self.run.initial.strip())
        args = [parse_value(a) for a in m.group(2).split(",")] if m.group(2) else []
        return m.group(1), args

    def random_bounds(self):
        name, args = self._initial_parts()
        lo = float(args[0]) if len(args) > 0 else self.run.initial_lo
        hi = float(args[1]) if len(args) > 1 else self.run.initial_hi
        seed = int(args[2]) if len(args) > 2 else self.run.seed
        return lo, hi, seed

    def initial_field(self, grid: Grid2 | None = None, model: Nonlinearity | None = None) -> Field:
        grid = grid or self.build_grid()
        name, args = self._initial_parts()
        if name == "sine":
            amp = float(args[0]) if args else 0.1
            return Field.from_function(grid, lambda x, y: amp * np.sin(x) * np.sin(y))
        if name == "constant":
            c = float(args[0]) if args else self.run.initial_value
            return Field.constant(grid, c)
        if name == "random":
            lo, hi, seed = self.random_bounds()
            return Field(grid, np.random.default_rng(seed).uniform(lo, hi, grid.shape))
        beta = (model or self.build_model()).beta
        eps = self.model.epsilon
        return Field.from_function(
            grid,
            lambda x, y: -beta
            * np.tanh((x**2 + (y - 0.3) ** 2 - 0.29**2) / eps**2)
            * np.tanh((x**2 + (y + 0.3) ** 2 - 0.29**2) / eps**2),
        )

    def echo(self) -> str:
        lines = []
        for section in ("grid", "model", "scheme", "run", "converge"):
            block = getattr(self, section)
            for f in fields(block):
                if (section, f.name) == ("run", "out"):
                    continue  # the echo lives inside that directory
                v = getattr(block, f.name)
                if isinstance(v, tuple):
                    v = list(v)
                lines.append(f"{section}.{f.name} = {json.dumps(v)}")
        lines.append("# energy gradient = spectral (Fourier differentiation)")
        return "\n".join(lines) + "\n"
