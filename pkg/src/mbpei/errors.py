"""Exception types shared across the package."""


class QuadratureError(ValueError):
    """Invalid rule request, or a generated rule failed its closed-form cross-check."""


class GridMismatchError(ValueError):
    """Field and operator (or two fields) live on different grids."""


class FieldCorruptionError(ValueError):
    """A field contains NaN or Inf."""


class ModelParameterError(ValueError):
    """Nonlinearity parameters are inconsistent (no root, kappa too small, ...)."""


class DomainViolationError(FloatingPointError):
    """Field left the domain of the nonlinearity (|u| >= 1 for Flory-Huggins)."""

    def __init__(self, max_abs, message=None):
        self.max_abs = float(max_abs)
        super().__init__(message or f"field leaves (-1, 1): max |u| = {self.max_abs!r}")


class BlowUpError(DomainViolationError):
    """Domain violation raised during time stepping, tagged with where it happened."""

    def __init__(self, step, time, max_abs):
        self.step = int(step)
        self.time = float(time)
        super().__init__(
            max_abs,
            f"blow-up at step {self.step} (t = {self.time:.17g}): max |u| = {float(max_abs):.17g}",
        )


class ConfigError(ValueError):
    """Malformed or invalid run configuration."""
