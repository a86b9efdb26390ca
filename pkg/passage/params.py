"""Parameters of a mean first-passage-time computation."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

from django.conf import settings

from purification.exceptions import ConfigurationError

DIFFUSION_HIGH_PURITY = "high-purity"
DIFFUSION_FULL = "full"
DIFFUSION_CHOICES = (
    (DIFFUSION_HIGH_PURITY, "B_HP(p) = 8 G0 (1-p)^2"),
    (DIFFUSION_FULL, "B(p) = 8 G0 (2p-1)(1-p)^2"),
)
DIFFUSION_MODES = tuple(value for value, _ in DIFFUSION_CHOICES)

DEFAULT_MTFP_RTOL = 1e-6


def default_rtol() -> float:
    return float(getattr(settings, "PURIFICATION_MTFP_RTOL", DEFAULT_MTFP_RTOL))


@dataclass(frozen=True)
class MtfpConfig:
    """Absorbing level ``p = 1 - epsilon``, reflecting level ``p = 1/2``, start ``p0``."""

    epsilon: float
    delta: float = 0.0
    p0: float = 0.5
    gamma0: float = 1.0
    diffusion: str = DIFFUSION_HIGH_PURITY
    rtol: float | None = None

    def __post_init__(self) -> None:
        epsilon, delta, p0 = float(self.epsilon), float(self.delta), float(self.p0)
        if not 0.0 < epsilon < 0.5:
            raise ConfigurationError(f"epsilon must lie in (0, 0.5), got {epsilon}")
        if not 0.0 <= delta < 1.0:
            raise ConfigurationError(f"delta must lie in [0, 1), got {delta}")
        if not 0.5 <= p0 < 1.0 - epsilon:
            raise ConfigurationError(f"p0 must lie in [1/2, 1 - epsilon), got {p0}")
        if not (self.gamma0 > 0.0 and math.isfinite(self.gamma0)):
            raise ConfigurationError(f"gamma0 must be positive and finite, got {self.gamma0}")
        if self.diffusion not in DIFFUSION_MODES:
            raise ConfigurationError(f"unknown diffusion {self.diffusion!r}; expected one of {DIFFUSION_MODES}")
        rtol = default_rtol() if self.rtol is None else float(self.rtol)
        if not 0.0 < rtol < 1e-2:
            raise ConfigurationError(f"rtol must lie in (0, 1e-2), got {rtol}")
        object.__setattr__(self, "epsilon", epsilon)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "p0", p0)
        object.__setattr__(self, "gamma0", float(self.gamma0))
        object.__setattr__(self, "rtol", rtol)

    @property
    def eta(self) -> float:
        return 1.0 - self.delta

    @property
    def ratio(self) -> float:
        """``a = delta / epsilon``."""
        return self.delta / self.epsilon

    def ideal(self) -> "MtfpConfig":
        return replace(self, delta=0.0)

    def with_ratio(self, a: float) -> "MtfpConfig":
        return replace(self, delta=float(a) * self.epsilon)

    def cache_key(self) -> str:
        return f"mtfp:{self.diffusion}:{self.epsilon!r}:{self.delta!r}:{self.p0!r}:{self.gamma0!r}:{self.rtol!r}"

    def to_dict(self) -> dict[str, object]:
        return asdict(self)


__all__ = ["DIFFUSION_CHOICES", "DIFFUSION_FULL", "DIFFUSION_HIGH_PURITY", "DIFFUSION_MODES", "MtfpConfig"]
