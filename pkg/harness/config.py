"""Run configuration shared by the management commands.

Values come from an optional ``key = value`` file and are overridden by
command-line flags. Unknown keys and values that fail conversion are usage
errors naming the key.
"""
from __future__ import annotations

import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass, fields
from pathlib import Path

from django.conf import settings

import purification
from protocols.spec import PROTOCOL_ISOTROPIC, PROTOCOL_KINDS
from purification.exceptions import ConfigurationError

TIME_UNIT = "1/gamma0"


def _float_list(raw: str) -> tuple[float, ...]:
    return tuple(float(item) for item in raw.replace(",", " ").split())


def _optional_int(raw: str) -> int | None:
    return None if raw.lower() in {"", "none"} else int(raw)


def _optional_float(raw: str) -> float | None:
    return None if raw.lower() in {"", "none"} else float(raw)


CONFIG_CONVERTERS: dict[str, Callable[[str], object]] = {
    "protocol": str,
    "gamma0": float,
    "eta": float,
    "delta": float,
    "epsilon": _optional_float,
    "epsilons": _float_list,
    "dt": _optional_float,
    "horizon": _optional_float,
    "trajectories": int,
    "seed": _optional_int,
    "workers": _optional_int,
    "p0": float,
    "out": str,
}


def load_config_file(path: str | Path) -> dict[str, object]:
    """Parse ``key = value`` lines; blank lines and ``#`` comments are skipped."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from exc
    values: dict[str, object] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep:
            raise ConfigurationError(f"{path}:{number}: expected 'key = value', got {line!r}")
        if key not in CONFIG_CONVERTERS:
            raise ConfigurationError(f"{path}:{number}: unknown key {key!r}")
        try:
            values[key] = CONFIG_CONVERTERS[key](raw.strip())
        except ValueError as exc:
            raise ConfigurationError(f"{path}:{number}: invalid value for {key!r}: {raw.strip()!r}") from exc
    return values


@dataclass(frozen=True)
class RunConfig:
    """Command settings; all but the output path and worker count go into the file headers."""

    command: str
    protocol: str = PROTOCOL_ISOTROPIC
    gamma0: float = 1.0
    delta: float = 0.0
    epsilon: float | None = None
    epsilons: tuple[float, ...] = ()
    dt: float | None = None
    horizon: float | None = None
    trajectories: int = 0
    seed: int | None = None
    workers: int | None = None
    p0: float = 0.5
    out: str | None = None

    def __post_init__(self) -> None:
        if self.protocol not in PROTOCOL_KINDS:
            raise ConfigurationError(f"protocol must be one of {PROTOCOL_KINDS}, got {self.protocol!r}")
        if not (self.gamma0 > 0.0 and math.isfinite(self.gamma0)):
            raise ConfigurationError(f"gamma0 must be positive and finite, got {self.gamma0}")
        if not 0.0 <= self.delta < 1.0:
            raise ConfigurationError(f"delta must lie in [0, 1), got {self.delta}")
        for epsilon in (self.epsilon, *self.epsilons):
            if epsilon is not None and not 0.0 < epsilon < 0.5:
                raise ConfigurationError(f"epsilon must lie in (0, 0.5), got {epsilon}")
        if self.dt is not None and not self.dt > 0.0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if self.horizon is not None and not self.horizon > 0.0:
            raise ConfigurationError(f"horizon must be positive, got {self.horizon}")
        if self.trajectories < 0:
            raise ConfigurationError(f"trajectories must be non-negative, got {self.trajectories}")
        if self.seed is not None and self.seed < 0:
            raise ConfigurationError(f"seed must be a non-negative integer, got {self.seed}")
        if self.workers is not None and self.workers < 1:
            raise ConfigurationError(f"workers must be at least 1, got {self.workers}")
        if not 0.5 <= self.p0 < 1.0:
            raise ConfigurationError(f"p0 must lie in [1/2, 1), got {self.p0}")

    @classmethod
    def from_options(cls, command: str, options: Mapping[str, object]) -> RunConfig:
        """Merge the ``--config`` file with flags; a flag left at ``None`` keeps the file value."""
        values = load_config_file(options["config"]) if options.get("config") else {}
        both_flags = options.get("eta") is not None and options.get("delta") is not None
        if both_flags or ("eta" in values and "delta" in values):
            raise ConfigurationError("eta and delta are mutually exclusive")
        for name in CONFIG_CONVERTERS:
            flag = options.get(name)
            if flag is not None:
                if name in {"eta", "delta"}:
                    values.pop("eta", None)
                    values.pop("delta", None)
                values[name] = tuple(flag) if name == "epsilons" else flag
        eta = values.pop("eta", None)
        if eta is not None:
            if not 0.0 < float(eta) <= 1.0:
                raise ConfigurationError(f"eta must lie in (0, 1], got {eta}")
            values["delta"] = 1.0 - float(eta)
        return cls(command=command, **values)

    @property
    def eta(self) -> float:
        return 1.0 - self.delta

    def require_seed(self) -> int:
        if self.seed is None:
            raise ConfigurationError(f"--seed is required for the stochastic {self.command} command")
        return self.seed

    def epsilon_list(self, default: tuple[float, ...] = ()) -> tuple[float, ...]:
        if self.epsilons:
            return self.epsilons
        if self.epsilon is not None:
            return (self.epsilon,)
        return default

    def output_dir(self) -> Path:
        if self.out:
            return Path(self.out)
        return Path(getattr(settings, "PURIFICATION_OUTPUT_DIR", "runs")) / self.command

    def header_items(self) -> dict[str, object]:
        items: dict[str, object] = {"version": purification.__version__, "time_unit": TIME_UNIT}
        for item in fields(self):
            if item.name not in {"out", "workers"}:
                items[item.name] = getattr(self, item.name)
        return items


__all__ = ["CONFIG_CONVERTERS", "TIME_UNIT", "RunConfig", "load_config_file"]
