"""Monte Carlo check of the passage-time quadrature with the reduced purity equation."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

from blochstate.state import BlochVector
from passage.params import DIFFUSION_FULL, MtfpConfig
from passage.services.quadrature import mtfp_quadrature
from protocols.spec import PROTOCOL_ISOTROPIC, ProtocolSpec
from purification.exceptions import ConfigurationError
from trajectories.params import DetectorParams
from trajectories.services.ensemble import EnsembleRunner, PassageSummary

logger = logging.getLogger(__name__)

# horizon in units of the quadrature estimate
HORIZON_FACTOR = 12.0


@dataclass(frozen=True)
class OracleComparison:
    quadrature: float
    summary: PassageSummary
    dt: float

    @property
    def z_score(self) -> float:
        if not (self.summary.stderr > 0.0):
            return math.nan
        return (self.summary.mean - self.quadrature) / self.summary.stderr

    def agrees(self, k: float = 3.0) -> bool:
        """Within ``k`` standard errors and no trajectory censored."""
        return self.summary.censored == 0 and abs(self.z_score) <= k

    def to_dict(self) -> dict[str, object]:
        return {
            "quadrature": self.quadrature,
            "monte_carlo": self.summary.mean,
            "stderr": self.summary.stderr,
            "z_score": self.z_score,
            "dt": self.dt,
            **{f"passage_{key}": value for key, value in self.summary.to_dict().items()},
        }


def monte_carlo_mtfp(
    config: MtfpConfig,
    trajectories: int,
    *,
    seed: int,
    dt: float = 1e-4,
    workers: int | None = None,
    horizon: float | None = None,
) -> OracleComparison:
    """Mean passage time of the simulated purity equation against the full-diffusion quadrature."""
    if trajectories < 2:
        raise ConfigurationError(f"at least two trajectories are needed, got {trajectories}")
    reference = mtfp_quadrature(replace(config, diffusion=DIFFUSION_FULL))
    if horizon is None:
        horizon = HORIZON_FACTOR * reference
    protocol = ProtocolSpec.build(PROTOCOL_ISOTROPIC, DetectorParams.from_inefficiency(config.delta, config.gamma0))
    runner = EnsembleRunner(
        protocol,
        seed=seed,
        dt=dt,
        horizon=horizon,
        threshold=1.0 - config.epsilon,
        workers=workers,
        reduced=True,
        halt_on_passage=True,
    )
    result = runner.run(trajectories, BlochVector.from_purity(config.p0))
    summary = result.passage_summary()
    if summary.censored:
        logger.warning(
            "Trajectories did not reach the target",
            extra={"censored": summary.censored, "horizon": horizon, "epsilon": config.epsilon},
        )
    comparison = OracleComparison(quadrature=reference, summary=summary, dt=runner.dt)
    logger.info("Monte Carlo passage check", extra=comparison.to_dict())
    return comparison


__all__ = ["OracleComparison", "monte_carlo_mtfp"]
