from __future__ import annotations

import numpy as np
import pandas as pd
from django.core.management.base import CommandParser

from blochstate.state import BlochVector
from harness.config import RunConfig
from harness.management.base import CommandOutput, PurificationCommand
from protocols.spec import PROTOCOL_KINDS, ProtocolSpec
from trajectories.params import DetectorParams
from trajectories.services.ensemble import EnsembleRunner
from trajectories.services.stepping import NORM_CONSISTENT, SCHEMES

DEFAULT_HORIZON = 5.0
PASSAGE_COLUMNS = ["trajectory", "passage_time", "censored"]
ENSEMBLE_COLUMNS = ["time", "mean_purity", "stderr_purity", "mean_log_entropy", "stderr_log_entropy"]


class Command(PurificationCommand):
    help = "Run a seeded trajectory ensemble and write passage times and ensemble averages."
    command_name = "simulate"

    def add_command_arguments(self, parser: CommandParser) -> None:
        parser.add_argument("--protocol", choices=PROTOCOL_KINDS, default=None, help="Purification protocol.")
        parser.add_argument("--scheme", choices=SCHEMES, default=NORM_CONSISTENT, help="Stepping scheme.")
        parser.add_argument(
            "--reduced",
            action="store_true",
            help="Step the scalar purity equation (isotropic protocol only).",
        )
        parser.add_argument("--output-points", type=int, default=None, help="Points of the output time grid.")

    def run(self, config: RunConfig, options: dict) -> CommandOutput:
        seed = config.require_seed()
        params = DetectorParams.from_inefficiency(config.delta, config.gamma0)
        protocol = ProtocolSpec.build(config.protocol, params)
        threshold = None if config.epsilon is None else 1.0 - config.epsilon
        runner = EnsembleRunner(
            protocol,
            seed=seed,
            dt=config.dt,
            horizon=DEFAULT_HORIZON if config.horizon is None else config.horizon,
            threshold=threshold,
            workers=config.workers,
            scheme=options["scheme"],
            reduced=options["reduced"],
            output_points=options.get("output_points"),
        )
        result = runner.run(config.trajectories, BlochVector.from_purity(config.p0))

        passage = pd.DataFrame(
            {
                "trajectory": np.arange(result.trajectories),
                "passage_time": result.passage_times,
                "censored": result.censored,
            },
            columns=PASSAGE_COLUMNS,
        )
        if result.trajectories:
            ensemble = pd.DataFrame(
                {
                    "time": result.times,
                    "mean_purity": result.mean_purity,
                    "stderr_purity": result.stderr_purity,
                    "mean_log_entropy": result.mean_log_entropy,
                    "stderr_log_entropy": result.stderr_log_entropy,
                },
                columns=ENSEMBLE_COLUMNS,
            )
        else:
            ensemble = pd.DataFrame(columns=ENSEMBLE_COLUMNS)
        tables = {"passage": passage, "ensemble": ensemble}
        if threshold is not None:
            tables["summary"] = pd.DataFrame([{"threshold": threshold, **result.passage_summary().to_dict()}])
        header = {"scheme": options["scheme"], "reduced": options["reduced"], "resolved_dt": runner.dt}
        return CommandOutput(tables=tables, header=header)
