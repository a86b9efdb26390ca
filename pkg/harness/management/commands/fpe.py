from __future__ import annotations

import math

import pandas as pd
from django.core.management.base import CommandParser

from fokkerplanck.services.evolution import (
    DEFAULT_FPE_DT,
    IMPLICIT,
    SCHEMES,
    mean_crossing_time,
    mean_purity_history,
    stationary_distribution,
)
from harness.config import RunConfig
from harness.management.base import CommandOutput, PurificationCommand
from protocols.mean_purity import stationary_mean_purity

DEFAULT_T_END = 5.0


class Command(PurificationCommand):
    help = "Evolve the purity density of the three-detector protocol and compare its mean with the naive equation."
    command_name = "fpe"

    def add_command_arguments(self, parser: CommandParser) -> None:
        parser.add_argument("--t-end", type=float, default=DEFAULT_T_END, help="Evolution time.")
        parser.add_argument("--cells", type=int, default=None, help="Finite-volume cells.")
        parser.add_argument("--scheme", choices=SCHEMES, default=IMPLICIT, help="Time stepping.")

    def run(self, config: RunConfig, options: dict) -> CommandOutput:
        dt = DEFAULT_FPE_DT if config.dt is None else config.dt
        cells = options.get("cells")
        history = mean_purity_history(
            config.eta,
            config.p0,
            options["t_end"],
            dt,
            cells=cells,
            scheme=options["scheme"],
            gamma0=config.gamma0,
        )
        tables = {
            "history": pd.DataFrame(history.to_frame_columns()),
            "density": pd.DataFrame(history.final.to_frame_columns()),
        }
        summary = {
            "final_time": float(history.times[-1]),
            "final_mean_purity": float(history.mean_purity[-1]),
            "max_gap_naive": history.max_gap,
            "stationary_mean_purity": math.nan,
            "stationary_mean_purity_naive": math.nan,
            "crossing_time": math.nan,
        }
        if config.eta < 1.0:
            stationary = stationary_distribution(config.eta, cells, gamma0=config.gamma0)
            tables["stationary"] = pd.DataFrame(stationary.to_frame_columns())
            summary["stationary_mean_purity"] = stationary.mean_purity()
            summary["stationary_mean_purity_naive"] = stationary_mean_purity(config.eta)
        if config.epsilon is not None:
            summary["crossing_time"] = mean_crossing_time(
                config.eta, config.epsilon, config.p0, dt, horizon=config.horizon, cells=cells, gamma0=config.gamma0
            )
        tables["summary"] = pd.DataFrame([summary])
        header = {"t_end": options["t_end"], "cells": cells, "scheme": options["scheme"]}
        return CommandOutput(tables=tables, header=header)
