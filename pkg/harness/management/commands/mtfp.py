from __future__ import annotations

from dataclasses import replace

import pandas as pd
from django.core.management.base import CommandParser

from harness.config import RunConfig
from harness.management.base import CommandOutput, PurificationCommand, float_list
from passage.params import DIFFUSION_HIGH_PURITY, DIFFUSION_MODES, MtfpConfig
from passage.services.quadrature import log_mtfp_quadrature, mtfp_quadrature

DEFAULT_EPSILONS = (1e-4,)
COLUMNS = ["delta", "epsilon", "a", "T_bar", "T_bar_ideal", "delta_T", "log_T_bar"]


class Command(PurificationCommand):
    help = "Tabulate the mean first-passage time over a grid of inefficiencies and target impurities."
    command_name = "mtfp"

    def add_command_arguments(self, parser: CommandParser) -> None:
        float_list(parser, "--deltas", "Detector inefficiencies; defaults to --delta/--eta.")
        parser.add_argument("--diffusion", choices=DIFFUSION_MODES, default=DIFFUSION_HIGH_PURITY)
        parser.add_argument("--rtol", type=float, default=None, help="Relative tolerance of the quadrature.")

    def run(self, config: RunConfig, options: dict) -> CommandOutput:
        deltas = tuple(options["deltas"]) if options.get("deltas") is not None else (config.delta,)
        rows = []
        for epsilon in config.epsilon_list(DEFAULT_EPSILONS):
            ideal = MtfpConfig(
                epsilon=epsilon,
                p0=config.p0,
                gamma0=config.gamma0,
                diffusion=options["diffusion"],
                rtol=options.get("rtol"),
            )
            t_ideal = mtfp_quadrature(ideal)
            for delta in deltas:
                point = replace(ideal, delta=float(delta))
                t_bar = mtfp_quadrature(point) if delta else t_ideal
                rows.append(
                    {
                        "delta": float(delta),
                        "epsilon": epsilon,
                        "a": float(delta) / epsilon,
                        "T_bar": t_bar,
                        "T_bar_ideal": t_ideal,
                        "delta_T": t_bar - t_ideal,
                        "log_T_bar": log_mtfp_quadrature(point),
                    }
                )
        header = {"diffusion": options["diffusion"], "deltas": deltas, "rtol": options.get("rtol")}
        return CommandOutput(tables={"mtfp": pd.DataFrame(rows, columns=COLUMNS)}, header=header)
