from __future__ import annotations

import math

import numpy as np
import pandas as pd
from django.core.management.base import CommandParser

from harness.config import RunConfig
from harness.management.base import CommandOutput, PurificationCommand, float_list
from passage.services.scaling import fit_ideal_constant, scaling_study

DEFAULT_EPSILONS = (1e-4, 1e-5, 1e-6)
DEFAULT_SMALL_A = tuple(float(a) for a in np.linspace(0.0, 5.0, 21))
DEFAULT_LARGE_A = (20.0, 60.0, 200.0, 600.0, 2000.0)
# a * epsilon stays small up to a = 2000
DEFAULT_LARGE_A_EPSILON = 1e-8


class Command(PurificationCommand):
    help = "Excess passage time against a = delta/epsilon: small-a curves, large-a exponent and the ideal constant."
    command_name = "scaling"

    def add_command_arguments(self, parser: CommandParser) -> None:
        float_list(parser, "--small-a", "Ratios of the small-a table.")
        float_list(parser, "--large-a", "Ratios of the large-a table (each at least 10).")
        float_list(parser, "--large-a-epsilons", "Target impurities of the large-a table.")
        parser.add_argument("--skip-ideal", action="store_true", help="Do not fit the ideal-detector constant.")

    def run(self, config: RunConfig, options: dict) -> CommandOutput:
        epsilons = config.epsilon_list(DEFAULT_EPSILONS)
        small_a = _grid(options, "small_a", DEFAULT_SMALL_A)
        large_a = _grid(options, "large_a", DEFAULT_LARGE_A)
        large_epsilons = _grid(options, "large_a_epsilons", (DEFAULT_LARGE_A_EPSILON,))
        common = {"workers": config.workers, "p0": config.p0, "gamma0": config.gamma0}

        small = scaling_study(epsilons, small_a, exponent_min=math.inf, **common)
        large = scaling_study(large_epsilons, large_a, **common)
        tables = {
            "fig3": pd.DataFrame(
                [{"a": p.a, "epsilon": p.epsilon, "delta_T": p.delta_T} for p in small.points],
                columns=["a", "epsilon", "delta_T"],
            ),
            "fig4": pd.DataFrame(
                [
                    {"a": p.a, "epsilon": p.epsilon, "ln_delta_T": p.log_delta_T, "C1": p.local_exponent}
                    for p in large.points
                ],
                columns=["a", "epsilon", "ln_delta_T", "C1"],
            ),
            "collapse": pd.DataFrame(small.collapse(), columns=["epsilon", "reference", "sup_relative_gap"]),
        }
        if not options["skip_ideal"]:
            fit = fit_ideal_constant(p0=config.p0, gamma0=config.gamma0)
            row = {key: value for key, value in fit.to_dict().items() if key != "epsilons"}
            tables["ideal"] = pd.DataFrame([row], columns=["constant", "slope", "intercept", "residual"])
        header = {"small_a": small_a, "large_a": large_a, "large_a_epsilons": large_epsilons}
        return CommandOutput(tables=tables, header=header)


def _grid(options: dict, name: str, default: tuple[float, ...]) -> tuple[float, ...]:
    value = options.get(name)
    return default if value is None else tuple(float(a) for a in value)
