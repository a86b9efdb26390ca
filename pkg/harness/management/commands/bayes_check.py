from __future__ import annotations

import pandas as pd
from django.core.management.base import CommandParser

from bayes.services.equivalence import EQUIVALENCE_CONSTANT, sde_povm_equivalence_check
from harness.config import RunConfig
from harness.management.base import CommandOutput, PurificationCommand

DEFAULT_PATHS = 1000
DEFAULT_TAU = 1.0


class Command(PurificationCommand):
    help = "Check that the parallel-detector SDE and the exact POVM update agree path by path."
    command_name = "bayes_check"

    def add_command_arguments(self, parser: CommandParser) -> None:
        parser.add_argument("--z0", type=float, default=0.0, help="Initial Bloch z component.")
        parser.add_argument("--tau", type=float, default=None, help="Integration window (defaults to --horizon).")
        parser.add_argument(
            "--constant",
            type=float,
            default=EQUIVALENCE_CONSTANT,
            help="Gap tolerance in units of sqrt(dt * gamma0).",
        )

    def run(self, config: RunConfig, options: dict) -> CommandOutput:
        seed = config.require_seed()
        tau = options.get("tau") or config.horizon or DEFAULT_TAU
        report = sde_povm_equivalence_check(
            options["z0"],
            tau,
            1e-3 if config.dt is None else config.dt,
            config.trajectories or DEFAULT_PATHS,
            seed=seed,
            gamma0=config.gamma0,
            constant=options["constant"],
        )
        paths = pd.DataFrame({"z_sde": report.z_sde, "z_povm": report.z_povm, "gap": report.gaps})
        paths.insert(0, "path", range(len(paths)))
        failures = []
        if not report.passed:
            failures.append(f"max gap {report.max_gap:.3g} exceeds the tolerance {report.tolerance:.3g}")
        header = {"z0": options["z0"], "tau": tau, "constant": options["constant"]}
        return CommandOutput(
            tables={"equivalence": pd.DataFrame([report.to_dict()]), "paths": paths},
            header=header,
            failures=failures,
        )
