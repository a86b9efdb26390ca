from __future__ import annotations

import pandas as pd
from django.core.management.base import CommandParser

from bayes.services.update import time_to_mean_purity_parallel
from harness.config import RunConfig
from harness.management.base import CommandOutput, PurificationCommand
from passage.params import MtfpConfig
from passage.services.oracle import monte_carlo_mtfp
from protocols.timescales import timescale_table
from purification.exceptions import ConfigurationError

DEFAULT_EPSILONS = (1e-3, 1e-4, 1e-5, 1e-6)
COLUMNS = [
    "epsilon",
    "tau_perp",
    "tau_par",
    "tau_iso",
    "mtfp_par",
    "mtfp_iso",
    "mtfp_wr_exact",
    "ratio_par_perp",
    "ratio_par_iso",
    "ratio_mtfp",
]
BAYES_COLUMNS = ["tau_par_exact"]
MONTE_CARLO_COLUMNS = ["mtfp_iso_mc", "mtfp_iso_mc_stderr", "mtfp_iso_mc_censored", "mtfp_iso_quadrature"]


class Command(PurificationCommand):
    help = "Compare the protocols' purification timescales and their speed-up ratios."
    command_name = "protocols"

    def add_command_arguments(self, parser: CommandParser) -> None:
        parser.add_argument(
            "--bayes", action="store_true", help="Add the exact parallel mean-purity time from the POVM update."
        )
        parser.add_argument(
            "--monte-carlo",
            action="store_true",
            help="Add simulated isotropic passage times (needs --seed and --trajectories).",
        )

    def run(self, config: RunConfig, options: dict) -> CommandOutput:
        # an explicit empty --epsilons gives a header-only table
        epsilons = tuple(options["epsilons"]) if options.get("epsilons") is not None else None
        if epsilons is None:
            epsilons = config.epsilon_list(DEFAULT_EPSILONS)
        columns = list(COLUMNS)
        frame = pd.DataFrame(timescale_table(epsilons, config.gamma0), columns=columns)

        if options["bayes"]:
            columns += BAYES_COLUMNS
            frame["tau_par_exact"] = [time_to_mean_purity_parallel(e, gamma0=config.gamma0) for e in epsilons]
        if options["monte_carlo"]:
            seed = config.require_seed()
            if config.trajectories < 2:
                raise ConfigurationError("--monte-carlo needs --trajectories of at least 2")
            dt = 1e-3 if config.dt is None else config.dt
            checks = [
                monte_carlo_mtfp(
                    MtfpConfig(epsilon=e, gamma0=config.gamma0),
                    config.trajectories,
                    seed=seed,
                    dt=dt,
                    workers=config.workers,
                    horizon=config.horizon,
                )
                for e in epsilons
            ]
            columns += MONTE_CARLO_COLUMNS
            frame["mtfp_iso_mc"] = [check.summary.mean for check in checks]
            frame["mtfp_iso_mc_stderr"] = [check.summary.stderr for check in checks]
            frame["mtfp_iso_mc_censored"] = [check.summary.censored for check in checks]
            frame["mtfp_iso_quadrature"] = [check.quadrature for check in checks]
        return CommandOutput(tables={"protocols": frame.reindex(columns=columns)})
