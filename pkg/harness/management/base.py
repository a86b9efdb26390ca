from __future__ import annotations

import logging
from dataclasses import dataclass, field

import pandas as pd
from django.core.management.base import BaseCommand, CommandError, CommandParser

from harness.config import RunConfig
from harness.output import write_table
from purification.exceptions import AcceptanceCheckFailed, ConfigurationError, NumericalError

logger = logging.getLogger(__name__)

EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_ACCEPTANCE = 3


@dataclass
class CommandOutput:
    tables: dict[str, pd.DataFrame]
    header: dict[str, object] = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)


def float_list(parser: CommandParser, name: str, help_text: str, default=None) -> None:
    parser.add_argument(name, type=float, nargs="*", default=default, help=help_text)


class PurificationCommand(BaseCommand):
    """Common flags, config merging, error translation and CSV output.

    Subclasses implement ``run(config, options)`` and return the tables to write.
    """

    command_name = ""

    def create_parser(self, prog_name: str, subcommand: str, **kwargs) -> CommandParser:
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        exit_parser = parser.exit

        def usage_exit(status: int = 0, message: str | None = None):
            exit_parser(EXIT_USAGE if status else 0, message)

        parser.exit = usage_exit
        return parser

    def add_arguments(self, parser: CommandParser) -> None:
        parser.add_argument("--config", default=None, help="key = value file; flags override its entries.")
        parser.add_argument("--gamma0", type=float, default=None, help="Measurement rate (default 1.0).")
        efficiency = parser.add_mutually_exclusive_group()
        efficiency.add_argument("--eta", type=float, default=None, help="Detector efficiency.")
        efficiency.add_argument("--delta", type=float, default=None, help="Detector inefficiency 1 - eta.")
        parser.add_argument("--epsilon", type=float, default=None, help="Target impurity: purity 1 - epsilon.")
        float_list(parser, "--epsilons", "List of target impurities.")
        parser.add_argument("--dt", type=float, default=None, help="Time step in units of 1/gamma0.")
        parser.add_argument("--horizon", type=float, default=None, help="Simulated time in units of 1/gamma0.")
        parser.add_argument("--trajectories", type=int, default=None, help="Ensemble size.")
        parser.add_argument("--seed", type=int, default=None, help="Run seed; required for stochastic runs.")
        parser.add_argument("--workers", type=int, default=None, help="Worker processes (default: all cores).")
        parser.add_argument("--p0", type=float, default=None, help="Initial purity (default 1/2).")
        parser.add_argument("--out", default=None, help="Output directory, one CSV per table.")
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser: CommandParser) -> None:
        """Hook for command-specific flags."""

    def run(self, config: RunConfig, options: dict) -> CommandOutput:
        raise NotImplementedError

    def handle(self, *args, **options):
        try:
            config = RunConfig.from_options(self.command_name, options)
            output = self.run(config, options)
        except ConfigurationError as exc:
            raise CommandError(str(exc), returncode=EXIT_USAGE) from exc
        except AcceptanceCheckFailed as exc:
            raise CommandError(str(exc), returncode=EXIT_ACCEPTANCE) from exc
        except NumericalError as exc:
            logger.exception("Numerical failure", extra={"command": self.command_name})
            raise CommandError(f"numerical failure: {exc}", returncode=EXIT_NUMERICAL) from exc

        header = {**config.header_items(), **output.header}
        directory = config.output_dir()
        for name, frame in output.tables.items():
            path = write_table(directory, name, frame, header)
            if options.get("verbosity", 1) >= 1:
                self.stdout.write(f"{name}: {len(frame)} rows -> {path}")
        if output.failures:
            raise CommandError("; ".join(output.failures), returncode=EXIT_ACCEPTANCE)
        self.stdout.write(self.style.SUCCESS(f"{self.command_name} finished."))


__all__ = [
    "EXIT_ACCEPTANCE",
    "EXIT_NUMERICAL",
    "EXIT_USAGE",
    "CommandOutput",
    "PurificationCommand",
    "float_list",
]
