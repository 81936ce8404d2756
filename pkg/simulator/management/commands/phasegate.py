import argparse
import json

import numpy as np
from django.core.management.base import BaseCommand, CommandError

from simulator.config import load_model_params
from simulator.exceptions import SimulatorError
from simulator.experiments import (
    DEFAULT_G_MHZ,
    ExperimentConfig,
    render_csv,
    run_experiment,
)

FIGURES = {
    "fig2": ("a", "c"),
    "fig3": ("a", "b"),
    "fig4": ("a", "b"),
    "fig6": ("a", "b"),
}

AXIS_RANGES = {
    "fig3": {"dg1": (-0.1, 0.1), "dg2": (-0.1, 0.1)},
    "fig4": {"kappa": (0.0, 0.1), "gamma": (0.0, 0.1)},
}

# flags that only mean something to some subcommands
FLAG_SCOPE = {
    "n_qubits": ("--n", {"zeno-check", "fig2", "fig3", "fig4", "truth-table", "gate-time"}),
    "kappa": ("--kappa", {"fig4"}),
    "gamma": ("--gamma", {"fig4"}),
    "dg1": ("--dg1", {"fig3"}),
    "dg2": ("--dg2", {"fig3"}),
    "points": ("--points", {"fig3", "fig4"}),
    "samples": ("--samples", {"fig2", "fig6"}),
    "g_mhz": ("--g-mhz", {"fig2", "fig6", "gate-time"}),
}


def _common_arguments() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Run parameter file (key=value lines).")
    common.add_argument("--n", type=int, dest="n_qubits", help="Number of qubits N.")
    common.add_argument("--n-max", type=int, dest="n_max", help="Photon cutoff per resonator.")
    common.add_argument("--omega", type=float, help="Drive strength in units of g.")
    common.add_argument("--delta", type=float, help="Drive detuning in units of g.")
    common.add_argument("--kappa", type=float, help="Cavity decay rate; pins the fig4 kappa axis.")
    common.add_argument("--gamma", type=float, help="Qudit relaxation rate; pins the fig4 gamma axis.")
    common.add_argument("--dg1", type=float, help="Coupling offset of data qudit 1; pins the fig3 axis.")
    common.add_argument("--dg2", type=float, help="Coupling offset of data qudit 2; pins the fig3 axis.")
    common.add_argument("--points", type=int, help="Points per sweep axis (fig3, fig4).")
    common.add_argument("--samples", type=int, help="Time samples per series.")
    common.add_argument("--g-mhz", type=float, dest="g_mhz", help="g/2pi in MHz; adds nanosecond columns.")
    common.add_argument(
        "--phase", type=float, help="Target phase in radians (non-resonant only); the gate time scales with it."
    )
    common.add_argument("--out", help="CSV path, or - for stdout.")
    common.add_argument("--no-record", action="store_true", dest="no_record", help="Skip the run ledger.")
    return common


class Command(BaseCommand):
    help = "Reproduce the phase gate figures and checks as CSV."

    def add_arguments(self, parser):
        common = _common_arguments()
        subparsers = parser.add_subparsers(dest="subcommand", required=True)
        subparsers.add_parser("zeno-check", parents=[common], help="H2 spectra and Zeno residuals.")
        for figure, variants in FIGURES.items():
            sub = subparsers.add_parser(figure, parents=[common], help=f"{figure} data.")
            sub.add_argument("variant", choices=variants)
        truth = subparsers.add_parser("truth-table", parents=[common], help="Per-state phase and fidelity.")
        truth.add_argument("--regime", choices=("a", "b"), default="a")
        subparsers.add_parser("gate-time", parents=[common], help="Nominal gate time in both regimes.")

    def handle(self, *args, **options):
        subcommand = options["subcommand"]
        try:
            config = self._config(subcommand, options)
            record = False if options["no_record"] else None
            result = run_experiment(config, record=record)
        except SimulatorError as exc:
            raise CommandError(str(exc)) from exc

        if config.out == "-":
            self.stdout.write(render_csv(result), ending="")
            return
        self.stdout.write(self.style.SUCCESS(f"{config.experiment}: {result.row_count} rows"))
        self.stdout.write(json.dumps(result.summary, sort_keys=True, default=float))

    def _config(self, subcommand, options) -> ExperimentConfig:
        if subcommand == "gate-time" and options["n_qubits"] is None:
            raise CommandError("gate-time needs --n")
        for dest, (flag, subcommands) in FLAG_SCOPE.items():
            if options[dest] is not None and subcommand not in subcommands:
                raise CommandError(f"{flag} does not apply to {subcommand}")

        params = load_model_params(
            options["config"],
            n_qubits=options["n_qubits"],
            n_max=options["n_max"],
            omega=options["omega"],
            delta=options["delta"],
            kappa=options["kappa"],
            gamma=options["gamma"],
        )

        experiment = subcommand + options.get("variant", "") if subcommand in FIGURES else subcommand
        grid = {}
        for axis, (low, high) in AXIS_RANGES.get(subcommand, {}).items():
            if options[axis] is not None:
                grid[axis] = [options[axis]]
            elif options["points"]:
                grid[axis] = [round(float(v), 12) for v in np.linspace(low, high, options["points"])]

        g_mhz = options["g_mhz"]
        if subcommand == "gate-time" and g_mhz is None:
            g_mhz = DEFAULT_G_MHZ

        return ExperimentConfig(
            experiment=experiment,
            params=params,
            grid=grid,
            samples=options["samples"],
            out=options["out"],
            g_mhz=g_mhz,
            regime=options.get("regime"),
            variant=options.get("regime", "") if subcommand == "truth-table" else "",
            phase=options["phase"],
        )
