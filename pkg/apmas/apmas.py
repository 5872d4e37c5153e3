#!/usr/bin/python3
"""
apmas - simulator and convergence certifier for active-passive networked
multiagent systems driven by the integral-action consensus protocol.

Subcommands:
    run       simulate scenario files, write trajectory CSV, report and summary
    verify    run the property checks of the `modules` directory on random scenarios
    spectrum  print lambda2, lambda_min(F) and the closed-loop eigenvalues
"""

import argparse
import importlib.util
import os
import sys
import threading

from types import ModuleType

from ptlibs import ptjsonlib
from ptlibs.ptprinthelper import ptprint, print_banner, help_print
from ptlibs.threads import ptthreads

from apmas._version import __version__
from apmas.core.errors import EXIT_IO, EXIT_OK, EXIT_VALIDATION, ApmasError
from apmas.core.pipeline import ScenarioRun
from apmas.core.scenario import load_scenario
from apmas.helpers.helpers import Helpers

SCRIPTNAME = "apmas"


class ApMas:
    def __init__(self, args):
        self.ptjsonlib = ptjsonlib.PtJsonLib()
        self.ptthreads = ptthreads.PtThreads()
        self._lock     = threading.Lock()
        self.args      = args
        self.helpers   = Helpers(args=self.args, ptjsonlib=self.ptjsonlib)
        self.exit_code = EXIT_OK

    def run(self) -> int:
        """Main method, returns the process exit code."""
        command = {"run": self.run_scenarios, "verify": self.verify, "spectrum": self.spectrum}[self.args.command]
        command()

        if self.exit_code == EXIT_OK:
            self.ptjsonlib.set_status("finished")
        else:
            self.ptjsonlib.set_status("error")
        ptprint(self.ptjsonlib.get_result_json(), "", self.args.json)
        return self.exit_code

    def _fail(self, code: int, message: str) -> None:
        with self._lock:
            self.exit_code = max(self.exit_code, code)
            ptprint(message, "ERROR", not self.args.json)

    def _load(self, path: str):
        try:
            return load_scenario(path, alpha=self.args.alpha, gamma=self.args.gamma,
                                 dt=self.args.dt, t_final=self.args.t_final)
        except ApmasError as e:
            self._fail(e.exit_code, f"{path}: {e}")
        except OSError as e:
            self._fail(EXIT_IO, f"{path}: {e}")
        return None

    def run_scenarios(self) -> None:
        self.ptthreads.threads(self.args.scenarios, self.run_single_scenario, self.args.threads)

    def run_single_scenario(self, path: str) -> None:
        """
        Loads one scenario file, integrates it, certifies the trajectory and writes
        the output files. Errors are reported and mapped to exit codes; the other
        scenarios of the batch keep running.
        """
        scenario = self._load(path)
        if scenario is None:
            return
        run = ScenarioRun(scenario, tol_settle=self.args.tol_settle)
        try:
            ptprint(f"Integrating {scenario.name} (n={scenario.n}, dt={scenario.params.dt:g}, "
                    f"t_final={scenario.params.t_final:g})", "INFO", self.args.verbose and not self.args.json)
            report = run.report
            paths = run.write(self.args.out)
        except ApmasError as e:
            self._fail(e.exit_code, f"{scenario.name}: {e}")
            return
        except OSError as e:
            self._fail(EXIT_IO, f"{scenario.name}: cannot write outputs: {e}")
            return

        self.ptjsonlib.add_node(self.ptjsonlib.create_node_object(
            "scenario", properties={"name": scenario.name, **report.to_dict(),
                                    "files": {key: str(value) for key, value in paths.items()}}))
        with self._lock:
            ptprint(f"Scenario {scenario.name}:", "TITLE", not self.args.json, colortext=True)
            for line in self.helpers.summary_lines(scenario.name, report):
                ptprint(line, "TEXT", not self.args.json, indent=4)
            ptprint(f"settled at tol {report.tol_settle:g}" if report.settled else "did not settle",
                    "OK" if report.settled else "WARNING", not self.args.json, indent=4)

    def spectrum(self) -> None:
        scenario = self._load(self.args.scenario)
        if scenario is None:
            return
        try:
            report = ScenarioRun(scenario).spectral_report()
        except ApmasError as e:
            self._fail(e.exit_code, f"{scenario.name}: {e}")
            return
        self.ptjsonlib.add_node(self.ptjsonlib.create_node_object(
            "spectrum", properties={"name": scenario.name, **report.to_dict()}))
        ptprint(f"Spectrum of {scenario.name}:", "TITLE", not self.args.json, colortext=True)
        ptprint(f"{'lambda2':<15}  {report.lambda2:.12g}", "TEXT", not self.args.json, indent=4)
        ptprint(f"{'lambda_min(F)':<15}  {report.lambda_min_F:.12g}", "TEXT", not self.args.json, indent=4)
        ptprint("closed-loop eigenvalues:", "TEXT", not self.args.json, indent=4)
        for z in report.closed_loop_spectrum:
            ptprint(f"{z.real: .12e} {z.imag:+.12e}j", "TEXT", not self.args.json, indent=8)

    def verify(self) -> None:
        """
        Streams the random scenarios of the chosen suite through every selected
        property check. Each scenario is simulated at most once, inside the worker
        thread that inspects it; checks collect findings under their own locks.
        """
        checks = []
        for module_name in self.args.checks or _get_all_available_modules():
            try:
                module = _import_module_from_path(module_name)
            except FileNotFoundError:
                self._fail(EXIT_VALIDATION, f"Check '{module_name}' not found")
                return
            if not (hasattr(module, "create") and callable(module.create)):
                ptprint(f"Check '{module_name}' does not have 'create' function", "WARNING", not self.args.json)
                continue
            checks.append(module.create(args=self.args, ptjsonlib=self.ptjsonlib, helpers=self.helpers))

        scenarios = self.helpers.scenarios()
        ptprint(f"Suite {self.args.suite}: {len(scenarios)} scenarios, seed {self.args.seed}, "
                f"{len(checks)} property classes", "TITLE", not self.args.json, colortext=True)

        def inspect(scenario) -> None:
            run = ScenarioRun(scenario)
            for check in checks:
                check.inspect(run)
            ptprint(f"{scenario.name} inspected", "INFO", self.args.verbose and not self.args.json)

        self.ptthreads.threads(scenarios, inspect, self.args.threads)

        failed = [check for check in checks if not check.report()]
        if failed:
            with self._lock:
                self.exit_code = max(self.exit_code, 1)
            ptprint(f"{len(failed)} of {len(checks)} property classes failed", "VULN", not self.args.json)
        else:
            ptprint(f"All {len(checks)} property classes passed", "OK", not self.args.json)


def _import_module_from_path(module_name: str) -> ModuleType:
    """
    Imports a check module from the 'modules' directory by file name.

    Raises:
        FileNotFoundError: If no such module file exists.
        ImportError: If the module cannot be loaded.
    """
    module_path = os.path.join(os.path.dirname(__file__), "modules", f"{module_name}.py")
    if not os.path.isfile(module_path):
        raise FileNotFoundError(module_path)

    qualified_name = f"apmas.modules.{module_name}"
    if qualified_name in sys.modules:
        return sys.modules[qualified_name]
    spec = importlib.util.spec_from_file_location(qualified_name, module_path)
    if spec is None:
        raise ImportError(f"Cannot find spec for {module_name} at {module_path}")
    module = importlib.util.module_from_spec(spec)
    sys.modules[qualified_name] = module
    spec.loader.exec_module(module)
    return module


def _get_all_available_modules() -> list:
    """
    Returns the names of the check modules in the 'modules' directory
    (files ending in '.py' that do not start with an underscore).
    """
    modules_folder = os.path.join(os.path.dirname(__file__), "modules")
    return [
        f.rsplit(".py", 1)[0]
        for f in sorted(os.listdir(modules_folder))
        if f.endswith(".py") and not f.startswith("_")
    ]


def get_help():
    """
    Help sections for help_print. The list of property checks is built at runtime
    from each module's '__TESTLABEL__'.
    """
    def _get_available_modules_help() -> list:
        rows = []
        for module in _get_all_available_modules():
            mod = _import_module_from_path(module)
            label = getattr(mod, "__TESTLABEL__", f"Check {module.upper()}")
            rows.append(["", "", f" {module.upper()}", label.rstrip(":")])
        return sorted(rows, key=lambda x: x[2])

    return [
        {"description": ["Simulator and convergence certifier for active-passive multiagent networks"]},
        {"usage": ["apmas run <scenario.json>... --out <dir> [options]",
                   "apmas verify --suite quick|full [options]",
                   "apmas spectrum <scenario.json>"]},
        {"usage_example": [
            "apmas run scenarios/p2.json --out results",
            "apmas run scenarios/*.json --out results --alpha 2 --gamma 0.5",
            "apmas verify --suite quick",
            "apmas verify --suite full -ts fet cvt",
            "apmas spectrum scenarios/p3_middle.json",
        ]},
        {"options": [
            ["-o",  "--out",          "<dir>",       "Output directory of `run`"],
            ["",    "--dt",           "<step>",      "Override the integrator step"],
            ["",    "--t-final",      "<horizon>",   "Override the horizon"],
            ["",    "--alpha",        "<gain>",      "Override the state-coupling gain"],
            ["",    "--gamma",        "<gain>",      "Override the integral gain"],
            ["",    "--tol-settle",   "<tol>",       "Settling threshold on |delta|_inf (default 1e-6)"],
            ["-s",  "--suite",        "<suite>",     "Verify suite: quick (n <= 8, 50 runs) or full (n <= 20, 500 runs)"],
            ["",    "--seed",         "<seed>",      "Seed of the verify suite (default 0)"],
            ["-ts", "--checks",       "<check>",     "Property classes to verify:"],
            *_get_available_modules_help(),
            ["", "", "", ""],
            ["-t",  "--threads",      "<threads>",   "Set thread count (default 4)"],
            ["-vv", "--verbose",      "",            "Show verbose output"],
            ["-v",  "--version",      "",            "Show script version and exit"],
            ["-h",  "--help",         "",            "Show this help message and exit"],
            ["-j",  "--json",         "",            "Output in JSON format"],
        ]
        }]


def parse_args(argv=None) -> argparse.Namespace:
    argv = sys.argv[1:] if argv is None else list(argv)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-t",  "--threads",     type=int, default=4)
    common.add_argument("-vv", "--verbose",     action="store_true")
    common.add_argument("-j",  "--json",        action="store_true")

    overrides = argparse.ArgumentParser(add_help=False)
    overrides.add_argument("--dt",              type=float, default=None)
    overrides.add_argument("--t-final",         type=float, default=None)
    overrides.add_argument("--alpha",           type=float, default=None)
    overrides.add_argument("--gamma",           type=float, default=None)
    overrides.add_argument("--tol-settle",      type=float, default=1e-6)

    parser = argparse.ArgumentParser(prog=SCRIPTNAME, add_help=False)
    parser.add_argument("-v", "--version", action="version", version=f"{SCRIPTNAME} {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    run_parser = subparsers.add_parser("run", parents=[common, overrides], add_help=False)
    run_parser.add_argument("scenarios",        nargs="+")
    run_parser.add_argument("-o", "--out",      type=str, required=True)

    verify_parser = subparsers.add_parser("verify", parents=[common], add_help=False)
    verify_parser.add_argument("-s", "--suite", choices=["quick", "full"], default="quick")
    verify_parser.add_argument("--seed",        type=int, default=0)
    verify_parser.add_argument("-ts", "--checks", type=lambda s: s.lower(), nargs="+")

    spectrum_parser = subparsers.add_parser("spectrum", parents=[common, overrides], add_help=False)
    spectrum_parser.add_argument("scenario")

    if not argv or "-h" in argv or "--help" in argv:
        ptprint(help_print(get_help(), SCRIPTNAME, __version__))
        sys.exit(0)

    args = parser.parse_args(argv)
    for name in ("dt", "t_final", "alpha", "gamma"):
        if not hasattr(args, name):
            setattr(args, name, None)
    if args.threads < 1:
        parser.error("--threads must be at least 1")

    print_banner(SCRIPTNAME, __version__, args.json, 0)
    return args


def main(argv=None):
    args = parse_args(argv)
    script = ApMas(args)
    sys.exit(script.run())


if __name__ == "__main__":
    main()
