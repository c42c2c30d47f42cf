#!/usr/bin/env python3
"""
A command line tool for running SpoofSim scenarios and inspecting results.
The main entry point to the SpoofSim package.

.. rubric::
    $ spoofsim -h  # runs the help command to investigate package features

.. note::
    To add new functions to the spoofsim command line tool, you must:
    - Write a new function within the SpoofSim class
    - Add a new subparser with optional arguments to ssparser()
    Dashes in command names map to underscores in method names.
    In-function import statements are used to reduce call-time for simpler fx's
"""
import argparse
import json
import os
import sys

from spoofsim import logger, __version__
from spoofsim.tools import msg
from spoofsim.tools.config import Dict, config_logger, load_scenarios
from spoofsim.tools.exceptions import ConfigError, SpoofSimError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def ssparser():
    """
    A command-line argument parser which allows for intuitive exploration of
    the available functions. Makes use of subparsers to get individual help
    statements for each of the main functions.

    .. rubric::
        $ spoofsim {main arg} {optional sub arg}

    :rtype: argparse.ArgumentParser
    :return: the parser
    """
    class SubcommandHelpFormatter(argparse.RawDescriptionHelpFormatter):
        """
        Override the help statement to NOT print out available subcommands for
        a cleaner UI when calling this CLI tool.
        """
        def _format_action(self, action):
            parts = super()._format_action(action)
            if action.nargs == argparse.PARSER:
                parts = "\n".join(parts.split("\n")[1:])
            return parts

    parser = argparse.ArgumentParser(
        prog="spoofsim",
        formatter_class=SubcommandHelpFormatter,
        description=f"{'='*80}\n\n"
                    f"{f'SpoofSim v{__version__}':^80}\n\n"
                    f"{'='*80}",
        epilog="'spoofsim [command] -h' for more detailed descriptions "
               "of each command",
    )
    parser.add_argument("-v", "--version", action="store_true",
                        help="Print out the current version of SpoofSim")
    parser.add_argument("--log_level", default="INFO",
                        choices=["CRITICAL", "WARNING", "INFO", "DEBUG"],
                        help="Level of the package logger, default: INFO")
    parser.add_argument("--log_file", default=None,
                        help="Also write log statements to this file. Must "
                             "not lie inside the output directory")
    parser.add_argument("--verbose", action="store_true",
                        help="Log file names, functions and line numbers")

    subparser = parser.add_subparsers(
        title="command",
        description="Available SpoofSim commands and their intended usages",
        dest="command",
    )
    # =========================================================================
    init = subparser.add_parser(
        "init", help="Write a template scenario file",
        description="""Write a commented scenario file containing the case
        choice, seed and the most important attack parameters."""
    )
    init.add_argument("-p", "--path", default="scenario.yaml",
                      help="Scenario file to write, default: scenario.yaml")
    init.add_argument("-f", "--force", action="store_true",
                      help="Overwrite an existing scenario file")
    # =========================================================================
    simulate = subparser.add_parser(
        "simulate", help="Run the scenario(s) of a config file",
        description="""Validate a scenario or batch file, run every scenario
        through its case pipeline and export CSVs, metrics.csv and
        report.json per scenario plus a manifest.json at the output root.
        Identical configs and seeds produce byte-identical outputs."""
    )
    simulate.add_argument("-c", "--config", required=True,
                          help="Scenario or batch file, YAML or JSON")
    simulate.add_argument("-j", "--jobs", type=int, default=1,
                          help="Scenarios to run in parallel, default: 1")
    simulate.add_argument("-o", "--out", default=None,
                          help="Output directory, default: the scenario's "
                               "`output` field or ./output")
    # =========================================================================
    design = subparser.add_parser(
        "design-signal", help="List bypass attack frequencies in a band",
        description="""Enumerate every tone f_a = m * f_imu + n * f_cam inside
        a band, each of which the IMU samples at a harmonic of the camera
        rate, together with the phase that aligns it to the camera updates."""
    )
    design.add_argument("--band", required=True,
                        help="Frequency band as LO:HI in Hz")
    design.add_argument("--imu-rate", dest="imu_rate", type=float,
                        default=500., help="IMU rate in Hz, default: 500")
    design.add_argument("--cam-rate", dest="cam_rate", type=float,
                        default=30., help="Camera rate in Hz, default: 30")
    design.add_argument("--n-max", dest="n_max", type=int, default=16,
                        help="Highest camera harmonic, default: 16")
    # =========================================================================
    detect = subparser.add_parser(
        "detect", help="Run the attack detectors on a series CSV",
        description="""Run the sliding-window spectral detector on a `t,value`
        CSV and print alarms as JSON lines. With --flow, also check the
        correlation between the series and an optical flow CSV."""
    )
    detect.add_argument("-i", "--input", required=True,
                        help="Series CSV with header `t,value`")
    detect.add_argument("--flow", default=None,
                        help="Optional optical flow CSV on the same time axis")
    detect.add_argument("--window", type=int, default=256,
                        help="Samples per detection window, default: 256")
    detect.add_argument("--segment", type=int, default=64,
                        help="Samples per Welch segment, default: 64")
    detect.add_argument("--snr", type=float, default=10.,
                        help="Alarm threshold in dB, default: 10")
    detect.add_argument("--corr", type=float, default=0.5,
                        help="Correlation threshold, default: 0.5")
    detect.add_argument("--exclusion", default="0:2",
                        help="Exclusion band LO:HI in Hz, default: 0:2")
    detect.add_argument("--max_lag", type=int, default=0,
                        help="Correlation lag search in samples, default: 0")
    detect.add_argument("--no_prewhiten", action="store_true",
                        help="Do not first-difference windows before the "
                             "spectrum")
    detect.add_argument("-o", "--output", default=None,
                        help="Also write the alarms to this JSON lines file")
    # =========================================================================
    score = subparser.add_parser(
        "score", help="Dizziness score of a per-frame flow CSV",
        description="""Read externally computed `frame,h_flow,v_flow,disparity`
        rows, e.g. from an optical flow and stereo pipeline, and print their
        weighted dispersion as a JSON line `{"score": S}`."""
    )
    score.add_argument("-i", "--input", required=True,
                       help="CSV with header `frame,h_flow,v_flow,disparity`")
    score.add_argument("--weights", default="2,1,1",
                       help="Variance weights W_H,W_V,W_D, default: 2,1,1")
    score.add_argument("--inverse_disparity", action="store_true",
                       help="Score the spread of 1/disparity instead")
    # =========================================================================
    report = subparser.add_parser(
        "report", help="Summarize a report.json",
        description="Print the status and metrics of a scenario report."
    )
    report.add_argument("-i", "--input", required=True,
                        help="report.json written by 'simulate'")
    # =========================================================================
    plot = subparser.add_parser(
        "plot", help="Plot the columns of an exported CSV",
        description="""Plot every column of a series, trajectory, gain trace
        or loop response CSV against its first column."""
    )
    plot.add_argument("-i", "--input", required=True, help="CSV to plot")
    plot.add_argument("-s", "--savefig", default=None,
                      help="Save the figure here instead of showing it")

    return parser


def _parse_band(val, name="band"):
    """Parse 'LO:HI' into two floats"""
    try:
        lo, hi = (float(_) for _ in val.split(":"))
    except ValueError:
        raise ConfigError(f"{name} must be given as LO:HI, got '{val}'",
                          fields=[name])
    return lo, hi


class SpoofSim:
    """
    The main entry point to the SpoofSim package, to be interacted with
    through the command line. Every command returns an exit code: 0 on
    success, 2 for invalid configuration or usage, 3 for runtime errors.

    .. rubric::
        $ spoofsim -h
    """
    def __init__(self, argv=None):
        """
        :type argv: list of str
        :param argv: command line arguments, defaults to sys.argv. Lets the
            CLI be driven from inside Python, e.g. by tests
        """
        self._parser = ssparser()
        self._argv = argv
        self._args = self._parser.parse_args(argv)

    def __call__(self, command=None, **kwargs):
        """
        Execute one of the internal functions

        .. rubric::
            # From inside a Python environment
            > from spoofsim.spoofsim import SpoofSim
            > SpoofSim(["report", "--input", "report.json"])()

        :type command: str
        :param command: optional command name overriding the parsed one
        :rtype: int
        :return: exit code
        """
        args = {**vars(self._args), **kwargs}
        command = command or args.pop("command")
        args.pop("command", None)

        if self._args.version:
            print(f"v{__version__}")
            return EXIT_OK
        if command is None:
            self._parser.print_help()
            return EXIT_OK

        try:
            return getattr(self, command.replace("-", "_"))(**args) or EXIT_OK
        except ConfigError as e:
            print(msg.cli(str(e), items=[f"field: {_}" for _ in e.fields],
                          header="configuration error", border="="))
            return EXIT_CONFIG
        except (SpoofSimError, FloatingPointError, OSError, ArithmeticError,
                RuntimeError, ValueError, TypeError, AssertionError) as e:
            logger.critical(f"{command} failed: {e}")
            print(msg.cli(f"{type(e).__name__}: {e}", header="runtime error",
                          border="="))
            return EXIT_RUNTIME

    def _config_logger(self, log_level="INFO", log_file=None, verbose=False,
                       out=None):
        if log_file is not None and out is not None:
            log_dir = os.path.dirname(os.path.abspath(log_file))
            out_dir = os.path.abspath(out)
            if os.path.commonpath([log_dir, out_dir]) == out_dir:
                raise ConfigError("the log file must not be written inside "
                                  "the output directory",
                                  fields=["log_file"])
        config_logger(level=log_level, filename=log_file, verbose=verbose)

    def init(self, path="scenario.yaml", force=False, **kwargs):
        """
        Write a template scenario file

        :type path: str
        :param path: file to write
        :type force: bool
        :param force: overwrite an existing file
        """
        if os.path.exists(path) and not force:
            print(msg.cli(f"Scenario file {path} already exists, use --force "
                          f"to overwrite it"))
            return EXIT_OK
        with open(path, "w") as f:
            f.write(msg.base_scenario_file)
        print(msg.cli(f"created scenario file: {path}"))
        return EXIT_OK

    def simulate(self, config, jobs=1, out=None, log_level="INFO",
                 log_file=None, verbose=False, **kwargs):
        """
        Run all scenarios of a config file and export their reports

        :type config: str
        :param config: scenario or batch file
        :type jobs: int
        :param jobs: scenarios to run in parallel
        :type out: str
        :param out: output root directory
        """
        from spoofsim.system.workstation import Workstation

        if jobs < 1:
            raise ConfigError(f"--jobs must be >= 1, got {jobs}",
                              fields=["jobs"])
        scenarios = load_scenarios(config)
        if out is None:
            out = next((s.output for s in scenarios if s.output), None) or \
                os.path.join(os.getcwd(), "output")
        self._config_logger(log_level, log_file, verbose, out)

        system = Workstation(jobs=jobs, path_output=out)
        entries = system.run(scenarios)
        print(msg.cli(f"{len(entries)} scenario(s) written to {out}",
                      items=[f"{e['path']}: {e['status']}" for e in entries],
                      header="simulate", border="="))
        return EXIT_OK

    def design_signal(self, band, imu_rate=500., cam_rate=30., n_max=16,
                      **kwargs):
        """
        Print the bypass frequencies inside a band

        :type band: str
        :param band: 'LO:HI' in Hz
        """
        from spoofsim.models.fusion import FusionConfig, below_nyquist, \
            phase_align, select_bypass_frequencies
        from spoofsim.tools.exceptions import ParameterDomainError

        lo, hi = _parse_band(band)
        try:
            cfg = FusionConfig(imu_rate=imu_rate, camera_rate=cam_rate)
        except ParameterDomainError as e:
            raise ConfigError(str(e), fields=["imu_rate", "cam_rate"])
        candidates = select_bypass_frequencies(lo, hi, cfg, n_max=n_max)
        if not candidates:
            print(msg.cli(f"no feasible attack frequency in [{lo}, {hi}] Hz",
                          header="design signal", border="="))
            return EXIT_OK

        items = [f"{'f_a [Hz]':>12} {'m':>5} {'n':>3} {'f_obs [Hz]':>11} "
                 f"{'phase [rad]':>12} {'usable':>6}"]
        usable = 0
        for f_a, m, n in candidates:
            f_obs = n * cam_rate
            ok = below_nyquist(f_obs, cfg)
            usable += ok
            items.append(f"{f_a:>12g} {m:>5d} {n:>3d} {f_obs:>11g} "
                         f"{phase_align(f_obs, cfg):>12.6f} "
                         f"{'yes' if ok else 'no':>6}")
        print(msg.cli(f"{len(candidates)} bypass frequencies in "
                      f"[{lo:g}, {hi:g}] Hz, {usable} below "
                      f"{imu_rate / 2.:g} Hz", items=items,
                      header="design signal", border="="))
        return EXIT_OK

    def detect(self, input, flow=None, window=256, segment=64, snr=10.,
               corr=0.5, exclusion="0:2", max_lag=0, no_prewhiten=False,
               output=None, log_level="INFO", log_file=None, verbose=False,
               **kwargs):
        """
        Run the detectors on a series CSV and print alarms as JSON lines

        :type input: str
        :param input: series CSV
        :type flow: str
        :param flow: optional optical flow CSV for the correlation check
        """
        from spoofsim.models.defense import DetectorConfig, \
            correlation_check, spectral_detect, write_alarms
        from spoofsim.tools.exceptions import ParameterDomainError
        from spoofsim.tools.series import SampleSeries

        self._config_logger(log_level, log_file, verbose)
        try:
            cfg = DetectorConfig(window=window, segment=segment,
                                 snr_threshold_db=snr, corr_threshold=corr,
                                 exclusion_band=_parse_band(exclusion,
                                                            "exclusion"),
                                 max_lag=max_lag,
                                 prewhiten=not no_prewhiten)
        except ParameterDomainError as e:
            raise ConfigError(str(e), fields=["detector"])

        series = SampleSeries.from_csv(input)
        alarms = spectral_detect(series, cfg)
        if flow is not None:
            alarms += correlation_check(series, SampleSeries.from_csv(flow),
                                        cfg)
        for alarm in alarms:
            print(json.dumps(alarm.to_dict()))
        if output is not None:
            write_alarms(alarms, output)
        return EXIT_OK

    def score(self, input, weights="2,1,1", inverse_disparity=False,
              log_level="INFO", log_file=None, verbose=False, **kwargs):
        """
        Print the dispersion score of an external dizziness cloud

        :type input: str
        :param input: `frame,h_flow,v_flow,disparity` CSV
        :type weights: str
        :param weights: 'W_H,W_V,W_D'
        """
        from spoofsim.models.perception import DizzinessCloud, \
            dispersion_score

        try:
            weights = tuple(float(_) for _ in weights.split(","))
        except ValueError:
            weights = ()
        if len(weights) != 3 or min(weights) < 0:
            raise ConfigError("weights must be three values >= 0 given as "
                              "W_H,W_V,W_D", fields=["weights"])

        self._config_logger(log_level, log_file, verbose)
        cloud = DizzinessCloud.from_csv(input)
        score = dispersion_score(cloud, weights=weights,
                                 inverse_disparity=inverse_disparity)
        logger.debug(f"{len(cloud)} frames from {input}, score {score:.6g}")
        print(json.dumps({"score": score}))
        return EXIT_OK

    def report(self, input, **kwargs):
        """
        Print a summary of a report.json

        :type input: str
        :param input: report file
        """
        with open(input, "r") as f:
            report = json.load(f)
        metrics = Dict(sorted(report.get("metrics", {}).items()))
        print(msg.cli(f"case: {report.get('case')}, seed: "
                      f"{report.get('seed')}, status: {report.get('status')}",
                      items=str(metrics).splitlines() +
                      [""] + [f"file: {_}" for _ in report.get("artifacts",
                                                               [])],
                      header="report", border="="))
        return EXIT_OK

    def plot(self, input, savefig=None, **kwargs):
        """
        Plot every column of a CSV against its first column

        :type input: str
        :param input: CSV with a header row
        :type savefig: str
        :param savefig: save the figure to this file instead of showing it
        """
        import matplotlib
        if savefig is not None:
            matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        import numpy as np

        with open(input, "r") as f:
            header = f.readline().strip().split(",")
        data = np.loadtxt(input, delimiter=",", skiprows=1, ndmin=2)

        f, axes = plt.subplots(len(header) - 1, 1, sharex=True, squeeze=False,
                               figsize=(8, 2 + 1.5 * (len(header) - 1)))
        for i, ax in enumerate(axes[:, 0]):
            ax.plot(data[:, 0], data[:, i + 1], "k-", lw=1)
            ax.set_ylabel(header[i + 1])
            ax.grid(True, alpha=0.3)
        axes[-1, 0].set_xlabel(header[0])
        axes[0, 0].set_title(os.path.basename(input))
        f.tight_layout()
        if savefig is not None:
            plt.savefig(savefig)
            plt.close(f)
        else:
            plt.show()
        return EXIT_OK


def main(argv=None):
    """
    Main entry point into the SpoofSim package is via the SpoofSim class
    """
    sys.exit(SpoofSim(argv)())


if __name__ == "__main__":
    main()
