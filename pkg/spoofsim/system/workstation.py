#!/usr/bin/env python3
"""
The `workstation` class runs a list of scenarios on a single machine, either
in SERIAL or, with `jobs` > 1, in parallel worker processes. Every scenario
is independent: it carries its own seed and writes to its own directory, so
the results do not depend on the number of jobs.
"""
import json
import os
from concurrent.futures import ProcessPoolExecutor, wait

from spoofsim import logger
from spoofsim.tools import msg
from spoofsim.tools.config import Dict, custom_import


def scenario_dirname(index, case):
    """Output sub-directory of scenario `index`, e.g. 000_trajectory"""
    return f"{index:03d}_{case}"


def run_scenario(config, path_output):
    """
    Run one scenario through its case pipeline and export the report.
    Module level so that it can be sent to worker processes

    :type config: spoofsim.tools.config.ScenarioConfig
    :param config: validated scenario
    :type path_output: str
    :param path_output: directory to export the report to
    :rtype: dict
    :return: manifest entry of the scenario
    """
    scenario = custom_import("workflow", config.case)(config, path_output)
    report = scenario.run()
    written = scenario.export(path_output)
    return {"case": config.case, "seed": config.seed,
            "status": report.status, "files": written}


class Workstation:
    """
    Workstation System [System Base]
    --------------------------------
    Runs scenarios one after another, or `jobs` at a time in a process pool,
    and writes `manifest.json` listing every scenario and its files.

    Parameters
    ----------
    :type jobs: int
    :param jobs: number of scenarios to run in parallel, 1 for serial

    Paths
    -----
    :type path_output: str
    :param path_output: root directory of all scenario outputs
    ***
    """
    def __init__(self, jobs=1, path_output=None, **kwargs):
        self.jobs = jobs
        self.path = Dict(
            output=path_output or os.path.join(os.getcwd(), "output"),
            manifest=os.path.join(path_output or
                                  os.path.join(os.getcwd(), "output"),
                                  "manifest.json")
        )

    def check(self):
        """Checks parameters and paths"""
        assert(isinstance(self.jobs, int) and self.jobs >= 1), \
            f"`jobs` must be an integer >= 1, got {self.jobs}"

    def setup(self):
        os.makedirs(self.path.output, exist_ok=True)

    def run(self, scenarios):
        """
        Run every scenario and write the manifest

        :type scenarios: list of spoofsim.tools.config.ScenarioConfig
        :param scenarios: validated scenarios, in batch order
        :rtype: list of dict
        :return: manifest entries in scenario order
        """
        self.check()
        self.setup()
        dirs = [scenario_dirname(i, s.case) for i, s in enumerate(scenarios)]
        paths = [os.path.join(self.path.output, _) for _ in dirs]
        logger.info(msg.mjr(f"RUNNING {len(scenarios)} SCENARIO(S), "
                            f"{self.jobs} JOB(S)"))

        if self.jobs == 1 or len(scenarios) <= 1:
            results = [run_scenario(s, p) for s, p in zip(scenarios, paths)]
        else:
            with ProcessPoolExecutor(max_workers=self.jobs) as executor:
                futures = [executor.submit(run_scenario, s, p)
                           for s, p in zip(scenarios, paths)]
            wait(futures)
            # Results are collected in submission order; the first failure
            # is re-raised here
            results = [future.result() for future in futures]

        entries = []
        for i, (dirname, result) in enumerate(zip(dirs, results)):
            entries.append({"index": i, "path": dirname, **result})
        self.write_manifest(entries)
        logger.info(f"wrote {len(entries)} scenario(s) to {self.path.output}")
        return entries

    def write_manifest(self, entries):
        """Write `manifest.json` with the scenario entries"""
        with open(self.path.manifest, "w") as f:
            f.write(json.dumps({"scenarios": entries}, sort_keys=True,
                               indent=2))
            f.write("\n")
