#!/usr/bin/env python3
"""
The Scenario class is the BASE of the three attack pathway pipelines. It
holds the validated configuration, the seeded random generator and the run
report, and runs a linear task list. Trajectory, Avatar and Dizziness build
off of the scaffolding defined here.
"""
import json
import os
from dataclasses import dataclass, field

import numpy as np

from spoofsim import logger
from spoofsim.models.defense import DetectorConfig
from spoofsim.models.fusion import FusionConfig
from spoofsim.models.looptf import RationalTF, compose_G, \
    compose_G_simplified, compose_P, constant_tf, eval_magnitude, \
    loop_response
from spoofsim.models.perception import ThresholdSet
from spoofsim.models.sensing import HallSpec, ImuSpec
from spoofsim.models.waveforms import Waveform, WaveformKind
from spoofsim.tools import msg
from spoofsim.tools.config import Dict
from spoofsim.tools.series import CSV_FMT

STATUS_OK = "ok"
STATUS_NO_FEASIBLE_ATTACK = "no_feasible_attack"


@dataclass(frozen=True, eq=False)
class Table:
    """Named numeric columns written as one CSV"""
    header: tuple
    columns: tuple

    def to_csv(self, fid):
        data = np.column_stack([np.asarray(_, dtype=float).ravel()
                                for _ in self.columns])
        np.savetxt(fid, data, fmt=CSV_FMT, delimiter=",",
                   header=",".join(self.header), comments="")


def _plain(val):
    """Convert numpy scalars to builtins so that reports serialize"""
    if isinstance(val, (bool, np.bool_)):
        return bool(val)
    if isinstance(val, (int, np.integer)):
        return int(val)
    if isinstance(val, (float, np.floating)):
        return float(val)
    return val


@dataclass
class RunReport:
    """
    Outcome of one scenario

    :type case: str
    :param case: pipeline that produced the report
    :type scenario: dict
    :param scenario: echo of the validated configuration
    :type status: str
    :param status: 'ok' or 'no_feasible_attack'
    :type metrics: dict
    :param metrics: scalar results, all written to metrics.csv
    :type artifacts: dict
    :param artifacts: file name -> function writing that file
    """
    case: str
    scenario: dict
    status: str = STATUS_OK
    metrics: dict = field(default_factory=dict)
    artifacts: dict = field(default_factory=dict)

    def add_metrics(self, **kwargs):
        self.metrics.update({key: _plain(val) for key, val in kwargs.items()})

    def add_artifact(self, fid, writer):
        """Register `writer(path)` to produce file `fid` on export"""
        self.artifacts[fid] = writer

    def to_dict(self):
        return {"case": self.case, "status": self.status,
                "seed": self.scenario.get("seed"),
                "scenario": self.scenario, "metrics": self.metrics,
                "artifacts": sorted(self.artifacts) + ["metrics.csv"]}

    def export(self, path):
        """
        Write every artifact, `metrics.csv` and `report.json` to `path`.
        Repeated exports of the same report produce identical bytes

        :type path: str
        :param path: output directory, created if needed
        :rtype: list of str
        :return: names of the written files, relative to `path`
        """
        os.makedirs(path, exist_ok=True)
        for fid in sorted(self.artifacts):
            self.artifacts[fid](os.path.join(path, fid))

        with open(os.path.join(path, "metrics.csv"), "w") as f:
            f.write("metric,value\n")
            for key in sorted(self.metrics):
                f.write(f"{key},{self.metrics[key]}\n")

        with open(os.path.join(path, "report.json"), "w") as f:
            f.write(json.dumps(self.to_dict(), sort_keys=True, indent=2))
            f.write("\n")

        written = sorted(self.artifacts) + ["metrics.csv", "report.json"]
        logger.debug(f"exported {len(written)} files to {path}")
        return written


class Scenario:
    """
    Scenario Pipeline [Workflow Base]
    ---------------------------------
    Defines the foundational structure of a case pipeline: builds the model
    objects from the configuration sections, runs the task list in order and
    collects results in a RunReport. When a `loop` block is configured, the
    closed-loop magnitudes are evaluated at the attack frequency.

    Parameters
    ----------
    :type config: spoofsim.tools.config.ScenarioConfig
    :param config: validated scenario

    Paths
    -----
    :type path_output: str
    :param path_output: directory the report is exported to, defaults to the
        scenario's `output` field
    ***
    """
    case = None

    def __init__(self, config, path_output=None):
        self.config = config
        self.path = Dict(output=path_output or config.output)
        self.rng = np.random.Generator(np.random.Philox(config.seed))
        self.report = RunReport(case=config.case, scenario=config.echo())
        # Frequency at which the loop block is evaluated, set by the case
        self.attack_frequency = None

    @property
    def task_list(self):
        """
        Methods that take no input and return nothing, run in order by
        `run`

        :rtype: list
        """
        return []

    def check(self):
        """Check that the configuration belongs to this pipeline"""
        assert(self.config.case == self.case), (
            f"scenario case '{self.config.case}' cannot run in the "
            f"'{self.__class__.__name__}' pipeline"
        )

    def run(self):
        """
        Run the task list in order and return the report

        :rtype: RunReport
        """
        self.check()
        logger.info(msg.mjr(f"{self.case.upper()} SCENARIO "
                            f"(seed={self.config.seed})"))
        for func in self.task_list + [self.evaluate_loop]:
            logger.info(msg.mnr(func.__name__.replace("_", " ").upper()))
            func()
            if self.report.status != STATUS_OK:
                logger.warning(f"scenario ended early with status "
                               f"'{self.report.status}'")
                break
        return self.report

    def export(self, path=None):
        """Write the report to `path` or the configured output directory"""
        path = path or self.path.output
        assert(path is not None), "no output directory given for export"
        return self.report.export(path)

    def imu_spec(self):
        c = self.config.imu
        return ImuSpec(sample_rate=c.sample_rate,
                       resonance_frequency=c.resonance_frequency,
                       resonance_bandwidth=c.resonance_bandwidth, gain=c.gain,
                       gyro_bias=tuple(c.gyro_bias),
                       accel_bias=tuple(c.accel_bias))

    def hall_spec(self):
        c = self.config.hall
        return HallSpec(k_ipd=c.k_ipd, ipd_rest=c.ipd_rest,
                        ipd_min=c.ipd_min, ipd_max=c.ipd_max)

    def fusion_config(self):
        c = self.config.fusion
        return FusionConfig(imu_rate=c.imu_rate, camera_rate=c.camera_rate,
                            measurement_variance=c.measurement_variance,
                            process_variance=c.process_variance,
                            adapt_window=c.adapt_window,
                            camera_noise=c.camera_noise,
                            camera_offset=c.camera_offset)

    def thresholds(self):
        c = self.config.thresholds
        return ThresholdSet(speed_ratio_jnd=c.speed_ratio_jnd,
                            hand_offset_jnd=c.hand_offset_jnd,
                            walking_speed=c.walking_speed)

    def detector_config(self):
        c = self.config.detector
        return DetectorConfig(window=c.window, segment=c.segment,
                              snr_threshold_db=c.snr_threshold_db,
                              corr_threshold=c.corr_threshold,
                              exclusion_band=tuple(c.exclusion_band),
                              overlap=c.overlap, max_lag=c.max_lag,
                              prewhiten=c.prewhiten)

    def waveform(self, **kwargs):
        """Attack waveform of the scenario, `kwargs` override fields"""
        c = self.config.waveform
        cycles = c.cycles
        if cycles is None and c.kind == WaveformKind.DECAYING_TONE.value:
            cycles = int(np.ceil(self.config.duration / c.period))
        pars = dict(kind=c.kind, amplitude=c.amplitude, frequency=c.frequency,
                    target_frequency=c.target_frequency, period=c.period,
                    phase=c.phase, cycles=cycles or 1)
        pars.update(kwargs)
        return Waveform(**pars)

    def evaluate_loop(self):
        """
        Closed-loop response of the configured human-VR feedback blocks over
        the frequency grid and at the attack frequency
        """
        loop = self.config.loop
        if loop is None:
            logger.debug("no loop block configured, skipping")
            return
        blocks = {name: RationalTF.from_dict(getattr(loop, name).model_dump())
                  for name in ["F_s", "F_p", "F_a", "H_s", "H_a"]}
        one = constant_tf(1.)
        simplified = (blocks["F_p"].allclose(one) and
                      blocks["F_a"].allclose(one))
        if simplified:
            G = compose_G_simplified(blocks["F_s"], blocks["H_s"],
                                     blocks["H_a"])
        else:
            G = compose_G(**blocks)
        P = compose_P(G, blocks["H_a"])
        self.report.add_metrics(loop_simplified=simplified)

        freqs = np.array(sorted(loop.frequencies))
        mag_G, mag_P = loop_response(G, blocks["H_a"], freqs)
        self.report.add_artifact(
            "loop_response.csv",
            Table(header=("f", "G", "P"), columns=(freqs, mag_G, mag_P)).to_csv
        )
        if self.attack_frequency is not None:
            f = self.attack_frequency
            self.report.add_metrics(loop_G_at_attack=eval_magnitude(G, f),
                                    loop_P_at_attack=eval_magnitude(P, f))
            logger.info(f"|G|={self.report.metrics['loop_G_at_attack']:.4g}, "
                        f"|P|={self.report.metrics['loop_P_at_attack']:.4g} "
                        f"at {f:.4g} Hz")
