#!/usr/bin/env python3
"""
SpoofSim configuration tools: scenario file loading and validation, logger
setup and dynamic import of case pipelines.

Scenario files are YAML or JSON (JSON is read through the YAML loader). Each
file holds either one scenario, a mapping with a `case` key, or a batch
`{"seed": S, "scenarios": [...]}`. Validation is done by the pydantic models
below; every section has documented defaults and unknown keys are rejected.
"""
import logging
import os
import re
import sys
from importlib import import_module
from importlib.util import find_spec
from typing import List, Literal, Optional

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, \
    ValidationInfo, field_validator, model_validator

from spoofsim import logger, NAMES
from spoofsim.tools import msg
from spoofsim.tools.exceptions import ConfigError

CASES = ["trajectory", "avatar", "dizziness"]
# Waveform used by each case when the scenario does not set the field
CASE_WAVEFORMS = {
    "trajectory": {"kind": "decaying_tone", "amplitude": 0.2,
                   "frequency": 27880., "period": 1.},
    "avatar": {"kind": "constant_tone", "amplitude": 30., "frequency": 27125.},
    "dizziness": {"kind": "sinusoid_current", "amplitude": 2.,
                  "frequency": 0.5},
}
# Controller IMU band of the avatar case, whose lowest bypass harmonics lie
# below the IMU Nyquist frequency
CASE_IMUS = {
    "avatar": {"resonance_frequency": 27125., "resonance_bandwidth": 50.},
}
# Seeds are 64-bit unsigned integers
MAX_SEED = 2 ** 64 - 1


class Dict(dict):
    """
    A dictionary replacement which allows for easier parameter access through
    getting and setting attributes. Also has some functionality to make string
    printing prettier
    """
    def __str__(self):
        """Pretty print dictionaries and first level nested dictionaries"""
        str_ = ""
        try:
            longest_key = max([len(_) for _ in self.keys()])
            for key, val in self.items():
                str_ += f"{key:<{longest_key}}: {val}\n"
        except ValueError:
            pass
        return str_

    def __repr__(self):
        return self.__str__()

    def __getattr__(self, key):
        try:
            return self[key]
        except KeyError:
            raise AttributeError(f"{key} not found in Dict")


class Section(BaseModel):
    """Base of all configuration sections, unknown keys are an error"""
    model_config = ConfigDict(extra="forbid", frozen=True)


class WaveformConfig(Section):
    """Attack signal, see spoofsim.models.waveforms.Waveform"""
    kind: Literal["constant_tone", "decaying_tone", "swept_tone",
                  "sinusoid_current"] = "decaying_tone"
    amplitude: float = Field(0.2, ge=0)
    frequency: float = Field(27880., gt=0)
    target_frequency: Optional[float] = Field(None, gt=0,
                                              validate_default=True)
    period: Optional[float] = Field(1., gt=0, validate_default=True)
    phase: float = 0.
    cycles: Optional[int] = Field(None, ge=1)

    @field_validator("target_frequency")
    @classmethod
    def _sweep_needs_target(cls, val, info: ValidationInfo):
        if val is None and info.data.get("kind") == "swept_tone":
            raise ValueError("a swept_tone requires target_frequency")
        return val

    @field_validator("period")
    @classmethod
    def _tone_needs_period(cls, val, info: ValidationInfo):
        kind = info.data.get("kind")
        if val is None and kind in ["decaying_tone", "swept_tone"]:
            raise ValueError(f"a {kind} requires period")
        return val


class ImuConfig(Section):
    """Inertial sensor physics, see spoofsim.models.sensing.ImuSpec"""
    sample_rate: float = Field(100., gt=0)
    resonance_frequency: float = Field(27880., gt=0)
    resonance_bandwidth: float = Field(60., ge=0)
    gain: float = 1.
    gyro_bias: List[float] = Field(default_factory=lambda: [0., 0., 0.],
                                   min_length=3, max_length=3)
    accel_bias: List[float] = Field(default_factory=lambda: [0., 0., 0.],
                                    min_length=3, max_length=3)
    attack_axis: int = Field(0, ge=0, le=2)


class HallConfig(Section):
    """Hall sensor IPD readout, see spoofsim.models.sensing.HallSpec"""
    k_ipd: float = 5.
    ipd_rest: float = 68.
    ipd_min: float = 58.
    ipd_max: float = 72.
    readout_noise: float = Field(0.05, ge=0)

    @model_validator(mode="after")
    def _check_range(self):
        if not self.ipd_min <= self.ipd_rest <= self.ipd_max:
            raise ValueError("need ipd_min <= ipd_rest <= ipd_max")
        return self


class FusionSettings(Section):
    """Controller fusion filter, see spoofsim.models.fusion.FusionConfig"""
    imu_rate: float = Field(500., gt=0)
    camera_rate: float = Field(30., gt=0, validate_default=True)
    measurement_variance: float = Field(1E-6, gt=0)
    process_variance: float = Field(1E-4, gt=0)
    adapt_window: int = Field(30, ge=1)
    camera_noise: float = Field(1E-3, ge=0)
    camera_offset: float = 0.
    n_max: int = Field(16, ge=1)
    control_offset: float = Field(7., gt=0)

    @field_validator("camera_rate")
    @classmethod
    def _slower_than_imu(cls, val, info: ValidationInfo):
        imu_rate = info.data.get("imu_rate")
        if imu_rate is not None and not val < imu_rate:
            raise ValueError(f"camera_rate must be < imu_rate ({imu_rate})")
        return val


class ThresholdConfig(Section):
    """Perception thresholds, see spoofsim.models.perception.ThresholdSet"""
    speed_ratio_jnd: float = Field(0.2, gt=0)
    hand_offset_jnd: float = Field(0.09, gt=0)
    walking_speed: float = Field(1.35, gt=0)


class DetectorSettings(Section):
    """Defense detectors, see spoofsim.models.defense.DetectorConfig"""
    window: int = Field(256, ge=16)
    segment: Optional[int] = Field(64, ge=4, validate_default=True)
    snr_threshold_db: float = 10.
    corr_threshold: float = Field(0.5, ge=-1, le=1)
    exclusion_band: List[float] = Field(default_factory=lambda: [0., 2.],
                                        min_length=2, max_length=2)
    overlap: float = Field(0.5, ge=0, lt=1)
    max_lag: int = Field(0, ge=0)
    prewhiten: bool = True

    @field_validator("segment")
    @classmethod
    def _segment_fits_window(cls, val, info: ValidationInfo):
        window = info.data.get("window")
        if val is not None and window is not None and val > window:
            raise ValueError(f"segment must be <= window ({window})")
        return val


class WalkConfig(Section):
    """Redirected walking geometry"""
    virtual_distance: float = Field(2.25, ge=0)
    gain: Optional[float] = Field(None, gt=0, le=1)
    heading: float = 0.
    vibration_max: float = Field(1., ge=0)


class ArmConfig(Section):
    """Planar avatar arm, lengths in m and wrist relative to the shoulder"""
    l1: float = Field(0.30, gt=0)
    l2: float = Field(0.25, gt=0)
    wrist: List[float] = Field(default_factory=lambda: [0.30, 0.25],
                               min_length=2, max_length=2)


class DisplayConfig(Section):
    """Display projection of the IPD readout and dizziness scoring"""
    frame_rate: float = Field(72., gt=0)
    pixels_per_mm: float = Field(20., gt=0)
    disparity: float = Field(40., gt=0)
    pan_speed: float = Field(0.5, ge=0)
    weights: List[float] = Field(default_factory=lambda: [2., 1., 1.],
                                 min_length=3, max_length=3)
    inverse_disparity: bool = False


class TransferFunctionConfig(Section):
    num: List[float]
    den: List[float]


class LoopConfig(Section):
    """
    Closed-loop blocks, each `{num: [...], den: [...]}` in ascending powers
    of s. The defaults are illustrative, not measured human responses
    """
    F_s: TransferFunctionConfig = TransferFunctionConfig(num=[1.],
                                                         den=[1., 0.01])
    F_p: TransferFunctionConfig = TransferFunctionConfig(num=[1.], den=[1.])
    F_a: TransferFunctionConfig = TransferFunctionConfig(num=[1.], den=[1.])
    H_s: TransferFunctionConfig = TransferFunctionConfig(num=[0.5], den=[1.])
    H_a: TransferFunctionConfig = TransferFunctionConfig(num=[0.5],
                                                         den=[1., 0.2])
    frequencies: List[float] = Field(
        default_factory=lambda: [0.1, 0.2, 0.5, 1., 2., 5., 10.], min_length=1
    )


class ScenarioConfig(Section):
    """One fully validated scenario"""
    case: Literal["trajectory", "avatar", "dizziness"]
    seed: int = Field(ge=0, le=MAX_SEED)
    duration: float = Field(10., gt=0)
    output: Optional[str] = None
    waveform: WaveformConfig = WaveformConfig()
    imu: ImuConfig = ImuConfig()
    hall: HallConfig = HallConfig()
    fusion: FusionSettings = FusionSettings()
    thresholds: ThresholdConfig = ThresholdConfig()
    detector: DetectorSettings = DetectorSettings()
    walk: WalkConfig = WalkConfig()
    arm: ArmConfig = ArmConfig()
    display: DisplayConfig = DisplayConfig()
    loop: Optional[LoopConfig] = None

    @field_validator("case", mode="before")
    @classmethod
    def _lower_case(cls, val):
        return val.lower() if isinstance(val, str) else val

    @model_validator(mode="before")
    @classmethod
    def _case_defaults(cls, data):
        """Fill waveform and imu fields left out with the case defaults"""
        if not isinstance(data, dict):
            return data
        case = data.get("case")
        case = case.lower() if isinstance(case, str) else case
        data = dict(data)
        for key, defaults in [("waveform", CASE_WAVEFORMS),
                              ("imu", CASE_IMUS)]:
            section = data.get(key) or {}
            if case in defaults and isinstance(section, dict):
                data[key] = {**defaults[case], **section}
        return data

    def echo(self):
        """Scenario as a plain dictionary, without the output location"""
        return self.model_dump(mode="json", exclude={"output"})


def load_yaml(filename):
    """
    Define how the PyYaml yaml loading function behaves.
    Replaces None and inf strings with NoneType and numpy.inf respectively.
    JSON files are read by the same loader

    :type filename: str
    :param filename: .yaml or .json file to load in
    :rtype: Dict
    :return: Dictionary containing all parameters in the file
    """
    # PyYAML does not resolve exponent floats without a dot, e.g. 1e-6
    yaml.SafeLoader.add_implicit_resolver(
        u'tag:yaml.org,2002:float',
        re.compile(u'''^(?:
         [-+]?(?:[0-9][0-9_]*)\\.[0-9_]*(?:[eE][-+]?[0-9]+)?
        |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
        |\\.[0-9_]+(?:[eE][-+][0-9]+)?
        |[-+]?[0-9][0-9_]*(?::[0-5]?[0-9])+\\.[0-9_]*
        |[-+]?\\.(?:inf|Inf|INF)
        |\\.(?:nan|NaN|NAN))$''', re.X),
        list(u'-+0123456789.'))

    with open(filename, "r") as f:
        try:
            contents = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError(f"{filename} is not valid YAML or JSON: {e}")

    if contents is None:
        return Dict()
    if not isinstance(contents, dict):
        raise ConfigError(f"{filename} must contain a mapping, got "
                          f"{type(contents).__name__}")
    mydict = Dict(contents)

    for key, val in mydict.items():
        if isinstance(val, str):
            if val.capitalize() == "None":
                mydict[key] = None
            elif val.lower() == "inf":
                mydict[key] = np.inf

    return mydict


def _field_names(error):
    """Dotted field names from a pydantic ValidationError"""
    names = []
    for err in error.errors():
        loc = ".".join(str(_) for _ in err["loc"])
        if loc and loc not in names:
            names.append(loc)
    return names


def validate_scenario(parameters):
    """
    Validate one scenario mapping against the schema

    :type parameters: dict
    :param parameters: raw scenario parameters
    :rtype: ScenarioConfig
    :raises ConfigError: naming every offending field
    """
    try:
        config = ScenarioConfig.model_validate(dict(parameters))
    except ValidationError as e:
        fields = _field_names(e)
        details = [f"{'.'.join(str(_) for _ in err['loc'])}: {err['msg']}"
                   for err in e.errors()]
        raise ConfigError(f"invalid scenario, check field(s): "
                          f"{', '.join(fields)}\n" + "\n".join(details),
                          fields=fields) from e

    acoustic = config.waveform.kind != "sinusoid_current"
    if acoustic != (config.case != "dizziness"):
        raise ConfigError(f"case '{config.case}' cannot be driven by a "
                          f"'{config.waveform.kind}' waveform",
                          fields=["waveform.kind"])
    return config


def load_scenarios(path):
    """
    Read and validate every scenario in a file. Batch scenarios without their
    own seed run with the batch seed XOR their index

    :type path: str
    :param path: YAML or JSON scenario file
    :rtype: list of ScenarioConfig
    :raises FileNotFoundError: if `path` does not exist
    :raises ConfigError: if the file does not match the schema
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"scenario file not found: {path}")
    parameters = load_yaml(path)

    if "scenarios" not in parameters:
        return [validate_scenario(parameters)]

    extra = set(parameters.keys()) - {"seed", "scenarios"}
    if extra:
        raise ConfigError(f"unknown batch key(s): {', '.join(sorted(extra))}",
                          fields=sorted(extra))
    if not isinstance(parameters["scenarios"], list):
        raise ConfigError("'scenarios' must be a list", fields=["scenarios"])
    seed = parameters.get("seed", 0)
    if not isinstance(seed, int) or not 0 <= seed <= MAX_SEED:
        raise ConfigError(f"batch seed must be a 64-bit unsigned integer, got "
                          f"{seed}", fields=["seed"])

    scenarios = []
    for i, scenario in enumerate(parameters["scenarios"]):
        if not isinstance(scenario, dict):
            raise ConfigError(f"scenario {i} must be a mapping",
                              fields=[f"scenarios.{i}"])
        scenario = dict(scenario)
        scenario.setdefault("seed", seed ^ i)
        try:
            scenarios.append(validate_scenario(scenario))
        except ConfigError as e:
            fields = [f"scenarios.{i}.{_}" for _ in e.fields]
            raise ConfigError(f"scenario {i}: {e}", fields=fields) from e
    logger.debug(f"loaded {len(scenarios)} scenario(s) from {path}")
    return scenarios


def load_config(path):
    """
    Read and validate a single-scenario file

    :type path: str
    :param path: YAML or JSON scenario file
    :rtype: ScenarioConfig
    """
    scenarios = load_scenarios(path)
    if len(scenarios) != 1:
        raise ConfigError(f"{path} holds {len(scenarios)} scenarios, expected "
                          f"exactly one", fields=["scenarios"])
    return scenarios[0]


def config_logger(level="INFO", filename=None, filemode="a", verbose=False,
                  stream_handler=True):
    """
    Explicitely configure the logging module. Instantiates a stream logger to
    write to stdout, and a file logger which writes to `filename`. Two levels
    of verbosity and four levels of log messages allow the user to determine
    how much output they want to see.

    :type level: str
    :param level: log level to be passed to logger, available are
        'CRITICAL', 'WARNING', 'INFO', 'DEBUG'
    :type filename: str or None
    :param filename: name of the log file to write log statements to. If None,
        logs will be written to STDOUT ONLY, and `filemode` will not be used.
        Never point this into a scenario output directory
    :type filemode: str
    :param filemode: method for opening the log file. defaults to append 'a'
    :type verbose: bool
    :param verbose: if True, writes a more detailed log message stating the
        type of log and the file and function which called the logger
    :type stream_handler: bool
    :param stream_handler: also log to stdout
    """
    while logger.hasHandlers() and logger.handlers:
        logger.removeHandler(logger.handlers[0])

    if verbose:
        fmt_str = (
            "%(asctime)s | %(levelname)-5s "
            "%(filename)s -> %(funcName)s():L%(lineno)s\n"
            "> %(message)s"
        )
    else:
        fmt_str = "%(asctime)s [%(levelname).4s] | %(message)s"

    logger.setLevel(level)
    formatter = logging.Formatter(fmt_str, datefmt="%Y-%m-%d %H:%M:%S")

    if stream_handler:
        st_handler = logging.StreamHandler(sys.stdout)
        st_handler.setFormatter(formatter)
        logger.addHandler(st_handler)

    if filename is not None:
        file_handler = logging.FileHandler(filename, filemode)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)


def custom_import(name=None, module=None, classname=None):
    """
    Imports a SpoofSim module and extracts the class that is the CamelCase
    version of the module name. Used to pick the case pipeline of a scenario
    by name only.

    For example:
        custom_import('workflow', 'trajectory')

        imports 'spoofsim.workflow.trajectory' and, from this module, extracts
        class 'Trajectory'.

    :type name: str
    :param name: component of the package, one of `spoofsim.NAMES`
    :type module: str
    :param module: module within the component, e.g. `trajectory`
    :type classname: str
    :param classname: the class to be called from the module, defaults to the
        CamelCase version of `module`
    :rtype: type
    """
    if name not in NAMES:
        raise ImportError(msg.cli(
            "custom_import(name, module, classname) requires a name from:",
            items=NAMES, header="custom import error", border="="))
    if module is None:
        raise ImportError(msg.cli(f"no module given for component '{name}'",
                                  header="custom import error", border="="))
    if classname is None:
        classname = module.title().replace("_", "")

    full_dotted_name = ".".join(["spoofsim", name, module])
    if find_spec(full_dotted_name) is None:
        raise ImportError(msg.cli(f"The following module was not found within "
                                  f"the package: {full_dotted_name}",
                                  header="custom import error", border="="))

    imported = import_module(full_dotted_name)
    try:
        return getattr(imported, classname)
    except AttributeError:
        raise ImportError(msg.cli(f"The following class was not found: "
                                  f"{full_dotted_name}.{classname}",
                                  header="custom import error", border="="))
