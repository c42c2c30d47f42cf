#!/usr/bin/env python3
"""
Hall sensor pathway: a sinusoidal coil current biases the IPD readout, the
headset shifts both eye images and the stereo disparity accordingly, and the
resulting display jitter spreads the per-frame flow and disparity triples
that drive motion sickness.
"""
import numpy as np

from spoofsim import logger
from spoofsim.models.defense import spectral_detect, write_alarms
from spoofsim.models.perception import (dispersion_score, dizziness_triples,
                                        ipd_jitter_profile, scenery_profile,
                                        stationary_profile)
from spoofsim.models.sensing import ipd_jitter_series
from spoofsim.tools.exceptions import SeriesLengthError
from spoofsim.tools.series import Channel, SampleSeries
from spoofsim.tools.signal import dominant_frequency
from spoofsim.workflow.scenario import Scenario

PROFILES = ["stationary", "gameplay", "attack"]


class Dizziness(Scenario):
    """
    Dizziness Pipeline [Scenario -> Dizziness]
    ------------------------------------------
    Sinusoidal coil current -> IPD jitter series -> display profiles ->
    dizziness triples -> dispersion scores for the attack, a stationary user
    and a scenery-appreciating gameplay proxy. The noisy Hall readout is
    passed through the spectral detector.

    Parameters
    ----------
    :type config: spoofsim.tools.config.ScenarioConfig
    :param config: validated scenario with `case` == 'dizziness'

    Paths
    -----
    ***
    """
    case = "dizziness"

    def __init__(self, config, path_output=None):
        super().__init__(config, path_output)
        self.hall = self.hall_spec()
        self.bias = None

    @property
    def task_list(self):
        return [self.inject_current,
                self.score_profiles,
                self.run_defense]

    def inject_current(self):
        """IPD bias sampled at the display frame rate"""
        current = self.waveform()
        self.attack_frequency = current.frequency
        self.bias = ipd_jitter_series(current, self.hall,
                                      self.config.display.frame_rate,
                                      self.config.duration)
        peak = float(np.max(np.abs(self.bias.values)))
        f_peak = dominant_frequency(self.bias.values, self.bias.dt)
        self.report.add_metrics(peak_bias=peak, dominant_frequency=f_peak,
                                current_frequency=current.frequency)
        self.report.add_artifact("hall_bias.csv", self.bias.to_csv)
        logger.info(f"IPD bias peaks at {peak:.4g} mm, spectral peak "
                    f"{f_peak:.4g} Hz")

    def _profile(self, name, n_frames):
        display = self.config.display
        if name == "stationary":
            return stationary_profile(n_frames, disparity=display.disparity)
        elif name == "gameplay":
            return scenery_profile(n_frames, self.rng,
                                   pan_speed=display.pan_speed,
                                   disparity=display.disparity)
        return ipd_jitter_profile(self.bias.values,
                                  pixels_per_mm=display.pixels_per_mm,
                                  disparity=display.disparity)

    def score_profiles(self):
        """Dispersion score of each display profile"""
        display = self.config.display
        n_frames = len(self.bias)
        scores = {}
        for name in PROFILES:
            x, y, d = self._profile(name, n_frames)
            series = [SampleSeries(t0=0., dt=self.bias.dt, values=v,
                                   channel=ch)
                      for v, ch in zip([x, y, d], [Channel.DISPLAY_X,
                                                   Channel.DISPLAY_Y,
                                                   Channel.DISPARITY])]
            cloud = dizziness_triples(*series)
            scores[name] = dispersion_score(
                cloud, weights=tuple(display.weights),
                inverse_disparity=display.inverse_disparity
            )
            self.report.add_artifact(f"dizziness_{name}.csv", cloud.to_csv)

        ordered = scores["stationary"] < scores["gameplay"] < scores["attack"]
        self.report.add_metrics(**{f"score_{_}": scores[_] for _ in PROFILES},
                                ordering_holds=ordered)
        logger.info(", ".join(f"{_}={scores[_]:.4g}" for _ in PROFILES))

    def run_defense(self):
        """Spectral detector on the noisy Hall readout"""
        noise = self.config.hall.readout_noise * \
            self.rng.standard_normal(len(self.bias))
        readout = self.bias.with_values(self.bias.values + noise)
        self.report.add_artifact("hall_readout.csv", readout.to_csv)
        try:
            alarms = spectral_detect(readout, self.detector_config())
        except SeriesLengthError as e:
            logger.warning(f"spectral detector skipped: {e}")
            alarms = []
        self.report.add_artifact("alarms.jsonl",
                                 lambda fid: write_alarms(alarms, fid))
        self.report.add_metrics(spectral_alarms=len(alarms))
        logger.info(f"{len(alarms)} spectral alarm(s) on the Hall readout")
