#!/usr/bin/env python3
"""
Headset IMU pathway: a decaying ultrasonic tone at the gyroscope resonance
is folded to a low frequency by sampling, biases the dead reckoned
orientation and drifts the position. The drift is read as a change of the
user's apparent walking speed, i.e. a redirected walking gain, which makes
the user overshoot a virtual boundary.
"""
import numpy as np

from spoofsim import logger
from spoofsim.models.defense import spectral_detect, vibration_series, \
    write_alarms
from spoofsim.models.nav import (PropagationConfig, WalkProfile, dead_reckon,
                                 position_errors, theta_T_analytic,
                                 trajectory_errors, walk_streams)
from spoofsim.models.perception import (EMPIRICAL_OVERSHOOT,
                                        EMPIRICAL_OVERSHOOT_BAND, WalkScenario,
                                        is_speed_attack_detectable,
                                        real_walk_distance)
from spoofsim.models.sensing import alias_frequency, fold_sign, \
    transduce_acoustic, zero_rate
from spoofsim.models.waveforms import WaveformKind
from spoofsim.tools.exceptions import SeriesLengthError
from spoofsim.tools.math import relative_rotvec
from spoofsim.tools.series import Channel, SampleSeries
from spoofsim.workflow.scenario import Scenario, Table

# Smallest derived walking gain, for drifts faster than the walk itself
MIN_GAIN = 0.05


class Trajectory(Scenario):
    """
    Trajectory Pipeline [Scenario -> Trajectory]
    --------------------------------------------
    Decaying tone -> transduction -> IMU sampling -> dead reckoning ->
    trajectory errors -> redirected walking overshoot and detectability.
    The attacked gyroscope stream is also passed through the spectral
    detector, and vibration feedback is computed from the estimated
    vertical velocity.

    Parameters
    ----------
    :type config: spoofsim.tools.config.ScenarioConfig
    :param config: validated scenario with `case` == 'trajectory'

    Paths
    -----
    ***
    """
    case = "trajectory"

    def __init__(self, config, path_output=None):
        super().__init__(config, path_output)
        self.spec = self.imu_spec()
        self.walk = WalkProfile(speed=config.thresholds.walking_speed,
                                heading=config.walk.heading)
        self.truth = None
        self.estimate = None
        self.gyro = None
        self._streams = {}
        self.drift_speed = 0.

    @property
    def task_list(self):
        return [self.inject_attack,
                self.dead_reckon,
                self.redirect_walk,
                self.run_defense]

    def inject_attack(self):
        """Sample the IMU while the tone drives the attacked gyro axis"""
        w = self.waveform()
        axis = self.config.imu.attack_axis
        f_lo, _ = w.frequency_bounds
        _, f_o = alias_frequency(f_lo, self.spec.sample_rate)
        sign = fold_sign(f_lo, self.spec.sample_rate)
        self.attack_frequency = f_o

        if w.amplitude == 0:
            logger.info("zero amplitude attack, no injection")
            injected = zero_rate
        else:
            injected = transduce_acoustic(w, self.spec)
            if injected is zero_rate:
                logger.warning(f"attack tone {w.frequency_bounds} Hz misses "
                               f"the resonance band {self.spec.band} Hz")
        self._streams = {
            "clean": walk_streams(self.walk, self.spec, self.config.duration),
            "attacked": walk_streams(self.walk, self.spec,
                                     self.config.duration, injected, axis)
        }
        self.gyro = self._streams["attacked"][0][axis]

        theta_T = 0.
        if w.kind == WaveformKind.DECAYING_TONE and injected is not zero_rate:
            theta_T = sign * theta_T_analytic(w.amplitude, self.spec.gain,
                                              f_o, w.period)
        self.report.add_metrics(observed_frequency=f_o, fold_sign=sign,
                                theta_T=theta_T,
                                injected=injected is not zero_rate)
        self.report.add_artifact("gyro_attacked.csv", self.gyro.to_csv)
        logger.info(f"observed frequency {f_o:.4g} Hz, per-window orientation "
                    f"bias {theta_T:.4g} rad")

    def dead_reckon(self):
        """Dead reckon the clean and the attacked streams"""
        cfg = PropagationConfig(dt=self.spec.dt)
        initial = self.walk.initial_state()
        self.truth = dead_reckon(*self._streams["clean"], cfg, self.spec,
                                 initial)
        self.estimate = dead_reckon(*self._streams["attacked"], cfg,
                                    self.spec, initial)
        stats = trajectory_errors(self.estimate, self.truth)
        errors = position_errors(self.estimate, self.truth)
        self.drift_speed = float(errors[-1] / self.config.duration)
        theta = self._window_angle()

        self.report.add_metrics(mae=stats.mae, rmse=stats.rmse,
                                final_position_error=errors[-1],
                                drift_speed=self.drift_speed,
                                theta_T_dead_reckoned=theta)
        self.report.add_artifact("trajectory_truth.csv", self.truth.to_csv)
        self.report.add_artifact("trajectory_estimate.csv",
                                 self.estimate.to_csv)
        self.report.add_artifact(
            "position_error.csv",
            Table(header=("t", "error"),
                  columns=(self.estimate.times, errors)).to_csv
        )
        logger.info(f"trajectory error MAE={stats.mae:.4g} m, "
                    f"RMSE={stats.rmse:.4g} m, dead reckoned window angle "
                    f"{theta:.4g} rad")

    def _window_angle(self):
        """
        Attack axis angle between the attacked and the clean estimate at the
        end of the first decay window, i.e. the sampled counterpart of theta_T
        """
        w = self.config.waveform
        if w.kind != WaveformKind.DECAYING_TONE.value or \
                not self.report.metrics["injected"]:
            return 0.
        j = min(int(round(w.period * self.spec.sample_rate)),
                len(self.estimate) - 1)
        rotvec = relative_rotvec(self.truth.rotations[j],
                                 self.estimate.rotations[j])
        return float(rotvec[self.config.imu.attack_axis])

    def redirect_walk(self):
        """
        Overshoot of the virtual boundary. A configured gain is used as is;
        otherwise the gain follows from the drift speed, k = 1 - v_a / v_t
        """
        th = self.thresholds()
        v_t = th.walking_speed
        if not self.report.metrics["injected"]:
            gain, v_a = 1., 0.
        elif self.config.walk.gain is not None:
            gain = self.config.walk.gain
            v_a = (1. - gain) * v_t
        else:
            v_a = self.drift_speed
            gain = 1. - v_a / v_t
            if gain < MIN_GAIN:
                logger.warning(f"drift speed {v_a:.3g} m/s outpaces the walk, "
                               f"gain floored at {MIN_GAIN}")
                gain = MIN_GAIN

        scenario = WalkScenario(virtual_distance=self.config.walk.
                                virtual_distance, gain=gain)
        real, overshoot = real_walk_distance(scenario)
        detectable = is_speed_attack_detectable(v_a, v_t, th)
        self.report.add_metrics(
            gain=gain, speed_change=v_a, real_distance=real,
            overshoot=overshoot, speed_detectable=detectable,
            empirical_overshoot=EMPIRICAL_OVERSHOOT,
            empirical_overshoot_band=EMPIRICAL_OVERSHOOT_BAND,
            within_empirical_band=bool(abs(overshoot - EMPIRICAL_OVERSHOOT) <=
                                       EMPIRICAL_OVERSHOOT_BAND)
        )
        logger.info(f"gain {gain:.4g}: overshoot {overshoot:.4g} m beyond "
                    f"{scenario.virtual_distance} m, detectable={detectable}")

    def run_defense(self):
        """Spectral detector on the attacked gyro, vibration on v_z"""
        try:
            alarms = spectral_detect(self.gyro, self.detector_config())
        except SeriesLengthError as e:
            logger.warning(f"spectral detector skipped: {e}")
            alarms = []
        self.report.add_artifact("alarms.jsonl",
                                 lambda fid: write_alarms(alarms, fid))

        v_z = SampleSeries(t0=self.estimate.times[0], dt=self.spec.dt,
                           values=self.estimate.velocities[:, 2],
                           channel=Channel.VELOCITY_Z)
        vibration = vibration_series(v_z, self.config.walk.vibration_max)
        self.report.add_artifact("vibration.csv", vibration.to_csv)
        self.report.add_metrics(spectral_alarms=len(alarms),
                                peak_vibration=np.max(vibration.values))
        logger.info(f"{len(alarms)} spectral alarm(s), peak vibration "
                    f"{np.max(vibration.values):.4g}")
