#!/usr/bin/env python3
"""
Controller IMU pathway: an ultrasonic tone chosen so that the IMU samples
oscillate at a harmonic of the IR camera rate, phase aligned with the camera
updates, slips past the fusion filter's correction and biases the controller
orientation. The bias swings the avatar wrist about the shoulder.
"""
import numpy as np

from spoofsim import logger
from spoofsim.models.fusion import below_nyquist, eskf_run, phase_align, \
    select_bypass_frequencies
from spoofsim.models.perception import is_hand_offset_detectable, \
    wrist_offset_deltas
from spoofsim.models.sensing import alias_frequency
from spoofsim.workflow.scenario import Scenario, STATUS_NO_FEASIBLE_ATTACK


class Avatar(Scenario):
    """
    Avatar Pipeline [Scenario -> Avatar]
    ------------------------------------
    Bypass frequency selection in the resonance band -> phase alignment ->
    fusion filter run for the aligned attack and for a misaligned control ->
    wrist displacement and joint angle changes -> hand offset detectability.

    The waveform section supplies the acoustic amplitude c; the tone
    frequency is selected from the band, so `waveform.frequency` is unused.
    A tone is feasible when its camera harmonic lies below half the IMU rate;
    above it the IMU samples the folded frequency instead. Among the
    feasible tones, the lowest camera harmonic is preferred, ties go to the
    tone closest to the resonance center.

    Parameters
    ----------
    :type config: spoofsim.tools.config.ScenarioConfig
    :param config: validated scenario with `case` == 'avatar'

    Paths
    -----
    ***
    """
    case = "avatar"

    def __init__(self, config, path_output=None):
        super().__init__(config, path_output)
        self.spec = self.imu_spec()
        self.fusion = self.fusion_config()
        self.selected = None
        self.biases = {}

    @property
    def task_list(self):
        return [self.select_frequency,
                self.run_fusion,
                self.offset_hand]

    def select_frequency(self):
        """Enumerate bypass tones in the resonance band and pick one"""
        lo, hi = self.spec.band
        candidates = select_bypass_frequencies(lo, hi, self.fusion,
                                               n_max=self.config.fusion.n_max)
        f_cam = self.fusion.camera_rate
        feasible = [_ for _ in candidates
                    if below_nyquist(_[2] * f_cam, self.fusion)]
        self.report.add_metrics(band_lo=lo, band_hi=hi,
                                candidates=len(candidates),
                                feasible_candidates=len(feasible))
        if not feasible:
            logger.warning(f"no bypass frequency in band [{lo}, {hi}] Hz with "
                           f"a camera harmonic below "
                           f"{self.fusion.imu_rate / 2.} Hz, "
                           f"{len(candidates)} candidate(s) fold")
            self.report.status = STATUS_NO_FEASIBLE_ATTACK
            return

        center = self.spec.resonance_frequency
        f_a, m, n = min(feasible, key=lambda _: (_[2], abs(_[0] - center),
                                                    _[0]))
        self.selected = (f_a, m, n)
        # The IMU samples of f_a equal those of its camera harmonic
        f_obs = f_a - m * self.fusion.imu_rate
        _, f_folded = alias_frequency(f_a, self.fusion.imu_rate)
        self.attack_frequency = f_obs
        self.report.add_metrics(attack_frequency=f_a, harmonic=n,
                                observed_frequency=f_obs,
                                folded_frequency=f_folded,
                                candidate_frequencies=" ".join(
                                    f"{_[0]:g}" for _ in candidates))
        logger.info(f"{len(candidates)} candidate(s), selected {f_a:g} Hz "
                    f"(m={m}, n={n}), observed at {f_obs:g} Hz")

    def run_fusion(self):
        """Fusion filter under the aligned attack and a misaligned control"""
        f_obs = self.attack_frequency
        phase = phase_align(f_obs, self.fusion)
        amplitude = self.spec.gain * self.config.waveform.amplitude
        # Offset away from the Nyquist frequency if needed
        control = f_obs + self.config.fusion.control_offset
        if not below_nyquist(control, self.fusion):
            control = f_obs - self.config.fusion.control_offset

        traces = {}
        for label, f in [("aligned", f_obs), ("control", control)]:
            bias, trace = eskf_run(f, amplitude, phase, self.config.duration,
                                   self.fusion, seed=self.config.seed)
            self.biases[label] = bias
            traces[label] = trace
            self.report.add_artifact(f"gain_trace_{label}.csv", trace.to_csv)

        ratio = abs(self.biases["aligned"]) / max(abs(self.biases["control"]),
                                                  np.finfo(float).tiny)
        self.report.add_metrics(
            phase=phase, attack_amplitude=amplitude,
            control_frequency=control,
            bias_aligned=self.biases["aligned"],
            bias_control=self.biases["control"], bias_ratio=ratio,
            residual_aligned=traces["aligned"].mean_abs_residual,
            residual_control=traces["control"].mean_abs_residual,
            final_gain_aligned=traces["aligned"].gains[-1],
            final_gain_control=traces["control"].gains[-1],
        )
        logger.info(f"bias aligned={self.biases['aligned']:.4g} rad, "
                    f"control={self.biases['control']:.4g} rad, "
                    f"ratio {ratio:.3g}")

    def offset_hand(self):
        """Wrist displacement and joint changes caused by the aligned bias"""
        arm = self.config.arm
        th = self.thresholds()
        for label in ["aligned", "control"]:
            offset, d_shoulder, d_elbow = wrist_offset_deltas(
                arm.wrist, self.biases[label], arm.l1, arm.l2
            )
            self.report.add_metrics(**{
                f"hand_offset_{label}": offset,
                f"shoulder_delta_{label}": d_shoulder,
                f"elbow_delta_{label}": d_elbow,
                f"hand_detectable_{label}": is_hand_offset_detectable(offset,
                                                                      th),
            })
        metrics = self.report.metrics
        logger.info(f"hand offset {metrics['hand_offset_aligned']:.4g} m, "
                    f"detectable={metrics['hand_detectable_aligned']}")
