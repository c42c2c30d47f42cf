"""
Test the three case pipelines end to end, their exports and determinism
"""
import hashlib
import json
import os

import numpy as np
import pytest

from spoofsim.tools.config import validate_scenario
from spoofsim.workflow.avatar import Avatar
from spoofsim.workflow.dizziness import Dizziness
from spoofsim.workflow.scenario import STATUS_NO_FEASIBLE_ATTACK, \
    STATUS_OK
from spoofsim.workflow.trajectory import Trajectory


def _config(case, seed=0, **kwargs):
    return validate_scenario({"case": case, "seed": seed, **kwargs})


def _digests(path):
    """SHA-256 of every file in a directory, keyed by file name"""
    digests = {}
    for fid in sorted(os.listdir(path)):
        with open(os.path.join(path, fid), "rb") as f:
            digests[fid] = hashlib.sha256(f.read()).hexdigest()
    return digests


def test_trajectory_default():
    """The default tone is in band, biases the heading and drifts"""
    report = Trajectory(_config("trajectory")).run()
    m = report.metrics

    assert(report.status == STATUS_OK)
    assert(m["injected"])
    assert(m["observed_frequency"] == pytest.approx(20.))
    assert(m["fold_sign"] == -1.)
    assert(m["theta_T"] < 0 and m["theta_T_dead_reckoned"] < 0)
    assert(m["mae"] > 0 and m["rmse"] >= m["mae"])
    assert(0 < m["gain"] <= 1)
    assert(m["overshoot"] >= 0)
    assert(m["real_distance"] == pytest.approx(2.25 + m["overshoot"]))
    assert(0 <= m["peak_vibration"] <= 1)


def test_trajectory_window_angle():
    """
    27880 Hz folds to -20 Hz at 100 Hz, so the roll read from the attacked
    estimate after one decay window is negative, as is the reported bias
    """
    scenario = Trajectory(_config("trajectory", duration=1.))
    m = scenario.run().metrics
    R = scenario.estimate.rotations[-1]
    roll = np.arctan2(R[2, 1], R[1, 1])

    assert(len(scenario.estimate) == 101)
    assert(m["theta_T_dead_reckoned"] == pytest.approx(roll, rel=1E-9))
    assert(np.sign(m["theta_T"]) == np.sign(roll) == -1.)
    assert(m["theta_T"] == pytest.approx(roll, rel=0.2))

    # Folding from above keeps the sign
    above = Trajectory(_config("trajectory", duration=1.,
                               waveform={"frequency": 27905.})).run()
    assert(above.metrics["fold_sign"] == 1.)
    assert(above.metrics["theta_T"] > 0)
    assert(above.metrics["theta_T_dead_reckoned"] > 0)


def test_trajectory_zero_amplitude():
    """Without an attack there is no drift and no overshoot"""
    report = Trajectory(_config("trajectory",
                                waveform={"amplitude": 0.})).run()
    m = report.metrics
    assert(not m["injected"])
    assert(m["mae"] < 1E-9)
    assert(m["gain"] == 1.)
    assert(m["overshoot"] == 0.)
    assert(not m["speed_detectable"])
    assert(m["spectral_alarms"] == 0)


def test_trajectory_configured_gain():
    """A configured gain of 0.8 overshoots the 2.25 m boundary by 0.5625 m"""
    m = Trajectory(_config("trajectory", walk={"gain": 0.8})).run().metrics
    assert(m["overshoot"] == pytest.approx(0.5625))
    assert(m["speed_change"] == pytest.approx(0.27))
    assert(not m["speed_detectable"])
    assert(m["within_empirical_band"] ==
           (abs(0.5625 - m["empirical_overshoot"]) <=
            m["empirical_overshoot_band"]))


def test_avatar_selects_lowest_harmonic():
    """Within [27100, 27150] Hz the fourth camera harmonic is preferred"""
    report = Avatar(_config("avatar", duration=2.,
                            imu={"resonance_frequency": 27125.,
                                 "resonance_bandwidth": 50.})).run()
    m = report.metrics
    assert(report.status == STATUS_OK)
    assert(m["candidate_frequencies"] == "27120 27150")
    assert(m["attack_frequency"] == 27120.)
    assert(m["harmonic"] == 4)
    assert(m["observed_frequency"] == pytest.approx(120.))


def test_avatar_bypass():
    """
    The aligned attack biases the controller at least 5x more than the
    misaligned control, with a tenth of its residuals, yet the hand offset
    stays below the 9 cm threshold
    """
    report = Avatar(_config("avatar", duration=5.,
                            waveform={"amplitude": 10.},
                            imu={"resonance_frequency": 27530.,
                                 "resonance_bandwidth": 10.})).run()
    m = report.metrics

    assert(m["attack_frequency"] == 27530.)
    assert(m["observed_frequency"] == pytest.approx(30.))
    assert(m["control_frequency"] == pytest.approx(37.))
    assert(m["bias_ratio"] >= 5)
    assert(m["residual_aligned"] <= 0.1 * m["residual_control"])
    assert(0 < m["hand_offset_aligned"] < 0.09)
    assert(not m["hand_detectable_aligned"])
    assert("gain_trace_aligned.csv" in report.artifacts)


def test_avatar_default_band():
    """
    The default avatar band selects the fourth harmonic, which the fusion
    filter lets through for every seed
    """
    for seed in range(3):
        m = Avatar(_config("avatar", seed=seed, duration=5.)).run().metrics
        assert(m["harmonic"] == 4)
        assert(m["feasible_candidates"] == 2)
        assert(m["bias_ratio"] >= 5)
        assert(m["residual_aligned"] <= 0.1 * m["residual_control"])
        assert(m["final_gain_aligned"] < m["final_gain_control"])


def test_avatar_folded_harmonics():
    """
    Tones whose camera harmonic lies above half the IMU rate are reported as
    infeasible instead of being fed to the fusion filter
    """
    report = Avatar(_config("avatar",
                            imu={"resonance_frequency": 27880.,
                                 "resonance_bandwidth": 60.})).run()
    assert(report.status == STATUS_NO_FEASIBLE_ATTACK)
    assert(report.metrics["candidates"] == 2)
    assert(report.metrics["feasible_candidates"] == 0)
    assert("bias_aligned" not in report.metrics)


def test_avatar_no_feasible_attack(tmpdir):
    """An empty band stops the pipeline and still exports a report"""
    scenario = Avatar(_config("avatar",
                              imu={"resonance_frequency": 27855.,
                                   "resonance_bandwidth": 0.}))
    report = scenario.run()
    assert(report.status == STATUS_NO_FEASIBLE_ATTACK)
    assert(report.metrics["candidates"] == 0)
    assert("bias_aligned" not in report.metrics)

    written = scenario.export(str(tmpdir))
    assert(written == ["metrics.csv", "report.json"])
    with open(os.path.join(tmpdir, "report.json")) as f:
        assert(json.load(f)["status"] == STATUS_NO_FEASIBLE_ATTACK)


def test_dizziness_default():
    """A 2 A, 0.5 Hz current jitters the IPD by 10 mm at 0.5 Hz"""
    m = Dizziness(_config("dizziness")).run().metrics
    assert(m["peak_bias"] == pytest.approx(10.))
    assert(m["dominant_frequency"] == pytest.approx(0.5, abs=0.1))
    assert(m["score_stationary"] == 0.)
    assert(m["ordering_holds"])


def test_dizziness_ordering_over_seeds():
    """stationary < gameplay < attack for ten seeds"""
    for seed in range(10):
        m = Dizziness(_config("dizziness", seed=seed)).run().metrics
        assert(m["score_stationary"] < m["score_gameplay"] <
               m["score_attack"])


def test_dizziness_zero_current():
    """A zero current leaves the display still"""
    m = Dizziness(_config("dizziness",
                          waveform={"amplitude": 0.})).run().metrics
    assert(m["peak_bias"] == 0.)
    assert(m["score_attack"] == 0.)
    assert(not m["ordering_holds"])


def test_export(tmpdir):
    """Reports export every artifact plus metrics.csv and report.json"""
    scenario = Dizziness(_config("dizziness", duration=5.))
    scenario.run()
    written = scenario.export(str(tmpdir))

    assert(sorted(os.listdir(tmpdir)) == sorted(written))
    assert("report.json" in written and "metrics.csv" in written)
    assert("dizziness_attack.csv" in written)

    with open(os.path.join(tmpdir, "report.json")) as f:
        report = json.load(f)
    assert(report["case"] == "dizziness")
    assert(report["seed"] == 0)
    assert(report["scenario"]["waveform"]["kind"] == "sinusoid_current")

    with open(os.path.join(tmpdir, "metrics.csv")) as f:
        lines = f.read().splitlines()
    assert(lines[0] == "metric,value")
    assert(len(lines) == len(report["metrics"]) + 1)


def test_loop_block(tmpdir):
    """A configured loop block adds its response curve and metrics"""
    scenario = Trajectory(_config("trajectory", duration=3., loop={}))
    report = scenario.run()
    assert(report.metrics["loop_G_at_attack"] > 0)
    assert(report.metrics["loop_P_at_attack"] <
           report.metrics["loop_G_at_attack"])

    scenario.export(str(tmpdir))
    data = np.loadtxt(os.path.join(tmpdir, "loop_response.csv"),
                      delimiter=",", skiprows=1)
    assert(data.shape == (7, 3))
    assert(np.all(np.diff(data[:, 0]) > 0))
    assert(report.metrics["loop_simplified"])

    # A display block halving the forward path takes the full composition
    halved = Trajectory(_config("trajectory", duration=3., loop={
        "F_p": {"num": [0.5], "den": [1.]}})).run()
    assert(not halved.metrics["loop_simplified"])
    assert(halved.metrics["loop_G_at_attack"] <
           report.metrics["loop_G_at_attack"])


def test_runs_are_deterministic(tmpdir):
    """Repeated runs of the same scenario write byte-identical files"""
    for cls, case in [(Trajectory, "trajectory"), (Avatar, "avatar"),
                      (Dizziness, "dizziness")]:
        digests = []
        for run in ["a", "b"]:
            path = os.path.join(tmpdir, f"{case}_{run}")
            scenario = cls(_config(case, seed=42, duration=2.))
            scenario.run()
            scenario.export(path)
            digests.append(_digests(path))
        assert(digests[0] == digests[1])


def test_seed_changes_noise_only():
    """Different seeds change the gameplay proxy, not the attack itself"""
    a = Dizziness(_config("dizziness", seed=1)).run().metrics
    b = Dizziness(_config("dizziness", seed=2)).run().metrics

    for key in ["peak_bias", "dominant_frequency", "score_attack",
                "score_stationary"]:
        assert(a[key] == b[key])
    assert(a["score_gameplay"] != b["score_gameplay"])
