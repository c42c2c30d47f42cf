"""
Test dead reckoning, the decay-window orientation bias and trajectory errors
"""
import os

import numpy as np
import pytest

from spoofsim.models.nav import (NavState, PropagationConfig, Trajectory,
                                 WalkProfile, dead_reckon, drift_experiment,
                                 propagate, theta_T_analytic,
                                 theta_T_quadrature, trajectory_errors,
                                 walk_streams)
from spoofsim.models.sensing import ImuSpec
from spoofsim.models.waveforms import make_decaying_tone
from spoofsim.tools.exceptions import (AlignmentError, NumericDomainError,
                                       ParameterDomainError, ShapeError)
from spoofsim.tools.math import heading, orthonormality_error, so3_exp
from spoofsim.tools.series import SampleSeries


def _streams(gyro, accel, dt):
    """Wrap (N, 3) arrays as gyro and accel series"""
    g = [SampleSeries(t0=0., dt=dt, values=gyro[:, i], channel=f"gyro_{x}")
         for i, x in enumerate("xyz")]
    a = [SampleSeries(t0=0., dt=dt, values=accel[:, i], channel=f"accel_{x}")
         for i, x in enumerate("xyz")]
    return g, a


def test_theta_T_matches_quadrature():
    """
    Closed form equals adaptive quadrature over the full amplitude, frequency
    and period grid, and grows for lower frequencies and larger amplitudes
    """
    amplitudes = [0.2, 0.4, 0.6, 0.8, 1.0]
    frequencies = [5., 20., 40., 75.]
    periods = [0.5, 1., 2.]
    for c in amplitudes:
        for f_o in frequencies:
            for T in periods:
                analytic = theta_T_analytic(c, 1., f_o, T)
                oracle = theta_T_quadrature(c, 1., f_o, T)
                assert(analytic == pytest.approx(oracle, rel=1E-9))

    for T in periods:
        for c in amplitudes:
            thetas = [theta_T_analytic(c, 1., f, T) for f in frequencies]
            assert(all(a > b for a, b in zip(thetas[:-1], thetas[1:])))
        for f_o in frequencies:
            thetas = [theta_T_analytic(c, 1., f_o, T) for c in amplitudes]
            assert(all(a < b for a, b in zip(thetas[:-1], thetas[1:])))


def test_theta_T_examples():
    """Integer f_o T collapses the closed form to ck / (2 pi f_o)"""
    assert(theta_T_analytic(1., 1., 5., 1.) ==
           pytest.approx(1. / (10 * np.pi), rel=1E-12))
    assert(theta_T_analytic(2., 1., 5., 1.) ==
           pytest.approx(2 * theta_T_analytic(1., 1., 5., 1.)))
    assert(theta_T_analytic(1., 1., 0., 1.) == 0.)
    # Small 2 pi f_o T uses the series and stays accurate
    assert(theta_T_analytic(1., 1., 1E-5, 1.) ==
           pytest.approx(theta_T_quadrature(1., 1., 1E-5, 1.), rel=1E-6))
    with pytest.raises(ParameterDomainError):
        theta_T_analytic(1., 1., 5., 0.)


def test_propagate_examples():
    """Bias-cancelled coast, gravity cancellation and bad input"""
    spec = ImuSpec(gyro_bias=(0.1, 0., 0.), accel_bias=(0., 0.2, 0.))
    cfg = PropagationConfig(g=(0., 0., 0.), dt=0.01)
    s = NavState(v=[1., 0., 0.])
    s1 = propagate(s, spec.gyro_bias, spec.accel_bias, cfg, spec)

    assert(np.allclose(s1.R, np.eye(3)))
    assert(np.allclose(s1.v, s.v))
    assert(np.allclose(s1.p, [0.01, 0., 0.]))
    assert(s1.t == pytest.approx(0.01))

    cfg = PropagationConfig(dt=0.01)
    s2 = propagate(s, [0., 0., 0.], -np.array(cfg.g), cfg, ImuSpec())
    assert(np.allclose(s2.v, s.v))

    with pytest.raises(NumericDomainError):
        propagate(s, [np.nan, 0., 0.], [0., 0., 0.], cfg, ImuSpec())
    with pytest.raises(ParameterDomainError):
        PropagationConfig(dt=0.)


def test_propagate_quarter_turn():
    """pi/2 rad/s about z for 1 s in 1000 steps gives a quarter turn"""
    cfg = PropagationConfig(g=(0., 0., 0.), dt=0.001)
    spec = ImuSpec()
    s = NavState()
    for _ in range(1000):
        s = propagate(s, [0., 0., np.pi / 2], [0., 0., 0.], cfg, spec,
                      reorthonormalize=True)

    assert(np.allclose(s.R, so3_exp([0., 0., np.pi / 2]), atol=1E-6))
    assert(heading(s.R) == pytest.approx(np.pi / 2, abs=1E-6))


def test_dead_reckon_stationary_and_shapes():
    """All-zero measurements without gravity do not move the body"""
    spec = ImuSpec(sample_rate=100.)
    cfg = PropagationConfig(g=(0., 0., 0.), dt=spec.dt)
    traj = dead_reckon(*_streams(np.zeros((50, 3)), np.zeros((50, 3)),
                                 spec.dt), cfg, spec)

    assert(len(traj) == 51)
    assert(not np.any(traj.positions))
    assert(np.allclose(traj.rotations, np.eye(3)))

    gyro, accel = _streams(np.zeros((50, 3)), np.zeros((50, 3)), spec.dt)
    accel[0] = SampleSeries(t0=0., dt=spec.dt, values=np.zeros(49),
                            channel="accel_x")
    with pytest.raises(ShapeError):
        dead_reckon(gyro, accel, cfg, spec)
    with pytest.raises(ShapeError):
        dead_reckon(*_streams(np.zeros((5, 3)), np.zeros((5, 3)), 0.02), cfg,
                    spec)


def test_dead_reckon_heading_matches_theta_T():
    """
    A decaying tone on the yaw gyro turns the dead reckoned heading by
    theta_T per decay window, and the opposite sign mirrors it
    """
    spec = ImuSpec(sample_rate=200.)
    walk = WalkProfile()
    c, f_o, T = 0.2, 5., 1.
    theta = theta_T_analytic(c, 1., f_o, T)

    for cycles in [1, 3]:
        tone = make_decaying_tone(c, T, f_o, cycles=cycles)
        cfg = PropagationConfig(dt=spec.dt)
        est = dead_reckon(*walk_streams(walk, spec, cycles * T, tone.evaluate,
                                        axis=2), cfg, spec,
                          walk.initial_state())
        assert(est.headings[-1] == pytest.approx(cycles * theta, rel=0.02))

        mirrored = dead_reckon(*walk_streams(walk, spec, cycles * T,
                                             lambda t: -tone.evaluate(t),
                                             axis=2), cfg, spec,
                               walk.initial_state())
        assert(mirrored.headings[-1] == pytest.approx(-est.headings[-1]))


def test_dead_reckon_rotation_stays_orthonormal():
    """Rotations stay orthonormal over 1e5 steps of random rotation rates"""
    rng = np.random.Generator(np.random.Philox(3))
    npts = 100000
    spec = ImuSpec(sample_rate=100.)
    cfg = PropagationConfig(dt=spec.dt)
    traj = dead_reckon(*_streams(rng.normal(0., 2., (npts, 3)),
                                 rng.normal(0., 1., (npts, 3)), spec.dt),
                       cfg, spec)

    R = traj.rotations
    gram = np.einsum("nji,njk->nik", R, R) - np.eye(3)
    assert(np.max(np.abs(gram)) < 1E-6)
    assert(np.max(np.abs(np.linalg.det(R) - 1.)) < 1E-6)
    assert(orthonormality_error(R[-1]) < 1E-9)


def test_trajectory_errors():
    """MAE and RMSE under standard definitions"""
    times = np.arange(4) * 0.1
    rotations = np.tile(np.eye(3), (4, 1, 1))
    zeros = np.zeros((4, 3))
    truth = Trajectory(times, rotations, zeros, zeros)

    stats = trajectory_errors(truth, truth)
    assert(stats.mae == 0 and stats.rmse == 0)

    shifted = Trajectory(times, rotations, zeros, zeros + [0.3, 0.4, 0.])
    stats = trajectory_errors(shifted, truth)
    assert(stats.mae == pytest.approx(0.5))
    assert(stats.rmse == pytest.approx(0.5))

    alternating = Trajectory(times, rotations, zeros,
                             np.array([[0, 0, 0], [1, 0, 0]] * 2, float))
    stats = trajectory_errors(alternating, truth)
    assert(stats.mae == pytest.approx(0.5))
    assert(stats.rmse == pytest.approx(np.sqrt(0.5)))
    assert(stats.rmse >= stats.mae)

    late = Trajectory(times + 0.05, rotations, zeros, zeros)
    with pytest.raises(AlignmentError):
        trajectory_errors(late, truth)
    with pytest.raises(ShapeError):
        Trajectory(times[::-1], rotations, zeros, zeros)


def test_drift_experiment_trend():
    """
    No fluctuation gives no error; a 5 Hz fluctuation drifts at least 1.5x
    further than a 75 Hz one, and the error grows with the walk duration
    """
    baseline = drift_experiment(0., 5., duration=5.)
    assert(baseline.mae < 1E-9)

    slow = drift_experiment(0.2, 5., duration=5.)
    fast = drift_experiment(0.2, 75., duration=5.)
    assert(slow.mae >= 1.5 * fast.mae)
    assert(slow.rmse >= 1.5 * fast.rmse)

    maes = [drift_experiment(0.2, 5., duration=d).mae for d in [2., 4., 6.]]
    assert(maes[0] <= maes[1] <= maes[2])

    with pytest.raises(ParameterDomainError):
        drift_experiment(-0.1, 5., duration=1.)


def test_trajectory_csv(tmpdir):
    """Trajectories export as t,p,quaternion rows"""
    walk = WalkProfile(heading=0.3)
    spec = ImuSpec(sample_rate=50.)
    traj = dead_reckon(*walk_streams(walk, spec, 1.),
                       PropagationConfig(dt=spec.dt), spec,
                       walk.initial_state())
    fid = os.path.join(tmpdir, "trajectory.csv")
    traj.to_csv(fid)

    data = np.loadtxt(fid, delimiter=",", skiprows=1)
    assert(data.shape == (51, 8))
    assert(np.allclose(np.linalg.norm(data[:, 4:], axis=1), 1.))
    # Constant velocity walk along the heading
    assert(np.allclose(data[-1, 1:3], 1.35 * np.array([np.cos(0.3),
                                                        np.sin(0.3)]),
                       atol=1E-6))
