"""
Test the spectral and correlation detectors and vibration feedback
"""
import os

import numpy as np
import pytest

from spoofsim.models.defense import (Alarm, AlarmKind, DetectorConfig,
                                     correlation_check, read_alarms,
                                     spectral_detect, vibration_feedback,
                                     vibration_series, write_alarms)
from spoofsim.tools.exceptions import AlignmentError, ParameterDomainError, \
    SeriesLengthError
from spoofsim.tools.series import Channel, SampleSeries

F_S = 100.
NOISE = 0.01
WALK = 0.005
TONE = 21.3


def _gyro(values, t0=0.):
    return SampleSeries(t0=t0, dt=1 / F_S, values=values, channel="gyro_z")


def _motion(rng, npts):
    """Random walk head motion plus white sensor noise"""
    return (np.cumsum(WALK * rng.standard_normal(npts)) +
            NOISE * rng.standard_normal(npts))


def test_spectral_detect_operating_point():
    """
    Over 200 seeded trials, a 21.3 Hz tone injected at 10 dB above the
    sensor noise is detected at least 95% of the time, while clean random
    walk motion raises an alarm in at most 5% of the trials
    """
    npts = 1024
    t = np.arange(npts) / F_S
    # Tone power A^2 / 2 is ten times the noise variance
    amplitude = NOISE * np.sqrt(2 * 10.)
    cfg = DetectorConfig()

    detected, false_alarms = 0, 0
    for seed in range(200):
        rng = np.random.Generator(np.random.Philox(seed))
        clean = _motion(rng, npts)
        phase = rng.uniform(0, 2 * np.pi)
        attacked = clean + amplitude * np.sin(2 * np.pi * TONE * t + phase)

        detected += bool(spectral_detect(_gyro(attacked), cfg))
        false_alarms += bool(spectral_detect(_gyro(clean), cfg))

    assert(detected >= 0.95 * 200)
    assert(false_alarms <= 0.05 * 200)


def test_spectral_detect_alarms():
    """Alarm fields, silent series and invariance to constant offsets"""
    rng = np.random.Generator(np.random.Philox(11))
    npts = 1024
    t = np.arange(npts) / F_S
    values = _motion(rng, npts) + 0.1 * np.sin(2 * np.pi * TONE * t)
    cfg = DetectorConfig()

    alarms = spectral_detect(_gyro(values, t0=2.), cfg)
    assert(alarms)
    for alarm in alarms:
        assert(alarm.kind == AlarmKind.NARROWBAND_PEAK)
        assert(alarm.score >= cfg.snr_threshold_db)
        first, last = 2. + 1.28, 2. + npts / F_S - 1.28
        assert(first - 1E-9 <= alarm.t <= last + 1E-9)

    shifted = spectral_detect(_gyro(values + 5., t0=2.), cfg)
    assert([_.t for _ in shifted] == [_.t for _ in alarms])
    assert(np.allclose([_.score for _ in shifted], [_.score for _ in alarms],
                       rtol=1E-6))

    assert(spectral_detect(_gyro(np.zeros(npts)), cfg) == [])
    assert(spectral_detect(_gyro(np.full(npts, 3.)), cfg) == [])

    with pytest.raises(SeriesLengthError):
        spectral_detect(_gyro(np.zeros(100)), cfg)


def test_spectral_detect_exclusion_band():
    """A tone inside the exclusion band is attributed to legitimate motion"""
    rng = np.random.Generator(np.random.Philox(12))
    npts = 1024
    t = np.arange(npts) / F_S
    values = NOISE * rng.standard_normal(npts) + \
        0.5 * np.sin(2 * np.pi * 10. * t)

    assert(spectral_detect(_gyro(values), DetectorConfig()))
    assert(not spectral_detect(_gyro(values),
                               DetectorConfig(exclusion_band=(0., 20.))))


def test_detector_config_domain():
    """Window, segment, thresholds and bands are validated"""
    with pytest.raises(ParameterDomainError):
        DetectorConfig(window=8)
    with pytest.raises(ParameterDomainError):
        DetectorConfig(segment=512)
    with pytest.raises(ParameterDomainError):
        DetectorConfig(corr_threshold=1.5)
    with pytest.raises(ParameterDomainError):
        DetectorConfig(snr_threshold_db=np.inf)
    with pytest.raises(ParameterDomainError):
        DetectorConfig(exclusion_band=(3., 1.))
    with pytest.raises(ParameterDomainError):
        DetectorConfig(overlap=1.)
    with pytest.raises(ParameterDomainError):
        Alarm(t=0., kind="NarrowbandPeak", score=-1.)


def test_correlation_check():
    """
    Identical streams never alarm, inverted streams alarm in every window,
    and an injected tone breaks the correlation only while it is active
    """
    npts = 1500
    t = np.arange(npts) / F_S
    motion = np.sin(2 * np.pi * 0.3 * t)
    cfg = DetectorConfig()
    n_windows = len(range(0, npts - cfg.window + 1, cfg.window // 2))

    assert(correlation_check(_gyro(motion), _gyro(motion), cfg) == [])

    inverted = correlation_check(_gyro(motion), _gyro(-motion), cfg)
    assert(len(inverted) == n_windows)
    assert(all(_.kind == AlarmKind.CORRELATION_BREAK for _ in inverted))
    assert(all(_.score == pytest.approx(1.5) for _ in inverted))

    active = (t >= 5.) & (t < 10.)
    attacked = motion + active * 3. * np.sin(2 * np.pi * TONE * t)
    alarms = correlation_check(_gyro(attacked), _gyro(motion), cfg)
    half = cfg.window / F_S / 2
    assert(alarms)
    assert(all(5. - half <= _.t <= 10. + half for _ in alarms))


def test_correlation_check_edge_cases():
    """Constant windows are skipped and the time axes must agree"""
    npts = 512
    still = _gyro(np.zeros(npts))
    moving = _gyro(np.sin(np.arange(npts) / 10.))
    assert(correlation_check(still, moving) == [])

    with pytest.raises(AlignmentError):
        correlation_check(moving, _gyro(np.sin(np.arange(npts) / 10.),
                                        t0=1.))
    with pytest.raises(AlignmentError):
        correlation_check(moving, _gyro(np.zeros(npts - 1)))
    with pytest.raises(SeriesLengthError):
        correlation_check(_gyro(np.zeros(10)), _gyro(np.zeros(10)))


def test_correlation_check_lag_search():
    """A delayed flow correlates once the lag search covers the delay"""
    rng = np.random.Generator(np.random.Philox(13))
    # Moving sum of white noise, uncorrelated beyond a lag of 2 samples
    motion = np.convolve(rng.standard_normal(1026), np.ones(3), "valid")
    delayed = np.roll(motion, 4)

    zero_lag = correlation_check(_gyro(motion), _gyro(delayed),
                                 DetectorConfig(corr_threshold=0.9))
    searched = correlation_check(_gyro(motion), _gyro(delayed),
                                 DetectorConfig(corr_threshold=0.9,
                                                max_lag=5))
    assert(zero_lag)
    assert(not searched)


def test_vibration_feedback():
    """Analytic points, saturation, symmetry and monotonicity"""
    assert(vibration_feedback(0., 2.) == 0.)
    assert(vibration_feedback(np.log(2.), 2.) == pytest.approx(1.))
    assert(vibration_feedback(5., 2.) >= 0.99 * 2.)
    assert(vibration_feedback(-0.7, 2.) == vibration_feedback(0.7, 2.))

    v = np.linspace(0, 10, 101)
    assert(np.all(np.diff(vibration_feedback(v, 1.)) > 0))
    assert(np.all(vibration_feedback(v, 1.) < 1.))

    with pytest.raises(ParameterDomainError):
        vibration_feedback(1., -1.)

    series = vibration_series(SampleSeries(0., 0.01, v, "velocity_z"), 1.)
    assert(series.channel == Channel.VIBRATION)
    assert(np.allclose(series.values, 1 - np.exp(-v)))


def test_alarms_json_lines(tmpdir):
    """Alarms are written one JSON object per line and read back"""
    fid = os.path.join(tmpdir, "alarms.jsonl")
    alarms = [Alarm(1.28, AlarmKind.NARROWBAND_PEAK, 14.2),
              Alarm(2.56, "CorrelationBreak", 0.3)]
    write_alarms(alarms, fid)

    with open(fid) as f:
        lines = f.read().splitlines()
    assert(lines[0] == '{"t": 1.28, "kind": "NarrowbandPeak", "score": 14.2}')
    assert(read_alarms(fid) == alarms)

    write_alarms([], fid)
    assert(read_alarms(fid) == [])
