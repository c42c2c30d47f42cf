"""
Test acoustic and magnetic transduction, IMU sampling and aliasing
"""
import os

import numpy as np
import pytest

from spoofsim.models.sensing import (HallSpec, ImuSpec, alias_frequency,
                                     constant_rate, fold_sign, hall_bias,
                                     ipd_jitter_series, sample_imu,
                                     transduce_acoustic, zero_rate)
from spoofsim.models.waveforms import (make_constant_tone, make_decaying_tone,
                                       make_sinusoid_current)
from spoofsim.tools.exceptions import ParameterDomainError, WaveformKindError
from spoofsim.tools.series import Channel, SampleSeries
from spoofsim.tools.signal import dominant_frequency, frequency_resolution


def test_alias_frequency_examples():
    """Folding examples, including an exact multiple and the half-way tie"""
    n, f_o = alias_frequency(27878.7, 100.)
    assert(n == 279)
    assert(f_o == pytest.approx(21.3, abs=1E-6))

    assert(alias_frequency(230., 100.) == (2, pytest.approx(30.)))
    assert(alias_frequency(100., 100.) == (1, 0.))
    # Half-way ratios resolve to the smaller integer
    assert(alias_frequency(250., 100.) == (2, pytest.approx(50.)))

    with pytest.raises(ParameterDomainError):
        alias_frequency(0., 100.)


def test_alias_frequency_range():
    """Folded frequency always lies in [0, f_s / 2]"""
    rng = np.random.Generator(np.random.Philox(1))
    for _ in range(500):
        f_s = rng.uniform(10, 1000)
        f_b = rng.uniform(1, 200) * f_s
        n, f_o = alias_frequency(f_b, f_s)
        assert(0 <= f_o <= f_s / 2 + 1E-9)
        assert(f_o == pytest.approx(abs(f_b - n * f_s)))


def test_fold_sign():
    """
    Sampled tones below a multiple of the sample rate are observed with
    inverted sign, tones above it are not
    """
    t = np.arange(100) / 100.
    assert(fold_sign(27880., 100.) == -1.)
    assert(np.allclose(np.sin(2 * np.pi * 27880. * t),
                       -np.sin(2 * np.pi * 20. * t), atol=1E-8))

    assert(fold_sign(27920., 100.) == 1.)
    assert(np.allclose(np.sin(2 * np.pi * 27920. * t),
                       np.sin(2 * np.pi * 20. * t), atol=1E-8))
    assert(fold_sign(100., 100.) == 1.)


def test_sampled_tone_peaks_at_folded_frequency():
    """
    For seeded random tones, the discrete spectral peak of the sampled
    injection lies within one bin of the predicted folded frequency
    """
    rng = np.random.Generator(np.random.Philox(2))
    npts = 4096
    for _ in range(20):
        f_s = rng.uniform(50, 1000)
        f_b = f_s * (rng.integers(10, 300) + rng.uniform(0.05, 0.45) *
                     rng.choice([-1, 1]))
        spec = ImuSpec(sample_rate=f_s, resonance_frequency=f_b,
                       resonance_bandwidth=1.)
        tone = transduce_acoustic(make_constant_tone(1., f_b), spec)
        series = sample_imu(zero_rate, tone, spec, duration=npts / f_s)

        _, f_o = alias_frequency(f_b, f_s)
        peak = dominant_frequency(series.values, series.dt)
        assert(abs(peak - f_o) <= frequency_resolution(len(series),
                                                       series.dt))


def test_transduce_acoustic_band():
    """In-band tones are scaled by k, out-of-band tones inject nothing"""
    spec = ImuSpec(resonance_frequency=27880., resonance_bandwidth=60.,
                   gain=0.5)
    t = np.linspace(0, 1, 1001)

    inside = make_decaying_tone(c=1., T=1., f_b=27880.)
    omega = transduce_acoustic(inside, spec)
    assert(np.allclose(omega(t), 0.5 * inside.evaluate(t)))

    doubled = transduce_acoustic(inside.scaled(2.), spec)
    assert(np.allclose(doubled(t), 2 * omega(t)))

    # Band edges are inclusive, anything beyond is rejected
    assert(transduce_acoustic(make_constant_tone(1., 27910.), spec)
           is not zero_rate)
    outside = transduce_acoustic(make_constant_tone(1., 27911.), spec)
    assert(outside is zero_rate)
    assert(not np.any(outside(t)))

    with pytest.raises(WaveformKindError):
        transduce_acoustic(make_sinusoid_current(1., 0.5), spec)


def test_sample_imu():
    """Zero, constant and biased sampling"""
    spec = ImuSpec(sample_rate=100.)
    zero = sample_imu(zero_rate, zero_rate, spec, duration=1.)
    assert(len(zero) == 100)
    assert(not np.any(zero.values))
    assert(zero.channel == Channel.GYRO_Z)

    biased = ImuSpec(sample_rate=100., gyro_bias=(0., 0.01, 0.))
    const = sample_imu(constant_rate(0.3), zero_rate, biased, duration=0.5,
                       axis=1)
    assert(np.allclose(const.values, 0.31))
    assert(const.channel == Channel.GYRO_Y)


def test_hall_bias_linearity():
    """
    Bias grows by 5 mm per ampere, 2 A reproduces the 10 mm peak and the
    raw bias is odd in the current
    """
    spec = HallSpec()
    currents = np.linspace(0, 2, 21)
    slope, _ = np.polyfit(currents, hall_bias(currents, spec), 1)

    assert(slope == pytest.approx(5., rel=0.02))
    assert(hall_bias(2., spec) == pytest.approx(10.))
    assert(hall_bias(1., spec) == pytest.approx(5.))
    assert(hall_bias(0., spec) == 0.)
    assert(hall_bias(-1.5, spec, clamp=False) ==
           -hall_bias(1.5, spec, clamp=False))
    # The lens can only widen by ipd_max - ipd_rest = 4 mm
    assert(hall_bias(-2., spec) == pytest.approx(-4.))

    with pytest.raises(ParameterDomainError):
        HallSpec(ipd_rest=80.)


def test_ipd_jitter_series():
    """A 0.5 Hz current produces a clamped IPD jitter peaking at 0.5 Hz"""
    spec = HallSpec()
    series = ipd_jitter_series(make_sinusoid_current(2., 0.5), spec,
                               f_s=72., duration=10.)

    assert(series.channel == Channel.HALL)
    assert(series.values.max() == pytest.approx(10.))
    assert(series.values.min() == pytest.approx(-4.))
    assert(abs(dominant_frequency(series.values, series.dt) - 0.5) <=
           frequency_resolution(len(series), series.dt))

    silent = ipd_jitter_series(make_sinusoid_current(0., 0.5), spec, 72., 1.)
    assert(not np.any(silent.values))

    with pytest.raises(WaveformKindError):
        ipd_jitter_series(make_constant_tone(1., 27880.), spec, 72., 1.)


def test_sample_series_csv(tmpdir):
    """Series written to CSV can be read back on the same time axis"""
    fid = os.path.join(tmpdir, "series.csv")
    series = SampleSeries(t0=0.5, dt=0.01, values=np.sin(np.arange(50)),
                          channel="hall")
    series.to_csv(fid)

    with open(fid) as f:
        assert(f.readline().strip() == "t,value")
    loaded = SampleSeries.from_csv(fid, channel=Channel.HALL)
    assert(len(loaded) == 50)
    assert(loaded.t0 == pytest.approx(0.5))
    assert(loaded.dt == pytest.approx(0.01))
    assert(np.allclose(loaded.values, series.values, rtol=1E-8))

    with pytest.raises(ParameterDomainError):
        SampleSeries(t0=0., dt=0., values=[1.], channel="hall")
    with pytest.raises(ValueError):
        SampleSeries(t0=0., dt=1., values=[np.nan], channel="hall")
