#!/usr/bin/env python3
"""
Sensor transduction of attack signals.

Acoustic tones that fall inside a MEMS gyroscope's resonance band appear on
its rate output scaled by a conversion gain, and are then folded to a low
frequency by the IMU's instantaneous sampling. A coil next to the headset's
Hall sensor biases the measured interpupillary distance (IPD) in proportion
to the coil current, within the mechanical range of the lens assembly.
"""
from dataclasses import dataclass

import numpy as np

from spoofsim import logger
from spoofsim.models.waveforms import WaveformKind
from spoofsim.tools.exceptions import ParameterDomainError, WaveformKindError
from spoofsim.tools.series import SampleSeries, Channel


@dataclass(frozen=True)
class ImuSpec:
    """
    Inertial sensor physics

    :type sample_rate: float
    :param sample_rate: f_s, output data rate in Hz
    :type resonance_frequency: float
    :param resonance_frequency: f_r, center of the susceptible band in Hz
    :type resonance_bandwidth: float
    :param resonance_bandwidth: f_w, width of the susceptible band in Hz
    :type gain: float
    :param gain: k, rad/s of rate output per unit of acoustic drive
    :type gyro_bias: tuple of float
    :param gyro_bias: constant gyroscope bias per axis in rad/s
    :type accel_bias: tuple of float
    :param accel_bias: constant accelerometer bias per axis in m/s^2
    """
    sample_rate: float = 100.
    resonance_frequency: float = 27880.
    resonance_bandwidth: float = 60.
    gain: float = 1.
    gyro_bias: tuple = (0., 0., 0.)
    accel_bias: tuple = (0., 0., 0.)

    def __post_init__(self):
        if not self.sample_rate > 0:
            raise ParameterDomainError("sample_rate must be > 0")
        if not self.resonance_bandwidth >= 0:
            raise ParameterDomainError("resonance_bandwidth must be >= 0")
        for name in ["gyro_bias", "accel_bias"]:
            bias = tuple(float(_) for _ in np.broadcast_to(getattr(self, name),
                                                           (3,)))
            object.__setattr__(self, name, bias)

    @property
    def dt(self):
        return 1. / self.sample_rate

    @property
    def band(self):
        """Susceptible band [f_r - f_w/2, f_r + f_w/2] in Hz"""
        half = self.resonance_bandwidth / 2.
        return self.resonance_frequency - half, self.resonance_frequency + half

    def in_band(self, f):
        lo, hi = self.band
        return lo <= f <= hi


@dataclass(frozen=True)
class HallSpec:
    """
    Hall-sensor IPD readout

    :type k_ipd: float
    :param k_ipd: IPD bias per ampere of coil current, mm/A
    :type ipd_rest: float
    :param ipd_rest: IPD setting without interference, mm
    :type ipd_min: float
    :param ipd_min: smallest IPD the lens assembly can reach, mm
    :type ipd_max: float
    :param ipd_max: largest IPD the lens assembly can reach, mm
    """
    k_ipd: float = 5.
    ipd_rest: float = 68.
    ipd_min: float = 58.
    ipd_max: float = 72.

    def __post_init__(self):
        if not self.ipd_min <= self.ipd_rest <= self.ipd_max:
            raise ParameterDomainError(
                f"IPD range must satisfy ipd_min <= ipd_rest <= ipd_max, got "
                f"{self.ipd_min}, {self.ipd_rest}, {self.ipd_max}"
            )


def alias_frequency(f_b, f_s):
    """
    Fold frequency `f_b` by instantaneous sampling at `f_s`. `n` is the
    integer closest to f_b / f_s; an exact half-way ratio resolves to the
    smaller integer

    :type f_b: float
    :param f_b: frequency of the sampled tone in Hz
    :type f_s: float
    :param f_s: sample rate in Hz
    :rtype: (int, float)
    :return: (n, f_o) with f_o = |f_b - n * f_s| in [0, f_s / 2]
    """
    if not (f_b > 0 and f_s > 0):
        raise ParameterDomainError(f"frequencies must be > 0, got f_b={f_b}, "
                                   f"f_s={f_s}")
    ratio = f_b / f_s
    n = int(np.floor(ratio))
    if ratio - n > 0.5:
        n += 1
    return n, abs(f_b - n * f_s)


def fold_sign(f_b, f_s):
    """
    Sign of f_b - n * f_s. The samples of sin(2 pi f_b t) equal those of
    fold_sign * sin(2 pi f_o t), so a tone just below a multiple of the
    sample rate is observed with inverted sign

    :rtype: float
    :return: 1. or -1.
    """
    n, _ = alias_frequency(f_b, f_s)
    return 1. if f_b - n * f_s >= 0 else -1.


def transduce_acoustic(w, spec):
    """
    Rate output ω(t) that an acoustic waveform drives on one gyroscope axis.
    Tones outside the resonance band (for sweeps: any part of the sweep) are
    rejected entirely

    :type w: spoofsim.models.waveforms.Waveform
    :param w: acoustic waveform (constant, decaying or swept tone)
    :type spec: ImuSpec
    :param spec: sensor physics
    :rtype: function
    :return: function of time (float or np.array) returning rad/s
    """
    if not w.is_acoustic:
        raise WaveformKindError(f"{w.kind.value} cannot drive a gyroscope, "
                                f"expected one of constant_tone, "
                                f"decaying_tone, swept_tone")

    lo, hi = w.frequency_bounds
    if not (spec.in_band(lo) and spec.in_band(hi)):
        logger.debug(f"{w.kind.value} at {lo}-{hi} Hz outside of resonance "
                     f"band {spec.band}, no injection")
        return zero_rate

    def injected(t):
        return spec.gain * w.evaluate(t)

    return injected


def zero_rate(t):
    """Rate function that is identically zero"""
    return np.zeros_like(np.asarray(t, dtype=float))


def constant_rate(value):
    """Rate function that is identically `value`"""
    def rate(t):
        return np.full_like(np.asarray(t, dtype=float), value)
    return rate


def sample_times(duration, f_s, t0=0.):
    """round(duration * f_s) instantaneous sample times starting at `t0`"""
    if not duration > 0:
        raise ParameterDomainError(f"duration must be > 0, got {duration}")
    npts = max(1, int(round(duration * f_s)))
    return t0 + np.arange(npts) / f_s


def sample_imu(true_motion, injected, spec, duration, axis=2, accel=False):
    """
    Ideal instantaneous sampling of one IMU axis: true motion plus injected
    signal plus the constant bias of that axis, with no anti-alias filter

    :type true_motion: function
    :param true_motion: function of time returning the true rate
    :type injected: function
    :param injected: function of time returning the injected rate
    :type spec: ImuSpec
    :param spec: sensor physics, provides f_s and the biases
    :type duration: float
    :param duration: length of the record in seconds
    :type axis: int
    :param axis: 0, 1, 2 for x, y, z
    :type accel: bool
    :param accel: label and bias the series as accelerometer output
    :rtype: spoofsim.tools.series.SampleSeries
    """
    t = sample_times(duration, spec.sample_rate)
    bias = (spec.accel_bias if accel else spec.gyro_bias)[axis]
    values = (np.broadcast_to(true_motion(t), t.shape) +
              np.broadcast_to(injected(t), t.shape) + bias)
    channel = Channel.accel(axis) if accel else Channel.gyro(axis)
    return SampleSeries(t0=0., dt=spec.dt, values=values, channel=channel)


def hall_bias(I, spec, clamp=True):
    """
    IPD bias caused by coil current I. The raw bias k_ipd * I is applied to
    the rest IPD and clamped to the lens range; the applied bias is returned

    :type I: float or np.array
    :param I: coil current in ampere
    :type spec: HallSpec
    :param spec: Hall sensor readout parameters
    :type clamp: bool
    :param clamp: set False to return the raw, unclamped bias
    :rtype: float or np.array
    :return: bias in mm, positive bias narrows the IPD
    """
    bias = spec.k_ipd * np.asarray(I, dtype=float)
    if clamp:
        ipd = np.clip(spec.ipd_rest - bias, spec.ipd_min, spec.ipd_max)
        bias = spec.ipd_rest - ipd
    return float(bias) if np.ndim(bias) == 0 else bias


def ipd_jitter_series(current, spec, f_s, duration):
    """
    Applied IPD bias sampled at `f_s` while a sinusoidal coil current drives
    the Hall sensor

    :type current: spoofsim.models.waveforms.Waveform
    :param current: sinusoidal coil current
    :type spec: HallSpec
    :param spec: Hall sensor readout parameters
    :type f_s: float
    :param f_s: sample rate of the IPD readout in Hz
    :type duration: float
    :param duration: record length in seconds
    :rtype: spoofsim.tools.series.SampleSeries
    """
    if current.kind != WaveformKind.SINUSOID_CURRENT:
        raise WaveformKindError(f"IPD jitter requires a sinusoid_current, "
                                f"got {current.kind.value}")
    t = sample_times(duration, f_s)
    values = hall_bias(current.evaluate(t), spec)
    return SampleSeries(t0=0., dt=1. / f_s, values=values,
                        channel=Channel.HALL)
