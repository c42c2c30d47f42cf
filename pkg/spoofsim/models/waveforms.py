#!/usr/bin/env python3
"""
Attack waveforms as evaluable continuous-time functions.

Four kinds of signal drive the attack pathways: a constant ultrasonic tone, a
linearly decaying tone that re-triggers every decay period, a tone whose
frequency sweeps sinusoidally between two bounds, and a sinusoidal coil
current used against magnetic sensors. Every evaluation is closed form, so
repeated calls with identical arguments return identical values.
"""
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from spoofsim.tools.exceptions import ParameterDomainError


class WaveformKind(str, Enum):
    CONSTANT_TONE = "constant_tone"
    DECAYING_TONE = "decaying_tone"
    SWEPT_TONE = "swept_tone"
    SINUSOID_CURRENT = "sinusoid_current"


ACOUSTIC_KINDS = (WaveformKind.CONSTANT_TONE, WaveformKind.DECAYING_TONE,
                  WaveformKind.SWEPT_TONE)


@dataclass(frozen=True)
class Waveform:
    """
    Parametric attack signal

    :type kind: WaveformKind
    :param kind: which closed form the waveform follows
    :type amplitude: float
    :param amplitude: peak amplitude `c` (acoustic drive) or `A` (ampere)
    :type frequency: float
    :param frequency: base frequency in Hz; for swept tones the start
        frequency f_0 of the sweep
    :type target_frequency: float
    :param target_frequency: swept tones only, the far end f_a of the sweep
    :type period: float
    :param period: decay period T (decaying) or sweep period T (swept)
    :type phase: float
    :param phase: phase offset in radians
    :type cycles: int
    :param cycles: decaying tones only, number of back to back decay windows
    """
    kind: WaveformKind
    amplitude: float
    frequency: float
    target_frequency: float = None
    period: float = None
    phase: float = 0.
    cycles: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", WaveformKind(self.kind))
        if not self.amplitude >= 0:
            raise ParameterDomainError(f"amplitude must be >= 0, got "
                                       f"{self.amplitude}")
        if not self.frequency > 0:
            raise ParameterDomainError(f"frequency must be > 0, got "
                                       f"{self.frequency}")
        if self.kind in (WaveformKind.DECAYING_TONE, WaveformKind.SWEPT_TONE):
            if self.period is None or not self.period > 0:
                raise ParameterDomainError(
                    f"{self.kind.value} requires period > 0, got {self.period}"
                )
        if self.kind == WaveformKind.SWEPT_TONE:
            if self.target_frequency is None or not self.target_frequency > 0:
                raise ParameterDomainError(
                    f"swept tone requires target_frequency > 0, got "
                    f"{self.target_frequency}"
                )
        if int(self.cycles) < 1:
            raise ParameterDomainError(f"cycles must be >= 1, got "
                                       f"{self.cycles}")

    @property
    def is_acoustic(self):
        return self.kind in ACOUSTIC_KINDS

    @property
    def frequency_bounds(self):
        """(lowest, highest) instantaneous frequency the waveform reaches"""
        if self.kind == WaveformKind.SWEPT_TONE:
            return (min(self.frequency, self.target_frequency),
                    max(self.frequency, self.target_frequency))
        return self.frequency, self.frequency

    def scaled(self, factor):
        """Copy of this waveform with the amplitude multiplied by `factor`"""
        return replace(self, amplitude=self.amplitude * factor)

    def envelope(self, t):
        """
        Amplitude envelope. Decaying tones fall linearly from c to 0 over
        each period and are 0 once all `cycles` windows have elapsed

        :type t: float or np.array
        :param t: time in seconds, >= 0
        :rtype: float or np.array
        """
        t = _check_time(t)
        if self.kind != WaveformKind.DECAYING_TONE:
            return self.amplitude * np.ones_like(t)

        T = self.period
        # Exactly at a window boundary the previous window has fully decayed
        local = t - T * np.clip(np.ceil(t / T) - 1, 0, None)
        env = self.amplitude * (1. - local / T)
        return np.where(t <= self.cycles * T, env, 0.)

    def instantaneous_frequency(self, t):
        """
        Frequency in Hz at time t. Swept tones follow
        f(t) = (f_a - f_0) * (sin(2 pi t / T) + 1) / 2 + f_0

        :type t: float or np.array
        :param t: time in seconds
        :rtype: float or np.array
        """
        t = _check_time(t)
        if self.kind != WaveformKind.SWEPT_TONE:
            return self.frequency * np.ones_like(t)
        f0, fa, T = self.frequency, self.target_frequency, self.period
        return (fa - f0) * (np.sin(2 * np.pi * t / T) + 1.) / 2. + f0

    def phase_integral(self, t):
        """
        Closed form of the integral of the instantaneous frequency from 0 to
        t, i.e. the number of cycles elapsed

        :type t: float or np.array
        :param t: time in seconds
        :rtype: float or np.array
        """
        t = _check_time(t)
        if self.kind != WaveformKind.SWEPT_TONE:
            return self.frequency * t
        f0, fa, T = self.frequency, self.target_frequency, self.period
        raised = t + T / (2 * np.pi) * (1. - np.cos(2 * np.pi * t / T))
        return f0 * t + (fa - f0) / 2. * raised

    def evaluate(self, t):
        """
        Signal value at time t. Swept tones use the cosine form of the
        phase integral, all other kinds a sine

        :type t: float or np.array
        :param t: time in seconds, >= 0
        :rtype: float or np.array
        """
        t = _check_time(t)
        if self.kind == WaveformKind.SWEPT_TONE:
            return self.amplitude * np.cos(2 * np.pi * self.phase_integral(t)
                                           + self.phase)
        carrier = np.sin(2 * np.pi * self.frequency * t + self.phase)
        return self.envelope(t) * carrier

    __call__ = evaluate


def _check_time(t):
    """Evaluation times must be non-negative"""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ParameterDomainError("waveforms are only defined for t >= 0")
    return t


def eval_waveform(w, t):
    """
    Evaluate waveform `w` at time(s) `t`

    :type w: Waveform
    :param w: waveform to evaluate
    :type t: float or np.array
    :param t: time in seconds
    :rtype: float or np.array
    """
    value = w.evaluate(t)
    return float(value) if np.ndim(value) == 0 else value


def make_constant_tone(c, f, phase=0.):
    """Constant amplitude tone c * sin(2 pi f t + phase)"""
    return Waveform(kind=WaveformKind.CONSTANT_TONE, amplitude=c, frequency=f,
                    phase=phase)


def make_decaying_tone(c, T, f_b, phase=0., cycles=1):
    """
    Linearly decaying ultrasonic tone (-c/T * t + c) * sin(2 pi f_b t) on
    [0, T] and zero afterwards

    :type c: float
    :param c: initial amplitude, > 0
    :type T: float
    :param T: decay period in seconds, > 0
    :type f_b: float
    :param f_b: carrier frequency in Hz, > 0
    :type cycles: int
    :param cycles: number of decay windows played back to back
    :rtype: Waveform
    """
    _check_positive(c=c, T=T, f_b=f_b)
    return Waveform(kind=WaveformKind.DECAYING_TONE, amplitude=c,
                    frequency=f_b, period=T, phase=phase, cycles=cycles)


def make_swept_tone(c, f_0, f_a, T, phase=0.):
    """
    Tone whose instantaneous frequency sweeps sinusoidally between f_0 and
    f_a with period T

    :type c: float
    :param c: amplitude, >= 0
    :type f_0: float
    :param f_0: sweep start frequency in Hz
    :type f_a: float
    :param f_a: sweep target frequency in Hz
    :type T: float
    :param T: sweep period in seconds
    :rtype: Waveform
    """
    _check_positive(f_0=f_0, f_a=f_a, T=T)
    return Waveform(kind=WaveformKind.SWEPT_TONE, amplitude=c, frequency=f_0,
                    target_frequency=f_a, period=T, phase=phase)


def make_sinusoid_current(A, f_I, phase=0.):
    """Coil current A * sin(2 pi f_I t + phase) in ampere"""
    return Waveform(kind=WaveformKind.SINUSOID_CURRENT, amplitude=A,
                    frequency=f_I, phase=phase)


def _check_positive(**kwargs):
    for key, val in kwargs.items():
        if not val > 0:
            raise ParameterDomainError(f"{key} must be > 0, got {val}")
