"""
Test the closed-form attack waveforms
"""
import numpy as np
import pytest

from spoofsim.models.waveforms import (Waveform, WaveformKind, eval_waveform,
                                       make_constant_tone, make_decaying_tone,
                                       make_sinusoid_current, make_swept_tone)
from spoofsim.tools.exceptions import ParameterDomainError


def test_decaying_tone_envelope():
    """
    Decaying tone starts at zero, its envelope falls linearly to 0 at T and
    stays there
    """
    w = make_decaying_tone(c=2., T=1., f_b=5.)

    assert(eval_waveform(w, 0.) == 0.)
    assert(w.envelope(1.) == pytest.approx(0., abs=1E-15))
    assert(w.envelope(0.5) == pytest.approx(1.))
    assert(eval_waveform(w, 1.5) == 0.)

    t = np.linspace(0, 1, 101)
    expected = (-2. / 1. * t + 2.) * np.sin(2 * np.pi * 5. * t)
    assert(np.allclose(w.evaluate(t), expected, rtol=0, atol=1E-12))


def test_decaying_tone_retriggers():
    """A decaying tone with several cycles restarts its envelope every T"""
    w = make_decaying_tone(c=1., T=1., f_b=5., cycles=3)

    assert(w.envelope(0.25) == pytest.approx(0.75))
    assert(w.envelope(1.25) == pytest.approx(0.75))
    assert(w.envelope(2.5) == pytest.approx(0.5))
    assert(w.envelope(3.5) == 0.)


def test_swept_tone_instantaneous_frequency():
    """
    Swept tone starts at the midpoint of its band, peaks at f_a after a
    quarter period and reaches f_0 at three quarters
    """
    f_0, f_a, T = 27850., 27910., 2.
    w = make_swept_tone(c=1., f_0=f_0, f_a=f_a, T=T)

    assert(w.instantaneous_frequency(0.) == pytest.approx((f_0 + f_a) / 2))
    assert(w.instantaneous_frequency(T / 4) == pytest.approx(f_a))
    assert(w.instantaneous_frequency(3 * T / 4) == pytest.approx(f_0))


def test_swept_tone_stays_in_bounds():
    """Instantaneous frequency of a sweep never leaves [f_0, f_a]"""
    rng = np.random.Generator(np.random.Philox(0))
    w = make_swept_tone(c=1., f_0=27910., f_a=27850., T=0.7)
    f = w.instantaneous_frequency(rng.uniform(0, 100, 10000))

    assert(f.min() >= 27850. - 1E-9)
    assert(f.max() <= 27910. + 1E-9)


def test_swept_tone_phase_is_integral_of_frequency():
    """The closed form phase integral differentiates to f(t)"""
    w = make_swept_tone(c=1., f_0=10., f_a=30., T=1.)
    t = np.linspace(0.1, 3., 50)
    h = 1E-6
    derivative = (w.phase_integral(t + h) - w.phase_integral(t - h)) / (2 * h)

    assert(np.allclose(derivative, w.instantaneous_frequency(t), rtol=1E-6))
    assert(w.phase_integral(0.) == 0.)


def test_eval_waveform_examples():
    """Quarter period and peak values of the constant and current kinds"""
    tone = make_constant_tone(c=1., f=10.)
    current = make_sinusoid_current(A=2., f_I=0.5)

    assert(eval_waveform(tone, 0.025) == pytest.approx(1.))
    assert(eval_waveform(current, 0.5) == pytest.approx(2.))
    assert(isinstance(eval_waveform(tone, 0.1), float))


def test_evaluation_is_pure_and_linear():
    """
    Repeated evaluation gives identical values and the signal scales with
    the amplitude for every tone kind
    """
    t = np.linspace(0, 3, 997)
    for w in [make_constant_tone(0.7, 27880.),
              make_decaying_tone(0.7, 1., 27880., cycles=3),
              make_swept_tone(0.7, 27850., 27910., 1.)]:
        assert(np.array_equal(w.evaluate(t), w.evaluate(t)))
        assert(np.allclose(w.scaled(3.).evaluate(t), 3. * w.evaluate(t),
                           rtol=1E-12, atol=1E-12))


def test_waveform_parameter_domain():
    """Non-positive parameters and negative times are rejected"""
    with pytest.raises(ParameterDomainError):
        make_decaying_tone(c=0., T=1., f_b=5.)
    with pytest.raises(ParameterDomainError):
        make_decaying_tone(c=1., T=-1., f_b=5.)
    with pytest.raises(ParameterDomainError):
        make_swept_tone(c=1., f_0=0., f_a=5., T=1.)
    with pytest.raises(ParameterDomainError):
        Waveform(kind="constant_tone", amplitude=-1., frequency=5.)
    with pytest.raises(ParameterDomainError):
        Waveform(kind=WaveformKind.SWEPT_TONE, amplitude=1., frequency=5.,
                 period=1.)
    with pytest.raises(ParameterDomainError):
        make_constant_tone(1., 5.).evaluate(-0.1)
    with pytest.raises(ValueError):
        Waveform(kind="square_wave", amplitude=1., frequency=5.)
