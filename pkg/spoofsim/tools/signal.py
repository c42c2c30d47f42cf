"""
Signal processing functions used to inspect sampled series: spectral peaks,
sliding windows and windowed power spectra. Used by the sensing checks and
the defense detectors
"""
import numpy as np
from scipy.signal import welch

from spoofsim import logger


def dominant_frequency(values, dt):
    """
    Frequency of the largest non-DC bin in the discrete spectrum of a series.
    The mean is removed first so a constant offset never wins

    :type values: np.array
    :param values: uniformly sampled data
    :type dt: float
    :param dt: sample interval in seconds
    :rtype: float
    :return: frequency of the spectral peak in Hz, 0 for a constant series
    """
    values = np.asarray(values, dtype=float)
    power = np.abs(np.fft.rfft(values - values.mean())) ** 2
    freqs = np.fft.rfftfreq(values.size, d=dt)
    if power.size < 2 or not np.any(power[1:] > 0):
        return 0.
    return float(freqs[1 + np.argmax(power[1:])])


def frequency_resolution(npts, dt):
    """Bin spacing of a discrete spectrum of `npts` samples"""
    return 1. / (npts * dt)


def sliding_windows(npts, window, overlap=0.5):
    """
    Start indices of fixed length windows sliding over a series

    :type npts: int
    :param npts: number of samples in the series
    :type window: int
    :param window: number of samples per window
    :type overlap: float
    :param overlap: fraction of a window shared by neighbours, [0, 1)
    :rtype: list of int
    :return: start index of each complete window
    """
    hop = max(1, int(round(window * (1. - overlap))))
    return list(range(0, npts - window + 1, hop))


def window_spectrum(values, dt, segment=None, taper="hann"):
    """
    Welch-averaged power spectral density of one detection window. Segments
    are tapered, overlap by 50% and have their mean removed, which makes the
    estimate insensitive to constant offsets

    :type values: np.array
    :param values: samples of a single window
    :type dt: float
    :param dt: sample interval in seconds
    :type segment: int
    :param segment: samples per averaged segment, defaults to the full window
    :type taper: str
    :param taper: window function name understood by scipy.signal.get_window
    :rtype: (np.array, np.array)
    :return: (frequencies in Hz, power spectral density)
    """
    values = np.asarray(values, dtype=float)
    nperseg = min(segment or values.size, values.size)
    freqs, psd = welch(values, fs=1. / dt, window=taper, nperseg=nperseg,
                       noverlap=nperseg // 2, detrend="constant",
                       scaling="density")
    logger.debug(f"window spectrum: {values.size} samples, {nperseg} per "
                 f"segment, {freqs.size} bins")
    return freqs, psd
