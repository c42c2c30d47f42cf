#!/usr/bin/env python3
"""
Countermeasures against sensor signal injection.

Injected signals are typically sinusoidal, so a narrowband peak standing out
of a sensor's spectrum is evidence of an attack. Legitimate head motion also
correlates with the optical flow seen by the tracking cameras, so a window in
which the IMU rate stops correlating with the flow is a second piece of
evidence. Finally, vibration feedback that grows with vertical velocity makes
an otherwise imperceptible drift noticeable to the user.
"""
import json
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.stats import pearsonr

from spoofsim import logger
from spoofsim.tools.exceptions import AlignmentError, ParameterDomainError, \
    SeriesLengthError
from spoofsim.tools.series import Channel
from spoofsim.tools.signal import sliding_windows, window_spectrum

# Floor of the median bin power, keeps the SNR finite for near silent windows
TINY_POWER = 1E-300


class AlarmKind(str, Enum):
    NARROWBAND_PEAK = "NarrowbandPeak"
    CORRELATION_BREAK = "CorrelationBreak"


@dataclass(frozen=True)
class DetectorConfig:
    """
    Spectral and correlation detector parameters

    :type window: int
    :param window: samples per detection window, >= 16
    :type segment: int
    :param segment: samples per Welch segment inside a window, None for a
        single periodogram of the whole window
    :type snr_threshold_db: float
    :param snr_threshold_db: peak over median bin power that raises an alarm
    :type corr_threshold: float
    :param corr_threshold: Pearson correlation below which a window alarms
    :type exclusion_band: tuple of float
    :param exclusion_band: (lo, hi) Hz around DC reserved for legitimate
        motion, ignored by the spectral detector
    :type overlap: float
    :param overlap: fraction of a window shared with its neighbour
    :type max_lag: int
    :param max_lag: largest lag in samples searched by the correlation check
    :type prewhiten: bool
    :param prewhiten: first-difference each window before the spectrum so
        that red, random-walk like motion does not dominate the median
    """
    window: int = 256
    segment: int = 64
    snr_threshold_db: float = 10.
    corr_threshold: float = 0.5
    exclusion_band: tuple = (0., 2.)
    overlap: float = 0.5
    max_lag: int = 0
    prewhiten: bool = True

    def __post_init__(self):
        if int(self.window) < 16:
            raise ParameterDomainError(f"window must be >= 16 samples, got "
                                       f"{self.window}")
        if self.segment is not None and \
                not 4 <= int(self.segment) <= int(self.window):
            raise ParameterDomainError(f"segment must lie in [4, window], "
                                       f"got {self.segment}")
        if not (np.isfinite(self.snr_threshold_db) and
                np.isfinite(self.corr_threshold)):
            raise ParameterDomainError("detector thresholds must be finite")
        if not -1 <= self.corr_threshold <= 1:
            raise ParameterDomainError("corr_threshold must lie in [-1, 1]")
        lo, hi = self.exclusion_band
        if not 0 <= lo <= hi:
            raise ParameterDomainError(f"exclusion band must satisfy "
                                       f"0 <= lo <= hi, got {lo}, {hi}")
        object.__setattr__(self, "exclusion_band", (float(lo), float(hi)))
        if not 0 <= self.overlap < 1:
            raise ParameterDomainError("overlap must lie in [0, 1)")
        if int(self.max_lag) < 0:
            raise ParameterDomainError("max_lag must be >= 0")


@dataclass(frozen=True)
class Alarm:
    """
    :type t: float
    :param t: time of the alarmed window center in seconds
    :type kind: AlarmKind
    :param kind: which detector raised the alarm
    :type score: float
    :param score: SNR in dB (NarrowbandPeak) or correlation shortfall below
        the threshold (CorrelationBreak), >= 0
    """
    t: float
    kind: AlarmKind
    score: float

    def __post_init__(self):
        object.__setattr__(self, "kind", AlarmKind(self.kind))
        if not self.score >= 0:
            raise ParameterDomainError(f"alarm score must be >= 0, got "
                                       f"{self.score}")

    def to_dict(self):
        return {"t": float(self.t), "kind": self.kind.value,
                "score": float(self.score)}


def _window_center(s, start, window):
    return float(s.t0 + (start + window / 2.) * s.dt)


def spectral_detect(s, cfg=None):
    """
    Sliding-window narrowband peak detector. Each window's Welch spectrum is
    searched outside of the exclusion band; if the largest bin exceeds the
    median bin by `snr_threshold_db`, a NarrowbandPeak alarm is raised at the
    window center. Constant offsets are removed before the spectrum

    :type s: spoofsim.tools.series.SampleSeries
    :param s: sensor series to inspect
    :type cfg: DetectorConfig
    :param cfg: detector parameters
    :rtype: list of Alarm
    """
    cfg = cfg or DetectorConfig()
    window = int(cfg.window)
    if len(s) < window:
        raise SeriesLengthError(f"series of {len(s)} samples is shorter than "
                                f"the {window} sample detection window")
    lo, hi = cfg.exclusion_band

    alarms = []
    for start in sliding_windows(len(s), window, cfg.overlap):
        values = s.values[start:start + window]
        if cfg.prewhiten:
            values = np.diff(values)
        segment = min(int(cfg.segment or values.size), values.size)
        freqs, psd = window_spectrum(values, s.dt, segment=segment)
        keep = (freqs < lo) | (freqs > hi)
        if not np.any(keep):
            continue
        power = psd[keep]
        peak = power.max()
        if not peak > 0:
            continue
        snr_db = 10 * np.log10(peak / max(np.median(power), TINY_POWER))
        if snr_db >= cfg.snr_threshold_db:
            alarm = Alarm(t=_window_center(s, start, window),
                          kind=AlarmKind.NARROWBAND_PEAK,
                          score=max(float(snr_db), 0.))
            f_peak = freqs[keep][power.argmax()]
            logger.debug(f"narrowband peak at {f_peak:.2f} Hz, "
                         f"{snr_db:.1f} dB, t={alarm.t:.2f}s")
            alarms.append(alarm)
    return alarms


def _max_lagged_correlation(a, b, max_lag):
    """
    Largest Pearson correlation between `a` and `b` shifted by up to
    `max_lag` samples. None if every lag has a constant input
    """
    best = None
    for lag in range(-max_lag, max_lag + 1):
        if lag >= 0:
            x, y = a[lag:], b[:b.size - lag]
        else:
            x, y = a[:lag], b[-lag:]
        if x.size < 2 or np.ptp(x) == 0 or np.ptp(y) == 0:
            continue
        r = float(pearsonr(x, y).statistic)
        best = r if best is None else max(best, r)
    return best


def correlation_check(imu_rate, flow_rate, cfg=None):
    """
    Per-window Pearson correlation between the IMU angular rate and the
    optical flow rate observed by the cameras. A window whose correlation
    falls below `corr_threshold` raises a CorrelationBreak alarm. Windows in
    which either stream is constant are skipped

    :type imu_rate: spoofsim.tools.series.SampleSeries
    :param imu_rate: gyroscope rate
    :type flow_rate: spoofsim.tools.series.SampleSeries
    :param flow_rate: optical flow rate on the same time axis
    :type cfg: DetectorConfig
    :param cfg: detector parameters
    :rtype: list of Alarm
    """
    cfg = cfg or DetectorConfig()
    if len(imu_rate) != len(flow_rate) or \
            not np.isclose(imu_rate.dt, flow_rate.dt) or \
            not np.isclose(imu_rate.t0, flow_rate.t0):
        raise AlignmentError("IMU and flow series must share their time axis")
    window = int(cfg.window)
    if len(imu_rate) < window:
        raise SeriesLengthError(f"series of {len(imu_rate)} samples is shorter"
                                f" than the {window} sample detection window")

    alarms, skipped = [], 0
    for start in sliding_windows(len(imu_rate), window, cfg.overlap):
        a = imu_rate.values[start:start + window]
        b = flow_rate.values[start:start + window]
        r = _max_lagged_correlation(a, b, int(cfg.max_lag))
        if r is None:
            skipped += 1
            continue
        if r < cfg.corr_threshold:
            alarms.append(Alarm(t=_window_center(imu_rate, start, window),
                                kind=AlarmKind.CORRELATION_BREAK,
                                score=cfg.corr_threshold - r))
    if skipped:
        logger.warning(f"correlation check skipped {skipped} zero-variance "
                       f"window(s)")
    return alarms


def vibration_feedback(v_z, V_max):
    """
    Vibration amplitude that grows with vertical speed,
    V = (1 - exp(-|v_z|)) V_max

    :type v_z: float or np.array
    :param v_z: z-axis velocity in m/s
    :type V_max: float
    :param V_max: largest vibration amplitude, >= 0
    :rtype: float or np.array
    """
    if not V_max >= 0:
        raise ParameterDomainError(f"V_max must be >= 0, got {V_max}")
    V = -np.expm1(-np.abs(np.asarray(v_z, dtype=float))) * V_max
    return float(V) if np.ndim(V) == 0 else V


def vibration_series(v_z, V_max):
    """
    Vibration feedback for every sample of a vertical velocity series

    :type v_z: spoofsim.tools.series.SampleSeries
    :param v_z: estimated z-axis velocity
    :type V_max: float
    :param V_max: largest vibration amplitude
    :rtype: spoofsim.tools.series.SampleSeries
    """
    return v_z.with_values(vibration_feedback(v_z.values, V_max),
                           channel=Channel.VIBRATION)


def write_alarms(alarms, fid):
    """
    Write alarms as JSON lines, `{"t": ..., "kind": ..., "score": ...}`

    :type alarms: list of Alarm
    :param alarms: alarms to write, in order
    :type fid: str
    :param fid: output file
    """
    with open(fid, "w") as f:
        for alarm in alarms:
            f.write(json.dumps(alarm.to_dict()) + "\n")


def read_alarms(fid):
    """Read alarms written by `write_alarms`"""
    with open(fid, "r") as f:
        return [Alarm(**json.loads(line)) for line in f if line.strip()]
