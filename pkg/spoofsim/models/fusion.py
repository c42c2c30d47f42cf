#!/usr/bin/env python3
"""
Dual-rate error-state Kalman fusion of a controller orientation angle, and
the attack frequency selector that slips an injected oscillation past the
camera correction.

The filter predicts the nominal angle from the gyroscope at the IMU rate and
corrects it from the IR camera at the camera rate,

    dx = K (Y - h(x_nom)),    x = x_nom + dx

If the aliased oscillation on the gyroscope is a multiple of the camera rate
and phase aligned to the update instants, the integrated angle returns to
its unbiased value at every update, residuals vanish, and innovation
adaptive trust drives the gain down while the mean angle stays biased.
"""
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from spoofsim import logger
from spoofsim.tools.exceptions import ParameterDomainError, \
    PhaseAlignmentError, NumericDomainError
from spoofsim.tools.series import CSV_FMT

# Relative tolerance when testing whether a frequency is a camera harmonic
HARMONIC_TOL = 1E-9


@dataclass(frozen=True)
class FusionConfig:
    """
    Fusion filter settings

    :type imu_rate: float
    :param imu_rate: f_imu, gyroscope rate in Hz
    :type camera_rate: float
    :param camera_rate: f_cam, IR camera update rate in Hz
    :type measurement_variance: float
    :param measurement_variance: R, camera angle noise variance in rad^2
    :type process_variance: float
    :param process_variance: initial process noise density q in rad^2/s
    :type adapt_window: int
    :param adapt_window: number of innovations used by covariance matching
    :type camera_noise: float
    :param camera_noise: standard deviation of the simulated camera angle
        noise in rad
    :type camera_offset: float
    :param camera_offset: time of the first camera instant, t_k = offset +
        k / f_cam
    :type initial_variance: float
    :param initial_variance: posterior variance at t=0; None selects the
        steady state of the initial process variance
    """
    imu_rate: float = 500.
    camera_rate: float = 30.
    measurement_variance: float = 1E-6
    process_variance: float = 1E-4
    adapt_window: int = 30
    camera_noise: float = 1E-3
    camera_offset: float = 0.
    initial_variance: float = None

    def __post_init__(self):
        if not self.imu_rate > self.camera_rate > 0:
            raise ParameterDomainError(
                f"need imu_rate > camera_rate > 0, got {self.imu_rate}, "
                f"{self.camera_rate}"
            )
        if not (self.measurement_variance > 0 and self.process_variance > 0):
            raise ParameterDomainError("variances must be > 0")
        if int(self.adapt_window) < 1:
            raise ParameterDomainError("adapt_window must be >= 1")
        if self.camera_noise < 0:
            raise ParameterDomainError("camera_noise must be >= 0")

    @property
    def camera_interval(self):
        return 1. / self.camera_rate

    def camera_time(self, k):
        return self.camera_offset + k / self.camera_rate

    def steady_state_variance(self, q=None):
        """
        Posterior variance at the fixed point of the scalar Riccati
        recursion for process density `q` and measurement variance R
        """
        Q = (q or self.process_variance) * self.camera_interval
        R = self.measurement_variance
        prior = (Q + np.sqrt(Q ** 2 + 4 * Q * R)) / 2.
        return prior * R / (prior + R)


@dataclass
class EskfState:
    """
    Mutable state of the scalar filter, owned by a single ScalarEskf

    :type nominal: float
    :param nominal: nominal orientation angle x_nom in rad
    :type error: float
    :param error: last error state correction dx in rad
    :type variance: float
    :param variance: error state variance P in rad^2
    :type gain: float
    :param gain: last Kalman gain K
    """
    nominal: float = 0.
    error: float = 0.
    variance: float = 1E-6
    gain: float = 0.

    def check(self):
        assert(self.variance > 0), "ESKF variance must stay positive"
        assert(0 <= self.gain <= 1), "scalar Kalman gain must lie in [0, 1]"


@dataclass
class GainTrace:
    """
    Per-update history of Kalman gain and innovation

    :type times: list of float
    :param times: strictly increasing camera update times
    :type gains: list of float
    :param gains: Kalman gain used at each update
    :type residuals: list of float
    :param residuals: innovation Y - h(x_nom) at each update
    """
    times: list = field(default_factory=list)
    gains: list = field(default_factory=list)
    residuals: list = field(default_factory=list)

    def append(self, t, gain, residual):
        if self.times and t <= self.times[-1]:
            raise NumericDomainError("gain trace times must strictly increase")
        self.times.append(float(t))
        self.gains.append(float(gain))
        self.residuals.append(float(residual))

    def __len__(self):
        return len(self.times)

    @property
    def mean_abs_residual(self):
        return float(np.mean(np.abs(self.residuals))) if self.residuals \
            else 0.

    def to_csv(self, fid):
        """Write `t,K,residual` rows, one per camera update"""
        data = np.column_stack([self.times, self.gains, self.residuals]) \
            if self.times else np.empty((0, 3))
        np.savetxt(fid, data, fmt=CSV_FMT, delimiter=",",
                   header="t,K,residual", comments="")


class ScalarEskf:
    """
    Scalar error-state Kalman filter with innovation based trust adaptation.

    Trust in the camera is adapted by covariance matching over the last
    `adapt_window` innovations: the process density implied by the window,
    q = K^2 mean(r^2) f_cam, replaces the current one whenever it is
    smaller. Persistently small residuals therefore shrink P and with it K,
    while large residuals keep the filter at its initial trust. Because the
    process density never increases and P starts at (or above) the steady
    state, the gain sequence is non-increasing.
    """
    def __init__(self, cfg):
        """
        :type cfg: FusionConfig
        :param cfg: filter settings
        """
        self.cfg = cfg
        self.q = cfg.process_variance
        P0 = cfg.initial_variance or cfg.steady_state_variance()
        self.state = EskfState(variance=P0)
        self.trace = GainTrace()
        self._innovations = deque(maxlen=int(cfg.adapt_window))

    def integrate(self, d_theta, dt):
        """
        Advance the nominal angle by a gyroscope angle increment

        :type d_theta: float
        :param d_theta: angle increment in rad, the rate integrated over `dt`
        :type dt: float
        :param dt: integration interval in seconds
        """
        self.state.nominal += d_theta
        self.state.variance += self.q * dt

    def correct(self, t, y):
        """
        Fuse one camera angle measurement

        :type t: float
        :param t: time of the camera update
        :type y: float
        :param y: measured angle in rad
        :rtype: float
        :return: the innovation Y - h(x_nom)
        """
        P, R = self.state.variance, self.cfg.measurement_variance
        K = P / (P + R)
        residual = y - self.state.nominal
        self.state.error = K * residual
        self.state.nominal += self.state.error
        self.state.variance = (1. - K) * P
        self.state.gain = K
        self.state.check()

        self.trace.append(t, K, residual)
        self._adapt(residual, K)
        return residual

    def _adapt(self, residual, K):
        """Covariance matching on the innovation window"""
        self._innovations.append(residual)
        if len(self._innovations) < self._innovations.maxlen:
            return
        C = float(np.mean(np.square(self._innovations)))
        q_hat = K ** 2 * C * self.cfg.camera_rate
        if q_hat < self.q:
            logger.debug(f"trust adaptation: q {self.q:.3e} -> {q_hat:.3e}")
            self.q = q_hat


def select_bypass_frequencies(band_lo, band_hi, cfg, n_max=16):
    """
    Enumerate every attack frequency f_a = m f_imu + n f_cam inside a band,
    with m >= 1 and 1 <= n <= n_max. Such tones alias onto a harmonic of the
    camera rate

    :type band_lo: float
    :param band_lo: lower band edge in Hz
    :type band_hi: float
    :param band_hi: upper band edge in Hz
    :type cfg: FusionConfig
    :param cfg: provides f_imu and f_cam
    :type n_max: int
    :param n_max: highest camera harmonic considered
    :rtype: list of (float, int, int)
    :return: (f_a, m, n) sorted by frequency, then m
    """
    if band_lo > band_hi:
        return []
    f_imu, f_cam = cfg.imu_rate, cfg.camera_rate
    m_lo = max(1, int(np.floor((band_lo - n_max * f_cam) / f_imu)))
    m_hi = int(np.floor((band_hi - f_cam) / f_imu))

    found = []
    for m in range(m_lo, m_hi + 1):
        for n in range(1, n_max + 1):
            f_a = m * f_imu + n * f_cam
            if band_lo <= f_a <= band_hi:
                found.append((f_a, m, n))
    return sorted(found, key=lambda _: (_[0], _[1]))


def below_nyquist(f_obs, cfg):
    """
    Whether the IMU can carry an oscillation at `f_obs` at all. Above half the
    IMU rate the samples are those of the folded frequency f_imu - f_obs,
    which is no camera harmonic unless f_imu is one
    """
    return 0 <= f_obs < cfg.imu_rate / 2.


def phase_align(f_obs, cfg):
    """
    Phase that zeroes sin(2 pi f_obs t_k + phase) at every camera instant
    t_k = camera_offset + k / f_cam

    :type f_obs: float
    :param f_obs: observed (aliased) attack frequency in Hz
    :type cfg: FusionConfig
    :param cfg: provides f_cam and the camera time offset
    :rtype: float
    :return: phase in [0, 2 pi)
    """
    ratio = f_obs / cfg.camera_rate
    if abs(ratio - round(ratio)) > HARMONIC_TOL * max(1., abs(ratio)):
        raise PhaseAlignmentError(
            f"{f_obs} Hz is not a multiple of the {cfg.camera_rate} Hz "
            f"camera rate and cannot be aligned to its updates"
        )
    return float(np.mod(-2 * np.pi * f_obs * cfg.camera_offset, 2 * np.pi))


def eskf_run(attack_observed_freq, attack_amp, phase, duration, cfg, seed=0):
    """
    Run the fusion filter on a stationary controller whose gyroscope carries
    an injected oscillation attack_amp * sin(2 pi f t + phase), corrected by
    noisy camera measurements of the true (zero) angle.

    The gyroscope reports angle increments, the oscillation integrated over
    each IMU interval. A camera instant inside an interval splits it, so the
    angle the filter holds at an update is the integrated oscillation at
    exactly that time. `f` must lie below half the IMU rate, where the IMU
    samples carry it unfolded

    :type attack_observed_freq: float
    :param attack_observed_freq: oscillation frequency seen by the IMU, Hz
    :type attack_amp: float
    :param attack_amp: oscillation amplitude in rad/s
    :type phase: float
    :param phase: oscillation phase in rad
    :type duration: float
    :param duration: simulated time in seconds
    :type cfg: FusionConfig
    :param cfg: filter settings
    :type seed: int
    :param seed: seed of the camera noise generator
    :rtype: (float, GainTrace)
    :return: (final bias, gain trace). The final bias is the mean fused
        angle error over the last `adapt_window` camera intervals
    """
    if not duration > 0:
        raise ParameterDomainError(f"duration must be > 0, got {duration}")
    if not below_nyquist(attack_observed_freq, cfg):
        raise ParameterDomainError(
            f"observed frequency {attack_observed_freq} Hz must lie in "
            f"[0, {cfg.imu_rate / 2.}) Hz for a {cfg.imu_rate} Hz IMU"
        )
    rng = np.random.Generator(np.random.Philox(seed))
    eskf = ScalarEskf(cfg)

    dt = 1. / cfg.imu_rate
    npts = int(round(duration * cfg.imu_rate))
    t_imu = np.arange(npts) * dt
    w = 2 * np.pi * attack_observed_freq

    def angle(t):
        """Injected oscillation integrated from 0 to t"""
        if w == 0:
            return attack_amp * np.sin(phase) * t
        return attack_amp / w * (np.cos(phase) - np.cos(w * t + phase))

    fused = np.empty(npts)
    k = 1 if cfg.camera_offset <= 0 else 0
    t_cam = cfg.camera_time(k)
    for i in range(npts):
        t_now, t_next = t_imu[i], (i + 1) * dt
        while t_cam <= t_next + 1E-12:
            eskf.integrate(angle(t_cam) - angle(t_now), t_cam - t_now)
            y = cfg.camera_noise * rng.standard_normal()
            eskf.correct(t_cam, y)
            t_now = t_cam
            k += 1
            t_cam = cfg.camera_time(k)
        eskf.integrate(angle(t_next) - angle(t_now), t_next - t_now)
        fused[i] = eskf.state.nominal

    nwin = min(npts, int(round(cfg.adapt_window * cfg.imu_rate /
                               cfg.camera_rate)))
    bias = float(np.mean(fused[-nwin:]))
    logger.debug(f"eskf f={attack_observed_freq} Hz amp={attack_amp}: "
                 f"bias={bias:.4e}, last K={eskf.state.gain:.4f}, "
                 f"{len(eskf.trace)} updates")
    return bias, eskf.trace
