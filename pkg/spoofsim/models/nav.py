#!/usr/bin/env python3
"""
IMU dead reckoning with the preintegration core used by visual-inertial
locators, the closed-form orientation bias of a decaying-tone attack, and
trajectory error statistics.

One propagation step updates rotation, velocity and position from a gyro
and accelerometer sample:

    R <- R Exp((w - b_w) dt)
    v <- v + g dt + R (a - b_a) dt
    p <- p + v dt + g dt^2 / 2 + R (a - b_a) dt^2 / 2

where the right hand sides use the state before the step.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from spoofsim import logger
from spoofsim.models.sensing import ImuSpec, constant_rate, sample_imu, \
    zero_rate
from spoofsim.models.waveforms import make_decaying_tone
from spoofsim.tools.exceptions import (AlignmentError, NumericDomainError,
                                       ParameterDomainError, ShapeError)
from spoofsim.tools.math import (so3_exp, polar_projection,
                                 orthonormality_error, rotation_to_quaternion,
                                 heading)
from spoofsim.tools.series import CSV_FMT

# Tolerance of the rotation invariants R^T R = I and det(R) = 1
ORTHONORMAL_TOL = 1E-9
# Steps between polar re-orthonormalizations during dead reckoning
REORTHONORMALIZE_EVERY = 1000
GRAVITY = (0., 0., -9.81)
WALKING_SPEED = 1.35


@dataclass(frozen=True, eq=False)
class NavState:
    """
    Rotation, velocity and position of the body in the world frame

    :type R: np.array
    :param R: 3x3 body-to-world rotation matrix
    :type v: np.array
    :param v: world frame velocity in m/s
    :type p: np.array
    :param p: world frame position in m
    :type t: float
    :param t: time in seconds
    """
    R: np.ndarray = field(default_factory=lambda: np.eye(3))
    v: np.ndarray = field(default_factory=lambda: np.zeros(3))
    p: np.ndarray = field(default_factory=lambda: np.zeros(3))
    t: float = 0.

    def __post_init__(self):
        for name, shape in [("R", (3, 3)), ("v", (3,)), ("p", (3,))]:
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise ShapeError(f"NavState.{name} must have shape {shape}")
            object.__setattr__(self, name, arr)
        if orthonormality_error(self.R) > ORTHONORMAL_TOL:
            raise NumericDomainError("NavState.R is not a rotation matrix")


@dataclass(frozen=True)
class PropagationConfig:
    """
    :type g: tuple of float
    :param g: world frame gravity in m/s^2
    :type dt: float
    :param dt: propagation step in seconds
    """
    g: tuple = GRAVITY
    dt: float = 0.01

    def __post_init__(self):
        if not self.dt > 0:
            raise ParameterDomainError(f"dt must be > 0, got {self.dt}")
        object.__setattr__(self, "g", tuple(float(_) for _ in self.g))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    Time ordered sequence of navigation states stored as stacked arrays

    :type times: np.array
    :param times: (N,) strictly increasing timestamps in seconds
    :type rotations: np.array
    :param rotations: (N, 3, 3) rotation matrices
    :type velocities: np.array
    :param velocities: (N, 3) velocities in m/s
    :type positions: np.array
    :param positions: (N, 3) positions in m
    """
    times: np.ndarray
    rotations: np.ndarray
    velocities: np.ndarray
    positions: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ShapeError("trajectory timestamps must strictly increase")
        npts = len(self.times)
        if not (len(self.rotations) == len(self.velocities) ==
                len(self.positions) == npts):
            raise ShapeError("trajectory arrays must have equal lengths")

    def __len__(self):
        return len(self.times)

    def __getitem__(self, i):
        return NavState(R=self.rotations[i], v=self.velocities[i],
                        p=self.positions[i], t=float(self.times[i]))

    @property
    def headings(self):
        """Yaw angle of every state in radians"""
        return np.array([heading(R) for R in self.rotations])

    def to_csv(self, fid):
        """
        Write `t,px,py,pz,qw,qx,qy,qz` rows, one per state

        :type fid: str
        :param fid: path of the CSV file to write
        """
        quats = rotation_to_quaternion(self.rotations)
        data = np.column_stack([self.times, self.positions, quats])
        np.savetxt(fid, data, fmt=CSV_FMT, delimiter=",",
                   header="t,px,py,pz,qw,qx,qy,qz", comments="")


@dataclass(frozen=True)
class ErrorStats:
    """
    Position error statistics of an estimated trajectory, in meters
    """
    mae: float
    rmse: float

    def __post_init__(self):
        if not self.mae >= 0 or self.rmse < self.mae * (1 - 1E-12):
            raise NumericDomainError(f"inconsistent error statistics: mae="
                                     f"{self.mae}, rmse={self.rmse}")


@dataclass(frozen=True)
class WalkProfile:
    """
    Straight-line walk at constant speed along the initial heading, used as
    ground truth of the drift experiment

    :type speed: float
    :param speed: forward walking speed in m/s
    :type heading: float
    :param heading: walking direction in the world x-y plane, radians
    """
    speed: float = WALKING_SPEED
    heading: float = 0.

    @property
    def velocity(self):
        return self.speed * np.array([np.cos(self.heading),
                                      np.sin(self.heading), 0.])

    def initial_state(self):
        return NavState(R=so3_exp([0., 0., self.heading]), v=self.velocity)


def propagate(s, omega, accel, cfg, spec, reorthonormalize=False):
    """
    Advance a navigation state by one IMU sample

    :type s: NavState
    :param s: state before the step
    :type omega: np.array
    :param omega: gyroscope sample in rad/s
    :type accel: np.array
    :param accel: accelerometer (specific force) sample in m/s^2
    :type cfg: PropagationConfig
    :param cfg: gravity and step size
    :type spec: ImuSpec
    :param spec: provides the gyro and accelerometer biases
    :type reorthonormalize: bool
    :param reorthonormalize: project the new rotation onto SO(3)
    :rtype: NavState
    """
    omega = np.asarray(omega, dtype=float)
    accel = np.asarray(accel, dtype=float)
    if not (np.all(np.isfinite(omega)) and np.all(np.isfinite(accel))):
        raise NumericDomainError(f"non-finite IMU sample at t={s.t}")

    R, v, p = _step(s.R, s.v, s.p, omega - np.array(spec.gyro_bias),
                    accel - np.array(spec.accel_bias), np.array(cfg.g), cfg.dt)
    if reorthonormalize:
        R = polar_projection(R)
    return NavState(R=R, v=v, p=p, t=s.t + cfg.dt)


def _step(R, v, p, omega, accel, g, dt):
    """Bias-corrected single step on raw arrays"""
    acc_world = R @ accel
    R_new = R @ so3_exp(omega * dt)
    v_new = v + g * dt + acc_world * dt
    p_new = p + v * dt + 0.5 * g * dt ** 2 + 0.5 * acc_world * dt ** 2
    return R_new, v_new, p_new


def dead_reckon(gyro, accel, cfg, spec, initial=None):
    """
    Fold `propagate` over three gyroscope and three accelerometer streams.
    The returned trajectory holds the initial state followed by one state
    per sample

    :type gyro: list of spoofsim.tools.series.SampleSeries
    :param gyro: x, y, z gyroscope series
    :type accel: list of spoofsim.tools.series.SampleSeries
    :param accel: x, y, z accelerometer series
    :type cfg: PropagationConfig
    :param cfg: gravity and step size, `dt` must match the series
    :type spec: ImuSpec
    :param spec: sensor biases
    :type initial: NavState
    :param initial: starting state, defaults to identity at rest
    :rtype: Trajectory
    """
    streams = list(gyro) + list(accel)
    if len(streams) != 6:
        raise ShapeError("dead reckoning needs 3 gyro and 3 accel series")
    if len({len(_) for _ in streams}) != 1:
        raise ShapeError(f"IMU series lengths differ: "
                         f"{[len(_) for _ in streams]}")
    for series in streams:
        if not np.isclose(series.dt, cfg.dt, rtol=1E-9, atol=0):
            raise ShapeError(f"{series.channel.value} sample interval "
                             f"{series.dt} does not match dt={cfg.dt}")

    initial = initial or NavState()
    omegas = np.column_stack([_.values for _ in gyro])
    accels = np.column_stack([_.values for _ in accel])
    if not (np.all(np.isfinite(omegas)) and np.all(np.isfinite(accels))):
        raise NumericDomainError("non-finite IMU samples")
    omegas = omegas - np.array(spec.gyro_bias)
    accels = accels - np.array(spec.accel_bias)
    g = np.array(cfg.g)

    npts = len(omegas)
    rotations = np.empty((npts + 1, 3, 3))
    velocities = np.empty((npts + 1, 3))
    positions = np.empty((npts + 1, 3))
    R, v, p = initial.R, initial.v, initial.p
    rotations[0], velocities[0], positions[0] = R, v, p
    for i in range(npts):
        R, v, p = _step(R, v, p, omegas[i], accels[i], g, cfg.dt)
        if (i + 1) % REORTHONORMALIZE_EVERY == 0:
            R = polar_projection(R)
        rotations[i + 1], velocities[i + 1], positions[i + 1] = R, v, p

    times = initial.t + np.arange(npts + 1) * cfg.dt
    logger.debug(f"dead reckoned {npts} samples, final position "
                 f"{np.round(p, 6)}")
    return Trajectory(times=times, rotations=rotations, velocities=velocities,
                      positions=positions)


def theta_T_analytic(c, k, f_o, T):
    """
    Orientation bias accumulated over one decay window of a decaying tone
    observed at frequency f_o, i.e. the integral from 0 to T of
    k (c - c t / T) sin(2 pi f_o t):

        theta_T = kc / (2 pi f_o) - kc sin(2 pi f_o T) / (4 pi^2 f_o^2 T)

    :type c: float
    :param c: tone amplitude
    :type k: float
    :param k: transduction gain
    :type f_o: float
    :param f_o: observed (aliased) frequency in Hz, 0 gives 0
    :type T: float
    :param T: decay period in seconds
    :rtype: float
    :return: orientation bias in radians
    """
    if not T > 0 or f_o < 0:
        raise ParameterDomainError(f"need T > 0 and f_o >= 0, got T={T}, "
                                   f"f_o={f_o}")
    if f_o == 0:
        return 0.
    x = 2 * np.pi * f_o * T
    # kcT (x - sin x) / x^2 cancels catastrophically for small x
    if x < 1E-2:
        return k * c * T * (x / 6. - x ** 3 / 120. + x ** 5 / 5040.)
    w = 2 * np.pi * f_o
    return k * c / w - k * c * np.sin(x) / (w ** 2 * T)


def theta_T_quadrature(c, k, f_o, T):
    """
    Adaptive quadrature of the decay-window integral, the reference that
    `theta_T_analytic` is checked against
    """
    if f_o == 0:
        return 0.
    val, _ = quad(lambda t: k * (c - c * t / T), 0., T, weight="sin",
                  wvar=2 * np.pi * f_o, epsabs=0., epsrel=1E-13, limit=500)
    return val


def trajectory_errors(est, truth):
    """
    Mean absolute and root mean square position error

    :type est: Trajectory
    :param est: estimated trajectory
    :type truth: Trajectory
    :param truth: reference trajectory with the same timestamps
    :rtype: ErrorStats
    """
    if len(est) != len(truth) or \
            not np.allclose(est.times, truth.times, rtol=0, atol=1E-9):
        raise AlignmentError("estimated and true trajectories do not share "
                             "timestamps")
    err = position_errors(est, truth)
    return ErrorStats(mae=float(np.mean(err)),
                      rmse=float(np.sqrt(np.mean(err ** 2))))


def position_errors(est, truth):
    """Per-state Euclidean position error in meters"""
    return np.linalg.norm(est.positions - truth.positions, axis=1)


def walk_streams(walk, spec, duration, injected=zero_rate, axis=0,
                 g=GRAVITY):
    """
    Ideal IMU streams of a constant velocity walk: zero rotation rate and a
    specific force cancelling gravity, with `injected` added on gyro `axis`

    :rtype: (list, list)
    :return: (gyro series x/y/z, accel series x/y/z)
    """
    gyro = [sample_imu(zero_rate, injected if i == axis else zero_rate, spec,
                       duration, axis=i) for i in range(3)]
    R0 = walk.initial_state().R
    specific_force = R0.T @ (-np.array(g))
    accel = [sample_imu(constant_rate(specific_force[i]), zero_rate, spec,
                        duration, axis=i, accel=True) for i in range(3)]
    return gyro, accel


def drift_experiment(omega_o, f_o, duration, walk=None, T=1., axis=0,
                     sample_rate=200.):
    """
    Dead reckon a straight-line walk while the gyroscope carries an observed
    decaying fluctuation omega_o (1 - t'/T) sin(2 pi f_o t), re-triggered
    every T seconds, and compare against the clean walk.

    The injection defaults to the roll axis: an orientation bias there tilts
    the estimated gravity direction and the residual specific force
    integrates into position drift. A yaw bias alone does not move the
    position of a constant velocity walk.

    :type omega_o: float
    :param omega_o: observed fluctuation amplitude in rad/s, >= 0
    :type f_o: float
    :param f_o: observed fluctuation frequency in Hz
    :type duration: float
    :param duration: walk duration in seconds
    :type walk: WalkProfile
    :param walk: ground truth motion, defaults to 1.35 m/s along x
    :type T: float
    :param T: decay period in seconds
    :type axis: int
    :param axis: gyroscope axis carrying the fluctuation
    :type sample_rate: float
    :param sample_rate: IMU rate, must exceed 2 f_o to observe f_o unaliased
    :rtype: ErrorStats
    """
    if omega_o < 0:
        raise ParameterDomainError(f"omega_o must be >= 0, got {omega_o}")
    walk = walk or WalkProfile()
    spec = ImuSpec(sample_rate=sample_rate)
    cfg = PropagationConfig(dt=spec.dt)

    truth = dead_reckon(*walk_streams(walk, spec, duration), cfg, spec,
                        walk.initial_state())
    injected = zero_rate
    if omega_o > 0:
        cycles = int(np.ceil(duration / T))
        tone = make_decaying_tone(omega_o, T, f_o, cycles=cycles)
        injected = tone.evaluate
    est = dead_reckon(*walk_streams(walk, spec, duration, injected, axis),
                      cfg, spec, walk.initial_state())
    stats = trajectory_errors(est, truth)
    logger.info(f"drift experiment w_o={omega_o} f_o={f_o} "
                f"duration={duration}: MAE={stats.mae:.6g} "
                f"RMSE={stats.rmse:.6g}")
    return stats
