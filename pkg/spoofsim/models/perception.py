#!/usr/bin/env python3
"""
Human-effect models of the three attack pathways.

Redirected walking: a user who sees their virtual speed reduced by a gain k
unconsciously walks faster, overshooting a virtual boundary D by D (1/k - 1).
Hand offset: a biased controller orientation moves the avatar wrist, which
is mapped to shoulder and elbow angles of a planar two-link arm. Dizziness:
per-frame display flow and disparity triples, summarized by a weighted
dispersion score.
"""
from dataclasses import dataclass

import numpy as np

from spoofsim import logger
from spoofsim.tools.exceptions import ParameterDomainError, ReachError, \
    ShapeError
from spoofsim.tools.math import rotate_2d
from spoofsim.tools.series import CSV_FMT

# Relative slack when comparing a speed ratio against its JND
JND_RTOL = 1E-9
# Mean overshoot walked by volunteers beyond a 2.25 m boundary, reported next
# to the geometric prediction with an informational band
EMPIRICAL_OVERSHOOT = 0.597
EMPIRICAL_OVERSHOOT_BAND = 0.15


@dataclass(frozen=True)
class ThresholdSet:
    """
    Population level just-noticeable differences

    :type speed_ratio_jnd: float
    :param speed_ratio_jnd: smallest noticeable v_a / v_t
    :type hand_offset_jnd: float
    :param hand_offset_jnd: smallest noticeable hand displacement in m
    :type walking_speed: float
    :param walking_speed: normal human walking speed v_t in m/s
    """
    speed_ratio_jnd: float = 0.2
    hand_offset_jnd: float = 0.09
    walking_speed: float = 1.35

    def __post_init__(self):
        for key, val in vars(self).items():
            if not val > 0:
                raise ParameterDomainError(f"{key} must be > 0, got {val}")


@dataclass(frozen=True)
class WalkScenario:
    """
    :type virtual_distance: float
    :param virtual_distance: distance to the virtual boundary in m
    :type gain: float
    :param gain: ratio of displayed to real speed k, in (0, 1]
    :type boundary_offset: float
    :param boundary_offset: shift of the safety boundary in m
    """
    virtual_distance: float
    gain: float = 1.
    boundary_offset: float = 0.

    def __post_init__(self):
        if not 0 < self.gain <= 1:
            raise ParameterDomainError(f"gain must lie in (0, 1], got "
                                       f"{self.gain}")
        if self.virtual_distance < 0 or self.boundary_offset < 0:
            raise ParameterDomainError("distances must be >= 0")


@dataclass(frozen=True)
class ArmPose:
    """
    Planar two-link arm configuration

    :type shoulder: float
    :param shoulder: shoulder angle from the x axis in rad
    :type elbow: float
    :param elbow: elbow angle relative to the upper arm in rad
    :type l1: float
    :param l1: upper arm length in m
    :type l2: float
    :param l2: forearm length in m
    :type wrist: tuple of float
    :param wrist: wrist position relative to the shoulder in m
    """
    shoulder: float
    elbow: float
    l1: float
    l2: float
    wrist: tuple


@dataclass(frozen=True, eq=False)
class DizzinessCloud:
    """
    Per-frame (horizontal flow, vertical flow, disparity) triples in
    pixels/frame, pixels/frame and pixels
    """
    h_flow: np.ndarray
    v_flow: np.ndarray
    disparity: np.ndarray

    def __post_init__(self):
        arrays = [np.array(getattr(self, _), dtype=float).ravel()
                  for _ in ["h_flow", "v_flow", "disparity"]]
        if len({_.size for _ in arrays}) != 1:
            raise ShapeError("dizziness triples must have equal lengths")
        if not all(np.all(np.isfinite(_)) for _ in arrays):
            raise ParameterDomainError("dizziness triples must be finite")
        for name, arr in zip(["h_flow", "v_flow", "disparity"], arrays):
            object.__setattr__(self, name, arr)

    def __len__(self):
        return self.h_flow.size

    def scaled(self, factor):
        return DizzinessCloud(self.h_flow * factor, self.v_flow * factor,
                              self.disparity * factor)

    def to_csv(self, fid):
        """Write `frame,h_flow,v_flow,disparity` rows"""
        data = np.column_stack([np.arange(len(self)), self.h_flow,
                                self.v_flow, self.disparity])
        np.savetxt(fid, data, fmt=CSV_FMT, delimiter=",",
                   header="frame,h_flow,v_flow,disparity", comments="")

    @classmethod
    def from_csv(cls, fid):
        """Read externally precomputed `frame,h_flow,v_flow,disparity` rows"""
        data = np.loadtxt(fid, delimiter=",", skiprows=1, ndmin=2)
        order = np.argsort(data[:, 0], kind="stable")
        data = data[order]
        return cls(h_flow=data[:, 1], v_flow=data[:, 2], disparity=data[:, 3])


def real_walk_distance(s):
    """
    Real distance walked to cover a virtual distance under gain k

    :type s: WalkScenario
    :param s: walking scenario
    :rtype: (float, float)
    :return: (real distance, overshoot beyond the virtual boundary) in m
    """
    if not s.gain > 0:
        raise ParameterDomainError("gain must be > 0")
    real = s.virtual_distance / s.gain
    return real, s.virtual_distance * (1. / s.gain - 1.)


def is_speed_attack_detectable(v_a, v_t, th=None):
    """
    Whether a speed manipulation v_a is noticeable at true walking speed v_t.
    The budget v_a = jnd * v_t is the largest manipulation that stays
    unnoticed

    :type v_a: float
    :param v_a: attack induced speed change in m/s
    :type v_t: float
    :param v_t: true walking speed in m/s
    :type th: ThresholdSet
    :param th: perception thresholds
    :rtype: bool
    """
    th = th or ThresholdSet()
    if not v_t > 0:
        raise ParameterDomainError(f"v_t must be > 0, got {v_t}")
    ratio = abs(v_a) / v_t
    return bool(ratio > th.speed_ratio_jnd * (1. + JND_RTOL))


def is_hand_offset_detectable(d, th=None):
    """
    Whether a hand displacement `d` in meters is noticeable. Inclusive at the
    threshold
    """
    th = th or ThresholdSet()
    if d < 0:
        raise ParameterDomainError(f"hand offset must be >= 0, got {d}")
    return bool(d >= th.hand_offset_jnd)


def arm_ik(wrist_target, l1, l2):
    """
    Inverse kinematics of a planar two-link arm, elbow-down branch (elbow
    angle in [0, pi])

    :type wrist_target: tuple of float
    :param wrist_target: (x, y) wrist position relative to the shoulder, m
    :type l1: float
    :param l1: upper arm length in m
    :type l2: float
    :param l2: forearm length in m
    :rtype: ArmPose
    """
    x, y = (float(_) for _ in wrist_target)
    r2 = x ** 2 + y ** 2
    r = np.sqrt(r2)
    if r > (l1 + l2) * (1 + 1E-12) or r < abs(l1 - l2) * (1 - 1E-12):
        raise ReachError(f"wrist target ({x}, {y}) at {r:.4f} m is outside "
                         f"the arm workspace [{abs(l1 - l2)}, {l1 + l2}]")

    cos_elbow = np.clip((r2 - l1 ** 2 - l2 ** 2) / (2 * l1 * l2), -1., 1.)
    elbow = np.arccos(cos_elbow)
    shoulder = np.arctan2(y, x) - np.arctan2(l2 * np.sin(elbow),
                                             l1 + l2 * np.cos(elbow))
    return ArmPose(shoulder=float(shoulder), elbow=float(elbow), l1=l1, l2=l2,
                   wrist=(x, y))


def forward_kinematics(shoulder, elbow, l1, l2):
    """Wrist position of a planar two-link arm"""
    return np.array([l1 * np.cos(shoulder) + l2 * np.cos(shoulder + elbow),
                     l1 * np.sin(shoulder) + l2 * np.sin(shoulder + elbow)])


def wrist_offset_deltas(wrist, bias, l1, l2):
    """
    Joint angle changes when an orientation bias swings the wrist about the
    shoulder

    :type wrist: tuple of float
    :param wrist: unbiased wrist position relative to the shoulder, m
    :type bias: float
    :param bias: orientation bias in rad
    :type l1: float
    :param l1: upper arm length in m
    :type l2: float
    :param l2: forearm length in m
    :rtype: (float, float, float)
    :return: (wrist displacement in m, shoulder change, elbow change) in rad
    """
    base = arm_ik(wrist, l1, l2)
    moved = rotate_2d(wrist, bias)
    pose = arm_ik(moved, l1, l2)
    offset = float(np.linalg.norm(moved - np.asarray(wrist, dtype=float)))
    return offset, pose.shoulder - base.shoulder, pose.elbow - base.elbow


def dizziness_triples(display_x, display_y, depth):
    """
    Per-frame flow and disparity triples from display position series.
    Flows are first differences of position, disparity is the depth proxy
    of the frame the flow ends on

    :type display_x: spoofsim.tools.series.SampleSeries
    :param display_x: horizontal display position in pixels
    :type display_y: spoofsim.tools.series.SampleSeries
    :param display_y: vertical display position in pixels
    :type depth: spoofsim.tools.series.SampleSeries
    :param depth: disparity proxy in pixels
    :rtype: DizzinessCloud
    """
    if not len(display_x) == len(display_y) == len(depth):
        raise ShapeError(f"display series lengths differ: {len(display_x)}, "
                         f"{len(display_y)}, {len(depth)}")
    if len(display_x) < 2:
        raise ShapeError("need at least two frames to compute flow")
    return DizzinessCloud(h_flow=np.diff(display_x.values),
                          v_flow=np.diff(display_y.values),
                          disparity=depth.values[1:])


def dispersion_score(cloud, weights=(2., 1., 1.), inverse_disparity=False):
    """
    Weighted spread of a dizziness cloud,
    sqrt(w_h var(h) + w_v var(v) + w_d var(d))

    :type cloud: DizzinessCloud
    :param cloud: per-frame triples
    :type weights: tuple of float
    :param weights: (w_h, w_v, w_d), horizontal flow weighted highest
    :type inverse_disparity: bool
    :param inverse_disparity: use var(1/d) so that motion of distant content
        (small disparity) counts more; requires strictly positive disparity
    :rtype: float
    """
    if len(cloud) < 1:
        raise ShapeError("dispersion of an empty cloud is undefined")
    w_h, w_v, w_d = weights
    disparity = cloud.disparity
    if inverse_disparity:
        if np.any(disparity <= 0):
            raise ParameterDomainError("inverse disparity requires d > 0")
        disparity = 1. / disparity
    score = np.sqrt(w_h * np.var(cloud.h_flow) + w_v * np.var(cloud.v_flow) +
                    w_d * np.var(disparity))
    return float(score)


def stationary_profile(n_frames, x0=960., y0=540., disparity=40.):
    """
    Display positions of a user who does not move

    :rtype: (np.array, np.array, np.array)
    :return: (x, y, disparity) per frame in pixels
    """
    return (np.full(n_frames, x0), np.full(n_frames, y0),
            np.full(n_frames, disparity))


def scenery_profile(n_frames, rng, pan_speed=0.5, smoothing=15,
                    disparity=40., disparity_noise=2.):
    """
    Gameplay proxy of a user appreciating scenery: slow, smoothed random
    head pans and mildly varying depth

    :type n_frames: int
    :param n_frames: number of frames
    :type rng: np.random.Generator
    :param rng: seeded generator
    :type pan_speed: float
    :param pan_speed: standard deviation of the pan speed in pixels/frame
    :type smoothing: int
    :param smoothing: moving average length applied to the pan speed
    :rtype: (np.array, np.array, np.array)
    """
    kernel = np.ones(smoothing) / np.sqrt(smoothing)
    vx = np.convolve(rng.standard_normal(n_frames), kernel, mode="same")
    vy = np.convolve(rng.standard_normal(n_frames), kernel, mode="same")
    x = 960. + np.cumsum(pan_speed * vx)
    y = 540. + np.cumsum(0.5 * pan_speed * vy)
    d = disparity + disparity_noise * rng.standard_normal(n_frames)
    return x, y, d


def ipd_jitter_profile(bias_mm, pixels_per_mm=20., x0=960., y0=540.,
                       disparity=40.):
    """
    Display positions when the IPD readout carries a bias: each eye image
    shifts by half the bias and the stereo disparity by the full bias

    :type bias_mm: np.array
    :param bias_mm: IPD bias per frame in mm
    :type pixels_per_mm: float
    :param pixels_per_mm: display pixels per mm of lens displacement
    :rtype: (np.array, np.array, np.array)
    """
    bias_px = pixels_per_mm * np.asarray(bias_mm, dtype=float)
    logger.debug(f"IPD jitter: peak display shift "
                 f"{np.max(np.abs(bias_px)):.2f} px")
    return (x0 + 0.5 * bias_px, np.full(bias_px.size, y0),
            disparity + bias_px)
