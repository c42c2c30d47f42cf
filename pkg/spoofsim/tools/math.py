#!/usr/bin/env python3
"""
Mathematical tools for SpoofSim, mostly rotation algebra shared by the
navigation and perception models
"""
import numpy as np
from scipy.spatial.transform import Rotation

# Below this rotation angle the Rodrigues terms are replaced by their series
SMALL_ANGLE = 1E-8


def skew(w):
    """
    Skew-symmetric (hat) matrix of a 3-vector such that skew(w) @ x = w x x

    :type w: np.array
    :param w: 3-vector
    :rtype: np.array
    :return: 3x3 skew-symmetric matrix
    """
    wx, wy, wz = w
    return np.array([[0., -wz, wy],
                     [wz, 0., -wx],
                     [-wy, wx, 0.]])


def so3_exp(phi):
    """
    Exponential map from a rotation vector to a rotation matrix using
    Rodrigues' closed form. The second order series is used for tiny angles
    where sin(theta)/theta and (1-cos(theta))/theta**2 lose precision

    :type phi: np.array
    :param phi: rotation vector (axis * angle) in radians
    :rtype: np.array
    :return: 3x3 rotation matrix
    """
    phi = np.asarray(phi, dtype=float)
    theta = np.linalg.norm(phi)
    K = skew(phi)
    if theta < SMALL_ANGLE:
        return np.eye(3) + K + 0.5 * K @ K

    a = np.sin(theta) / theta
    b = (1. - np.cos(theta)) / theta ** 2
    return np.eye(3) + a * K + b * K @ K


def polar_projection(R):
    """
    Project a nearly orthonormal matrix onto the closest rotation matrix (the
    orthogonal polar factor), removing accumulated floating point drift

    :type R: np.array
    :param R: 3x3 matrix close to a rotation
    :rtype: np.array
    :return: 3x3 rotation matrix with det(R) = +1
    """
    U, _, Vt = np.linalg.svd(R)
    Q = U @ Vt
    if np.linalg.det(Q) < 0:
        U[:, -1] *= -1
        Q = U @ Vt
    return Q


def orthonormality_error(R):
    """
    Largest deviation of a rotation matrix from R^T R = I and det(R) = 1

    :type R: np.array
    :param R: 3x3 matrix
    :rtype: float
    """
    return max(np.max(np.abs(R.T @ R - np.eye(3))),
               abs(np.linalg.det(R) - 1.))


def heading(R):
    """Yaw angle (rotation about world z) of a rotation matrix in radians"""
    return np.arctan2(R[1, 0], R[0, 0])


def rotation_to_quaternion(R):
    """
    Quaternions of one or many rotation matrices, scalar first

    :type R: np.array
    :param R: 3x3 matrix or stack of N 3x3 matrices
    :rtype: np.array
    :return: (4,) or (N, 4) array ordered (qw, qx, qy, qz)
    """
    quat = Rotation.from_matrix(R).as_quat()
    return np.roll(quat, 1, axis=-1)


def relative_rotvec(R_ref, R):
    """Rotation vector of R_ref^T R, i.e. `R` seen from body frame `R_ref`"""
    return Rotation.from_matrix(R_ref.T @ R).as_rotvec()


def rotate_2d(x, angle):
    """Rotate 2D vector `x` counter-clockwise by `angle` radians"""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]]) @ np.asarray(x, dtype=float)
