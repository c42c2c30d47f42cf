#!/usr/bin/env python3
"""
Closed-loop model of the human and VR system feedback path.

The sensor block F_s, display/perception F_p and actuation F_a of the
headset form the forward path together with the human sensory response H_s;
the human action H_a closes the loop. An attack signal entering the sensors
reaches the human output through

    G(s) = F_s F_p F_a H_s / (1 - F_s F_p F_a H_s H_a),    P(s) = G(s) H_a(s)

Rational functions are held as ascending-power coefficient arrays and
composed exactly, without pole-zero cancellation.
"""
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from spoofsim.tools.exceptions import NumericDomainError, PoleError, \
    SingularLoopError, ParameterDomainError

# Coefficients below this magnitude (relative to the largest) count as zero
COEFF_TOL = 1E-12


def _trim(coeffs):
    """Drop vanishing high power coefficients, keep at least one"""
    coeffs = np.atleast_1d(np.asarray(coeffs, dtype=float))
    scale = np.max(np.abs(coeffs)) if coeffs.size else 0.
    if scale == 0:
        return np.zeros(1)
    return P.polytrim(coeffs, tol=COEFF_TOL * scale)


@dataclass(frozen=True, eq=False)
class RationalTF:
    """
    Rational transfer function num(s) / den(s)

    :type num: np.array
    :param num: numerator coefficients in ascending powers of s
    :type den: np.array
    :param den: denominator coefficients in ascending powers of s
    """
    num: np.ndarray
    den: np.ndarray

    def __post_init__(self):
        num = np.atleast_1d(np.asarray(self.num, dtype=float))
        den = np.atleast_1d(np.asarray(self.den, dtype=float))
        if not (np.all(np.isfinite(num)) and np.all(np.isfinite(den))):
            raise NumericDomainError("transfer function coefficients must be "
                                     "finite")
        if not np.any(den != 0):
            raise SingularLoopError("denominator is identically zero")
        object.__setattr__(self, "num", _trim(num))
        object.__setattr__(self, "den", _trim(den))

    @classmethod
    def from_dict(cls, d):
        """Parse `{"num": [...], "den": [...]}`"""
        try:
            return cls(num=d["num"], den=d["den"])
        except KeyError as e:
            raise ParameterDomainError(f"transfer function is missing {e}")

    def to_dict(self):
        return {"num": self.num.tolist(), "den": self.den.tolist()}

    def normalized(self):
        """Scale so that the highest power denominator coefficient is 1"""
        lead = self.den[-1]
        return RationalTF(self.num / lead, self.den / lead)

    def __mul__(self, other):
        if not isinstance(other, RationalTF):
            other = constant_tf(other)
        return RationalTF(P.polymul(self.num, other.num),
                          P.polymul(self.den, other.den))

    __rmul__ = __mul__

    def __call__(self, s):
        """Evaluate at complex frequency `s`"""
        den = P.polyval(s, self.den)
        if np.any(np.abs(den) <= COEFF_TOL * np.max(np.abs(self.den))):
            raise PoleError(f"transfer function evaluated at a pole, s={s}")
        return P.polyval(s, self.num) / den

    def allclose(self, other, rtol=1E-9, atol=1E-12):
        """Coefficient-wise equality after normalization"""
        a, b = self.normalized(), other.normalized()
        if a.num.size != b.num.size or a.den.size != b.den.size:
            return False
        return bool(np.allclose(a.num, b.num, rtol=rtol, atol=atol) and
                    np.allclose(a.den, b.den, rtol=rtol, atol=atol))

    def __repr__(self):
        return f"RationalTF(num={self.num.tolist()}, den={self.den.tolist()})"


def constant_tf(c):
    """Static gain c"""
    return RationalTF([c], [1.])


def first_order_lag(gain=1., tau=0.1):
    """gain / (1 + tau s), e.g. sensor lag or motor response"""
    if not tau > 0:
        raise ParameterDomainError(f"tau must be > 0, got {tau}")
    return RationalTF([gain], [1., tau])


def integrator(gain=1.):
    """gain / s"""
    return RationalTF([gain], [0., 1.])


def _series(*blocks):
    out = constant_tf(1.)
    for block in blocks:
        out = out * block
    return out


def compose_G(F_s, F_p, F_a, H_s, H_a):
    """
    Attack-to-human transfer function of the closed loop

    :type F_s: RationalTF
    :param F_s: sensor block
    :type F_p: RationalTF
    :param F_p: perception/display block
    :type F_a: RationalTF
    :param F_a: actuation block
    :type H_s: RationalTF
    :param H_s: human sensory response
    :type H_a: RationalTF
    :param H_a: human action feeding back into the sensors
    :rtype: RationalTF
    """
    forward = _series(F_s, F_p, F_a, H_s)
    N, D = forward.num, forward.den
    Nh, Dh = H_a.num, H_a.den
    num = P.polymul(N, Dh)
    den = P.polysub(P.polymul(D, Dh), P.polymul(N, Nh))
    scale = max(np.max(np.abs(P.polymul(D, Dh))),
                np.max(np.abs(P.polymul(N, Nh))))
    if np.all(np.abs(den) <= COEFF_TOL * scale):
        raise SingularLoopError("closed loop denominator 1 - L(s) vanishes "
                                "identically")
    return RationalTF(num, den)


def compose_G_simplified(F_s, H_s, H_a):
    """
    G with unity perception and actuation blocks,
    F_s H_s / (1 - F_s H_s H_a)
    """
    one = constant_tf(1.)
    return compose_G(F_s, one, one, H_s, H_a)


def compose_P(G, H_a):
    """Human action caused by the attack, P = G H_a"""
    return G * H_a


def eval_magnitude(tf, f):
    """
    Gain |tf(i 2 pi f)|

    :type tf: RationalTF
    :param tf: transfer function
    :type f: float or np.array
    :param f: frequency in Hz
    :rtype: float or np.array
    """
    mag = np.abs(tf(2j * np.pi * np.asarray(f, dtype=float)))
    return float(mag) if np.ndim(mag) == 0 else mag


def loop_response(G, H_a, freqs):
    """
    Magnitudes of G and P = G H_a over a frequency grid

    :type G: RationalTF
    :param G: closed-loop attack-to-human transfer function
    :type H_a: RationalTF
    :param H_a: human action block
    :type freqs: np.array
    :param freqs: frequencies in Hz
    :rtype: (np.array, np.array)
    :return: (|G|, |P|) at each frequency
    """
    return eval_magnitude(G, freqs), eval_magnitude(compose_P(G, H_a), freqs)
