"""
Exceptions raised by the SpoofSim models and harness. Every error shares the
`SpoofSimError` base so that the command line tool can map failures onto exit
codes, and most also subclass the matching builtin so callers may catch
`ValueError` or `TypeError` directly.
"""


class SpoofSimError(Exception):
    """Base class for all package errors"""


class ParameterDomainError(SpoofSimError, ValueError):
    """A parameter lies outside of its physical domain, e.g., a negative
    period or a locomotion gain of zero"""


class WaveformKindError(SpoofSimError, TypeError):
    """A waveform of the wrong kind was passed to a transducer"""


class NumericDomainError(SpoofSimError, ValueError):
    """Non-finite numbers entered a numerical routine"""


class ShapeError(SpoofSimError, ValueError):
    """Series or arrays have mismatched lengths or sample rates"""


class AlignmentError(SpoofSimError, ValueError):
    """Two time series or trajectories do not share timestamps"""


class PhaseAlignmentError(SpoofSimError, ValueError):
    """An observed frequency cannot be phase aligned to the camera updates"""


class ReachError(SpoofSimError, ValueError):
    """A wrist target lies outside of the arm's workspace"""


class SeriesLengthError(SpoofSimError, ValueError):
    """A series is shorter than the detector window"""


class SingularLoopError(SpoofSimError, ZeroDivisionError):
    """A closed loop transfer function has an identically zero denominator"""


class PoleError(SpoofSimError, ZeroDivisionError):
    """A transfer function was evaluated on one of its poles"""


class ConfigError(SpoofSimError, ValueError):
    """
    Scenario configuration failed validation

    :type fields: list of str
    :param fields: dotted names of the offending fields, e.g. 'walk.gain'
    """
    def __init__(self, message, fields=None):
        super().__init__(message)
        self.fields = list(fields or [])
