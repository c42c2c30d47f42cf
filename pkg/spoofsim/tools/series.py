"""
Uniformly sampled measurement streams. A SampleSeries is the currency that
flows between the sensing, perception and defense models, and the unit that
is written to and read back from CSV.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from spoofsim.tools.exceptions import ParameterDomainError, NumericDomainError

# Significant digits written to every CSV exported by the package
CSV_FMT = "%.9g"


class Channel(str, Enum):
    """Sensor or display channel a series was recorded from"""
    GYRO_X = "gyro_x"
    GYRO_Y = "gyro_y"
    GYRO_Z = "gyro_z"
    ACCEL_X = "accel_x"
    ACCEL_Y = "accel_y"
    ACCEL_Z = "accel_z"
    HALL = "hall"
    FLOW_H = "flow_h"
    FLOW_V = "flow_v"
    DISPARITY = "disparity"
    DISPLAY_X = "display_x"
    DISPLAY_Y = "display_y"
    VELOCITY_Z = "velocity_z"
    VIBRATION = "vibration"

    @classmethod
    def gyro(cls, axis):
        """Gyroscope channel for axis index 0, 1 or 2"""
        return [cls.GYRO_X, cls.GYRO_Y, cls.GYRO_Z][axis]

    @classmethod
    def accel(cls, axis):
        """Accelerometer channel for axis index 0, 1 or 2"""
        return [cls.ACCEL_X, cls.ACCEL_Y, cls.ACCEL_Z][axis]


@dataclass(frozen=True, eq=False)
class SampleSeries:
    """
    Uniformly sampled stream, sample `i` taken at `t0 + i * dt`

    :type t0: float
    :param t0: time of the first sample in seconds
    :type dt: float
    :param dt: sample interval in seconds
    :type values: np.array
    :param values: finite sample values in channel units
    :type channel: Channel
    :param channel: which sensor or display channel the values belong to
    """
    t0: float
    dt: float
    values: np.ndarray
    channel: Channel

    def __post_init__(self):
        values = np.array(self.values, dtype=float).ravel()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "channel", Channel(self.channel))
        if not self.dt > 0:
            raise ParameterDomainError(f"sample interval must be > 0, "
                                       f"got dt={self.dt}")
        if values.size < 1:
            raise ParameterDomainError("series must hold at least one sample")
        if not np.all(np.isfinite(values)):
            raise NumericDomainError(f"{self.channel.value} series contains "
                                     f"non-finite values")

    def __len__(self):
        return self.values.size

    @property
    def times(self):
        """Sample times in seconds"""
        return self.t0 + np.arange(len(self)) * self.dt

    @property
    def sample_rate(self):
        return 1. / self.dt

    @property
    def duration(self):
        return len(self) * self.dt

    def with_values(self, values, channel=None):
        """Return a copy on the same time axis with new values"""
        return SampleSeries(t0=self.t0, dt=self.dt, values=values,
                            channel=channel or self.channel)

    def to_csv(self, fid):
        """
        Write the series as a two column CSV with header `t,value`

        :type fid: str
        :param fid: path of the CSV file to write
        """
        data = np.column_stack([self.times, self.values])
        np.savetxt(fid, data, fmt=CSV_FMT, delimiter=",", header="t,value",
                   comments="")

    @classmethod
    def from_csv(cls, fid, channel=Channel.GYRO_Z):
        """
        Read a `t,value` CSV written by `to_csv` or by an external tool. The
        sample interval is taken from the first two timestamps

        :type fid: str
        :param fid: path of the CSV file to read
        :type channel: Channel or str
        :param channel: channel to label the series with
        :rtype: SampleSeries
        """
        data = np.loadtxt(fid, delimiter=",", skiprows=1, ndmin=2)
        times, values = data[:, 0], data[:, 1]
        dt = times[1] - times[0] if times.size > 1 else 1.
        return cls(t0=float(times[0]), dt=float(dt), values=values,
                   channel=channel)
