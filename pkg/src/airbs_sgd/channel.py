"""Free-space channel model: received power in dBm and its position gradient.

Positions are Cartesian East/North/Up coordinates in meters. All power
bookkeeping at module boundaries is in dBm; linear (mW) conversions happen
inside the operations that need them. The model interface is pluggable:
anything that maps (base-station position, user position, link parameters)
to a received power differentiable in the base-station position fits.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

# 20 / ln(10): slope of 20*log10(d) with respect to ln(d).
DB_SLOPE = 20.0 / math.log(10.0)

# Singularity guard: transmitter and receiver closer than this is treated as
# a configuration bug (airborne transmitters never reach it in valid setups).
EPS_DISTANCE_M = 0.1


class CoincidentPositionsError(ValueError):
    """Raised when transmitter and receiver (nearly) coincide."""


@dataclass(frozen=True)
class Position:
    """A point in a local East/North/Up frame, meters."""

    x: float
    y: float
    z: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError(f"position coordinates must be finite, got {self}")
        if self.z < 0.0:
            raise ValueError(f"position altitude must be nonnegative, got z={self.z}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @classmethod
    def from_array(cls, a) -> "Position":
        return cls(float(a[0]), float(a[1]), float(a[2]))


@dataclass(frozen=True)
class ChannelParams:
    """Link-budget constants for one transmitter.

    ``ref_gain_db`` is the channel gain (antenna gains folded in) at
    ``ref_distance_m`` from the transmitter; ``tx_power_dbm`` the transmit
    power.
    """

    ref_gain_db: float
    ref_distance_m: float
    tx_power_dbm: float

    def __post_init__(self):
        if not math.isfinite(self.ref_gain_db):
            raise ValueError("ref_gain_db must be finite")
        if not (self.ref_distance_m > 0.0):
            raise ValueError("ref_distance_m must be positive")
        if not math.isfinite(self.tx_power_dbm):
            raise ValueError("tx_power_dbm must be finite")


def positions_to_array(positions) -> np.ndarray:
    """Coerce a sequence of Position (or length-3 array-likes) to an (N, 3) array."""
    if isinstance(positions, np.ndarray) and positions.ndim == 2 and positions.shape[1] == 3:
        return np.asarray(positions, dtype=float)
    rows = []
    for p in positions:
        if isinstance(p, Position):
            rows.append((p.x, p.y, p.z))
        else:
            rows.append((float(p[0]), float(p[1]), float(p[2])))
    return np.asarray(rows, dtype=float).reshape(-1, 3)


def dbm_to_linear(p_dbm: float):
    """dBm -> mW."""
    return 10.0 ** (np.asarray(p_dbm, dtype=float) / 10.0)


def linear_to_dbm(p_mw: float):
    """mW -> dBm. Rejects non-positive power."""
    p = np.asarray(p_mw, dtype=float)
    if np.any(p <= 0.0):
        raise ValueError("linear power must be positive to convert to dBm")
    return 10.0 * np.log10(p)


def _separation(l_b: Position, x_m: Position) -> float:
    dx = l_b.x - x_m.x
    dy = l_b.y - x_m.y
    dz = l_b.z - x_m.z
    return math.sqrt(dx * dx + dy * dy + dz * dz)


def free_space_power_dbm(l_b: Position, x_m: Position, params: ChannelParams) -> float:
    """Received power in dBm under inverse-square (free-space) spreading.

    Parameters
    ----------
    l_b : Position
        Transmitter location.
    x_m : Position
        Receiver location.
    params : ChannelParams
        Transmit power and reference-distance gain calibration.

    Returns
    -------
    float
        ``tx_power_dbm + ref_gain_db - 20*log10(d / ref_distance_m)`` with
        ``d`` the transmitter-receiver separation in meters.
    """
    d = _separation(l_b, x_m)
    if d < EPS_DISTANCE_M:
        raise CoincidentPositionsError(
            f"separation {d:.3g} m below the {EPS_DISTANCE_M} m singularity guard"
        )
    return params.tx_power_dbm + params.ref_gain_db - 20.0 * math.log10(d / params.ref_distance_m)


def free_space_power_gradient(l_b: Position, x_m: Position, params: ChannelParams) -> np.ndarray:
    """Gradient of :func:`free_space_power_dbm` with respect to ``l_b``, dB/meter.

    Equals ``-(20/ln 10) * (l_b - x_m) / d**2``: it points from the
    transmitter toward the receiver (moving closer raises power) and has
    magnitude ``(20/ln 10)/d``.
    """
    dx = l_b.x - x_m.x
    dy = l_b.y - x_m.y
    dz = l_b.z - x_m.z
    d2 = dx * dx + dy * dy + dz * dz
    if d2 < EPS_DISTANCE_M * EPS_DISTANCE_M:
        raise CoincidentPositionsError(
            f"separation {math.sqrt(d2):.3g} m below the {EPS_DISTANCE_M} m singularity guard"
        )
    scale = -DB_SLOPE / d2
    return np.array([scale * dx, scale * dy, scale * dz])


class ChannelModel(ABC):
    """Pluggable channel abstraction.

    Implementations must be differentiable in the transmitter position away
    from the receiver; the analytic gradient must agree with central finite
    differences of the power function.
    """

    @abstractmethod
    def power_dbm(self, l_b: Position, x_m: Position, params: ChannelParams) -> float:
        """Received power at ``x_m`` from a transmitter at ``l_b``, dBm."""

    @abstractmethod
    def power_gradient(self, l_b: Position, x_m: Position, params: ChannelParams) -> np.ndarray:
        """Gradient of ``power_dbm`` with respect to ``l_b``, dB/meter (3-vector)."""

    def power_dbm_points(self, l_b: Position, params: ChannelParams, points: np.ndarray) -> np.ndarray:
        """Received power at many points, shape (N,). Override to vectorize."""
        return np.array([
            self.power_dbm(l_b, Position(float(p[0]), float(p[1]), float(p[2])), params)
            for p in np.asarray(points, dtype=float).reshape(-1, 3)
        ])


class FreeSpaceChannel(ChannelModel):
    """Inverse-square spreading calibrated by a reference-distance gain."""

    def power_dbm(self, l_b, x_m, params):
        return free_space_power_dbm(l_b, x_m, params)

    def power_gradient(self, l_b, x_m, params):
        return free_space_power_gradient(l_b, x_m, params)

    def power_dbm_points(self, l_b, params, points):
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        d = np.linalg.norm(pts - l_b.as_array(), axis=1)
        if np.any(d < EPS_DISTANCE_M):
            raise CoincidentPositionsError("a grid point coincides with the transmitter")
        return params.tx_power_dbm + params.ref_gain_db - 20.0 * np.log10(d / params.ref_distance_m)


FREE_SPACE = FreeSpaceChannel()


def received_power_matrix(placements, params, points, model: ChannelModel = FREE_SPACE) -> np.ndarray:
    """Power from each of B transmitters at each of N points, shape (N, B), dBm.

    ``placements`` and ``params`` are parallel length-B sequences.
    """
    pts = positions_to_array(points)
    cols = [model.power_dbm_points(l_b, prm, pts) for l_b, prm in zip(placements, params)]
    return np.stack(cols, axis=1)
