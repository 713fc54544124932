"""Beamfocusing: a precoder matched to one UE position, evaluated along the z-axis."""

from dataclasses import dataclass
import math

import numpy as np

from .capacity import PowerAllocation, waterfill
from .channel import Scenario, equivalent_channel

DEFAULT_GRID = (0.5, 15.0, 1451)


class RankDeficientChannel(ValueError):
    pass


@dataclass(frozen=True)
class Precoder:
    """Eigenbeamformer with water-filled stream powers.

    `matrix` has orthonormal columns; the transmit covariance is
    ``F diag(p) F^H`` with unit trace.
    """

    matrix: np.ndarray
    allocation: PowerAllocation
    design_scenario: Scenario
    rho: float

    @property
    def streams(self) -> int:
        return self.matrix.shape[1]

    @property
    def powers(self) -> np.ndarray:
        return self.allocation.fractions

    @property
    def design_distance(self) -> float:
        return self.design_scenario.ue.distance

    def covariance(self) -> np.ndarray:
        F = self.matrix
        return (F * self.powers) @ F.conj().T


@dataclass(frozen=True)
class RateProfile:
    distances: np.ndarray
    rates: np.ndarray
    precoder: Precoder

    def __post_init__(self):
        if np.any(np.diff(self.distances) <= 0):
            raise ValueError("distance grid must be strictly increasing")

    @property
    def samples(self):
        return list(zip(self.distances.tolist(), self.rates.tolist()))

    def rate_at(self, d: float) -> float:
        return float(np.interp(d, self.distances, self.rates))


@dataclass(frozen=True)
class FocalRegion:
    lower: float
    upper: float
    threshold: float
    peak_rate: float
    peak_position: float
    lower_clipped: bool = False
    upper_clipped: bool = False

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def clipped(self) -> bool:
        """True when the region runs into the edge of the sampled grid."""
        return self.lower_clipped or self.upper_clipped


def design_precoder(scenario: Scenario, rho: float) -> Precoder:
    """SVD eigenbeamforming on ``H_eq`` at the design position."""
    H = equivalent_channel(scenario).matrix
    _, s, Vh = np.linalg.svd(H, full_matrices=False)
    wf = waterfill(s ** 2, rho)
    if wf.active_modes == 0:
        raise RankDeficientChannel("channel has no positive singular value")
    k = wf.active_modes
    F = Vh[:k].conj().T
    alloc = PowerAllocation(wf.allocation.fractions[:k], wf.allocation.water_level)
    return Precoder(F, alloc, scenario, rho)


def _rate_with_covariance(H, F, powers, rho):
    G = H @ F
    A = np.eye(H.shape[0]) + rho * (G * powers) @ G.conj().T
    sign, logdet = np.linalg.slogdet(A)
    return float(logdet / math.log(2))


def mismatched_rate(precoder: Precoder, scenario: Scenario, rho: float) -> float:
    """Rate ``log2 det(I + rho H F diag(p) F^H H^H)`` of a receiver at `scenario`."""
    H = equivalent_channel(scenario).matrix
    return _rate_with_covariance(H, precoder.matrix, precoder.powers, rho)


def focus_sweep(precoder: Precoder, distances, rho: float) -> RateProfile:
    d = np.asarray(distances, dtype=float)
    base = precoder.design_scenario
    rates = np.array([mismatched_rate(precoder, base.at_distance(x), rho) for x in d])
    return RateProfile(d, rates, precoder)


def default_grid(start=DEFAULT_GRID[0], stop=DEFAULT_GRID[1], count=DEFAULT_GRID[2]):
    return np.linspace(start, stop, count)


def focal_region(profile: RateProfile, drop: float = 10.0, anchor: float = None) -> FocalRegion:
    """Contiguous interval around the peak where ``rate >= peak - drop``.

    Crossings are linearly interpolated between samples. With `anchor`, the
    reference is the sample nearest that position instead of the global
    maximum, which is useful when the global maximum sits at the grid edge.
    """
    d, R = profile.distances, profile.rates
    if d.size == 0:
        raise ValueError("empty profile")
    i = int(np.argmax(R)) if anchor is None else int(np.argmin(np.abs(d - anchor)))
    peak = float(R[i])
    th = peak - drop
    lo = i
    while lo > 0 and R[lo - 1] >= th:
        lo -= 1
    hi = i
    while hi < d.size - 1 and R[hi + 1] >= th:
        hi += 1
    lower_clipped = lo == 0
    upper_clipped = hi == d.size - 1
    if lower_clipped:
        lower = float(d[0])
    else:
        lower = float(np.interp(th, [R[lo - 1], R[lo]], [d[lo - 1], d[lo]]))
    if upper_clipped:
        upper = float(d[-1])
    else:
        # rates fall across this step, so flip for np.interp's increasing x
        upper = float(np.interp(th, [R[hi + 1], R[hi]], [d[hi + 1], d[hi]]))
    return FocalRegion(lower, upper, th, peak, float(d[i]), lower_clipped, upper_clipped)
