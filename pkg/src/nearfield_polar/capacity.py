"""Water-filling rates, DoF slopes and the high-SNR rate approximation."""

from dataclasses import dataclass
import math

import numpy as np

from .channel import PolarizationConfig, Scenario
from .geometry import PhysicalConstants, UePosition, UlaGeometry
from .optimize import guarded_max
from .spectrum import SpectrumResult, exact_gramian, zeta

EPSILON_MAX = 50.0
# eigenvalues below this fraction of the largest one carry no power
ZERO_MODE_RTOL = 1e-12


@dataclass(frozen=True)
class PowerAllocation:
    """Fractions of the unit transmit power per mode, aligned with the input eigenvalues."""

    fractions: np.ndarray
    water_level: float


@dataclass(frozen=True)
class RateResult:
    rate: float
    allocation: PowerAllocation
    active_modes: int
    eigenvalues: np.ndarray


@dataclass(frozen=True)
class HighSnrApprox:
    C0: float
    alpha: float
    epsilon_star: float
    delta_t_star: float
    ula_length: float

    @property
    def rate(self) -> float:
        return self.C0 + self.alpha


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def _as_eigenvalues(spectrum) -> np.ndarray:
    if isinstance(spectrum, SpectrumResult):
        return np.asarray(spectrum.eigenvalues, dtype=float)
    return np.atleast_1d(np.asarray(spectrum, dtype=float))


def waterfill(spectrum, rho: float) -> RateResult:
    """Capacity-achieving power split over eigenmodes under ``sum(p) = 1``.

    ``p_n = max(mu - 1/(rho*lambda_n), 0)``. Modes are tried strongest first,
    dropping the weakest until every active mode gets positive power.
    """
    if not rho > 0:
        raise ValueError("rho must be positive")
    lam = _as_eigenvalues(spectrum)
    n = lam.size
    if n == 0 or not np.max(lam) > 0:
        return RateResult(0.0, PowerAllocation(np.zeros(n), 0.0), 0, lam)
    order = np.argsort(-lam, kind="stable")
    s = lam[order]
    usable = int(np.sum(s > ZERO_MODE_RTOL * s[0]))
    for k in range(usable, 0, -1):
        inv = 1.0 / (rho * s[:k])
        mu = (1.0 + inv.sum()) / k
        # mu - inv_i via pairwise differences: no cancellation when rho*lambda is tiny
        p = (1.0 + np.sum(inv[None, :] - inv[:, None], axis=1)) / k
        if p[-1] > 0:
            p = p / p.sum()
            break
    fractions = np.zeros(n)
    fractions[order[:k]] = p
    rate = float(np.sum(np.log2(1.0 + rho * p * s[:k])))
    return RateResult(rate, PowerAllocation(fractions, float(mu)), k, lam)


def achievable_rate(scenario: Scenario, rho: float) -> RateResult:
    return waterfill(exact_gramian(scenario), rho)


def dof_slope(scenario: Scenario, rho_low_db: float, rho_high_db: float) -> float:
    """Finite-difference estimate of the high-SNR slope ``dC / dlog2(rho)``."""
    if not rho_high_db > rho_low_db:
        raise ValueError("rho_high_db must exceed rho_low_db")
    spec = exact_gramian(scenario)
    lo, hi = db_to_linear(rho_low_db), db_to_linear(rho_high_db)
    dc = waterfill(spec, hi).rate - waterfill(spec, lo).rate
    return dc / (math.log2(hi) - math.log2(lo))


def _alpha_argument(key, epsilon):
    z = zeta(epsilon)
    e2 = epsilon * epsilon
    c = 1.0 / (e2 + 1.0)
    if key == (3, 3):
        return 2 * z * (z + c) * (z - c)
    if key == (3, 2):
        return 8 * z * (3 * z + (3 * e2 + 5) * c * c) * (z + (e2 - 1) * c * c)
    if key == (2, 2):
        return 8 * z * (3 * z + (3 * e2 + 5) * c * c)
    raise ValueError(f"no alpha function for config {key}")


def alpha_function(config: PolarizationConfig, epsilon: float) -> float:
    """Shape term of the high-SNR rate, in bits.

    Returns ``-inf`` where the weakest mode vanishes (3x3 and 3x2 at
    ``epsilon = 0``).
    """
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    arg = _alpha_argument((config.r_pol, config.t_pol), epsilon)
    return math.log2(arg) if arg > 0 else -math.inf


def optimal_epsilon(config: PolarizationConfig, epsilon_max: float = EPSILON_MAX,
                    tol: float = 1e-6) -> tuple[float, float]:
    """Maximizer and maximum of `alpha_function` over ``[0, epsilon_max]``."""
    return guarded_max(lambda e: alpha_function(config, e), 0.0, epsilon_max, tol)


def high_snr_C0(config: PolarizationConfig, constants: PhysicalConstants,
                half_count: int, distance: float, rho: float) -> float:
    g = constants.gain * half_count * rho
    D2 = distance ** 2
    key = (config.r_pol, config.t_pol)
    if key == (3, 3):
        return 3 * math.log2(g / (3 * D2))
    if key == (3, 2):
        return 3 * math.log2(g / (4 * D2 * 3))
    if key == (2, 2):
        return 2 * math.log2(g / (4 * D2 * 2))
    raise ValueError(f"no high-SNR approximation for config {config.label}")


def high_snr_rate(config: PolarizationConfig, constants: PhysicalConstants,
                  half_count: int, distance: float, rho: float) -> HighSnrApprox:
    """High-SNR rate at the optimal spacing, ``C0 + alpha(epsilon*)``."""
    eps, alpha = optimal_epsilon(config)
    C0 = high_snr_C0(config, constants, half_count, distance, rho)
    delta = eps * distance / half_count if half_count else 0.0
    return HighSnrApprox(C0, alpha, eps, delta, 2 * eps * distance)


def optimal_spacing(config: PolarizationConfig, constants: PhysicalConstants,
                    half_count: int, distance: float, rho: float,
                    epsilon_max: float = 3.0, tol: float = 1e-6, grid: int = 300,
                    include_reactive: bool = False) -> tuple[float, float]:
    """Numerically optimal ``epsilon`` for the exact water-filled rate.

    Returns ``(epsilon, rate)``; the spacing is ``epsilon * D / M``.
    """
    ue = UePosition(distance)

    def rate(eps):
        geo = UlaGeometry.from_epsilon(half_count, eps, distance)
        return achievable_rate(Scenario(geo, ue, constants, config, include_reactive), rho).rate

    return guarded_max(rate, 0.0, epsilon_max, tol, grid)
