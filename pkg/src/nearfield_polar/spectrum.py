"""Gramian eigenvalues: exact summation, beta sums and closed forms.

With the reactive term switched off the Gramian ``W = H_eq H_eq^H`` is
diagonal for every canonical polarization config, and its entries are
weighted sums over the array of inverse powers of the element distance
(the ``beta`` sums below). For a large array the sums become Riemann sums of
rational integrands, giving closed forms in the normalized half-aperture
``epsilon = M * delta_t / D``.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .channel import PolarizationConfig, Scenario, equivalent_channel
from .geometry import PhysicalConstants, UePosition, UlaGeometry

EXACT = "exact-sum"
CLOSED_FORM = "closed-form"


@dataclass(frozen=True)
class BetaSums:
    """Inverse-distance sums over ``m = -M..M``.

    ``beta0 = sum 1/r^4``, ``beta1 = sum m^2/r^4``, ``beta2 = sum 1/r^2``,
    ``beta3 = sum 1/r^6``, ``beta4 = sum m^2/r^6``.
    """

    beta0: float
    beta1: float
    beta2: float
    beta3: float
    beta4: float

    def as_array(self) -> np.ndarray:
        return np.array([self.beta0, self.beta1, self.beta2, self.beta3, self.beta4])


@dataclass(frozen=True)
class NormalizedAperture:
    epsilon: float
    omega: float

    @classmethod
    def from_geometry(cls, geometry: UlaGeometry, ue: UePosition) -> "NormalizedAperture":
        eps = geometry.half_count * geometry.spacing / ue.distance
        omega = ue.distance / geometry.spacing if geometry.spacing > 0 else math.inf
        return cls(eps, omega)

    @property
    def zeta(self) -> float:
        return zeta(self.epsilon)


@dataclass(frozen=True)
class SpectrumResult:
    """Descending non-negative eigenvalues of the Gramian.

    `slots` keeps the diagonal-position order (W[0,0], W[1,1], ...) the
    values came from; for the canonical configs that order is already
    descending, but it is what the cross-config comparisons index.
    """

    eigenvalues: np.ndarray
    source: str
    slots: np.ndarray = field(default=None)

    def __post_init__(self):
        ev = np.sort(np.clip(np.asarray(self.eigenvalues, dtype=float), 0.0, None))[::-1]
        object.__setattr__(self, "eigenvalues", ev)
        if self.slots is None:
            object.__setattr__(self, "slots", ev.copy())

    def __len__(self):
        return len(self.eigenvalues)

    def __getitem__(self, k):
        return self.eigenvalues[k]


def zeta(epsilon: float) -> float:
    """``arctan(eps)/eps`` with its limit 1 at ``eps = 0``."""
    if epsilon == 0:
        return 1.0
    if abs(epsilon) < 1e-4:
        return 1.0 - epsilon ** 2 / 3 + epsilon ** 4 / 5
    return math.atan(epsilon) / epsilon


def beta_sums(geometry: UlaGeometry, ue: UePosition) -> BetaSums:
    m = geometry.indices.astype(float)
    r2 = ue.distance ** 2 + (m * geometry.spacing) ** 2
    m2 = m * m
    return BetaSums(
        beta0=float(np.sum(1.0 / r2 ** 2)),
        beta1=float(np.sum(m2 / r2 ** 2)),
        beta2=float(np.sum(1.0 / r2)),
        beta3=float(np.sum(1.0 / r2 ** 3)),
        beta4=float(np.sum(m2 / r2 ** 3)),
    )


def beta_diagonal(config: PolarizationConfig, betas: BetaSums, distance: float,
                  spacing: float, constants: PhysicalConstants,
                  third_slot: str = "beta4") -> np.ndarray:
    """Diagonal of the reactive-free Gramian assembled from beta sums.

    `third_slot` selects the sum used in the (3, 3) entry of the 3x2 Gramian.
    ``"beta4"`` is what direct expansion of the truncated projector gives;
    ``"beta3"`` reproduces the alternative printed form, kept only so the two
    readings can be compared.
    """
    D2, d2 = distance ** 2, spacing ** 2
    b = betas
    key = (config.r_pol, config.t_pol)
    if key == (3, 3):
        diag = [D2 * b.beta0 + d2 * b.beta1, D2 * b.beta0, d2 * b.beta1]
    elif key == (3, 2):
        third = {"beta4": b.beta4, "beta3": b.beta3}[third_slot]
        diag = [b.beta2, D2 * D2 * b.beta3, D2 * d2 * third]
    elif key == (2, 2):
        diag = [b.beta2, D2 * D2 * b.beta3]
    else:
        raise ValueError(f"no diagonal form for config {config.label}")
    return constants.gain * np.array(diag)


def gramian(scenario: Scenario) -> np.ndarray:
    H = equivalent_channel(scenario).matrix
    return H @ H.conj().T


def exact_gramian(scenario: Scenario) -> SpectrumResult:
    """Eigenvalues of ``H_eq H_eq^H`` from the assembled channel."""
    W = gramian(scenario)
    ev = np.linalg.eigvalsh(W)
    # eigvalsh is accurate to ~eps * ||W||; snap the round-off floor to zero
    tol = 1e-12 * max(float(np.real(np.trace(W))), 0.0)
    ev = np.where(ev < tol, 0.0, ev)
    return SpectrumResult(ev, EXACT, slots=np.real(np.diag(W)).copy())


def closed_form_eigenvalues(config: PolarizationConfig, half_count: int, epsilon: float,
                            constants: PhysicalConstants, distance: float) -> SpectrumResult:
    """Large-array eigenvalue approximations as functions of ``epsilon``.

    Returns three values for 3x3 and 3x2 and two for 2x2, in diagonal-slot
    order (which is also descending).
    """
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    z = zeta(epsilon)
    e2 = epsilon * epsilon
    c = 1.0 / (e2 + 1.0)
    scale = constants.gain * half_count / distance ** 2
    lam1 = 2 * scale * z
    key = (config.r_pol, config.t_pol)
    if key == (3, 3):
        vals = [lam1, scale * (z + c), scale * (z - c)]
    elif key in ((3, 2), (2, 2)):
        vals = [lam1, scale / 4 * (3 * z + (3 * e2 + 5) * c * c)]
        if key == (3, 2):
            vals.append(scale / 4 * (z + (e2 - 1) * c * c))
    else:
        raise ValueError(f"no closed form for config {config.label}")
    vals = np.array(vals)
    return SpectrumResult(vals, CLOSED_FORM, slots=vals.copy())


def integral_beta_approx(omega: float, half_count: int, distance: float) -> BetaSums:
    """Integral approximations of the beta sums with ``delta_t = D / omega``.

    Each sum over ``m`` is replaced by the integral of the same integrand
    over ``(-M, M)``.
    """
    if not omega > 0:
        raise ValueError("omega must be positive")
    M, w, D = half_count, omega, distance
    eps = M / w
    at = math.atan(eps)
    q = 1.0 / (1.0 + eps * eps)
    return BetaSums(
        beta0=w / D ** 4 * (at + eps * q),
        beta1=w ** 3 / D ** 4 * (at - eps * q),
        beta2=2 * w / D ** 2 * at,
        beta3=w / (4 * D ** 6) * (3 * at + eps * (3 * eps * eps + 5) * q * q),
        beta4=w ** 3 / (4 * D ** 6) * (at + eps * (eps * eps - 1) * q * q),
    )


def far_field_probe(config: PolarizationConfig, geometry: UlaGeometry,
                    constants: PhysicalConstants, distances) -> list[tuple[float, float]]:
    """Ratio of the third to the second exact eigenvalue at each distance.

    Configs with only two receive dipoles have no third eigenvalue; their
    ratio is reported as 0 (the channel has rank 2 at every distance).
    """
    out = []
    for D in distances:
        if config.r_pol < 3:
            out.append((float(D), 0.0))
            continue
        spec = exact_gramian(Scenario(geometry, UePosition(D), constants, config))
        out.append((float(D), float(spec[2] / spec[1])))
    return out
