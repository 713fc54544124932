"""Dipole Green-function channel between the polarized ULA and the UE.

Dipole ordering is x, y, z: truncating to the first two polarizations keeps
the x and y dipoles (transverse to the z propagation axis at broadside).
"""

from dataclasses import dataclass, field, replace
import warnings

import numpy as np

from .geometry import PhysicalConstants, PropagationRay, UePosition, UlaGeometry, _ray_vectors

CANONICAL_CONFIGS = ((3, 3), (3, 2), (2, 2))


class NonCanonicalConfigWarning(UserWarning):
    pass


@dataclass(frozen=True)
class PolarizationConfig:
    """Number of dipoles used at the receiver (`r_pol`) and transmitter (`t_pol`)."""

    r_pol: int = 3
    t_pol: int = 3

    def __post_init__(self):
        if self.r_pol not in (2, 3) or self.t_pol not in (2, 3):
            raise ValueError(f"polarization counts must be 2 or 3, got ({self.r_pol}, {self.t_pol})")

    @property
    def canonical(self) -> bool:
        return (self.r_pol, self.t_pol) in CANONICAL_CONFIGS

    @property
    def label(self) -> str:
        return f"{self.r_pol}x{self.t_pol}"

    @classmethod
    def parse(cls, text: str) -> "PolarizationConfig":
        r, t = text.lower().replace("(", "").replace(")", "").replace(",", "x").split("x")
        return cls(int(r), int(t))


@dataclass(frozen=True)
class Scenario:
    """Everything needed to assemble the equivalent channel."""

    geometry: UlaGeometry
    ue: UePosition
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    config: PolarizationConfig = field(default_factory=PolarizationConfig)
    include_reactive: bool = False

    def __post_init__(self):
        if not self.config.canonical:
            warnings.warn(f"polarization config {self.config.label} is not one of "
                          f"{CANONICAL_CONFIGS}", NonCanonicalConfigWarning, stacklevel=3)

    @property
    def epsilon(self) -> float:
        return self.geometry.half_count * self.geometry.spacing / self.ue.distance

    def at_distance(self, distance: float) -> "Scenario":
        return replace(self, ue=UePosition(distance))


@dataclass(frozen=True)
class ElementChannel:
    index: int
    matrix: np.ndarray
    reactive_included: bool


@dataclass(frozen=True)
class EquivalentChannel:
    matrix: np.ndarray
    scenario: Scenario

    @property
    def shape(self):
        return self.matrix.shape

    def block(self, m: int) -> np.ndarray:
        """Column block of element `m`."""
        t = self.scenario.config.t_pol
        k = m + self.scenario.geometry.half_count
        return self.matrix[:, k * t:(k + 1) * t]


def projector(unit_vector) -> np.ndarray:
    """Orthogonal projector onto the plane transverse to `unit_vector`."""
    u = np.asarray(unit_vector, dtype=float)
    return np.eye(3) - np.outer(u, u)


def reactive_term(constants: PhysicalConstants, r: float, unit_vector) -> np.ndarray:
    lam = constants.wavelength
    k = 2 * np.pi * r
    coef = lam * (1j * k - lam) / k ** 2
    u = np.asarray(unit_vector, dtype=float)
    return coef * (np.eye(3) - 3 * np.outer(u, u))


def element_channel(constants: PhysicalConstants, ray: PropagationRay,
                    include_reactive: bool = False) -> ElementChannel:
    """Full 3x3 polarized channel from element ``ray.index`` to the UE."""
    r = ray.distance
    if not r > 0:
        raise ZeroDivisionError("element coincides with the UE (r_m = 0)")
    P = projector(ray.unit_vector).astype(complex)
    if include_reactive:
        P = P + reactive_term(constants, r, ray.unit_vector)
    scale = 1j * constants.amplitude * np.exp(-2j * np.pi * r / constants.wavelength) / r
    return ElementChannel(ray.index, scale * P, include_reactive)


def truncate(element: ElementChannel, config: PolarizationConfig) -> ElementChannel:
    if element.matrix.shape != (3, 3):
        raise ValueError("truncate expects a full 3x3 element channel")
    return ElementChannel(element.index, element.matrix[:config.r_pol, :config.t_pol],
                          element.reactive_included)


def element_stack(scenario: Scenario, with_phase: bool = True) -> np.ndarray:
    """Truncated element channels stacked along axis 0, shape (2M+1, r_pol, t_pol).

    With ``with_phase=False`` the common propagation phase of each element is
    dropped, which leaves the Gramian unchanged.
    """
    const = scenario.constants
    _, r, u = _ray_vectors(scenario.geometry, scenario.ue)
    outer = u[:, :, None] * u[:, None, :]
    P = (np.eye(3)[None] - outer).astype(complex)
    if scenario.include_reactive:
        k = 2 * np.pi * r
        coef = const.wavelength * (1j * k - const.wavelength) / k ** 2
        P = P + coef[:, None, None] * (np.eye(3)[None] - 3 * outer)
    scale = const.amplitude / r
    if with_phase:
        scale = 1j * scale * np.exp(-2j * np.pi * r / const.wavelength)
    H = scale[:, None, None] * P
    cfg = scenario.config
    return H[:, :cfg.r_pol, :cfg.t_pol]


def equivalent_channel(scenario: Scenario) -> EquivalentChannel:
    """Concatenate the truncated element channels for ``m = -M..M`` column-wise."""
    H = element_stack(scenario)
    n, r, t = H.shape
    return EquivalentChannel(H.transpose(1, 0, 2).reshape(r, n * t), scenario)
