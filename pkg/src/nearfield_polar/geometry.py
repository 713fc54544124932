"""Array geometry: element positions, distances and propagation vectors.

The ULA sits on the y-axis centred at the origin, with ``2M+1`` elements at
``(0, m*delta_t, 0)`` for ``m = -M..M``. The UE sits on the positive z-axis at
``(0, 0, D)``. Vectors point from the UE toward the array elements.
"""

from dataclasses import dataclass
import math

import numpy as np


@dataclass(frozen=True)
class PhysicalConstants:
    """Medium constant and carrier wavelength.

    Together they fix the global amplitude scale ``(eta / (2 * wavelength))**2``
    of every Gramian eigenvalue.
    """

    eta: float = 1.0
    wavelength: float = 0.1

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")

    @property
    def amplitude(self) -> float:
        return self.eta / (2.0 * self.wavelength)

    @property
    def gain(self) -> float:
        """Power scale ``(eta / 2 lambda)**2`` multiplying all eigenvalues."""
        return self.amplitude ** 2


@dataclass(frozen=True)
class UlaGeometry:
    half_count: int
    spacing: float

    def __post_init__(self):
        if int(self.half_count) != self.half_count or self.half_count < 0:
            raise ValueError(f"half_count must be a non-negative integer, got {self.half_count}")
        if not self.spacing >= 0:
            raise ValueError(f"spacing must be non-negative, got {self.spacing}")

    @property
    def element_count(self) -> int:
        return 2 * self.half_count + 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.half_count, self.half_count + 1)

    @property
    def length(self) -> float:
        """Aperture ``2 * M * delta_t``, the array size used throughout."""
        return 2 * self.half_count * self.spacing

    @classmethod
    def from_length(cls, half_count: int, length: float) -> "UlaGeometry":
        if half_count == 0:
            return cls(0, 0.0)
        return cls(half_count, length / (2 * half_count))

    @classmethod
    def from_epsilon(cls, half_count: int, epsilon: float, distance: float) -> "UlaGeometry":
        """Geometry whose normalized half-aperture ``M*delta_t/D`` equals `epsilon`."""
        if half_count == 0:
            return cls(0, 0.0)
        return cls(half_count, epsilon * distance / half_count)


@dataclass(frozen=True)
class UePosition:
    distance: float

    def __post_init__(self):
        if not self.distance > 0:
            raise ValueError(f"UE distance must be positive, got {self.distance}")


@dataclass(frozen=True)
class PropagationRay:
    index: int
    distance: float
    unit_vector: np.ndarray


def _ray_vectors(geometry: UlaGeometry, ue: UePosition):
    m = geometry.indices
    vec = np.zeros((m.size, 3))
    vec[:, 1] = m * geometry.spacing
    vec[:, 2] = -ue.distance
    r = np.hypot(vec[:, 1], vec[:, 2])
    return m, r, vec / r[:, None]


def ray(geometry: UlaGeometry, ue: UePosition, m: int) -> PropagationRay:
    """Propagation ray from the UE to element `m`.

    Raises
    ------
    IndexError
        If `m` is outside ``[-M, M]``.
    """
    if int(m) != m or abs(m) > geometry.half_count:
        raise IndexError(f"element index {m} outside [-{geometry.half_count}, {geometry.half_count}]")
    vec = np.array([0.0, m * geometry.spacing, -ue.distance])
    r = math.hypot(vec[1], vec[2])
    return PropagationRay(int(m), r, vec / r)


def all_rays(geometry: UlaGeometry, ue: UePosition) -> list[PropagationRay]:
    m, r, u = _ray_vectors(geometry, ue)
    return [PropagationRay(int(mi), float(ri), ui) for mi, ri, ui in zip(m, r, u)]
