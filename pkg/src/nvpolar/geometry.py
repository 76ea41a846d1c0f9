"""Crystal frame, NV family axes and the polarization planes of the set-up.

All vectors live in the cubic crystal frame, with basis [100], [010], [001].
Lab-frame quantities (laser polarization, polarizer axis) are expressed
through :class:`PolarizationPlane` objects whose ``e1`` vector is the
angle-zero reference.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

FAMILY_LABELS = ("A", "B", "C", "D")

_UNIT_TOL = 1e-9


@dataclass(frozen=True)
class UnitVec3:
    """Normalized 3-vector. The constructor rescales its input to unit length."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        norm = math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)
        if not math.isfinite(norm) or norm == 0.0:
            raise ValueError(f"cannot normalize vector ({self.x}, {self.y}, {self.z})")
        object.__setattr__(self, "x", float(self.x) / norm)
        object.__setattr__(self, "y", float(self.y) / norm)
        object.__setattr__(self, "z", float(self.z) / norm)

    @classmethod
    def of(cls, v: Iterable[float]) -> "UnitVec3":
        x, y, z = (float(c) for c in v)
        return cls(x, y, z)

    @property
    def array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def dot(self, other) -> float:
        o = _as_array(other)
        return self.x * o[0] + self.y * o[1] + self.z * o[2]

    def cross(self, other) -> "UnitVec3":
        return UnitVec3.of(np.cross(self.array, _as_array(other)))

    def __neg__(self) -> "UnitVec3":
        return UnitVec3(-self.x, -self.y, -self.z)

    def __iter__(self):
        return iter((self.x, self.y, self.z))

    def tolist(self) -> list[float]:
        return [self.x, self.y, self.z]


def _as_array(v) -> np.ndarray:
    if isinstance(v, UnitVec3):
        return v.array
    return np.asarray(v, dtype=float)


@dataclass(frozen=True)
class NVFamily:
    """One of the four NV orientations with its two emission/absorption dipoles."""

    label: str
    axis: UnitVec3
    dipole1: UnitVec3
    dipole2: UnitVec3

    def __post_init__(self):
        if self.label not in FAMILY_LABELS:
            raise ValueError(f"unknown family label {self.label!r}")
        a, d1, d2 = self.axis, self.dipole1, self.dipole2
        if max(abs(a.dot(d1)), abs(a.dot(d2)), abs(d1.dot(d2))) > _UNIT_TOL:
            raise ValueError("family axis and dipoles must be mutually orthogonal")


@dataclass(frozen=True)
class PolarizationPlane:
    """Plane swept by a polarization vector.

    ``normal`` is the propagation direction (laser wave vector or collection
    axis). ``e1`` is the angle-zero reference and ``e2 = normal x e1`` so that
    ``(e1, e2, normal)`` is right-handed.
    """

    normal: UnitVec3
    e1: UnitVec3
    e2: UnitVec3

    def __post_init__(self):
        n, e1, e2 = self.normal, self.e1, self.e2
        if max(abs(n.dot(e1)), abs(n.dot(e2)), abs(e1.dot(e2))) > _UNIT_TOL:
            raise ValueError("plane basis is not orthonormal")
        if np.dot(np.cross(e1.array, e2.array), n.array) < 0:
            raise ValueError("plane basis is not right-handed")

    @classmethod
    def from_normal(cls, normal, e1) -> "PolarizationPlane":
        """Build the plane from its normal and reference direction.

        ``e1`` is projected onto the plane before normalization, so only its
        in-plane component matters.
        """
        n = UnitVec3.of(_as_array(normal))
        v = _as_array(e1)
        v = v - np.dot(v, n.array) * n.array
        e1u = UnitVec3.of(v)
        return cls(n, e1u, n.cross(e1u))

    def vectors(self, angles) -> np.ndarray:
        """Polarization vectors for an array of angles, shape ``(len(angles), 3)``."""
        angles = np.asarray(angles, dtype=float)
        return np.cos(angles)[..., None] * self.e1.array + np.sin(angles)[..., None] * self.e2.array


def canonical_families() -> list[NVFamily]:
    """The four <111> families with deterministic dipole bases.

    Labels are fixed geometrically: B and D are the two axes perpendicular to
    [110], i.e. the two families lying in the laser-sweep plane.
    """
    raw = {
        "A": (1, 1, 1),
        "B": (1, -1, -1),
        "C": (-1, -1, 1),
        "D": (-1, 1, -1),
    }
    families = []
    zhat = np.array([0.0, 0.0, 1.0])
    for label, v in raw.items():
        axis = UnitVec3.of(v)
        d1 = UnitVec3.of(np.cross(axis.array, zhat))
        d2 = axis.cross(d1)
        families.append(NVFamily(label, axis, d1, d2))
    return families


def family_axes(families: Iterable[NVFamily] | None = None) -> np.ndarray:
    """Stack of family axes, shape ``(4, 3)``, in label order."""
    if families is None:
        families = canonical_families()
    return np.array([f.axis.array for f in families])


def angle_to_vector(plane: PolarizationPlane, angle: float) -> UnitVec3:
    """Unit vector ``cos(angle) e1 + sin(angle) e2``, angle in radians."""
    return UnitVec3.of(plane.vectors(angle))


def hwp_to_polarization(hwp_angle: float, fast_axis_offset: float = 0.0) -> float:
    """Polarization angle produced by a half-wave plate, wrapped to [0, pi)."""
    return (2.0 * (hwp_angle - fast_axis_offset)) % math.pi


def collection_half_angle(numerical_aperture: float, refractive_index: float) -> float:
    """Half-angle of the collected cone inside the crystal, ``arcsin(NA / n)``."""
    if numerical_aperture <= 0 or refractive_index <= 0:
        raise ValueError("numerical aperture and refractive index must be positive")
    if numerical_aperture >= refractive_index:
        raise ValueError(
            f"numerical aperture {numerical_aperture} must be below refractive index {refractive_index}"
        )
    return math.asin(numerical_aperture / refractive_index)


# Experiment geometry. The laser enters through a {110} face along [110] and
# its polarization zero is [001]. PL is collected along [001] through a {100}
# facet; the polarizer zero is [010].
LASER_DIRECTION = UnitVec3(1, 1, 0)
COLLECTION_AXIS = UnitVec3(0, 0, 1)


def laser_plane() -> PolarizationPlane:
    return PolarizationPlane.from_normal(LASER_DIRECTION, (0, 0, 1))


def collection_plane() -> PolarizationPlane:
    return PolarizationPlane.from_normal(COLLECTION_AXIS, (0, 1, 0))


# Baseline: laser polarization along <100>, equal excitation of all families.
BASELINE_LASER = UnitVec3(0, 1, 0)
BASELINE_POLARIZER = UnitVec3(0, 0, 1)
# Polarizer axis perpendicular to both B and D, maximizing their emission.
BD_POLARIZER = UnitVec3(1, 1, 0)
