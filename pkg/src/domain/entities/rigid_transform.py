"""Rigid SE(3) pose used for relative edges and global DSM poses."""

from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from src.domain.exceptions import InvalidInputError

ORTHONORMALITY_TOLERANCE: float = 1e-9


@dataclass(frozen=True, eq=False)
class RigidTransform:
    """
    Rotation R (3x3, det = +1) and translation t (meters); maps p to R p + t.
    """

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self) -> None:
        rotation = np.array(self.rotation, dtype=np.float64).reshape(3, 3)
        translation = np.array(self.translation, dtype=np.float64).reshape(3)
        if not (np.all(np.isfinite(rotation)) and np.all(np.isfinite(translation))):
            raise InvalidInputError("Rigid transform contains non-finite values")

        drift = np.linalg.norm(rotation.T @ rotation - np.eye(3))
        if drift > ORTHONORMALITY_TOLERANCE or np.linalg.det(rotation) <= 0.0:
            raise InvalidInputError(
                "Rotation is not a proper orthonormal matrix",
                field="rotation",
                context={"orthonormality_error": float(drift)},
            )

        rotation.setflags(write=False)
        translation.setflags(write=False)
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "translation", translation)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "RigidTransform":
        matrix = np.asarray(matrix, dtype=np.float64)
        return cls(matrix[:3, :3], matrix[:3, 3])

    @classmethod
    def from_lists(cls, rotation: Sequence[float], translation: Sequence[float]) -> "RigidTransform":
        """Build from a row-major 9-array and a 3-array."""
        return cls(np.asarray(rotation, dtype=np.float64).reshape(3, 3), np.asarray(translation))

    def as_matrix(self) -> np.ndarray:
        matrix = np.eye(4)
        matrix[:3, :3] = self.rotation
        matrix[:3, 3] = self.translation
        return matrix

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform an (N, 3) array of points."""
        points = np.asarray(points, dtype=np.float64)
        return points @ self.rotation.T + self.translation

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """``self ∘ other``: apply ``other`` first, then ``self``."""
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def inverse(self) -> "RigidTransform":
        rotation_t = self.rotation.T
        return RigidTransform(rotation_t, -rotation_t @ self.translation)

    def rotation_angle(self) -> float:
        """Rotation angle in radians."""
        cos_angle = (np.trace(self.rotation) - 1.0) / 2.0
        return float(np.arccos(np.clip(cos_angle, -1.0, 1.0)))

    def translation_norm(self) -> float:
        return float(np.linalg.norm(self.translation))

    def rotation_list(self) -> List[float]:
        """Row-major 9-array."""
        return [float(value) for value in self.rotation.reshape(-1)]

    def translation_list(self) -> List[float]:
        return [float(value) for value in self.translation]

    def __repr__(self) -> str:
        return (
            f"RigidTransform(angle={np.degrees(self.rotation_angle()):.6f}deg, "
            f"t={np.round(self.translation, 6).tolist()})"
        )


def chordal_distance(first: np.ndarray, second: np.ndarray) -> float:
    """Frobenius distance between two rotation matrices."""
    return float(np.linalg.norm(np.asarray(first) - np.asarray(second)))
