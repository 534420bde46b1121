"""Radial grids and space-time solution fields."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class RadialGrid:
    """Uniform nodes on [0, R], endpoints included."""

    R: float
    count: int

    def __post_init__(self):
        if self.R <= 0:
            raise ValueError("radius must be positive")
        if self.count < 3:
            raise ValueError("grid needs at least 3 nodes")

    @property
    def h(self) -> float:
        return self.R / (self.count - 1)

    @property
    def r(self) -> np.ndarray:
        return np.linspace(0.0, self.R, self.count)


@dataclass
class SpaceTimeField:
    """Solution samples u(r_i, t_j): values[j, i] on grid x times.

    metadata carries the run manifest (exponent label, dimension, scheme,
    measured consistency bounds, ...).
    """

    values: np.ndarray
    grid: RadialGrid
    times: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.times = np.asarray(self.times, dtype=float)
        if self.values.shape != (self.times.size, self.grid.count):
            raise ValueError(
                f"field shape {self.values.shape} does not match "
                f"{self.times.size} times x {self.grid.count} nodes"
            )

    @property
    def sup_per_level(self) -> np.ndarray:
        return self.values.max(axis=1)

    @property
    def inf_per_level(self) -> np.ndarray:
        return self.values.min(axis=1)

    def parabolic_boundary_values(self) -> np.ndarray:
        """Data on the parabolic boundary: initial level plus the r=R column."""
        return np.concatenate([self.values[0, :], self.values[1:, -1]])

    def interior_values(self) -> np.ndarray:
        """All nodes strictly inside the space-time cylinder (the axis r=0 is interior)."""
        return self.values[1:, :-1]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "r", "u"])
            r = self.grid.r
            for j, t in enumerate(self.times):
                for i in range(self.grid.count):
                    writer.writerow([f"{t:.17g}", f"{r[i]:.17g}", f"{self.values[j, i]:.17g}"])

    def manifest(self) -> dict:
        return {
            "R": self.grid.R,
            "nodes": self.grid.count,
            "t_end": float(self.times[-1]),
            "levels": int(self.times.size),
            **self.metadata,
        }

    def save_manifest(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.manifest(), fh, indent=2, sort_keys=True)
