"""Body-surface grid, node positions, distances and link angles.

Coordinates are 1-based integer cell indices; with the default 1 cm cell
they are centimetres, so the scenario coordinates (1,1), (15,15) etc. are
used verbatim. Conversion to metres happens only in :func:`distance`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple


class NodePosition(NamedTuple):
    x: int
    y: int


@dataclass(frozen=True)
class GridSpec:
    length_cm: int = 16
    width_cm: int = 15
    cell_size_cm: int = 1

    def __post_init__(self):
        if self.cell_size_cm < 1:
            raise ValueError(f"cell_size_cm must be >= 1, got {self.cell_size_cm}")
        if self.length_cm < 2 or self.width_cm < 2:
            raise ValueError(
                f"grid must be at least 2x2 cm, got {self.length_cm}x{self.width_cm}"
            )
        if self.nx < 1 or self.ny < 1:
            raise ValueError("cell_size_cm larger than the grid")

    @property
    def nx(self) -> int:
        """Number of cells along the length axis (x)."""
        return self.length_cm // self.cell_size_cm

    @property
    def ny(self) -> int:
        """Number of cells along the width axis (y)."""
        return self.width_cm // self.cell_size_cm

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    def contains(self, p: NodePosition) -> bool:
        return 1 <= p.x <= self.nx and 1 <= p.y <= self.ny

    def check(self, p: NodePosition, role: str = "node") -> NodePosition:
        p = NodePosition(int(p[0]), int(p[1]))
        if not self.contains(p):
            raise ValueError(
                f"{role} position ({p.x},{p.y}) is off the {self.nx}x{self.ny} grid"
            )
        return p


def distance(a: NodePosition, b: NodePosition, cell_size_cm: float = 1.0) -> float:
    """Euclidean distance between two grid positions, in metres."""
    return math.hypot(a[0] - b[0], a[1] - b[1]) * cell_size_cm / 100.0


def angle_between(origin: NodePosition, a: NodePosition, b: NodePosition) -> float:
    """Unsigned angle in degrees, in [0, 180], between origin->a and origin->b."""
    ax, ay = a[0] - origin[0], a[1] - origin[1]
    bx, by = b[0] - origin[0], b[1] - origin[1]
    if (ax == 0 and ay == 0) or (bx == 0 and by == 0):
        raise ValueError(
            f"direction undefined: point coincides with origin {tuple(origin)}"
        )
    cross = ax * by - ay * bx
    dot = ax * bx + ay * by
    return abs(math.degrees(math.atan2(cross, dot)))


def grid_cells(spec: GridSpec, excluded: Iterable[NodePosition] = ()) -> list[NodePosition]:
    """All cells not in ``excluded``, x varying fastest: (1,1), (2,1), ..."""
    skip = {NodePosition(int(p[0]), int(p[1])) for p in excluded}
    return [
        NodePosition(x, y)
        for y in range(1, spec.ny + 1)
        for x in range(1, spec.nx + 1)
        if (x, y) not in skip
    ]
