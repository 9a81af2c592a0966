"""Single-floor dual-stripe layout, node placement and static link budget.

The floor has two rows of square rooms separated by a corridor running along
the x axis::

    y = 2s + c  +----+----+-- ... --+----+
                | r  | r  |         | r  |     row 1
    y = s + c   +----+----+-- ... --+----+
                |          corridor      |
    y = s       +----+----+-- ... --+----+
                | r  | r  |         | r  |     row 0
    y = 0       +----+----+-- ... --+----+

where ``s`` is the room side and ``c`` the corridor width.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

MAX_PLACEMENT_ATTEMPTS = 10_000


class PlacementError(RuntimeError):
    """Raised when the corridor cannot host the infrastructure nodes."""


class NodeKind(str, Enum):
    PICO = "pico"
    AP = "ap"
    LTE_USER = "lte_user"
    WLAN_USER = "wlan_user"


@dataclass(frozen=True)
class FloorPlan:
    room_rows: int = 2
    rooms_per_row: int = 20
    room_size: float = 10.0
    corridor_width: float = 10.0
    origin: Tuple[float, float] = (0.0, 0.0)


@dataclass(frozen=True)
class Rect:
    x0: float
    y0: float
    x1: float
    y1: float

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def area(self) -> float:
        return self.width * self.height

    def contains(self, x: float, y: float) -> bool:
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1


@dataclass(frozen=True)
class FloorGeometry:
    plan: FloorPlan
    rooms: Tuple[Rect, ...]
    corridor: Rect
    extent: Rect

    @property
    def length(self) -> float:
        return self.extent.width

    @property
    def depth(self) -> float:
        return self.extent.height

    def in_room_rows(self, y: float) -> bool:
        """True if height ``y`` lies in a room row (walls included)."""
        return y <= self.corridor.y0 or y >= self.corridor.y1


@dataclass(frozen=True)
class NodePosition:
    node_id: int
    kind: NodeKind
    x: float
    y: float
    z: float


@dataclass(frozen=True)
class PathlossModel:
    """Log-distance pathloss plus a fixed penetration loss per crossed wall."""

    model_id: str = "log_distance_walls"
    reference_loss: float = 38.46
    distance_exponent: float = 2.0
    wall_loss: float = 5.0


def generate_floor(plan: FloorPlan) -> FloorGeometry:
    """Build the room and corridor rectangles for ``plan``.

    Only the dual-stripe arrangement (two room rows) is supported.
    """
    if plan.rooms_per_row <= 0 or plan.room_rows <= 0:
        raise ValueError("room counts must be strictly positive")
    if plan.room_size <= 0 or plan.corridor_width <= 0:
        raise ValueError("room_size and corridor_width must be strictly positive")
    if plan.room_rows != 2:
        raise ValueError("dual-stripe layout requires exactly 2 room rows")

    ox, oy = plan.origin
    s, c = plan.room_size, plan.corridor_width
    length = plan.rooms_per_row * s
    depth = 2 * s + c
    rooms: List[Rect] = []
    for row, y0 in enumerate((oy, oy + s + c)):
        for i in range(plan.rooms_per_row):
            rooms.append(Rect(ox + i * s, y0, ox + (i + 1) * s, y0 + s))
    corridor = Rect(ox, oy + s, ox + length, oy + s + c)
    return FloorGeometry(plan, tuple(rooms), corridor, Rect(ox, oy, ox + length, oy + depth))


def place_infrastructure(
    geometry: FloorGeometry,
    rng: np.random.Generator,
    n_pico: int = 1,
    n_ap: int = 2,
    min_distance: float = 10.0,
    height: float = 3.0,
    max_attempts: int = MAX_PLACEMENT_ATTEMPTS,
) -> List[NodePosition]:
    """Drop Pico and APs uniformly in the corridor by rejection sampling.

    Candidates closer than ``min_distance`` (2D) to an already accepted node
    are rejected. The whole budget of ``max_attempts`` candidate draws is
    shared by all nodes.

    Raises:
        PlacementError: if the nodes cannot be placed within the budget.
    """
    cor = geometry.corridor
    kinds = [NodeKind.PICO] * n_pico + [NodeKind.AP] * n_ap
    accepted: List[Tuple[float, float]] = []
    attempts = 0
    while len(accepted) < len(kinds):
        if attempts >= max_attempts:
            raise PlacementError(
                f"could not place {len(kinds)} nodes {min_distance} m apart in a "
                f"{cor.width} m x {cor.height} m corridor after {max_attempts} attempts"
            )
        attempts += 1
        x = float(rng.uniform(cor.x0, cor.x1))
        y = float(rng.uniform(cor.y0, cor.y1))
        if all(math.hypot(x - ax, y - ay) >= min_distance for ax, ay in accepted):
            accepted.append((x, y))
    return [NodePosition(i, kind, x, y, height) for i, (kind, (x, y)) in enumerate(zip(kinds, accepted))]


def place_users(
    geometry: FloorGeometry,
    n_lte: int,
    n_wlan: int,
    rng: np.random.Generator,
    height: float = 1.5,
    first_id: int = 0,
) -> List[NodePosition]:
    """Uniform i.i.d. user positions over the whole floor (rooms and corridor)."""
    if n_lte < 0 or n_wlan < 0:
        raise ValueError("user counts must be non-negative")
    ext = geometry.extent
    n = n_lte + n_wlan
    xs = rng.uniform(ext.x0, ext.x1, size=n)
    ys = rng.uniform(ext.y0, ext.y1, size=n)
    kinds = [NodeKind.LTE_USER] * n_lte + [NodeKind.WLAN_USER] * n_wlan
    return [
        NodePosition(first_id + i, kind, float(x), float(y), height)
        for i, (kind, x, y) in enumerate(zip(kinds, xs, ys))
    ]


def count_walls(a: NodePosition, b: NodePosition, geometry: FloorGeometry) -> int:
    """Interior walls crossed by the 2D segment from ``a`` to ``b``.

    Walls are the two room-row/corridor boundaries and the room dividers
    inside each row. Touching a wall at an endpoint does not count.
    """
    # canonical order so the count is symmetric bit-for-bit
    (x0, y0), (x1, y1) = sorted([(a.x, a.y), (b.x, b.y)])
    cor = geometry.corridor
    walls = 0
    ylo, yhi = min(y0, y1), max(y0, y1)
    for wy in (cor.y0, cor.y1):
        if ylo < wy < yhi:
            walls += 1
    s = geometry.plan.room_size
    ox = geometry.extent.x0
    for i in range(1, geometry.plan.rooms_per_row):
        wx = ox + i * s
        if x0 < wx < x1:
            yc = y0 + (y1 - y0) * (wx - x0) / (x1 - x0)
            if geometry.in_room_rows(yc):
                walls += 1
    return walls


def distance_3d(a: NodePosition, b: NodePosition) -> float:
    return math.sqrt((a.x - b.x) ** 2 + (a.y - b.y) ** 2 + (a.z - b.z) ** 2)


def path_loss(
    a: NodePosition,
    b: NodePosition,
    model: PathlossModel,
    geometry: Optional[FloorGeometry] = None,
) -> float:
    """Pathloss in dB between two nodes.

    ``reference_loss + 10 * exponent * log10(d) + wall_loss * walls`` with the
    3D distance floored at 1 m and the result clamped at 0 dB. Without a
    geometry no walls are counted.
    """
    d = max(distance_3d(a, b), 1.0)
    walls = count_walls(a, b, geometry) if geometry is not None else 0
    pl = model.reference_loss + 10.0 * model.distance_exponent * math.log10(d) + model.wall_loss * walls
    return max(pl, 0.0)


def received_power(tx_dbm: float, pl_db: float, gain_db: float) -> float:
    return tx_dbm + gain_db - pl_db


@dataclass
class Topology:
    """One drop's node layout plus the precomputed received-power matrix.

    ``rx_dbm[i, j]`` is the power (dBm) node ``j`` receives when node ``i``
    transmits; node ids index the matrix directly.
    """

    geometry: FloorGeometry
    nodes: List[NodePosition]
    rx_dbm: np.ndarray = field(repr=False)

    def of_kind(self, kind: NodeKind) -> List[NodePosition]:
        return [n for n in self.nodes if n.kind is kind]

    @property
    def pico(self) -> NodePosition:
        return self.of_kind(NodeKind.PICO)[0]

    @property
    def aps(self) -> List[NodePosition]:
        return self.of_kind(NodeKind.AP)

    @property
    def lte_users(self) -> List[NodePosition]:
        return self.of_kind(NodeKind.LTE_USER)

    @property
    def wlan_users(self) -> List[NodePosition]:
        return self.of_kind(NodeKind.WLAN_USER)


def build_topology(
    plan: FloorPlan,
    model: PathlossModel,
    rng: np.random.Generator,
    n_lte: int = 10,
    n_wlan: int = 10,
    tx_power_dbm: float = 23.0,
    antenna_gain_db: float = 3.0,
    min_infra_distance: float = 10.0,
    infra_height: float = 3.0,
    user_height: float = 1.5,
) -> Topology:
    geometry = generate_floor(plan)
    infra = place_infrastructure(geometry, rng, min_distance=min_infra_distance, height=infra_height)
    users = place_users(geometry, n_lte, n_wlan, rng, height=user_height, first_id=len(infra))
    nodes = infra + users
    n = len(nodes)
    rx = np.empty((n, n))
    for i in range(n):
        rx[i, i] = np.inf
        for j in range(i + 1, n):
            p = received_power(tx_power_dbm, path_loss(nodes[i], nodes[j], model, geometry), antenna_gain_db)
            rx[i, j] = rx[j, i] = p
    return Topology(geometry, nodes, rx)


def write_positions_csv(nodes: Iterable[NodePosition], path) -> None:
    """Dump node positions for debugging."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node_id", "kind", "x_m", "y_m", "z_m"])
        for n in nodes:
            w.writerow([n.node_id, n.kind.value, f"{n.x:.6g}", f"{n.y:.6g}", f"{n.z:.6g}"])
