"""Frame bookkeeping, user placement and URLLC arrivals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .phy import LinkState, RadioParams

EMBB = "embb"
URLLC = "urllc"

# child-stream tags for seed expansion
_STREAM_EMBB = 1
_STREAM_URLLC = 2
_STREAM_ARRIVALS = 3


def rng_for(*key: int) -> np.random.Generator:
    """Independent generator for an integer key tuple (order-free seed splitting)."""
    return np.random.default_rng(np.random.SeedSequence([int(k) for k in key]))


@dataclass(frozen=True)
class FrameConfig:
    embb_tti: float = 1e-3
    mini_slot: float = 1.25e-4
    rb_count: int = 8

    def __post_init__(self):
        if self.rb_count < 1:
            raise ValueError("rb_count must be >= 1")
        if not (self.embb_tti > 0 and self.mini_slot > 0):
            raise ValueError("durations must be positive")
        ratio = self.embb_tti / self.mini_slot
        if abs(ratio - round(ratio)) > 1e-9 * ratio or round(ratio) < 1:
            raise ValueError("the eMBB TTI must be an integer multiple of the mini-slot")

    @property
    def minislots_per_tti(self) -> int:
        return int(round(self.embb_tti / self.mini_slot))


@dataclass(frozen=True)
class UserProfile:
    id: int
    role: str
    x: float
    y: float

    @property
    def distance_to_bs(self) -> float:
        return max(math.hypot(self.x, self.y), 1.0)

    def link(self, params: RadioParams | None = None) -> LinkState:
        if self.role == EMBB:
            return LinkState.embb(self.distance_to_bs, params)
        return LinkState.urllc(self.distance_to_bs, params)


class Mode(str, Enum):
    NONE = "none"
    SUPERPOSE = "superpose"
    PUNCTURE = "puncture"


@dataclass
class Cell:
    embb_owner: int | None = None
    urllc_occupant: int | None = None
    mode: Mode = Mode.NONE
    urllc_power: float = 0.0

    @property
    def x(self) -> int:
        return int(self.mode is Mode.SUPERPOSE)

    @property
    def z(self) -> int:
        return int(self.mode is Mode.PUNCTURE)


@dataclass
class FrameGrid:
    rb_count: int
    minislots: int
    cells: list[list[Cell]] = field(default_factory=list)

    def __post_init__(self):
        if not self.cells:
            self.cells = [[Cell() for _ in range(self.minislots)] for _ in range(self.rb_count)]

    @classmethod
    def empty(cls, frame: FrameConfig) -> "FrameGrid":
        return cls(frame.rb_count, frame.minislots_per_tti)

    def owner(self, rb: int) -> int | None:
        return self.cells[rb][0].embb_owner

    def set_owner(self, rb: int, user_id: int) -> None:
        for cell in self.cells[rb]:
            cell.embb_owner = user_id

    def free_rbs(self, slot: int) -> list[int]:
        return [rb for rb in range(self.rb_count) if self.cells[rb][slot].urllc_occupant is None]

    def place(self, rb: int, slot: int, urllc_id: int, mode: Mode, power: float) -> None:
        cell = self.cells[rb][slot]
        if cell.urllc_occupant is not None:
            raise ValueError(f"cell ({rb}, {slot}) already holds URLLC user {cell.urllc_occupant}")
        if mode is Mode.NONE:
            raise ValueError("a placed URLLC packet needs a superpose or puncture mode")
        cell.urllc_occupant = urllc_id
        cell.mode = mode
        cell.urllc_power = power

    def fresh_copy(self) -> "FrameGrid":
        """Same eMBB ownership, no URLLC placements."""
        grid = FrameGrid(self.rb_count, self.minislots)
        for rb in range(self.rb_count):
            owner = self.owner(rb)
            if owner is not None:
                grid.set_owner(rb, owner)
        return grid

    def indicator_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        x = np.array([[c.x for c in row] for row in self.cells], dtype=np.int8)
        z = np.array([[c.z for c in row] for row in self.cells], dtype=np.int8)
        return x, z

    def occupied(self) -> Iterable[tuple[int, int, Cell]]:
        for rb, row in enumerate(self.cells):
            for slot, cell in enumerate(row):
                if cell.urllc_occupant is not None:
                    yield rb, slot, cell


def _uniform_disc(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    # one (u, v) pair per user keeps prefixes stable when n grows
    uv = rng.random((n, 2))
    r = radius * np.sqrt(uv[:, 0])
    phi = 2.0 * np.pi * uv[:, 1]
    r = np.maximum(r, 1.0)
    return np.column_stack([r * np.cos(phi), r * np.sin(phi)])


def generate_topology(seed: int, n_embb: int, n_urllc: int, radius: float) -> list[UserProfile]:
    """Users i.i.d. uniform on the disc; eMBB ids come first, URLLC ids follow.

    eMBB and URLLC positions come from separate streams, and the first k
    URLLC users are identical for any ``n_urllc >= k`` at the same seed.
    """
    if n_embb < 0 or n_urllc < 0:
        raise ValueError("user counts must be non-negative")
    if not radius > 0:
        raise ValueError("radius must be positive")
    users: list[UserProfile] = []
    for i, (x, y) in enumerate(_uniform_disc(rng_for(seed, _STREAM_EMBB), n_embb, radius)):
        users.append(UserProfile(i, EMBB, float(x), float(y)))
    for j, (x, y) in enumerate(_uniform_disc(rng_for(seed, _STREAM_URLLC), n_urllc, radius)):
        users.append(UserProfile(n_embb + j, URLLC, float(x), float(y)))
    return users


def draw_arrivals(seed: int, rate: float, minislots: int) -> list[int]:
    """Poisson(rate) arrival counts, one per mini-slot."""
    if rate < 0:
        raise ValueError("arrival rate must be non-negative")
    if rate == 0:
        return [0] * minislots
    return [int(k) for k in rng_for(seed, _STREAM_ARRIVALS).poisson(rate, size=minislots)]


def draw_user_arrivals(seed: int, rate: float, user_ids: Sequence[int], minislots: int) -> dict[int, np.ndarray]:
    """Per-user Poisson arrival streams, keyed so that adding users leaves
    existing streams unchanged."""
    if rate < 0:
        raise ValueError("arrival rate must be non-negative")
    out = {}
    for uid in user_ids:
        if rate == 0:
            out[uid] = np.zeros(minislots, dtype=np.int64)
        else:
            out[uid] = rng_for(seed, _STREAM_ARRIVALS, uid).poisson(rate, size=minislots)
    return out


def assign_embb(grid: FrameGrid, embb_users: Sequence[UserProfile], params: RadioParams | None = None) -> FrameGrid:
    """Pre-schedule eMBB users: the ``rb_count`` best-gain users, round robin over RBs."""
    if any(grid.owner(rb) is not None for rb in range(grid.rb_count)):
        raise ValueError("grid already has eMBB owners")
    if not embb_users:
        raise ValueError("no eMBB users to pre-schedule")
    ranked = sorted(embb_users, key=lambda u: (-u.link(params).gain, u.id))
    chosen = ranked[: grid.rb_count]
    for rb in range(grid.rb_count):
        grid.set_owner(rb, chosen[rb % len(chosen)].id)
    return grid
