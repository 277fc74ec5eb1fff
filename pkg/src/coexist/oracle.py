"""Exhaustive ground truth on tiny instances.

Everything here enumerates: placements, modes and discrete powers for the
eMBB-volume optimum; all one-to-one matchings for stability; all discrete
power vectors for the BS-profit/eMBB-volume comparison.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import stats

from . import kernels, phy
from .contract import InfeasibleContract, PairContext, PricingConfig, TypeLadder, design_bundle
from .frame import EMBB, URLLC, FrameConfig, FrameGrid, Mode, UserProfile, assign_embb
from .matching import Matching, PreferenceProfile
from .phy import RadioParams
from .scheduler import Scheduler, objective_value, required_rate, tti_accounting

MAX_EMBB = 3
MAX_URLLC = 3
MAX_RBS = 4
MAX_MINISLOTS = 8
MAX_POWER_LEVELS = 8
MINI_SLOT = 1.25e-4


def default_power_grid(pmax: float, levels: int = 8, floor: float = 1e-6) -> tuple[float, ...]:
    """Log-spaced levels from 1 uW up to (exactly) the power cap."""
    grid = np.geomspace(floor, pmax, levels)
    grid[-1] = pmax
    return tuple(float(p) for p in grid)


@dataclass(frozen=True)
class TinyInstance:
    users: tuple[UserProfile, ...]
    arrivals: tuple[tuple[int, int], ...]  # (URLLC user id, mini-slot)
    rb_count: int
    minislots: int
    power_grid: tuple[float, ...]

    def __post_init__(self):
        n_e = sum(u.role == EMBB for u in self.users)
        n_u = sum(u.role == URLLC for u in self.users)
        if not (1 <= n_e <= MAX_EMBB and n_u <= MAX_URLLC):
            raise ValueError("tiny instances hold 1-3 eMBB and at most 3 URLLC users")
        if not (1 <= self.rb_count <= MAX_RBS and 1 <= self.minislots <= MAX_MINISLOTS):
            raise ValueError("tiny instances hold at most 4 RBs and 8 mini-slots")
        if not 1 <= len(self.power_grid) <= MAX_POWER_LEVELS:
            raise ValueError("power grid must have 1-8 levels")
        ids = {u.id for u in self.users if u.role == URLLC}
        for uid, slot in self.arrivals:
            if uid not in ids or not 0 <= slot < self.minislots:
                raise ValueError(f"bad arrival ({uid}, {slot})")

    def frame(self) -> FrameConfig:
        return FrameConfig(embb_tti=self.minislots * MINI_SLOT, mini_slot=MINI_SLOT, rb_count=self.rb_count)

    def arrival_counts(self) -> dict[int, np.ndarray]:
        counts = {u.id: np.zeros(self.minislots, dtype=np.int64) for u in self.users if u.role == URLLC}
        for uid, slot in self.arrivals:
            counts[uid][slot] += 1
        return counts


def random_tiny_instance(rng: np.random.Generator, params: RadioParams, radius: float = 1000.0) -> TinyInstance:
    """Random instance the heuristic can serve without drops.

    Distances are log-uniform so that eMBB users near the BS, where the
    superposition check bites, show up regularly.
    """
    n_e = int(rng.integers(1, MAX_EMBB + 1))
    rb_count = int(rng.integers(1, MAX_RBS + 1))
    minislots = int(rng.integers(2, MAX_MINISLOTS + 1))
    # the last mini-slot stays free so every packet has a spare slot
    n_u = min(int(rng.integers(1, MAX_URLLC + 1)), rb_count * (minislots - 1))
    users = []
    for i in range(n_e + n_u):
        d = float(np.exp(rng.uniform(0.0, np.log(radius))))
        phi = float(rng.uniform(0.0, 2 * np.pi))
        users.append(UserProfile(i, EMBB if i < n_e else URLLC, d * math.cos(phi), d * math.sin(phi)))
    # at most rb_count arrivals per mini-slot, so the heuristic never queues
    while True:
        slots = [int(rng.integers(0, minislots - 1)) for _ in range(n_u)]
        if max(np.bincount(slots)) <= rb_count:
            break
    arrivals = tuple((n_e + j, s) for j, s in enumerate(slots))
    return TinyInstance(tuple(users), arrivals, rb_count, minislots, default_power_grid(params.urllc_max_power))


@dataclass
class OracleResult:
    objective: float
    assignment: dict[int, tuple[int, int, Mode, float]]  # arrival index -> (slot, rb, mode, power)
    feasible: bool
    violated: str | None = None
    n_feasible: int = 0


@dataclass
class _Options:
    loss: np.ndarray
    cell: np.ndarray
    meta: list[list[tuple[int, int, Mode, float] | None]]
    base: float


def _build_options(inst: TinyInstance, params: RadioParams) -> tuple[_Options, FrameGrid]:
    frame = inst.frame()
    t = frame.mini_slot
    links = {u.id: u.link(params) for u in inst.users}
    grid = assign_embb(FrameGrid.empty(frame), [u for u in inst.users if u.role == EMBB], params)
    need = required_rate(params, frame)
    clean = [phy.embb_rate_clean(links[grid.owner(rb)], params) for rb in range(inst.rb_count)]
    base = sum(t * clean[rb] for rb in range(inst.rb_count) for _ in range(inst.minislots))
    n_opts = 2 * inst.rb_count * 2 * len(inst.power_grid)
    loss = np.full((len(inst.arrivals), n_opts), np.inf)
    cell = np.full((len(inst.arrivals), n_opts), -1, dtype=np.int64)
    meta: list[list] = []
    for r, (uid, arrival) in enumerate(inst.arrivals):
        u_link = links[uid]
        row_meta = []
        k = 0
        for slot in (arrival, arrival + 1):
            for rb in range(inst.rb_count):
                e_link = links[grid.owner(rb)]
                for mode in (Mode.SUPERPOSE, Mode.PUNCTURE):
                    for p in inst.power_grid:
                        ok = slot < inst.minislots and phy.urllc_rate(p, u_link, params) >= need
                        if ok and mode is Mode.SUPERPOSE:
                            gamma = phy.urllc_sinr_with_embb_interference(e_link, u_link, p, params)
                            ok = phy.shannon_rate(gamma, params.rb_bandwidth) >= need
                        if ok:
                            kept = phy.embb_rate_superposed(e_link, u_link, p, params) if mode is Mode.SUPERPOSE else 0.0
                            loss[r, k] = t * (clean[rb] - kept)
                            cell[r, k] = rb * inst.minislots + slot
                            row_meta.append((slot, rb, mode, p))
                        else:
                            row_meta.append(None)
                        k += 1
        meta.append(row_meta)
    return _Options(loss, cell, meta, base), grid


def solve_milp_bruteforce(inst: TinyInstance, params: RadioParams) -> OracleResult:
    """Best eMBB volume over every placement, mode and grid power.

    Each arrival takes one cell in its own or the next mini-slot, at most
    one URLLC packet per cell, the finite-blocklength rate must reach the
    per-mini-slot requirement, and superposition additionally needs the
    URLLC stream to be decodable over the uncancelled eMBB signal.
    """
    opts, _ = _build_options(inst, params)
    if not inst.arrivals:
        return OracleResult(opts.base, {}, True, None, 1)
    for r in range(len(inst.arrivals)):
        if not np.isfinite(opts.loss[r]).any():
            return OracleResult(-math.inf, {}, False, "reliability (rate requirement unreachable)", 0)
    best, choice, n_feasible = kernels.best_assignment(opts.loss, opts.cell)
    if choice is None:
        return OracleResult(-math.inf, {}, False, "assignment (no collision-free placement)", 0)
    assignment = {r: opts.meta[r][k] for r, k in enumerate(choice)}
    return OracleResult(opts.base - best, assignment, True, None, n_feasible)


def _run_heuristic(inst, params, ladder, pricing, scheme) -> Scheduler:
    frame = inst.frame()
    sched = Scheduler(list(inst.users), params, frame, ladder, pricing, scheme=scheme)
    counts = inst.arrival_counts()
    for s in range(inst.minislots):
        arrivals = [uid for uid, c in counts.items() for _ in range(int(c[s]))]
        sched.schedule_minislot(arrivals)
    sched.finish()
    return sched


@dataclass
class DominanceRecord:
    heuristic: float
    puncture: float
    oracle: float
    allowance: float
    rounded_feasible: bool
    drops: int

    @property
    def dominance_ok(self) -> bool:
        slack = 1e-9 * max(abs(self.oracle), 1.0)
        return self.heuristic <= self.oracle + self.allowance + slack

    @property
    def contract_ge_puncture(self) -> bool:
        return self.heuristic >= self.puncture - 1e-9 * max(abs(self.puncture), 1.0)


def compare_on_instance(
    inst: TinyInstance,
    params: RadioParams,
    ladder: TypeLadder | None = None,
    pricing: PricingConfig | None = None,
) -> DominanceRecord:
    """Heuristic and puncturing volumes against the enumerated optimum.

    The allowance is what the heuristic gains from continuous power over
    the same decisions with each power rounded up to the next grid level;
    that rounded assignment is itself in the oracle's search space.
    """
    ladder = ladder or TypeLadder.equal_width(4, 1000.0)
    contract = _run_heuristic(inst, params, ladder, pricing, "contract")
    punct = _run_heuristic(inst, params, ladder, pricing, "puncture")
    frame = inst.frame()
    links = {u.id: u.link(params) for u in inst.users}
    h_obj = objective_value(contract.last_grid, links, params, frame)
    p_obj = objective_value(punct.last_grid, links, params, frame)
    oracle = solve_milp_bruteforce(inst, params)

    opts, _ = _build_options(inst, params)
    rounded_loss = 0.0
    rounded_ok = True
    used = set()
    order = sorted(range(len(inst.arrivals)), key=lambda r: inst.arrivals[r])
    by_request = {}
    for d in contract.decisions:
        by_request.setdefault((d.user, d.arrival_slot), []).append(d)
    for r in order:
        uid, arrival = inst.arrivals[r]
        d = by_request[(uid, arrival)].pop(0)
        level = next(p for p in inst.power_grid if p >= d.power)
        key = (d.slot, d.rb, d.scheme, level)
        k = next((k for k, m in enumerate(opts.meta[r]) if m == key), None)
        if k is None or (d.rb, d.slot) in used:
            rounded_ok = False
            continue
        used.add((d.rb, d.slot))
        rounded_loss += opts.loss[r, k]
    allowance = max(0.0, h_obj - (opts.base - rounded_loss)) if rounded_ok else 0.0
    return DominanceRecord(h_obj, p_obj, oracle.objective, allowance, rounded_ok, contract.metrics.drops)


def candidate_count(n: int, m: int) -> int:
    """Number of one-to-one partial matchings between sides of size n and m."""
    return sum(math.comb(n, k) * math.comb(m, k) * math.factorial(k) for k in range(min(n, m) + 1))


def stable_matching_census(
    embb_prefs: Sequence[PreferenceProfile], urllc_prefs: Sequence[PreferenceProfile]
) -> tuple[list[Matching], int]:
    """All stable matchings plus the number of candidate matchings checked."""
    e_ids = sorted(p.owner for p in embb_prefs)
    u_ids = sorted(p.owner for p in urllc_prefs)
    e_by = {p.owner: p for p in embb_prefs}
    u_by = {p.owner: p for p in urllc_prefs}

    def rank(profile: PreferenceProfile, other: int) -> int:
        return profile.ranked.index(other) if other in profile.ranked else -1

    rank_e = [[rank(e_by[e], u) for u in u_ids] for e in e_ids]
    rank_u = [[rank(u_by[u], e) for e in e_ids] for u in u_ids]
    found, checked = kernels.stable_matchings(rank_e, rank_u)
    matchings = [
        Matching({e_ids[i]: u_ids[j] for i, j in enumerate(partners) if j >= 0}) for partners in found
    ]
    return matchings, checked


def enumerate_stable_matchings(
    embb_prefs: Sequence[PreferenceProfile], urllc_prefs: Sequence[PreferenceProfile]
) -> list[Matching]:
    if len(embb_prefs) > 6 or len(urllc_prefs) > 6:
        raise ValueError("exhaustive enumeration is limited to 6 users per side")
    return stable_matching_census(embb_prefs, urllc_prefs)[0]


@dataclass
class EquivalenceReport:
    feasible: bool
    reason: str | None = None
    assignments: int = 0
    maximizer_powers: tuple[float, ...] = ()
    maximizer_p9_feasible: bool = False
    maximizer_p9_objective: float = math.nan
    p9_range: tuple[float, float] = (math.nan, math.nan)
    correlation: float = math.nan
    degenerate: bool = False
    notes: list[str] = field(default_factory=list)


def check_equivalence_property(
    inst: TinyInstance,
    params: RadioParams,
    ladder: TypeLadder | None = None,
    pricing: PricingConfig | None = None,
) -> EquivalenceReport:
    """Compare BS profit and eMBB volume across every grid power vector.

    Placement and modes come from the contract heuristic. A power vector is
    admissible for the profit problem when every packet gets its promised
    rate; it is feasible for the volume problem when it meets the
    reliability requirement and, for superposed packets, the decodability
    check.
    """
    ladder = ladder or TypeLadder.equal_width(4, 1000.0)
    pricing = pricing or PricingConfig()
    frame = inst.frame()
    need = required_rate(params, frame)
    try:
        design_bundle(ladder, PairContext(need, pricing))
    except InfeasibleContract as exc:
        return EquivalenceReport(False, f"contract infeasible: {exc}")
    sched = _run_heuristic(inst, params, ladder, pricing, "contract")
    decisions = list(sched.decisions)
    links = sched.links
    rows = []
    for powers in itertools.product(inst.power_grid, repeat=len(decisions)):
        grid = sched.base_grid.fresh_copy()
        priced = []
        p14_ok = True
        p9_ok = True
        for d, p in zip(decisions, powers):
            grid.place(d.rb, d.slot, d.user, d.scheme, p)
            rate = phy.urllc_rate(p, links[d.user], params)
            if rate < d.item.promised_rate:
                p14_ok = False
            if rate < need:
                p9_ok = False
            if d.scheme is Mode.SUPERPOSE:
                gamma = phy.urllc_sinr_with_embb_interference(links[d.embb_partner], links[d.user], p, params)
                if phy.shannon_rate(gamma, params.rb_bandwidth) < need:
                    p9_ok = False
            priced.append(_with_power(d, p, rate))
        if not p14_ok:
            continue
        _, profit, _ = tti_accounting(grid, priced, links, params, frame, pricing)
        volume = objective_value(grid, links, params, frame)
        rows.append((profit, volume, p9_ok, powers))
    report = EquivalenceReport(True, assignments=len(rows))
    if not rows:
        report.feasible = False
        report.reason = "no power vector delivers every promised rate"
        return report
    best = max(range(len(rows)), key=lambda i: (rows[i][0], -i))
    profit, volume, p9_ok, powers = rows[best]
    report.maximizer_powers = powers
    report.maximizer_p9_feasible = p9_ok
    report.maximizer_p9_objective = volume
    p9_values = [r[1] for r in rows if r[2]]
    if p9_values:
        report.p9_range = (min(p9_values), max(p9_values))
    profits = np.array([r[0] for r in rows])
    volumes = np.array([r[1] for r in rows])
    if len(rows) < 2 or np.ptp(profits) <= 1e-12 * max(1.0, np.abs(profits).max()) or np.ptp(volumes) == 0.0:
        report.degenerate = True
        report.notes.append("an objective is constant over the admissible set; correlation undefined")
    else:
        report.correlation = float(stats.spearmanr(profits, volumes).statistic)
    return report


def _with_power(d, p, rate):
    from dataclasses import replace

    return replace(d, power=p, rate=rate)
