"""Per-mini-slot URLLC admission over pre-scheduled eMBB traffic.

The contract scheme runs matching, picks each packet's contract item, asks
the superposition gate, and sizes URLLC power. The puncturing baseline runs
the same flow but always punctures; the no-URLLC baseline ignores URLLC.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from . import kernels, phy
from .contract import (
    ContractItem,
    PairContext,
    PricingConfig,
    TypeLadder,
    bs_utility,
    classify_type,
    design_bundle,
    superposition_gate,
    urllc_utility,
)
from .frame import EMBB, URLLC, FrameConfig, FrameGrid, Mode, UserProfile, assign_embb
from .matching import Matching, build_embb_prefs, build_urllc_prefs, deferred_acceptance
from .phy import LinkState, RadioParams

SCHEMES = ("contract", "puncture", "nourllc")
POWER_RTOL = 1e-6


class PowerInfeasible(ValueError):
    """The rate target is out of reach at the URLLC power cap."""


def required_rate(params: RadioParams, frame: FrameConfig) -> float:
    """One packet delivered inside one mini-slot."""
    return params.urllc_packet_bits / frame.mini_slot


def allocate_power(urllc_link: LinkState, params: RadioParams, target_rate: float) -> float:
    """Minimal URLLC power meeting ``target_rate`` on an interference-free link.

    Bisection on the monotone finite-blocklength rate, relative tolerance
    1e-6; the returned power always meets the target.
    """
    p = kernels.min_power(
        target_rate,
        urllc_link.gain,
        params.noise_power,
        params.rb_bandwidth,
        params.blocklength,
        phy.q_inverse(params.error_target),
        params.urllc_max_power,
        POWER_RTOL,
    )
    if p < 0:
        raise PowerInfeasible(
            f"{target_rate:.4g} bit/s unreachable at {params.urllc_max_power} W (d={urllc_link.distance:.1f} m)"
        )
    return p


@dataclass
class Request:
    rid: int
    user: int
    arrival_slot: int


@dataclass(frozen=True)
class Decision:
    rid: int
    user: int
    rb: int
    slot: int
    arrival_slot: int
    scheme: Mode
    power: float
    item: ContractItem | None
    embb_partner: int | None
    rate: float
    utility: float
    reliable: bool = True


@dataclass(frozen=True)
class Drop:
    rid: int
    user: int
    arrival_slot: int
    reason: str


@dataclass
class MetricSet:
    embb_sum_rate: float = 0.0
    bs_profit: float = 0.0
    urllc_network_utility: float = 0.0
    drops: int = 0
    superposed: int = 0
    punctured: int = 0
    scheduled: int = 0
    arrivals: int = 0
    reliability_violations: int = 0
    latency_violations: int = 0
    ttis: int = 0


@dataclass
class ScheduleOutcome:
    grid: FrameGrid
    matching: Matching
    decisions: dict[int, Decision] = field(default_factory=dict)  # rid -> decision
    drops: list[Drop] = field(default_factory=list)


def objective_value(grid: FrameGrid, links: Mapping[int, LinkState], params: RadioParams, frame: FrameConfig) -> float:
    """eMBB bits delivered over one TTI on this grid.

    Punctured mini-slots carry nothing; superposed ones carry the eMBB rate
    under URLLC interference.
    """
    t = frame.mini_slot
    total = 0.0
    for rb in range(grid.rb_count):
        owner = grid.owner(rb)
        if owner is None:
            continue
        e_link = links[owner]
        clean = phy.embb_rate_clean(e_link, params)
        for cell in grid.cells[rb]:
            if cell.mode is Mode.NONE:
                total += t * clean
            elif cell.mode is Mode.SUPERPOSE:
                total += t * phy.embb_rate_superposed(e_link, links[cell.urllc_occupant], cell.urllc_power, params)
    return total


def tti_accounting(
    grid: FrameGrid,
    decisions: Sequence[Decision],
    links: Mapping[int, LinkState],
    params: RadioParams,
    frame: FrameConfig,
    pricing: PricingConfig,
) -> tuple[float, float, float]:
    """(eMBB volume, BS profit, URLLC utility) for one closed TTI."""
    t = frame.mini_slot
    volume = 0.0
    embb_payments = []
    embb_rates = []
    for rb in range(grid.rb_count):
        owner = grid.owner(rb)
        if owner is None:
            continue
        e_link = links[owner]
        clean = phy.embb_rate_clean(e_link, params)
        rb_volume = 0.0
        for cell in grid.cells[rb]:
            if cell.mode is Mode.NONE:
                rate = clean
            elif cell.mode is Mode.SUPERPOSE:
                rate = phy.embb_rate_superposed(e_link, links[cell.urllc_occupant], cell.urllc_power, params)
            else:
                rate = 0.0
            rb_volume += t * rate
            if pricing.embb_billing == "volume":
                embb_payments.append(pricing.beta_e * rate / clean)
            elif cell.mode is not Mode.PUNCTURE:
                embb_payments.append(pricing.beta_e)
        volume += rb_volume
        embb_rates.append(rb_volume / frame.embb_tti)
    profit = bs_utility(
        urllc_payments=[d.item.price for d in decisions if d.item is not None],
        embb_payments=embb_payments,
        urllc_rates=[d.rate for d in decisions],
        embb_rates=embb_rates,
        xi=pricing.xi,
        zeta=pricing.zeta,
        cost_per_bps=pricing.cost_per_bps,
        incentives=[d.item.incentive for d in decisions if d.scheme is Mode.SUPERPOSE and d.item is not None],
    )
    utility = sum(d.utility for d in decisions)
    return volume, profit, utility


class Scheduler:
    """Owns one run's grid and pending queue.

    Call :meth:`schedule_minislot` once per mini-slot with the ids of the
    URLLC users whose packets arrived in it (repeat an id for several
    packets). Packets that find no free RB wait one mini-slot, then drop.
    """

    def __init__(
        self,
        users: Sequence[UserProfile],
        params: RadioParams,
        frame: FrameConfig,
        ladder: TypeLadder,
        pricing: PricingConfig | None = None,
        scheme: str = "contract",
        prefer_low_gain: bool = True,
        infeasible_policy: str = "drop",
    ):
        if scheme not in ("contract", "puncture"):
            raise ValueError(f"unknown scheme {scheme!r}")
        if infeasible_policy not in ("drop", "puncture_max"):
            raise ValueError(f"unknown infeasible policy {infeasible_policy!r}")
        self.params = params
        self.frame = frame
        self.ladder = ladder
        self.pricing = pricing or PricingConfig()
        self.scheme = scheme
        self.prefer_low_gain = prefer_low_gain
        self.infeasible_policy = infeasible_policy
        self.users = {u.id: u for u in users}
        self.links = {u.id: u.link(params) for u in users}
        embb = [u for u in users if u.role == EMBB]
        self.base_grid = assign_embb(FrameGrid.empty(frame), embb, params)
        self.required_rate = required_rate(params, frame)
        self.bundle = design_bundle(ladder, PairContext(self.required_rate, self.pricing))
        self.item_for = {item.type_value: item for item in self.bundle}
        self.types = {u.id: classify_type(u, ladder) for u in users if u.role == URLLC}
        self._power: dict[int, float | None] = {}
        self.grid = self.base_grid.fresh_copy()
        self.last_grid: FrameGrid | None = None
        self.slot = 0
        self._next_rid = 0
        self.pending: list[Request] = []
        self.decisions: list[Decision] = []
        self.drops: list[Drop] = []
        self.matchings: list[Matching] = []
        self.metrics = MetricSet()
        self._tti_decisions: list[Decision] = []
        self._volume = 0.0
        self._profit = 0.0
        self._utility = 0.0

    # -- helpers ---------------------------------------------------------
    def power_for(self, user: int) -> float | None:
        if user not in self._power:
            item = self.item_for[self.types[user]]
            try:
                self._power[user] = allocate_power(self.links[user], self.params, item.promised_rate)
            except PowerInfeasible:
                self._power[user] = None
        return self._power[user]

    def _drop(self, req: Request, reason: str) -> None:
        self.drops.append(Drop(req.rid, req.user, req.arrival_slot, reason))
        self.metrics.drops += 1

    # -- main step -------------------------------------------------------
    def schedule_minislot(self, arrivals: Sequence[int]) -> ScheduleOutcome:
        local = self.slot % self.frame.minislots_per_tti
        new = []
        for uid in sorted(arrivals):
            if self.users[uid].role != URLLC:
                raise ValueError(f"user {uid} is not a URLLC user")
            new.append(Request(self._next_rid, uid, self.slot))
            self._next_rid += 1
        self.metrics.arrivals += len(new)
        queue = self.pending + new
        self.pending = []
        outcome = ScheduleOutcome(self.grid, Matching())

        admitted: list[tuple[Request, float, bool]] = []
        for req in queue:
            power = self.power_for(req.user)
            if power is None:
                if self.infeasible_policy == "drop":
                    self._drop(req, "power")
                    outcome.drops.append(self.drops[-1])
                    continue
                admitted.append((req, self.params.urllc_max_power, False))
            else:
                admitted.append((req, power, True))

        free = self.grid.free_rbs(local)
        for req, _, _ in admitted[len(free):]:
            if req.arrival_slot == self.slot:
                self.pending.append(req)
            else:
                self._drop(req, "capacity")
                outcome.drops.append(self.drops[-1])
        admitted = admitted[: len(free)]

        if admitted:
            owner_rbs: dict[int, list[int]] = {}
            for rb in free:
                owner_rbs.setdefault(self.grid.owner(rb), []).append(rb)
            matching = self._match(admitted, owner_rbs)
            outcome.matching = matching
            self.matchings.append(matching)
            taken: set[int] = set()
            placements = []
            for req, power, reliable in admitted:
                partner = matching.embb_of(req.rid)
                rb = None
                if partner is not None:
                    rb = next(r for r in owner_rbs[partner] if r not in taken)
                placements.append((req, power, reliable, partner, rb))
                if rb is not None:
                    taken.add(rb)
            leftovers = [rb for rb in free if rb not in taken]
            for req, power, reliable, partner, rb in placements:
                if rb is None:
                    rb = leftovers.pop(0)
                decision = self._decide(req, power, reliable, partner, rb, local)
                outcome.decisions[req.rid] = decision

        self.slot += 1
        if local == self.frame.minislots_per_tti - 1:
            self._close_tti()
        return outcome

    def _match(self, admitted, owner_rbs) -> Matching:
        embb_links = {e: self.links[e] for e in owner_rbs}
        types = {req.rid: self.types[req.user] for req, _, _ in admitted}
        urllc_prefs = [
            build_urllc_prefs(self.users[req.user], embb_links, self.prefer_low_gain, owner=req.rid)
            for req, _, _ in admitted
        ]
        embb_prefs = [build_embb_prefs(self.users[e], types) for e in sorted(owner_rbs)]
        return deferred_acceptance(embb_prefs, urllc_prefs)

    def _decide(self, req, power, reliable, partner, rb, local) -> Decision:
        theta = self.types[req.user]
        item = self.item_for[theta]
        u_link = self.links[req.user]
        mode = Mode.PUNCTURE
        if self.scheme == "contract" and reliable:
            threshold = superposition_gate(
                self.links[partner] if partner is not None else None,
                u_link,
                power,
                item.promised_rate,
                self.required_rate,
                self.params,
                self.ladder,
            )
            if theta >= threshold:
                mode = Mode.SUPERPOSE
        self.grid.place(rb, local, req.user, mode, power)
        rate = phy.urllc_rate(power, u_link, self.params)
        decision = Decision(
            rid=req.rid,
            user=req.user,
            rb=rb,
            slot=self.slot,
            arrival_slot=req.arrival_slot,
            scheme=mode,
            power=power,
            item=item,
            embb_partner=partner,
            rate=rate,
            utility=urllc_utility(item, mode, theta),
            reliable=reliable,
        )
        self.decisions.append(decision)
        self._tti_decisions.append(decision)
        m = self.metrics
        m.scheduled += 1
        if mode is Mode.SUPERPOSE:
            m.superposed += 1
        else:
            m.punctured += 1
        if rate < self.required_rate:
            m.reliability_violations += 1
        if not 0 <= decision.slot - decision.arrival_slot <= 1:
            m.latency_violations += 1
        return decision

    def _close_tti(self) -> None:
        volume, profit, utility = tti_accounting(
            self.grid, self._tti_decisions, self.links, self.params, self.frame, self.pricing
        )
        self._volume += volume
        self._profit += profit
        self._utility += utility
        self.metrics.ttis += 1
        self._tti_decisions = []
        self.last_grid = self.grid
        self.grid = self.base_grid.fresh_copy()

    def finish(self) -> MetricSet:
        """Close a partial TTI, drop anything still waiting, return averages per TTI."""
        if self.slot % self.frame.minislots_per_tti:
            raise ValueError("finish() must be called on a TTI boundary")
        for req in self.pending:
            self._drop(req, "end_of_run")
        self.pending = []
        m = self.metrics
        n = max(m.ttis, 1)
        m.embb_sum_rate = self._volume / (n * self.frame.embb_tti)
        m.bs_profit = self._profit / n
        m.urllc_network_utility = self._utility / n
        return m


def run_scheme(
    users: Sequence[UserProfile],
    arrivals: Mapping[int, Sequence[int]],
    n_ttis: int,
    params: RadioParams,
    frame: FrameConfig,
    ladder: TypeLadder,
    pricing: PricingConfig | None = None,
    scheme: str = "contract",
    **kwargs,
) -> Scheduler:
    """Drive a scheduler through ``n_ttis`` TTIs of per-user arrival counts."""
    if scheme == "nourllc":
        raise ValueError("use baseline_no_urllc for the no-URLLC scheme")
    sched = Scheduler(users, params, frame, ladder, pricing, scheme=scheme, **kwargs)
    slots = n_ttis * frame.minislots_per_tti
    by_slot: list[list[int]] = [[] for _ in range(slots)]
    for uid, counts in arrivals.items():
        for s in range(slots):
            k = int(counts[s])
            if k:
                by_slot[s].extend([uid] * k)
    for s in range(slots):
        sched.schedule_minislot(by_slot[s])
    sched.finish()
    return sched


def baseline_puncture(users, arrivals, n_ttis, params, frame, ladder, pricing=None, **kwargs) -> Scheduler:
    return run_scheme(users, arrivals, n_ttis, params, frame, ladder, pricing, scheme="puncture", **kwargs)


def baseline_no_urllc(
    users: Sequence[UserProfile],
    params: RadioParams,
    frame: FrameConfig,
    pricing: PricingConfig | None = None,
    n_ttis: int = 1,
) -> MetricSet:
    """eMBB alone: every RB carries its owner's clean rate for the whole TTI.

    Per-TTI sums are accumulated in the same order as :class:`Scheduler`,
    so a URLLC-free run of either scheme reproduces these numbers exactly.
    """
    pricing = pricing or PricingConfig()
    links = {u.id: u.link(params) for u in users}
    grid = assign_embb(FrameGrid.empty(frame), [u for u in users if u.role == EMBB], params)
    volume, profit, _ = tti_accounting(grid, [], links, params, frame, pricing)
    n = max(n_ttis, 1)
    total_volume = total_profit = 0.0
    for _ in range(n):
        total_volume += volume
        total_profit += profit
    return MetricSet(embb_sum_rate=total_volume / (n * frame.embb_tti), bs_profit=total_profit / n, ttis=n)
