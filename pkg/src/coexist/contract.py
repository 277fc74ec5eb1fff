"""Willingness types, contract bundles and the superpose/puncture decision."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from . import phy
from .frame import URLLC, Mode, UserProfile
from .phy import LinkState, RadioParams

#: threshold returned when superposition is infeasible; above every type
PUNCTURE_THRESHOLD = math.inf


class InfeasibleContract(ValueError):
    def __init__(self, violations: Sequence[str]):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


@dataclass(frozen=True)
class TypeLadder:
    tiers: tuple[float, ...]
    tier_radii: tuple[float, ...]

    def __post_init__(self):
        if not self.tiers or len(self.tiers) != len(self.tier_radii):
            raise ValueError("need one radius per tier")
        if any(a <= b for a, b in zip(self.tiers, self.tiers[1:])):
            raise ValueError("type values must be strictly descending")
        if any(a >= b for a, b in zip(self.tier_radii, self.tier_radii[1:])):
            raise ValueError("tier radii must be strictly increasing")

    @classmethod
    def equal_width(cls, n: int = 4, radius: float = 1000.0) -> "TypeLadder":
        """theta_n = (N - n + 1) / N on N rings of equal width."""
        tiers = tuple((n - k) / n for k in range(n))
        radii = tuple(radius * (k + 1) / n for k in range(n))
        return cls(tiers, radii)

    @property
    def size(self) -> int:
        return len(self.tiers)

    def index_of(self, type_value: float) -> int:
        return self.tiers.index(type_value)


@dataclass(frozen=True)
class ContractItem:
    type_value: float
    promised_rate: float  # bits/s
    price: float
    incentive: float

    def __post_init__(self):
        if self.promised_rate < 0 or self.incentive < 0:
            raise ValueError("promised rate and incentive must be non-negative")


@dataclass(frozen=True)
class UtilityReport:
    urllc_utility: float
    bs_utility: float
    scheme: Mode


@dataclass(frozen=True)
class PricingConfig:
    beta_u: float = 10.0
    beta_e: float = 1.0
    share: float = 0.5
    xi: float = 1.0
    zeta: float = 1.0
    cost_per_bps: float = 1e-8
    margin: float = 0.01
    rate_premium: float = 0.02
    mode: str = "screening"  # or "flat": every item priced at beta_u
    embb_billing: str = "volume"  # or "flat": beta_e per eMBB cell regardless of volume

    @property
    def incentive(self) -> float:
        return self.share * self.beta_e


@dataclass(frozen=True)
class PairContext:
    required_rate: float
    pricing: PricingConfig = field(default_factory=PricingConfig)


def classify_type(user: UserProfile, ladder: TypeLadder) -> float:
    if user.role != URLLC:
        raise ValueError("only URLLC users carry a willingness type")
    d = user.distance_to_bs
    for value, outer in zip(ladder.tiers, ladder.tier_radii):
        if d <= outer:
            return value
    raise ValueError(f"user {user.id} at {d:.1f} m lies beyond the outermost tier")


def superposition_gate(
    embb_link: LinkState | None,
    urllc_link: LinkState,
    p_u: float,
    promised_rate: float,
    required_rate: float,
    params: RadioParams,
    ladder: TypeLadder,
) -> float:
    """Threshold type for a matched pair.

    Returns the lowest type (always passable) when the URLLC link reaches
    ``required_rate`` at ``p_u`` and the URLLC stream, received with the
    uncancelled eMBB signal as interference, still carries
    ``promised_rate`` at Shannon capacity. Otherwise returns
    :data:`PUNCTURE_THRESHOLD`.
    """
    if embb_link is None or p_u <= 0:
        return PUNCTURE_THRESHOLD
    if phy.urllc_rate(p_u, urllc_link, params) < required_rate:
        return PUNCTURE_THRESHOLD
    gamma = phy.urllc_sinr_with_embb_interference(embb_link, urllc_link, p_u, params)
    if phy.shannon_rate(gamma, params.rb_bandwidth) < promised_rate:
        return PUNCTURE_THRESHOLD
    return ladder.tiers[-1]


def urllc_utility(item: ContractItem, scheme: Mode, type_value: float) -> float:
    """theta * y - price, plus the incentive when superposing (y in Mbit/s)."""
    value = type_value * item.promised_rate / 1e6 - item.price
    if scheme is Mode.SUPERPOSE:
        value += item.incentive
    return value


def bs_utility(
    urllc_payments: Sequence[float] = (),
    embb_payments: Sequence[float] = (),
    urllc_rates: Sequence[float] = (),
    embb_rates: Sequence[float] = (),
    xi: float = 1.0,
    zeta: float = 1.0,
    cost_per_bps: float = 1e-8,
    incentives: Sequence[float] = (),
) -> float:
    """Revenue from both services minus linear resource cost.

    Incentives paid to superposing URLLC users come out of the revenue.
    """
    revenue = sum(urllc_payments) + sum(embb_payments) - sum(incentives)
    cost = cost_per_bps * (sum(urllc_rates) + sum(embb_rates))
    return xi * revenue - zeta * cost


def design_bundle(ladder: TypeLadder, ctx: PairContext) -> list[ContractItem]:
    """One item per type, highest type first.

    Promised rates step up by ``rate_premium`` of the requirement per tier
    above the lowest. Screening prices bind the downward-adjacent incentive
    constraints, starting from the lowest type left with ``margin`` utility.
    """
    pricing = ctx.pricing
    n = ladder.size
    rates = [ctx.required_rate * (1.0 + pricing.rate_premium * (n - 1 - k)) for k in range(n)]
    if pricing.mode == "flat":
        prices = [pricing.beta_u] * n
    elif pricing.mode == "screening":
        prices = [0.0] * n
        last = n - 1
        prices[last] = ladder.tiers[last] * rates[last] / 1e6 - pricing.margin
        for k in range(last - 1, -1, -1):
            theta = ladder.tiers[k]
            prices[k] = theta * rates[k] / 1e6 - theta * rates[k + 1] / 1e6 + prices[k + 1]
    else:
        raise ValueError(f"unknown pricing mode {pricing.mode!r}")
    bundle = [ContractItem(t, y, p, pricing.incentive) for t, y, p in zip(ladder.tiers, rates, prices)]
    report = verify_feasibility(bundle, ladder)
    if not report.ok:
        raise InfeasibleContract(report.violations)
    return bundle


def utility_matrix(bundle: Sequence[ContractItem], ladder: TypeLadder, scheme: Mode = Mode.PUNCTURE) -> list[list[float]]:
    """Row n: utility of type n for each item in the bundle."""
    return [[urllc_utility(item, scheme, theta) for item in bundle] for theta in ladder.tiers]


@dataclass
class FeasibilityReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_feasibility(bundle: Sequence[ContractItem], ladder: TypeLadder, tol: float = 1e-9) -> FeasibilityReport:
    """Exhaustive IR / IC / rate-ordering check over all type-item pairs.

    Utilities are evaluated without the superposition incentive, the
    conservative case for participation. ``tol`` absorbs rounding on
    incentive constraints that bind by construction.
    """
    report = FeasibilityReport()
    if len(bundle) != ladder.size:
        report.violations.append(f"bundle has {len(bundle)} items for {ladder.size} types")
        return report
    u = utility_matrix(bundle, ladder)
    n = ladder.size
    for i in range(n):
        if not bundle[i].price > 0:
            report.violations.append(f"price: item {i + 1} price {bundle[i].price:.6g} <= 0")
        if not u[i][i] > 0:
            report.violations.append(f"IR: type {i + 1} utility {u[i][i]:.6g} <= 0")
        for j in range(n):
            if j != i and u[i][j] > u[i][i] + tol:
                report.violations.append(f"IC: type {i + 1} prefers item {j + 1}")
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if (u[i][i] > u[j][j]) != (bundle[i].promised_rate > bundle[j].promised_rate):
                report.violations.append(f"ordering: types {i + 1},{j + 1} utility and rate disagree")
    return report
