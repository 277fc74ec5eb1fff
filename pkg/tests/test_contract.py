import math
from dataclasses import replace

import pytest
from hypothesis import given
from hypothesis import strategies as st

from coexist.contract import (
    PUNCTURE_THRESHOLD,
    ContractItem,
    InfeasibleContract,
    PairContext,
    PricingConfig,
    TypeLadder,
    bs_utility,
    classify_type,
    design_bundle,
    superposition_gate,
    urllc_utility,
    utility_matrix,
    verify_feasibility,
)
from coexist.frame import EMBB, URLLC, Mode, UserProfile
from coexist.phy import LinkState, RadioParams
from coexist.scheduler import allocate_power

LADDER = TypeLadder.equal_width(4, 1000.0)
REQ = 6.4e6


def _u(d):
    return UserProfile(9, URLLC, d, 0.0)


@pytest.mark.parametrize("d, tier", [(10.0, 1.0), (1000.0, 0.25), (510.0, 0.5), (250.0, 1.0), (250.1, 0.75)])
def test_classify(d, tier):
    assert classify_type(_u(d), LADDER) == tier


def test_classify_errors():
    with pytest.raises(ValueError):
        classify_type(_u(1000.5), LADDER)
    with pytest.raises(ValueError):
        classify_type(UserProfile(1, EMBB, 10.0, 0.0), LADDER)


def test_ladder_validation():
    assert LADDER.tiers == (1.0, 0.75, 0.5, 0.25)
    with pytest.raises(ValueError):
        TypeLadder((0.5, 1.0), (1.0, 2.0))


def test_gate_superposes_near_urllc_far_embb():
    params = RadioParams.macro_cell()
    u, e = LinkState.urllc(10.0), LinkState.embb(900.0)
    p = allocate_power(u, params, REQ)
    assert superposition_gate(e, u, p, REQ, REQ, params, LADDER) == LADDER.tiers[-1]


def test_gate_equal_gains_punctures():
    params = RadioParams.macro_cell()
    link = LinkState(100.0, 80.0, 1e-8)
    p = params.embb_tx_power
    assert superposition_gate(link, link, p, REQ, REQ, params, LADDER) == PUNCTURE_THRESHOLD


def test_gate_zero_power_punctures():
    params = RadioParams.macro_cell()
    assert superposition_gate(LinkState.embb(900.0), LinkState.urllc(10.0), 0.0, REQ, REQ, params, LADDER) == math.inf


def test_utility_values():
    item = ContractItem(1.0, 6.4e6, 2.0, 0.5)
    assert urllc_utility(item, Mode.SUPERPOSE, 1.0) == pytest.approx(4.9)
    assert urllc_utility(item, Mode.PUNCTURE, 1.0) == pytest.approx(4.4)
    assert urllc_utility(ContractItem(1.0, 0.0, 2.0, 0.5), Mode.PUNCTURE, 1.0) < 0


def test_bs_utility():
    assert bs_utility() == 0.0
    assert bs_utility([10.0], [1.0], [6.4e6], [1e5], cost_per_bps=0.0) == 11.0
    # two of each, default costs, one incentive paid
    value = bs_utility([2.0, 3.0], [1.0, 0.5], [6.4e6, 6.5e6], [2e5, 3e5], incentives=[0.5])
    assert value == pytest.approx(2.0 + 3.0 + 1.0 + 0.5 - 0.5 - 1e-8 * (6.4e6 + 6.5e6 + 2e5 + 3e5))


def test_default_bundle_self_selection():
    bundle = design_bundle(LADDER, PairContext(REQ))
    assert verify_feasibility(bundle, LADDER).ok
    u = utility_matrix(bundle, LADDER)
    for i in range(4):
        assert u[i][i] == pytest.approx(max(u[i]), abs=1e-12)
        assert u[i][i] > 0
    rates = [b.promised_rate for b in bundle]
    assert rates == sorted(rates, reverse=True) and rates[-1] == REQ


def test_single_tier_bundle():
    ladder = TypeLadder.equal_width(1, 1000.0)
    (item,) = design_bundle(ladder, PairContext(REQ))
    assert 0 < item.price <= ladder.tiers[0] * item.promised_rate / 1e6


def test_flat_prices_violate_ir():
    with pytest.raises(InfeasibleContract) as exc:
        design_bundle(LADDER, PairContext(REQ, PricingConfig(mode="flat")))
    assert any(v.startswith("IR") for v in exc.value.violations)


def test_price_above_value_flags_ir():
    bundle = design_bundle(LADDER, PairContext(REQ))
    last = bundle[-1]
    bundle[-1] = replace(last, price=LADDER.tiers[-1] * last.promised_rate / 1e6 + 0.1)
    report = verify_feasibility(bundle, LADDER)
    assert any(v.startswith("IR: type 4") for v in report.violations)


def test_equal_rate_overpriced_item_flags_ic():
    ladder = TypeLadder.equal_width(2, 1000.0)
    bundle = [ContractItem(1.0, 6.4e6, 3.0, 0.5), ContractItem(0.5, 6.4e6, 1.0, 0.5)]
    report = verify_feasibility(bundle, ladder)
    assert "IC: type 1 prefers item 2" in report.violations


def test_zero_premium_breaks_ordering():
    with pytest.raises(InfeasibleContract):
        design_bundle(LADDER, PairContext(REQ, PricingConfig(rate_premium=0.0)))


def test_reversed_rates_flag_ordering():
    bundle = design_bundle(LADDER, PairContext(REQ))
    reversed_rates = [replace(b, promised_rate=r) for b, r in zip(bundle, [x.promised_rate for x in bundle][::-1])]
    assert any(v.startswith(("ordering", "IC")) for v in verify_feasibility(reversed_rates, LADDER).violations)


@given(
    st.integers(1, 8),
    st.floats(1e5, 5e7),
    st.floats(1e-3, 0.2),
    st.floats(1e-4, 0.05),
)
def test_screening_bundles_always_feasible(n, req, premium, margin):
    ladder = TypeLadder.equal_width(n, 1000.0)
    pricing = PricingConfig(rate_premium=premium, margin=margin)
    # the lowest type must value its item above the margin
    if ladder.tiers[-1] * req / 1e6 <= margin:
        with pytest.raises(InfeasibleContract):
            design_bundle(ladder, PairContext(req, pricing))
        return
    bundle = design_bundle(ladder, PairContext(req, pricing))
    assert verify_feasibility(bundle, ladder).ok
