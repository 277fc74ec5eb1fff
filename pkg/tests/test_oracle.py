import math

import numpy as np
import pytest

from coexist import oracle
from coexist.contract import PricingConfig
from coexist.frame import EMBB, URLLC, Mode, UserProfile
from coexist.matching import PreferenceProfile, deferred_acceptance
from coexist.phy import RadioParams
from coexist.scheduler import baseline_no_urllc

P = RadioParams.macro_cell()
GRID = oracle.default_power_grid(P.urllc_max_power)


def _inst(users, arrivals, rb=2, slots=4, grid=GRID):
    return oracle.TinyInstance(tuple(users), tuple(arrivals), rb, slots, grid)


def test_power_grid():
    assert len(GRID) == 8 and GRID[0] == pytest.approx(1e-6) and GRID[-1] == 5.0
    assert all(a < b for a, b in zip(GRID, GRID[1:]))


def test_bounds_enforced():
    users = [UserProfile(i, EMBB, 100.0, 0.0) for i in range(4)]
    with pytest.raises(ValueError):
        _inst(users, [])
    with pytest.raises(ValueError):
        _inst(users[:1], [], rb=5)


def test_no_arrivals_equals_no_urllc():
    users = [UserProfile(0, EMBB, 300.0, 0.0), UserProfile(1, EMBB, 700.0, 0.0)]
    inst = _inst(users, [])
    res = oracle.solve_milp_bruteforce(inst, P)
    ref = baseline_no_urllc(users, P, inst.frame()).embb_sum_rate * inst.frame().embb_tti
    assert res.feasible and res.objective == pytest.approx(ref, rel=1e-12)


def test_single_feasible_pair_superposes():
    users = [UserProfile(0, EMBB, 900.0, 0.0), UserProfile(1, URLLC, 10.0, 0.0)]
    res = oracle.solve_milp_bruteforce(_inst(users, [(1, 0)], rb=1), P)
    (slot, rb, mode, power) = res.assignment[0]
    assert mode is Mode.SUPERPOSE


def test_infeasible_reports_reliability():
    users = [UserProfile(0, EMBB, 900.0, 0.0), UserProfile(1, URLLC, 900.0, 0.0)]
    tiny_grid = (1e-9, 1e-8)
    res = oracle.solve_milp_bruteforce(_inst(users, [(1, 0)], grid=tiny_grid), P)
    assert not res.feasible and res.violated.startswith("reliability")


def test_infeasible_reports_collision():
    users = [UserProfile(0, EMBB, 900.0, 0.0)] + [UserProfile(i, URLLC, 50.0 * i, 0.0) for i in (1, 2, 3)]
    res = oracle.solve_milp_bruteforce(_inst(users, [(1, 1), (2, 1), (3, 1)], rb=1, slots=2), P)
    assert not res.feasible and res.violated.startswith("assignment")


@pytest.mark.parametrize("seed", range(20))
def test_dominance_small_batch(seed):
    rng = np.random.default_rng(seed)
    inst = oracle.random_tiny_instance(rng, P)
    rec = oracle.compare_on_instance(inst, P)
    assert rec.drops == 0 and rec.rounded_feasible
    assert rec.dominance_ok and rec.contract_ge_puncture


def test_candidate_count():
    assert oracle.candidate_count(1, 1) == 2
    assert oracle.candidate_count(3, 3) == 34
    assert oracle.candidate_count(2, 0) == 1


def test_one_by_one():
    stable = oracle.enumerate_stable_matchings([PreferenceProfile(0, (7,))], [PreferenceProfile(7, (0,))])
    assert [m.as_tuples() for m in stable] == [[(0, 7)]]


def test_latin_square_has_several_stable_matchings():
    embb = [PreferenceProfile(0, (10, 11, 12)), PreferenceProfile(1, (11, 12, 10)), PreferenceProfile(2, (12, 10, 11))]
    urllc = [PreferenceProfile(10, (1, 2, 0)), PreferenceProfile(11, (2, 0, 1)), PreferenceProfile(12, (0, 1, 2))]
    stable, checked = oracle.stable_matching_census(embb, urllc)
    assert checked == oracle.candidate_count(3, 3)
    assert len(stable) == 3
    assert deferred_acceptance(embb, urllc) in stable


def test_enumeration_size_limit():
    big = [PreferenceProfile(i, ()) for i in range(7)]
    with pytest.raises(ValueError):
        oracle.enumerate_stable_matchings(big, [])


def _equivalence_instance(seed=2):
    rng = np.random.default_rng(seed)
    while True:
        inst = oracle.random_tiny_instance(rng, P)
        if 1 <= len(inst.arrivals) <= 2:
            return inst


@pytest.mark.parametrize("seed", range(8))
def test_profit_maximizer_meets_volume_constraints(seed):
    report = oracle.check_equivalence_property(_equivalence_instance(seed), P)
    assert report.feasible and report.maximizer_p9_feasible
    lo, hi = report.p9_range
    assert lo - 1e-12 <= report.maximizer_p9_objective <= hi + 1e-12


def test_costless_fixed_prices_degenerate():
    pricing = PricingConfig(cost_per_bps=0.0, embb_billing="flat")
    report = oracle.check_equivalence_property(_equivalence_instance(), P, pricing=pricing)
    assert report.degenerate and math.isnan(report.correlation)


def test_ir_violating_prices_reported():
    report = oracle.check_equivalence_property(_equivalence_instance(), P, pricing=PricingConfig(mode="flat"))
    assert not report.feasible and "IR" in report.reason
