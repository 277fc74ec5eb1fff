import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from coexist.frame import EMBB, URLLC, UserProfile
from coexist.matching import (
    Matching,
    PreferenceProfile,
    build_embb_prefs,
    build_urllc_prefs,
    deferred_acceptance,
    is_blocking_pair,
    is_stable,
)
from coexist.oracle import enumerate_stable_matchings
from coexist.phy import LinkState

U = UserProfile(10, URLLC, 50.0, 0.0)
E = UserProfile(0, EMBB, 50.0, 0.0)


def _link(gain):
    return LinkState(1.0, 0.0, gain)


def test_urllc_prefers_weak_embb():
    prefs = build_urllc_prefs(U, {1: _link(0.2), 2: _link(0.9)})
    assert prefs.ranked == (1, 2)


def test_urllc_strong_first_option():
    prefs = build_urllc_prefs(U, {1: _link(0.2), 2: _link(0.9)}, prefer_low_gain=False)
    assert prefs.ranked == (2, 1)


def test_urllc_single_and_ties():
    assert build_urllc_prefs(U, {4: _link(0.5)}).ranked == (4,)
    assert build_urllc_prefs(U, {7: _link(0.5), 3: _link(0.5)}).ranked == (3, 7)


def test_embb_prefers_high_type():
    assert build_embb_prefs(E, {11: 0.25, 12: 1.0}).ranked == (12, 11)
    assert build_embb_prefs(E, {13: 0.5, 11: 0.5, 12: 0.5}).ranked == (11, 12, 13)


def test_empty_candidates_rejected():
    with pytest.raises(ValueError):
        build_urllc_prefs(U, {})
    with pytest.raises(ValueError):
        build_embb_prefs(E, {})


def test_da_one_by_one():
    m = deferred_acceptance([PreferenceProfile(0, (5,))], [PreferenceProfile(5, (0,))])
    assert m.as_tuples() == [(0, 5)]


def test_da_no_urllc():
    m = deferred_acceptance([PreferenceProfile(0, ()), PreferenceProfile(1, ())], [])
    assert len(m) == 0


def test_blocking_pair_basics():
    e = {0: PreferenceProfile(0, (5,)), 1: PreferenceProfile(1, (5,))}
    u = {5: PreferenceProfile(5, (0, 1))}
    assert not is_blocking_pair(0, 5, Matching({0: 5}), e, u)
    assert is_blocking_pair(0, 5, Matching(), e, u)
    assert is_blocking_pair(0, 5, Matching({1: 5}), e, u)


def random_market(rng, n, m, accept=0.85):
    e_ids = list(range(n))
    u_ids = list(range(100, 100 + m))
    embb = [PreferenceProfile(e, tuple(x for x in rng.permutation(u_ids) if rng.random() < accept)) for e in e_ids]
    urllc = [PreferenceProfile(u, tuple(x for x in rng.permutation(e_ids) if rng.random() < accept)) for u in u_ids]
    return [PreferenceProfile(p.owner, tuple(int(x) for x in p.ranked)) for p in embb], [
        PreferenceProfile(p.owner, tuple(int(x) for x in p.ranked)) for p in urllc
    ]


@pytest.mark.parametrize("seed", range(30))
def test_da_3x3_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    embb, urllc = random_market(rng, 3, 3, accept=1.0)
    m = deferred_acceptance(embb, urllc)
    stable = enumerate_stable_matchings(embb, urllc)
    assert m in stable
    e_map = {p.owner: p for p in embb}
    u_map = {p.owner: p for p in urllc}
    assert not any(is_blocking_pair(e, u, m, e_map, u_map) for e in e_map for u in u_map)
    # the proposing side gets its best stable partner
    for e in e_map:
        best = min(e_map[e].rank(s.urllc_of(e)) for s in stable)
        assert e_map[e].rank(m.urllc_of(e)) == best


@given(st.integers(0, 6), st.integers(0, 6), st.integers(0, 2**32 - 1))
def test_da_stable_and_individually_rational(n, m, seed):
    embb, urllc = random_market(np.random.default_rng(seed), n, m)
    match = deferred_acceptance(embb, urllc)
    e_map = {p.owner: p for p in embb}
    u_map = {p.owner: p for p in urllc}
    assert is_stable(match, e_map, u_map)
    for e, u in match.pairs.items():
        assert e_map[e].accepts(u) and u_map[u].accepts(e)


def test_matching_rejects_double_assignment():
    with pytest.raises(ValueError):
        Matching({0: 5, 1: 5})
