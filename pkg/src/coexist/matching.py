"""One-to-one URLLC/eMBB pairing by eMBB-proposing deferred acceptance."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .frame import UserProfile
from .phy import LinkState


@dataclass(frozen=True)
class PreferenceProfile:
    owner: int
    ranked: tuple[int, ...]
    score: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.ranked)) != len(self.ranked):
            raise ValueError(f"profile of {self.owner} lists a counterpart twice")

    def rank(self, other: int | None) -> int:
        """Position of ``other``; unmatched and unlisted rank last."""
        if other is None:
            return len(self.ranked)
        try:
            return self.ranked.index(other)
        except ValueError:
            return len(self.ranked) + 1

    def accepts(self, other: int) -> bool:
        return other in self.ranked

    def prefers(self, a: int, b: int | None) -> bool:
        """True when ``a`` is acceptable and strictly better than ``b``."""
        return self.accepts(a) and self.rank(a) < self.rank(b)


def _ranked(owner: int, score: Mapping[int, float], descending: bool) -> PreferenceProfile:
    sign = -1.0 if descending else 1.0
    order = sorted(score, key=lambda cid: (sign * score[cid], cid))
    return PreferenceProfile(owner, tuple(order), dict(score))


def build_urllc_prefs(
    urllc: UserProfile,
    embb_links: Mapping[int, LinkState],
    prefer_low_gain: bool = True,
    owner: int | None = None,
) -> PreferenceProfile:
    """Rank eMBB candidates by their channel gain, weakest first by default.

    ``owner`` overrides the profile key, e.g. with a per-packet request id.
    """
    if not embb_links:
        raise ValueError("a URLLC profile needs at least one eMBB candidate")
    score = {eid: link.gain for eid, link in embb_links.items()}
    return _ranked(urllc.id if owner is None else owner, score, descending=not prefer_low_gain)


def build_embb_prefs(embb: UserProfile, urllc_types: Mapping[int, float]) -> PreferenceProfile:
    """Rank URLLC candidates by willingness type, highest first."""
    if not urllc_types:
        raise ValueError("an eMBB profile needs at least one URLLC candidate")
    return _ranked(embb.id, dict(urllc_types), descending=True)


@dataclass
class Matching:
    """Partial bijection between eMBB ids and URLLC ids."""

    pairs: dict[int, int] = field(default_factory=dict)  # embb -> urllc

    def __post_init__(self):
        if len(set(self.pairs.values())) != len(self.pairs):
            raise ValueError("a URLLC user is matched to two eMBB users")
        self._inverse = {u: e for e, u in self.pairs.items()}

    def urllc_of(self, e: int) -> int | None:
        return self.pairs.get(e)

    def embb_of(self, u: int) -> int | None:
        return self._inverse.get(u)

    def as_tuples(self) -> list[tuple[int, int]]:
        return sorted(self.pairs.items())

    def __eq__(self, other):
        return isinstance(other, Matching) and self.pairs == other.pairs

    def __len__(self):
        return len(self.pairs)


def deferred_acceptance(
    embb_prefs: Iterable[PreferenceProfile],
    urllc_prefs: Iterable[PreferenceProfile],
) -> Matching:
    """eMBB users propose, URLLC users hold their best offer.

    Each round every unmatched eMBB user with a non-empty list proposes to
    its current favourite. A URLLC user keeps the best proposer seen so far
    and rejects the rest; every rejected pair is struck from both lists.
    The loop stops once a round leaves the matching and all lists unchanged.
    """
    e_lists = {p.owner: list(p.ranked) for p in embb_prefs}
    u_profiles = {p.owner: p for p in urllc_prefs}
    u_lists = {uid: list(p.ranked) for uid, p in u_profiles.items()}
    held: dict[int, int] = {}  # urllc -> embb

    def strike(e: int, u: int) -> None:
        if u in e_lists.get(e, ()):
            e_lists[e].remove(u)
        if e in u_lists.get(u, ()):
            u_lists[u].remove(e)

    while True:
        matched_e = set(held.values())
        proposers = [e for e in sorted(e_lists) if e not in matched_e and e_lists[e]]
        if not proposers:
            break
        for e in proposers:
            u = e_lists[e][0]
            if u not in u_profiles or e not in u_lists[u]:
                strike(e, u)
                continue
            current = held.get(u)
            if current is None or u_lists[u].index(e) < u_lists[u].index(current):
                if current is not None:
                    strike(current, u)
                held[u] = e
            else:
                strike(e, u)
    return Matching({e: u for u, e in held.items()})


def is_blocking_pair(
    e: int,
    u: int,
    m: Matching,
    embb_prefs: Mapping[int, PreferenceProfile],
    urllc_prefs: Mapping[int, PreferenceProfile],
) -> bool:
    """Both e and u strictly prefer each other to their partners under m."""
    if m.urllc_of(e) == u:
        return False
    return embb_prefs[e].prefers(u, m.urllc_of(e)) and urllc_prefs[u].prefers(e, m.embb_of(u))


def is_stable(
    m: Matching,
    embb_prefs: Mapping[int, PreferenceProfile],
    urllc_prefs: Mapping[int, PreferenceProfile],
) -> bool:
    return not any(
        is_blocking_pair(e, u, m, embb_prefs, urllc_prefs) for e in embb_prefs for u in urllc_prefs
    )
