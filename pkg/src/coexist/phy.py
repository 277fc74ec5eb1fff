"""Radio physics for one macro cell: pathloss, SINR, Shannon and
finite-blocklength rates.

All powers are linear watts, gains are linear, rates are bits/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from . import kernels

_LN2 = math.log(2.0)
_SQRT2 = math.sqrt(2.0)

EMBB_PATHLOSS = (35.3, 37.6)
URLLC_PATHLOSS = (16.62, 37.6)


class DomainError(ValueError):
    """An input lies outside the domain where a model is defined."""


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class RadioParams:
    noise_power: float
    rb_bandwidth: float
    carrier: float
    embb_tx_power: float
    urllc_max_power: float
    error_target: float
    urllc_packet_bits: int
    blocklength: float = 800.0
    embb_pathloss: tuple[float, float] = EMBB_PATHLOSS
    urllc_pathloss: tuple[float, float] = URLLC_PATHLOSS
    perfect_sic: bool = False

    def __post_init__(self):
        for name in ("noise_power", "rb_bandwidth", "carrier", "embb_tx_power", "urllc_max_power"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be strictly positive")
        if not 0.0 < self.error_target < 0.5:
            raise DomainError("error_target must lie in (0, 0.5)")
        if self.urllc_packet_bits < 1:
            raise DomainError("urllc_packet_bits must be >= 1")
        if self.blocklength < 1:
            raise DomainError("blocklength must be >= 1")

    @classmethod
    def macro_cell(cls, **overrides) -> "RadioParams":
        """Macro-cell defaults: -97.5 dBm noise, 5 MHz RBs, 0.01 mW eMBB power, 100 B packets."""
        values = dict(
            noise_power=dbm_to_watts(-97.5),
            rb_bandwidth=5e6,
            carrier=2e9,
            embb_tx_power=1e-5,
            urllc_max_power=5.0,
            error_target=1e-5,
            urllc_packet_bits=800,
            blocklength=800.0,
        )
        values.update(overrides)
        return cls(**values)


def _pathloss(d: float, law: tuple[float, float]) -> float:
    if not d >= 1.0:
        raise DomainError(f"pathloss law is undefined below 1 m (got d={d})")
    intercept, slope = law
    return intercept + slope * math.log10(d)


def pathloss_embb(d: float, law: tuple[float, float] = EMBB_PATHLOSS) -> float:
    return _pathloss(d, law)


def pathloss_urllc(d: float, law: tuple[float, float] = URLLC_PATHLOSS) -> float:
    return _pathloss(d, law)


@dataclass(frozen=True)
class LinkState:
    distance: float
    pathloss_db: float
    gain: float

    @classmethod
    def from_pathloss(cls, distance: float, pathloss_db: float) -> "LinkState":
        return cls(distance, pathloss_db, 10.0 ** (-pathloss_db / 10.0))

    @classmethod
    def embb(cls, distance: float, params: RadioParams | None = None) -> "LinkState":
        law = params.embb_pathloss if params is not None else EMBB_PATHLOSS
        return cls.from_pathloss(distance, pathloss_embb(distance, law))

    @classmethod
    def urllc(cls, distance: float, params: RadioParams | None = None) -> "LinkState":
        law = params.urllc_pathloss if params is not None else URLLC_PATHLOSS
        return cls.from_pathloss(distance, pathloss_urllc(distance, law))


def sinr(signal_power: float, gain: float, interference: float, noise: float) -> float:
    if not noise > 0:
        raise DomainError("noise power must be strictly positive")
    if signal_power < 0 or gain < 0 or interference < 0:
        raise DomainError("powers, gains and interference must be non-negative")
    return signal_power * gain / (interference + noise)


def shannon_rate(sinr: float, bandwidth: float) -> float:
    if sinr < 0:
        raise DomainError("sinr must be non-negative")
    return bandwidth * math.log2(1.0 + sinr)


def q_function(x: float) -> float:
    """Standard normal tail probability P(Z > x)."""
    return 0.5 * math.erfc(x / _SQRT2)


@lru_cache(maxsize=256)
def q_inverse(p: float) -> float:
    """Inverse of :func:`q_function` to 1e-10 absolute accuracy in x.

    Bisection brackets the root, Newton steps polish it; a Newton step that
    leaves the bracket is replaced by a bisection step.
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"q_inverse needs 0 < p < 1 (got {p})")
    lo, hi = -40.0, 40.0
    while hi - lo > 1e-3:
        mid = 0.5 * (lo + hi)
        if q_function(mid) > p:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    for _ in range(100):
        f = q_function(x) - p
        if f > 0:
            lo = x
        else:
            hi = x
        density = math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
        step = f / density if density > 0 else 0.0
        nxt = x + step
        if not lo <= nxt <= hi:
            nxt = 0.5 * (lo + hi)
        if abs(nxt - x) < 1e-13 or hi - lo < 1e-13:
            x = nxt
            break
        x = nxt
    return x


def fbl_rate(sinr: float, blocklength: float, error_target: float, bandwidth: float) -> float:
    """Finite-blocklength (normal approximation) achievable rate in bits/s.

    The bandwidth multiplies both the capacity and the dispersion term, and
    negative values are clamped to zero.
    """
    if sinr < 0:
        raise DomainError("sinr must be non-negative")
    if blocklength < 1:
        raise DomainError("blocklength must be >= 1")
    if not 0.0 < error_target < 0.5:
        raise DomainError("error_target must lie in (0, 0.5)")
    if sinr == 0:
        return 0.0
    dispersion = 1.0 - 1.0 / (1.0 + sinr) ** 2
    per_use = math.log2(1.0 + sinr) - math.sqrt(dispersion / blocklength) * q_inverse(error_target) / _LN2
    return bandwidth * max(per_use, 0.0)


def urllc_rate(p_u: float, urllc_link: LinkState, params: RadioParams) -> float:
    """URLLC rate on an interference-free link (puncturing, or superposition after SIC)."""
    gamma = sinr(p_u, urllc_link.gain, 0.0, params.noise_power)
    return kernels.fbl_rate(gamma, params.blocklength, q_inverse(params.error_target), params.rb_bandwidth)


def embb_rate_clean(embb_link: LinkState, params: RadioParams) -> float:
    gamma = sinr(params.embb_tx_power, embb_link.gain, 0.0, params.noise_power)
    return shannon_rate(gamma, params.rb_bandwidth)


def embb_rate_superposed(embb_link: LinkState, urllc_link: LinkState, p_u: float, params: RadioParams) -> float:
    interference = 0.0 if params.perfect_sic else p_u * urllc_link.gain
    gamma = sinr(params.embb_tx_power, embb_link.gain, interference, params.noise_power)
    return shannon_rate(gamma, params.rb_bandwidth)


def superposed_pair_rates(
    embb_link: LinkState,
    urllc_link: LinkState,
    p_e: float,
    p_u: float,
    params: RadioParams,
) -> tuple[float, float]:
    """(eMBB rate, URLLC rate) when both messages share one RB.

    The eMBB user sees ``p_u * g_uj`` as interference (none when
    ``params.perfect_sic``); the URLLC user decodes interference-free.
    """
    if p_e < 0 or p_u < 0:
        raise DomainError("powers must be non-negative")
    interference = 0.0 if params.perfect_sic else p_u * urllc_link.gain
    gamma_e = sinr(p_e, embb_link.gain, interference, params.noise_power)
    gamma_u = sinr(p_u, urllc_link.gain, 0.0, params.noise_power)
    return (
        shannon_rate(gamma_e, params.rb_bandwidth),
        fbl_rate(gamma_u, params.blocklength, params.error_target, params.rb_bandwidth),
    )


def urllc_sinr_with_embb_interference(
    embb_link: LinkState, urllc_link: LinkState, p_u: float, params: RadioParams
) -> float:
    """URLLC SINR when the eMBB signal is not cancelled (used for the SIC check)."""
    interference = params.embb_tx_power * embb_link.gain
    return sinr(p_u, urllc_link.gain, interference, params.noise_power)
