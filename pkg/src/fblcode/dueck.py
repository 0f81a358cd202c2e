"""Generalized near-identical source pair and its compound channels.

The family is parametrized by (a, k, eta): source words are length-k strings
over an alphabet of size a, the pair agrees except on an exponentially rare
event of probability 1/(k*a^(eta*k)), and the channel consists of one shared
deterministic component that only forwards agreeing inputs plus two private
point-to-point channels of tiny capacity.  Closed forms for the source
statistics and the point-to-point capacity models are evaluated with
log1p-style care so they stay exact up to a = 2^20, k = 64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Alphabet, Channel, JointPmf, product_alphabet
from .info import binary_entropy, binary_entropy_log
from .logreal import LogReal

__all__ = [
    "DueckParams",
    "SatelliteModel",
    "SourceStats",
    "build_source",
    "ic_capacity_core",
    "mac_capacity_core",
    "satellite_capacity_sum_bound",
    "satellite_models",
    "shared_channel",
    "source_stats",
]

MAX_SOURCE_WORDS = 4096
_MAX_CONCRETE_SIZE = 64


@dataclass(frozen=True)
class DueckParams:
    a: int
    k: int
    eta: int

    def __post_init__(self):
        for name in ("a", "k", "eta"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool):
                raise ValueError("%s must be an integer, got %r" % (name, v))
        if self.a < 2:
            raise ValueError("a must be at least 2, got %d" % self.a)
        if self.k < 2:
            raise ValueError("k must be at least 2, got %d" % self.k)
        if self.eta < 6 or self.eta % 2 != 0:
            raise ValueError("eta must be an even integer >= 6, got %d" % self.eta)

    @property
    def log_a(self) -> float:
        return math.log(self.a)

    @property
    def log_xi(self) -> float:
        """log of the disagreement probability 1/(k*a^(eta*k))."""
        return -(math.log(self.k) + self.eta * self.k * self.log_a)

    @property
    def log_alpha_bar(self) -> float:
        """log of 8k^4 / a^(eta*k/3), the high-rate fraction of the models."""
        return math.log(8.0 * self.k ** 4) - (self.eta * self.k / 3.0) * self.log_a

    def word_count(self) -> int:
        return self.a ** self.k

    def default_block_length(self) -> int:
        """k^4 * a^(eta*k/2), exact as a Python integer."""
        assert self.eta % 2 == 0
        return self.k ** 4 * self.a ** (self.eta * self.k // 2)


def build_source(p: DueckParams, max_words: int = MAX_SOURCE_WORDS) -> JointPmf:
    """Joint pmf of the source pair over word indices 0 .. a^k - 1.

    Index 0 is the all-zero word.  The pair sits on the diagonal plus the
    top row: mass (k-1)/k at (0,0), mass (a^(eta*k)-1)/(k a^(eta*k)(a^k-1))
    at each (c,c) with c != 0, mass 1/(k a^(eta*k)(a^k-1)) at each (0,d)
    with d != 0, and zero elsewhere.
    """
    n = p.word_count()
    if n > max_words:
        raise ValueError(
            "a^k = %d exceeds the materialization budget %d" % (n, max_words)
        )
    scale = p.a ** (p.eta * p.k)
    off_cell = 1.0 / (p.k * float(scale) * (n - 1))
    diag_cell = (float(scale) - 1.0) / (p.k * float(scale) * (n - 1))
    probs = np.zeros((n, n))
    probs[0, 0] = (p.k - 1) / p.k
    for c in range(1, n):
        probs[c, c] = diag_cell
        probs[0, c] = off_cell
    alpha = Alphabet.range(n)
    return JointPmf(("s1", "s2"), (alpha, alpha), probs)


@dataclass(frozen=True)
class SourceStats:
    h_s1: float
    h_s2: float
    h_joint: float
    h_s1_given_s2_bound: float
    h_s2_given_s1_bound: float
    xi: LogReal
    log_a: float
    exact: dict

    def to_json(self):
        return {
            "h_s1": self.h_s1,
            "h_s2": self.h_s2,
            "h_joint": self.h_joint,
            "h_s1_given_s2_bound": self.h_s1_given_s2_bound,
            "h_s2_given_s1_bound": self.h_s2_given_s1_bound,
            "xi": self.xi.to_json(),
            "log_a": self.log_a,
            "exact": dict(self.exact),
        }


def source_stats(p: DueckParams) -> SourceStats:
    """Closed-form source statistics; every field is safe at huge (a, k)."""
    k = p.k
    log_a = p.log_a
    minus_k_log_a = -k * log_a
    # log(a^k - 1) without forming a^k
    log_words_m1 = k * log_a + math.log1p(-math.exp(minus_k_log_a))
    log_rare = -p.eta * k * log_a  # log a^(-eta k)
    rare = math.exp(log_rare) if log_rare > -745.0 else 0.0

    q1 = (1.0 - rare) / k
    h_s1 = binary_entropy(q1) + q1 * log_words_m1
    h_s2 = binary_entropy(1.0 / k) + log_words_m1 / k
    h_cond_exact = binary_entropy_log(log_rare) / k
    h_joint = log_words_m1 / k + binary_entropy(1.0 / k) + h_cond_exact

    # (2 / a^(eta k)) * log a, folded to 0.0 when out of float range
    log_lin = math.log(2.0) + log_rare + math.log(log_a)
    linear_term = math.exp(log_lin) if log_lin > -745.0 else 0.0
    h_s2_given_s1_bound = binary_entropy_log(math.log(2.0 / k) + log_rare) + linear_term

    return SourceStats(
        h_s1=h_s1,
        h_s2=h_s2,
        h_joint=h_joint,
        h_s1_given_s2_bound=h_cond_exact,
        h_s2_given_s1_bound=h_s2_given_s1_bound,
        xi=LogReal(p.log_xi),
        log_a=log_a,
        exact={
            "h_s1": True,
            "h_s2": True,
            "h_joint": True,
            "h_s1_given_s2_bound": True,
            "h_s2_given_s1_bound": False,
            "xi": True,
        },
    )


def shared_channel(a: int) -> Channel:
    """Deterministic channel that forwards agreeing inputs and erases others.

    Input symbols are pairs (u1, u2) over an alphabet of size a; the output
    is u1 when u1 == u2 and 0 otherwise.
    """
    if a < 2:
        raise ValueError("a must be at least 2, got %r" % (a,))
    side = Alphabet.range(a)
    return Channel.deterministic(
        product_alphabet(side, side),
        side,
        lambda pair: pair[0] if pair[0] == pair[1] else 0,
    )


@dataclass(frozen=True)
class SatelliteModel:
    """Capacity and output-cardinality data for one private channel.

    The analytic checks use only (capacity, log_output_card_bound) as given
    data.  A concrete noiseless channel, when materialized, carries its own
    capacity log q <= capacity.
    """

    capacity: float | None
    log_output_card_bound: float
    valid: bool
    warnings: tuple
    concrete: Channel | None = None
    concrete_capacity: float | None = None

    def to_json(self):
        return {
            "capacity": self.capacity,
            "log_output_card_bound": self.log_output_card_bound,
            "valid": self.valid,
            "warnings": list(self.warnings),
            "concrete_capacity": self.concrete_capacity,
            "concrete_output_size": None if self.concrete is None else len(self.concrete.output),
        }


def _concrete_noiseless(capacity: float):
    """Largest noiseless q-ary channel with log q <= capacity."""
    q = int(math.floor(math.exp(capacity) * (1.0 + 1e-12)))
    q = max(1, q)
    if q > _MAX_CONCRETE_SIZE:
        return None, None, ("concrete channel omitted: q = %d too large" % q,)
    alpha = Alphabet.range(q)
    chan = Channel.deterministic(alpha, alpha, lambda s: s)
    return chan, math.log(q), ()


def mac_capacity_core(p: DueckParams) -> float:
    """Base capacity term shared by the first-mode private channels.

    Equals b*log a + 2*h(b) + log(a)/(4k) with b = 8k^4/a^(eta k/3);
    defined only while b <= 1/2.
    """
    if p.log_alpha_bar > math.log(0.5):
        raise ValueError("capacity core undefined: high-rate fraction exceeds 1/2")
    alpha_bar = math.exp(p.log_alpha_bar)
    return (
        alpha_bar * p.log_a
        + 2.0 * binary_entropy_log(p.log_alpha_bar)
        + p.log_a / (4.0 * p.k)
    )


def ic_capacity_core(p: DueckParams) -> float:
    """Base capacity term shared by the second-mode private channels."""
    return binary_entropy(2.0 / p.k) + (2.0 / p.k) * p.log_a


def satellite_models(p: DueckParams, mode: str, concrete: bool = False):
    """Capacity models of the two private channels for a mode in {mac, ic}."""
    if mode not in ("mac", "ic"):
        raise ValueError("mode must be 'mac' or 'ic', got %r" % (mode,))
    k = p.k
    log_a = p.log_a
    # log(2/(k a^(eta k))) = log 2 + log xi
    hb_rare = binary_entropy_log(math.log(2.0) + p.log_xi)

    if mode == "mac":
        card_bound = (3.0 / (2.0 * k)) * log_a
        if p.log_alpha_bar > math.log(0.5):
            warn = (
                "capacity model undefined: high-rate fraction 8k^4/a^(eta k/3) exceeds 1/2",
            )
            sat = SatelliteModel(None, card_bound, False, warn)
            return sat, sat
        c_m = mac_capacity_core(p)
        cap1 = c_m + binary_entropy(2.0 / k) + log_a / k
        cap2 = c_m + hb_rare
    else:
        card_bound = (5.0 / (2.0 * k)) * log_a
        c_i = ic_capacity_core(p)
        cap1 = c_i
        cap2 = c_i + hb_rare

    models = []
    for cap in (cap1, cap2):
        chan, concrete_cap, warn = (None, None, ())
        if concrete:
            chan, concrete_cap, warn = _concrete_noiseless(cap)
        models.append(
            SatelliteModel(
                capacity=cap,
                log_output_card_bound=card_bound,
                valid=True,
                warnings=warn,
                concrete=chan,
                concrete_capacity=concrete_cap,
            )
        )
    return models[0], models[1]


def satellite_capacity_sum_bound(p: DueckParams) -> float:
    """Printed bound on the summed private capacities in the first mode.

    Equals 2b(log a + h(b)) + (3/2k) log a + h(2/k) + h(2/(k a^(eta k)))
    with b = 8k^4 / a^(eta k / 3); requires b <= 1/2.
    """
    if p.log_alpha_bar > math.log(0.5):
        raise ValueError("sum bound undefined: high-rate fraction exceeds 1/2")
    alpha_bar = math.exp(p.log_alpha_bar)
    k = p.k
    hb_ab = binary_entropy_log(p.log_alpha_bar)
    hb_rare = binary_entropy_log(math.log(2.0 / k) - p.eta * k * p.log_a)
    return (
        2.0 * alpha_bar * (p.log_a + hb_ab)
        + (3.0 / (2.0 * k)) * p.log_a
        + binary_entropy(2.0 / k)
        + hb_rare
    )
