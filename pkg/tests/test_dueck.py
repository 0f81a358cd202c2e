import math

import numpy as np
import pytest

from fblcode.dueck import (
    DueckParams,
    build_source,
    ic_capacity_core,
    mac_capacity_core,
    satellite_capacity_sum_bound,
    satellite_models,
    shared_channel,
    source_stats,
)
from fblcode.info import binary_entropy, conditional_entropy, entropy


# ---------------------------------------------------------------------------
# parameters and the materialized source
# ---------------------------------------------------------------------------


def test_params_validation():
    with pytest.raises(ValueError):
        DueckParams(1, 2, 6)
    with pytest.raises(ValueError):
        DueckParams(2, 1, 6)
    with pytest.raises(ValueError):
        DueckParams(2, 2, 4)
    with pytest.raises(ValueError):
        DueckParams(2, 2, 7)
    with pytest.raises(ValueError):
        DueckParams(2.0, 2, 6)


def test_params_sizes():
    p = DueckParams(2, 2, 6)
    assert p.word_count() == 4
    assert p.default_block_length() == 16 * 2 ** 6
    q = DueckParams(3, 2, 6)
    assert q.default_block_length() == 16 * 3 ** 6


def test_source_mass_placement():
    p = DueckParams(2, 2, 6)
    src = build_source(p)
    n, scale = 4, 2 ** 12
    probs = np.asarray(src.probs)
    assert probs.shape == (n, n)
    assert probs[0, 0] == pytest.approx(0.5, rel=1e-15)
    for c in range(1, n):
        assert probs[c, c] == pytest.approx(
            (scale - 1) / (2 * scale * (n - 1)), rel=1e-13
        )
        assert probs[0, c] == pytest.approx(1 / (2 * scale * (n - 1)), rel=1e-13)
    mask = np.ones((n, n), dtype=bool)
    mask[0, :] = False
    np.fill_diagonal(mask, False)
    assert float(np.abs(probs[mask]).sum()) == 0.0
    assert probs.sum() == pytest.approx(1.0, abs=1e-12)


def test_source_disagreement_mass_is_xi():
    p = DueckParams(2, 2, 6)
    src = build_source(p)
    stats = source_stats(p)
    off = sum(float(src.probs[0, c]) for c in range(1, 4))
    assert off == pytest.approx(2.0 ** -13, rel=1e-12)
    assert stats.xi.value == pytest.approx(off, rel=1e-12)
    assert stats.xi.log == pytest.approx(p.log_xi, abs=1e-12)


def test_source_materialization_budget():
    with pytest.raises(ValueError):
        build_source(DueckParams(2, 13, 6))
    small = DueckParams(2, 3, 6)
    with pytest.raises(ValueError):
        build_source(small, max_words=4)
    src = build_source(small, max_words=8)
    assert len(src.alphabets[0]) == 8


# ---------------------------------------------------------------------------
# closed forms against brute force
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("a,k,eta", [(2, 2, 6), (2, 3, 6), (3, 2, 6), (2, 2, 8)])
def test_stats_match_brute_force(a, k, eta):
    p = DueckParams(a, k, eta)
    src = build_source(p)
    stats = source_stats(p)
    assert stats.h_s1 == pytest.approx(entropy(src, "s1"), rel=1e-10)
    assert stats.h_s2 == pytest.approx(entropy(src, "s2"), rel=1e-10)
    assert stats.h_joint == pytest.approx(entropy(src), rel=1e-10)
    true_12 = conditional_entropy(src, "s1", "s2")
    assert stats.h_s1_given_s2_bound == pytest.approx(true_12, rel=2e-9)
    true_21 = conditional_entropy(src, "s2", "s1")
    assert true_21 <= stats.h_s2_given_s1_bound + 1e-12
    assert stats.log_a == pytest.approx(math.log(a), rel=1e-15)


def test_exact_flags():
    stats = source_stats(DueckParams(2, 2, 6))
    assert stats.exact == {
        "h_s1": True,
        "h_s2": True,
        "h_joint": True,
        "h_s1_given_s2_bound": True,
        "h_s2_given_s1_bound": False,
        "xi": True,
    }


def test_stats_safe_at_huge_parameters():
    stats = source_stats(DueckParams(2, 64, 100))
    assert stats.xi.value == 0.0
    assert stats.xi.log == pytest.approx(-(math.log(64) + 6400 * math.log(2)), rel=1e-12)
    assert stats.h_s1_given_s2_bound == 0.0
    assert 0.0 < stats.h_joint < math.inf
    assert stats.h_s2 == pytest.approx(
        binary_entropy(1 / 64)
        + (64 * math.log(2) + math.log1p(-(2.0 ** -64))) / 64,
        rel=1e-12,
    )


def test_stats_json_round_trip_keys():
    doc = source_stats(DueckParams(2, 2, 6)).to_json()
    assert set(doc) == {
        "h_s1",
        "h_s2",
        "h_joint",
        "h_s1_given_s2_bound",
        "h_s2_given_s1_bound",
        "xi",
        "log_a",
        "exact",
    }
    assert isinstance(doc["xi"], dict)


# ---------------------------------------------------------------------------
# shared channel and satellites
# ---------------------------------------------------------------------------


def test_shared_channel_forwards_agreement():
    chan = shared_channel(3)
    assert len(chan.input) == 9
    for u1 in range(3):
        for u2 in range(3):
            row = chan.probs[chan.input.index((u1, u2))]
            out = u1 if u1 == u2 else 0
            assert row[chan.output.index(out)] == 1.0
    with pytest.raises(ValueError):
        shared_channel(1)


def test_capacity_cores():
    p = DueckParams(16, 4, 6)
    b = math.exp(p.log_alpha_bar)
    assert b < 0.5
    expected = b * p.log_a + 2 * binary_entropy(b) + p.log_a / 16
    assert mac_capacity_core(p) == pytest.approx(expected, rel=1e-12)
    assert ic_capacity_core(p) == pytest.approx(
        binary_entropy(0.5) + 0.5 * p.log_a, rel=1e-12
    )
    with pytest.raises(ValueError):
        mac_capacity_core(DueckParams(2, 2, 6))


def test_satellite_guard_and_validity():
    bad = DueckParams(2, 4, 6)
    m1, m2 = satellite_models(bad, "mac")
    assert not m1.valid and not m2.valid
    assert m1.capacity is None
    assert m1.warnings
    good = DueckParams(16, 4, 6)
    g1, g2 = satellite_models(good, "mac")
    assert g1.valid and g2.valid
    assert g1.capacity > g2.capacity > 0
    assert g1.log_output_card_bound == pytest.approx(
        1.5 * math.log(16) / 4, rel=1e-12
    )
    i1, i2 = satellite_models(bad, "ic")
    assert i1.valid and i2.valid
    assert i1.log_output_card_bound == pytest.approx(
        2.5 * math.log(2) / 4, rel=1e-12
    )
    with pytest.raises(ValueError):
        satellite_models(good, "both")


def test_satellite_capacity_formulas():
    p = DueckParams(16, 4, 6)
    core = mac_capacity_core(p)
    m1, m2 = satellite_models(p, "mac")
    assert m1.capacity == pytest.approx(
        core + binary_entropy(0.5) + p.log_a / 4, rel=1e-12
    )
    hb_rare = binary_entropy(2.0 * math.exp(p.log_xi))
    assert m2.capacity == pytest.approx(core + hb_rare, rel=1e-9)
    i1, i2 = satellite_models(p, "ic")
    assert i1.capacity == pytest.approx(ic_capacity_core(p), rel=1e-12)
    assert i2.capacity == pytest.approx(ic_capacity_core(p) + hb_rare, rel=1e-9)


def test_satellite_sum_bound_formula():
    p = DueckParams(16, 4, 6)
    b = math.exp(p.log_alpha_bar)
    k = p.k
    expected = (
        2 * b * (p.log_a + binary_entropy(b))
        + 1.5 * p.log_a / k
        + binary_entropy(2 / k)
        + binary_entropy(2 / (k * 16.0 ** (p.eta * k)))
    )
    assert satellite_capacity_sum_bound(p) == pytest.approx(expected, rel=1e-9)
    with pytest.raises(ValueError):
        satellite_capacity_sum_bound(DueckParams(2, 2, 6))


def test_concrete_satellites():
    p = DueckParams(2, 2, 6)
    i1, i2 = satellite_models(p, "ic", concrete=True)
    for model in (i1, i2):
        assert model.concrete is not None
        assert model.concrete_capacity == pytest.approx(
            math.log(len(model.concrete.output)), rel=1e-12
        )
        assert model.concrete_capacity <= model.capacity + 1e-12
        rows = np.asarray(model.concrete.probs)
        assert np.array_equal(rows, np.eye(len(model.concrete.input)))
    big = DueckParams(128, 2, 6)
    b1, _ = satellite_models(big, "ic", concrete=True)
    assert b1.concrete is None
    assert b1.warnings
    assert b1.valid


def test_satellite_json_shape():
    m1, _ = satellite_models(DueckParams(2, 2, 6), "ic", concrete=True)
    doc = m1.to_json()
    assert set(doc) == {
        "capacity",
        "log_output_card_bound",
        "valid",
        "warnings",
        "concrete_capacity",
        "concrete_output_size",
    }
    assert doc["concrete_output_size"] == len(m1.concrete.output)
