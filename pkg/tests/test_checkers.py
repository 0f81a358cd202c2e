import math

import numpy as np
import pytest

from fblcode.checkers import (
    ConditionRecord,
    IcAssignment,
    MacAssignment,
    SchemeParams,
    check_ces,
    check_ic_chk,
    check_ic_step1,
    check_ic_step1_prescribed,
    check_ic_step2,
    check_isolated,
    check_lc,
    check_mac_step1,
    check_mac_step1_prescribed,
    check_mac_step2,
    chk_region_contains,
    dueck_separation_scan,
    lemma_ces_violation,
    lemma_lc_violation,
)
from fblcode.core import Alphabet, Channel, JointPmf, Pmf, product_alphabet
from fblcode.dueck import DueckParams
from fblcode.info import binary_entropy

_BITS = Alphabet.range(2)


def _diag_source(n=2):
    alpha = Alphabet.range(n)
    return JointPmf(("s1", "s2"), (alpha, alpha), np.eye(n) / n)


def _passing_mac():
    uv = product_alphabet(_BITS, _BITS)
    x1 = Channel.deterministic(uv, uv, lambda s: s)
    x2 = Channel.deterministic(uv, _BITS, lambda s: s[1])
    pair = product_alphabet(uv, _BITS)
    chan = Channel.deterministic(pair, pair, lambda s: s)
    m = MacAssignment(
        source=_diag_source(),
        p_u=Pmf.uniform(_BITS),
        p_v1=Pmf.uniform(_BITS),
        p_v2=Pmf.uniform(_BITS),
        x1_mapper=x1,
        x2_mapper=x2,
        channel=chan,
    )
    return m, SchemeParams(alpha=0.05, beta=1.2, rho=0.3, delta=0.5, l=2000)


def _passing_ic():
    u4 = Alphabet.range(4)
    uv = product_alphabet(u4, _BITS)
    mapper = Channel.deterministic(uv, uv, lambda s: s)
    pair = product_alphabet(uv, uv)
    chan = Channel.deterministic(pair, pair, lambda s: s)
    ic = IcAssignment(
        source=_diag_source(),
        p_u=Pmf.uniform(u4),
        p_v1=Pmf.uniform(_BITS),
        p_v2=Pmf.uniform(_BITS),
        x1_mapper=mapper,
        x2_mapper=mapper,
        channel=chan,
    )
    return ic, SchemeParams(alpha=0.55, beta=0.35, rho=0.3, delta=0.25, l=5000)


def _eight_family_ic():
    uwv = product_alphabet(_BITS, _BITS, _BITS)
    mapper = Channel.deterministic(uwv, uwv, lambda s: s)
    pair = product_alphabet(uwv, uwv)
    chan = Channel.deterministic(pair, pair, lambda s: s)
    ic = IcAssignment(
        source=_diag_source(),
        p_u=Pmf.uniform(_BITS),
        p_v1=Pmf.uniform(_BITS),
        p_v2=Pmf.uniform(_BITS),
        x1_mapper=mapper,
        x2_mapper=mapper,
        channel=chan,
        p_w1=Pmf.uniform(_BITS),
        p_w2=Pmf.uniform(_BITS),
    )
    return ic, SchemeParams(alpha=0.35, beta=0.55, rho=0.3, delta=0.25, l=10000)


# ---------------------------------------------------------------------------
# two-stage checkers on explicit assignments
# ---------------------------------------------------------------------------


def test_mac_steps_pass_on_transparent_design():
    m, s = _passing_mac()
    for check in (check_mac_step1, check_mac_step2):
        rep = check(m, s)
        assert rep.overall
        assert [r.name for r in rep.records] == [
            "common-rate",
            "rate-1",
            "rate-2",
            "sum-rate",
            "phi-below-half",
        ]
        assert all(r.satisfied for r in rep.records)
        assert rep.phi["phi"]["value"] < 1e-6
        assert rep.record("rate-1").rhs == pytest.approx(math.log(2), abs=1e-6)
        assert rep.record("sum-rate").rhs == pytest.approx(math.log(4), abs=1e-6)
        assert rep.flags["bound_mode"] is False
    assert check_mac_step1(m, s).flags["conditioned_on_common_codeword"] is False
    assert check_mac_step2(m, s).flags["conditioned_on_common_codeword"] is True


def test_mac_json_round_trip_reproduces_report():
    m, s = _passing_mac()
    doc = {
        "source": {
            "alphabet1": [0, 1],
            "alphabet2": [0, 1],
            "probs": [[0.5, 0.0], [0.0, 0.5]],
        },
        "p_u": m.p_u.to_json(),
        "p_v1": m.p_v1.to_json(),
        "p_v2": m.p_v2.to_json(),
        "x1_mapper": m.x1_mapper.to_json(),
        "x2_mapper": m.x2_mapper.to_json(),
        "channel": m.channel.to_json(),
    }
    again = MacAssignment.from_json(doc)
    assert check_mac_step1(again, s).to_json() == check_mac_step1(m, s).to_json()
    s2 = SchemeParams.from_json(
        {"alpha": s.alpha, "beta": s.beta, "rho": s.rho, "delta": s.delta, "l": s.l}
    )
    assert s2 == s


def test_mac_label_invariance():
    m, s = _passing_mac()
    ident = MacAssignment(
        **{**m.__dict__, "f1": {0: 0, 1: 1}, "f2": {0: 0, 1: 1}}
    )
    swapped = MacAssignment(
        **{**m.__dict__, "f1": {0: 1, 1: 0}, "f2": {0: 1, 1: 0}}
    )
    base = check_mac_step1(m, s).to_json()
    assert check_mac_step1(ident, s).to_json() == base
    assert check_mac_step1(swapped, s).to_json() == base


def test_mac_step_validation():
    m, s = _passing_mac()
    with pytest.raises(ValueError, match="admissible minimum"):
        check_mac_step1(m, SchemeParams(0.05, 1.2, 0.3, 0.5, 100))
    with pytest.raises(ValueError, match="integer type"):
        check_mac_step1(m, SchemeParams(0.05, 1.2, 0.3, 0.5, 2001))
    bad_axes = JointPmf(("a", "b"), (_BITS, _BITS), np.eye(2) / 2)
    with pytest.raises(ValueError, match="axes"):
        MacAssignment(
            bad_axes, m.p_u, m.p_v1, m.p_v2, m.x1_mapper, m.x2_mapper, m.channel
        )
    with pytest.raises(ValueError, match="x1_mapper"):
        MacAssignment(
            m.source, m.p_u, m.p_v1, m.p_v2, m.channel, m.x2_mapper, m.channel
        )


def test_mac_phi_above_half_branch():
    m, _ = _passing_mac()
    # inner code rate far above the induced channel capacity kills the
    # exponent, so the polynomial factor dominates and phi saturates
    s = SchemeParams(alpha=2.0, beta=1.2, rho=0.3, delta=0.5, l=2000)
    rep = check_mac_step1(m, s)
    assert not rep.overall
    assert rep.warnings
    assert not rep.record("phi-below-half").satisfied
    assert not rep.record("rate-1").satisfied
    assert math.isinf(rep.record("rate-1").lhs)


def test_ic_steps_pass_and_u_conditioning_matches():
    ic, s = _passing_ic()
    rep1 = check_ic_step1(ic, s)
    rep2 = check_ic_step2(ic, s)
    assert rep1.overall and rep2.overall
    assert [r.name for r in rep1.records] == [
        "common-rate",
        "rate-1",
        "phi-below-half-1",
        "rate-2",
        "phi-below-half-2",
    ]
    # private codewords are independent of the common codeword here, so
    # conditioning on it moves nothing
    for a, b in zip(rep1.records, rep2.records):
        assert a.name == b.name
        assert a.lhs == pytest.approx(b.lhs, abs=1e-12)
        assert a.rhs == pytest.approx(b.rhs, abs=1e-12)
        assert a.satisfied == b.satisfied
    assert rep1.phi["phi1"]["value"] < 1e-6
    assert rep1.phi["phi2"]["value"] < 1e-6


def test_ic_singleton_u_makes_steps_identical():
    one = Alphabet.range(1)
    uv = product_alphabet(one, _BITS)
    mapper = Channel.deterministic(uv, _BITS, lambda s: s[1])
    pair = product_alphabet(_BITS, _BITS)
    chan = Channel.deterministic(pair, pair, lambda s: s)
    ic = IcAssignment(
        source=_diag_source(),
        p_u=Pmf(one, [1.0]),
        p_v1=Pmf.uniform(_BITS),
        p_v2=Pmf.uniform(_BITS),
        x1_mapper=mapper,
        x2_mapper=mapper,
        channel=chan,
    )
    s = SchemeParams(alpha=0.05, beta=1.0, rho=0.3, delta=0.5, l=256)
    rep1 = check_ic_step1(ic, s)
    rep2 = check_ic_step2(ic, s)
    for a, b in zip(rep1.records, rep2.records):
        assert (a.name, a.lhs, a.rhs, a.slack, a.satisfied) == (
            b.name,
            b.lhs,
            b.rhs,
            b.slack,
            b.satisfied,
        )
    assert rep1.overall == rep2.overall


def test_ic_assignment_validation():
    ic, _ = _passing_ic()
    with pytest.raises(ValueError, match="together"):
        IcAssignment(
            ic.source,
            ic.p_u,
            ic.p_v1,
            ic.p_v2,
            ic.x1_mapper,
            ic.x2_mapper,
            ic.channel,
            p_w1=Pmf.uniform(_BITS),
        )
    flat = Channel.deterministic(ic.channel.input, Alphabet.range(3), lambda s: 0)
    with pytest.raises(ValueError, match="pairs"):
        IcAssignment(
            ic.source, ic.p_u, ic.p_v1, ic.p_v2, ic.x1_mapper, ic.x2_mapper, flat
        )


# ---------------------------------------------------------------------------
# eight-family region
# ---------------------------------------------------------------------------


def test_chk_region_membership_and_phi_monotonicity():
    ic, _ = _eight_family_ic()
    member, rep = chk_region_contains(0.1, 0.1, ic, 1e-9)
    assert member
    assert rep.flags["strict"] is False
    far, _ = chk_region_contains(2.0, 2.0, ic, 1e-9)
    assert not far
    phis = (1e-9, 0.05, 0.2, 0.4)
    reports = [chk_region_contains(0.1, 0.1, ic, phi)[1] for phi in phis]
    for prev, cur in zip(reports, reports[1:]):
        for a, b in zip(prev.records, cur.records):
            assert a.name == b.name
            if not a.name.startswith("nonneg"):
                assert b.slack <= a.slack + 1e-12


def test_chk_region_needs_w_layers():
    ic, _ = _passing_ic()
    with pytest.raises(ValueError, match="p_w1"):
        chk_region_contains(0.1, 0.1, ic, 1e-9)


def test_check_ic_chk_passes():
    ic, s = _eight_family_ic()
    rep = check_ic_chk(ic, s)
    assert rep.overall
    assert rep.flags["r1"] == pytest.approx(s.beta, abs=1e-6)
    assert rep.flags["r2"] == pytest.approx(s.beta, abs=1e-6)
    names = [r.name for r in rep.records]
    assert "common-rate" in names
    assert "sum-cross" in names
    assert sum(1 for n in names if n.startswith("single-direct")) == 2
    assert rep.phi["phi"]["value"] < 1e-6


def test_check_ic_chk_strict_flag():
    ic, s = _eight_family_ic()
    loose = check_ic_chk(ic, s, strict=False)
    tight = check_ic_chk(ic, s, strict=True)
    assert loose.flags["strict"] is False
    assert tight.flags["strict"] is True


# ---------------------------------------------------------------------------
# prior-art region checkers
# ---------------------------------------------------------------------------


def _independent_source(p1=0.3, p2=0.4):
    probs = np.outer([1 - p1, p1], [1 - p2, p2])
    return JointPmf(("s1", "s2"), (_BITS, _BITS), probs)


def _ces_joint(x1_from=None):
    j = _independent_source().product(
        JointPmf.from_pmf("u", Pmf.uniform(_BITS))
    )
    fresh = Channel(
        product_alphabet(_BITS, _BITS), _BITS, np.full((4, 2), 0.5)
    )
    if x1_from is None:
        j = j.extend(fresh, ("u", "s1"), "x1")
    else:
        j = j.add_deterministic("x1", x1_from, lambda s: s, _BITS)
    j = j.extend(fresh, ("u", "s2"), "x2")
    return j.add_deterministic(
        "y", ("x1", "x2"), lambda a, b: (a, b), product_alphabet(_BITS, _BITS)
    )


def test_ces_passes_for_independent_sources_on_clean_channel():
    rep = check_ces(_ces_joint())
    assert rep.overall
    assert [r.name for r in rep.records] == [
        "rate-1",
        "rate-2",
        "sum-given-common",
        "sum",
    ]
    assert rep.record("rate-1").lhs == pytest.approx(binary_entropy(0.3), rel=1e-9)
    assert rep.record("rate-1").rhs == pytest.approx(math.log(2), rel=1e-9)
    assert rep.record("sum").rhs == pytest.approx(math.log(4), rel=1e-9)
    assert rep.flags["common_part_size"] == 1


def test_ces_rejects_wrong_axes_and_factorization():
    with pytest.raises(ValueError, match="axes"):
        check_ces(_independent_source())
    with pytest.raises(ValueError, match="factor"):
        check_ces(_ces_joint(x1_from="s2"))


def _lc_joint(w1_from_s1=False):
    one = Alphabet.range(1)
    j = _independent_source().product(JointPmf.from_pmf("q", Pmf(one, [1.0])))
    coin = Channel(one, _BITS, [[0.5, 0.5]])
    if w1_from_s1:
        j = j.add_deterministic("w1", "s1", lambda s: s, _BITS)
    else:
        j = j.extend(coin, "q", "w1")
    j = j.extend(coin, "q", "w2")
    fresh = Channel(
        product_alphabet(one, _BITS, _BITS), _BITS, np.full((4, 2), 0.5)
    )
    j = j.extend(fresh, ("q", "w1", "s1"), "x1")
    j = j.extend(fresh, ("q", "w2", "s2"), "x2")
    pair = product_alphabet(_BITS, _BITS)
    j = j.add_deterministic("y1", ("x1", "x2"), lambda a, b: (a, b), pair)
    return j.add_deterministic("y2", ("x1", "x2"), lambda a, b: (a, b), pair)


def test_lc_passes_when_both_receivers_see_everything():
    rep = check_lc(_lc_joint())
    assert rep.overall
    names = [r.name for r in rep.records]
    assert names == [
        "direct-1",
        "direct-2",
        "sum-cross-1",
        "sum-cross-2",
        "sum-forward",
        "weighted-1",
        "weighted-2",
    ]
    assert rep.record("direct-1").lhs == pytest.approx(binary_entropy(0.3), rel=1e-9)
    assert rep.record("direct-1").rhs == pytest.approx(math.log(2), rel=1e-9)
    assert rep.record("weighted-1").rhs == pytest.approx(3 * math.log(2), rel=1e-9)


def test_lc_rejects_wrong_axes_and_factorization():
    with pytest.raises(ValueError, match="axes"):
        check_lc(_independent_source())
    with pytest.raises(ValueError, match="factor"):
        check_lc(_lc_joint(w1_from_s1=True))


# ---------------------------------------------------------------------------
# closed-form checkers for the generalized example family
# ---------------------------------------------------------------------------


def test_prescribed_checks_at_scan_minima():
    mac = check_mac_step1_prescribed(DueckParams(890454, 21, 6))
    assert mac.overall
    assert mac.flags["bound_mode"] is True
    assert mac.flags["defaults_used"] is True
    assert mac.record("phi-below-half").lhs < 0.5
    assert lemma_ces_violation(DueckParams(890454, 21, 6)).violated
    ic = check_ic_step1_prescribed(DueckParams(993529, 42, 6))
    assert ic.overall
    assert lemma_lc_violation(DueckParams(993529, 42, 6)).violated


def test_prescribed_validation():
    p = DueckParams(890454, 21, 6)
    with pytest.raises(ValueError, match="admissible minimum"):
        check_mac_step1_prescribed(
            p, SchemeParams(0.5, 0.5, 0.01, 0.05, 890454)
        )
    tiny = DueckParams(2, 4, 6)
    with pytest.raises(ValueError, match="a > 4"):
        check_mac_step1_prescribed(tiny)
    rep = check_mac_step1_prescribed(tiny, SchemeParams(0.5, 0.5, 0.1, 0.25, 1024))
    assert not rep.overall
    assert rep.records[0].name == "capacity-model-defined"
    assert rep.warnings


def test_lemma_violations_scale_with_a():
    small = lemma_ces_violation(DueckParams(64, 21, 6))
    big = lemma_ces_violation(DueckParams(890454, 21, 6))
    assert not small.violated
    assert big.violated
    assert big.slack > small.slack
    lc_small = lemma_lc_violation(DueckParams(64, 42, 6))
    lc_big = lemma_lc_violation(DueckParams(993529, 42, 6))
    assert not lc_small.violated and lc_big.violated
    doc = big.to_json()
    assert set(doc) == {"violated", "slack", "threshold", "bound", "warnings"}


def test_isolated_check_positive_slack():
    rep = check_isolated(DueckParams(890454, 21, 6))
    assert rep.overall
    assert [r.name for r in rep.records] == [
        "rate-1",
        "rate-2",
        "sum-rate",
        "phi-below-half",
    ]
    assert all(r.slack > 0 for r in rep.records)
    assert rep.flags["bound_mode"] is True
    assert rep.flags["mode"] == "mac"
    assert rep.flags["delta"] == pytest.approx(1.0 / 21)
    assert set(rep.phi) == {"phi", "disagreement_bound", "typicality_tail_bound"}


def test_isolated_check_saturates_at_tiny_block_length():
    rep = check_isolated(DueckParams(890454, 21, 6), l=2)
    assert not rep.overall
    assert rep.warnings
    assert not rep.record("phi-below-half").satisfied


def test_isolated_check_validation():
    p = DueckParams(890454, 21, 6)
    with pytest.raises(ValueError, match="mode"):
        check_isolated(p, mode="both")
    with pytest.raises(ValueError, match="positive"):
        check_isolated(p, l=0)
    with pytest.raises(ValueError, match="delta"):
        check_isolated(p, delta=-0.5)


# ---------------------------------------------------------------------------
# separation scan
# ---------------------------------------------------------------------------


def test_scan_rows_conjunction_property():
    res = dueck_separation_scan(6, 4096, 4, mode="mac")
    assert res.minimal is None
    assert res.reports is None
    assert res.rows
    for row in res.rows:
        assert set(row) >= {"k", "a", "lemma_violated", "lemma_slack", "passes"}
        if row["passes"]:
            assert row["lemma_violated"] and row["step1_ok"]
    doc = res.to_json()
    assert doc["minimal"] is None
    assert doc["mode"] == "mac"


def test_scan_finds_boundary_and_certifies():
    res = dueck_separation_scan(6, 2 ** 20, 21, mode="mac")
    assert res.minimal == (21, 890454)
    assert res.reports is not None
    assert res.reports["lemma"]["violated"] is True
    assert res.reports["step1"]["overall"] is True
    boundary = [r for r in res.rows if r["k"] == 21 and r["a"] == 890454]
    assert boundary and boundary[0]["passes"]
    below = [r for r in res.rows if r["k"] == 21 and r["a"] == 890453]
    assert below and not below[0]["passes"]


def test_scan_validation():
    with pytest.raises(ValueError, match="mode"):
        dueck_separation_scan(6, 4096, 4, mode="both")
    with pytest.raises(ValueError, match="eta"):
        dueck_separation_scan(7, 4096, 4)
    with pytest.raises(ValueError, match="a_max"):
        dueck_separation_scan(6, 4, 4)


# ---------------------------------------------------------------------------
# shared report plumbing
# ---------------------------------------------------------------------------


def test_condition_report_record_lookup():
    rep = check_isolated(DueckParams(890454, 21, 6))
    assert isinstance(rep.record("rate-1"), ConditionRecord)
    with pytest.raises(KeyError):
        rep.record("no-such-condition")


def test_scheme_params_validation():
    with pytest.raises(ValueError):
        SchemeParams(-0.1, 0.5, 0.3, 0.5, 100)
    with pytest.raises(ValueError):
        SchemeParams(0.1, 0.5, 0.0, 0.5, 100)
    with pytest.raises(ValueError):
        SchemeParams(0.1, 0.5, 0.3, 0.0, 100)
    with pytest.raises(ValueError):
        SchemeParams(0.1, 0.5, 0.3, 0.5, 0)
    with pytest.raises(ValueError):
        SchemeParams(0.1, 0.5, 0.3, 0.5, 100, side_a=3)
