import itertools
import math

import numpy as np
import pytest

from fblcode.core import Alphabet, BudgetError, Channel, JointPmf, Pmf, product_alphabet
from fblcode.info import (
    GkwDecomposition,
    binary_entropy,
    binary_entropy_log,
    composition_counts,
    conditional_entropy,
    conditional_kl,
    entropy,
    gkw_decomposition,
    is_integer_type,
    mutual_information,
    sequence_counts,
    sequence_type,
    typical_set,
)


# ---------------------------------------------------------------------------
# entropies and divergences
# ---------------------------------------------------------------------------


def test_entropy_known_values():
    assert entropy(Pmf.uniform(Alphabet.range(8))) == pytest.approx(math.log(8), rel=1e-12)
    assert entropy(Pmf(Alphabet.range(3), [1.0, 0.0, 0.0])) == 0.0
    assert entropy(Pmf(Alphabet.range(2), [0.25, 0.75])) == pytest.approx(
        binary_entropy(0.25), rel=1e-12
    )


def _demo_joint():
    probs = np.array([[0.1, 0.2, 0.3], [0.15, 0.05, 0.2]])
    return JointPmf(("x", "y"), (Alphabet.range(2), Alphabet.range(3)), probs)


def test_entropy_of_joint_axes():
    j = _demo_joint()
    assert entropy(j) == pytest.approx(entropy(j, ("x", "y")), rel=1e-12)
    assert entropy(j, "x") == pytest.approx(entropy(j.marginal("x")), rel=1e-12)


def test_chain_rule():
    j = _demo_joint()
    lhs = entropy(j)
    rhs = entropy(j, "x") + conditional_entropy(j, "y", "x")
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_mutual_information_symmetry_and_sign():
    j = _demo_joint()
    ab = mutual_information(j, "x", "y")
    ba = mutual_information(j, "y", "x")
    assert ab == pytest.approx(ba, abs=1e-12)
    assert ab >= 0.0
    assert ab == pytest.approx(
        entropy(j, "x") + entropy(j, "y") - entropy(j), abs=1e-12
    )


def test_mutual_information_zero_for_independent():
    px = Pmf(Alphabet.range(2), [0.3, 0.7])
    py = Pmf(Alphabet.range(3), [0.2, 0.5, 0.3])
    probs = np.outer(px.probs, py.probs)
    j = JointPmf(("x", "y"), (px.alphabet, py.alphabet), probs)
    assert mutual_information(j, "x", "y") == pytest.approx(0.0, abs=1e-12)


def test_conditional_kl_values():
    bits = Alphabet.range(2)
    v = Channel(bits, bits, [[0.9, 0.1], [0.2, 0.8]])
    w = Channel(bits, bits, [[0.8, 0.2], [0.3, 0.7]])
    p = Pmf(bits, [0.4, 0.6])
    expected = 0.0
    for i, pu in enumerate(p.probs):
        for j in range(2):
            expected += pu * v.probs[i][j] * math.log(v.probs[i][j] / w.probs[i][j])
    assert conditional_kl(v, w, p) == pytest.approx(expected, rel=1e-12)
    assert conditional_kl(v, v, p) == 0.0


def test_conditional_kl_infinite_outside_support():
    bits = Alphabet.range(2)
    v = Channel(bits, bits, [[0.5, 0.5], [0.5, 0.5]])
    w = Channel(bits, bits, [[1.0, 0.0], [0.5, 0.5]])
    p = Pmf.uniform(bits)
    assert conditional_kl(v, w, p) == math.inf


def test_conditional_kl_validation():
    bits = Alphabet.range(2)
    trits = Alphabet.range(3)
    v = Channel(bits, bits, [[0.5, 0.5], [0.5, 0.5]])
    w = Channel(bits, trits, [[0.5, 0.25, 0.25], [0.5, 0.25, 0.25]])
    with pytest.raises(ValueError):
        conditional_kl(v, w, Pmf.uniform(bits))
    with pytest.raises(ValueError):
        conditional_kl(v, v, Pmf.uniform(trits))


def test_binary_entropy_values_and_domain():
    assert binary_entropy(0.5) == pytest.approx(math.log(2), rel=1e-12)
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    x = 0.11
    assert binary_entropy(x) == pytest.approx(
        -x * math.log(x) - (1 - x) * math.log(1 - x), rel=1e-12
    )
    with pytest.raises(ValueError):
        binary_entropy(-0.01)
    with pytest.raises(ValueError):
        binary_entropy(1.01)


def test_binary_entropy_log_agrees_and_extends():
    for lx in (-0.5, -3.0, -17.0):
        assert binary_entropy_log(lx) == pytest.approx(
            binary_entropy(math.exp(lx)), rel=1e-12
        )
    lx = -50.0
    x = math.exp(lx)
    assert binary_entropy_log(lx) == pytest.approx(x * (1 - lx), rel=1e-12)
    assert binary_entropy_log(-1e6) == 0.0
    with pytest.raises(ValueError):
        binary_entropy_log(0.1)


# ---------------------------------------------------------------------------
# sequence types
# ---------------------------------------------------------------------------


def test_sequence_counts_and_type():
    a = Alphabet(("x", "y", "z"))
    seq = ("x", "y", "x", "x")
    assert list(sequence_counts(seq, a)) == [3, 1, 0]
    t = sequence_type(seq, a)
    assert np.allclose(t.probs, [0.75, 0.25, 0.0])
    with pytest.raises(ValueError):
        sequence_type((), a)


def test_is_integer_type():
    a = Alphabet.range(2)
    third = Pmf(a, [1.0 / 3.0, 2.0 / 3.0])
    assert is_integer_type(third, 3)
    assert is_integer_type(third, 6)
    assert not is_integer_type(third, 4)
    assert is_integer_type(Pmf.uniform(a), 2)
    assert not is_integer_type(Pmf.uniform(a), 3)


def test_composition_counts():
    a = Alphabet.range(3)
    p = Pmf(a, [0.5, 0.25, 0.25])
    assert composition_counts(p, 8) == [4, 2, 2]
    with pytest.raises(ValueError):
        composition_counts(p, 3)


# ---------------------------------------------------------------------------
# typical sets against a brute-force oracle
# ---------------------------------------------------------------------------


def _brute_members(pmf, l, delta):
    members = []
    for seq in itertools.product(pmf.alphabet.symbols, repeat=l):
        ok = True
        for i, sym in enumerate(pmf.alphabet.symbols):
            c = seq.count(sym)
            p = float(pmf.probs[i])
            if p == 0.0:
                if c > 0:
                    ok = False
                    break
            elif not (l * p * (1 - delta) - 1e-12 <= c <= l * p * (1 + delta) + 1e-12):
                ok = False
                break
        if ok:
            members.append(seq)
    return members


@pytest.mark.parametrize("delta", [0.0, 0.25, 0.5, 1.0])
def test_typical_set_matches_brute_force(rng, delta):
    for size in (2, 3):
        probs = rng.dirichlet(np.ones(size))
        pmf = Pmf(Alphabet.range(size), probs)
        l = 6
        ts = typical_set(pmf, l, delta)
        brute = _brute_members(pmf, l, delta)
        got = list(ts.sequences())
        assert got == brute
        assert ts.size() == len(brute)
        brute_mass = sum(
            math.prod(float(pmf.probs[pmf.alphabet.index(s)]) for s in seq)
            for seq in brute
        )
        assert ts.probability() == pytest.approx(brute_mass, abs=1e-12)
        for seq in brute:
            assert ts.contains(seq)


def test_typical_set_lexicographic_order():
    pmf = Pmf(Alphabet(("a", "b", "c")), [0.5, 0.3, 0.2])
    ts = typical_set(pmf, 5, 1.0)
    seqs = list(ts.sequences())
    keyed = [tuple(pmf.alphabet.index(s) for s in seq) for seq in seqs]
    assert keyed == sorted(keyed)
    assert len(seqs) == len(set(seqs))


def test_typical_set_excludes_zero_mass_symbols():
    pmf = Pmf(Alphabet.range(3), [0.5, 0.5, 0.0])
    ts = typical_set(pmf, 4, 1.0)
    assert ts.hi[2] == 0
    assert not ts.contains((0, 1, 2, 0))
    assert all(2 not in seq for seq in ts.sequences())


def test_typical_set_delta_zero_is_exact_composition():
    pmf = Pmf.uniform(Alphabet.range(2))
    ts = typical_set(pmf, 4, 0.0)
    assert ts.size() == 6
    assert ts.contains((0, 0, 1, 1))
    assert not ts.contains((0, 0, 0, 1))


def test_typical_set_wrong_length_and_validation():
    pmf = Pmf.uniform(Alphabet.range(2))
    ts = typical_set(pmf, 4, 0.5)
    assert not ts.contains((0, 1, 0))
    with pytest.raises(ValueError):
        typical_set(pmf, 0, 0.5)
    with pytest.raises(ValueError):
        typical_set(pmf, 4, -0.1)


def test_typical_set_budget_guard(monkeypatch):
    pmf = Pmf.uniform(Alphabet.range(3))
    ts = typical_set(pmf, 9, 1.0)
    monkeypatch.setenv("FBL_BUDGET_CELLS", "4")
    with pytest.raises(BudgetError):
        ts.size()
    with pytest.raises(BudgetError):
        list(ts.sequences())


# ---------------------------------------------------------------------------
# common part decomposition
# ---------------------------------------------------------------------------


def _joint_from_probs(probs):
    probs = np.asarray(probs, dtype=float)
    na, nb = probs.shape
    return JointPmf(("s1", "s2"), (Alphabet.range(na), Alphabet.range(nb)), probs)


def test_gkw_two_block_example():
    probs = [[0.2, 0.2, 0.0], [0.2, 0.2, 0.0], [0.0, 0.0, 0.2]]
    d = gkw_decomposition(_joint_from_probs(probs))
    assert isinstance(d, GkwDecomposition)
    assert len(d.components) == 2
    assert not d.has_null_component
    assert np.allclose(sorted(d.k_pmf.probs), [0.2, 0.8])
    assert d.common_entropy() == pytest.approx(binary_entropy(0.2), rel=1e-12)
    assert d.f1[0] == d.f1[1] != d.f1[2]
    assert d.f2[0] == d.f2[1] != d.f2[2]


def test_gkw_fully_connected_is_trivial():
    d = gkw_decomposition(_joint_from_probs([[0.25, 0.25], [0.25, 0.25]]))
    assert len(d.components) == 1
    assert d.common_entropy() == 0.0


def test_gkw_null_component_for_zero_marginals():
    probs = [[0.5, 0.0], [0.0, 0.5], [0.0, 0.0]]
    d = gkw_decomposition(_joint_from_probs(probs))
    assert d.has_null_component
    assert len(d.components) == 2
    assert len(d.k_alphabet) == 3
    assert float(d.k_pmf.probs[-1]) == 0.0
    assert d.f1[2] == 2
    assert set(d.f2.values()) <= {0, 1}


def test_gkw_functions_agree_almost_surely():
    probs = [[0.1, 0.3, 0.0], [0.0, 0.0, 0.6]]
    j = _joint_from_probs(probs)
    d = gkw_decomposition(j)
    for i, a in enumerate(j.alphabets[0].symbols):
        for k, b in enumerate(j.alphabets[1].symbols):
            if j.probs[i, k] > 0:
                assert d.f1[a] == d.f2[b]


def _bfs_components(probs):
    """Independent connected-component oracle on the support bipartite graph."""
    na, nb = probs.shape
    comps = set()
    left = {i for i in range(na) if probs[i].sum() > 0}
    while left:
        rows, cols = {min(left)}, set()
        changed = True
        while changed:
            changed = False
            for i in range(na):
                for j in range(nb):
                    if probs[i, j] > 0:
                        if i in rows and j not in cols:
                            cols.add(j)
                            changed = True
                        if j in cols and i not in rows:
                            rows.add(i)
                            changed = True
        comps.add((frozenset(rows), frozenset(cols)))
        left -= rows
    return comps


def _binary_common_pairs(probs):
    """All pairs of 0/1 labelings of the two axes that agree on the support."""
    na, nb = probs.shape
    for mask1 in range(2 ** na):
        g1 = [(mask1 >> i) & 1 for i in range(na)]
        for mask2 in range(2 ** nb):
            g2 = [(mask2 >> j) & 1 for j in range(nb)]
            if all(
                g1[i] == g2[j]
                for i in range(na)
                for j in range(nb)
                if probs[i, j] > 0
            ):
                yield g1, g2


def test_gkw_matches_bfs_oracle_and_is_maximal(rng):
    """Exhaustive maximality check on random supports up to 5 x 5 labels.

    The decomposition must equal the support graph components, and every
    pair of binary labelings agreeing almost surely must be constant on
    each component; binary coarsenings separate partitions, so this shows
    no strictly finer common labeling exists.
    """
    cases = [np.eye(5) / 5.0, np.full((4, 4), 1 / 16.0)]
    for _ in range(40):
        na = int(rng.integers(2, 6))
        nb = int(rng.integers(2, 6))
        mask = rng.random((na, nb)) < 0.35
        if not mask.any():
            mask[0, 0] = True
        probs = np.where(mask, rng.random((na, nb)) + 0.05, 0.0)
        cases.append(probs / probs.sum())
    for probs in cases:
        j = _joint_from_probs(probs)
        d = gkw_decomposition(j)
        got = {
            (
                frozenset(j.alphabets[0].index(a) for a in side_a),
                frozenset(j.alphabets[1].index(b) for b in side_b),
            )
            for side_a, side_b in d.components
        }
        assert got == _bfs_components(probs)
        for rows, cols in got:
            mass = sum(probs[i, k] for i in rows for k in range(probs.shape[1]))
            label = d.f1[j.alphabets[0].symbols[min(rows)]]
            assert float(d.k_pmf.probs[label]) == pytest.approx(mass, abs=1e-12)
        pa = probs.sum(axis=1)
        for g1, g2 in _binary_common_pairs(probs):
            for rows, _ in got:
                vals = {g1[i] for i in rows}
                assert len(vals) == 1
        live = [i for i in range(probs.shape[0]) if pa[i] > 0]
        for i in live:
            for k in live:
                if d.f1[j.alphabets[0].symbols[i]] != d.f1[j.alphabets[0].symbols[k]]:
                    assert any(
                        (i in rows) != (k in rows) for rows, _ in got
                    )


def test_gkw_requires_two_axes():
    j = _demo_joint().add_deterministic(
        "z", ("x", "y"), lambda x, y: 0, Alphabet.range(1)
    )
    with pytest.raises(ValueError):
        gkw_decomposition(j)
