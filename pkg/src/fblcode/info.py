"""Exact information functionals and typicality over finite alphabets.

All quantities are in nats.  Entropies and mutual informations are computed
directly from dense joints; divergences flag absolute-continuity violations
with +inf.  Typical sets use per-symbol relative count windows with a hard
zero outside the support, and support exact membership tests, exact counting,
and lexicographic enumeration under the global cell budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import Alphabet, BudgetError, JointPmf, Pmf, cell_budget

__all__ = [
    "GkwDecomposition",
    "TypicalSet",
    "binary_entropy",
    "binary_entropy_log",
    "composition_counts",
    "conditional_entropy",
    "conditional_kl",
    "entropy",
    "gkw_decomposition",
    "is_integer_type",
    "mutual_information",
    "sequence_counts",
    "sequence_type",
    "typical_set",
]


def _entropy_of(probs) -> float:
    p = np.asarray(probs, dtype=float).ravel()
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


def entropy(dist, axes=None) -> float:
    """H of a Pmf, or of selected axes of a JointPmf."""
    if isinstance(dist, Pmf):
        if axes is not None:
            raise ValueError("axes only apply to a JointPmf")
        return _entropy_of(dist.probs)
    if not isinstance(dist, JointPmf):
        raise ValueError("expected Pmf or JointPmf, got %r" % type(dist).__name__)
    if axes is None:
        return _entropy_of(dist.probs)
    axes = (axes,) if isinstance(axes, str) else tuple(axes)
    return _entropy_of(dist.marginal(axes).probs)


def _as_axes(spec):
    return (spec,) if isinstance(spec, str) else tuple(spec)


def conditional_entropy(joint: JointPmf, of, given=()) -> float:
    """H(of | given) = H(of, given) - H(given)."""
    of = _as_axes(of)
    given = _as_axes(given)
    if set(of) & set(given):
        raise ValueError("axes %r appear on both sides" % (sorted(set(of) & set(given)),))
    if not given:
        return entropy(joint, of)
    return entropy(joint, of + given) - entropy(joint, given)


def mutual_information(joint: JointPmf, a, b, given=()) -> float:
    """I(a ; b | given), computed as H(a|g) + H(b|g) - H(a,b|g)."""
    a = _as_axes(a)
    b = _as_axes(b)
    given = _as_axes(given)
    for x, y in ((a, b), (a, given), (b, given)):
        if set(x) & set(y):
            raise ValueError("axis groups overlap on %r" % (sorted(set(x) & set(y)),))
    value = (
        conditional_entropy(joint, a, given)
        + conditional_entropy(joint, b, given)
        - conditional_entropy(joint, a + b, given)
    )
    return max(0.0, value)


def conditional_kl(v, w, p: Pmf) -> float:
    """D(v || w | p); +inf when v escapes w's support under p."""
    if v.input != w.input or v.output != w.output:
        raise ValueError("channels must share alphabets")
    if p.alphabet != v.input:
        raise ValueError("input pmf alphabet does not match the channels")
    total = 0.0
    for i, pu in enumerate(p.probs):
        if pu == 0:
            continue
        for j in range(len(v.output)):
            a = v.probs[i, j]
            if a == 0:
                continue
            b = w.probs[i, j]
            if b == 0:
                return math.inf
            total += pu * a * math.log(a / b)
    return max(0.0, total)


def binary_entropy(x: float) -> float:
    """h(x) = -x log x - (1-x) log(1-x), in nats."""
    if x < -1e-12 or x > 1 + 1e-12:
        raise ValueError("binary entropy argument %r outside [0, 1]" % (x,))
    x = min(1.0, max(0.0, x))
    if x == 0.0 or x == 1.0:
        return 0.0
    return float(-x * math.log(x) - (1 - x) * math.log1p(-x))


def binary_entropy_log(log_x: float) -> float:
    """h(exp(log_x)), stable when the argument is far below float range.

    Below exp(-18) the expansion h(x) = x(1 - log x) + O(x^2) is exact to
    double precision; the result underflows to 0.0 once x(1 - log x) drops
    under the smallest subnormal, which is the correct fold for comparisons
    against O(1) quantities.
    """
    if log_x > 1e-12:
        raise ValueError("log of a probability must be nonpositive")
    if log_x > -18.0:
        return binary_entropy(math.exp(log_x))
    log_hb = log_x + math.log1p(-log_x)
    return math.exp(log_hb) if log_hb > -745.0 else 0.0


# ---------------------------------------------------------------------------
# sequence types and typical sets
# ---------------------------------------------------------------------------


def sequence_counts(seq, alphabet: Alphabet) -> np.ndarray:
    counts = np.zeros(len(alphabet), dtype=np.int64)
    for s in seq:
        counts[alphabet.index(s)] += 1
    return counts


def sequence_type(seq, alphabet: Alphabet) -> Pmf:
    """Empirical pmf of a nonempty sequence."""
    seq = tuple(seq)
    if not seq:
        raise ValueError("sequence must be nonempty")
    return Pmf(alphabet, sequence_counts(seq, alphabet) / len(seq))


def _snap_fraction(p: float) -> Fraction:
    return Fraction(p).limit_denominator(10 ** 7)


def is_integer_type(pmf: Pmf, l: int) -> bool:
    """True when every l * p(symbol) is an integer (after rational snap)."""
    if l < 1:
        raise ValueError("block length must be positive, got %r" % (l,))
    fracs = [_snap_fraction(float(p)) for p in pmf.probs]
    if sum(fracs) != 1:
        return False
    return all((f * l).denominator == 1 for f in fracs)


def composition_counts(pmf: Pmf, l: int):
    """Exact symbol counts l * p as Python ints."""
    if not is_integer_type(pmf, l):
        raise ValueError("pmf is not an integer type at block length %d" % l)
    counts = [int(_snap_fraction(float(p)) * l) for p in pmf.probs]
    assert sum(counts) == l
    return counts


@dataclass(frozen=True)
class TypicalSet:
    """Sequences whose per-symbol counts sit in relative delta windows.

    A sequence u of length l is a member iff for every symbol b,
    |N(b|u)/l - p(b)| <= delta * p(b).  Symbols with p(b) = 0 must not
    appear at all.
    """

    alphabet: Alphabet
    pmf: Pmf
    l: int
    delta: float
    lo: tuple
    hi: tuple

    def contains(self, seq) -> bool:
        seq = tuple(seq)
        if len(seq) != self.l:
            return False
        counts = sequence_counts(seq, self.alphabet)
        return all(self.lo[i] <= counts[i] <= self.hi[i] for i in range(len(counts)))

    def _count_vectors(self):
        """All admissible count vectors, lexicographic, budget guarded."""
        n = len(self.alphabet)
        budget = cell_budget()
        visited = 0
        suffix_lo = [0] * (n + 1)
        suffix_hi = [0] * (n + 1)
        for i in range(n - 1, -1, -1):
            suffix_lo[i] = suffix_lo[i + 1] + self.lo[i]
            suffix_hi[i] = suffix_hi[i + 1] + self.hi[i]
        stack = [(0, self.l, ())]
        while stack:
            i, remaining, prefix = stack.pop()
            visited += 1
            if visited > budget:
                raise BudgetError("typical set count enumeration exceeded the cell budget")
            if i == n:
                if remaining == 0:
                    yield prefix
                continue
            # choose counts in decreasing order so the stack pops ascending
            lo_i = max(self.lo[i], remaining - suffix_hi[i + 1])
            hi_i = min(self.hi[i], remaining - suffix_lo[i + 1])
            for c in range(hi_i, lo_i - 1, -1):
                stack.append((i + 1, remaining - c, prefix + (c,)))

    def size(self) -> int:
        """Exact number of member sequences (Python int)."""
        total = 0
        fact = math.factorial(self.l)
        for counts in self._count_vectors():
            denom = 1
            for c in counts:
                denom *= math.factorial(c)
            total += fact // denom
        return total

    def sequences(self):
        """Yield members in lexicographic order over the alphabet."""
        n = len(self.alphabet)
        budget = cell_budget()
        if self.size() > budget:
            raise BudgetError("typical set enumeration exceeded the cell budget")
        symbols = self.alphabet.symbols

        def rec(used, remaining, prefix):
            if remaining == 0:
                yield prefix
                return
            for i in range(n):
                if used[i] >= self.hi[i]:
                    continue
                need = sum(max(0, self.lo[j] - used[j]) for j in range(n))
                extra_need = 1 if used[i] < self.lo[i] else 0
                if need - extra_need > remaining - 1:
                    continue
                used[i] += 1
                yield from rec(used, remaining - 1, prefix + (symbols[i],))
                used[i] -= 1

        yield from rec([0] * n, self.l, ())

    def probability(self) -> float:
        """Exact probability mass of the set under the product law."""
        total = 0.0
        fact = math.factorial(self.l)
        for counts in self._count_vectors():
            coeff = fact
            logp = 0.0
            for c, p in zip(counts, self.pmf.probs):
                coeff //= math.factorial(c)
                if c:
                    logp += c * math.log(p)
            total += coeff * math.exp(logp)
        return min(1.0, total)


def typical_set(pmf: Pmf, l: int, delta: float) -> TypicalSet:
    if l < 1:
        raise ValueError("block length must be positive, got %r" % (l,))
    if delta < 0:
        raise ValueError("delta must be nonnegative, got %r" % (delta,))
    lo, hi = [], []
    for p in pmf.probs:
        if p == 0:
            lo.append(0)
            hi.append(0)
        else:
            lo.append(max(0, math.ceil(l * p * (1 - delta) - 1e-12)))
            hi.append(min(l, math.floor(l * p * (1 + delta) + 1e-12)))
    return TypicalSet(pmf.alphabet, pmf, l, float(delta), tuple(lo), tuple(hi))


# ---------------------------------------------------------------------------
# common part of a pair of correlated sources
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GkwDecomposition:
    """Connected-component decomposition of a two-source support graph.

    f1 and f2 map source symbols to component labels and agree almost
    surely; k_pmf is the induced label distribution.  Symbols with zero
    marginal, if any, share one designated extra label so the maps stay
    total.
    """

    components: tuple
    k_alphabet: Alphabet
    k_pmf: Pmf
    f1: dict
    f2: dict
    has_null_component: bool

    def common_entropy(self) -> float:
        return entropy(self.k_pmf)


def gkw_decomposition(joint: JointPmf) -> GkwDecomposition:
    if len(joint.names) != 2:
        raise ValueError("need a joint over exactly two axes")
    alpha_a, alpha_b = joint.alphabets
    probs = joint.probs
    na, nb = probs.shape

    parent = list(range(na + nb))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)

    for i in range(na):
        for j in range(nb):
            if probs[i, j] > 0:
                union(i, na + j)

    pa = probs.sum(axis=1)
    pb = probs.sum(axis=0)
    roots = []
    for i in range(na):
        if pa[i] > 0:
            r = find(i)
            if r not in roots:
                roots.append(r)
    label = {r: k for k, r in enumerate(roots)}

    components = []
    mass = []
    for r in roots:
        side_a = tuple(alpha_a[i] for i in range(na) if pa[i] > 0 and find(i) == r)
        side_b = tuple(alpha_b[j] for j in range(nb) if pb[j] > 0 and find(na + j) == r)
        assert side_a and side_b
        components.append((side_a, side_b))
        mass.append(float(sum(probs[alpha_a.index(a)].sum() for a in side_a)))

    null_needed = bool(np.any(pa == 0) or np.any(pb == 0))
    n_labels = len(roots) + (1 if null_needed else 0)
    f1 = {}
    for i in range(na):
        f1[alpha_a[i]] = label[find(i)] if pa[i] > 0 else len(roots)
    f2 = {}
    for j in range(nb):
        f2[alpha_b[j]] = label[find(na + j)] if pb[j] > 0 else len(roots)

    k_probs = mass + ([0.0] if null_needed else [])
    return GkwDecomposition(
        components=tuple(components),
        k_alphabet=Alphabet.range(n_labels),
        k_pmf=Pmf(Alphabet.range(n_labels), k_probs),
        f1=f1,
        f2=f2,
        has_null_component=null_needed,
    )
