"""Finite alphabets, pmfs, channels, and dense joint distributions.

Everything downstream (information functionals, exponent solvers, the
condition checkers, the simulator's exact pmf verification) works over
explicit finite distributions.  A JointPmf is a dense numpy array with one
axis per named variable; products, channel extensions, and deterministic
functions of existing axes are the only construction steps, so any joint
built here is exactly the factored law it claims to be.
"""

from __future__ import annotations

import itertools
import math
import os

import numpy as np

__all__ = [
    "Alphabet",
    "BudgetError",
    "Channel",
    "JointPmf",
    "Pmf",
    "cell_budget",
    "product_alphabet",
]

_SUM_TOL = 1e-9
DEFAULT_BUDGET_CELLS = 2 ** 24


class BudgetError(ValueError):
    """An exact enumeration would exceed the configured cell budget."""


def cell_budget() -> int:
    """Current enumeration budget, read from FBL_BUDGET_CELLS each call."""
    raw = os.environ.get("FBL_BUDGET_CELLS")
    if raw is None:
        return DEFAULT_BUDGET_CELLS
    try:
        budget = int(raw)
    except ValueError:
        raise ValueError("FBL_BUDGET_CELLS must be an integer, got %r" % (raw,))
    if budget < 1:
        raise ValueError("FBL_BUDGET_CELLS must be positive, got %d" % budget)
    return budget


class Alphabet:
    """Ordered finite set of distinct hashable symbols."""

    __slots__ = ("symbols", "_index")

    def __init__(self, symbols):
        symbols = tuple(symbols)
        if not symbols:
            raise ValueError("alphabet must be nonempty")
        index = {}
        for i, s in enumerate(symbols):
            if s in index:
                raise ValueError("duplicate symbol %r in alphabet" % (s,))
            index[s] = i
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "_index", index)

    def __setattr__(self, name, value):
        raise AttributeError("Alphabet is immutable")

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __contains__(self, symbol):
        return symbol in self._index

    def __getitem__(self, i):
        return self.symbols[i]

    def index(self, symbol) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise ValueError("symbol %r not in alphabet" % (symbol,))

    def __eq__(self, other):
        return isinstance(other, Alphabet) and self.symbols == other.symbols

    def __hash__(self):
        return hash(self.symbols)

    def __repr__(self):
        return "Alphabet(%r)" % (list(self.symbols),)

    @classmethod
    def range(cls, n: int) -> "Alphabet":
        if n < 1:
            raise ValueError("alphabet size must be at least 1, got %d" % n)
        return cls(range(n))

    def to_json(self):
        return list(self.symbols)


def product_alphabet(*alphabets: Alphabet) -> Alphabet:
    """Alphabet of tuples, ordered like itertools.product."""
    return Alphabet(itertools.product(*(a.symbols for a in alphabets)))


def _check_probs(probs, what):
    probs = np.asarray(probs, dtype=float)
    if probs.ndim != 1:
        raise ValueError("%s must be a 1-d probability vector" % what)
    if np.any(probs < 0) or np.any(~np.isfinite(probs)):
        raise ValueError("%s has negative or non-finite entries" % what)
    total = float(probs.sum())
    if abs(total - 1.0) > _SUM_TOL:
        raise ValueError("%s sums to %.17g, expected 1 within %g" % (what, total, _SUM_TOL))
    return probs / total


class Pmf:
    """Probability mass function over an Alphabet.

    The entries must sum to 1 within 1e-9; the stored vector is
    renormalized exactly.
    """

    __slots__ = ("alphabet", "probs")

    def __init__(self, alphabet: Alphabet, probs):
        probs = _check_probs(probs, "pmf")
        if len(probs) != len(alphabet):
            raise ValueError(
                "pmf length %d does not match alphabet size %d" % (len(probs), len(alphabet))
            )
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "probs", probs)
        probs.setflags(write=False)

    def __setattr__(self, name, value):
        raise AttributeError("Pmf is immutable")

    def __len__(self):
        return len(self.probs)

    def prob(self, symbol) -> float:
        return float(self.probs[self.alphabet.index(symbol)])

    def support(self):
        return [s for s, p in zip(self.alphabet.symbols, self.probs) if p > 0]

    @classmethod
    def uniform(cls, alphabet: Alphabet) -> "Pmf":
        n = len(alphabet)
        return cls(alphabet, np.full(n, 1.0 / n))

    @classmethod
    def from_dict(cls, alphabet: Alphabet, mapping) -> "Pmf":
        probs = np.zeros(len(alphabet))
        for symbol, p in mapping.items():
            probs[alphabet.index(symbol)] = p
        return cls(alphabet, probs)

    def __repr__(self):
        return "Pmf(%r, %r)" % (self.alphabet, list(self.probs))

    def to_json(self):
        return {"alphabet": self.alphabet.to_json(), "probs": [float(p) for p in self.probs]}

    @classmethod
    def from_json(cls, obj) -> "Pmf":
        return cls(Alphabet(_symbols_from_json(obj["alphabet"])), obj["probs"])


def _symbols_from_json(symbols):
    # JSON has no tuples; lists of lists round-trip as tuples of tuples
    out = []
    for s in symbols:
        out.append(tuple(_symbols_from_json(s)) if isinstance(s, list) else s)
    return out


class Channel:
    """Conditional pmf: one output distribution per input symbol."""

    __slots__ = ("input", "output", "probs")

    def __init__(self, input_alphabet: Alphabet, output_alphabet: Alphabet, rows):
        rows = np.asarray(rows, dtype=float)
        if rows.shape != (len(input_alphabet), len(output_alphabet)):
            raise ValueError(
                "channel matrix shape %r does not match alphabets (%d, %d)"
                % (rows.shape, len(input_alphabet), len(output_alphabet))
            )
        rows = np.vstack([_check_probs(rows[i], "channel row %d" % i) for i in range(len(rows))])
        object.__setattr__(self, "input", input_alphabet)
        object.__setattr__(self, "output", output_alphabet)
        object.__setattr__(self, "probs", rows)
        rows.setflags(write=False)

    def __setattr__(self, name, value):
        raise AttributeError("Channel is immutable")

    def row(self, symbol) -> Pmf:
        return Pmf(self.output, self.probs[self.input.index(symbol)])

    def prob(self, out_symbol, in_symbol) -> float:
        return float(self.probs[self.input.index(in_symbol), self.output.index(out_symbol)])

    @classmethod
    def deterministic(cls, input_alphabet: Alphabet, output_alphabet: Alphabet, func) -> "Channel":
        rows = np.zeros((len(input_alphabet), len(output_alphabet)))
        for i, s in enumerate(input_alphabet.symbols):
            rows[i, output_alphabet.index(func(s))] = 1.0
        return cls(input_alphabet, output_alphabet, rows)

    @classmethod
    def from_function(cls, input_alphabet: Alphabet, output_alphabet: Alphabet, func) -> "Channel":
        """Rows given by func(input_symbol, output_symbol) -> probability."""
        rows = np.array(
            [[func(u, y) for y in output_alphabet.symbols] for u in input_alphabet.symbols],
            dtype=float,
        )
        return cls(input_alphabet, output_alphabet, rows)

    def __repr__(self):
        return "Channel(%d inputs, %d outputs)" % (len(self.input), len(self.output))

    def to_json(self):
        return {
            "input": self.input.to_json(),
            "output": self.output.to_json(),
            "rows": [[float(p) for p in row] for row in self.probs],
        }

    @classmethod
    def from_json(cls, obj) -> "Channel":
        return cls(
            Alphabet(_symbols_from_json(obj["input"])),
            Alphabet(_symbols_from_json(obj["output"])),
            obj["rows"],
        )


class JointPmf:
    """Dense joint distribution over named axes.

    Axis order is significant and preserved by every operation.  The cell
    count of any constructed joint must stay within cell_budget().
    """

    __slots__ = ("names", "alphabets", "probs")

    def __init__(self, names, alphabets, probs, renormalize=True):
        names = tuple(names)
        alphabets = tuple(alphabets)
        if len(names) != len(alphabets):
            raise ValueError("need one alphabet per axis name")
        if len(set(names)) != len(names):
            raise ValueError("duplicate axis names %r" % (names,))
        probs = np.asarray(probs, dtype=float)
        expected = tuple(len(a) for a in alphabets)
        if probs.shape != expected:
            raise ValueError("probs shape %r, axes imply %r" % (probs.shape, expected))
        if probs.size > cell_budget():
            raise BudgetError(
                "joint pmf needs %d cells, budget is %d (set FBL_BUDGET_CELLS to raise)"
                % (probs.size, cell_budget())
            )
        if np.any(probs < 0) or np.any(~np.isfinite(probs)):
            raise ValueError("joint pmf has negative or non-finite entries")
        total = float(probs.sum())
        if renormalize:
            if abs(total - 1.0) > _SUM_TOL:
                raise ValueError("joint pmf sums to %.17g, expected 1" % total)
            probs = probs / total
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "alphabets", alphabets)
        object.__setattr__(self, "probs", probs)
        probs.setflags(write=False)

    def __setattr__(self, name, value):
        raise AttributeError("JointPmf is immutable")

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ValueError("no axis named %r, have %r" % (name, self.names))

    def alphabet(self, name: str) -> Alphabet:
        return self.alphabets[self.axis(name)]

    @classmethod
    def from_pmf(cls, name: str, pmf: Pmf) -> "JointPmf":
        return cls((name,), (pmf.alphabet,), pmf.probs)

    def product(self, other: "JointPmf") -> "JointPmf":
        """Independent product; axis names must not collide."""
        overlap = set(self.names) & set(other.names)
        if overlap:
            raise ValueError("axes %r appear on both sides" % (sorted(overlap),))
        probs = np.multiply.outer(self.probs, other.probs)
        return JointPmf(self.names + other.names, self.alphabets + other.alphabets, probs)

    def marginal(self, names) -> "JointPmf":
        """Marginal over the listed axes, in the listed order."""
        names = (names,) if isinstance(names, str) else tuple(names)
        keep = [self.axis(n) for n in names]
        drop = tuple(i for i in range(len(self.names)) if i not in keep)
        summed = self.probs.sum(axis=drop) if drop else self.probs
        kept_order = [i for i in range(len(self.names)) if i not in drop]
        perm = [kept_order.index(i) for i in keep]
        return JointPmf(
            names,
            tuple(self.alphabets[i] for i in keep),
            np.transpose(summed, perm),
            renormalize=False,
        )

    def to_pmf(self, name: str) -> Pmf:
        m = self.marginal((name,))
        return Pmf(m.alphabets[0], m.probs)

    def extend(self, channel: Channel, given, name: str) -> "JointPmf":
        """Append axis `name` drawn from `channel` applied to the `given` axes.

        When `given` lists several axes the channel input symbols are the
        corresponding label tuples.
        """
        given = (given,) if isinstance(given, str) else tuple(given)
        if name in self.names:
            raise ValueError("axis %r already present" % (name,))
        axes = [self.axis(n) for n in given]
        row_index = self._row_lookup(axes, channel.input)
        new_probs = self.probs[..., None] * channel.probs[row_index]
        return JointPmf(
            self.names + (name,), self.alphabets + (channel.output,), new_probs
        )

    def add_deterministic(self, name: str, given, func, alphabet: Alphabet) -> "JointPmf":
        """Append axis `name` = func(labels of `given` axes)."""
        given = (given,) if isinstance(given, str) else tuple(given)
        if len(given) == 1:
            wrapped = lambda sym: func(sym)
        else:
            wrapped = lambda sym: func(*sym)
        source = product_alphabet(*(self.alphabet(n) for n in given)) if len(given) > 1 else self.alphabet(given[0])
        chan = Channel.deterministic(source, alphabet, wrapped)
        return self.extend(chan, given, name)

    def _row_lookup(self, axes, input_alphabet: Alphabet):
        """Channel-row index array broadcastable against probs."""
        ndim = self.probs.ndim
        if len(axes) == 1:
            alpha = self.alphabets[axes[0]]
            rows = np.array([input_alphabet.index(s) for s in alpha.symbols], dtype=np.intp)
            shape = [1] * ndim
            shape[axes[0]] = len(alpha)
            return rows.reshape(shape)
        sel_shape = tuple(len(self.alphabets[a]) for a in axes)
        alphas = [self.alphabets[a] for a in axes]
        flat = np.empty(sel_shape, dtype=np.intp)
        for combo in np.ndindex(*sel_shape):
            label = tuple(alphas[k][combo[k]] for k in range(len(axes)))
            flat[combo] = input_alphabet.index(label)
        # reorder to increasing axis position so a plain reshape broadcasts
        flat = np.transpose(flat, np.argsort(axes))
        shape = [1] * ndim
        for a in axes:
            shape[a] = len(self.alphabets[a])
        return flat.reshape(shape)

    def prob(self, assignment: dict) -> float:
        if set(assignment) != set(self.names):
            raise ValueError("assignment must name every axis")
        idx = tuple(
            self.alphabets[i].index(assignment[n]) for i, n in enumerate(self.names)
        )
        return float(self.probs[idx])

    def permute(self, names) -> "JointPmf":
        names = tuple(names)
        if set(names) != set(self.names):
            raise ValueError("permute must list every axis exactly once")
        perm = [self.axis(n) for n in names]
        return JointPmf(
            names,
            tuple(self.alphabets[i] for i in perm),
            np.transpose(self.probs, perm),
            renormalize=False,
        )

    def __repr__(self):
        return "JointPmf(axes=%r, shape=%r)" % (self.names, self.probs.shape)
