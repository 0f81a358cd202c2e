"""Sufficient-condition checkers and separation scanners.

Each checker evaluates one admissible-region condition system on an
explicitly supplied assignment of auxiliary pmfs and channels, reporting
every inequality with its slack.  Nothing here searches assignment space;
the only built-in assignment is the prescribed one used by the separation
scan, whose terms are closed forms and given capacity data rather than
materialized joints (such reports carry a bound_mode flag).

Strictness convention: conditions printed as strict inequalities are
satisfied when slack > 1e-12; closed inequalities when slack >= -1e-12.
Slacks that only exist at scales far below float resolution are certified
in the log domain and the record's note says so.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Alphabet, Channel, JointPmf, Pmf, product_alphabet
from .dueck import (
    DueckParams,
    ic_capacity_core,
    mac_capacity_core,
    satellite_models,
    source_stats,
)
from .exponents import (
    _float_over_big,
    block_disagreement,
    cc_error_bound,
    cc_error_bound_scalar,
    excess_rate,
    l_star,
    tau_bound,
    tau_bound_scalar,
)
from .info import (
    binary_entropy,
    binary_entropy_log,
    conditional_entropy,
    entropy,
    gkw_decomposition,
    is_integer_type,
    mutual_information,
)
from .logreal import LogReal

__all__ = [
    "ConditionRecord",
    "ConditionReport",
    "IcAssignment",
    "LemmaViolation",
    "MacAssignment",
    "ScanResult",
    "SchemeParams",
    "check_ces",
    "check_ic_chk",
    "check_ic_step1",
    "check_ic_step1_prescribed",
    "check_ic_step2",
    "check_isolated",
    "check_lc",
    "check_mac_step1",
    "check_mac_step1_prescribed",
    "check_mac_step2",
    "chk_region_contains",
    "dueck_separation_scan",
    "lemma_ces_violation",
    "lemma_lc_violation",
]

_STRICT_TOL = 1e-12
_HALF = LogReal.from_value(0.5)


@dataclass(frozen=True)
class ConditionRecord:
    name: str
    lhs: float
    rhs: float
    slack: float
    satisfied: bool
    note: str = ""

    def to_json(self):
        out = {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "satisfied": self.satisfied,
        }
        if self.note:
            out["note"] = self.note
        return out


def _strict(name, lhs, rhs, note="") -> ConditionRecord:
    slack = rhs - lhs
    return ConditionRecord(name, lhs, rhs, slack, slack > _STRICT_TOL, note)


def _closed(name, lhs, rhs, note="") -> ConditionRecord:
    slack = rhs - lhs
    return ConditionRecord(name, lhs, rhs, slack, slack >= -_STRICT_TOL, note)


def _unsat(name, rhs, note) -> ConditionRecord:
    return ConditionRecord(name, math.inf, rhs, -math.inf, False, note)


@dataclass(frozen=True)
class ConditionReport:
    records: tuple
    phi: dict
    overall: bool
    warnings: tuple = ()
    flags: dict = field(default_factory=dict)

    def record(self, name: str) -> ConditionRecord:
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError("no condition named %r" % (name,))

    def to_json(self):
        return {
            "records": [r.to_json() for r in self.records],
            "phi": self.phi,
            "overall": self.overall,
            "warnings": list(self.warnings),
            "flags": dict(self.flags),
        }


def _finish(records, phi, warnings=(), flags=None, extra_ok=True) -> ConditionReport:
    overall = bool(extra_ok) and all(r.satisfied for r in records)
    return ConditionReport(
        records=tuple(records),
        phi=phi,
        overall=overall,
        warnings=tuple(warnings),
        flags=dict(flags or {}),
    )


# ---------------------------------------------------------------------------
# assignments
# ---------------------------------------------------------------------------


def _sym(s):
    # JSON object keys are strings; map keys written as integers back to int
    try:
        return int(s)
    except (TypeError, ValueError):
        return s


def _syms(raw):
    out = []
    for s in raw:
        out.append(tuple(_syms(s)) if isinstance(s, list) else s)
    return out


def _source_from_json(obj) -> JointPmf:
    return JointPmf(
        ("s1", "s2"),
        (Alphabet(_syms(obj["alphabet1"])), Alphabet(_syms(obj["alphabet2"]))),
        np.asarray(obj["probs"], dtype=float),
    )


def _fmap_from_json(raw):
    if raw is None:
        return None
    return {_sym(key): val for key, val in raw.items()}


@dataclass(frozen=True)
class MacAssignment:
    """Candidate joint design for the two-sender single-receiver setting.

    x1_mapper rows are indexed by (u, v1) pairs and x2_mapper rows by
    (u, v2) pairs; the channel rows are indexed by (x1, x2) pairs.  f1/f2
    map source symbols to common-part labels; when omitted the connected
    component decomposition of the source supplies them.
    """

    source: JointPmf
    p_u: Pmf
    p_v1: Pmf
    p_v2: Pmf
    x1_mapper: Channel
    x2_mapper: Channel
    channel: Channel
    f1: dict | None = None
    f2: dict | None = None

    def __post_init__(self):
        if tuple(self.source.names) != ("s1", "s2"):
            raise ValueError("source joint must have axes ('s1', 's2')")
        if self.x1_mapper.input != product_alphabet(self.p_u.alphabet, self.p_v1.alphabet):
            raise ValueError("x1_mapper input must be the (u, v1) product alphabet")
        if self.x2_mapper.input != product_alphabet(self.p_u.alphabet, self.p_v2.alphabet):
            raise ValueError("x2_mapper input must be the (u, v2) product alphabet")
        pair = product_alphabet(self.x1_mapper.output, self.x2_mapper.output)
        if self.channel.input != pair:
            raise ValueError("channel input must be the (x1, x2) product alphabet")

    @classmethod
    def from_json(cls, obj) -> "MacAssignment":
        return cls(
            source=_source_from_json(obj["source"]),
            p_u=Pmf.from_json(obj["p_u"]),
            p_v1=Pmf.from_json(obj["p_v1"]),
            p_v2=Pmf.from_json(obj["p_v2"]),
            x1_mapper=Channel.from_json(obj["x1_mapper"]),
            x2_mapper=Channel.from_json(obj["x2_mapper"]),
            channel=Channel.from_json(obj["channel"]),
            f1=_fmap_from_json(obj.get("f1")),
            f2=_fmap_from_json(obj.get("f2")),
        )


@dataclass(frozen=True)
class IcAssignment:
    """Candidate joint design for the two-pair setting.

    The channel output symbols are (y1, y2) pairs, one component per
    receiver.  For the eight-family region p_w1/p_w2 must be present and
    the x mappers are indexed by (u, wj, vj) triples; otherwise by (u, vj).
    """

    source: JointPmf
    p_u: Pmf
    p_v1: Pmf
    p_v2: Pmf
    x1_mapper: Channel
    x2_mapper: Channel
    channel: Channel
    p_w1: Pmf | None = None
    p_w2: Pmf | None = None
    f1: dict | None = None
    f2: dict | None = None

    def __post_init__(self):
        if tuple(self.source.names) != ("s1", "s2"):
            raise ValueError("source joint must have axes ('s1', 's2')")
        if (self.p_w1 is None) != (self.p_w2 is None):
            raise ValueError("p_w1 and p_w2 must be given together")
        if self.p_w1 is None:
            expect1 = product_alphabet(self.p_u.alphabet, self.p_v1.alphabet)
            expect2 = product_alphabet(self.p_u.alphabet, self.p_v2.alphabet)
        else:
            expect1 = product_alphabet(
                self.p_u.alphabet, self.p_w1.alphabet, self.p_v1.alphabet
            )
            expect2 = product_alphabet(
                self.p_u.alphabet, self.p_w2.alphabet, self.p_v2.alphabet
            )
        if self.x1_mapper.input != expect1:
            raise ValueError("x1_mapper input alphabet does not match the auxiliaries")
        if self.x2_mapper.input != expect2:
            raise ValueError("x2_mapper input alphabet does not match the auxiliaries")
        pair = product_alphabet(self.x1_mapper.output, self.x2_mapper.output)
        if self.channel.input != pair:
            raise ValueError("channel input must be the (x1, x2) product alphabet")
        for y in self.channel.output.symbols:
            if not (isinstance(y, tuple) and len(y) == 2):
                raise ValueError("channel output symbols must be (y1, y2) pairs")

    def receiver_alphabets(self):
        y1, y2 = [], []
        for a, b in self.channel.output.symbols:
            if a not in y1:
                y1.append(a)
            if b not in y2:
                y2.append(b)
        return Alphabet(y1), Alphabet(y2)

    @classmethod
    def from_json(cls, obj) -> "IcAssignment":
        return cls(
            source=_source_from_json(obj["source"]),
            p_u=Pmf.from_json(obj["p_u"]),
            p_v1=Pmf.from_json(obj["p_v1"]),
            p_v2=Pmf.from_json(obj["p_v2"]),
            x1_mapper=Channel.from_json(obj["x1_mapper"]),
            x2_mapper=Channel.from_json(obj["x2_mapper"]),
            channel=Channel.from_json(obj["channel"]),
            p_w1=None if obj.get("p_w1") is None else Pmf.from_json(obj["p_w1"]),
            p_w2=None if obj.get("p_w2") is None else Pmf.from_json(obj["p_w2"]),
            f1=_fmap_from_json(obj.get("f1")),
            f2=_fmap_from_json(obj.get("f2")),
        )


@dataclass(frozen=True)
class SchemeParams:
    """Block-code parameters shared by the step checkers.

    alpha/beta split the common-part description rate, rho is the inner
    code rate backoff, delta the typicality window, l the inner block
    length, side_a the side whose common-part label drives typicality.
    """

    alpha: float
    beta: float
    rho: float
    delta: float
    l: int
    side_a: int = 1

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be nonnegative")
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.l < 1:
            raise ValueError("l must be a positive integer")
        if self.side_a not in (1, 2):
            raise ValueError("side_a must be 1 or 2")

    @classmethod
    def from_json(cls, obj) -> "SchemeParams":
        return cls(
            alpha=float(obj["alpha"]),
            beta=float(obj["beta"]),
            rho=float(obj["rho"]),
            delta=float(obj["delta"]),
            l=int(obj["l"]),
            side_a=int(obj.get("side_a", 1)),
        )


# ---------------------------------------------------------------------------
# shared construction helpers
# ---------------------------------------------------------------------------


def _entropy_of(vec) -> float:
    v = np.asarray(vec, dtype=float).ravel()
    pos = v[v > 0]
    return float(-(pos * np.log(pos)).sum()) if pos.size else 0.0


@dataclass(frozen=True)
class _CommonPart:
    p_k: Pmf
    h_k: float
    xi: float
    h_s1_given_s2k: float
    h_s2_given_s1k: float
    h_joint_given_k: float
    h_s1_given_k: float
    h_s2_given_k: float
    k_alpha: Alphabet = None
    idx1: np.ndarray = None
    idx2: np.ndarray = None


def _common_part(source: JointPmf, f1, f2, side_a: int) -> _CommonPart:
    """Entropy terms of the labeled common part without materializing it.

    All identities use that the label is a function of one source symbol,
    so joint entropies with the label collapse to grouped-row entropies.
    """
    if (f1 is None) != (f2 is None):
        raise ValueError("f1 and f2 must be given together")
    if f1 is None:
        dec = gkw_decomposition(source)
        f1, f2 = dec.f1, dec.f2
    a1, a2 = source.alphabets
    for s in a1.symbols:
        if s not in f1:
            raise ValueError("f1 is missing source symbol %r" % (s,))
    for s in a2.symbols:
        if s not in f2:
            raise ValueError("f2 is missing source symbol %r" % (s,))
    labels = sorted({f1[s] for s in a1.symbols} | {f2[s] for s in a2.symbols}, key=repr)
    k_alpha = Alphabet(labels)
    idx1 = np.array([k_alpha.index(f1[s]) for s in a1.symbols], dtype=np.intp)
    idx2 = np.array([k_alpha.index(f2[s]) for s in a2.symbols], dtype=np.intp)

    probs = source.permute(("s1", "s2")).probs
    xi = float(probs[idx1[:, None] != idx2[None, :]].sum())
    xi = min(max(xi, 0.0), 1.0)

    p1 = probs.sum(axis=1)
    p2 = probs.sum(axis=0)
    nk = len(k_alpha)
    h_all = _entropy_of(probs)
    h_s1 = _entropy_of(p1)
    h_s2 = _entropy_of(p2)

    if side_a == 1:
        pk = np.zeros(nk)
        np.add.at(pk, idx1, p1)
        grouped = np.zeros((nk, probs.shape[1]))
        np.add.at(grouped, idx1, probs)  # rows of (K, S2)
        h_k = _entropy_of(pk)
        h_s2_k = _entropy_of(grouped)
        h_s1_given_s2k = h_all - h_s2_k
        h_s2_given_s1k = h_all - h_s1  # (S1, K) is determined by S1
        h_s1_given_k = h_s1 - h_k
        h_s2_given_k = h_s2_k - h_k
    else:
        pk = np.zeros(nk)
        np.add.at(pk, idx2, p2)
        grouped = np.zeros((nk, probs.shape[0]))
        np.add.at(grouped, idx2, probs.T)  # rows of (K, S1)
        h_k = _entropy_of(pk)
        h_s1_k = _entropy_of(grouped)
        h_s2_given_s1k = h_all - h_s1_k
        h_s1_given_s2k = h_all - h_s2
        h_s2_given_k = h_s2 - h_k
        h_s1_given_k = h_s1_k - h_k

    return _CommonPart(
        p_k=Pmf(k_alpha, pk),
        h_k=h_k,
        xi=xi,
        h_s1_given_s2k=max(h_s1_given_s2k, 0.0),
        h_s2_given_s1k=max(h_s2_given_s1k, 0.0),
        h_joint_given_k=max(h_all - h_k, 0.0),
        h_s1_given_k=max(h_s1_given_k, 0.0),
        h_s2_given_k=max(h_s2_given_k, 0.0),
        k_alpha=k_alpha,
        idx1=idx1,
        idx2=idx2,
    )


def _induced_u_channel(joint: JointPmf, y_axis: str) -> Channel:
    """Conditional law of one output axis given the u axis."""
    m = joint.marginal(("u", y_axis))
    pu = m.probs.sum(axis=1)
    ny = m.probs.shape[1]
    rows = np.empty_like(m.probs)
    for i in range(len(pu)):
        rows[i] = m.probs[i] / pu[i] if pu[i] > 0 else np.full(ny, 1.0 / ny)
    return Channel(m.alphabets[0], m.alphabets[1], rows)


def _mac_channel_joint(m: MacAssignment) -> JointPmf:
    j = JointPmf.from_pmf("u", m.p_u)
    j = j.product(JointPmf.from_pmf("v1", m.p_v1))
    j = j.product(JointPmf.from_pmf("v2", m.p_v2))
    j = j.extend(m.x1_mapper, ("u", "v1"), "x1")
    j = j.extend(m.x2_mapper, ("u", "v2"), "x2")
    return j.extend(m.channel, ("x1", "x2"), "y")


def _ic_channel_joint(ic: IcAssignment, use_w: bool) -> JointPmf:
    j = JointPmf.from_pmf("u", ic.p_u)
    if use_w:
        j = j.product(JointPmf.from_pmf("w1", ic.p_w1))
        j = j.product(JointPmf.from_pmf("w2", ic.p_w2))
    j = j.product(JointPmf.from_pmf("v1", ic.p_v1))
    j = j.product(JointPmf.from_pmf("v2", ic.p_v2))
    if use_w:
        j = j.extend(ic.x1_mapper, ("u", "w1", "v1"), "x1")
        j = j.extend(ic.x2_mapper, ("u", "w2", "v2"), "x2")
    else:
        j = j.extend(ic.x1_mapper, ("u", "v1"), "x1")
        j = j.extend(ic.x2_mapper, ("u", "v2"), "x2")
    j = j.extend(ic.channel, ("x1", "x2"), "y")
    # no downstream term involves the inputs; free those axes before the
    # output split multiplies the table by both receiver alphabets
    j = j.marginal(tuple(n for n in j.names if n not in ("x1", "x2")))
    a1, a2 = ic.receiver_alphabets()
    j = j.add_deterministic("y1", "y", lambda y: y[0], a1)
    j = j.add_deterministic("y2", "y", lambda y: y[1], a2)
    return j.marginal(tuple(n for n in j.names if n != "y"))


def _tv(a: JointPmf, b: JointPmf) -> float:
    return 0.5 * float(np.abs(a.probs - b.probs).sum())


def _conditional_channel(joint: JointPmf, given, of) -> Channel:
    """Conditional pmf of axis `of` given the listed axes, as a channel."""
    given = (given,) if isinstance(given, str) else tuple(given)
    m = joint.marginal(given + (of,))
    flat_in = m.alphabets[0] if len(given) == 1 else product_alphabet(*m.alphabets[:-1])
    out_alpha = m.alphabets[-1]
    table = m.probs.reshape(len(flat_in), len(out_alpha))
    denom = table.sum(axis=1, keepdims=True)
    safe = np.where(denom > 0, denom, 1.0)
    rows = np.where(denom > 0, table / safe, 1.0 / len(out_alpha))
    return Channel(flat_in, out_alpha, rows)


def _pair_channel(joint: JointPmf, in_axes, out_axes) -> Channel:
    """Joint conditional law of two output axes given two input axes."""
    m = joint.marginal(tuple(in_axes) + tuple(out_axes))
    flat_in = product_alphabet(m.alphabets[0], m.alphabets[1])
    flat_out = product_alphabet(m.alphabets[2], m.alphabets[3])
    table = m.probs.reshape(len(flat_in), len(flat_out))
    denom = table.sum(axis=1, keepdims=True)
    safe = np.where(denom > 0, denom, 1.0)
    rows = np.where(denom > 0, table / safe, 1.0 / len(flat_out))
    return Channel(flat_in, flat_out, rows)


# ---------------------------------------------------------------------------
# prior-art region checkers
# ---------------------------------------------------------------------------

_CES_AXES = ("s1", "s2", "u", "x1", "x2", "y")


def check_ces(joint: JointPmf) -> ConditionReport:
    """Three-family sufficient conditions with a common timesharing input.

    The joint must carry axes (s1, s2, u, x1, x2, y) and factor as
    source * p(u) * p(x1|u,s1) * p(x2|u,s2) * p(y|x1,x2); anything else
    raises ValueError.
    """
    if set(joint.names) != set(_CES_AXES):
        raise ValueError("joint must have axes %r" % (_CES_AXES,))
    joint = joint.permute(_CES_AXES)

    rebuilt = joint.marginal(("s1", "s2")).product(
        JointPmf.from_pmf("u", joint.to_pmf("u"))
    )
    rebuilt = rebuilt.extend(
        _conditional_channel(joint, ("u", "s1"), "x1"), ("u", "s1"), "x1"
    )
    rebuilt = rebuilt.extend(
        _conditional_channel(joint, ("u", "s2"), "x2"), ("u", "s2"), "x2"
    )
    rebuilt = rebuilt.extend(
        _conditional_channel(joint, ("x1", "x2"), "y"), ("x1", "x2"), "y"
    )
    tv = _tv(joint, rebuilt.permute(_CES_AXES))
    if tv > 1e-9:
        raise ValueError(
            "joint does not factor as source * p(u) * p(x1|u,s1) * p(x2|u,s2) "
            "* p(y|x1,x2); total variation %.3g" % tv
        )

    dec = gkw_decomposition(joint.marginal(("s1", "s2")))
    with_k = joint.add_deterministic("k", "s1", lambda s: dec.f1[s], dec.k_alphabet)

    records = [
        _strict(
            "rate-1",
            conditional_entropy(joint, "s1", "s2"),
            mutual_information(joint, "x1", "y", ("x2", "s2", "u")),
        ),
        _strict(
            "rate-2",
            conditional_entropy(joint, "s2", "s1"),
            mutual_information(joint, "x2", "y", ("x1", "s1", "u")),
        ),
        _strict(
            "sum-given-common",
            conditional_entropy(with_k, ("s1", "s2"), "k"),
            mutual_information(with_k, ("x1", "x2"), "y", ("k", "u")),
        ),
        _strict(
            "sum",
            entropy(joint, ("s1", "s2")),
            mutual_information(joint, ("x1", "x2"), "y"),
        ),
    ]
    return _finish(
        records,
        {"log": None, "value": None},
        flags={"common_part_size": len(dec.components)},
    )


_LC_AXES = ("s1", "s2", "q", "w1", "w2", "x1", "x2", "y1", "y2")


def check_lc(joint: JointPmf) -> ConditionReport:
    """Four-family sufficient conditions for the two-pair setting.

    The joint must carry axes (s1, s2, q, w1, w2, x1, x2, y1, y2) and
    factor as source * p(q) * p(w1|q) * p(w2|q) * p(x1|q,w1,s1)
    * p(x2|q,w2,s2) * p(y1,y2|x1,x2); anything else raises ValueError.
    """
    if set(joint.names) != set(_LC_AXES):
        raise ValueError("joint must have axes %r" % (_LC_AXES,))
    joint = joint.permute(_LC_AXES)

    rebuilt = joint.marginal(("s1", "s2")).product(
        JointPmf.from_pmf("q", joint.to_pmf("q"))
    )
    rebuilt = rebuilt.extend(_conditional_channel(joint, "q", "w1"), "q", "w1")
    rebuilt = rebuilt.extend(_conditional_channel(joint, "q", "w2"), "q", "w2")
    rebuilt = rebuilt.extend(
        _conditional_channel(joint, ("q", "w1", "s1"), "x1"), ("q", "w1", "s1"), "x1"
    )
    rebuilt = rebuilt.extend(
        _conditional_channel(joint, ("q", "w2", "s2"), "x2"), ("q", "w2", "s2"), "x2"
    )
    rebuilt = rebuilt.extend(
        _pair_channel(joint, ("x1", "x2"), ("y1", "y2")), ("x1", "x2"), "ypair"
    )
    rebuilt = rebuilt.add_deterministic(
        "y1", "ypair", lambda y: y[0], joint.alphabet("y1")
    )
    rebuilt = rebuilt.add_deterministic(
        "y2", "ypair", lambda y: y[1], joint.alphabet("y2")
    )
    tv = _tv(joint, rebuilt.marginal(_LC_AXES))
    if tv > 1e-9:
        raise ValueError(
            "joint does not factor as source * p(q) * p(w1|q) * p(w2|q) "
            "* p(x1|q,w1,s1) * p(x2|q,w2,s2) * p(y1,y2|x1,x2); "
            "total variation %.3g" % tv
        )

    h = {1: entropy(joint, ("s1",)), 2: entropy(joint, ("s2",))}
    records = []
    for j in (1, 2):
        jb = 3 - j
        records.append(
            _strict(
                "direct-%d" % j,
                h[j],
                mutual_information(
                    joint, ("s%d" % j, "x%d" % j), "y%d" % j, ("q", "w%d" % jb)
                ),
            )
        )
    for j in (1, 2):
        jb = 3 - j
        records.append(
            _strict(
                "sum-cross-%d" % j,
                h[1] + h[2],
                mutual_information(
                    joint, ("s%d" % j, "x%d" % j), "y%d" % j, ("q", "w1", "w2")
                )
                + mutual_information(
                    joint, ("w%d" % j, "s%d" % jb, "x%d" % jb), "y%d" % jb, ("q",)
                ),
            )
        )
    records.append(
        _strict(
            "sum-forward",
            h[1] + h[2],
            sum(
                mutual_information(
                    joint,
                    ("s%d" % j, "w%d" % (3 - j), "x%d" % j),
                    "y%d" % j,
                    ("q", "w%d" % j),
                )
                for j in (1, 2)
            ),
        )
    )
    for j in (1, 2):
        jb = 3 - j
        # the printed third term repeats the j-th first-layer auxiliary in
        # its conditioning; dropping it from the left group is an identity
        records.append(
            _strict(
                "weighted-%d" % j,
                2.0 * h[j] + h[jb],
                mutual_information(
                    joint, ("s%d" % j, "x%d" % j), "y%d" % j, ("q", "w1", "w2")
                )
                + mutual_information(
                    joint,
                    ("s%d" % j, "w%d" % jb, "x%d" % j),
                    "y%d" % j,
                    ("q", "w%d" % j),
                )
                + mutual_information(
                    joint, ("s%d" % jb, "x%d" % jb), "y%d" % j, ("q", "w%d" % j)
                ),
            )
        )
    return _finish(records, {"log": None, "value": None})


# ---------------------------------------------------------------------------
# step checkers on explicit assignments
# ---------------------------------------------------------------------------


def _phi_json(phi: LogReal, g: LogReal, xi_l: LogReal, tau: LogReal) -> dict:
    return {
        "phi": phi.to_json(),
        "inner_code_bound": g.to_json(),
        "disagreement_bound": xi_l.to_json(),
        "typicality_tail_bound": tau.to_json(),
    }


def _check_mac_step(m: MacAssignment, s: SchemeParams, on_u: bool) -> ConditionReport:
    chan = _mac_channel_joint(m)
    cp = _common_part(m.source, m.f1, m.f2, s.side_a)

    if not is_integer_type(m.p_u, s.l):
        raise ValueError("p_u is not an integer type at block length l")
    need = l_star(s.rho, len(m.p_u.alphabet), len(chan.alphabet("y")))
    if s.l < need:
        raise ValueError(
            "block length %d is below the admissible minimum %d" % (s.l, need)
        )

    g = cc_error_bound(s.alpha + s.rho, s.l, m.p_u, _induced_u_channel(chan, "y"))
    tau = tau_bound(s.l, s.delta, cp.p_k)
    xi_l = block_disagreement(cp.xi, s.l)
    phi = g + xi_l + tau

    cond = ("u",) if on_u else ()
    mi1 = mutual_information(chan, "v1", "y", cond + ("v2",))
    mi2 = mutual_information(chan, "v2", "y", cond + ("v1",))
    mi_sum = mutual_information(chan, ("v1", "v2"), "y", cond)

    n_s1 = len(m.source.alphabets[0])
    n_s2 = len(m.source.alphabets[1])
    n_v1 = len(m.p_v1.alphabet)
    n_v2 = len(m.p_v2.alphabet)

    records = [_strict("common-rate", (1.0 + s.delta) * cp.h_k, s.alpha + s.beta)]
    warnings = []
    if phi < _HALF:
        records.append(
            _strict(
                "rate-1",
                cp.h_s1_given_s2k + excess_rate(phi, n_s1, s.l),
                mi1 - excess_rate(phi, n_v1),
            )
        )
        records.append(
            _strict(
                "rate-2",
                cp.h_s2_given_s1k + excess_rate(phi, n_s2, s.l),
                mi2 - excess_rate(phi, n_v2),
            )
        )
        records.append(
            _strict(
                "sum-rate",
                s.beta + cp.h_joint_given_k + excess_rate(phi, n_s1 * n_s2, s.l),
                mi_sum - excess_rate(phi, n_v1 * n_v2),
            )
        )
    else:
        note = "phi >= 1/2: excess-rate corrections undefined, condition cannot hold"
        warnings.append(note)
        records.append(_unsat("rate-1", mi1, note))
        records.append(_unsat("rate-2", mi2, note))
        records.append(_unsat("sum-rate", mi_sum, note))
    records.append(_strict("phi-below-half", phi.value, 0.5))

    return _finish(
        records,
        _phi_json(phi, g, xi_l, tau),
        warnings=warnings,
        flags={
            "bound_mode": False,
            "side_a": s.side_a,
            "conditioned_on_common_codeword": on_u,
        },
    )


def check_mac_step1(m: MacAssignment, s: SchemeParams) -> ConditionReport:
    """First-stage conditions: private codebooks decoded against each other."""
    return _check_mac_step(m, s, on_u=False)


def check_mac_step2(m: MacAssignment, s: SchemeParams) -> ConditionReport:
    """Second-stage conditions: decoding conditioned on the common codeword."""
    return _check_mac_step(m, s, on_u=True)


def _check_ic_step(ic: IcAssignment, s: SchemeParams, on_u: bool) -> ConditionReport:
    chan = _ic_channel_joint(ic, use_w=False)
    cp = _common_part(ic.source, ic.f1, ic.f2, s.side_a)

    if not is_integer_type(ic.p_u, s.l):
        raise ValueError("p_u is not an integer type at block length l")
    need = max(
        l_star(s.rho, len(ic.p_u.alphabet), len(chan.alphabet("y1"))),
        l_star(s.rho, len(ic.p_u.alphabet), len(chan.alphabet("y2"))),
    )
    if s.l < need:
        raise ValueError(
            "block length %d is below the admissible minimum %d" % (s.l, need)
        )

    tau = tau_bound(s.l, s.delta, cp.p_k)
    xi_l = block_disagreement(cp.xi, s.l)
    g1 = cc_error_bound(s.alpha + s.rho, s.l, ic.p_u, _induced_u_channel(chan, "y1"))
    g2 = cc_error_bound(s.alpha + s.rho, s.l, ic.p_u, _induced_u_channel(chan, "y2"))
    phis = (g1 + xi_l + tau, g2 + xi_l + tau)

    cond = ("u",) if on_u else ()
    records = [_closed("common-rate", (1.0 + s.delta) * cp.h_k, s.alpha + s.beta)]
    warnings = []
    h_given = (cp.h_s1_given_k, cp.h_s2_given_k)
    for j in (1, 2):
        phi_j = phis[j - 1]
        n_sj = len(ic.source.alphabets[j - 1])
        n_vj = len((ic.p_v1, ic.p_v2)[j - 1].alphabet)
        mi = mutual_information(chan, "v%d" % j, "y%d" % j, cond)
        if phi_j < _HALF:
            records.append(
                _strict(
                    "rate-%d" % j,
                    h_given[j - 1] + s.beta + excess_rate(phi_j, n_sj, s.l),
                    mi - excess_rate(phi_j, n_vj),
                )
            )
        else:
            note = "phi >= 1/2: excess-rate corrections undefined, condition cannot hold"
            warnings.append(note)
            records.append(_unsat("rate-%d" % j, mi, note))
        records.append(_strict("phi-below-half-%d" % j, phi_j.value, 0.5))

    phi_entry = {
        "phi": max(phis).to_json(),
        "phi1": phis[0].to_json(),
        "phi2": phis[1].to_json(),
        "inner_code_bound_1": g1.to_json(),
        "inner_code_bound_2": g2.to_json(),
        "disagreement_bound": xi_l.to_json(),
        "typicality_tail_bound": tau.to_json(),
    }
    return _finish(
        records,
        phi_entry,
        warnings=warnings,
        flags={
            "bound_mode": False,
            "side_a": s.side_a,
            "conditioned_on_common_codeword": on_u,
        },
    )


def check_ic_step1(ic: IcAssignment, s: SchemeParams) -> ConditionReport:
    """First-stage two-pair conditions: each receiver decodes its own codebook."""
    return _check_ic_step(ic, s, on_u=False)


def check_ic_step2(ic: IcAssignment, s: SchemeParams) -> ConditionReport:
    """Second-stage two-pair conditions, conditioned on the common codeword."""
    return _check_ic_step(ic, s, on_u=True)


# ---------------------------------------------------------------------------
# eight-family region
# ---------------------------------------------------------------------------


def _chk_terms(joint: JointPmf, phi, j: int) -> dict:
    jb = 3 - j
    vj, wj, wb, yj = "v%d" % j, "w%d" % j, "w%d" % jb, "y%d" % j
    nv = len(joint.alphabet(vj))
    nwj = len(joint.alphabet(wj))
    nwb = len(joint.alphabet(wb))

    def mi(left, given):
        return mutual_information(joint, left, yj, given)

    def pen(card):
        return excess_rate(phi, card)

    return {
        "a": mi(vj, ("u", "w1", "w2")) - pen(nv),
        "b": mi(wj, ("u", vj, wb)) - pen(nwj),
        "c": mi(wb, ("u", vj, wj)) - pen(nwb),
        "d": mi((vj, wj), ("u", wb)) - pen(nv * nwj),
        "e": mi((vj, wb), ("u", wj)) - pen(nv * nwb),
        "f": mi((wj, wb), ("u", vj)) - pen(nwj * nwb),
        "g": mi((vj, wj, wb), ("u",)) - pen(nv * nwj * nwb),
    }


def _chk_membership_records(joint, r1, r2, phi, strict):
    cmp = _strict if strict else _closed
    t = {1: _chk_terms(joint, phi, 1), 2: _chk_terms(joint, phi, 2)}
    rates = {1: r1, 2: r2}
    records = []
    for j in (1, 2):
        jb = 3 - j
        rj, rb = rates[j], rates[jb]
        tj, tb = t[j], t[jb]
        records.append(cmp("single-direct-%d" % j, rj, tj["d"]))
        records.append(cmp("single-cross-%d" % j, rj, tj["a"] + tb["e"]))
        records.append(cmp("single-swap-%d" % j, rj, tj["a"] + tb["f"]))
        records.append(cmp("sum-%d" % j, r1 + r2, tj["a"] + tb["g"]))
        records.append(
            cmp("weighted-%d" % j, 2.0 * rj + rb, tj["a"] + tj["g"] + tb["e"])
        )
        records.append(
            cmp("weighted-alt-%d" % j, 2.0 * rj + rb, 2.0 * tj["a"] + tb["f"] + tb["e"])
        )
        records.append(cmp("nonneg-%d" % j, -rj, 0.0))
    records.append(cmp("sum-cross", r1 + r2, t[1]["e"] + t[2]["e"]))
    return records


def chk_region_contains(r1: float, r2: float, ic: IcAssignment, phi, strict: bool = False):
    """Membership of a rate pair in the eight-family region of one assignment.

    phi is the excess-rate argument entering every penalty term; returns
    (member, report).  Membership is closed by default; strict=True demands
    slack > 1e-12 on every family.
    """
    if ic.p_w1 is None:
        raise ValueError("the eight-family region needs p_w1 and p_w2")
    phi_lr = phi if isinstance(phi, LogReal) else LogReal.from_value(float(phi))
    joint = _ic_channel_joint(ic, use_w=True)
    records = _chk_membership_records(joint, float(r1), float(r2), phi_lr, strict)
    report = _finish(
        records, {"phi": phi_lr.to_json()}, flags={"strict": bool(strict)}
    )
    return report.overall, report


def check_ic_chk(ic: IcAssignment, s: SchemeParams, strict: bool = False) -> ConditionReport:
    """Third-stage two-pair conditions through the eight-family region."""
    if ic.p_w1 is None:
        raise ValueError("the eight-family region needs p_w1 and p_w2")
    joint = _ic_channel_joint(ic, use_w=True)
    cp = _common_part(ic.source, ic.f1, ic.f2, s.side_a)

    if not is_integer_type(ic.p_u, s.l):
        raise ValueError("p_u is not an integer type at block length l")
    need = max(
        l_star(s.rho, len(ic.p_u.alphabet), len(joint.alphabet("y1"))),
        l_star(s.rho, len(ic.p_u.alphabet), len(joint.alphabet("y2"))),
    )
    if s.l < need:
        raise ValueError(
            "block length %d is below the admissible minimum %d" % (s.l, need)
        )

    tau = tau_bound(s.l, s.delta, cp.p_k)
    xi_l = block_disagreement(cp.xi, s.l)
    g1 = cc_error_bound(s.alpha + s.rho, s.l, ic.p_u, _induced_u_channel(joint, "y1"))
    g2 = cc_error_bound(s.alpha + s.rho, s.l, ic.p_u, _induced_u_channel(joint, "y2"))
    phi1, phi2 = g1 + xi_l + tau, g2 + xi_l + tau
    phi = max(phi1, phi2)

    records = [
        _closed("common-rate", (1.0 + s.delta) * cp.h_k, s.alpha + s.beta),
        _strict("phi-below-half-1", phi1.value, 0.5),
        _strict("phi-below-half-2", phi2.value, 0.5),
    ]
    warnings = []
    extra_ok = True
    flags = {"bound_mode": False, "side_a": s.side_a, "strict": bool(strict)}
    if phi < _HALF:
        r1 = cp.h_s1_given_k + s.beta + excess_rate(
            phi1, len(ic.source.alphabets[0]), s.l
        )
        r2 = cp.h_s2_given_k + s.beta + excess_rate(
            phi2, len(ic.source.alphabets[1]), s.l
        )
        records.extend(_chk_membership_records(joint, r1, r2, phi, strict))
        flags["r1"] = r1
        flags["r2"] = r2
    else:
        note = "phi >= 1/2: excess-rate corrections undefined, conditions cannot hold"
        warnings.append(note)
        extra_ok = False

    phi_entry = {
        "phi": phi.to_json(),
        "phi1": phi1.to_json(),
        "phi2": phi2.to_json(),
        "inner_code_bound_1": g1.to_json(),
        "inner_code_bound_2": g2.to_json(),
        "disagreement_bound": xi_l.to_json(),
        "typicality_tail_bound": tau.to_json(),
    }
    return _finish(records, phi_entry, warnings=warnings, flags=flags, extra_ok=extra_ok)


# ---------------------------------------------------------------------------
# closed-form checkers for the generalized example family
# ---------------------------------------------------------------------------


def _log1m_exp(neg_x: float) -> float:
    """log(1 - exp(neg_x)) for neg_x < 0."""
    if neg_x >= 0:
        raise ValueError("argument must be negative")
    if neg_x > -0.693:
        return math.log(-math.expm1(neg_x))
    return math.log1p(-math.exp(neg_x))


def _log_p_star_side1(p: DueckParams) -> float:
    """log of the smallest positive mass of the first source marginal."""
    x = p.k * p.log_a  # log of the word count
    scale = p.eta * p.k * p.log_a
    tail = math.exp(-scale) if scale < 745.0 else 0.0
    return math.log1p(-tail) - math.log(p.k) - (x + _log1m_exp(-x))


def _log_p_star_side2(p: DueckParams) -> float:
    """log of the smallest positive mass of the second source marginal."""
    x = p.k * p.log_a
    return -math.log(p.k) - (x + _log1m_exp(-x))


def _common_rate_slack_log(p: DueckParams) -> float:
    """log of a positive lower bound on alpha+beta - (1+delta)H(first source).

    The float difference underflows for large parameters; the two dominant
    gap terms, (1/k)(-log1p(-a^-k)) and (a^(-eta k)/k) log(a^k - 1), are
    both positive and are summed here in the log domain.
    """
    x = p.k * p.log_a
    if x < 700.0:
        log_t1 = math.log(-math.log1p(-math.exp(-x)))
    else:
        log_t1 = -x
    log_m = math.log(x + _log1m_exp(-x))
    log_t2 = -p.eta * p.k * p.log_a + log_m
    return (
        math.log1p(1.0 / p.k)
        - math.log(p.k)
        + float(np.logaddexp(log_t1, log_t2))
    )


def _prescribed_scheme(p: DueckParams) -> SchemeParams:
    if p.a <= 4:
        raise ValueError("the prescribed design needs alphabet parameter a > 4")
    k = p.k
    return SchemeParams(
        alpha=(1.0 - 1.0 / (4.0 * k)) * p.log_a,
        beta=(5.0 / (4.0 * k)) * p.log_a + (1.0 + 1.0 / k) * binary_entropy(1.0 / k),
        rho=(1.0 / (4.0 * k)) * math.log(p.a / 4.0),
        delta=1.0 / k,
        l=p.default_block_length(),
        side_a=1,
    )


def _prescribed_phi(p: DueckParams, s: SchemeParams, log_card_y: float):
    """Inner-code, disagreement, and typicality terms of the prescribed design."""
    e_val = max(0.0, p.log_a - (s.alpha + s.rho))
    g = cc_error_bound_scalar(s.l, p.a, math.exp(log_card_y), e_val)
    log_p_star = _log_p_star_side1(p) if s.side_a == 1 else _log_p_star_side2(p)
    tau = tau_bound_scalar(s.l, s.delta, p.word_count(), log_p_star)
    xi_l = block_disagreement(LogReal(p.log_xi), s.l)
    return g, xi_l, tau


def _prescribed_common_record(p, s, h_k, defaults, closed) -> ConditionRecord:
    lhs = (1.0 + s.delta) * h_k
    rhs = s.alpha + s.beta
    if defaults:
        slack_log = _common_rate_slack_log(p)
        note = "strict slack certified in the log domain: at least exp(%.6g)" % slack_log
        return ConditionRecord("common-rate", lhs, rhs, rhs - lhs, True, note)
    return (_closed if closed else _strict)("common-rate", lhs, rhs)


def _capacity_undefined_report(p, mode, sat) -> ConditionReport:
    frac = math.exp(min(p.log_alpha_bar, 709.0))
    rec = ConditionRecord(
        "capacity-model-defined",
        frac,
        0.5,
        0.5 - frac,
        False,
        sat.warnings[0] if sat.warnings else "",
    )
    return _finish(
        [rec],
        {"phi": {"log": None, "value": None}},
        warnings=sat.warnings,
        flags={"bound_mode": True, "mode": mode},
    )


def check_mac_step1_prescribed(
    p: DueckParams, s: SchemeParams | None = None
) -> ConditionReport:
    """First-stage conditions under the prescribed design, in bound mode.

    Capacities, cardinality bounds, and conditional-entropy bounds stand in
    for materialized joints; every substitution moves the inequality the
    conservative way, so a passing report certifies the exact conditions.
    """
    stats = source_stats(p)
    sat1, sat2 = satellite_models(p, "mac")
    defaults = s is None
    if defaults:
        s = _prescribed_scheme(p)
    if not sat1.valid:
        return _capacity_undefined_report(p, "mac", sat1)

    log_card_y = (1.0 + 3.0 / p.k) * p.log_a  # shared output times both satellites
    need = l_star(s.rho, p.a, math.exp(log_card_y))
    if s.l < need:
        raise ValueError("block length is below the admissible minimum %d" % need)
    if s.l % p.a != 0:
        raise ValueError("uniform p_u is not an integer type at block length l")

    g, xi_l, tau = _prescribed_phi(p, s, log_card_y)
    phi = g + xi_l + tau

    h_k = stats.h_s1 if s.side_a == 1 else stats.h_s2
    h1_given = 0.0 if s.side_a == 1 else stats.h_s1_given_s2_bound
    h2_given = stats.h_s2_given_s1_bound if s.side_a == 1 else 0.0
    h_joint_given = h2_given if s.side_a == 1 else h1_given

    n_words = p.word_count()
    v_card1 = math.exp(sat1.log_output_card_bound)
    v_card2 = math.exp(sat2.log_output_card_bound)

    records = [_prescribed_common_record(p, s, h_k, defaults, closed=False)]
    warnings = []
    if phi < _HALF:
        records.append(
            _strict(
                "rate-1",
                h1_given + excess_rate(phi, n_words, s.l),
                sat1.capacity - excess_rate(phi, v_card1),
                note="uses the satellite capacity and cardinality bound",
            )
        )
        records.append(
            _strict(
                "rate-2",
                h2_given + excess_rate(phi, n_words, s.l),
                sat2.capacity - excess_rate(phi, v_card2),
                note="uses the closed-form conditional-entropy bound",
            )
        )
        records.append(
            _strict(
                "sum-rate",
                s.beta + h_joint_given + excess_rate(phi, n_words**2, s.l),
                sat1.capacity + sat2.capacity - excess_rate(phi, v_card1 * v_card2),
            )
        )
    else:
        note = "phi >= 1/2: excess-rate corrections undefined, condition cannot hold"
        warnings.append(note)
        records.append(_unsat("rate-1", sat1.capacity, note))
        records.append(_unsat("rate-2", sat2.capacity, note))
        records.append(_unsat("sum-rate", sat1.capacity + sat2.capacity, note))
    records.append(_strict("phi-below-half", phi.value, 0.5))

    return _finish(
        records,
        _phi_json(phi, g, xi_l, tau),
        warnings=warnings,
        flags={
            "bound_mode": True,
            "mode": "mac",
            "side_a": s.side_a,
            "defaults_used": defaults,
            "exponent_value": max(0.0, p.log_a - (s.alpha + s.rho)),
        },
    )


def check_ic_step1_prescribed(
    p: DueckParams, s: SchemeParams | None = None
) -> ConditionReport:
    """First-stage two-pair conditions under the prescribed design, bound mode."""
    stats = source_stats(p)
    sat1, sat2 = satellite_models(p, "ic")
    defaults = s is None
    if defaults:
        s = _prescribed_scheme(p)

    log_card_y = (1.0 + 5.0 / (2.0 * p.k)) * p.log_a  # shared plus one satellite
    need = l_star(s.rho, p.a, math.exp(log_card_y))
    if s.l < need:
        raise ValueError("block length is below the admissible minimum %d" % need)
    if s.l % p.a != 0:
        raise ValueError("uniform p_u is not an integer type at block length l")

    g, xi_l, tau = _prescribed_phi(p, s, log_card_y)
    phi = g + xi_l + tau  # both receivers share the same closed-form bound

    h_k = stats.h_s1 if s.side_a == 1 else stats.h_s2
    h_given = (
        (0.0, stats.h_s2_given_s1_bound)
        if s.side_a == 1
        else (stats.h_s1_given_s2_bound, 0.0)
    )
    n_words = p.word_count()

    records = [_prescribed_common_record(p, s, h_k, defaults, closed=True)]
    warnings = []
    for j, sat in ((1, sat1), (2, sat2)):
        if phi < _HALF:
            records.append(
                _strict(
                    "rate-%d" % j,
                    h_given[j - 1] + s.beta + excess_rate(phi, n_words, s.l),
                    sat.capacity
                    - excess_rate(phi, math.exp(sat.log_output_card_bound)),
                    note="uses the satellite capacity and cardinality bound",
                )
            )
        else:
            note = "phi >= 1/2: excess-rate corrections undefined, condition cannot hold"
            warnings.append(note)
            records.append(_unsat("rate-%d" % j, sat.capacity, note))
        records.append(_strict("phi-below-half-%d" % j, phi.value, 0.5))

    return _finish(
        records,
        _phi_json(phi, g, xi_l, tau),
        warnings=warnings,
        flags={
            "bound_mode": True,
            "mode": "ic",
            "side_a": s.side_a,
            "defaults_used": defaults,
            "exponent_value": max(0.0, p.log_a - (s.alpha + s.rho)),
        },
    )


def check_isolated(
    p: DueckParams,
    l=None,
    delta: float | None = None,
    beta: float | None = None,
    mode: str = "mac",
) -> ConditionReport:
    """Feasibility of the generalized example without the joint inner code.

    Each source is carried by its own satellite while the shared channel
    carries the common label; bound mode throughout (capacities, cardinality
    bounds, closed-form conditional-entropy bound).
    """
    if mode not in ("mac", "ic"):
        raise ValueError("mode must be 'mac' or 'ic', got %r" % (mode,))
    stats = source_stats(p)
    sat1, sat2 = satellite_models(p, mode)
    if not sat1.valid:
        return _capacity_undefined_report(p, mode, sat1)

    if l is None:
        l = p.default_block_length()
    if l < 1:
        raise ValueError("l must be a positive integer")
    if delta is None:
        delta = 1.0 / p.k
    if delta <= 0:
        raise ValueError("delta must be positive")
    if beta is None:
        beta = (
            _float_over_big(2.0, l)
            + p.log_a / p.k
            + (1.0 + 1.0 / p.k) * binary_entropy(1.0 / p.k)
        )

    tau = tau_bound_scalar(l, delta, p.word_count(), _log_p_star_side1(p))
    xi_l = block_disagreement(LogReal(p.log_xi), l)
    phi = xi_l + tau

    n_words = p.word_count()
    records = []
    warnings = []
    if phi < _HALF:
        records.append(
            _closed("rate-1", excess_rate(phi, n_words, l) + beta, sat1.capacity)
        )
        records.append(
            _closed(
                "rate-2",
                excess_rate(phi, n_words, l) + stats.h_s2_given_s1_bound,
                sat2.capacity,
                note="uses the closed-form conditional-entropy bound",
            )
        )
        records.append(
            _closed(
                "sum-rate",
                excess_rate(phi, n_words**2, l) + beta + stats.h_s2_given_s1_bound,
                sat1.capacity + sat2.capacity,
            )
        )
    else:
        note = "phi >= 1/2: excess-rate corrections undefined, condition cannot hold"
        warnings.append(note)
        records.append(_unsat("rate-1", sat1.capacity, note))
        records.append(_unsat("rate-2", sat2.capacity, note))
        records.append(_unsat("sum-rate", sat1.capacity + sat2.capacity, note))
    records.append(_strict("phi-below-half", phi.value, 0.5))

    return _finish(
        records,
        {
            "phi": phi.to_json(),
            "disagreement_bound": xi_l.to_json(),
            "typicality_tail_bound": tau.to_json(),
        },
        warnings=warnings,
        flags={"bound_mode": True, "mode": mode, "beta": beta, "delta": delta},
    )


# ---------------------------------------------------------------------------
# violation lemmas and the separation scan
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LemmaViolation:
    violated: bool
    slack: float | None
    threshold: float
    bound: float | None
    warnings: tuple = ()

    def to_json(self):
        return {
            "violated": self.violated,
            "slack": self.slack,
            "threshold": self.threshold,
            "bound": self.bound,
            "warnings": list(self.warnings),
        }


def lemma_ces_violation(p: DueckParams) -> LemmaViolation:
    """Necessary-condition budget versus log a for the single-receiver mode.

    Violated when log a exceeds the budget by more than 1e-12, which rules
    out every assignment for the three-family conditions at these parameters.
    """
    if p.log_alpha_bar > math.log(0.5):
        return LemmaViolation(
            False,
            None,
            p.log_a,
            None,
            ("capacity model undefined: high-rate fraction exceeds 1/2",),
        )
    k = p.k
    c_m = mac_capacity_core(p)
    hb_rare = binary_entropy_log(math.log(2.0) + p.log_xi)
    bound = (
        2.0 * math.log(2.0)
        + 2.0 * c_m
        + binary_entropy(2.0 / k)
        + p.log_a / k
        + hb_rare
        + 0.75 * p.log_a
        + (1.0 + 3.0 / k) * p.log_a / k
    )
    slack = p.log_a - bound
    return LemmaViolation(slack > _STRICT_TOL, slack, p.log_a, bound)


def lemma_lc_violation(p: DueckParams) -> LemmaViolation:
    """Necessary-condition budget versus log a for the two-pair mode."""
    k = p.k
    c_i = ic_capacity_core(p)
    hb_rare = binary_entropy_log(math.log(2.0) + p.log_xi)
    bound = (
        2.0 * math.log(2.0)
        + 2.0 * c_i
        + hb_rare
        + 0.75 * p.log_a
        + (1.0 + 5.0 / k) * p.log_a / k
    )
    slack = p.log_a - bound
    return LemmaViolation(slack > _STRICT_TOL, slack, p.log_a, bound)


@dataclass(frozen=True)
class ScanResult:
    mode: str
    eta: int
    a_max: int
    k_max: int
    minimal: tuple | None
    rows: tuple
    reports: dict | None

    def to_json(self):
        return {
            "mode": self.mode,
            "eta": self.eta,
            "a_max": self.a_max,
            "k_max": self.k_max,
            "minimal": None
            if self.minimal is None
            else {"k": self.minimal[0], "a": self.minimal[1]},
            "rows": [dict(r) for r in self.rows],
            "reports": self.reports,
        }


def dueck_separation_scan(
    eta: int, a_max: int, k_max: int, mode: str = "mac"
) -> ScanResult:
    """Smallest (k, a), ordered by k then a, where the necessary-condition
    budget is violated while the prescribed design passes its first-stage
    check with phi below one half.

    Scans k upward; for each k the predicate is monotone in a (once the
    capacity model is defined the budget deficit grows like a positive
    multiple of log a), so a bisection over a with probed endpoints finds
    the boundary.  Rows record every probed point in probe order.
    """
    if mode not in ("mac", "ic"):
        raise ValueError("mode must be 'mac' or 'ic', got %r" % (mode,))
    eta = int(eta)
    if eta < 6 or eta % 2 != 0:
        raise ValueError("eta must be an even integer of at least 6")
    if a_max < 5 or k_max < 2:
        raise ValueError("need a_max >= 5 and k_max >= 2")

    lemma_fn = lemma_ces_violation if mode == "mac" else lemma_lc_violation
    step_fn = check_mac_step1_prescribed if mode == "mac" else check_ic_step1_prescribed
    rows = []

    def probe(a: int, k: int) -> bool:
        row = {"k": k, "a": a}
        par = DueckParams(a, k, eta)
        lem = lemma_fn(par)
        row["lemma_violated"] = lem.violated
        row["lemma_slack"] = lem.slack
        if not lem.violated:
            row["passes"] = False
            rows.append(row)
            return False
        try:
            rep = step_fn(par)
        except ValueError as err:
            row["step1_ok"] = False
            row["passes"] = False
            row["error"] = str(err)
            rows.append(row)
            return False
        row["step1_ok"] = rep.overall
        row["phi_log"] = rep.phi["phi"]["log"]
        row["passes"] = bool(rep.overall)
        rows.append(row)
        return bool(rep.overall)

    minimal = None
    reports = None
    for k in range(2, k_max + 1):
        if not probe(a_max, k):
            continue
        lo, hi = 4, a_max  # a <= 4 cannot carry the prescribed design (rho <= 0)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if probe(mid, k):
                hi = mid
            else:
                lo = mid
        down = hi // 2
        while down > 4:  # certification ladder below the boundary
            probe(down, k)
            down //= 2
        par = DueckParams(hi, k, eta)
        reports = {"lemma": lemma_fn(par).to_json(), "step1": step_fn(par).to_json()}
        minimal = (k, hi)
        break

    return ScanResult(
        mode=mode,
        eta=eta,
        a_max=a_max,
        k_max=k_max,
        minimal=minimal,
        rows=tuple(rows),
        reports=reports,
    )
