"""Monte-Carlo simulation of the m x l matrix coding scheme at desk scale.

A block of lm channel uses is viewed as an m x l matrix.  Every row
carries one codeword of a short constant-composition inner code that
conveys a common label computed from the source row, while the
reliability-carrying outer codes live on interleaved columns: column i
of the matrix, read through one random permutation per row, equals one
outer codeword.  The module provides

  * seeded construction of the deterministic code components
    (``build_codes``): row source code on a typical set, inner
    constant-composition codebook with a maximum-likelihood row decoder,
  * complete encode / transmit / decode trials for the one-receiver and
    the two-receiver variants (``run_mac_trial``, ``run_ic_trial``),
    with per-trial random bins, outer codebooks, interleaving
    permutations and input samplers,
  * exact finite pmfs the decoders test against
    (``build_decoding_pmfs``), computed by full enumeration,
  * empirical distribution verification (``verify_row_iid``) and exact
    enumeration checks of the interleaving and decoding-pmf identities
    (``verify_interleaving_lemmas``, ``verify_decoding_pmf_lemmas``),
  * aggregation with Wilson confidence intervals (``estimate_error``)
    and a point-to-point error-exponent slope measurement
    (``simulate_ptp_curve``).

All randomness is derived from the spec seed and the trial index, so
every result is reproducible and independent of evaluation parallelism.
"""

from __future__ import annotations

import hashlib
import itertools
import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2 as _chi2_dist

from .core import Alphabet, Channel, JointPmf, Pmf, cell_budget, product_alphabet
from .info import composition_counts, is_integer_type, typical_set
from .exponents import block_disagreement, error_exponent, tau_bound
from .checkers import IcAssignment, MacAssignment, SchemeParams, _common_part

__all__ = [
    "CodeBundle",
    "CodeEnsembleSpec",
    "DecodingPmfs",
    "MatrixBlock",
    "TrialOutcome",
    "binary_toy_mac_spec",
    "build_codes",
    "build_decoding_pmfs",
    "calibrate_delta_dec",
    "estimate_error",
    "gkw_toy_mac_spec",
    "run_ic_trial",
    "run_mac_trial",
    "simulate_ptp_curve",
    "toy_ic_spec",
    "verify_decoding_pmf_lemmas",
    "verify_interleaving_lemmas",
    "verify_row_iid",
    "wilson_interval",
]

# stream tags separating the independent randomness sources
_TAG_TRIAL = 11
_TAG_X = 4
_TAG_BIN = 7
_TAG_CAL = 13

_Z95 = 1.959963984540054


# ---------------------------------------------------------------------------
# spec and result containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CodeEnsembleSpec:
    """Complete description of one simulated code ensemble.

    rates holds the log outer-codebook sizes (nats) per encoder; the
    end_to_end mode runs the final binning decoder and requires beta = 0
    because the remaining message split is an arithmetic-only device.
    """

    assignment: object
    params: SchemeParams
    m: int
    rates: tuple
    seed: int
    mode: str = "end_to_end"
    delta_dec: float = None
    search_budget: int = 4096

    def __post_init__(self):
        if not isinstance(self.assignment, (MacAssignment, IcAssignment)):
            raise ValueError("assignment must be a MAC or a two-receiver assignment")
        if isinstance(self.assignment, IcAssignment) and self.assignment.p_w1 is not None:
            raise ValueError("superposition splitting is not simulated; drop p_w1/p_w2")
        if self.m < 1:
            raise ValueError("sub-block count m must be at least 1, got %r" % (self.m,))
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        if len(self.rates) != 2 or any(r < 0 for r in self.rates):
            raise ValueError("rates must be two nonnegative log codebook sizes")
        if self.mode not in ("end_to_end", "component"):
            raise ValueError("mode must be end_to_end or component, got %r" % (self.mode,))
        if self.mode == "end_to_end" and self.params.beta != 0.0:
            raise ValueError("end_to_end mode requires beta = 0")
        if not is_integer_type(self.assignment.p_u, self.params.l):
            raise ValueError("p_u is not an integer type at block length l")
        if self.delta_dec is not None and not 0 < self.delta_dec:
            raise ValueError("delta_dec must be positive when given")
        if self.search_budget < 1:
            raise ValueError("search_budget must be positive")

    @property
    def is_mac(self) -> bool:
        return isinstance(self.assignment, MacAssignment)

    def codebook_sizes(self):
        """Outer codebook sizes floor(exp(rate)) per encoder, at least 1."""
        return tuple(max(1, int(math.floor(math.exp(r) + 1e-9))) for r in self.rates)


@dataclass(frozen=True)
class MatrixBlock:
    """Index matrices (m x l) of one trial; alphabets maps name to Alphabet."""

    s1: np.ndarray
    s2: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    alphabets: dict
    y: np.ndarray = None
    y1: np.ndarray = None
    y2: np.ndarray = None
    khat: np.ndarray = None
    khat1: np.ndarray = None
    khat2: np.ndarray = None

    def __post_init__(self):
        shape = self.s1.shape
        for name in ("s2", "k1", "k2", "u1", "u2", "v1", "v2", "x1", "x2"):
            if getattr(self, name).shape != shape:
                raise ValueError("matrix %s has shape %r, expected %r"
                                 % (name, getattr(self, name).shape, shape))


@dataclass(frozen=True)
class TrialOutcome:
    """Per-stage counters of one trial.

    Per-receiver fields are tuples; outer_errors and outer_ties hold one
    0/1 flag per column so that a strict reading (any non-singleton
    decoding set counts as an error) can be formed by the aggregator.
    """

    mode: str
    m: int
    disagreement_count: int
    atypical_rows: int
    inner_errors: tuple
    outer_errors: tuple
    outer_ties: tuple
    sw_attempted: tuple
    sw_success: tuple
    sw_ties: tuple
    end_to_end: bool
    budget_aborts: tuple

    def __post_init__(self):
        if self.end_to_end and not (all(self.sw_attempted) and all(self.sw_success)):
            raise ValueError("end-to-end success requires binning-stage success")

    def to_json(self):
        return {
            "mode": self.mode,
            "m": self.m,
            "disagreement_count": self.disagreement_count,
            "atypical_rows": self.atypical_rows,
            "inner_errors": list(self.inner_errors),
            "outer_errors": [list(e) for e in self.outer_errors],
            "outer_ties": [list(t) for t in self.outer_ties],
            "sw_attempted": list(self.sw_attempted),
            "sw_success": list(self.sw_success),
            "sw_ties": list(self.sw_ties),
            "end_to_end": self.end_to_end,
            "budget_aborts": list(self.budget_aborts),
        }


# ---------------------------------------------------------------------------
# seeded randomness helpers
# ---------------------------------------------------------------------------


def _mask_seed(seed: int) -> int:
    return int(seed) & (2 ** 64 - 1)


def _trial_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence([_mask_seed(seed), _TAG_TRIAL, int(index)])
    )


def _hash_uniform(*key_ints) -> float:
    """Deterministic uniform variate in [0, 1) from integer keys."""
    data = struct.pack("<%dq" % len(key_ints), *key_ints)
    digest = hashlib.blake2b(data, digest_size=8).digest()
    return int.from_bytes(digest, "big") / 2.0 ** 64


def _bin_index(seed, trial, encoder, column, matrix: np.ndarray, n_bins: int) -> int:
    """Uniform bin index of a full source matrix, one hash per (encoder, column)."""
    if n_bins == 1:
        return 0
    key = struct.pack("<5q", _mask_seed(seed), _TAG_BIN, trial, encoder, column)
    digest = hashlib.blake2b(
        np.ascontiguousarray(matrix, dtype=np.int64).tobytes(), key=key, digest_size=16
    ).digest()
    return int.from_bytes(digest, "big") % n_bins


def _sample_from_cdf(cdf_row: np.ndarray, u: float) -> int:
    return int(np.searchsorted(cdf_row, u, side="right"))


# ---------------------------------------------------------------------------
# product-alphabet index arithmetic
# ---------------------------------------------------------------------------


def _digit_table(n: int, l: int) -> np.ndarray:
    """Row r holds the base-n digits (most significant first) of index r."""
    idx = np.arange(n ** l)
    out = np.empty((n ** l, l), dtype=np.int64)
    for j in range(l):
        out[:, j] = (idx // (n ** (l - 1 - j))) % n
    return out


def _tuple_index(digits, n: int) -> int:
    out = 0
    for d in digits:
        out = out * n + int(d)
    return out


def _row_indices(mat: np.ndarray, n: int) -> np.ndarray:
    """Product-alphabet index of every row of an (m, l) index matrix."""
    out = np.zeros(mat.shape[0], dtype=np.int64)
    for j in range(mat.shape[1]):
        out = out * n + mat[:, j]
    return out


def _power_probs(p: np.ndarray, l: int) -> np.ndarray:
    out = np.array([1.0])
    for _ in range(l):
        out = np.kron(out, p)
    return out


# ---------------------------------------------------------------------------
# robust typicality windows over enumerated cells
# ---------------------------------------------------------------------------


def _windows(probs: np.ndarray, n: int, delta: float):
    """Per-cell admissible count ranges mirroring the typical-set rule."""
    p = np.asarray(probs, dtype=float).reshape(-1)
    lo = np.where(p > 0, np.ceil(n * p * (1.0 - delta) - 1e-12), 0.0)
    lo = np.maximum(lo, 0.0)
    hi = np.where(p > 0, np.floor(n * p * (1.0 + delta) + 1e-12), 0.0)
    hi = np.minimum(hi, n)
    return lo, hi


def _counts_typical(cell_ids: np.ndarray, n_cells: int, lo, hi) -> bool:
    counts = np.bincount(cell_ids, minlength=n_cells)
    return bool(np.all((counts >= lo) & (counts <= hi)))


# ---------------------------------------------------------------------------
# deterministic code components
# ---------------------------------------------------------------------------


def _distinct_composition_words(counts, m_words: int, rng: np.random.Generator):
    """m_words distinct words sharing the composition given by counts."""
    l = sum(counts)
    base = np.repeat(np.arange(len(counts)), counts)
    total = math.factorial(l)
    for c in counts:
        total //= math.factorial(c)
    if m_words > total:
        raise ValueError(
            "inner code needs %d distinct words but the composition class has %d"
            % (m_words, total)
        )
    if total <= max(4096, 4 * m_words):
        words = sorted(set(itertools.permutations(base.tolist())))
        order = rng.permutation(len(words))[:m_words]
        return np.array([words[i] for i in order], dtype=np.int64)
    seen = {}
    out = []
    attempts = 0
    while len(out) < m_words:
        attempts += 1
        if attempts > 200 * m_words:
            raise RuntimeError("rejection sampling of distinct words stalled")
        w = tuple(rng.permutation(base).tolist())
        if w not in seen:
            seen[w] = True
            out.append(w)
    return np.array(out, dtype=np.int64)


def _mapper_tensor(mapper: Channel, n_u: int, n_v: int) -> np.ndarray:
    """Mapper rows reshaped to (|U|, |V|, |X|); input order is u-major."""
    n_x = len(mapper.output)
    return mapper.probs.reshape(n_u, n_v, n_x)


def _log_table(rows: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        out = np.log(rows)
    out[np.isneginf(out)] = -1e30
    return out


@dataclass
class CodeBundle:
    """Deterministic code components plus cached numeric tables."""

    spec: CodeEnsembleSpec
    k_alpha: Alphabet
    idx_k1: np.ndarray
    idx_k2: np.ndarray
    p_k: Pmf
    xi: float
    typical_words: tuple
    e_k: dict
    d_k: np.ndarray
    m_u: int
    cu: np.ndarray
    log_w_u: tuple
    pyuu: tuple
    source_flat: np.ndarray
    x1_probs: np.ndarray
    x2_probs: np.ndarray
    x1_cdf: np.ndarray
    x2_cdf: np.ndarray
    chan_cdf: np.ndarray
    y_split: tuple
    delta_dec: float
    penalties: dict = field(default_factory=dict)


def _assignment_tables(asn, mode_mac: bool):
    """Single-letter tensors shared by trials and exact pmf construction."""
    n_u = len(asn.p_u.alphabet)
    n_v1 = len(asn.p_v1.alphabet)
    n_v2 = len(asn.p_v2.alphabet)
    x1 = _mapper_tensor(asn.x1_mapper, n_u, n_v1)
    x2 = _mapper_tensor(asn.x2_mapper, n_u, n_v2)
    n_x1 = x1.shape[2]
    n_x2 = x2.shape[2]
    w = asn.channel.probs.reshape(n_x1, n_x2, len(asn.channel.output))
    # law of the channel output given each pair of inner-code letters
    pyuu = np.einsum("b,c,abd,gce,def->agf", asn.p_v1.probs, asn.p_v2.probs, x1, x2, w)
    if mode_mac:
        return x1, x2, w, (pyuu,), (None, None)
    out = asn.channel.output
    a1, a2 = asn.receiver_alphabets()
    split1 = np.array([a1.index(s[0]) for s in out.symbols], dtype=np.int64)
    split2 = np.array([a2.index(s[1]) for s in out.symbols], dtype=np.int64)
    py1 = np.zeros((n_u, n_u, len(a1)))
    py2 = np.zeros((n_u, n_u, len(a2)))
    np.add.at(py1.transpose(2, 0, 1), split1, pyuu.transpose(2, 0, 1))
    np.add.at(py2.transpose(2, 0, 1), split2, pyuu.transpose(2, 0, 1))
    return x1, x2, w, (py1, py2), (split1, split2)


def build_codes(spec: CodeEnsembleSpec, seed: int = None) -> CodeBundle:
    """Deterministic components: row source code, inner code, decoder tables.

    The inner codebook consists of distinct words of the exact composition
    of p_u, drawn by seeded shuffles; the row decoder is maximum likelihood
    for the channel induced by agreeing inner letters.
    """
    asn = spec.assignment
    params = spec.params
    seed = spec.seed if seed is None else seed
    rng = np.random.default_rng(np.random.SeedSequence([_mask_seed(seed), 2]))

    cp = _common_part(asn.source, asn.f1, asn.f2, params.side_a)
    t_set = typical_set(cp.p_k, params.l, params.delta)
    words = tuple(t_set.sequences())
    if not words:
        raise ValueError("the typical set of the common label is empty")
    e_k = {w: i for i, w in enumerate(words)}
    d_k = np.array(
        [[cp.k_alpha.index(s) for s in w] for w in words], dtype=np.int64
    )
    m_u = max(1, int(math.ceil(len(words) * math.exp(-params.l * params.beta) - 1e-9)))

    counts = composition_counts(asn.p_u, params.l)
    cu = _distinct_composition_words(counts, m_u, rng)

    x1, x2, w, pyuu_all, y_split = _assignment_tables(asn, spec.is_mac)
    if spec.is_mac:
        log_w_u = (_log_table(np.einsum("aab->ab", pyuu_all[0])),)
        pyuu = pyuu_all
    else:
        log_w_u = tuple(_log_table(np.einsum("aab->ab", p)) for p in pyuu_all)
        pyuu = pyuu_all

    src = asn.source.permute(("s1", "s2")).probs
    n_x2 = x2.shape[2]
    chan_rows = asn.channel.probs
    bundle = CodeBundle(
        spec=spec,
        k_alpha=cp.k_alpha,
        idx_k1=cp.idx1,
        idx_k2=cp.idx2,
        p_k=cp.p_k,
        xi=cp.xi,
        typical_words=words,
        e_k=e_k,
        d_k=d_k,
        m_u=m_u,
        cu=cu,
        log_w_u=log_w_u,
        pyuu=pyuu,
        source_flat=src.reshape(-1),
        x1_probs=x1,
        x2_probs=x2,
        x1_cdf=np.cumsum(x1, axis=2),
        x2_cdf=np.cumsum(x2, axis=2),
        chan_cdf=np.cumsum(chan_rows, axis=1),
        y_split=y_split,
        delta_dec=spec.delta_dec if spec.delta_dec is not None else 0.0,
    )
    if spec.delta_dec is None:
        bundle.delta_dec = calibrate_delta_dec(spec, bundle=bundle)
    return bundle


# ---------------------------------------------------------------------------
# exact decoding pmfs
# ---------------------------------------------------------------------------


@dataclass
class DecodingPmfs:
    """Exact finite pmfs the decoders test against.

    row_pmf is the l-letter law of one matrix row, interleaved_pmf the
    single-letter mixture governing interleaved columns, and sw_pmf the
    super-letter law of (source rows, reconstructed label row); sw_pmf is
    a pair of per-receiver laws in the two-receiver variant.  row_pmf is
    None when its full table would exceed the enumeration budget; the
    decoders never need it, only the distribution checks do.
    """

    row_pmf: JointPmf
    interleaved_pmf: JointPmf
    sw_pmf: object
    tables: dict = field(default_factory=dict, repr=False)


def _message_pair_law(bundle: CodeBundle) -> np.ndarray:
    """Exact joint law of the two row labels after row source coding."""
    asn = bundle.spec.assignment
    params = bundle.spec.params
    src = asn.source.permute(("s1", "s2")).probs
    n_k = len(bundle.k_alpha)
    pkk = np.zeros((n_k, n_k))
    np.add.at(pkk, (bundle.idx_k1[:, None], bundle.idx_k2[None, :].repeat(src.shape[0], 0)), src)
    supp = [(i, j, pkk[i, j]) for i in range(n_k) for j in range(n_k) if pkk[i, j] > 0]
    if len(supp) ** params.l > cell_budget():
        raise ValueError("label support too large to enumerate row label pairs")
    paa = np.zeros((bundle.m_u, bundle.m_u))
    for combo in itertools.product(supp, repeat=params.l):
        prob = 1.0
        for _, _, p in combo:
            prob *= p
        k1 = tuple(bundle.k_alpha.symbols[c[0]] for c in combo)
        k2 = tuple(bundle.k_alpha.symbols[c[1]] for c in combo)
        a1 = bundle.e_k.get(k1, 0) % bundle.m_u
        a2 = bundle.e_k.get(k2, 0) % bundle.m_u
        paa[a1, a2] += prob
    return paa


def _coordinate_kernel(tensor: np.ndarray, dig_a, dig_b, dig_c) -> np.ndarray:
    """Product kernel T_l[a, b, c] = prod_i tensor[a_i, b_i, c_i]."""
    out = np.ones((dig_a.shape[0], dig_b.shape[0], dig_c.shape[0]))
    for i in range(dig_a.shape[1]):
        out *= tensor[dig_a[:, i]][:, dig_b[:, i]][:, :, dig_c[:, i]]
    return out


def _script_pmf(bundle: CodeBundle, paa: np.ndarray) -> JointPmf:
    """Single-letter mixture law computed directly from the generative form."""
    asn = bundle.spec.assignment
    l = bundle.spec.params.l
    n_u = len(asn.p_u.alphabet)
    puu = np.zeros((n_u, n_u))
    for a1 in range(bundle.m_u):
        for a2 in range(bundle.m_u):
            if paa[a1, a2] == 0:
                continue
            for i in range(l):
                puu[bundle.cu[a1, i], bundle.cu[a2, i]] += paa[a1, a2] / l
    x1, x2 = bundle.x1_probs, bundle.x2_probs
    w = asn.channel.probs.reshape(x1.shape[2], x2.shape[2], -1)
    probs = np.einsum("ab,c,d,ace,bdf,efg->abcdefg",
                      puu, asn.p_v1.probs, asn.p_v2.probs, x1, x2, w)
    names = ("u1", "u2", "v1", "v2", "x1", "x2", "y")
    alphas = (asn.p_u.alphabet, asn.p_u.alphabet, asn.p_v1.alphabet,
              asn.p_v2.alphabet, asn.x1_mapper.output, asn.x2_mapper.output,
              asn.channel.output)
    return JointPmf(names, alphas, probs)


def _row_pmf(bundle: CodeBundle, paa: np.ndarray) -> JointPmf:
    asn = bundle.spec.assignment
    l = bundle.spec.params.l
    n_u = len(asn.p_u.alphabet)
    n_v1 = len(asn.p_v1.alphabet)
    n_v2 = len(asn.p_v2.alphabet)
    n_x1 = bundle.x1_probs.shape[2]
    n_x2 = bundle.x2_probs.shape[2]
    n_y = len(asn.channel.output)
    sizes = [n_u, n_u, n_v1, n_v2, n_x1, n_x2, n_y]
    cells = 1
    for s in sizes:
        cells *= s ** l
    if cells > cell_budget():
        raise ValueError("row pmf needs %d cells, over the enumeration budget" % cells)

    dig_u = _digit_table(n_u, l)
    dig_v1 = _digit_table(n_v1, l)
    dig_v2 = _digit_table(n_v2, l)
    dig_x1 = _digit_table(n_x1, l)
    dig_x2 = _digit_table(n_x2, l)
    dig_y = _digit_table(n_y, l)

    puu_l = np.zeros((n_u ** l, n_u ** l))
    for a1 in range(bundle.m_u):
        i1 = _tuple_index(bundle.cu[a1], n_u)
        for a2 in range(bundle.m_u):
            if paa[a1, a2] > 0:
                puu_l[i1, _tuple_index(bundle.cu[a2], n_u)] += paa[a1, a2]

    pv1_l = _power_probs(asn.p_v1.probs, l)
    pv2_l = _power_probs(asn.p_v2.probs, l)
    tx1 = _coordinate_kernel(bundle.x1_probs, dig_u, dig_v1, dig_x1)
    tx2 = _coordinate_kernel(bundle.x2_probs, dig_u, dig_v2, dig_x2)
    w3 = asn.channel.probs.reshape(n_x1, n_x2, n_y)
    wl = _coordinate_kernel(w3, dig_x1, dig_x2, dig_y)

    probs = np.einsum("ab,c,d,ace,bdf,efg->abcdefg",
                      puu_l, pv1_l, pv2_l, tx1, tx2, wl)
    def power(alpha):
        return product_alphabet(*([alpha] * l))
    names = ("u1", "u2", "v1", "v2", "x1", "x2", "y")
    alphas = (power(asn.p_u.alphabet), power(asn.p_u.alphabet),
              power(asn.p_v1.alphabet), power(asn.p_v2.alphabet),
              power(asn.x1_mapper.output), power(asn.x2_mapper.output),
              power(asn.channel.output))
    return JointPmf(names, alphas, probs)


def _coordinate_mixture(row_pmf: JointPmf, l: int, sizes) -> np.ndarray:
    """Row-average of coordinate marginals of an all-power-alphabet joint."""
    digs = [_digit_table(s, l) for s in sizes]
    out = np.zeros(tuple(sizes))
    flat = row_pmf.probs.reshape([s ** l for s in sizes])
    for i in range(l):
        grids = np.meshgrid(*[d[:, i] for d in digs], indexing="ij", sparse=True)
        small = np.zeros(tuple(sizes))
        np.add.at(small, tuple(g for g in grids), flat)
        out += small / l
    return out


def _khat_law_given_labels(bundle, receiver: int):
    """p(reconstructed label row | message pair), by output enumeration."""
    spec = bundle.spec
    l = spec.params.l
    if spec.is_mac:
        n_y = len(spec.assignment.channel.output)
        pyuu = bundle.pyuu[0]
        logw = bundle.log_w_u[0]
    else:
        alpha = spec.assignment.receiver_alphabets()[receiver - 1]
        n_y = len(alpha)
        pyuu = bundle.pyuu[receiver - 1]
        logw = bundle.log_w_u[receiver - 1]
    if n_y ** l > cell_budget():
        raise ValueError("output enumeration needs %d cells, over budget" % (n_y ** l))
    dig_y = _digit_table(n_y, l)
    n = dig_y.shape[0]
    scores = np.zeros((n, bundle.m_u))
    for i in range(l):
        scores += logw[bundle.cu[:, i]][:, dig_y[:, i]].T
    khat_word = np.argmax(scores, axis=1)
    n_k = len(bundle.k_alpha)
    k_lidx = np.array([_tuple_index(bundle.d_k[a], n_k) for a in khat_word])

    out = np.zeros((bundle.m_u, bundle.m_u, n_k ** l))
    for a1 in range(bundle.m_u):
        rows1 = bundle.cu[a1]
        for a2 in range(bundle.m_u):
            rows2 = bundle.cu[a2]
            prob = np.ones(n)
            for i in range(l):
                prob *= pyuu[rows1[i], rows2[i]][dig_y[:, i]]
            np.add.at(out[a1, a2], k_lidx, prob)
    return out


def _sw_pmf_mac(bundle: CodeBundle) -> JointPmf:
    asn = bundle.spec.assignment
    l = bundle.spec.params.l
    src = asn.source.permute(("s1", "s2")).probs
    n_s1, n_s2 = src.shape
    n_k = len(bundle.k_alpha)
    khat_given = _khat_law_given_labels(bundle, 1)

    supp = [(i, j, src[i, j]) for i in range(n_s1) for j in range(n_s2) if src[i, j] > 0]
    if len(supp) ** l > cell_budget():
        raise ValueError("source support too large to enumerate super letters")
    table = np.zeros((n_s1 ** l, n_s2 ** l, n_k ** l))
    for combo in itertools.product(supp, repeat=l):
        prob = 1.0
        for _, _, p in combo:
            prob *= p
        s1_idx = _tuple_index([c[0] for c in combo], n_s1)
        s2_idx = _tuple_index([c[1] for c in combo], n_s2)
        k1 = tuple(bundle.k_alpha.symbols[bundle.idx_k1[c[0]]] for c in combo)
        k2 = tuple(bundle.k_alpha.symbols[bundle.idx_k2[c[1]]] for c in combo)
        a1 = bundle.e_k.get(k1, 0) % bundle.m_u
        a2 = bundle.e_k.get(k2, 0) % bundle.m_u
        table[s1_idx, s2_idx] += prob * khat_given[a1, a2]

    def power(alpha):
        return product_alphabet(*([alpha] * l))
    return JointPmf(
        ("s1", "s2", "khat"),
        (power(asn.source.alphabets[0]), power(asn.source.alphabets[1]),
         power(bundle.k_alpha)),
        table,
    )


def _sw_pmf_ic(bundle: CodeBundle, receiver: int) -> JointPmf:
    asn = bundle.spec.assignment
    l = bundle.spec.params.l
    src = asn.source.permute(("s1", "s2")).probs
    n_s = src.shape[receiver - 1]
    n_k = len(bundle.k_alpha)
    khat_given = _khat_law_given_labels(bundle, receiver)

    supp = [(i, j, src[i, j]) for i in range(src.shape[0])
            for j in range(src.shape[1]) if src[i, j] > 0]
    if len(supp) ** l > cell_budget():
        raise ValueError("source support too large to enumerate super letters")
    table = np.zeros((n_s ** l, n_k ** l))
    for combo in itertools.product(supp, repeat=l):
        prob = 1.0
        for _, _, p in combo:
            prob *= p
        own = [c[receiver - 1] for c in combo]
        s_idx = _tuple_index(own, n_s)
        k1 = tuple(bundle.k_alpha.symbols[bundle.idx_k1[c[0]]] for c in combo)
        k2 = tuple(bundle.k_alpha.symbols[bundle.idx_k2[c[1]]] for c in combo)
        a1 = bundle.e_k.get(k1, 0) % bundle.m_u
        a2 = bundle.e_k.get(k2, 0) % bundle.m_u
        table[s_idx] += prob * khat_given[a1, a2]

    def power(alpha):
        return product_alphabet(*([alpha] * l))
    name = "s%d" % receiver
    return JointPmf(
        (name, "khat%d" % receiver),
        (power(asn.source.alphabets[receiver - 1]), power(bundle.k_alpha)),
        table,
    )


def _row_pmf_ic(bundle: CodeBundle, paa: np.ndarray) -> JointPmf:
    """Two-receiver row law: the pair output axis split per receiver."""
    base = _row_pmf(bundle, paa)
    asn = bundle.spec.assignment
    l = bundle.spec.params.l
    a1, a2 = asn.receiver_alphabets()
    split1, split2 = bundle.y_split
    n_y = len(asn.channel.output)
    dig_y = _digit_table(n_y, l)
    y1_of = np.array([_tuple_index(split1[d], len(a1)) for d in dig_y])
    y2_of = np.array([_tuple_index(split2[d], len(a2)) for d in dig_y])

    sizes = list(base.probs.shape)
    flat = base.probs.reshape(-1, sizes[-1])
    out = np.zeros((flat.shape[0], len(a1) ** l, len(a2) ** l))
    np.add.at(out.transpose(1, 2, 0), (y1_of, y2_of), flat.T)

    def power(alpha):
        return product_alphabet(*([alpha] * l))
    names = ("u1", "u2", "v1", "v2", "x1", "x2", "y1", "y2")
    alphas = base.alphabets[:-1] + (power(a1), power(a2))
    return JointPmf(names, alphas, out.reshape(sizes[:-1] + [len(a1) ** l, len(a2) ** l]))


def _script_pmf_ic(bundle: CodeBundle, paa: np.ndarray) -> JointPmf:
    base = _script_pmf(bundle, paa)
    asn = bundle.spec.assignment
    a1, a2 = asn.receiver_alphabets()
    split1, split2 = bundle.y_split
    shape = base.probs.shape
    flat = base.probs.reshape(-1, shape[-1])
    out = np.zeros((flat.shape[0], len(a1), len(a2)))
    np.add.at(out.transpose(1, 2, 0), (split1, split2), flat.T)
    names = ("u1", "u2", "v1", "v2", "x1", "x2", "y1", "y2")
    alphas = base.alphabets[:-1] + (a1, a2)
    return JointPmf(names, alphas, out.reshape(shape[:-1] + (len(a1), len(a2))))


def _check_normalized(pmf: JointPmf, name: str):
    total = float(pmf.probs.sum())
    if abs(total - 1.0) > 1e-12:
        raise ValueError("%s sums to %.17g, expected 1" % (name, total))


def _row_cells(bundle: CodeBundle) -> int:
    asn = bundle.spec.assignment
    l = bundle.spec.params.l
    sizes = [len(asn.p_u.alphabet)] * 2 + [
        len(asn.p_v1.alphabet), len(asn.p_v2.alphabet),
        bundle.x1_probs.shape[2], bundle.x2_probs.shape[2],
    ]
    if bundle.spec.is_mac:
        sizes.append(len(asn.channel.output))
    else:
        sizes.extend(len(a) for a in asn.receiver_alphabets())
    cells = 1
    for s in sizes:
        cells *= s ** l
    return cells


def build_decoding_pmfs(spec: CodeEnsembleSpec, bundle: CodeBundle = None) -> DecodingPmfs:
    """Exact row, interleaved-mixture and super-letter reconstruction pmfs."""
    if bundle is None:
        bundle = build_codes(spec)
    n_y = (len(spec.assignment.channel.output) if spec.is_mac
           else max(len(a) for a in spec.assignment.receiver_alphabets()))
    if n_y ** spec.params.l > cell_budget():
        raise ValueError("output alphabet power exceeds the enumeration budget")
    paa = _message_pair_law(bundle)
    with_row = _row_cells(bundle) <= cell_budget()

    if spec.is_mac:
        row = _row_pmf(bundle, paa) if with_row else None
        script = _script_pmf(bundle, paa)
        sw = _sw_pmf_mac(bundle)
    else:
        row = _row_pmf_ic(bundle, paa) if with_row else None
        script = _script_pmf_ic(bundle, paa)
        sw = (_sw_pmf_ic(bundle, 1), _sw_pmf_ic(bundle, 2))

    if row is not None:
        _check_normalized(row, "row pmf")
    _check_normalized(script, "interleaved pmf")
    for p, nm in ([(sw, "sw pmf")] if spec.is_mac
                  else [(sw[0], "sw pmf 1"), (sw[1], "sw pmf 2")]):
        _check_normalized(p, nm)

    if row is not None:
        # the mixture must equal the row-average of coordinate marginals
        sizes = [len(a) for a in script.alphabets]
        mix = _coordinate_mixture(row, spec.params.l, sizes)
        err = float(np.abs(mix - script.probs).max())
        if err > 1e-12:
            raise AssertionError(
                "interleaved pmf deviates from coordinate mixture by %g" % err)

    pmfs = DecodingPmfs(row_pmf=row, interleaved_pmf=script, sw_pmf=sw)
    _build_decoder_tables(spec, bundle, pmfs)
    return pmfs


def _build_decoder_tables(spec, bundle, pmfs):
    """Window tables and support lists used inside trials."""
    m = spec.m
    delta = bundle.delta_dec
    t = pmfs.tables
    if spec.is_mac:
        q3 = pmfs.interleaved_pmf.marginal(("v1", "v2", "y")).probs
        t["col_probs"] = (q3,)
        t["col_windows"] = (_windows(q3, m, delta),)
        sw = pmfs.sw_pmf.probs
        t["sw_probs"] = (sw,)
        t["sw_windows"] = (_windows(sw, m, delta),)
        support = {}
        nz = np.argwhere(sw > 0)
        for s1_idx, s2_idx, k_idx in nz:
            support.setdefault(int(k_idx), []).append((int(s1_idx), int(s2_idx)))
        t["sw_support"] = (support,)
    else:
        q1 = pmfs.interleaved_pmf.marginal(("v1", "u1", "y1")).probs
        q2 = pmfs.interleaved_pmf.marginal(("v2", "u2", "y2")).probs
        t["col_probs"] = (q1, q2)
        t["col_windows"] = (_windows(q1, m, delta), _windows(q2, m, delta))
        sups = []
        sws = []
        wins = []
        for j, swj in enumerate(pmfs.sw_pmf):
            probs = swj.probs
            sws.append(probs)
            wins.append(_windows(probs, m, delta))
            support = {}
            for s_idx, k_idx in np.argwhere(probs > 0):
                support.setdefault(int(k_idx), []).append(int(s_idx))
            sups.append(support)
        t["sw_probs"] = tuple(sws)
        t["sw_windows"] = tuple(wins)
        t["sw_support"] = tuple(sups)


# ---------------------------------------------------------------------------
# decoder tolerance calibration
# ---------------------------------------------------------------------------


def calibrate_delta_dec(spec: CodeEnsembleSpec, target: float = 0.99,
                        samples: int = 400, bundle: CodeBundle = None) -> float:
    """Smallest grid tolerance making the null laws self-typical.

    Draws seeded iid m-sequences from the interleaved mixture and from the
    super-letter law and returns the smallest grid delta at which at least
    the target fraction of draws is typical under every law.
    """
    if not 0 < target < 1:
        raise ValueError("target must be in (0, 1)")
    if bundle is None:
        probe = CodeEnsembleSpec(spec.assignment, spec.params, spec.m, spec.rates,
                                 spec.seed, spec.mode, 1.0, spec.search_budget)
        bundle = build_codes(probe)
    saved = bundle.delta_dec
    bundle.delta_dec = 1.0
    pmfs = build_decoding_pmfs(spec, bundle)
    bundle.delta_dec = saved

    laws = [p.reshape(-1) for p in
            [np.asarray(q, dtype=float) for q in pmfs.tables["col_probs"]]]
    laws += [p.reshape(-1) for p in
             [np.asarray(q, dtype=float) for q in pmfs.tables["sw_probs"]]]
    rng = np.random.default_rng(
        np.random.SeedSequence([_mask_seed(spec.seed), _TAG_CAL])
    )
    draws = [rng.choice(len(law), size=(samples, spec.m), p=law) for law in laws]
    grid = (0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0)
    for delta in grid:
        ok = True
        for law, sample in zip(laws, draws):
            lo, hi = _windows(law, spec.m, delta)
            good = sum(
                1 for row in sample if _counts_typical(row, len(law), lo, hi)
            )
            if good < target * samples:
                ok = False
                break
        if ok:
            return float(delta)
    raise ValueError("no grid tolerance reaches the calibration target")


# ---------------------------------------------------------------------------
# trials
# ---------------------------------------------------------------------------


def _sample_inputs(seed, trial, encoder, u_mat, v_mat, cdf):
    m, l = u_mat.shape
    out = np.empty((m, l), dtype=np.int64)
    base = _mask_seed(seed)
    for t in range(m):
        for i in range(l):
            u = int(u_mat[t, i])
            v = int(v_mat[t, i])
            variate = _hash_uniform(base, _TAG_X, trial, encoder, t, i, u, v)
            out[t, i] = _sample_from_cdf(cdf[u, v], variate)
    return out


def _encode_common(bundle, rng):
    """Sample sources, map rows through the label source code."""
    spec = bundle.spec
    m, l = spec.m, spec.params.l
    asn = spec.assignment
    n_s2 = len(asn.source.alphabets[1])
    flat = rng.choice(len(bundle.source_flat), size=m * l, p=bundle.source_flat)
    s1 = (flat // n_s2).reshape(m, l)
    s2 = (flat % n_s2).reshape(m, l)
    k1 = bundle.idx_k1[s1]
    k2 = bundle.idx_k2[s2]

    syms = bundle.k_alpha.symbols
    a1 = np.empty(m, dtype=np.int64)
    a2 = np.empty(m, dtype=np.int64)
    atypical = 0
    for t in range(m):
        w1 = tuple(syms[c] for c in k1[t])
        w2 = tuple(syms[c] for c in k2[t])
        if w1 not in bundle.e_k:
            atypical += 1
        a1[t] = bundle.e_k.get(w1, 0) % bundle.m_u
        a2[t] = bundle.e_k.get(w2, 0) % bundle.m_u
    return s1, s2, k1, k2, a1, a2, atypical


def _outer_encode(bundle, rng, trial, s_mats):
    """Per-trial bins, outer codebooks, permutations and letter matrices."""
    spec = bundle.spec
    m, l = spec.m, spec.params.l
    asn = spec.assignment
    sizes = spec.codebook_sizes()
    books = []
    bins = []
    for j, p_v in ((1, asn.p_v1), (2, asn.p_v2)):
        n_v = len(p_v.alphabet)
        books.append(rng.choice(n_v, size=(l, sizes[j - 1], m), p=p_v.probs))
        bins.append(np.array(
            [_bin_index(spec.seed, trial, j, i, s_mats[j - 1], sizes[j - 1])
             for i in range(l)], dtype=np.int64))
    perms = np.stack([rng.permutation(l) for _ in range(m)])
    rows = np.arange(m)[:, None]
    v_mats = []
    for j in (1, 2):
        sel = books[j - 1][np.arange(l), bins[j - 1], :]
        v = np.empty((m, l), dtype=np.int64)
        v[rows, perms] = sel.T
        v_mats.append(v)
    return books, bins, perms, v_mats


def _inner_decode(bundle, y, receiver):
    m, l = y.shape
    logw = bundle.log_w_u[receiver - 1]
    scores = np.zeros((m, bundle.m_u))
    for i in range(l):
        scores += logw[bundle.cu[:, i]][:, y[:, i]].T
    hat = np.argmax(scores, axis=1)
    return hat, bundle.d_k[hat]


def _column_view(mat, perms, i):
    return mat[np.arange(mat.shape[0]), perms[:, i]]


def _sw_search_mac(bundle, pmfs, rng, trial, khat, bhat, bins_sizes, truth):
    """Enumerate label-compatible source pairs, filter by bins and typicality."""
    spec = bundle.spec
    m, l = spec.m, spec.params.l
    tables = pmfs.tables
    support = tables["sw_support"][0]
    sw_probs = tables["sw_probs"][0]
    lo, hi = tables["sw_windows"][0]
    n_s1l, n_s2l, n_kl = sw_probs.shape
    n_k = len(bundle.k_alpha)
    n_s1 = len(spec.assignment.source.alphabets[0])
    n_s2 = len(spec.assignment.source.alphabets[1])
    dig_s1 = _digit_table(n_s1, l)
    dig_s2 = _digit_table(n_s2, l)

    k_lidx = _row_indices(khat, n_k)
    cands = []
    frontier = 1
    for t in range(m):
        c = support.get(int(k_lidx[t]), [])
        if not c:
            return True, False, 0, ()
        frontier *= len(c)
        if frontier > spec.search_budget:
            return False, False, 0, ("sw-search-budget",)
        cands.append(c)

    matches = []
    for combo in itertools.product(*cands):
        s1_rows = np.array([c[0] for c in combo])
        s2_rows = np.array([c[1] for c in combo])
        cell = (s1_rows * n_s2l + s2_rows) * n_kl + k_lidx
        if not _counts_typical(cell, n_s1l * n_s2l * n_kl, lo.reshape(-1), hi.reshape(-1)):
            continue
        s1_mat = dig_s1[s1_rows]
        s2_mat = dig_s2[s2_rows]
        ok = True
        for i in range(l):
            if (_bin_index(spec.seed, trial, 1, i, s1_mat, bins_sizes[0]) != bhat[0][i]
                    or _bin_index(spec.seed, trial, 2, i, s2_mat, bins_sizes[1]) != bhat[1][i]):
                ok = False
                break
        if ok:
            matches.append((s1_mat, s2_mat))
    if not matches:
        return True, False, 0, ()
    ties = 1 if len(matches) > 1 else 0
    pick = matches[int(rng.integers(len(matches)))] if ties else matches[0]
    correct = bool(np.array_equal(pick[0], truth[0]) and np.array_equal(pick[1], truth[1]))
    return True, correct, ties, ()


def _sw_search_ic(bundle, pmfs, rng, trial, receiver, khat, bhat_j, size_j, truth_j):
    spec = bundle.spec
    m, l = spec.m, spec.params.l
    tables = pmfs.tables
    support = tables["sw_support"][receiver - 1]
    sw_probs = tables["sw_probs"][receiver - 1]
    lo, hi = tables["sw_windows"][receiver - 1]
    n_sl, n_kl = sw_probs.shape
    n_k = len(bundle.k_alpha)
    n_s = len(spec.assignment.source.alphabets[receiver - 1])
    dig_s = _digit_table(n_s, l)

    k_lidx = _row_indices(khat, n_k)
    cands = []
    frontier = 1
    for t in range(m):
        c = support.get(int(k_lidx[t]), [])
        if not c:
            return True, False, 0, ()
        frontier *= len(c)
        if frontier > spec.search_budget:
            return False, False, 0, ("sw-search-budget-%d" % receiver,)
        cands.append(c)

    matches = []
    for combo in itertools.product(*cands):
        s_rows = np.array(combo)
        cell = s_rows * n_kl + k_lidx
        if not _counts_typical(cell, n_sl * n_kl, lo.reshape(-1), hi.reshape(-1)):
            continue
        s_mat = dig_s[s_rows]
        if all(_bin_index(spec.seed, trial, receiver, i, s_mat, size_j) == bhat_j[i]
               for i in range(l)):
            matches.append(s_mat)
    if not matches:
        return True, False, 0, ()
    ties = 1 if len(matches) > 1 else 0
    pick = matches[int(rng.integers(len(matches)))] if ties else matches[0]
    return True, bool(np.array_equal(pick, truth_j)), ties, ()


def _mac_trial(bundle, pmfs, index):
    spec = bundle.spec
    m, l = spec.m, spec.params.l
    asn = spec.assignment
    rng = _trial_rng(spec.seed, index)
    sizes = spec.codebook_sizes()

    s1, s2, k1, k2, a1, a2, atypical = _encode_common(bundle, rng)
    u1 = bundle.cu[a1]
    u2 = bundle.cu[a2]
    books, bins, perms, (v1, v2) = _outer_encode(bundle, rng, index, (s1, s2))
    x1 = _sample_inputs(spec.seed, index, 1, u1, v1, bundle.x1_cdf)
    x2 = _sample_inputs(spec.seed, index, 2, u2, v2, bundle.x2_cdf)

    n_x2 = bundle.x2_probs.shape[2]
    rowsel = (x1 * n_x2 + x2).reshape(-1)
    variates = rng.random(m * l)
    y = np.array([
        _sample_from_cdf(bundle.chan_cdf[r], u) for r, u in zip(rowsel, variates)
    ], dtype=np.int64).reshape(m, l)

    hat_a, khat = _inner_decode(bundle, y, 1)
    inner_errors = int((hat_a != a1).sum())
    disagreement = int((a1 != a2).sum())

    # column decoding against the interleaved mixture
    q3 = pmfs.tables["col_probs"][0]
    lo, hi = pmfs.tables["col_windows"][0]
    n_v1, n_v2, n_y = q3.shape
    outer_err = []
    tie_cols = []
    bhat1 = np.zeros(l, dtype=np.int64)
    bhat2 = np.zeros(l, dtype=np.int64)
    for i in range(l):
        ycol = _column_view(y, perms, i)
        members = []
        for b1 in range(sizes[0]):
            w1 = books[0][i, b1]
            for b2 in range(sizes[1]):
                cell = (w1 * n_v2 + books[1][i, b2]) * n_y + ycol
                if _counts_typical(cell, n_v1 * n_v2 * n_y, lo.reshape(-1), hi.reshape(-1)):
                    members.append((b1, b2))
        tie_cols.append(int(len(members) > 1))
        if not members:
            pick = (int(rng.integers(sizes[0])), int(rng.integers(sizes[1])))
        elif len(members) == 1:
            pick = members[0]
        else:
            pick = members[int(rng.integers(len(members)))]
        bhat1[i], bhat2[i] = pick
        outer_err.append(int(pick != (int(bins[0][i]), int(bins[1][i]))))

    aborts = ()
    if spec.mode == "end_to_end":
        attempted, success, sw_ties, aborts = _sw_search_mac(
            bundle, pmfs, rng, index, khat, (bhat1, bhat2), sizes, (s1, s2))
    else:
        attempted, success, sw_ties = False, False, 0

    outcome = TrialOutcome(
        mode="mac1",
        m=m,
        disagreement_count=disagreement,
        atypical_rows=atypical,
        inner_errors=(inner_errors,),
        outer_errors=(tuple(outer_err),),
        outer_ties=(tuple(tie_cols),),
        sw_attempted=(attempted,),
        sw_success=(success,),
        sw_ties=(sw_ties,),
        end_to_end=bool(attempted and success),
        budget_aborts=tuple(aborts),
    )
    alphabets = {
        "s1": asn.source.alphabets[0], "s2": asn.source.alphabets[1],
        "k": bundle.k_alpha, "u": asn.p_u.alphabet,
        "v1": asn.p_v1.alphabet, "v2": asn.p_v2.alphabet,
        "x1": asn.x1_mapper.output, "x2": asn.x2_mapper.output,
        "y": asn.channel.output,
    }
    block = MatrixBlock(
        s1=s1, s2=s2, k1=k1, k2=k2, u1=u1, u2=u2, v1=v1, v2=v2,
        x1=x1, x2=x2, alphabets=alphabets, y=y, khat=khat,
    )
    return outcome, block, perms


def _ic_trial(bundle, pmfs, index):
    spec = bundle.spec
    m, l = spec.m, spec.params.l
    asn = spec.assignment
    rng = _trial_rng(spec.seed, index)
    sizes = spec.codebook_sizes()

    s1, s2, k1, k2, a1, a2, atypical = _encode_common(bundle, rng)
    u1 = bundle.cu[a1]
    u2 = bundle.cu[a2]
    books, bins, perms, (v1, v2) = _outer_encode(bundle, rng, index, (s1, s2))
    x1 = _sample_inputs(spec.seed, index, 1, u1, v1, bundle.x1_cdf)
    x2 = _sample_inputs(spec.seed, index, 2, u2, v2, bundle.x2_cdf)

    n_x2 = bundle.x2_probs.shape[2]
    rowsel = (x1 * n_x2 + x2).reshape(-1)
    variates = rng.random(m * l)
    ypair = np.array([
        _sample_from_cdf(bundle.chan_cdf[r], u) for r, u in zip(rowsel, variates)
    ], dtype=np.int64).reshape(m, l)
    split1, split2 = bundle.y_split
    y1 = split1[ypair]
    y2 = split2[ypair]

    inner = []
    khats = []
    for j, (y_j, a_j) in enumerate(((y1, a1), (y2, a2)), start=1):
        hat, khat = _inner_decode(bundle, y_j, j)
        inner.append(int((hat != a_j).sum()))
        khats.append((hat, khat))
    disagreement = int((a1 != a2).sum())

    outer_err = []
    outer_ties = []
    bhats = []
    for j, (y_j, v_book, b_true) in enumerate(
            ((y1, books[0], bins[0]), (y2, books[1], bins[1])), start=1):
        q = pmfs.tables["col_probs"][j - 1]
        lo, hi = pmfs.tables["col_windows"][j - 1]
        n_v, n_u, n_y = q.shape
        uhat = bundle.cu[khats[j - 1][0]]
        errs = []
        tie_cols = []
        bhat = np.zeros(l, dtype=np.int64)
        for i in range(l):
            ycol = _column_view(y_j, perms, i)
            ucol = _column_view(uhat, perms, i)
            members = []
            for b in range(sizes[j - 1]):
                cell = (v_book[i, b] * n_u + ucol) * n_y + ycol
                if _counts_typical(cell, n_v * n_u * n_y, lo.reshape(-1), hi.reshape(-1)):
                    members.append(b)
            tie_cols.append(int(len(members) > 1))
            if not members:
                pick = int(rng.integers(sizes[j - 1]))
            elif len(members) == 1:
                pick = members[0]
            else:
                pick = members[int(rng.integers(len(members)))]
            bhat[i] = pick
            errs.append(int(pick != int(b_true[i])))
        outer_err.append(tuple(errs))
        outer_ties.append(tuple(tie_cols))
        bhats.append(bhat)

    aborts = []
    attempted = []
    success = []
    sw_ties = []
    if spec.mode == "end_to_end":
        for j, truth in ((1, s1), (2, s2)):
            att, succ, tie, ab = _sw_search_ic(
                bundle, pmfs, rng, index, j, khats[j - 1][1], bhats[j - 1],
                sizes[j - 1], truth)
            attempted.append(att)
            success.append(succ)
            sw_ties.append(tie)
            aborts.extend(ab)
    else:
        attempted = [False, False]
        success = [False, False]
        sw_ties = [0, 0]

    outcome = TrialOutcome(
        mode="ic2",
        m=m,
        disagreement_count=disagreement,
        atypical_rows=atypical,
        inner_errors=tuple(inner),
        outer_errors=tuple(outer_err),
        outer_ties=tuple(outer_ties),
        sw_attempted=tuple(attempted),
        sw_success=tuple(success),
        sw_ties=tuple(sw_ties),
        end_to_end=bool(all(attempted) and all(success)),
        budget_aborts=tuple(aborts),
    )
    a1_alpha, a2_alpha = asn.receiver_alphabets()
    alphabets = {
        "s1": asn.source.alphabets[0], "s2": asn.source.alphabets[1],
        "k": bundle.k_alpha, "u": asn.p_u.alphabet,
        "v1": asn.p_v1.alphabet, "v2": asn.p_v2.alphabet,
        "x1": asn.x1_mapper.output, "x2": asn.x2_mapper.output,
        "y1": a1_alpha, "y2": a2_alpha,
    }
    block = MatrixBlock(
        s1=s1, s2=s2, k1=k1, k2=k2, u1=u1, u2=u2, v1=v1, v2=v2,
        x1=x1, x2=x2, alphabets=alphabets, y1=y1, y2=y2,
        khat1=khats[0][1], khat2=khats[1][1],
    )
    return outcome, block, perms


def run_mac_trial(spec: CodeEnsembleSpec, seed: int,
                  bundle: CodeBundle = None, pmfs: DecodingPmfs = None):
    """One complete one-receiver trial; returns (TrialOutcome, MatrixBlock)."""
    if not spec.is_mac:
        raise ValueError("spec holds a two-receiver assignment")
    if bundle is None:
        bundle = build_codes(spec)
    if pmfs is None:
        pmfs = build_decoding_pmfs(spec, bundle)
    outcome, block, _ = _mac_trial(bundle, pmfs, int(seed))
    return outcome, block


def run_ic_trial(spec: CodeEnsembleSpec, seed: int,
                 bundle: CodeBundle = None, pmfs: DecodingPmfs = None) -> TrialOutcome:
    """One complete two-receiver trial."""
    if spec.is_mac:
        raise ValueError("spec holds a one-receiver assignment")
    if bundle is None:
        bundle = build_codes(spec)
    if pmfs is None:
        pmfs = build_decoding_pmfs(spec, bundle)
    outcome, _, _ = _ic_trial(bundle, pmfs, int(seed))
    return outcome


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------


def wilson_interval(events: int, total: int, z: float = _Z95):
    """Wilson score interval for a binomial proportion."""
    if total < 0 or events < 0 or events > total:
        raise ValueError("need 0 <= events <= total")
    if total == 0:
        return 0.0, 1.0
    p = events / total
    denom = 1.0 + z * z / total
    center = (p + z * z / (2 * total)) / denom
    half = z * math.sqrt(p * (1 - p) / total + z * z / (4 * total * total)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def _stage(events: int, total: int) -> dict:
    lo, hi = wilson_interval(events, total)
    return {
        "events": int(events),
        "total": int(total),
        "rate": events / total if total else 0.0,
        "ci95": [lo, hi],
    }


def estimate_error(spec: CodeEnsembleSpec, n_trials: int, jobs: int = 1) -> dict:
    """Aggregated per-stage error rates over independent seeded trials.

    Identical (spec, n_trials) give identical reports at any jobs value:
    every trial derives its randomness from the trial index alone.
    """
    if n_trials < 1:
        raise ValueError("need at least one trial, got %r" % (n_trials,))
    if jobs < 1:
        raise ValueError("jobs must be positive")
    bundle = build_codes(spec)
    pmfs = build_decoding_pmfs(spec, bundle)
    runner = _mac_trial if spec.is_mac else _ic_trial

    def one(idx):
        return runner(bundle, pmfs, idx)[0]

    if jobs == 1:
        outcomes = [one(i) for i in range(n_trials)]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(one, range(n_trials)))

    m, l = spec.m, spec.params.l
    receivers = 1 if spec.is_mac else 2
    report = {
        "mode": outcomes[0].mode,
        "trials": n_trials,
        "m": m,
        "l": l,
        "delta_dec": bundle.delta_dec,
        "stages": {},
        "budget_aborts": sum(len(o.budget_aborts) for o in outcomes),
    }
    dis = sum(o.disagreement_count for o in outcomes)
    report["stages"]["disagreement"] = _stage(dis, n_trials * m)
    report["stages"]["atypical_rows"] = _stage(
        sum(o.atypical_rows for o in outcomes), n_trials * m)

    xi_l = block_disagreement(bundle.xi, l)
    tau = tau_bound(l, spec.params.delta, bundle.p_k)
    bound = min(1.0, float(xi_l.value) + float(tau.value))
    p_hat = dis / (n_trials * m)
    sigma = math.sqrt(p_hat * (1 - p_hat) / (n_trials * m))
    report["disagreement_bound"] = {
        "measured": p_hat,
        "bound": bound,
        "sigma": sigma,
        "within": p_hat <= bound + 3 * sigma,
    }

    for j in range(receivers):
        tag = "" if receivers == 1 else "_%d" % (j + 1)
        report["stages"]["inner" + tag] = _stage(
            sum(o.inner_errors[j] for o in outcomes), n_trials * m)
        report["stages"]["outer" + tag] = _stage(
            sum(sum(o.outer_errors[j]) for o in outcomes), n_trials * l)
        report["stages"]["outer_strict" + tag] = _stage(
            sum(sum(e or t for e, t in zip(o.outer_errors[j], o.outer_ties[j]))
                for o in outcomes),
            n_trials * l)
        report["stages"]["outer_block" + tag] = _stage(
            sum(1 for o in outcomes if any(o.outer_errors[j])), n_trials)
        attempted = sum(1 for o in outcomes if o.sw_attempted[j])
        report["stages"]["sw" + tag] = _stage(
            sum(1 for o in outcomes if o.sw_attempted[j] and not o.sw_success[j]),
            attempted)
        report["stages"]["sw_strict" + tag] = _stage(
            sum(1 for o in outcomes
                if o.sw_attempted[j] and (not o.sw_success[j] or o.sw_ties[j])),
            attempted)
    report["stages"]["end_to_end_success"] = _stage(
        sum(1 for o in outcomes if o.end_to_end), n_trials)
    return report


# ---------------------------------------------------------------------------
# empirical distribution verification
# ---------------------------------------------------------------------------


def _coarse_chi_square(counts: np.ndarray, expected: np.ndarray) -> dict:
    """Chi-square with greedy merging so every bin expects at least 5."""
    counts = np.asarray(counts, dtype=float).reshape(-1)
    expected = np.asarray(expected, dtype=float).reshape(-1)
    order = np.argsort(expected)[::-1]
    bins = []
    tail_obs = tail_exp = 0.0
    for idx in order:
        if expected[idx] >= 5.0:
            bins.append([counts[idx], expected[idx]])
        else:
            tail_obs += counts[idx]
            tail_exp += expected[idx]
    if tail_exp > 0:
        if tail_exp >= 5.0 or not bins:
            bins.append([tail_obs, tail_exp])
        else:
            bins[-1][0] += tail_obs
            bins[-1][1] += tail_exp
    if len(bins) < 2:
        return {"stat": 0.0, "dof": 0, "p_value": 1.0, "bins": len(bins)}
    stat = sum((o - e) ** 2 / e for o, e in bins)
    dof = len(bins) - 1
    return {
        "stat": float(stat),
        "dof": dof,
        "p_value": float(_chi2_dist.sf(stat, dof)),
        "bins": len(bins),
    }


def _tv_from_counts(counts: np.ndarray, probs: np.ndarray) -> float:
    n = counts.sum()
    emp = counts / n
    return 0.5 * float(np.abs(emp - probs.reshape(-1)).sum())


def verify_row_iid(spec: CodeEnsembleSpec, trials: int) -> dict:
    """Pooled empirical row statistics against the exact laws.

    Runs the given number of one-receiver trials with one fixed bundle and
    compares (i) whole rows against the row pmf, (ii) interleaved column
    letters against the mixture, (iii) source and reconstruction rows
    against the super-letter law.  Reports total variation and coarsened
    chi-square statistics for each.
    """
    if not spec.is_mac:
        raise ValueError("row verification runs on the one-receiver variant")
    if trials < 1:
        raise ValueError("need at least one trial")
    bundle = build_codes(spec)
    pmfs = build_decoding_pmfs(spec, bundle)
    if pmfs.row_pmf is None:
        raise ValueError("the row pmf exceeds the enumeration budget here")
    m, l = spec.m, spec.params.l
    asn = spec.assignment

    row_shape = pmfs.row_pmf.probs.shape
    row_counts = np.zeros(int(np.prod(row_shape)))
    q3 = pmfs.interleaved_pmf.marginal(("v1", "v2", "y")).probs
    col_counts = np.zeros(q3.size)
    sw_shape = pmfs.sw_pmf.probs.shape
    sw_counts = np.zeros(int(np.prod(sw_shape)))

    sizes = [len(a) for a in
             (asn.p_u.alphabet, asn.p_u.alphabet, asn.p_v1.alphabet,
              asn.p_v2.alphabet, asn.x1_mapper.output, asn.x2_mapper.output,
              asn.channel.output)]
    n_v2 = sizes[3]
    n_y = sizes[6]
    n_s1 = len(asn.source.alphabets[0])
    n_s2 = len(asn.source.alphabets[1])
    n_k = len(bundle.k_alpha)

    for t_idx in range(trials):
        outcome, block, perms = _mac_trial(bundle, pmfs, t_idx)
        mats = (block.u1, block.u2, block.v1, block.v2, block.x1, block.x2, block.y)
        ids = np.zeros(m, dtype=np.int64)
        for mat, size in zip(mats, sizes):
            ids = ids * (size ** l) + _row_indices(mat, size)
        np.add.at(row_counts, ids, 1)

        for i in range(l):
            cell = (_column_view(block.v1, perms, i) * n_v2
                    + _column_view(block.v2, perms, i)) * n_y \
                + _column_view(block.y, perms, i)
            np.add.at(col_counts, cell, 1)

        sw_ids = (_row_indices(block.s1, n_s1) * (n_s2 ** l)
                  + _row_indices(block.s2, n_s2)) * (n_k ** l) \
            + _row_indices(block.khat, n_k)
        np.add.at(sw_counts, sw_ids, 1)

    row_probs = pmfs.row_pmf.probs.reshape(-1)
    sw_probs = pmfs.sw_pmf.probs.reshape(-1)
    n_rows = trials * m
    n_cols = trials * m * l
    return {
        "trials": trials,
        "pooled_rows": n_rows,
        "pooled_letters": n_cols,
        "row": {
            "tv": _tv_from_counts(row_counts, row_probs),
            "chi2": _coarse_chi_square(row_counts, n_rows * row_probs),
        },
        "interleaved": {
            "tv": _tv_from_counts(col_counts, q3),
            "chi2": _coarse_chi_square(col_counts, n_cols * q3.reshape(-1)),
        },
        "sw": {
            "tv": _tv_from_counts(sw_counts, sw_probs),
            "chi2": _coarse_chi_square(sw_counts, n_rows * sw_probs),
        },
    }


# ---------------------------------------------------------------------------
# exact enumeration checks of the distributional identities
# ---------------------------------------------------------------------------


def _letters_of(row_pmf: Pmf):
    symbols = row_pmf.alphabet.symbols
    l = len(symbols[0])
    if any(len(s) != l for s in symbols):
        raise ValueError("row pmf symbols must be equal-length tuples")
    letters = sorted({c for s in symbols for c in s}, key=repr)
    return letters, l


def _check(name, err, tol=1e-12):
    return {"name": name, "max_error": float(err), "passed": bool(err <= tol)}


def verify_interleaving_lemmas(row_pmf: Pmf, m: int, delta: float = 0.3) -> list:
    """Exhaustive checks of the interleaving identities on a micro instance.

    row_pmf is a pmf over equal-length letter tuples (the row law); the
    instance must satisfy l <= 3, m <= 3, letters <= 3 so that full
    enumeration over matrices, index vectors and permutation tuples is
    exact.  Returns one pass/fail record per identity.
    """
    letters, l = _letters_of(row_pmf)
    n = len(letters)
    if l > 3 or m > 3 or n > 3:
        raise ValueError("micro instance only: need l <= 3, m <= 3, letters <= 3")
    if m < 1:
        raise ValueError("m must be positive")
    lidx = {c: i for i, c in enumerate(letters)}
    supp = [(tuple(lidx[c] for c in s), p)
            for s, p in zip(row_pmf.alphabet.symbols, row_pmf.probs) if p > 0]

    # single-letter mixture of coordinate marginals
    mix = np.zeros(n)
    for seq, p in supp:
        for c in seq:
            mix[c] += p / l
    prod_law = np.ones(())
    for _ in range(m):
        prod_law = np.multiply.outer(prod_law, mix)

    results = []

    # uniform random coordinate per row: full event-level enumeration
    law_a = np.zeros((n,) * m)
    for rows in itertools.product(supp, repeat=m):
        pr = 1.0
        for _, p in rows:
            pr *= p
        for idxs in itertools.product(range(l), repeat=m):
            law_a[tuple(rows[t][0][idxs[t]] for t in range(m))] += pr / l ** m
    results.append(_check("uniform-coordinate-mixture",
                          np.abs(law_a - prod_law).max()))

    # uniform random permutation per row, one interleaved column per i
    perms = list(itertools.permutations(range(l)))
    per_row = np.zeros((len(supp), l, n))
    for r, (seq, _) in enumerate(supp):
        for pi in perms:
            for i in range(l):
                per_row[r, i, seq[pi[i]]] += 1.0 / len(perms)
    worst_b = 0.0
    law_prev = None
    for i in range(l):
        law_b = np.zeros((n,) * m)
        for rows in itertools.product(range(len(supp)), repeat=m):
            pr = 1.0
            for r in rows:
                pr *= supp[r][1]
            contrib = np.ones(())
            for r in rows:
                contrib = np.multiply.outer(contrib, per_row[r, i])
            law_b += pr * contrib
        worst_b = max(worst_b, float(np.abs(law_b - prod_law).max()))
        if law_prev is not None:
            worst_b = max(worst_b, float(np.abs(law_b - law_prev).max()))
        law_prev = law_b
    results.append(_check("interleaved-column-mixture", worst_b))

    # constant-composition code: a uniformly chosen coordinate has the type
    cc_type = np.array([0.5, 0.5])
    words = [(0, 1), (1, 0)]
    worst_c = 0.0
    for msg_probs in ([1.0, 0.0], [0.25, 0.75], [0.5, 0.5]):
        law_c = np.zeros(2)
        for word, q in zip(words, msg_probs):
            for c in word:
                law_c[c] += q / 2.0
        worst_c = max(worst_c, float(np.abs(law_c - cc_type).max()))
    results.append(_check("composition-coordinate-type", worst_c))

    # atypicality mass of the interleaved column equals the mixture mass
    lo, hi = _windows(mix, m, delta)
    atypical = {}
    for seq in itertools.product(range(n), repeat=m):
        counts = np.bincount(seq, minlength=n)
        atypical[seq] = not bool(np.all((counts >= lo) & (counts <= hi)))
    lhs = 0.0
    for rows in itertools.product(supp, repeat=m):
        pr = 1.0
        for _, p in rows:
            pr *= p
        for idxs in itertools.product(range(l), repeat=m):
            col = tuple(rows[t][0][idxs[t]] for t in range(m))
            if atypical[col]:
                lhs += pr / l ** m
    rhs = 0.0
    for seq, flag in atypical.items():
        if flag:
            q = 1.0
            for c in seq:
                q *= mix[c]
            rhs += q
    # the permutation variant must assign the same mass, via its exact law
    lhs_perm = 0.0
    for seq, flag in atypical.items():
        if flag:
            lhs_perm += law_prev[seq]
    err_g = max(abs(lhs - rhs), abs(lhs_perm - rhs))
    results.append(_check("interleaved-atypicality-identity", err_g))
    return results


def _uniform_coordinate_instance(words, msg_law, p_b1, p_b2, p_c, tol=1e-12):
    """Exact check: conditioned on equal label rows, a uniform coordinate
    of the chained l-letter law has the single-letter product law."""
    l = len(words[0])
    n_a = p_b1.shape[0]
    n_b1 = p_b1.shape[1]
    n_b2 = p_b2.shape[1]
    n_c = p_c.shape[2]

    # type of the codewords, shared by every word by construction
    type_counts = np.bincount(np.array(words[0]), minlength=n_a)
    p_a = type_counts / l

    joint = np.zeros((n_a, n_b1, n_b2, n_c))
    norm = 0.0
    for (m1, m2), q in np.ndenumerate(msg_law):
        if q == 0 or tuple(words[m1]) != tuple(words[m2]):
            continue
        norm += q
    if norm == 0:
        raise ValueError("the equal-rows event has zero mass")
    for (m1, m2), q in np.ndenumerate(msg_law):
        if q == 0 or tuple(words[m1]) != tuple(words[m2]):
            continue
        word = words[m1]
        for b1 in itertools.product(range(n_b1), repeat=l):
            pr_b1 = np.prod([p_b1[word[i], b1[i]] for i in range(l)])
            if pr_b1 == 0:
                continue
            for b2 in itertools.product(range(n_b2), repeat=l):
                pr_b2 = np.prod([p_b2[word[i], b2[i]] for i in range(l)])
                if pr_b2 == 0:
                    continue
                for c in itertools.product(range(n_c), repeat=l):
                    pr_c = np.prod([p_c[b1[i], b2[i], c[i]] for i in range(l)])
                    if pr_c == 0:
                        continue
                    w = (q / norm) * pr_b1 * pr_b2 * pr_c
                    for i in range(l):
                        joint[word[i], b1[i], b2[i], c[i]] += w / l
    ref = np.einsum("a,ab,ac,bcd->abcd", p_a, p_b1, p_b2, p_c)
    return float(np.abs(joint - ref).max())


def verify_decoding_pmf_lemmas(spec: CodeEnsembleSpec = None) -> list:
    """Exact identities of the row and mixture pmfs on a micro instance."""
    if spec is None:
        spec = binary_toy_mac_spec()
    if not spec.is_mac:
        raise ValueError("the identities are checked on the one-receiver variant")
    bundle = build_codes(spec)
    pmfs = build_decoding_pmfs(spec, bundle)
    asn = spec.assignment
    l = spec.params.l
    results = []

    # outer-letter marginal is the iid product
    pv = pmfs.row_pmf.marginal(("v1", "v2")).probs
    ref = np.multiply.outer(_power_probs(asn.p_v1.probs, l),
                            _power_probs(asn.p_v2.probs, l))
    results.append(_check("outer-marginal-product", np.abs(pv - ref).max()))

    # random coordinate law equals the directly built mixture
    sizes = [len(a) for a in pmfs.interleaved_pmf.alphabets]
    mix = _coordinate_mixture(pmfs.row_pmf, l, sizes)
    results.append(_check("coordinate-mixture-identity",
                          np.abs(mix - pmfs.interleaved_pmf.probs).max()))

    # mixture marginals of the outer letters are the single-letter laws
    for name, p in (("v1", asn.p_v1), ("v2", asn.p_v2)):
        got = pmfs.interleaved_pmf.marginal((name,)).probs
        results.append(_check("mixture-marginal-%s" % name,
                              np.abs(got - p.probs).max()))

    # conditional on equal inner rows, outputs factor into single letters
    paa = _message_pair_law(bundle)
    n_u = len(asn.p_u.alphabet)
    n_y = len(asn.channel.output)
    dig_y = _digit_table(n_y, l)
    pyu = np.einsum("aab->ab", bundle.pyuu[0])
    puu_y = pmfs.row_pmf.marginal(("u1", "u2", "y")).probs
    worst = 0.0
    for a in range(bundle.m_u):
        word = bundle.cu[a]
        u_idx = _tuple_index(word, n_u)
        mass = puu_y[u_idx, u_idx].sum()
        if mass <= 0:
            continue
        got = puu_y[u_idx, u_idx] / mass
        refl = np.ones(n_y ** l)
        for i in range(l):
            refl *= pyu[word[i]][dig_y[:, i]]
        worst = max(worst, float(np.abs(got - refl).max()))
    results.append(_check("equal-rows-output-product", worst))

    # label-pair marginal of the row pmf matches the message law
    pu_pair = pmfs.row_pmf.marginal(("u1", "u2")).probs
    ref_pair = np.zeros_like(pu_pair)
    for a1 in range(bundle.m_u):
        i1 = _tuple_index(bundle.cu[a1], n_u)
        for a2 in range(bundle.m_u):
            ref_pair[i1, _tuple_index(bundle.cu[a2], n_u)] += paa[a1, a2]
    results.append(_check("label-pair-marginal", np.abs(pu_pair - ref_pair).max()))

    # uniform-coordinate identity on standalone micro instances
    words = [(0, 1), (1, 0)]
    p_b1 = np.array([[0.7, 0.3], [0.2, 0.8]])
    p_b2 = np.array([[0.6, 0.4], [0.5, 0.5]])
    p_c = np.zeros((2, 2, 3))
    p_c[:, :, 0] = [[0.5, 0.1], [0.3, 0.2]]
    p_c[:, :, 1] = [[0.25, 0.6], [0.4, 0.5]]
    p_c[:, :, 2] = 1.0 - p_c[:, :, 0] - p_c[:, :, 1]
    single = np.zeros((1, 1))
    single[0, 0] = 1.0
    err_single = _uniform_coordinate_instance([words[0]], single, p_b1, p_b2, p_c)
    results.append(_check("uniform-coordinate-singleton", err_single))
    msg_law = np.array([[0.3, 0.15], [0.05, 0.5]])
    err_pair = _uniform_coordinate_instance(words, msg_law, p_b1, p_b2, p_c)
    results.append(_check("uniform-coordinate-two-words", err_pair))
    return results


# ---------------------------------------------------------------------------
# ready-made micro configurations
# ---------------------------------------------------------------------------


def binary_toy_mac_spec(m: int = 16, seed: int = 1729,
                        mode: str = "component") -> CodeEnsembleSpec:
    """All-binary one-receiver configuration with l = 2.

    Identical uniform sources (the label equals the source), uniform
    inner letters, biased outer letters, modulo-add mappers and the
    noiseless pair-revealing channel.
    """
    b = Alphabet.range(2)
    src = JointPmf(("s1", "s2"), (b, b), np.eye(2) * 0.5)
    pair = product_alphabet(b, b)
    xor = Channel.deterministic(pair, b, lambda s: (s[0] + s[1]) % 2)
    chan = Channel.deterministic(product_alphabet(b, b), pair, lambda x: x)
    asn = MacAssignment(
        source=src, p_u=Pmf.uniform(b), p_v1=Pmf(b, [0.8, 0.2]),
        p_v2=Pmf(b, [0.8, 0.2]), x1_mapper=xor, x2_mapper=xor, channel=chan,
    )
    params = SchemeParams(alpha=0.1, beta=0.0, rho=0.1, delta=0.5, l=2)
    return CodeEnsembleSpec(asn, params, m, (math.log(2.0), math.log(2.0)),
                            seed, mode, delta_dec=3.0)


def toy_ic_spec(m: int = 32, seed: int = 1729,
                mode: str = "end_to_end") -> CodeEnsembleSpec:
    """Two-receiver configuration where each output reveals its own input.

    Identical uniform binary sources at l = 4; each input carries its
    (inner, outer) letter pair and each receiver observes its own input
    exactly, so every decoding stage is exercised without channel noise.
    """
    b = Alphabet.range(2)
    four = Alphabet.range(4)
    src = JointPmf(("s1", "s2"), (b, b), np.eye(2) * 0.5)
    x_alpha = product_alphabet(four, b)
    ident = Channel.deterministic(product_alphabet(four, b), x_alpha, lambda s: s)
    x_pair = product_alphabet(x_alpha, x_alpha)
    chan = Channel.deterministic(x_pair, x_pair, lambda x: x)
    asn = IcAssignment(
        source=src, p_u=Pmf.uniform(four), p_v1=Pmf.uniform(b),
        p_v2=Pmf.uniform(b), x1_mapper=ident, x2_mapper=ident, channel=chan,
    )
    params = SchemeParams(alpha=0.1, beta=0.0, rho=0.1, delta=1.0, l=4)
    return CodeEnsembleSpec(asn, params, m, (math.log(16.0), math.log(16.0)),
                            seed, mode, delta_dec=3.0)


def gkw_toy_mac_spec(m: int = 64, seed: int = 1729,
                     mode: str = "end_to_end") -> CodeEnsembleSpec:
    """Noiseless configuration whose label is the whole (shared) source.

    Identical uniform binary sources at l = 4; the inner alphabet has four
    letters so the sixteen typical rows fit into distinct compositions;
    the first input carries (inner letter, outer letter), the second only
    its outer letter, and the channel reveals both inputs.
    """
    b = Alphabet.range(2)
    four = Alphabet.range(4)
    src = JointPmf(("s1", "s2"), (b, b), np.eye(2) * 0.5)
    x1_alpha = product_alphabet(four, b)
    x1 = Channel.deterministic(product_alphabet(four, b), x1_alpha, lambda s: s)
    x2 = Channel.deterministic(product_alphabet(four, b), b, lambda s: s[1])
    y_alpha = product_alphabet(x1_alpha, b)
    chan = Channel.deterministic(product_alphabet(x1_alpha, b), y_alpha, lambda x: x)
    asn = MacAssignment(
        source=src, p_u=Pmf.uniform(four), p_v1=Pmf.uniform(b),
        p_v2=Pmf.uniform(b), x1_mapper=x1, x2_mapper=x2, channel=chan,
    )
    params = SchemeParams(alpha=0.1, beta=0.0, rho=0.1, delta=1.0, l=4)
    return CodeEnsembleSpec(asn, params, m, (math.log(16.0), math.log(16.0)),
                            seed, mode, delta_dec=3.0)


# ---------------------------------------------------------------------------
# point-to-point exponent slope
# ---------------------------------------------------------------------------


def simulate_ptp_curve(channel: Channel, rate: float, ls=(8, 16, 32),
                       trials: int = 20000, seed: int = 1729,
                       rho: float = 0.05, jobs: int = 1) -> dict:
    """Measured block error of the random composition ensemble versus l.

    For every block length the codebook holds ceil(exp(l * rate)) words
    drawn independently and uniformly from the composition class of the
    uniform input type; decoding is maximum likelihood with seeded random
    tie breaks.  The log-error slope is compared against the exponent at
    rate + rho.
    """
    if rate <= 0:
        raise ValueError("rate must be positive")
    if trials < 1:
        raise ValueError("need at least one trial")
    n_in = len(channel.input)
    logw = _log_table(channel.probs)
    points = []
    for l in ls:
        if l % n_in:
            raise ValueError("uniform type needs the input size to divide l")
        m_words = int(math.ceil(math.exp(l * rate) - 1e-9))
        base = np.repeat(np.arange(n_in), l // n_in)
        rng = np.random.default_rng(
            np.random.SeedSequence([_mask_seed(seed), 3, l])
        )
        errors = 0
        chunk = max(1, min(trials, (1 << 22) // max(1, m_words * l)))
        done = 0
        while done < trials:
            size = min(chunk, trials - done)
            books = rng.permuted(
                np.broadcast_to(base, (size * m_words, l)).copy(), axis=1
            ).reshape(size, m_words, l)
            sent = books[:, 0, :]
            u = rng.random((size, l, 1))
            y = (u > np.cumsum(channel.probs, axis=1)[sent][:, :, :-1]).sum(axis=2)
            scores = np.take_along_axis(
                logw[books], y[:, None, :, None], axis=3
            )[..., 0].sum(axis=2)
            scores = scores + rng.random(scores.shape) * 1e-9
            errors += int((np.argmax(scores, axis=1) != 0).sum())
            done += size
        lo, hi = wilson_interval(errors, trials)
        points.append({
            "l": int(l),
            "codewords": m_words,
            "errors": errors,
            "rate": errors / trials,
            "ci95": [lo, hi],
        })
    ref = error_exponent(rate + rho, Pmf.uniform(channel.input), channel)
    xs = np.array([p["l"] for p in points], dtype=float)
    ys = np.array([math.log(max(p["errors"], 0.5) / trials) for p in points])
    slope = float(np.polyfit(xs, ys, 1)[0])
    measured = -slope
    return {
        "channel_inputs": n_in,
        "rate": rate,
        "trials": trials,
        "points": points,
        "measured_exponent": measured,
        "reference_exponent": ref.value,
        "exponent_ratio": measured / ref.value if ref.value > 0 else math.inf,
        "decreasing": all(points[i]["errors"] > points[i + 1]["errors"]
                          for i in range(len(points) - 1)),
    }
