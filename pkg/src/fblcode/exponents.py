"""Random-coding exponents and finite-block failure bound functionals.

The exponent of interest is, for input pmf p and channel W,

    E(R) = min over test channels V of  D(V || W | p) + max(0, I(p;V) - R)

computed two independent ways: a primal grid search with convex polish, and
a dual ascent over the tilt parameter s in [0,1] where each inner problem
min_V [D(V||W|p) + s I(p;V)] is solved by an alternating fixed point on
tilted channels.  The remaining functions are closed-form bound pieces
(codeword-count threshold, type-concentration tail, per-block disagreement,
binning excess rate) evaluated in the log domain so that astronomically
small or large block lengths stay exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Channel, Pmf
from .info import binary_entropy
from .logreal import LogReal

__all__ = [
    "ExponentResult",
    "block_disagreement",
    "cc_error_bound",
    "cc_error_bound_scalar",
    "channel_mutual_information",
    "error_exponent",
    "error_exponent_primal",
    "excess_rate",
    "l_star",
    "tau_bound",
    "tau_bound_scalar",
]

_PRIMAL_CELL_CAP = 9


def channel_mutual_information(p: Pmf, w: Channel) -> float:
    """I(p ; W) in nats."""
    if p.alphabet != w.input:
        raise ValueError("input pmf alphabet does not match the channel")
    pvec = p.probs
    q = pvec @ w.probs
    total = 0.0
    for i, pu in enumerate(pvec):
        if pu == 0:
            continue
        row = w.probs[i]
        nz = row > 0
        total += pu * float(np.sum(row[nz] * (np.log(row[nz]) - np.log(q[nz]))))
    return max(0.0, total)


@dataclass(frozen=True)
class ExponentResult:
    value: float
    minimizer: Channel
    dual_s: float | None
    method: str
    converged: bool

    def to_json(self):
        return {
            "value": self.value,
            "dual_s": self.dual_s,
            "method": self.method,
            "converged": self.converged,
            "minimizer": self.minimizer.to_json(),
        }


def _validate_exponent_args(rate, p, w):
    if rate < 0:
        raise ValueError("rate must be nonnegative, got %r" % (rate,))
    if p.alphabet != w.input:
        raise ValueError("input pmf alphabet does not match the channel")


def _fill_minimizer(w: Channel, active, v_active) -> Channel:
    rows = np.array(w.probs, copy=True)
    for r, u in enumerate(active):
        rows[u] = v_active[r]
    return Channel(w.input, w.output, rows)


def _primal_objective(v, w_active, pvec, rate):
    """Vectorized D + |I - R|^+ over a leading batch axis of v."""
    safe_v = np.where(v > 0, v, 1.0)
    safe_w = np.where(w_active > 0, w_active, 1.0)
    d_cells = np.where(v > 0, v * (np.log(safe_v) - np.log(safe_w)), 0.0)
    d = np.einsum("...my,m->...", d_cells, pvec)
    q = np.einsum("...my,m->...y", v, pvec)
    logq = np.log(np.where(q > 0, q, 1.0))
    i_cells = np.where(v > 0, v * (np.log(safe_v) - logq[..., None, :]), 0.0)
    i = np.einsum("...my,m->...", i_cells, pvec)
    return d + np.maximum(0.0, i - rate), d, i


def _row_candidates(support_size, full_size, support_idx):
    """Grid of pmf rows on the given support, embedded in the full row."""
    if support_size == 1:
        n_points = 1
    elif support_size == 2:
        n_points = 24
    elif support_size == 3:
        n_points = 8
    else:
        n_points = 4
    rows = []
    if support_size == 1:
        comps = [(n_points,)]
    else:
        comps = _compositions(n_points, support_size)
    for c in comps:
        row = np.zeros(full_size)
        for idx, count in zip(support_idx, c):
            row[idx] = count / n_points
        rows.append(row)
    return np.array(rows)


def _compositions(total, parts):
    if parts == 1:
        return [(total,)]
    out = []
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            out.append((first,) + rest)
    return out


def error_exponent_primal(rate, p: Pmf, w: Channel) -> ExponentResult:
    """Grid search over test channels plus convex polish.

    Only intended for small alphabets; the product of input and output
    sizes must not exceed 9.
    """
    from scipy.optimize import minimize

    _validate_exponent_args(rate, p, w)
    if len(w.input) * len(w.output) > _PRIMAL_CELL_CAP:
        raise ValueError(
            "primal solver is limited to |input|*|output| <= %d" % _PRIMAL_CELL_CAP
        )
    if channel_mutual_information(p, w) <= rate + 1e-15:
        return ExponentResult(0.0, w, None, "primal-grid", True)

    active = [i for i in range(len(p.probs)) if p.probs[i] > 0]
    pvec = p.probs[active]
    w_active = w.probs[active]
    ny = len(w.output)
    supports = [np.flatnonzero(w_active[r] > 0) for r in range(len(active))]

    cand = [_row_candidates(len(s), ny, s) for s in supports]
    grids = np.meshgrid(*[np.arange(len(c)) for c in cand], indexing="ij")
    flat = [g.ravel() for g in grids]
    n_combo = flat[0].size
    v_all = np.empty((n_combo, len(active), ny))
    for r in range(len(active)):
        v_all[:, r, :] = cand[r][flat[r]]
    obj, _, _ = _primal_objective(v_all, w_active, pvec, rate)

    order = np.argsort(obj)
    seeds = [v_all[i] for i in order[:8]]
    seeds.append(np.array(w_active, copy=True))
    best_val = float(obj[order[0]])
    best_v = v_all[order[0]]

    # convex polish in epigraph form: minimize D(V) + t with t >= I(V) - R
    var_slices = []
    offset = 0
    for s in supports:
        var_slices.append((offset, offset + len(s)))
        offset += len(s)
    t_index = offset

    def unpack(x):
        v = np.zeros((len(active), ny))
        for r, (a, b) in enumerate(var_slices):
            v[r, supports[r]] = np.clip(x[a:b], 0.0, None)
        return v

    def objective(x):
        v = unpack(x)
        _, d, _ = _primal_objective(v, w_active, pvec, rate)
        return float(d) + x[t_index]

    def mi_constraint(x):
        v = unpack(x)
        _, _, i = _primal_objective(v, w_active, pvec, rate)
        return x[t_index] - (float(i) - rate)

    constraints = [{"type": "ineq", "fun": mi_constraint}]
    for r, (a, b) in enumerate(var_slices):
        constraints.append(
            {"type": "eq", "fun": (lambda x, a=a, b=b: float(np.sum(x[a:b]) - 1.0))}
        )
    bounds = [(0.0, 1.0)] * t_index + [(0.0, None)]

    for seed in seeds:
        x0 = np.empty(t_index + 1)
        for r, (a, b) in enumerate(var_slices):
            row = seed[r, supports[r]]
            x0[a:b] = row / row.sum()
        _, _, i0 = _primal_objective(unpack(x0), w_active, pvec, rate)
        x0[t_index] = max(0.0, float(i0) - rate)
        try:
            res = minimize(
                objective,
                x0,
                method="SLSQP",
                bounds=bounds,
                constraints=constraints,
                options={"maxiter": 200, "ftol": 1e-12},
            )
        except (ValueError, FloatingPointError):
            continue
        v = unpack(res.x)
        sums = v.sum(axis=1, keepdims=True)
        if np.any(sums <= 0):
            continue
        v = v / sums
        val, _, _ = _primal_objective(v, w_active, pvec, rate)
        if float(val) < best_val:
            best_val = float(val)
            best_v = v

    best_val = max(0.0, best_val)
    return ExponentResult(
        best_val, _fill_minimizer(w, active, best_v), None, "primal-grid", True
    )


def _min_tilted(s, pvec, w_active, q0, tol=1e-10, max_iter=10 ** 4):
    """min_V D(V||W|p) + s I(p;V) by alternating tilted updates."""
    if s == 0.0:
        q = pvec @ w_active
        return 0.0, np.array(w_active, copy=True), q, True
    e = 1.0 / (1.0 + s)
    q = q0
    converged = False
    v = None
    for _ in range(max_iter):
        m = (w_active ** e) * (q ** (s * e))[None, :]
        z = m.sum(axis=1)
        v = m / z[:, None]
        q_next = pvec @ v
        if float(np.max(np.abs(q_next - q))) < tol:
            q = q_next
            converged = True
            break
        q = q_next
    m = (w_active ** e) * (q ** (s * e))[None, :]
    z = m.sum(axis=1)
    v = m / z[:, None]
    value = -(1.0 + s) * float(pvec @ np.log(z))
    return max(0.0, value), v, q, converged


def error_exponent(rate, p: Pmf, w: Channel) -> ExponentResult:
    """Dual evaluation: maximize min_V[D + s I] - s R over s in [0,1]."""
    _validate_exponent_args(rate, p, w)
    if channel_mutual_information(p, w) <= rate + 1e-15:
        return ExponentResult(0.0, w, 0.0, "dual-fixed-point", True)

    active = [i for i in range(len(p.probs)) if p.probs[i] > 0]
    pvec = p.probs[active]
    w_active = w.probs[active]
    state = {"q": pvec @ w_active, "ok": True}
    cache = {}

    def g(s):
        if s not in cache:
            value, v, q, converged = _min_tilted(s, pvec, w_active, state["q"])
            state["q"] = q
            state["ok"] = state["ok"] and converged
            cache[s] = (value - s * rate, v)
        return cache[s][0]

    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = 0.0, 1.0
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    gc, gd = g(c), g(d)
    for _ in range(80):
        if b - a < 1e-12:
            break
        if gc > gd:
            b, d, gd = d, c, gc
            c = b - inv_phi * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + inv_phi * (b - a)
            gd = g(d)
    s_mid = (a + b) / 2.0
    candidates = [s_mid, 0.0, 1.0]
    best_s = max(candidates, key=g)
    value = max(0.0, g(best_s))
    v_best = cache[best_s][1]
    return ExponentResult(
        value,
        _fill_minimizer(w, active, v_best),
        best_s,
        "dual-fixed-point",
        state["ok"],
    )


# ---------------------------------------------------------------------------
# closed-form bound pieces, log-domain safe for huge block lengths
# ---------------------------------------------------------------------------


def _big_times_float(l, x: float) -> float:
    """l * x for a possibly huge positive integer l and float x >= 0."""
    if x == 0.0:
        return 0.0
    try:
        prod = float(l) * x
    except OverflowError:
        return math.inf
    return prod


def _float_over_big(x: float, l) -> float:
    """x / l, underflowing to 0.0 when l exceeds the float range."""
    try:
        return x / l
    except OverflowError:
        return 0.0


def l_star(rho: float, card_u, card_y) -> int:
    """Smallest l with l*rho >= log(4) + 4*A*(1+B)*log(l+1)."""
    if rho <= 0:
        raise ValueError("rho must be positive, got %r" % (rho,))
    if card_u < 1 or card_y < 1:
        raise ValueError("alphabet sizes must be at least 1")
    c = 4.0 * float(card_u) * (1.0 + float(card_y))

    def ok(l):
        return _big_times_float(l, rho) >= math.log(4.0) + c * math.log(l + 1)

    if ok(1):
        return 1
    lo = 1
    hi = max(2, int(c / rho) + 2)
    while not ok(hi):
        lo = hi
        hi *= 2
        if hi > 10 ** 400:
            raise ValueError("no admissible block length found")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def cc_error_bound_scalar(l, card_u, card_y, exponent_value: float) -> LogReal:
    """(l+1)^(2*A*B) * exp(-l * E) as a LogReal."""
    if l < 1:
        raise ValueError("block length must be positive")
    if exponent_value < 0:
        raise ValueError("exponent must be nonnegative")
    poly = 2.0 * float(card_u) * float(card_y) * math.log(l + 1)
    decay = _big_times_float(l, exponent_value)
    if math.isinf(decay):
        return LogReal.zero()
    return LogReal(poly - decay)


def cc_error_bound(rate, l, p: Pmf, w: Channel) -> LogReal:
    """Ensemble-average block error bound of the inner code at rate `rate`."""
    res = error_exponent(rate, p, w)
    if not res.converged:
        raise ArithmeticError("exponent solver did not converge")
    return cc_error_bound_scalar(l, len(w.input), len(w.output), res.value)


def tau_bound_scalar(l, delta: float, card_k: int, log_p_star: float) -> LogReal:
    """2*|K| * exp(-2 * delta^2 * p*^2 * l) as a LogReal."""
    if l < 1:
        raise ValueError("block length must be positive")
    if delta <= 0:
        raise ValueError("delta must be positive")
    if card_k < 1:
        raise ValueError("alphabet size must be at least 1")
    if log_p_star > 1e-12:
        raise ValueError("log of a probability must be nonpositive")
    # t = log(2 delta^2 p*^2 l); the tail is 2|K| exp(-exp(t))
    t = math.log(2.0) + 2.0 * math.log(delta) + 2.0 * log_p_star + math.log(l)
    if t >= 709.0:
        return LogReal.zero()
    decay = math.exp(t)
    # card_k may exceed float range; log the factors separately
    return LogReal(math.log(2.0) + math.log(card_k) - decay)


def tau_bound(l, delta: float, p_k: Pmf) -> LogReal:
    """Concentration tail for the per-row typicality of the common part."""
    support = p_k.probs[p_k.probs > 0]
    if support.size == 0:
        raise ValueError("pmf has empty support")
    p_star = float(support.min())
    return tau_bound_scalar(l, delta, len(p_k.alphabet), math.log(p_star))


def block_disagreement(xi, l) -> LogReal:
    """1 - (1 - xi)^l for per-symbol disagreement probability xi."""
    if l < 1:
        raise ValueError("block length must be positive")
    if isinstance(xi, LogReal):
        log_xi = xi.log
    else:
        if xi < 0 or xi > 1:
            raise ValueError("xi must lie in [0, 1], got %r" % (xi,))
        if xi == 0:
            return LogReal.zero()
        log_xi = math.log(xi)
    if log_xi > 0:
        raise ValueError("xi must lie in [0, 1]")
    if log_xi == 0.0:
        return LogReal.one()
    if l == 1:
        return LogReal(log_xi)
    # w = -l*log(1-xi) = l*xi*c with c = -log1p(-xi)/xi >= 1
    if log_xi > -30.0:
        xi_f = math.exp(log_xi)
        log_c = math.log(-math.log1p(-xi_f) / xi_f)
    else:
        log_c = 0.0
    log_w = log_xi + math.log(l) + log_c
    if log_w >= 50.0:
        return LogReal.one()
    if log_w <= -50.0:
        # 1 - e^(-w) = w - w^2/2 + ...
        return LogReal(log_w + math.log1p(-math.exp(log_w) / 2.0))
    return LogReal(math.log(-math.expm1(-math.exp(log_w))))


def excess_rate(mu, card, l=1) -> float:
    """(1/l) h(mu) + mu * log(card); mu may be a LogReal far below float range."""
    if l < 1:
        raise ValueError("block length must be positive")
    if card < 1:
        raise ValueError("cardinality must be at least 1")
    log_card = math.log(card)
    if isinstance(mu, LogReal):
        if mu.log > 1e-12:
            raise ValueError("mu must lie in [0, 1], got log %r" % (mu.log,))
        if mu.is_zero:
            return 0.0
        if mu.log <= -18.0:
            # h(mu) = mu*(1 - log mu) + O(mu^2), exact to double precision here
            log_hb = mu.log + math.log1p(-mu.log)
            hb = math.exp(log_hb) if log_hb > -745.0 else 0.0
            if log_card > 0:
                log_t2 = mu.log + math.log(log_card)
                term2 = math.exp(log_t2) if log_t2 > -745.0 else 0.0
            else:
                term2 = 0.0
            return _float_over_big(hb, l) + term2
        mu = mu.value
    if mu < 0 or mu > 1:
        raise ValueError("mu must lie in [0, 1], got %r" % (mu,))
    return _float_over_big(binary_entropy(mu), l) + mu * log_card
