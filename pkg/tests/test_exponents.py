import math

import numpy as np
import pytest

from fblcode.core import Alphabet, Channel, JointPmf, Pmf
from fblcode.exponents import (
    block_disagreement,
    cc_error_bound,
    cc_error_bound_scalar,
    channel_mutual_information,
    error_exponent,
    error_exponent_primal,
    excess_rate,
    l_star,
    tau_bound,
    tau_bound_scalar,
)
from fblcode.info import binary_entropy, conditional_kl, mutual_information
from fblcode.logreal import LogReal


def _bsc(eps):
    bits = Alphabet.range(2)
    return Channel(bits, bits, [[1 - eps, eps], [eps, 1 - eps]])


def _gallager_oracle(rate, pvec, w_probs, grid=20001):
    """Independent E0 grid maximization over the tilt parameter."""
    pvec = np.asarray(pvec, dtype=float)
    w = np.asarray(w_probs, dtype=float)
    best = 0.0
    for s in np.linspace(0.0, 1.0, grid):
        inner = (pvec[:, None] * np.power(w, 1.0 / (1.0 + s))).sum(axis=0)
        e0 = -math.log(float(np.power(inner, 1.0 + s).sum()))
        best = max(best, e0 - s * rate)
    return best


# ---------------------------------------------------------------------------
# mutual information and exponent values
# ---------------------------------------------------------------------------


def test_channel_mutual_information_matches_joint():
    p = Pmf(Alphabet.range(2), [0.3, 0.7])
    w = _bsc(0.15)
    probs = p.probs[:, None] * np.asarray(w.probs)
    j = JointPmf(("u", "y"), (w.input, w.output), probs)
    assert channel_mutual_information(p, w) == pytest.approx(
        mutual_information(j, "u", "y"), abs=1e-12
    )


def test_bsc_capacity_value():
    got = channel_mutual_information(Pmf.uniform(Alphabet.range(2)), _bsc(0.1))
    assert got == pytest.approx(math.log(2) - binary_entropy(0.1), rel=1e-12)


def test_dual_matches_gallager_oracle():
    p = Pmf.uniform(Alphabet.range(2))
    w = _bsc(0.1)
    for rate in (0.02, 0.1, 0.25):
        res = error_exponent(rate, p, w)
        assert res.converged
        assert res.value == pytest.approx(
            _gallager_oracle(rate, p.probs, w.probs), abs=1e-7
        )


def test_frozen_bsc_exponent():
    res = error_exponent(0.1, Pmf.uniform(Alphabet.range(2)), _bsc(0.1))
    assert res.value == pytest.approx(0.12314355131421004, rel=1e-10)
    assert res.method == "dual-fixed-point"


def test_exponent_zero_at_and_above_mutual_information():
    p = Pmf.uniform(Alphabet.range(2))
    w = _bsc(0.1)
    cmi = channel_mutual_information(p, w)
    for rate in (cmi, cmi + 0.01, cmi + 1.0):
        res = error_exponent(rate, p, w)
        assert res.value == 0.0
        assert res.converged


def test_exponent_nonincreasing_and_convex_in_rate():
    p = Pmf.uniform(Alphabet.range(2))
    w = _bsc(0.1)
    rates = np.linspace(0.01, 0.3, 8)
    values = [error_exponent(r, p, w).value for r in rates]
    for lo, hi in zip(values, values[1:]):
        assert hi <= lo + 1e-12
    for i in range(1, len(rates) - 1):
        mid = error_exponent((rates[i - 1] + rates[i + 1]) / 2, p, w).value
        assert mid <= (values[i - 1] + values[i + 1]) / 2 + 1e-9


def test_noiseless_channel_identity():
    for a in (2, 3):
        alpha = Alphabet.range(a)
        w = Channel.deterministic(alpha, alpha, lambda s: s)
        p = Pmf.uniform(alpha)
        for rate in (0.05, 0.3, 0.6):
            if rate >= math.log(a):
                continue
            res = error_exponent(rate, p, w)
            assert res.value == pytest.approx(math.log(a) - rate, abs=1e-9)


def test_dual_minimizer_attains_primal_objective():
    p = Pmf(Alphabet.range(2), [0.4, 0.6])
    w = _bsc(0.08)
    rate = 0.05
    res = error_exponent(rate, p, w)
    v = res.minimizer
    d = conditional_kl(v, w, p)
    i = channel_mutual_information(p, v)
    assert d + max(0.0, i - rate) == pytest.approx(res.value, abs=1e-8)


def test_primal_agrees_with_dual(rng):
    for n_in, n_out, reps in ((2, 2, 6), (3, 3, 2)):
        for _ in range(reps):
            rows = rng.dirichlet(np.ones(n_out) * 0.7, size=n_in)
            w = Channel(Alphabet.range(n_in), Alphabet.range(n_out), rows)
            p = Pmf(Alphabet.range(n_in), rng.dirichlet(np.ones(n_in)))
            cmi = channel_mutual_information(p, w)
            for frac in (0.25, 0.75):
                rate = frac * max(cmi, 1e-6)
                dual = error_exponent(rate, p, w)
                primal = error_exponent_primal(rate, p, w)
                assert abs(dual.value - primal.value) <= 1e-6
                assert primal.method == "primal-grid"


def test_primal_rejects_large_alphabets():
    a = Alphabet.range(4)
    w = Channel.deterministic(a, a, lambda s: s)
    with pytest.raises(ValueError):
        error_exponent_primal(0.1, Pmf.uniform(a), w)


def test_exponent_validation():
    p = Pmf.uniform(Alphabet.range(2))
    with pytest.raises(ValueError):
        error_exponent(-0.1, p, _bsc(0.1))
    trit = Pmf.uniform(Alphabet.range(3))
    with pytest.raises(ValueError):
        error_exponent(0.1, trit, _bsc(0.1))


def test_exponent_result_json_shape():
    doc = error_exponent(0.1, Pmf.uniform(Alphabet.range(2)), _bsc(0.1)).to_json()
    assert set(doc) == {"value", "dual_s", "method", "converged", "minimizer"}
    assert doc["converged"] is True


# ---------------------------------------------------------------------------
# closed-form bound pieces
# ---------------------------------------------------------------------------


def test_cc_error_bound_scalar_matches_direct():
    l, a, b, e = 50, 3, 4, 0.2
    direct = (l + 1) ** (2 * a * b) * math.exp(-l * e)
    got = cc_error_bound_scalar(l, a, b, e)
    assert got.value == pytest.approx(direct, rel=1e-12)
    assert cc_error_bound_scalar(10 ** 400, a, b, e).is_zero
    with pytest.raises(ValueError):
        cc_error_bound_scalar(0, a, b, e)
    with pytest.raises(ValueError):
        cc_error_bound_scalar(l, a, b, -0.1)


def test_cc_error_bound_uses_exponent():
    p = Pmf.uniform(Alphabet.range(2))
    w = _bsc(0.1)
    rate, l = 0.1, 2000
    got = cc_error_bound(rate, l, p, w)
    e = error_exponent(rate, p, w).value
    assert got.log == pytest.approx(8 * math.log(l + 1) - l * e, rel=1e-9)


def test_tau_bound_matches_scalar_and_direct():
    p = Pmf(Alphabet.range(3), [0.5, 0.3, 0.2])
    l, delta = 400, 0.25
    got = tau_bound(l, delta, p)
    scalar = tau_bound_scalar(l, delta, 3, math.log(0.2))
    assert got.log == scalar.log
    direct = 2 * 3 * math.exp(-2 * delta ** 2 * 0.2 ** 2 * l)
    assert got.value == pytest.approx(direct, rel=1e-12)


def test_tau_bound_decreasing_in_block_length():
    p = Pmf(Alphabet.range(2), [0.6, 0.4])
    vals = [tau_bound(l, 0.3, p) for l in (100, 1000, 10000)]
    assert vals[0] > vals[1] > vals[2]
    assert tau_bound_scalar(10 ** 6, 0.3, 2, math.log(0.4)).log == pytest.approx(
        math.log(4) - 2 * 0.3 ** 2 * 0.4 ** 2 * 10 ** 6, rel=1e-12
    )
    assert tau_bound_scalar(10 ** 400, 0.3, 2, math.log(0.4)).is_zero


def test_tau_bound_validation():
    p = Pmf.uniform(Alphabet.range(2))
    with pytest.raises(ValueError):
        tau_bound(0, 0.3, p)
    with pytest.raises(ValueError):
        tau_bound(10, 0.0, p)
    with pytest.raises(ValueError):
        tau_bound_scalar(10, 0.3, 0, -1.0)
    with pytest.raises(ValueError):
        tau_bound_scalar(10, 0.3, 2, 0.5)


def test_block_disagreement_matches_direct():
    for xi in (0.3, 0.01, 1e-6):
        for l in (1, 7, 100):
            direct = 1.0 - (1.0 - xi) ** l
            assert block_disagreement(xi, l).value == pytest.approx(direct, rel=1e-10)
    assert block_disagreement(0.0, 5).is_zero
    assert block_disagreement(1.0, 5).value == 1.0


def test_block_disagreement_tiny_logreal():
    xi = LogReal(-200.0)
    got = block_disagreement(xi, 1000)
    assert got.log == pytest.approx(-200.0 + math.log(1000), abs=1e-9)
    huge_l = 10 ** 200
    assert block_disagreement(LogReal(-5.0), huge_l).value == 1.0


def test_block_disagreement_validation():
    with pytest.raises(ValueError):
        block_disagreement(0.5, 0)
    with pytest.raises(ValueError):
        block_disagreement(1.5, 3)
    with pytest.raises(ValueError):
        block_disagreement(-0.1, 3)


def test_l_star_defining_inequality():
    for rho, a, b in ((0.05, 2, 2), (0.02, 16, 4), (0.4, 3, 5)):
        l = l_star(rho, a, b)
        c = 4.0 * a * (1.0 + b)

        def slack(m):
            return m * rho - math.log(4.0) - c * math.log(m + 1)

        assert slack(l) >= -1e-9
        assert l == 1 or slack(l - 1) < 1e-9
    assert l_star(0.01, 2, 2) > l_star(0.1, 2, 2)
    with pytest.raises(ValueError):
        l_star(0.0, 2, 2)
    with pytest.raises(ValueError):
        l_star(0.1, 0, 2)


def test_excess_rate_values():
    mu, card = 0.05, 7
    direct = binary_entropy(mu) + mu * math.log(card)
    assert excess_rate(mu, card) == pytest.approx(direct, rel=1e-12)
    assert excess_rate(mu, card, l=4) == pytest.approx(
        binary_entropy(mu) / 4 + mu * math.log(card), rel=1e-12
    )
    assert excess_rate(0.0, card) == 0.0
    assert excess_rate(LogReal.zero(), card) == 0.0


def test_excess_rate_tiny_logreal():
    mu = LogReal(-120.0)
    got = excess_rate(mu, 5)
    x = math.exp(-120.0)
    direct = x * (1.0 + 120.0) + x * math.log(5)
    assert got == pytest.approx(direct, rel=1e-9)
    assert excess_rate(LogReal(-50000.0), 5) == 0.0


def test_excess_rate_validation():
    with pytest.raises(ValueError):
        excess_rate(0.1, 5, l=0)
    with pytest.raises(ValueError):
        excess_rate(0.1, 0)
    with pytest.raises(ValueError):
        excess_rate(LogReal(0.5), 5)
