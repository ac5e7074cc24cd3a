import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special as sps

from decoq.special import gamma_half_ratio, hyp2f1_terminating, laguerre, laguerre_table, lambert_w0


# ---------------------------------------------------------------- Lambert W

@pytest.mark.parametrize("x, expected", [(0.0, 0.0), (math.e, 1.0), (-1.0 / math.e, -1.0)])
def test_lambert_w0_examples(x, expected):
    assert lambert_w0(x) == pytest.approx(expected, abs=1e-12)


def test_lambert_w0_domain():
    with pytest.raises(ValueError):
        lambert_w0(-0.4)
    with pytest.raises(ValueError):
        lambert_w0(float("nan"))


def test_lambert_w0_principal_branch_vs_mpmath():
    mp.mp.dps = 40
    xs = np.concatenate([-np.exp(-1) + np.logspace(-15, -1, 60), np.linspace(-0.3, 5, 60), np.logspace(1, 6, 40)])
    for x in xs:
        ref = mp.lambertw(mp.mpf(float(x)))
        if mp.im(ref) != 0:
            continue  # float(-1/e) rounds slightly past the branch point
        w = lambert_w0(float(x))
        assert w >= -1.0
        assert w == pytest.approx(float(mp.re(ref)), rel=1e-13, abs=1e-15)


def test_lambert_w0_matches_scipy_away_from_branch():
    for x in np.linspace(-0.36, 50.0, 200):
        assert lambert_w0(float(x)) == pytest.approx(sps.lambertw(x).real, rel=1e-12, abs=1e-14)


def test_lambert_w0_identity_random_sweep():
    rng = np.random.default_rng(11)
    xs = np.concatenate([rng.uniform(-1 / math.e, 0, 5000), 10 ** rng.uniform(-8, 6, 5000)])
    worst = 0.0
    for x in xs:
        w = lambert_w0(float(x))
        worst = max(worst, abs(w * math.exp(w) - x) / abs(x))
    assert worst < 1e-12


@given(st.floats(min_value=-1 / math.e, max_value=1e6, allow_nan=False))
def test_lambert_w0_identity_property(x):
    w = lambert_w0(x)
    assert abs(w * math.exp(w) - x) <= 1e-12 * max(abs(x), 1e-300) + 1e-300 or x == 0.0


# ---------------------------------------------------------------- Laguerre

def test_laguerre_examples():
    assert laguerre(0, 5.7) == 1.0
    for x in (-1.0, 0.0, 0.3, 7.0):
        assert laguerre(1, x) == pytest.approx(1.0 - x)
    assert laguerre(2, 2.0) == pytest.approx(-1.0)


def test_laguerre_negative_order():
    with pytest.raises(ValueError):
        laguerre(-1, 0.0)


@given(st.integers(min_value=1, max_value=200), st.floats(min_value=0.0, max_value=50.0))
def test_laguerre_recurrence(n, x):
    lm, l0, lp = laguerre(n - 1, x), laguerre(n, x), laguerre(n + 1, x)
    lhs = (n + 1) * lp
    rhs = (2 * n + 1 - x) * l0 - n * lm
    scale = max(abs(lhs), abs((2 * n + 1 - x) * l0), abs(n * lm), 1e-300)
    assert abs(lhs - rhs) <= 1e-12 * scale


@given(st.integers(min_value=0, max_value=60), st.floats(min_value=0.0, max_value=30.0))
def test_laguerre_matches_scipy(n, x):
    ref = sps.eval_laguerre(n, x)
    assert laguerre(n, x) == pytest.approx(ref, rel=1e-9, abs=1e-9)


def test_laguerre_table_matches_scalar():
    x = np.linspace(0, 20, 7)
    tab = laguerre_table(12, x)
    assert tab.shape == (13, 7)
    for n in range(13):
        np.testing.assert_allclose(tab[n], [laguerre(n, v) for v in x], rtol=1e-13, atol=1e-13)


# ---------------------------------------------------------------- 2F1

@given(st.floats(min_value=-3, max_value=3), st.floats(min_value=0.1, max_value=5))
def test_hyp2f1_n0_is_one(b, c):
    assert hyp2f1_terminating(0, b, c, 0.7) == 1.0


def test_hyp2f1_one_term():
    for x in (-1.0, 0.0, 0.25, 2.0):
        assert hyp2f1_terminating(1, 0.5, -0.5, x) == pytest.approx(1.0 + x)


def test_hyp2f1_fock_two_identity_channel():
    # Fock fidelity at sigma=0 is 1, which fixes 2F1(-2, 1/2; -3/2; 1)
    # through sqrt(pi) / (Gamma(5/2)/Gamma(3)) = 8/3
    brute = sum(
        sps.poch(-2, k) * sps.poch(0.5, k) / (sps.poch(-1.5, k) * math.factorial(k)) for k in range(3)
    )
    assert hyp2f1_terminating(2, 0.5, -1.5, 1.0) == pytest.approx(brute, rel=1e-14)
    assert hyp2f1_terminating(2, 0.5, -1.5, 1.0) == pytest.approx(8.0 / 3.0, rel=1e-14)


@given(st.integers(min_value=0, max_value=30), st.floats(min_value=-2, max_value=2),
       st.floats(min_value=0.1, max_value=4))
def test_hyp2f1_zero_argument(n, b, c):
    assert hyp2f1_terminating(n, b, c, 0.0) == 1.0


@settings(max_examples=60)
@given(st.integers(min_value=0, max_value=12), st.floats(min_value=-2, max_value=2),
       st.floats(min_value=0.3, max_value=4), st.floats(min_value=-0.9, max_value=0.9))
def test_hyp2f1_matches_scipy(n, b, c, x):
    ref = sps.hyp2f1(-n, b, c, x)
    assert hyp2f1_terminating(n, b, c, x) == pytest.approx(ref, rel=1e-9, abs=1e-11)


def test_hyp2f1_pole():
    with pytest.raises(ZeroDivisionError):
        hyp2f1_terminating(3, 0.5, -1.0, 0.5)


# ---------------------------------------------------------------- Gamma ratio

def test_gamma_half_ratio_examples():
    assert gamma_half_ratio(0) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    assert gamma_half_ratio(1) == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-15)


@pytest.mark.parametrize("n", [5, 17, 100, 170])
def test_gamma_half_ratio_vs_lgamma(n):
    ref = math.exp(math.lgamma(n + 0.5) - math.lgamma(n + 1))
    assert gamma_half_ratio(n) == pytest.approx(ref, rel=1e-13)


def test_gamma_half_ratio_negative():
    with pytest.raises(ValueError):
        gamma_half_ratio(-1)
