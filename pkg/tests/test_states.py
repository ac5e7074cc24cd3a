import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, optimize
from scipy import special as sps

from _oracles import cat_vector, channel_output, displacement_elements, fock_vector
from decoq.states import (
    CAT,
    PhotonDistribution,
    StateSpec,
    TruncationError,
    cat_fock_element,
    chi_s,
    default_n_max,
    evolved_chi,
    evolved_wigner,
    mean_photons,
    photon_dist,
    photon_probs,
    wigner_s,
)

SQ2 = math.sqrt(2.0)
DIM = 70


def state_vector(state, dim=DIM):
    return cat_vector(state.alpha, dim) if state.kind == CAT else fock_vector(state.n, dim)


states = st.one_of(
    st.builds(StateSpec.fock, st.integers(0, 6)),
    st.builds(lambda r, th: StateSpec.cat(r * np.exp(1j * th)), st.floats(0.05, 2.2), st.floats(0, 2 * math.pi)),
)
mus = st.builds(complex, st.floats(-3, 3), st.floats(-3, 3))


# ---------------------------------------------------------------- StateSpec

def test_statespec_validation_and_labels():
    with pytest.raises(ValueError):
        StateSpec.fock(-1)
    with pytest.raises(ValueError):
        StateSpec.fock(1.5)
    with pytest.raises(ValueError):
        StateSpec("squeezed")
    assert StateSpec("CAT", alpha=1).kind == CAT
    assert StateSpec.cat(SQ2).norm == pytest.approx(2 * (1 + math.exp(-4)))
    assert StateSpec.fock(2).label() == "fock(n=2)"
    assert "alpha" in StateSpec.cat(1 + 1j).label()


def test_mean_photons():
    assert mean_photons(StateSpec.fock(2)) == 2.0
    assert mean_photons(StateSpec.cat(SQ2)) == pytest.approx(2 * math.tanh(2))
    assert mean_photons(StateSpec.cat(SQ2)) == pytest.approx(1.928, abs=1e-3)
    assert mean_photons(StateSpec.cat(6.0)) == pytest.approx(36.0, rel=1e-12)


# ---------------------------------------------------------------- chi_s

@pytest.mark.parametrize("state", [StateSpec.fock(0), StateSpec.fock(3), StateSpec.cat(SQ2), StateSpec.cat(0.7j)])
def test_chi_normalization(state):
    for s in (-1.0, 0.0, 1.0):
        assert chi_s(state, s, 0.0) == pytest.approx(1.0)


def test_chi_examples():
    assert chi_s(StateSpec.fock(1), 0.0, 1.0) == pytest.approx(0.0, abs=1e-15)
    cat = StateSpec.cat(SQ2)
    assert (2 / cat.norm) * (1 + math.exp(-4)) == pytest.approx(1.0)
    assert chi_s(cat, 0.0, 0.0) == pytest.approx(1.0)
    mu = np.linspace(0, 3, 7) * (1 - 0.5j)
    np.testing.assert_allclose(chi_s(StateSpec.fock(0), 0.0, mu), np.exp(-0.5 * np.abs(mu) ** 2))


@settings(max_examples=60, deadline=None)
@given(states, mus, st.floats(-2, 1))
def test_chi_hermiticity(state, mu, s):
    assert chi_s(state, s, -mu) == pytest.approx(np.conj(chi_s(state, s, mu)), abs=1e-13)


@settings(max_examples=60, deadline=None)
@given(states, mus)
def test_chi_symmetric_bounded(state, mu):
    assert abs(chi_s(state, 0.0, mu)) <= 1.0 + 1e-12


@settings(max_examples=30, deadline=None)
@given(states, mus)
def test_chi_matches_number_basis_trace(state, mu):
    psi = state_vector(state)
    d = displacement_elements(mu, DIM)
    assert chi_s(state, 0.0, mu) == pytest.approx(psi.conj() @ d @ psi, abs=1e-10)


def test_chi_broadcasts_over_ordering():
    cat = StateSpec.cat(SQ2)
    s = np.array([[1.0], [0.0], [-1.0]])
    mu = np.array([[0.3, 1.1]])
    out = chi_s(cat, s, mu)
    assert out.shape == (3, 2)
    assert out[1, 1] == pytest.approx(chi_s(cat, 0.0, 1.1))


def test_chi_large_amplitude_finite():
    out = chi_s(StateSpec.cat(12.0), 0.5, np.linspace(0, 5, 11))
    assert np.all(np.isfinite(out))


# ---------------------------------------------------------------- wigner_s

def test_wigner_examples():
    assert wigner_s(StateSpec.fock(1), 0.0, 0.0) == pytest.approx(-2 / math.pi)
    for n in (1, 2, 5):
        assert wigner_s(StateSpec.fock(n), -1.0, 0.0) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        wigner_s(StateSpec.fock(1), 1.0, 0.0)


def _plane_integral(f, half_width=7.0, n=281):
    x = np.linspace(-half_width, half_width, n)
    bx, by = np.meshgrid(x, x, indexing="ij")
    vals = f(bx + 1j * by)
    return integrate.simpson(integrate.simpson(vals, x=x, axis=1), x=x)


@pytest.mark.parametrize("state", [StateSpec.cat(SQ2), StateSpec.cat(1.2 - 0.8j), StateSpec.fock(3)])
@pytest.mark.parametrize("s", [0.0, -0.6])
def test_wigner_normalization(state, s):
    assert _plane_integral(lambda b: wigner_s(state, s, b)) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("state", [StateSpec.cat(SQ2), StateSpec.cat(0.9 + 0.9j), StateSpec.fock(2)])
def test_wigner_matches_displaced_parity(state):
    # W_0(beta) = (2/pi) sum_n (-1)^n |<n|D(-beta)|psi>|^2
    psi = state_vector(state)
    parity = (-1.0) ** np.arange(DIM)
    rng = np.random.default_rng(3)
    for beta in rng.normal(size=6) * 1.3 + 1j * rng.normal(size=6) * 1.3:
        amp = displacement_elements(-beta, DIM) @ psi
        ref = 2 / math.pi * np.sum(parity * np.abs(amp) ** 2)
        assert wigner_s(state, 0.0, beta) == pytest.approx(ref, abs=1e-10)


@pytest.mark.parametrize("n", [1, 2, 4])
@pytest.mark.parametrize("s", [-0.5, 0.3])
def test_fock_wigner_is_fourier_transform_of_chi(n, s):
    state = StateSpec.fock(n)
    for r in (0.0, 0.6, 1.4):
        f = lambda rho: rho * sps.j0(2 * r * rho) * chi_s(state, s, rho).real
        ref = 2 / math.pi * integrate.quad(f, 0, 40, limit=400)[0]
        assert wigner_s(state, s, r) == pytest.approx(ref, abs=1e-9)


def test_cat_wigner_is_fourier_transform_of_chi():
    state = StateSpec.cat(1.1 + 0.4j)
    s = -0.3
    x = np.linspace(-9, 9, 601)
    mx, my = np.meshgrid(x, x, indexing="ij")
    mu = mx + 1j * my
    chi = chi_s(state, s, mu)
    for beta in (0.0, 0.5 - 0.2j, -1.0 + 0.7j):
        kern = np.exp(beta * np.conj(mu) - np.conj(beta) * mu)
        ref = integrate.simpson(integrate.simpson(kern * chi, x=x, axis=1), x=x).real / math.pi**2
        assert wigner_s(state, s, beta) == pytest.approx(ref, abs=1e-8)


# ---------------------------------------------------------------- matrix elements

def test_cat_fock_element_examples():
    assert cat_fock_element(1.3, 1, 1) == 0
    assert cat_fock_element(SQ2, 2, 2).real == pytest.approx(4 * math.exp(-2) / (1 + math.exp(-4)), rel=1e-14)
    assert cat_fock_element(SQ2, 2, 2).real == pytest.approx(0.5317, abs=1e-4)
    trace = math.fsum(cat_fock_element(SQ2, n, n).real for n in range(61))
    assert trace == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(ValueError):
        cat_fock_element(1.0, -1, 0)


@pytest.mark.parametrize("alpha", [SQ2, 0.8 - 1.1j, 3.0j])
def test_cat_fock_element_matches_vector(alpha):
    psi = cat_vector(alpha, 60)
    for n, m in [(0, 0), (2, 0), (2, 4), (6, 2), (3, 5)]:
        assert cat_fock_element(alpha, n, m) == pytest.approx(psi[n] * np.conj(psi[m]), abs=1e-13)


# ---------------------------------------------------------------- channel

def test_evolved_chi_examples():
    cat = StateSpec.cat(SQ2)
    assert evolved_chi(cat, 0.3, 1.2, 0.0) == pytest.approx(chi_s(cat, 0.3, 1.2))
    assert evolved_chi(cat, 1.0, 0.0, 2.5) == pytest.approx(1.0)
    assert evolved_chi(StateSpec.fock(2), 1.0, math.sqrt(6), 0.0) == pytest.approx(7.0)
    with pytest.raises(ValueError):
        evolved_chi(cat, 0.0, 1.0, -0.1)


@settings(max_examples=40, deadline=None)
@given(states, mus, st.floats(0, 3))
def test_evolved_chi_is_gaussian_damping(state, mu, sigma):
    ref = chi_s(state, 0.0, mu) * math.exp(-sigma * abs(mu) ** 2)
    assert evolved_chi(state, 0.0, mu, sigma) == pytest.approx(ref, abs=1e-13)


def test_evolved_wigner_fock_one_origin():
    for sig in (0.05, 0.3, 0.5, 0.9, 2.0):
        ref = -(2 / math.pi) * (1 - 2 * sig) / (1 + 2 * sig) ** 2
        assert evolved_wigner(StateSpec.fock(1), 0.0, sig) == pytest.approx(ref, abs=1e-15)
    assert evolved_wigner(StateSpec.fock(1), 0.0, 0.5) == pytest.approx(0.0, abs=1e-15)
    root = optimize.brentq(lambda s: evolved_wigner(StateSpec.fock(1), 0.0, s), 0.1, 0.9, xtol=1e-14)
    assert abs(root - 0.5) < 1e-9


def test_evolved_wigner_cat_positive_beyond_depth():
    x = np.linspace(-4, 4, 41)
    bx, by = np.meshgrid(x, x)
    w = evolved_wigner(StateSpec.cat(SQ2), bx + 1j * by, 1.0)
    assert w.min() >= 0.0


@pytest.mark.parametrize("state", [StateSpec.cat(SQ2), StateSpec.fock(2)])
@pytest.mark.parametrize("sigma", [0.2, 1.0])
def test_evolved_wigner_normalized(state, sigma):
    assert _plane_integral(lambda b: evolved_wigner(state, b, sigma), half_width=9.0) == pytest.approx(1.0, abs=1e-4)


def test_evolved_wigner_matches_number_basis_channel():
    state = StateSpec.cat(SQ2)
    rho = channel_output(state_vector(state, 60), 0.3)
    parity = (-1.0) ** np.arange(60)
    for beta in (0.0, 0.7 + 0.2j, -1.5j):
        d = displacement_elements(-beta, 60)
        ref = 2 / math.pi * np.real(np.sum(parity * np.einsum("ij,jk,ik->i", d, rho, d.conj())))
        assert evolved_wigner(state, beta, 0.3) == pytest.approx(ref, abs=1e-9)


# ---------------------------------------------------------------- photon statistics

def test_photon_dist_identity_channel():
    d = photon_dist(StateSpec.fock(3), 0.0)
    assert d[3] == pytest.approx(1.0, abs=1e-13)
    assert sum(abs(d[m]) for m in range(d.n_max + 1) if m != 3) < 1e-12
    c = photon_dist(StateSpec.cat(SQ2), 0.0)
    assert max(c[m] for m in range(1, c.n_max + 1, 2)) < 1e-13
    assert c[2] == pytest.approx(cat_fock_element(SQ2, 2, 2).real, abs=1e-12)
    assert c[2] == pytest.approx(0.5317, abs=1e-4)


@pytest.mark.parametrize("state", [StateSpec.fock(2), StateSpec.cat(SQ2), StateSpec.cat(2.5j)])
@pytest.mark.parametrize("sigma", [0.0, 0.3, 1.0, 3.0])
def test_photon_dist_sums_to_one(state, sigma):
    d = photon_dist(state, sigma)
    assert isinstance(d, PhotonDistribution)
    assert 1 - d.tail_bound - 1e-15 <= d.total <= 1 + 1e-9
    assert d.probs.min() >= 0.0
    assert d.n_max == default_n_max(state, sigma)
    assert d[d.n_max + 5] == 0.0


@pytest.mark.parametrize("state", [StateSpec.fock(2), StateSpec.cat(SQ2), StateSpec.cat(1.3 + 0.9j)])
@pytest.mark.parametrize("sigma", [0.1, 0.7, 2.0])
def test_photon_probs_match_number_basis_channel(state, sigma):
    rho = channel_output(state_vector(state, 50), sigma)
    ref = np.real(np.diag(rho))[:25]
    got = photon_probs(state, sigma, np.arange(25))[0]
    np.testing.assert_allclose(got, ref, atol=1e-11)


@pytest.mark.parametrize("state", [StateSpec.fock(2), StateSpec.cat(SQ2)])
def test_channel_adds_sigma_photons(state):
    for sigma in (0.4, 2.0):
        d = photon_dist(state, sigma)
        assert d.mean() == pytest.approx(mean_photons(state) + sigma, abs=1e-7)


def test_photon_probs_vectorized_over_sigma():
    state = StateSpec.cat(SQ2)
    table = photon_probs(state, [0.0, 0.5, 1.0], [0, 1, 2, 5])
    assert table.shape == (3, 4)
    np.testing.assert_allclose(table[1], photon_probs(state, 0.5, [0, 1, 2, 5])[0])
    with pytest.raises(ValueError):
        photon_probs(state, -0.1, [0])


def test_photon_dist_truncation_error():
    with pytest.raises(TruncationError):
        photon_dist(StateSpec.cat(2.0), 1.0, n_max=5)
