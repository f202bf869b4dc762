import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ringgas.basis import BasisError, BasisSet, FockState, enumerate_basis
from ringgas.hamiltonian import StateVector
from ringgas.wavefunction import (
    DegenerateConditionalError,
    amplitude,
    amplitude_batch,
    black_soliton_shift,
    conditional,
    dicke_SM,
    dicke_conditional,
    esp,
    esp_batch,
    esp_drop_batch,
    gray_depth_bound,
    multi_soliton_state,
    permanent,
    symmetry_restoration_check,
    two_mode_view,
)

rng = np.random.default_rng(20240)


def permanent_bruteforce(a):
    n = a.shape[0]
    return sum(
        np.prod([a[i, p[i]] for i in range(n)]) for p in itertools.permutations(range(n))
    )


def esp_bruteforce(values, k):
    return sum(np.prod(c) for c in itertools.combinations(values, k)) if k else 1.0


# ---------------------------------------------------------------------------
# permanents and symmetric polynomials


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_permanent_matches_permutation_sum(n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    assert permanent(a) == pytest.approx(permanent_bruteforce(a), rel=1e-12)


def test_permanent_guards():
    with pytest.raises(ValueError):
        permanent(np.ones((2, 3)))
    with pytest.raises(ValueError):
        permanent(np.eye(17))
    assert permanent(np.empty((0, 0))) == 1.0


@given(n=st.integers(1, 9), k=st.integers(0, 9))
@settings(max_examples=30, deadline=None)
def test_esp_matches_subset_enumeration(n, k):
    k = min(k, n)
    phases = rng.uniform(0, 2 * np.pi, n)
    a = np.exp(1j * phases)
    assert esp(a, k)[k] == pytest.approx(complex(esp_bruteforce(a, k)), abs=1e-10)


def test_esp_drop_matches_direct_recompute():
    a = np.exp(1j * rng.uniform(0, 2 * np.pi, size=(3, 6)))
    order = 3
    e = esp_batch(a, order)
    dropped = esp_drop_batch(e, a, order)
    for r in range(3):
        for l in range(6):
            rest = np.delete(a[r], l)
            assert dropped[r, l] == pytest.approx(complex(esp_bruteforce(rest, order)), abs=1e-10)


# ---------------------------------------------------------------------------
# amplitudes


def test_ground_state_amplitude_is_flat():
    for N, L in [(3, 1.0), (5, 2.0)]:
        state = FockState.from_occupations({0: N})
        x = rng.uniform(0, L, N)
        assert amplitude(state, x, L) == pytest.approx(L ** (-N / 2), rel=1e-12)


def test_two_particle_two_mode_value():
    # Fock |n0=1, n1=1> at (0, 1/4):  (e^0 + e^{i pi/2})/sqrt(2) = (1+i)/sqrt(2)
    state = FockState.from_occupations({0: 1, 1: 1})
    got = amplitude(state, [0.0, 0.25])
    assert got == pytest.approx((1 + 1j) / math.sqrt(2), rel=1e-12)


@given(perm=st.permutations(range(4)))
@settings(max_examples=12, deadline=None)
def test_amplitude_permutation_symmetric(perm):
    state = FockState.from_occupations({-1: 1, 0: 2, 2: 1})
    x = np.array([0.13, 0.45, 0.71, 0.94])
    assert amplitude(state, x[list(perm)]) == pytest.approx(amplitude(state, x), rel=1e-12)


@pytest.mark.parametrize(
    "occ", [{0: 2, 1: 2}, {0: 3, 1: 1}, {-1: 2, 1: 2}, {0: 4}, {-2: 3, 2: 2}]
)
def test_two_mode_fast_path_equals_permanent(occ):
    state = FockState.from_occupations(occ)
    view = two_mode_view(state)
    assert view is not None
    N = state.particles
    X = rng.uniform(0, 1, size=(5, N))
    fast = amplitude_batch(state, X)
    import ringgas.wavefunction as wf

    slow = np.array(
        [wf._fock_norm(state) * permanent(wf._mode_matrix(state, x, 1.0)) for x in X]
    )
    assert np.allclose(fast, slow, atol=1e-11)


def test_state_vector_amplitude_is_linear_combination():
    basis = BasisSet.from_states(
        [FockState.from_occupations({0: 2}), FockState.from_occupations({-1: 1, 1: 1})]
    )
    c = np.array([0.8, 0.6j])
    sv = StateVector(basis, c)
    x = np.array([0.2, 0.9])
    expect = c[0] * amplitude(basis.states[0], x) + c[1] * amplitude(basis.states[1], x)
    assert amplitude(sv, x) == pytest.approx(expect, rel=1e-12)


def test_amplitude_dimension_mismatch():
    state = FockState.from_occupations({0: 3})
    with pytest.raises(ValueError):
        amplitude(state, [0.1, 0.2])


# ---------------------------------------------------------------------------
# conditionals


def test_conditional_flat_for_condensate():
    state = FockState.from_occupations({0: 5})
    c = conditional(state, rng.uniform(0, 1, 4), grid=128)
    assert np.allclose(c.density(), 1.0, atol=1e-12)
    assert np.allclose(c.phase(), 0.0, atol=1e-12)


@pytest.mark.parametrize("N", [4, 6, 8])
def test_twin_fock_conditional_closed_form(N):
    # density (1 + cos(2 pi (x+X)/L))/L for any fixed positions [central check]
    state = FockState.from_occupations({0: N // 2, 1: N // 2})
    fixed = rng.uniform(0, 1, N - 1)
    c = conditional(state, fixed, grid=512)
    X = black_soliton_shift(fixed)
    expect = (1.0 + np.cos(2 * np.pi * (c.grid + X))) / 1.0
    assert np.max(np.abs(c.density() - expect)) < 1e-10


@pytest.mark.parametrize("N,K", [(4, 2), (6, 3), (8, 4), (6, 2), (8, 1), (5, 2)])
def test_dicke_conditional_matches_permanent_route(N, K):
    state = FockState.from_occupations({0: N - K, 1: K})
    fixed = rng.uniform(0, 1, N - 1)
    grid = 256
    via_perm = conditional(state, fixed, grid=grid)
    closed = dicke_conditional(N, K, fixed, grid=grid)
    assert np.max(np.abs(via_perm.amplitudes - closed.amplitudes)) < 1e-10


def test_conditional_translation_covariance():
    state = FockState.from_occupations({0: 3, 1: 3})
    fixed = rng.uniform(0, 0.5, 5)
    d = 0.37
    c0 = conditional(state, fixed, grid=256)
    c1 = conditional(state, (fixed + d) % 1.0, grid=256)
    x = np.linspace(0, 1, 301, endpoint=False)
    assert np.max(np.abs(np.abs(c1.evaluate(x)) ** 2 - np.abs(c0.evaluate((x - d) % 1.0)) ** 2)) < 1e-10


def test_twin_fock_profile_independent_of_fixed_positions():
    state = FockState.from_occupations({0: 4, 1: 4})
    fa = rng.uniform(0, 1, 7)
    fb = rng.uniform(0, 1, 7)
    ca = conditional(state, fa, grid=512)
    cb = conditional(state, fb, grid=512)
    shift = black_soliton_shift(fa) - black_soliton_shift(fb)
    x = np.linspace(0, 1, 173, endpoint=False)
    da = np.abs(ca.evaluate(x)) ** 2
    db = np.abs(cb.evaluate((x + shift) % 1.0)) ** 2
    assert np.max(np.abs(da - db)) < 1e-10


def test_phase_jump_of_pi_at_notch():
    state = FockState.from_occupations({0: 3, 1: 3})
    for _ in range(5):
        c = conditional(state, rng.uniform(0, 1, 5), grid=512)
        assert abs(abs(c.phase_jump_at_minimum()) - math.pi) < 1e-6


def test_degenerate_conditional_raises():
    basis = enumerate_basis(2, 1, 1)
    zero = StateVector(basis, np.zeros(len(basis)))
    with pytest.raises(DegenerateConditionalError):
        conditional(zero, [0.3], grid=64)


# ---------------------------------------------------------------------------
# Dicke pair S, M


def test_dicke_sm_smallest_subsets():
    fixed = rng.uniform(0, 1, 4)
    pair = dicke_SM(1, fixed)
    assert pair.S == pytest.approx(1.0)  # empty product
    assert pair.M == pytest.approx(complex(np.exp(2j * np.pi * fixed).sum()))


def test_dicke_sm_hand_example():
    # N=4, K=2 at (0, L/4, L/2): a = (1, i, -1); S = e1 = i, M = e2 = -1
    pair = dicke_SM(2, [0.0, 0.25, 0.5])
    assert pair.S == pytest.approx(1j, abs=1e-12)
    assert pair.M == pytest.approx(-1.0, abs=1e-12)


@given(data=st.data())
@settings(max_examples=20, deadline=None)
def test_dicke_sm_matches_subset_oracle(data):
    n_fixed = data.draw(st.integers(2, 7))
    K = data.draw(st.integers(1, n_fixed))
    fixed = rng.uniform(0, 1, n_fixed)
    a = np.exp(2j * np.pi * fixed)
    pair = dicke_SM(K, fixed)
    assert pair.S == pytest.approx(complex(esp_bruteforce(a, K - 1)), abs=1e-10)
    assert pair.M == pytest.approx(complex(esp_bruteforce(a, K)), abs=1e-10)


@pytest.mark.parametrize("N", [4, 6, 8])
def test_black_reflection_identity(N):
    # for K = N/2:  (prod a_i) S* = M exactly
    fixed = rng.uniform(0, 1, N - 1)
    pair = dicke_SM(N // 2, fixed)
    assert pair.phase_product * np.conj(pair.S) == pytest.approx(pair.M, abs=1e-12)


def test_dicke_sm_range_errors():
    with pytest.raises(ValueError):
        dicke_SM(0, [0.1, 0.2])
    with pytest.raises(ValueError):
        dicke_SM(3, [0.1, 0.2])


def test_black_shift_matches_argM():
    fixed = rng.uniform(0, 1, 5)
    pair = dicke_SM(3, fixed)
    X = black_soliton_shift(fixed)
    expect = (fixed.sum() - np.angle(pair.M) / math.pi) % 1.0
    assert X == pytest.approx(expect, abs=1e-12)


def test_gray_bound_holds_with_equality_structure():
    for N, K in [(8, 2), (8, 4), (6, 1)]:
        fixed = rng.uniform(0, 1, N - 1)
        pair = dicke_SM(K, fixed)
        c = dicke_conditional(N, K, fixed, grid=2048)
        bound = gray_depth_bound(pair)
        assert c.notch_depth() >= bound - 1e-12
        # exact normalized minimum from |S|, |M|
        s, m = abs(pair.S), abs(pair.M)
        assert c.notch_depth() == pytest.approx((s - m) ** 2 / (s * s + m * m), abs=1e-12)


# ---------------------------------------------------------------------------
# multi-soliton states and symmetry restoration


def test_multi_soliton_state_form():
    st8 = multi_soliton_state(8, 2)
    assert st8.occupations == {-1: 4, 1: 4}
    assert st8.momentum == 0
    with pytest.raises(BasisError):
        multi_soliton_state(7, 2)
    with pytest.raises(BasisError):
        multi_soliton_state(8, 3)


@pytest.mark.parametrize("M", [2, 4])
def test_multi_soliton_conditional_has_m_notches(M):
    state = multi_soliton_state(8, M)
    c = conditional(state, rng.uniform(0, 1, 7), grid=2048)
    dens = c.density()
    is_min = (dens < np.roll(dens, 1)) & (dens <= np.roll(dens, -1))
    assert int(is_min.sum()) == M
    # adjacent minima separated by L/M, each at a node with a pi jump
    locs = np.sort(c.grid[is_min])
    gaps = np.diff(np.append(locs, locs[0] + 1.0))
    assert np.allclose(gaps, 1.0 / M, atol=2.0 / 2048)
    assert abs(abs(c.phase_jump_at_minimum()) - math.pi) < 1e-6


def test_double_soliton_conditional_is_cosine():
    state = multi_soliton_state(6, 2)
    fixed = rng.uniform(0, 1, 5)
    c = conditional(state, fixed, grid=512)
    # density ~ cos^2(2 pi (x - X)/L): fit X from the first harmonic of density
    dens = c.density()
    c2 = np.fft.fft(dens)[2]
    X = -np.angle(c2) / (4 * np.pi)
    err = min(
        np.max(np.abs(dens - 2.0 * np.cos(2 * np.pi * (c.grid - X - s)) ** 2))
        for s in (0.0, 0.25)
    )
    assert err < 1e-9


@pytest.mark.parametrize("N", [2, 4, 6])
def test_symmetry_restoration_quadrature(N):
    report = symmetry_restoration_check(N, n_configs=20, n_quadrature=64, seed=5)
    assert report.deviation < 1e-8
    assert report.scale_spread < 1e-8 * abs(report.scale)
    # the constant is L^{N/2} sqrt(binom(N, N/2)) for L = 1
    assert abs(report.scale) == pytest.approx(math.sqrt(math.comb(N, N // 2)), rel=1e-10)
