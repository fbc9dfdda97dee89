import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gabormat import (
    GaussianWindow,
    GenHeat,
    Grid,
    Heat,
    InvalidParameterError,
    LatticeIndex,
    LatticeParams,
    MultiplierSymbol,
    Repulsor,
    continuous_ft,
    gabor_entry_oracle,
    gabor_entry_oracle_complex,
    heat_entry_modulus,
    heat_symbol,
    identity_symbol,
    multiplier_apply,
    oracle_matrix,
    oracle_window,
    repulsor_entry_modulus,
    superexp_ft_oracle,
)
from gabormat.core_tf import point_shift_sample
from gabormat.oracle import (
    genheat_kernel_rate,
    genheat_oracle_grid,
    genheat_symbol,
    operator_symbol,
)

P = LatticeParams(1.0, 0.5, 1)
REF = Grid.reference(1)
small = st.integers(-3, 3)


def idx(m, n):
    return LatticeIndex([m], [n])


# ----------------------------------------------------------- multipliers


def test_identity_multiplier_is_identity():
    f = point_shift_sample([1.0], [-0.75], REF)
    assert np.max(np.abs(multiplier_apply(identity_symbol(), f).values - f.values)) < 1e-8


@pytest.mark.parametrize("rho,t", [(0.5, 0.1), (1.0, 1.0)])
def test_heat_on_gaussian_widens_it(rho, t):
    # σ_ρ(t, D)g = (1+4πρt)^{-1/2} exp(-πx²/(1+4πρt))
    q = 1 + 4 * math.pi * rho * t
    grid = Grid.symmetric(32.0, 4097)  # the output is wider than the reference window
    x = grid.axis()
    out = multiplier_apply(heat_symbol(rho, t), GaussianWindow().sample(grid))
    np.testing.assert_allclose(out.values, np.exp(-math.pi * x * x / q) / math.sqrt(q),
                               rtol=0, atol=1e-12)


def test_symbol_flushes_underflow():
    sym = heat_symbol(1.0, 10.0)
    vals = sym(np.array([[0.0], [100.0]]))
    assert vals[0] == 1.0 and vals[1] == 0.0
    plain = MultiplierSymbol(lambda w: np.full(np.shape(w)[:-1], 2.0))
    assert plain(np.zeros((3, 1)))[0] == 2.0


def test_genheat_k1_is_heat_with_unit_rho():
    w = np.linspace(-3, 3, 13)[:, None]
    np.testing.assert_allclose(genheat_symbol(1, 0.3)(w), heat_symbol(1.0, 0.3)(w), rtol=1e-13)


def test_repulsor_has_no_symbol():
    with pytest.raises(InvalidParameterError):
        operator_symbol(Repulsor(0.5))


# ---------------------------------------------------------- entry oracles


@settings(max_examples=25, deadline=None)
@given(m=small, n=small, mp=small, np_=small, rho=st.sampled_from([0.5, 1.0]),
       t=st.sampled_from([0.1, 1.0]))
def test_heat_contour_agrees_with_grid(m, n, mp, np_, rho, t):
    op = Heat(rho, t)
    a, b = idx(m, n), idx(mp, np_)
    grid = gabor_entry_oracle_complex(op, a, b, P, mode="grid")
    contour = gabor_entry_oracle_complex(op, a, b, P, mode="contour")
    assert abs(grid - contour) < 1e-12


@settings(max_examples=15, deadline=None)
@given(m=small, n=small, mp=small, np_=small, t=st.sampled_from([0.25, 0.5, 1.0]))
def test_repulsor_contour_agrees_with_grid(m, n, mp, np_, t):
    op = Repulsor(t)
    a, b = idx(m, n), idx(mp, np_)
    grid = gabor_entry_oracle(op, a, b, P, mode="grid")
    contour = gabor_entry_oracle(op, a, b, P, mode="contour")
    assert abs(grid - contour) < 1e-10


def test_contour_keeps_relative_accuracy_for_tiny_entries():
    # far below the grid's absolute floor
    a, b = idx(3, 3), idx(-3, -3)
    for op, exact in [(Heat(1.0, 0.1), heat_entry_modulus(a, b, 1.0, 0.1, 1, P)),
                      (Repulsor(1.0), repulsor_entry_modulus(a, b, 1.0, 1, P))]:
        assert exact < 1e-12
        assert gabor_entry_oracle(op, a, b, P) == pytest.approx(exact, rel=1e-10)


def test_two_dimensional_contour_factorizes():
    p2 = LatticeParams(1.0, 0.5, 2)
    a, b = LatticeIndex([1, 0], [1, -1]), LatticeIndex([0, 2], [0, 1])
    prod = (gabor_entry_oracle(Heat(1.0, 0.5), idx(1, 1), idx(0, 0), P)
            * gabor_entry_oracle(Heat(1.0, 0.5), idx(0, -1), idx(2, 1), P))
    assert gabor_entry_oracle(Heat(1.0, 0.5, 2), a, b, p2) == pytest.approx(prod, rel=1e-12)


def test_oracle_mode_and_dimension_checks():
    with pytest.raises(InvalidParameterError):
        gabor_entry_oracle_complex(Heat(1.0, 0.1), idx(0, 0), idx(0, 0), P, mode="fft")
    with pytest.raises(InvalidParameterError):
        gabor_entry_oracle_complex(Heat(1.0, 0.1, 2), idx(0, 0), idx(0, 0), P)
    with pytest.raises(InvalidParameterError):
        gabor_entry_oracle_complex(GenHeat(2, 1.0), idx(0, 0), idx(0, 0), P, mode="contour")


def test_heat_matrix_is_hermitian():
    _, T = oracle_matrix(Heat(1.0, 0.1), P, 2)
    assert np.max(np.abs(T - T.conj().T)) < 1e-15


def test_repulsor_matrix_matches_entries():
    idx_list, T = oracle_matrix(Repulsor(0.5), P, 1)
    i, j = 2, 7
    single = gabor_entry_oracle_complex(Repulsor(0.5), idx_list[i], idx_list[j], P)
    assert abs(T[i, j] - single) < 1e-14


def test_oracle_window_values():
    w = oracle_window(Heat(1.0, 0.1), P, 1)
    for (a, b), v in w.items():
        assert v == pytest.approx(heat_entry_modulus(a, b, 1.0, 0.1, 1, P), rel=1e-9)


# ------------------------------------------------ generalized heat oracle


def test_genheat_grid_widens_with_slower_tails():
    g1 = genheat_oracle_grid(1, 0.5, P, 4)
    g3 = genheat_oracle_grid(3, 1.0, P, 4)
    assert g3.extent >= g1.extent >= 8
    assert genheat_kernel_rate(1, 1.0) == pytest.approx(1 / 4, rel=1e-15)  # e^{-x²/(4t)}


@pytest.mark.parametrize("k,t", [(2, 0.5), (3, 1.0)])
def test_genheat_oracle_grid_converged(k, t):
    # Richardson-style check: doubling the period and the resolution changes nothing
    _, T = oracle_matrix(GenHeat(k, t), P, 2)
    wide = genheat_oracle_grid(k, t, P, 2)
    L = 2 * wide.extent
    _, T2 = oracle_matrix(GenHeat(k, t), P, 2, Grid.symmetric(L, 256 * int(L) + 1))
    assert np.max(np.abs(T - T2)) < 1e-13


def test_genheat_k1_matches_heat_formula():
    op = GenHeat(1, 0.5)
    for a, b in [(idx(0, 0), idx(0, 0)), (idx(1, 2), idx(-1, 1)), (idx(2, -2), idx(2, 2))]:
        assert gabor_entry_oracle(op, a, b, P) == pytest.approx(
            heat_entry_modulus(a, b, 1.0, 0.5, 1, P), rel=1e-9)


# --------------------------------------------------- super-exponential FT


def test_superexp_oracle_gaussian_case():
    w = np.linspace(-4, 4, 33)
    np.testing.assert_allclose(superexp_ft_oracle(1, math.pi, w), np.exp(-math.pi * w * w),
                               rtol=5e-12)


@pytest.mark.parametrize("k", [2, 3])
def test_superexp_oracle_matches_fft(k):
    grid = Grid.symmetric(8.0, 4096)
    x = grid.axis()
    F = continuous_ft(point_shift_sample([0.0], [0.0], grid).with_values(np.exp(-x ** (2 * k))))
    w = F.grid.axis()
    sel = np.abs(w) <= 4
    fft = np.abs(F.values[sel])
    ref = superexp_ft_oracle(k, 1.0, w[sel])
    assert np.max(np.abs(fft - ref)) < 1e-11


def test_superexp_oracle_validation():
    with pytest.raises(InvalidParameterError):
        superexp_ft_oracle(0, 1.0, [0.0])
    with pytest.raises(InvalidParameterError):
        superexp_ft_oracle(2, -1.0, [0.0])
