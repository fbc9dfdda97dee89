import csv
import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import slack_sweeps as sw
from gabormat import (
    ConditioningError,
    GenHeat,
    Grid,
    Heat,
    IncompatibleGridsError,
    InvalidParameterError,
    LatticeParams,
    NotAFrameError,
    PhaseUnavailableError,
    SampledFunction,
    UnsupportedDimensionError,
    apply_via_gabor,
    build_sparse_matrix,
    dual_window,
    frame_bounds_estimate,
    heat_symbol,
    multiplier_apply,
    reconstruct,
    support_radius,
)
from gabormat.core_tf import atom_values
from gabormat.oracle import apply_operator
from gabormat.sparsity import threshold_error_bound

P = LatticeParams(1.0, 0.5, 1)
HEAT = Heat(1.0, 0.1)


@pytest.fixture(scope="module")
def dual():
    return dual_window(P, 8)


@pytest.fixture(scope="module")
def heat_full():
    return build_sparse_matrix(HEAT, P, 6, 0.0, source="oracle")


def on(dual, m, n):
    return SampledFunction(dual.grid, atom_values(dual.grid, [m], [n]))


# ---------------------------------------------------------------- duals


def test_dual_window_converges(dual):
    assert dual.residual < 1e-10
    assert dual.grid.periodic and dual.grid.period == pytest.approx(16.0)
    # γ is even and real for the centered Gaussian
    g = dual.samples.flat()
    assert np.max(np.abs(g.imag)) == 0.0
    inner = np.sum(g * atom_values(dual.grid, [0.0], [0.0]).real) * dual.grid.step
    assert inner > 0


def test_dual_window_errors():
    with pytest.raises(NotAFrameError):
        dual_window(LatticeParams(1.0, 1.0), 8)
    with pytest.raises(UnsupportedDimensionError):
        dual_window(LatticeParams(1.0, 0.5, 2), 8)


def test_stalled_iteration_reports_frame_bounds():
    with pytest.raises(ConditioningError) as exc:
        dual_window(P, 8, maxiter=1)
    assert exc.value.a_est == pytest.approx(0.8284155687504857, rel=1e-10)
    assert exc.value.b_est == pytest.approx(2.0149674406901625, rel=1e-10)


@pytest.mark.parametrize("m,n", [(0, 0), (2, 0), (-2, 1), (1.5, -2), (-1, 0.75)])
def test_reconstruction_of_shifted_gaussians(dual, m, n):
    f = on(dual, m, n)
    err = (reconstruct(f, P, dual, 8) - f).norm() / f.norm()
    assert err < 1e-4


def test_reconstruction_improves_with_radius(dual):
    f = on(dual, 1.0, 0.5)
    errs = [(reconstruct(f, P, dual, R) - f).norm() / f.norm() for R in (4, 6, 8)]
    assert errs[0] > errs[1] > errs[2]


def test_reconstruction_grid_check(dual):
    f = SampledFunction(Grid.reference(1), np.zeros(1024))
    with pytest.raises(IncompatibleGridsError):
        reconstruct(f, P, dual)


# ------------------------------------------------------------- thresholding


@settings(max_examples=30, deadline=None)
@given(a=st.floats(1e-12, 1.0), b=st.floats(1e-12, 1.0))
def test_kept_count_monotone_in_eps(a, b):
    lo, hi = sorted((a, b))
    k_lo = build_sparse_matrix(HEAT, P, 3, lo).kept_count
    k_hi = build_sparse_matrix(HEAT, P, 3, hi).kept_count
    assert k_lo >= k_hi


def test_eps_zero_keeps_everything():
    M = build_sparse_matrix(HEAT, P, 3, 0.0)
    assert M.kept_count == M.total_considered == 49 ** 2


def test_ties_are_kept():
    M = build_sparse_matrix(HEAT, P, 2, 0.0)
    level = float(np.sort(M.moduli)[len(M.moduli) // 2])
    at = build_sparse_matrix(HEAT, P, 2, level)
    assert np.any(at.moduli == level)
    assert np.all(at.moduli >= level)


def test_invalid_thresholds_and_sources():
    with pytest.raises(InvalidParameterError):
        build_sparse_matrix(HEAT, P, 2, -1e-3)
    with pytest.raises(InvalidParameterError):
        build_sparse_matrix(HEAT, P, 2, float("nan"))
    with pytest.raises(InvalidParameterError):
        build_sparse_matrix(HEAT, P, 2, 1e-3, source="magic")
    with pytest.raises(InvalidParameterError):
        build_sparse_matrix(GenHeat(2, 1.0), P, 2, 1e-3)
    with pytest.raises(InvalidParameterError):
        build_sparse_matrix(Heat(1.0, 0.1, 2), P, 2, 1e-3)


def test_kept_count_fixture():
    stored = sw.load()["heat_kept"]
    kept, total = sw.heat_kept_fraction(stored["eps"], stored["radius"])
    assert (kept, total) == (stored["kept"], stored["considered"])
    assert kept < 0.2 * total


def test_kept_count_grows_linearly_with_radius():
    stored = sw.load()["radius_sweep"]
    kept, slope = sw.radius_sweep(stored["eps"], stored["radii"])
    assert kept == stored["kept"]
    assert sw.within(slope, stored["slope"])
    # banded: growth per unit radius is linear, not quadratic like the full window
    steps = np.diff(kept)
    assert np.all(steps[2:] == steps[2])


def test_support_radius_shrinks_with_eps():
    radii = [support_radius(build_sparse_matrix(HEAT, P, 6, e)) for e in (1e-8, 1e-4, 1e-2)]
    assert radii[0] >= radii[1] >= radii[2] > 0
    empty = build_sparse_matrix(HEAT, P, 1, 10.0)
    assert empty.kept_count == 0 and support_radius(empty) == 0.0


def test_modulus_only_matrix_has_no_phase(dual):
    M = build_sparse_matrix(HEAT, P, 3, 1e-6)
    assert not M.has_phase
    with pytest.raises(PhaseUnavailableError):
        M.dense()
    with pytest.raises(PhaseUnavailableError):
        apply_via_gabor(HEAT, on(dual, 0, 0), P, dual, M)


def test_oracle_moduli_agree_with_analytic_keep_decisions(heat_full):
    assert heat_full.has_phase
    assert np.max(np.abs(np.abs(heat_full.values) - heat_full.moduli)) < 1e-13 * heat_full.max_modulus


def test_exports(heat_full):
    M = build_sparse_matrix(HEAT, P, 2, 1e-3, source="oracle")
    rows = list(csv.reader(io.StringIO(M.to_csv())))
    assert rows[0] == ["m_idx1", "n_idx1", "mp_idx1", "np_idx1", "re", "im", "modulus"]
    assert len(rows) == M.kept_count + 1
    summary = json.loads(M.summary_json())
    assert summary["kept"] == M.kept_count and summary["considered"] == 625
    assert len(M.kept) == M.kept_count
    assert M.dense().shape == (25, 25)


# ------------------------------------------------------------ application


def test_apply_matches_multiplier(dual, heat_full):
    f = on(dual, 0, 0)
    ref = multiplier_apply(heat_symbol(1.0, 0.1), f)
    out = apply_via_gabor(HEAT, f, P, dual, heat_full)
    assert (out - ref).norm() / ref.norm() < 1e-8


@pytest.mark.parametrize("eps", [1e-2, 1e-4, 1e-6])
def test_threshold_error_bound_holds(dual, heat_full, eps):
    f = on(dual, 1.0, -0.5)
    a_est, _ = frame_bounds_estimate(P, 8)
    full = apply_via_gabor(HEAT, f, P, dual, heat_full)
    cut = build_sparse_matrix(HEAT, P, 6, eps, source="oracle")
    err = (full - apply_via_gabor(HEAT, f, P, dual, cut)).norm()
    dropped = cut.total_considered - cut.kept_count
    assert err <= threshold_error_bound(dropped, eps, a_est, f.norm())


def test_apply_generalized_heat_on_wide_torus():
    # the k=2 kernel tail is still ~1e-2 at |x| = 8, so the torus must be wider
    d16 = dual_window(P, 16)
    f = on(d16, 1.0, 0.5)
    op = GenHeat(2, 0.5)
    M = build_sparse_matrix(op, P, 14, 0.0, source="oracle")
    ref = apply_operator(op, f)
    assert (apply_via_gabor(op, f, P, d16, M) - ref).norm() / ref.norm() < 1e-4


def test_apply_checks_operator_and_grid(dual, heat_full):
    with pytest.raises(InvalidParameterError):
        apply_via_gabor(Heat(2.0, 0.1), on(dual, 0, 0), P, dual, heat_full)
    bad = SampledFunction(Grid.reference(1), np.ones(1024))
    with pytest.raises(IncompatibleGridsError):
        apply_via_gabor(HEAT, bad, P, dual, heat_full)


def test_threshold_bound_formula():
    assert threshold_error_bound(100, 1e-3, 0.5, 2.0) == pytest.approx(10 * 1e-3 * 2.0 / 0.5)
    assert math.isfinite(threshold_error_bound(0, 0.0, 1.0, 1.0))

