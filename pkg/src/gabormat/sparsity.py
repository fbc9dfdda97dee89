"""Thresholded Gabor matrices, canonical dual windows and operator application.

All frame computations run on a periodic grid whose period is tied to the lattice
truncation: ``index_radius`` time positions on either side of the origin give the
period ``2α·index_radius``, and every lattice modulation is sampled exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import cg

from .analytic import (
    GenHeat,
    Heat,
    Repulsor,
    heat_log_modulus_array,
    operator_to_dict,
    repulsor_log_modulus_array,
)
from .core_tf import (
    FrameOperator,
    Grid,
    LatticeIndex,
    LatticeParams,
    SampledFunction,
    _fmt,
    atom_values,
    frame_bounds_estimate,
    lattice_indices,
)
from .errors import (
    ConditioningError,
    IncompatibleGridsError,
    InvalidParameterError,
    NotAFrameError,
    PhaseUnavailableError,
    UnsupportedDimensionError,
)
from .oracle import oracle_matrix


@dataclass(frozen=True)
class DualWindow:
    samples: SampledFunction
    residual: float
    params: LatticeParams
    index_radius: int
    iterations: int

    @property
    def grid(self) -> Grid:
        return self.samples.grid


def dual_window(params: LatticeParams, index_radius: int = 8, grid: Grid | None = None, *,
                rtol: float = 1e-12, maxiter: int = 1000) -> DualWindow:
    """Canonical dual ``γ = S⁻¹g`` by conjugate gradients on the periodic frame operator."""
    if not params.frame_valid:
        raise NotAFrameError(f"alpha*beta = {params.alpha * params.beta:g} >= 1: no Gaussian frame")
    if params.dim != 1:
        raise UnsupportedDimensionError("dual windows are computed in one dimension")
    S = FrameOperator(params, index_radius, grid)
    g = atom_values(S.grid, 0.0, 0.0).real
    its = [0]

    def count(_):
        its[0] += 1

    gamma, info = cg(S.as_linear_operator(float), g, rtol=rtol, atol=0.0, maxiter=maxiter,
                     callback=count)
    residual = float(np.linalg.norm(S.matvec(gamma) - g) / np.linalg.norm(g))
    if info != 0 or residual > 1e-8:
        a, b = frame_bounds_estimate(params, max(index_radius, 4), S.grid if index_radius >= 4 else None)
        raise ConditioningError(
            f"conjugate gradients stalled at residual {residual:.2e} (A≈{a:.3e}, B≈{b:.3e})", a, b)
    return DualWindow(SampledFunction(S.grid, gamma), residual, params, int(index_radius), its[0])


def _atom_rows(params: LatticeParams, grid: Grid, idx, window: np.ndarray) -> np.ndarray:
    """Rows ``π(λ)w`` for a window sampled on a lattice-commensurate torus."""
    shift = int(round(params.alpha / grid.step))
    x = grid.axis()
    rows = np.empty((len(idx), grid.n), complex)
    for i, lam in enumerate(idx):
        rows[i] = np.roll(window, shift * lam.m_idx[0]) * np.exp(2j * math.pi * params.beta
                                                                 * lam.n_idx[0] * x)
    return rows


def _check_on_dual_grid(f: SampledFunction, dual: DualWindow):
    if not f.grid.matches(dual.grid):
        raise IncompatibleGridsError("f must be sampled on the dual window's periodic grid")


def analysis(f: SampledFunction, params: LatticeParams, window: np.ndarray, index_radius: int):
    idx = lattice_indices(1, index_radius)
    rows = _atom_rows(params, f.grid, idx, window)
    return idx, rows, (np.conj(rows) @ (f.flat() * f.grid.weights_1d()))


def reconstruct(f: SampledFunction, params: LatticeParams, dual: DualWindow,
                index_radius: int = 6) -> SampledFunction:
    """``Σ_λ ⟨f, π(λ)g⟩ π(λ)γ`` over indices with max-norm ``≤ index_radius``."""
    _check_on_dual_grid(f, dual)
    g = atom_values(f.grid, 0.0, 0.0)
    _, _, coeffs = analysis(f, params, g, index_radius)
    gam_rows = _atom_rows(params, f.grid, lattice_indices(1, index_radius), dual.samples.flat())
    return SampledFunction(f.grid, coeffs @ gam_rows)


# ------------------------------------------------------------ sparse matrices


@dataclass
class SparseGaborMatrix:
    """Kept entries of a Gabor matrix window.

    Entry ``(i, j)`` is ``⟨T π(λ_i)g, π(λ_j)g⟩`` with ``λ`` enumerated by
    :func:`lattice_indices`. ``values`` is ``None`` for modulus-only matrices.
    """

    params: LatticeParams
    op: object
    radius: int
    threshold: float
    rows: np.ndarray
    cols: np.ndarray
    moduli: np.ndarray
    values: np.ndarray | None
    total_considered: int
    max_modulus: float

    @property
    def has_phase(self) -> bool:
        return self.values is not None

    @property
    def indices(self) -> list[LatticeIndex]:
        return lattice_indices(self.params.dim, self.radius)

    @property
    def kept_count(self) -> int:
        return int(self.rows.size)

    @property
    def kept(self):
        idx = self.indices
        vals = self.values if self.values is not None else self.moduli
        return [((idx[i], idx[j]), v) for i, j, v in zip(self.rows, self.cols, vals)]

    def dense(self) -> np.ndarray:
        if self.values is None:
            raise PhaseUnavailableError("modulus-only matrix")
        K = len(self.indices)
        return coo_matrix((self.values, (self.rows, self.cols)), shape=(K, K)).toarray()

    def summary(self) -> dict:
        return {"eps": self.threshold, "kept": self.kept_count,
                "considered": self.total_considered, "support_radius": support_radius(self)}

    def summary_json(self) -> str:
        return json.dumps(self.summary(), sort_keys=True)

    def to_csv(self) -> str:
        d = self.params.dim
        idx = self.indices
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"m_idx{i + 1}" for i in range(d)] + [f"n_idx{i + 1}" for i in range(d)]
                   + [f"mp_idx{i + 1}" for i in range(d)] + [f"np_idx{i + 1}" for i in range(d)]
                   + ["re", "im", "modulus"])
        for k in range(self.kept_count):
            lam, nu = idx[self.rows[k]], idx[self.cols[k]]
            if self.values is not None:
                re, im = _fmt(self.values[k].real), _fmt(self.values[k].imag)
            else:
                re = im = ""
            w.writerow([*lam.m_idx, *lam.n_idx, *nu.m_idx, *nu.n_idx, re, im,
                        _fmt(self.moduli[k])])
        return buf.getvalue()


def _index_coords(params: LatticeParams, idx):
    arr = np.array([l.as_tuple() for l in idx], float)
    d = params.dim
    return params.alpha * arr[:, :d], params.beta * arr[:, d:]


def _analytic_moduli(op, params, idx) -> np.ndarray:
    m, n = _index_coords(params, idx)
    a = (m[:, None, :], n[:, None, :], m[None, :, :], n[None, :, :])
    if isinstance(op, Heat):
        logs = heat_log_modulus_array(*a, op.rho, op.t)
    elif isinstance(op, Repulsor):
        logs = repulsor_log_modulus_array(*a, op.t)
    else:
        raise InvalidParameterError("no closed-form modulus for this operator; use source='oracle'")
    return np.exp(logs)


def build_sparse_matrix(op, params: LatticeParams, index_radius: int, eps: float,
                        source: str = "analytic", grid: Grid | None = None) -> SparseGaborMatrix:
    """Keep entries whose modulus is at least ``eps``.

    Keep/drop decisions use the closed-form modulus whenever one exists; with
    ``source='oracle'`` the complex values (and thus phases) come from the grid
    oracle evaluated on ``grid``.
    """
    if not eps >= 0:
        raise InvalidParameterError("eps must be nonnegative")
    if op.dim != params.dim:
        raise InvalidParameterError("operator and lattice dimensions differ")
    idx = lattice_indices(params.dim, index_radius)
    values = None
    if source == "oracle":
        _, values = oracle_matrix(op, params, index_radius, grid)
    elif source != "analytic":
        raise InvalidParameterError("source must be 'analytic' or 'oracle'")
    if isinstance(op, GenHeat):
        if values is None:
            raise InvalidParameterError("generalized heat has no closed-form modulus; use source='oracle'")
        moduli = np.abs(values)
    else:
        moduli = _analytic_moduli(op, params, idx)
    keep = moduli >= eps
    rows, cols = np.nonzero(keep)
    return SparseGaborMatrix(
        params=params, op=op, radius=int(index_radius), threshold=float(eps),
        rows=rows, cols=cols, moduli=moduli[rows, cols],
        values=None if values is None else values[rows, cols],
        total_considered=int(moduli.size), max_modulus=float(moduli.max()))


def support_radius(matrix: SparseGaborMatrix) -> float:
    """Largest phase-space distance ``|λ - ν|`` among kept entries (0 if none)."""
    if matrix.kept_count == 0:
        return 0.0
    m, n = _index_coords(matrix.params, matrix.indices)
    dm = m[matrix.rows] - m[matrix.cols]
    dn = n[matrix.rows] - n[matrix.cols]
    return float(np.sqrt(np.max(np.sum(dm * dm, axis=1) + np.sum(dn * dn, axis=1))))


def apply_via_gabor(op, f: SampledFunction, params: LatticeParams, dual: DualWindow,
                    matrix: SparseGaborMatrix) -> SampledFunction:
    """``Tf ≈ Σ_ν (Σ_λ T[λ, ν] ⟨f, π(λ)γ⟩) π(ν)γ`` with the kept entries only."""
    if not matrix.has_phase:
        raise PhaseUnavailableError(
            "modulus-only matrix; build it with source='oracle' to obtain complex entries")
    if operator_to_dict(op) != operator_to_dict(matrix.op):
        raise InvalidParameterError("matrix was built for a different operator")
    if params.dim != 1:
        raise UnsupportedDimensionError("operator application is one-dimensional")
    _check_on_dual_grid(f, dual)
    gam = dual.samples.flat()
    _, rows, c = analysis(f, params, gam, matrix.radius)
    K = rows.shape[0]
    T = coo_matrix((matrix.values, (matrix.rows, matrix.cols)), shape=(K, K)).tocsr()
    d = T.T @ c
    return SampledFunction(f.grid, d @ rows)


def threshold_error_bound(dropped: int, eps: float, a_est: float, f_norm: float) -> float:
    """``‖T_full f - T_eps f‖ ≤ √dropped · eps · ‖f‖ / A`` for dual-window analysis/synthesis.

    Both dual analysis and dual synthesis are bounded by ``1/√A``, and the dropped
    block has Frobenius norm at most ``√dropped · eps``.
    """
    return math.sqrt(dropped) * eps * f_norm / a_est
