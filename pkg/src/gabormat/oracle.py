"""Reference computations that do not use any closed-form entry formula.

Two independent routes are provided:

* ``grid``: atoms are sampled and transformed numerically. Multiplier entries
  are trapezoid sums ``∫ σ·F(π(λ)g)·conj(F(π(ν)g))`` on the frequency grid
  (Plancherel, so slowly decaying kernels cannot wrap around the period); the
  repulsor is applied by quadrature of its integral kernel and paired in ``x``.
  Absolute accuracy is near machine precision.
* ``contour``: the entry is written as an integral of an entire function built
  from the Fourier transforms of the atoms, and evaluated by the trapezoid rule on a
  contour through the complex saddle (see :mod:`gabormat.contour`). This keeps
  relative accuracy for entries far below double-precision absolute resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .analytic import GaborMatrixWindow, GenHeat, Heat, Repulsor
from .contour import saddle_quadrature
from .core_tf import (
    Grid,
    LatticeIndex,
    LatticeParams,
    SampledFunction,
    atom_values,
    continuous_ft,
    inner_product,
    inverse_ft,
    lattice_indices,
    tf_shift_sample,
)
from .errors import InvalidParameterError
from .metaplectic import repulsor_apply

LOG_FLUSH = -700.0


@dataclass(frozen=True)
class MultiplierSymbol:
    """Fourier multiplier ``σ(ω)``; ``log_evaluator`` (if given) is used with flushing."""

    evaluator: Callable | None = None
    description: str = ""
    log_evaluator: Callable | None = None

    def __call__(self, omega) -> np.ndarray:
        omega = np.asarray(omega, float)
        if self.log_evaluator is not None:
            lv = np.asarray(self.log_evaluator(omega), complex)
            out = np.exp(np.where(lv.real < LOG_FLUSH, 0.0, lv))
            return np.where(lv.real < LOG_FLUSH, 0.0, out)
        return np.asarray(self.evaluator(omega), complex)


def identity_symbol() -> MultiplierSymbol:
    return MultiplierSymbol(lambda w: np.ones(np.shape(w)[:-1]), "identity")


def heat_symbol(rho: float, t: float) -> MultiplierSymbol:
    c = 4.0 * math.pi ** 2 * rho * t
    return MultiplierSymbol(None, f"heat rho={rho} t={t}",
                            lambda w: -c * np.sum(np.asarray(w) ** 2, axis=-1))


def genheat_symbol(k: int, t: float) -> MultiplierSymbol:
    return MultiplierSymbol(
        None, f"genheat k={k} t={t}",
        lambda w: -t * (2.0 * math.pi * np.abs(np.asarray(w)[..., 0])) ** (2 * k))


def operator_symbol(op) -> MultiplierSymbol:
    if isinstance(op, Heat):
        return heat_symbol(op.rho, op.t)
    if isinstance(op, GenHeat):
        return genheat_symbol(op.k, op.t)
    raise InvalidParameterError("only multiplier operators have a symbol")


def multiplier_apply(sym: MultiplierSymbol, f: SampledFunction) -> SampledFunction:
    """``F⁻¹(σ·Ff)`` using the continuous-transform approximation."""
    F = continuous_ft(f)
    mesh = F.grid.mesh()
    omega = np.stack(mesh, axis=-1)
    return inverse_ft(F.with_values(F.values * sym(omega)), f.grid)


def apply_operator(op, f: SampledFunction) -> SampledFunction:
    if isinstance(op, Repulsor):
        return repulsor_apply(f, op.t)
    return multiplier_apply(operator_symbol(op), f)


# ----------------------------------------------------------------- atoms


def _atom(lam: LatticeIndex, params: LatticeParams, grid: Grid) -> SampledFunction:
    if grid.periodic:
        m, n = lam.physical(params)
        return SampledFunction(grid, atom_values(grid, m, n))
    return tf_shift_sample(lam, params, grid)


def genheat_kernel_rate(k: int, t: float) -> float:
    """Rate ``A`` in the kernel tail ``|F⁻¹σ_k(x)| ≈ e^{-A|x|^{2k/(2k-1)}}``.

    Steepest descent through the complex saddle of ``-t u^{2k} + iux`` gives
    ``A = ((2k-1)/(2k))·(2kt)^{-1/(2k-1)}·sin(π/(2(2k-1)))``.
    """
    q = 2 * k - 1
    return (q / (2 * k)) * (2 * k * t) ** (-1.0 / q) * math.sin(math.pi / (2 * q))


def genheat_oracle_grid(k: int, t: float, params: LatticeParams, radius: int,
                        tail: float = 1e-13) -> Grid:
    """Closed grid wide enough that the kernel tail cannot alias across the period."""
    x_tail = (math.log(1.0 / tail) / genheat_kernel_rate(k, t)) ** ((2 * k - 1) / (2 * k))
    L = max(8, math.ceil(0.5 * x_tail + params.alpha * radius + 2))
    return Grid.symmetric(L, 128 * L + 1, 1)


def _default_grid(params: LatticeParams, grid: Grid | None, op=None, radius: int = 4) -> Grid:
    if grid is not None:
        return grid
    if isinstance(op, GenHeat):
        return genheat_oracle_grid(op.k, op.t, params, radius)
    ref = Grid.reference(params.dim)
    # edge atoms need about 6 units of margin; widen at the reference step
    L = math.ceil(params.alpha * radius + 6)
    if L <= ref.extent:
        return ref
    return Grid.symmetric(L, int(round(2 * L / ref.step)) + 1, params.dim)


# ------------------------------------------------------------ contour forms


def _log_ft_atom(w, m, n):
    return -2j * math.pi * m * (w - n) - math.pi * (w - n) ** 2


def _log_ft_atom_conj(w, m, n):
    # analytic continuation of the conjugate of the transform from the real axis
    return 2j * math.pi * m * (w - n) - math.pi * (w - n) ** 2


def _log_atom_conj(x, m, n):
    return -2j * math.pi * n * x - math.pi * (x - m) ** 2


def _heat_axis(m, n, mp, np_, rho, t):
    c = 4.0 * math.pi ** 2 * rho * t

    def phi(z):
        w = z[:, 0]
        return -c * w * w + _log_ft_atom(w, m, n) + _log_ft_atom_conj(w, mp, np_)
    return saddle_quadrature(phi, 1)


def _repulsor_axis(m, n, mp, np_, t):
    ch, tau = math.cosh(t), math.tanh(t)

    def phi(z):
        x, w = z[:, 0], z[:, 1]
        kern = 1j * math.pi * tau * x * x + 2j * math.pi * x * w / ch - 1j * math.pi * tau * w * w
        return kern + _log_ft_atom(w, m, n) + _log_atom_conj(x, mp, np_)
    res = saddle_quadrature(phi, 2)
    return res, -0.5 * math.log(ch)


def _contour_entry(op, lam, nu, params):
    m, n = lam.physical(params)
    mp, np_ = nu.physical(params)
    log_abs, phase = 0.0, 0.0
    for i in range(params.dim):
        if isinstance(op, Heat):
            r = _heat_axis(m[i], n[i], mp[i], np_[i], op.rho, op.t)
            log_abs += r.log_abs
        elif isinstance(op, Repulsor):
            r, pref = _repulsor_axis(m[i], n[i], mp[i], np_[i], op.t)
            log_abs += r.log_abs + pref
        else:
            raise InvalidParameterError("contour mode covers heat and repulsor only")
        phase += r.phase
    return log_abs, phase


# ------------------------------------------------------------ public API


def gabor_entry_oracle_complex(op, lam: LatticeIndex, nu: LatticeIndex, params: LatticeParams,
                               grid: Grid | None = None, *, mode: str = "grid") -> complex:
    """Complex entry ``⟨T π(λ)g, π(ν)g⟩``."""
    if op.dim != params.dim:
        raise InvalidParameterError("operator and lattice dimensions differ")
    if mode == "contour":
        la, ph = _contour_entry(op, lam, nu, params)
        return math.exp(la) * complex(math.cos(ph), math.sin(ph))
    if mode != "grid":
        raise InvalidParameterError("mode must be 'grid' or 'contour'")
    grid = _default_grid(params, grid, op, radius=int(max(
        np.max(np.abs(lam.m_idx)), np.max(np.abs(nu.m_idx)))))
    if isinstance(op, Repulsor):
        Tf = apply_operator(op, _atom(lam, params, grid))
        return inner_product(Tf, _atom(nu, params, grid))
    # Plancherel: ⟨σ·F(π(λ)g), F(π(ν)g)⟩ on the frequency grid, free of periodic wrap
    Ff = continuous_ft(_atom(lam, params, grid))
    Fh = continuous_ft(_atom(nu, params, grid))
    sig = operator_symbol(op)(np.stack(Ff.grid.mesh(), axis=-1))
    return inner_product(Ff.with_values(Ff.values * sig), Fh)


def gabor_entry_oracle_log(op, lam, nu, params, grid=None, *, mode="auto") -> float:
    """``log|⟨T π(λ)g, π(ν)g⟩|``; ``auto`` uses the contour route whenever available."""
    if mode == "auto":
        mode = "grid" if isinstance(op, GenHeat) else "contour"
    if mode == "contour":
        return _contour_entry(op, lam, nu, params)[0]
    v = abs(gabor_entry_oracle_complex(op, lam, nu, params, grid, mode="grid"))
    return math.log(v) if v > 0 else -math.inf


def gabor_entry_oracle(op, lam: LatticeIndex, nu: LatticeIndex, params: LatticeParams,
                       grid: Grid | None = None, *, mode: str = "auto") -> float:
    """Modulus ``|⟨T π(λ)g, π(ν)g⟩|`` of a Gabor matrix entry."""
    return math.exp(gabor_entry_oracle_log(op, lam, nu, params, grid, mode=mode))


def identity_entry_oracle(lam, nu, params, grid=None) -> float:
    """``|⟨π(λ)g, π(ν)g⟩|`` by direct quadrature in ``x``."""
    grid = _default_grid(params, grid)
    return abs(inner_product(_atom(lam, params, grid), _atom(nu, params, grid)))


def oracle_matrix(op, params: LatticeParams, radius: int, grid: Grid | None = None):
    """Complex matrix ``T[i, j] = ⟨T π(λ_i)g, π(λ_j)g⟩`` over the index window.

    Returns ``(indices, T)`` with ``indices`` from :func:`lattice_indices`.
    """
    grid = _default_grid(params, grid, op, radius)
    idx = lattice_indices(params.dim, radius)
    if isinstance(op, Repulsor):
        atoms = np.array([_atom(l, params, grid).flat() for l in idx])
        images = np.array([apply_operator(op, _atom(l, params, grid)).flat() for l in idx])
        w = grid.weights().reshape(-1)
    else:
        spectra = [continuous_ft(_atom(l, params, grid)) for l in idx]
        fgrid = spectra[0].grid
        atoms = np.array([F.flat() for F in spectra])
        images = atoms * operator_symbol(op)(np.stack(fgrid.mesh(), axis=-1)).reshape(-1)[None, :]
        w = fgrid.weights().reshape(-1)
    T = (images * w[None, :]) @ np.conj(atoms).T
    return idx, T


def oracle_window(op, params: LatticeParams, radius: int, grid: Grid | None = None
                  ) -> GaborMatrixWindow:
    idx, T = oracle_matrix(op, params, radius, grid)
    entries = {(idx[i], idx[j]): float(abs(T[i, j]))
               for i in range(len(idx)) for j in range(len(idx))}
    return GaborMatrixWindow(params, radius, entries)


# ---------------------------------------------- transform of e^{-α x^{2k}}


def superexp_ft_oracle(k: int, alpha_coeff: float, omega, *, points: int = 40001) -> np.ndarray:
    """``|f̂(ω)|`` for ``f(x) = e^{-α x^{2k}}`` with relative accuracy.

    The real line is moved to ``Im x = c``, the common height of the two saddles
    ``z`` of ``-αz^{2k} - 2πiωz`` that dominate the transform: ``|z| = (π|ω|/(kα))^{1/(2k-1)}``,
    ``c = -sign(ω)·|z|·sin(π/(2(2k-1)))``. Along that line the integrand has no
    large cancelling oscillation, so the trapezoid sum keeps its relative precision
    where an FFT bottoms out at rounding level.
    """
    if int(k) != k or k < 1 or not alpha_coeff > 0:
        raise InvalidParameterError("need integer k >= 1 and alpha_coeff > 0")
    omega = np.atleast_1d(np.asarray(omega, float))
    q = 2 * k - 1
    out = np.empty(omega.size)
    for i, w in enumerate(omega):
        r = (math.pi * abs(w) / (k * alpha_coeff)) ** (1.0 / q)
        c = -math.copysign(r * math.sin(math.pi / (2 * q)), w) if w != 0 else 0.0
        half = 2.0 * r + (60.0 / alpha_coeff) ** (1.0 / (2 * k)) + 2.0
        x = np.linspace(-half, half, points)
        z = x + 1j * c
        logv = -alpha_coeff * z ** (2 * k) - 2j * math.pi * w * z
        top = float(np.max(logv.real))
        s = np.sum(np.exp(logv - top)) * (x[1] - x[0])
        out[i] = math.exp(top) * abs(s)
    return out
