"""Time-frequency substrate: grids, lattices, Gaussian atoms, quadrature,
Fourier transforms, spectrograms and the periodic Gabor frame operator.

Conventions
-----------
* Fourier transform: ``f̂(ω) = ∫ f(x) e^{-2πi x·ω} dx``.
* Time-frequency shift: ``π(m, n) g(x) = e^{2πi n·x} g(x - m)``.
* Window: ``g(x) = e^{-π|x|²}``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh
from scipy.special import erfc

from .errors import (
    IncompatibleGridsError,
    InvalidParameterError,
    IterationLimitError,
    SupportTruncationError,
    TruncationWarning,
    UnsupportedDimensionError,
)

SUPPORT_TOL = 1e-12
DECAY_TOL = 1e-12


# ---------------------------------------------------------------- lattices


@dataclass(frozen=True)
class LatticeParams:
    """Separable lattice ``αZ^d × βZ^d``."""

    alpha: float
    beta: float
    dim: int = 1

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise InvalidParameterError("alpha and beta must be positive")
        if int(self.dim) != self.dim or self.dim < 1:
            raise InvalidParameterError("dim must be a positive integer")
        object.__setattr__(self, "dim", int(self.dim))

    @property
    def frame_valid(self) -> bool:
        return float(self.alpha) * float(self.beta) < 1.0

    def to_dict(self):
        return {"alpha": float(self.alpha), "beta": float(self.beta), "dim": self.dim}


@dataclass(frozen=True)
class LatticeIndex:
    """Integer lattice coordinates; the physical point is ``(α·m_idx, β·n_idx)``."""

    m_idx: tuple
    n_idx: tuple

    def __init__(self, m_idx, n_idx):
        m = tuple(int(v) for v in np.atleast_1d(m_idx))
        n = tuple(int(v) for v in np.atleast_1d(n_idx))
        if len(m) != len(n):
            raise InvalidParameterError("m_idx and n_idx must have equal length")
        object.__setattr__(self, "m_idx", m)
        object.__setattr__(self, "n_idx", n)

    @property
    def dim(self) -> int:
        return len(self.m_idx)

    def physical(self, params: LatticeParams):
        self._check(params)
        return (params.alpha * np.array(self.m_idx, float),
                params.beta * np.array(self.n_idx, float))

    def _check(self, params):
        if self.dim != params.dim:
            raise InvalidParameterError(
                f"index of dimension {self.dim} used with lattice of dimension {params.dim}")

    def as_tuple(self):
        return self.m_idx + self.n_idx


def lattice_indices(dim: int, radius: int) -> list[LatticeIndex]:
    """All indices with max-norm ``≤ radius``, in lexicographic order."""
    rng = range(-radius, radius + 1)
    return [LatticeIndex(c[:dim], c[dim:]) for c in product(rng, repeat=2 * dim)]


def phase_space_distance(lam: LatticeIndex, nu: LatticeIndex, params: LatticeParams) -> float:
    m, n = lam.physical(params)
    mp, np_ = nu.physical(params)
    return float(math.sqrt(np.sum((m - mp) ** 2) + np.sum((n - np_) ** 2)))


# -------------------------------------------------------------------- grids


@dataclass(frozen=True)
class Grid:
    """Uniform tensor grid ``start + step·j``, ``j = 0..n-1`` on each axis.

    ``periodic`` grids use equal quadrature weights (the rectangle rule, which is
    the trapezoid rule for periodic integrands); closed grids use the composite
    trapezoid rule with half weights at both ends.
    """

    start: float
    step: float
    n: int
    dim: int = 1
    periodic: bool = False
    source: "Grid | None" = field(default=None, compare=False, repr=False)

    @classmethod
    def symmetric(cls, extent: float, n: int, dim: int = 1) -> "Grid":
        """Closed grid on ``[-L, L]^d`` with ``h = 2L/(N-1)``."""
        if extent <= 0 or n < 2:
            raise InvalidParameterError("need extent > 0 and at least two points")
        return cls(-float(extent), 2.0 * extent / (n - 1), int(n), int(dim))

    @classmethod
    def periodic_box(cls, extent: float, n: int, dim: int = 1) -> "Grid":
        """Torus ``[-L, L)^d`` sampled with ``h = 2L/N``."""
        if extent <= 0 or n < 2:
            raise InvalidParameterError("need extent > 0 and at least two points")
        return cls(-float(extent), 2.0 * extent / n, int(n), int(dim), periodic=True)

    @classmethod
    def reference(cls, dim: int = 1) -> "Grid":
        if dim == 1:
            return cls.symmetric(8.0, 1024, 1)
        if dim == 2:
            return cls.symmetric(6.0, 256, 2)
        raise UnsupportedDimensionError("no quadrature grid for dim > 2")

    @property
    def stop(self) -> float:
        return self.start + self.step * (self.n - 1)

    @property
    def extent(self) -> float:
        return max(abs(self.start), abs(self.stop))

    @property
    def period(self) -> float:
        return self.n * self.step

    def axis(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.n)

    def mesh(self) -> list[np.ndarray]:
        ax = self.axis()
        return np.meshgrid(*([ax] * self.dim), indexing="ij")

    def weights_1d(self) -> np.ndarray:
        w = np.full(self.n, self.step)
        if not self.periodic:
            w[0] = w[-1] = 0.5 * self.step
        return w

    def weights(self) -> np.ndarray:
        w1 = self.weights_1d()
        out = w1
        for _ in range(self.dim - 1):
            out = np.multiply.outer(out, w1)
        return out

    def reciprocal(self) -> "Grid":
        dw = 1.0 / (self.n * self.step)
        return Grid(-(self.n // 2) * dw, dw, self.n, self.dim, periodic=True, source=self)

    def matches(self, other: "Grid") -> bool:
        return (
            self.n == other.n
            and self.dim == other.dim
            and self.periodic == other.periodic
            and math.isclose(self.start, other.start, rel_tol=1e-13, abs_tol=1e-13)
            and math.isclose(self.step, other.step, rel_tol=1e-13, abs_tol=0.0)
        )

    def to_dict(self):
        return {"extent": self.extent, "points_per_axis": self.n, "dim": self.dim,
                "start": self.start, "step": self.step, "periodic": self.periodic}

    @classmethod
    def from_dict(cls, d):
        return cls(float(d["start"]), float(d["step"]), int(d["points_per_axis"]),
                   int(d["dim"]), bool(d.get("periodic", False)))


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


class SampledFunction:
    """Immutable complex samples on a :class:`Grid` (array shape ``(N,)*d``)."""

    __slots__ = ("grid", "_values")

    def __init__(self, grid: Grid, values):
        arr = np.array(values, dtype=complex)
        shape = (grid.n,) * grid.dim
        if arr.shape != shape:
            arr = arr.reshape(shape)
        arr.setflags(write=False)
        self.grid = grid
        self._values = arr

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def dim(self) -> int:
        return self.grid.dim

    @property
    def extent(self) -> float:
        return self.grid.extent

    @property
    def points_per_axis(self) -> int:
        return self.grid.n

    @property
    def step(self) -> float:
        return self.grid.step

    def flat(self) -> np.ndarray:
        return self._values.reshape(-1)

    def norm(self) -> float:
        return math.sqrt(max(inner_product(self, self).real, 0.0))

    def with_values(self, values) -> "SampledFunction":
        return SampledFunction(self.grid, values)

    def __add__(self, other):
        _require_same_grid(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other):
        _require_same_grid(self, other)
        return self.with_values(self.values - other.values)

    def __mul__(self, c):
        return self.with_values(self.values * c)

    __rmul__ = __mul__

    # serialization
    def to_csv(self, stream=None) -> str:
        buf = io.StringIO()
        g = self.grid
        buf.write(f"# extent={_fmt(g.extent)} points_per_axis={g.n} dim={g.dim} "
                  f"start={_fmt(g.start)} step={_fmt(g.step)} periodic={int(g.periodic)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x{i + 1}" for i in range(g.dim)] + ["re", "im"])
        ax = g.axis()
        for idx in np.ndindex(*self._values.shape):
            v = self._values[idx]
            w.writerow([_fmt(ax[i]) for i in idx] + [_fmt(v.real), _fmt(v.imag)])
        text = buf.getvalue()
        if stream is not None:
            stream.write(text)
        return text

    def to_json(self) -> str:
        flat = self.flat()
        return json.dumps({"grid": self.grid.to_dict(),
                           "re": [float(v) for v in flat.real],
                           "im": [float(v) for v in flat.imag]})

    @classmethod
    def from_json(cls, text: str) -> "SampledFunction":
        d = json.loads(text)
        grid = Grid.from_dict(d["grid"])
        return cls(grid, np.array(d["re"]) + 1j * np.array(d["im"]))


def _require_same_grid(f: SampledFunction, g: SampledFunction):
    if not f.grid.matches(g.grid):
        raise IncompatibleGridsError("functions live on different grids")


# ---------------------------------------------------------------- windows


@dataclass(frozen=True)
class GaussianWindow:
    dim: int = 1

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.dim == 1:
            return np.exp(-np.pi * x * x)
        return np.exp(-np.pi * np.sum(x * x, axis=-1))

    def sample(self, grid: Grid) -> SampledFunction:
        return SampledFunction(grid, atom_values(grid, np.zeros(grid.dim), np.zeros(grid.dim)))


def outside_mass(grid: Grid, m) -> float:
    """Energy fraction of ``|g(·-m)|²`` lying outside the grid box (union bound over axes)."""
    lo, hi = grid.start, grid.stop if not grid.periodic else grid.start + grid.period
    c = math.sqrt(2.0 * math.pi)
    total = 0.0
    for mi in np.atleast_1d(m):
        total += 0.5 * float(erfc(c * (hi - mi))) + 0.5 * float(erfc(c * (mi - lo)))
    return total


def _axis_atom(grid: Grid, m: float, n: float) -> np.ndarray:
    x = grid.axis()
    if grid.periodic:
        P = grid.period
        env = sum(np.exp(-np.pi * (x - m - k * P) ** 2) for k in (-1, 0, 1))
    else:
        env = np.exp(-np.pi * (x - m) ** 2)
    return np.exp(2j * np.pi * n * x) * env


def atom_values(grid: Grid, m, n) -> np.ndarray:
    """Samples of ``π(m, n)g`` without support checks (periodized on tori)."""
    m = np.atleast_1d(np.asarray(m, float))
    n = np.atleast_1d(np.asarray(n, float))
    out = _axis_atom(grid, m[0], n[0])
    for i in range(1, grid.dim):
        out = np.multiply.outer(out, _axis_atom(grid, m[i], n[i]))
    return out


def tf_shift_sample(lam: LatticeIndex, params: LatticeParams, grid: Grid) -> SampledFunction:
    """Sample ``e^{2πi n·x} e^{-π|x-m|²}`` with ``m = α·m_idx``, ``n = β·n_idx``."""
    if grid.dim != params.dim:
        raise IncompatibleGridsError("grid and lattice dimensions differ")
    m, n = lam.physical(params)
    out = outside_mass(grid, m)
    if out > SUPPORT_TOL:
        raise SupportTruncationError(
            f"grid [{grid.start:g}, {grid.stop:g}] loses energy fraction {out:.3e} of the atom at m={m}")
    return SampledFunction(grid, atom_values(grid, m, n))


def point_shift_sample(x0, xi0, grid: Grid) -> SampledFunction:
    """Like :func:`tf_shift_sample` for an arbitrary phase-space point."""
    out = outside_mass(grid, x0)
    if out > SUPPORT_TOL:
        raise SupportTruncationError(f"atom at {x0} not contained in the grid ({out:.3e})")
    return SampledFunction(grid, atom_values(grid, x0, xi0))


# -------------------------------------------------------------- quadrature


def inner_product(f: SampledFunction, g: SampledFunction) -> complex:
    """``∫ f ḡ`` by the grid's composite trapezoid rule."""
    _require_same_grid(f, g)
    return complex(np.sum(f.values * np.conj(g.values) * f.grid.weights()))


def _boundary_level(values: np.ndarray) -> float:
    peak = float(np.max(np.abs(values))) if values.size else 0.0
    if peak == 0.0:
        return 0.0
    b = 0.0
    for ax in range(values.ndim):
        first = np.take(values, 0, axis=ax)
        last = np.take(values, -1, axis=ax)
        b = max(b, float(np.max(np.abs(first))), float(np.max(np.abs(last))))
    return b / peak


def _dft_axis(a, axis, x0, h, w0, dw, weights, sign):
    # b_k = Σ_j weights_j a_j exp(sign·2πi x_j w_k), requiring N·h·dw = 1
    N = a.shape[axis]
    j = np.arange(N)
    x = x0 + h * j
    shape = [1] * a.ndim
    shape[axis] = N
    pre = (weights * np.exp(sign * 2j * np.pi * x * w0)).reshape(shape)
    post = np.exp(sign * 2j * np.pi * x0 * dw * j).reshape(shape)
    if sign < 0:
        b = np.fft.fft(a * pre, axis=axis)
    else:
        b = np.fft.ifft(a * pre, axis=axis) * N
    return b * post


def continuous_ft(f: SampledFunction, warn: bool = True) -> SampledFunction:
    """Continuous Fourier transform by phase-corrected FFT.

    The output lives on ``f.grid.reciprocal()``: step ``1/(N h)``, start
    ``-(N//2)/(N h)``. A :class:`TruncationWarning` reports the relative boundary
    magnitude when it exceeds 1e-12 (a bound on the neglected tail density).
    """
    if warn and not f.grid.periodic:
        level = _boundary_level(f.values)
        if level > DECAY_TOL:
            warnings.warn(TruncationWarning(
                f"boundary samples at relative level {level:.2e}; "
                f"estimated truncation error ≲ {level * f.grid.extent:.2e}"), stacklevel=2)
    g = f.grid
    rg = g.reciprocal()
    a = f.values
    for ax in range(g.dim):
        a = _dft_axis(a, ax, g.start, g.step, rg.start, rg.step, g.weights_1d(), -1)
    return SampledFunction(rg, a)


def inverse_ft(F: SampledFunction, grid: Grid | None = None) -> SampledFunction:
    """Inverse of :func:`continuous_ft` back onto ``grid`` (default: the source grid)."""
    grid = grid if grid is not None else F.grid.source
    if grid is None:
        raise IncompatibleGridsError("no target grid for the inverse transform")
    fg = F.grid
    if fg.n != grid.n or fg.dim != grid.dim or not math.isclose(fg.step * grid.step * fg.n, 1.0,
                                                                  rel_tol=1e-12):
        raise IncompatibleGridsError("frequency grid is not reciprocal to the target grid")
    a = F.values
    for ax in range(grid.dim):
        a = _dft_axis(a, ax, fg.start, fg.step, grid.start, grid.step, fg.weights_1d(), +1)
    # _dft_axis evaluates at points w0 + k·dw, here the target grid points
    return SampledFunction(grid, a)


# -------------------------------------------------------------- spectrogram


@dataclass(frozen=True)
class Spectrogram:
    time_grid: np.ndarray
    freq_grid: np.ndarray
    magnitudes: np.ndarray

    def energy(self) -> float:
        """Riemann sum of ``|V_g f|²`` over the (uniform) time-frequency grid."""
        dt = self.time_grid[1] - self.time_grid[0] if len(self.time_grid) > 1 else 1.0
        dw = self.freq_grid[1] - self.freq_grid[0] if len(self.freq_grid) > 1 else 1.0
        return float(np.sum(self.magnitudes ** 2) * dt * dw)

    def peak(self):
        i, j = np.unravel_index(int(np.argmax(self.magnitudes)), self.magnitudes.shape)
        return float(self.time_grid[i]), float(self.freq_grid[j])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "omega", "magnitude"])
        for i, x in enumerate(self.time_grid):
            for j, om in enumerate(self.freq_grid):
                w.writerow([_fmt(x), _fmt(om), _fmt(self.magnitudes[i, j])])
        return buf.getvalue()


def stft_grid(f: SampledFunction, window: GaussianWindow, t_grid: Sequence[float],
              w_grid: Sequence[float]) -> Spectrogram:
    """``|⟨f, M_ω T_x g⟩|`` on the product of ``t_grid`` and ``w_grid``."""
    if f.dim != 1 or window.dim != 1:
        raise UnsupportedDimensionError("spectrograms are one-dimensional")
    t = np.asarray(t_grid, float)
    w = np.asarray(w_grid, float)
    x = f.grid.axis()
    fw = f.values * f.grid.weights_1d()
    # rows: f·g(x - x_i); columns: e^{-2πi ω_j x} (the conjugated modulation)
    shifted = fw[None, :] * window(x[None, :] - t[:, None])
    E = np.exp(-2j * np.pi * np.outer(x, w))
    return Spectrogram(t, w, np.abs(shifted @ E))


# ----------------------------------------------------- periodic frame operator


def _rational(x: float, what: str) -> Fraction:
    fr = Fraction(x).limit_denominator(1000)
    if not math.isclose(float(fr), x, rel_tol=1e-12, abs_tol=1e-15):
        raise InvalidParameterError(f"{what}={x} is not a simple rational number")
    return fr


def torus_grid(params: LatticeParams, index_radius: int, samples_per_unit: int = 64) -> Grid:
    """Periodic grid of period ``2α·index_radius`` commensurate with the lattice.

    The step divides ``α`` and ``1/β``, and ``2·index_radius·αβ`` must be an integer
    so that every lattice modulation is periodic on the torus.
    """
    if index_radius < 1:
        raise InvalidParameterError("index_radius must be positive")
    ab = _rational(params.alpha * params.beta, "alpha*beta")
    if (2 * index_radius * ab).denominator != 1:
        raise InvalidParameterError("2·index_radius·αβ must be an integer")
    p = ab.numerator
    a = p * math.ceil(samples_per_unit * params.alpha / p)  # samples per α-step
    return Grid.periodic_box(params.alpha * index_radius, 2 * index_radius * a, 1)


class FrameOperator:
    """Gabor frame operator of the Gaussian on a lattice-commensurate torus.

    The system is ``{π(αk, βj)g}`` with ``k`` over the ``2R`` time positions of the
    period and ``j`` over every modulation distinguishable on the grid. Summing the
    modulations gives the Walnut form ``(Sf)_i = (1/β) Σ_p W_p[i] f[i - pM]``
    with ``M = 1/(βh)`` and ``W_p = Σ_k g_k · T_{pM} g_k``.
    """

    def __init__(self, params: LatticeParams, index_radius: int, grid: Grid | None = None):
        if params.dim != 1:
            raise UnsupportedDimensionError("frame operator is built per axis (dim=1)")
        self.params = params
        self.index_radius = int(index_radius)
        self.grid = grid if grid is not None else torus_grid(params, index_radius)
        g = self.grid
        if not g.periodic or g.dim != 1:
            raise IncompatibleGridsError("frame operator needs a one-dimensional periodic grid")
        if not math.isclose(g.period, 2 * params.alpha * index_radius, rel_tol=1e-12):
            raise IncompatibleGridsError("grid period must equal 2·alpha·index_radius")
        a = params.alpha / g.step
        M = 1.0 / (params.beta * g.step)
        if abs(a - round(a)) > 1e-9 or abs(M - round(M)) > 1e-9 or g.n % round(M):
            raise IncompatibleGridsError("grid step is not commensurate with the lattice")
        self.shift = int(round(a))
        self.M = int(round(M))
        R = self.index_radius
        windows = np.array([_axis_atom(g, params.alpha * k, 0.0).real for k in range(-R, R)])
        self.n_terms = g.n // self.M
        self.W = np.array([np.sum(windows * np.roll(windows, p * self.M, axis=1), axis=0)
                           for p in range(self.n_terms)])
        self.scale = 1.0 / params.beta

    @property
    def shape(self):
        return (self.grid.n, self.grid.n)

    def matvec(self, f):
        f = np.asarray(f)
        out = np.zeros(self.grid.n, dtype=np.result_type(f.dtype, float))
        for p in range(self.n_terms):
            out += self.W[p] * np.roll(f, p * self.M)
        return self.scale * out

    def as_linear_operator(self, dtype=complex) -> LinearOperator:
        return LinearOperator(self.shape, matvec=self.matvec, rmatvec=self.matvec, dtype=dtype)


def frame_bounds_estimate(params: LatticeParams, index_radius: int,
                          grid: Grid | None = None, *, tol: float = 0.0,
                          maxiter: int | None = None) -> tuple[float, float]:
    """Extreme eigenvalues ``(A_est, B_est)`` of the truncated Gaussian frame operator.

    The lattice is truncated to ``2·index_radius`` time positions, which also sets
    the torus period. For ``dim > 1`` the separable operator is a tensor power, so
    the bounds are the ``dim``-th powers of the one-axis bounds.
    """
    if index_radius < 4:
        raise InvalidParameterError("index_radius must be at least 4")
    p1 = LatticeParams(params.alpha, params.beta, 1)
    op = FrameOperator(p1, index_radius, grid).as_linear_operator(float)
    # tol=0 asks ARPACK for machine precision; looser tolerances stop early on the
    # cluster of tiny eigenvalues that appears near the critical density
    v0 = np.random.default_rng(0).standard_normal(op.shape[0])
    kw = dict(k=1, tol=tol, maxiter=maxiter, v0=v0, return_eigenvectors=False)
    try:
        lo = eigsh(op, which="SA", **kw)[0]
        hi = eigsh(op, which="LA", **kw)[0]
    except ArpackNoConvergence as exc:
        raise IterationLimitError(f"eigenvalue iteration did not converge: {exc}") from exc
    lo = max(float(lo), 0.0)
    hi = float(hi)
    return lo ** params.dim, hi ** params.dim


def iter_index_pairs(dim: int, radius: int) -> Iterable[tuple[LatticeIndex, LatticeIndex]]:
    idx = lattice_indices(dim, radius)
    for lam in idx:
        for nu in idx:
            yield lam, nu
