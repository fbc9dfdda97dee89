"""Symplectic matrices, their exponentials and metaplectic operators."""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .core_tf import Grid, LatticeIndex, LatticeParams, SampledFunction, continuous_ft
from .errors import InvalidParameterError, NotRepresentableError, UnsupportedDimensionError


def standard_J(d: int) -> np.ndarray:
    I = np.eye(d)
    Z = np.zeros((d, d))
    return np.block([[Z, I], [-I, Z]])


@dataclass(frozen=True)
class SymplecticMatrix:
    """``[[A, B], [C, D]]`` acting on column vectors ``(x, ξ)``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    @classmethod
    def from_matrix(cls, M) -> "SymplecticMatrix":
        M = np.asarray(M, float)
        if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] % 2:
            raise InvalidParameterError("expected a square matrix of even size")
        d = M.shape[0] // 2
        return cls(M[:d, :d].copy(), M[:d, d:].copy(), M[d:, :d].copy(), M[d:, d:].copy())

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return np.block([[self.A, self.B], [self.C, self.D]])

    def symplectic_defect(self) -> float:
        M = self.matrix
        J = standard_J(self.dim)
        return float(np.max(np.abs(M.T @ J @ M - J)))

    def is_symplectic(self, tol: float = 1e-10) -> bool:
        return self.symplectic_defect() <= tol

    def __matmul__(self, other: "SymplecticMatrix") -> "SymplecticMatrix":
        return SymplecticMatrix.from_matrix(self.matrix @ other.matrix)

    def to_json(self) -> str:
        return json.dumps({k: getattr(self, k).tolist() for k in "ABCD"})

    @classmethod
    def from_json(cls, text: str) -> "SymplecticMatrix":
        d = json.loads(text)
        return cls(*(np.array(d[k], float) for k in "ABCD"))


@dataclass(frozen=True)
class SymplecticGenerator:
    matrix: np.ndarray

    def is_hamiltonian(self, tol: float = 1e-12) -> bool:
        """Lie algebra test ``ᵗX J + J X = 0``."""
        X = np.asarray(self.matrix, float)
        J = standard_J(X.shape[0] // 2)
        return float(np.max(np.abs(X.T @ J + J @ X))) <= tol


def repulsor_generator(d: int = 1) -> SymplecticGenerator:
    I = np.eye(d)
    Z = np.zeros((d, d))
    return SymplecticGenerator(np.block([[Z, I], [I, Z]]))


def hamiltonian_generator(A, B, C) -> SymplecticGenerator:
    """Generator ``[[A, B], [C, -ᵗA]]`` with symmetric ``B`` and ``C``."""
    A, B, C = (np.atleast_2d(np.asarray(v, float)) for v in (A, B, C))
    if not (np.allclose(B, B.T) and np.allclose(C, C.T)):
        raise InvalidParameterError("B and C must be symmetric")
    return SymplecticGenerator(np.block([[A, B], [C, -A.T]]))


def symplectic_exp(gen: SymplecticGenerator, t: float) -> SymplecticMatrix:
    # scipy's expm: scaling-and-squaring with Padé approximants
    return SymplecticMatrix.from_matrix(expm(t * np.asarray(gen.matrix, float)))


def repulsor_flow(t: float, d: int = 1) -> SymplecticMatrix:
    return symplectic_exp(repulsor_generator(d), t)


# ------------------------------------------------------- metaplectic action


def _is_diagonal(M) -> bool:
    return np.allclose(M, np.diag(np.diag(M)), atol=0.0)


def _mu_axis(values, axis, fgrid: Grid, xgrid: Grid, a, b, c, sign):
    # (a)^{-1/2} Σ_ω e^{sign·πi(c/a)x² - sign·πi(b/a)ω² + 2πi ω x/a} F(ω) Δω along one axis
    w = fgrid.axis()
    x = xgrid.axis()
    chirp_w = np.exp(-sign * 1j * math.pi * (b / a) * w * w) * fgrid.weights_1d()
    kernel = np.exp(2j * math.pi * np.outer(x, w) / a) * chirp_w[None, :]
    chirp_x = np.exp(sign * 1j * math.pi * (c / a) * x * x)
    pref = 1.0 / cmath.sqrt(a)
    moved = np.moveaxis(values, axis, -1)
    out = (moved @ kernel.T) * chirp_x * pref
    return np.moveaxis(out, -1, axis)


def mu_apply(S: SymplecticMatrix, f: SampledFunction, *, sign: int = +1) -> SampledFunction:
    """Metaplectic operator by quadrature of its integral representation.

    ``μ(S)f(x) = (det A)^{-1/2} ∫ e^{sign·(πi x·CA⁻¹x - πi ω·A⁻¹Bω) + 2πi ω·A⁻¹x} f̂(ω) dω``

    ``sign=+1`` is the orientation covariant with ``S`` acting on ``(x, ξ)``
    (``μ(S)π(z) ∝ π(Sz)μ(S)``) and reproduces the repulsor propagator; the square
    root is the principal branch, so results are defined up to a global sign.
    In ``d > 1`` all four blocks must be diagonal (the operator then factors over
    axes).
    """
    if sign not in (+1, -1):
        raise InvalidParameterError("sign must be +1 or -1")
    d = S.dim
    if d != f.dim:
        raise InvalidParameterError("matrix and function dimensions differ")
    if abs(np.linalg.det(S.A)) < 1e-8:
        raise NotRepresentableError("block A is singular; the integral formula does not apply")
    if d > 1 and not all(_is_diagonal(M) for M in (S.A, S.B, S.C)):
        raise UnsupportedDimensionError("only axis-separable matrices are supported for d > 1")
    F = continuous_ft(f)
    vals = F.values
    for ax in range(d):
        vals = _mu_axis(vals, ax, F.grid, f.grid, S.A[ax, ax],
                        S.B[ax, ax], S.C[ax, ax], sign)
    return SampledFunction(f.grid, vals)


def repulsor_apply(f: SampledFunction, t: float) -> SampledFunction:
    """Repulsor propagator ``(cosh t)^{-d/2}∫ e^{πi tanh(t)x² + 2πi xω/cosh t - πi tanh(t)ω²} f̂``."""
    return mu_apply(repulsor_flow(t, f.dim), f)


@dataclass(frozen=True)
class GaussianDescriptor:
    """``x ↦ exp(quadratic_coeff·|x|² + linear_coeff·x + constant)``."""

    quadratic_coeff: complex
    linear_coeff: tuple
    constant: complex

    @property
    def dim(self) -> int:
        return len(self.linear_coeff)

    def log_value(self, x) -> np.ndarray:
        x = np.asarray(x, float)
        lin = np.asarray(self.linear_coeff, complex)
        if self.dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            return self.quadratic_coeff * x * x + lin[0] * x + self.constant
        return (self.quadratic_coeff * np.sum(x * x, axis=-1) + x @ lin + self.constant)

    def __call__(self, x):
        return np.exp(self.log_value(x))

    def sample(self, grid: Grid) -> SampledFunction:
        if grid.dim != self.dim:
            raise InvalidParameterError("grid dimension does not match the descriptor")
        mesh = grid.mesh()
        logv = np.full(mesh[0].shape, self.constant, dtype=complex)
        for i, X in enumerate(mesh):
            logv = logv + self.quadratic_coeff * X * X + self.linear_coeff[i] * X
        return SampledFunction(grid, np.exp(logv))

    def l2_norm(self) -> float:
        """Exact ``L²`` norm (requires ``Re quadratic_coeff < 0``)."""
        a = -2.0 * self.quadratic_coeff.real
        lin = np.asarray(self.linear_coeff, complex)
        b = 2.0 * lin.real
        log_sq = 2.0 * self.constant.real + float(np.sum(b * b)) / (4 * a) \
            + 0.5 * self.dim * math.log(math.pi / a)
        return math.exp(0.5 * log_sq)

    def to_json(self) -> str:
        c = lambda z: [z.real, z.imag]  # noqa: E731
        return json.dumps({"quadratic_coeff": c(complex(self.quadratic_coeff)),
                           "linear_coeff": [c(complex(v)) for v in self.linear_coeff],
                           "constant": c(complex(self.constant))})


def repulsor_apply_shifted_gaussian(lam: LatticeIndex, t: float,
                                    params: LatticeParams) -> GaussianDescriptor:
    """Closed form of the repulsor propagator applied to ``π(λ)g``.

    With ``c = cosh t``, ``s = sinh t`` and ``w = m + i n`` (per axis):
    ``T π(m,n)g(x) = (c+is)^{-d/2} e^{-π|n|² + 2πi m·n} e^{-π c w·w/(c+is)}
    e^{-π(c-is)/(c+is)|x|² + 2π x·w/(c+is)}``.
    """
    m, n = lam.physical(params)
    d = params.dim
    c, s = math.cosh(t), math.sinh(t)
    z = complex(c, s)
    w = m + 1j * n
    quad = -math.pi * complex(c, -s) / z
    lin = tuple(complex(v) for v in 2 * math.pi * w / z)
    const = (-0.5 * d * cmath.log(z) - math.pi * float(np.dot(n, n))
             + 2j * math.pi * float(np.dot(m, n)) - math.pi * c * complex(np.dot(w, w)) / z)
    return GaussianDescriptor(quad, lin, const)
