"""Closed-form Gabor matrix moduli and decay envelopes."""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.integrate import quad

from .core_tf import LatticeIndex, LatticeParams, lattice_indices, phase_space_distance, _fmt
from .errors import InvalidParameterError, TruncationWarning, UnsupportedDimensionError


# ------------------------------------------------------------ operator specs


@dataclass(frozen=True)
class Heat:
    """``σ(t, ω) = e^{-4π²ρt|ω|²}``."""

    rho: float
    t: float
    dim: int = 1

    def __post_init__(self):
        if not self.rho > 0:
            raise InvalidParameterError("rho must be positive")
        if not self.t >= 0:
            raise InvalidParameterError("heat evolution needs t >= 0")


@dataclass(frozen=True)
class GenHeat:
    """Dissipative symbol ``σ_k(t, ω) = e^{-t(2πω)^{2k}}`` in one dimension."""

    k: int
    t: float
    dim: int = field(default=1, init=False)

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise InvalidParameterError("k must be a positive integer")
        if not self.t > 0:
            raise InvalidParameterError("generalized heat needs t > 0")


@dataclass(frozen=True)
class Repulsor:
    """Propagator of the harmonic repulsor, generated by ``[[0, I], [I, 0]]``."""

    t: float
    dim: int = 1


EvolutionOperatorSpec = Union[Heat, GenHeat, Repulsor]


def operator_to_dict(op: EvolutionOperatorSpec) -> dict:
    if isinstance(op, Heat):
        return {"operator": "heat", "rho": op.rho, "t": op.t, "dim": op.dim}
    if isinstance(op, GenHeat):
        return {"operator": "genheat", "k": op.k, "t": op.t, "dim": 1}
    return {"operator": "repulsor", "t": op.t, "dim": op.dim}


# ------------------------------------------------------------- envelopes


@dataclass(frozen=True)
class DecayBoundSpec:
    """Envelope ``r ↦ C·exp(-eps·r^{inv_s})``."""

    C: float
    eps: float
    inv_s: float

    def __post_init__(self):
        if not (self.C > 0 and self.eps > 0 and self.inv_s > 0):
            raise InvalidParameterError("C, eps and inv_s must be positive")

    def envelope(self, r):
        r = np.asarray(r, float)
        return self.C * np.exp(-self.eps * np.abs(r) ** self.inv_s)

    def log_envelope(self, r):
        return math.log(self.C) - self.eps * np.abs(np.asarray(r, float)) ** self.inv_s

    def radius_for(self, level: float) -> float:
        """Smallest ``r`` with ``envelope(r) ≤ level``."""
        if level >= self.C:
            return 0.0
        return (math.log(self.C / level) / self.eps) ** (1.0 / self.inv_s)

    def to_json(self) -> str:
        return json.dumps({"C": self.C, "eps": self.eps, "inv_s": self.inv_s}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "DecayBoundSpec":
        d = json.loads(text)
        return cls(d["C"], d["eps"], d["inv_s"])


# ---------------------------------------------------------------- heat


def _phys(lam: LatticeIndex, nu: LatticeIndex, params: LatticeParams):
    m, n = lam.physical(params)
    mp, np_ = nu.physical(params)
    return m, n, mp, np_


def heat_log_modulus_array(m, n, mp, np_, rho, t, *, flip_sign=False):
    """Vectorized log-modulus; coordinate arrays have shape ``(..., d)``."""
    q = 2.0 + 4.0 * math.pi * rho * t
    d = np.shape(m)[-1]
    sgn = 1.0 if flip_sign else -1.0
    cross = np.sum((n + np_) ** 2, axis=-1)
    bracket = (np.sum(n * n, axis=-1) + np.sum(np_ * np_, axis=-1)
               + (np.sum((m - mp) ** 2, axis=-1) + sgn * cross) / q)
    return -0.5 * d * math.log(q) - math.pi * bracket


def heat_log_modulus(lam, nu, rho, t, dim, params, *, flip_sign=False) -> float:
    if not rho > 0 or not t >= 0:
        raise InvalidParameterError("heat needs rho > 0 and t >= 0")
    if dim != params.dim:
        raise InvalidParameterError("dim does not match the lattice")
    return float(heat_log_modulus_array(*_phys(lam, nu, params), rho, t, flip_sign=flip_sign))


def heat_entry_modulus(lam: LatticeIndex, nu: LatticeIndex, rho: float, t: float, dim: int,
                       params: LatticeParams, *, flip_sign: bool = False) -> float:
    """``(2+4πρt)^{-d/2} exp(-π[|n|²+|n'|² + (|m-m'|² - |n+n'|²)/(2+4πρt)])``.

    ``flip_sign`` replaces ``-|n+n'|²`` by ``+|n+n'|²``; it exists only as a
    negative control for verification runs.
    """
    return math.exp(heat_log_modulus(lam, nu, rho, t, dim, params, flip_sign=flip_sign))


def heat_domination_rate(rho: float, t: float) -> float:
    """Rate ``ε = π/(2+4πρt)`` of the Gaussian off-diagonal envelope.

    With ``q = 1/(2+4πρt) ≤ 1/2`` one has ``|n|²+|n'|² - q|n+n'|² ≥ |n-n'|²/2``,
    and ``π·q ≤ π/2``, which gives the bound for every ``t ≥ 0``.
    """
    return math.pi / (2.0 + 4.0 * math.pi * rho * t)


def heat_domination_bound(lam, nu, rho, t, dim, params) -> float:
    m, n, mp, np_ = _phys(lam, nu, params)
    q = 2.0 + 4.0 * math.pi * rho * t
    r2 = float(np.sum((m - mp) ** 2) + np.sum((n - np_) ** 2))
    return q ** (-dim / 2) * math.exp(-heat_domination_rate(rho, t) * r2)


# ---------------------------------------------------------- generalized heat


def genheat_eps_tilde(k: int, t: float) -> float:
    return ((2 * k - 1) / (2 * k)) * (1.0 / (2 * k * t)) ** (1.0 / (2 * k - 1)) \
        * 2.0 ** (-k / (2 * k - 1))


def genheat_constants(k: int, t: float) -> DecayBoundSpec:
    """Envelope constants for the generalized heat symbol, with ``s = 2k/(2k-1)``."""
    if int(k) != k or k < 1:
        raise InvalidParameterError("k must be a positive integer")
    if not t > 0:
        raise InvalidParameterError("t must be positive")
    s = 2 * k / (2 * k - 1)
    C = abs(2 * k * t) ** ((k - 1) / (2 * k - 1))
    return DecayBoundSpec(C, genheat_eps_tilde(k, t) * 2.0 ** (-1.0 / s), 1.0 / s)


def genheat_entry_bound(lam, nu, k, t, params) -> float:
    if params.dim != 1:
        raise UnsupportedDimensionError("generalized heat bound is one-dimensional")
    spec = genheat_constants(k, t)
    return float(spec.envelope(phase_space_distance(lam, nu, params)))


# ---------------------------------------------------------------- repulsor


def repulsor_log_modulus_array(m, n, mp, np_, t, *, cross_term="corrected"):
    c, tau = math.cosh(t), math.tanh(t)
    d = np.shape(m)[-1]
    dot = lambda a, b: np.sum(a * b, axis=-1)  # noqa: E731
    sq = dot(m, m) + dot(n, n) + dot(mp, mp) + dot(np_, np_)
    twist = 2.0 * tau * (dot(m, n) - dot(mp, np_))
    if cross_term == "corrected":
        cross = -(2.0 / c) * (dot(m, mp) + dot(n, np_))
    elif cross_term == "printed":
        cross = -2.0 * (dot(m, mp) - dot(n, np_))
    else:
        raise InvalidParameterError("cross_term must be 'corrected' or 'printed'")
    return -0.5 * d * math.log(2.0 * c) - 0.5 * math.pi * (sq + twist + cross)


def repulsor_log_modulus(lam, nu, t, dim, params, *, cross_term="corrected") -> float:
    if dim != params.dim:
        raise InvalidParameterError("dim does not match the lattice")
    return float(repulsor_log_modulus_array(*_phys(lam, nu, params), t, cross_term=cross_term))


def repulsor_entry_modulus(lam: LatticeIndex, nu: LatticeIndex, t: float, dim: int,
                           params: LatticeParams, *, cross_term: str = "corrected") -> float:
    """Modulus of the repulsor Gabor matrix entry.

    ``(2cosh t)^{-d/2} exp(-(π/2)[|m|²+|n|²+|m'|²+|n'|² + 2tanh(t)(m·n - m'·n')
    - (2/cosh t)(m·m' + n·n')])``. Equivalently ``(2cosh t)^{-d/2}
    exp(-(π/2)(|z|² - 2tanh(t) x·ξ))`` with ``(x, ξ) = ν - e^{tA}λ``, where the
    lattice point is moved by the hyperbolic flow.

    ``cross_term="printed"`` evaluates the variant with ``-2(m·m' - n·n')``; it
    fails the identity check at ``t = 0`` and is kept for comparison only.
    """
    return math.exp(repulsor_log_modulus(lam, nu, t, dim, params, cross_term=cross_term))


# ----------------------------------------------- Fourier decay of e^{-α x^{2k}}


def superexp_ft_bound(k: int, alpha_coeff: float) -> DecayBoundSpec:
    """Envelope for ``|f̂|`` where ``f(x) = e^{-α x^{2k}}`` (width parameter fixed to one)."""
    if int(k) != k or k < 1:
        raise InvalidParameterError("k must be a positive integer")
    if not alpha_coeff > 0:
        raise InvalidParameterError("alpha_coeff must be positive")
    two_pi = 2.0 * math.pi
    a = 2 * k * alpha_coeff
    C = abs(a) ** ((k - 1) / (2 * k - 1)) / two_pi ** (2 * k * (k - 1) / (2 * k - 1))
    eps = two_pi ** (2 * k / (2 * k - 1)) * ((2 * k - 1) / (2 * k)) * (1.0 / a) ** (1.0 / (2 * k - 1))
    return DecayBoundSpec(C, eps, 2 * k / (2 * k - 1))


# ------------------------------------------------------ weight convolution


def weight_convolution_check(s: float, eps: float, z_grid, *, extent: float | None = None):
    """Numerical ``(w ∗ w)(z)`` for ``w(x) = e^{-eps|x|^{1/s}}`` and its envelope.

    Returns ``(lhs, rhs)`` with ``rhs = e^{-eps·2^{-1/s}|z|^{1/s}}``. The integral
    runs over ``[-extent, extent]``; by default the extent is chosen so that the
    weight at the edge is below 1e-14 beyond the largest ``|z|``. A supplied extent
    whose edge weight exceeds 1e-10 triggers a :class:`TruncationWarning`.
    """
    if not s > 0.5:
        raise InvalidParameterError("s must exceed 1/2")
    if not eps > 0:
        raise InvalidParameterError("eps must be positive")
    z = np.atleast_1d(np.asarray(z_grid, float))
    p = 1.0 / s
    zmax = float(np.max(np.abs(z))) if z.size else 0.0
    if extent is None:
        extent = zmax + (math.log(1e14) / eps) ** s
    else:
        edge = math.exp(-eps * max(extent - zmax, 0.0) ** p)
        if edge > 1e-10:
            warnings.warn(TruncationWarning(f"weight at the integration edge is {edge:.2e}"),
                          stacklevel=2)

    def w(x):
        return math.exp(-eps * abs(x) ** p)

    lhs = np.empty_like(z)
    for i, zi in enumerate(z):
        f = lambda y: w(zi - y) * w(y)  # noqa: E731
        pts = sorted({-extent, min(0.0, zi), max(0.0, zi), extent})
        total = 0.0
        for a, b in zip(pts[:-1], pts[1:]):
            if b > a:
                total += quad(f, a, b, epsabs=1e-15, epsrel=1e-12, limit=200)[0]
        lhs[i] = total
    rhs = np.exp(-eps * 2.0 ** (-p) * np.abs(z) ** p)
    return lhs, rhs


# --------------------------------------------------------- matrix windows


@dataclass
class GaborMatrixWindow:
    """Finite block of entry moduli keyed by ``(λ, ν)``."""

    params: LatticeParams
    radius: int
    entries: dict
    kind: str = "modulus"

    def items(self):
        return sorted(self.entries.items(), key=lambda kv: kv[0][0].as_tuple() + kv[0][1].as_tuple())

    def max_entry(self) -> float:
        return max(self.entries.values()) if self.entries else 0.0

    def to_csv(self, source: str | None = None) -> str:
        d = self.params.dim
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        head = ([f"m_idx{i + 1}" for i in range(d)] + [f"n_idx{i + 1}" for i in range(d)]
                + [f"mp_idx{i + 1}" for i in range(d)] + [f"np_idx{i + 1}" for i in range(d)]
                + [self.kind])
        if source:
            head.append("source")
        w.writerow(head)
        for (lam, nu), v in self.items():
            row = [*lam.m_idx, *lam.n_idx, *nu.m_idx, *nu.n_idx, _fmt(v)]
            if source:
                row.append(source)
            w.writerow(row)
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({
            "params": self.params.to_dict(), "radius": self.radius, "kind": self.kind,
            "entries": [[list(l.m_idx), list(l.n_idx), list(n.m_idx), list(n.n_idx), v]
                        for (l, n), v in self.items()],
        })


def entry_modulus(op: EvolutionOperatorSpec, lam, nu, params) -> float:
    """Closed-form modulus (or envelope for the generalized heat family)."""
    if isinstance(op, Heat):
        return heat_entry_modulus(lam, nu, op.rho, op.t, params.dim, params)
    if isinstance(op, Repulsor):
        return repulsor_entry_modulus(lam, nu, op.t, params.dim, params)
    return genheat_entry_bound(lam, nu, op.k, op.t, params)


def analytic_window(op: EvolutionOperatorSpec, params: LatticeParams, radius: int,
                    *, nu_origin_only: bool = False) -> GaborMatrixWindow:
    """All entries with ``|indices| ≤ radius``; optionally only the column ``ν = 0``."""
    idx = lattice_indices(params.dim, radius)
    nus = [LatticeIndex([0] * params.dim, [0] * params.dim)] if nu_origin_only else idx
    kind = "bound" if isinstance(op, GenHeat) else "modulus"
    entries = {(lam, nu): entry_modulus(op, lam, nu, params) for lam in idx for nu in nus}
    return GaborMatrixWindow(params, radius, entries, kind)
