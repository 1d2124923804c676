"""Periodic Fourier fields, dispersion symbols, dyadic projectors and norms.

Normalization
-------------
Coefficients are stored in numpy FFT order on the lattice ``{-N/2..N/2-1}^d``
with frequencies ``xi = 2 pi n / L`` and the symmetric convention

    u_hat(n) = L^{d/2} / N^d * fft(u)(n),   u(x) = L^{-d/2} sum_n u_hat(n) e^{i xi.x},

so ``||u||_{L^2(box)} = ||u_hat||_{l^2}`` exactly and all norms are independent
of the grid size.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass

import numpy as np

# default side of the periodic box standing in for R^d
LARGE_BOX = 32 * math.pi
BOUNDARY_MASS_TOL = 1e-8


def japanese(x):
    """``<x> = (1 + |x|^2)^{1/2}``."""
    return np.sqrt(1.0 + np.abs(x) ** 2)


def _is_pow2(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients of a field on ``[0, L)^d``, ``d in {1, 2}``."""

    coeffs: np.ndarray
    box_length: float = 2 * math.pi
    real_valued: bool = False

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex, copy=True)
        if c.ndim not in (1, 2):
            raise ValueError(f"only d in (1, 2) is supported, got d={c.ndim}")
        if len(set(c.shape)) != 1 or not _is_pow2(c.shape[0]):
            raise ValueError(f"modes per dimension must be an equal power of two, got {c.shape}")
        if not self.box_length > 0:
            raise ValueError("box_length must be positive")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "box_length", float(self.box_length))

    @classmethod
    def from_physical(cls, values, box_length: float = 2 * math.pi, real_valued: bool | None = None):
        values = np.asarray(values)
        d = values.ndim
        N = values.shape[0]
        if real_valued is None:
            real_valued = not np.iscomplexobj(values)
        c = np.fft.fftn(values) * (box_length ** (d / 2) / N**d)
        return cls(c, box_length, real_valued)

    @property
    def d(self) -> int:
        return self.coeffs.ndim

    @property
    def N(self) -> int:
        return self.coeffs.shape[0]

    @property
    def dx(self) -> float:
        return self.box_length / self.N

    def modes(self) -> np.ndarray:
        """Integer mode indices in FFT order, one array per axis (``indexing='ij'``)."""
        n = np.fft.fftfreq(self.N, 1.0 / self.N).round().astype(int)
        return np.array(np.meshgrid(*([n] * self.d), indexing="ij"))

    def wavenumbers(self) -> np.ndarray:
        return 2 * math.pi / self.box_length * self.modes()

    def abs_xi(self) -> np.ndarray:
        return np.sqrt((self.wavenumbers() ** 2).sum(axis=0))

    def grid(self) -> np.ndarray:
        x = np.arange(self.N) * self.dx
        return np.array(np.meshgrid(*([x] * self.d), indexing="ij"))

    def physical(self) -> np.ndarray:
        u = np.fft.ifftn(self.coeffs) * (self.N**self.d / self.box_length ** (self.d / 2))
        return u.real if self.real_valued else u

    def with_coeffs(self, coeffs) -> "SpectralField":
        return SpectralField(coeffs, self.box_length, self.real_valued)

    def l2(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def mass(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def is_conjugate_symmetric(self, tol: float = 1e-12) -> bool:
        flipped = self.coeffs
        for ax in range(self.d):
            flipped = np.roll(np.flip(flipped, axis=ax), 1, axis=ax)
        scale = max(float(np.max(np.abs(self.coeffs))), 1e-300)
        return bool(np.max(np.abs(flipped - np.conj(self.coeffs))) <= tol * scale)


def random_field(rng: np.random.Generator, N: int, d: int = 1, box_length: float = 2 * math.pi,
                 n_max: int | None = None, real_valued: bool = False) -> SpectralField:
    """Unit-L2 field with i.i.d. Gaussian coefficients on modes ``|n|_inf <= n_max``."""
    shape = (N,) * d
    c = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    f = SpectralField(c, box_length)
    if n_max is not None:
        c = np.where(np.abs(f.modes()).max(axis=0) <= n_max, c, 0.0)
    if real_valued:
        u = SpectralField(c, box_length).physical().real
        f = SpectralField.from_physical(u, box_length, True)
        c = f.coeffs
    c = c / np.sqrt(np.sum(np.abs(c) ** 2))
    return SpectralField(c, box_length, real_valued)


@dataclass(frozen=True)
class DispersionSymbol:
    """Real phase ``phi(xi)``; the linear flow is ``u_hat -> exp(i phi dw) u_hat``.

    ``schroedinger``: ``|xi|^2`` (dispersion ``i Delta``), ``airy``: ``xi^3``
    (dispersion ``d_x^3``, one dimension only), ``fractional``: ``|xi|^alpha``.
    """

    kind: str = "schroedinger"
    alpha: float | None = None

    def __post_init__(self):
        if self.kind not in ("schroedinger", "airy", "fractional"):
            raise ValueError(f"unknown dispersion symbol {self.kind!r}")
        if self.kind == "fractional" and (self.alpha is None or self.alpha <= 0):
            raise ValueError("fractional symbol needs alpha > 0")

    def phase(self, field: SpectralField) -> np.ndarray:
        if self.kind == "airy":
            if field.d != 1:
                raise ValueError("the Airy symbol is one-dimensional")
            return field.wavenumbers()[0] ** 3
        axi = field.abs_xi()
        if self.kind == "schroedinger":
            return axi**2
        return axi**self.alpha


def propagate_linear(field: SpectralField, symbol: DispersionSymbol, dw: float) -> SpectralField:
    """Exact modulated linear flow over a path increment ``dw``."""
    if dw == 0:
        return field
    return field.with_coeffs(field.coeffs * np.exp(1j * dw * symbol.phase(field)))


def _bump_step(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def psi0(x):
    """Smooth even non-increasing cut-off: 1 on ``[-1/2, 1/2]``, 0 off ``(-1, 1)``."""
    ax = np.abs(np.asarray(x, dtype=float))
    a = _bump_step(1.0 - ax)
    b = _bump_step(ax - 0.5)
    return np.where(ax <= 0.5, 1.0, np.where(ax >= 1.0, 0.0, a / np.where(a + b > 0, a + b, 1.0)))


def dyadic_multiplier(field: SpectralField, N: int, mode: str = "block") -> np.ndarray:
    if not _is_pow2(int(N)):
        raise ValueError(f"N must be a dyadic integer >= 1, got {N}")
    axi = field.abs_xi()
    up_to = psi0(axi / N)
    if mode == "up_to" or N == 1:
        return up_to
    if mode != "block":
        raise ValueError(f"unknown projection mode {mode!r}")
    return up_to - psi0(2 * axi / N)


def dyadic_project(field: SpectralField, N: int, mode: str = "block") -> SpectralField:
    """``P_N`` (``mode='block'``) or ``P_{<=N}`` (``mode='up_to'``)."""
    return field.with_coeffs(field.coeffs * dyadic_multiplier(field, N, mode))


def dyadic_levels(field: SpectralField) -> list[int]:
    """Dyadic ``N = 1, 2, 4, ...`` up to the first one where ``P_{<=N}`` is the identity."""
    top = float(field.abs_xi().max())
    levels = [1]
    while levels[-1] < 2 * top:
        levels.append(2 * levels[-1])
    return levels


def cube_project(field: SpectralField, center, side: int) -> SpectralField:
    """Sharp projector onto integer modes in the half-open cube ``center + [-side/2, side/2)^d``."""
    center = np.broadcast_to(np.asarray(center, dtype=float), (field.d,))
    n = field.modes()
    inside = np.ones(field.coeffs.shape, dtype=bool)
    for ax in range(field.d):
        rel = n[ax] - center[ax]
        inside &= (rel >= -side / 2) & (rel < side / 2)
    return field.with_coeffs(np.where(inside, field.coeffs, 0.0))


@dataclass(frozen=True)
class Norm:
    """Norm tag: ``L`` (Lebesgue, exponent ``q``), ``H`` (Sobolev ``s``),
    ``FL`` (Fourier-Lebesgue ``s, r``) or ``B`` (Besov ``s, p, q``)."""

    kind: str
    s: float = 0.0
    p: float = 2.0
    q: float = 2.0
    r: float = 2.0

    @classmethod
    def parse(cls, text: str) -> "Norm":
        """``L4``, ``Linf``, ``H1``, ``H-0.5``, ``FL(s,r)``, ``B(s,p,q)``."""
        t = text.replace(" ", "")

        def num(v):
            return math.inf if v.lower() in ("inf", "infinity") else float(v)

        if m := re.fullmatch(r"L(inf|[0-9.]+)", t, re.I):
            return cls("L", q=num(m.group(1)))
        if m := re.fullmatch(r"H(-?[0-9.]+)", t):
            return cls("H", s=float(m.group(1)))
        if m := re.fullmatch(r"FL\((-?[0-9.]+),(inf|[0-9.]+)\)", t, re.I):
            return cls("FL", s=float(m.group(1)), r=num(m.group(2)))
        if m := re.fullmatch(r"B\((-?[0-9.]+),(inf|[0-9.]+),(inf|[0-9.]+)\)", t, re.I):
            return cls("B", s=float(m.group(1)), p=num(m.group(2)), q=num(m.group(3)))
        raise ValueError(f"unsupported norm tag {text!r}")

    def __str__(self) -> str:
        return {"L": f"L{self.q:g}", "H": f"H{self.s:g}", "FL": f"FL({self.s:g},{self.r:g})",
                "B": f"B({self.s:g},{self.p:g},{self.q:g})"}[self.kind]


def _lp_sum(values, weight: float, p: float) -> float:
    a = np.abs(values)
    if p == math.inf:
        return float(a.max())
    return float((np.sum(a**p) * weight) ** (1.0 / p))


def lebesgue_norm(field: SpectralField, q: float) -> float:
    """``L^q`` of the grid values (rectangle rule = trapezoid on a periodic grid).

    ``q = inf`` is the grid maximum, a lower bound for the continuum norm.
    """
    return _lp_sum(field.physical(), field.dx**field.d, q)


def norm_eval(field: SpectralField, norm: Norm | str) -> float:
    if isinstance(norm, str):
        norm = Norm.parse(norm)
    if norm.kind == "L":
        _check_exponent(norm.q)
        return lebesgue_norm(field, norm.q)
    if norm.kind == "H":
        w = japanese(field.abs_xi()) ** norm.s
        return float(np.sqrt(np.sum((w * np.abs(field.coeffs)) ** 2)))
    if norm.kind == "FL":
        _check_exponent(norm.r)
        w = japanese(field.abs_xi()) ** norm.s
        return _lp_sum(w * field.coeffs, 1.0, norm.r)
    if norm.kind == "B":
        _check_exponent(norm.p)
        _check_exponent(norm.q)
        terms = [N**norm.s * lebesgue_norm(dyadic_project(field, N), norm.p)
                 for N in dyadic_levels(field)]
        return _lp_sum(np.array(terms), 1.0, norm.q)
    raise ValueError(f"unsupported norm tag {norm.kind!r}")


def _check_exponent(e):
    if not (e == math.inf or e >= 1):
        raise ValueError(f"exponent must lie in [1, inf], got {e}")


def _time_weights(times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.size < 2:
        raise ValueError("need at least two times")
    dt = np.diff(times)
    if not np.allclose(dt, dt[0], rtol=1e-9, atol=0.0) or dt[0] <= 0:
        raise ValueError("mismatched grids: time grid must be uniform and increasing")
    w = np.full(times.size, dt[0])
    w[0] = w[-1] = dt[0] / 2
    return w


def mixed_spacetime_norm(series, times, p: float, spatial_norm: Norm | str,
                         order: str = "time_outside") -> float:
    """Space-time norm of a time series of fields on a uniform time grid.

    ``time_outside``: ``L^p_T`` (trapezoid) of the spatial norm.
    ``space_outside``: spatial ``L^q`` of the pointwise ``L^p_T`` norms; the
    spatial norm must then be a Lebesgue norm.
    """
    if isinstance(spatial_norm, str):
        spatial_norm = Norm.parse(spatial_norm)
    _check_exponent(p)
    series = list(series)
    if len(series) != len(times):
        raise ValueError("mismatched grids: one field per time required")
    shapes = {(f.coeffs.shape, f.box_length) for f in series}
    if len(shapes) != 1:
        raise ValueError("mismatched grids: fields differ in shape or box length")
    w = _time_weights(times)
    if order == "time_outside":
        vals = np.array([norm_eval(f, spatial_norm) for f in series])
        return float(vals.max()) if p == math.inf else float(np.sum(w * vals**p) ** (1.0 / p))
    if order != "space_outside":
        raise ValueError(f"unknown order {order!r}")
    if spatial_norm.kind != "L":
        raise ValueError("space_outside needs a Lebesgue spatial norm")
    mod = np.abs(np.array([f.physical() for f in series]))
    if p == math.inf:
        pointwise = mod.max(axis=0)
    else:
        pointwise = np.tensordot(w, mod**p, axes=(0, 0)) ** (1.0 / p)
    f0 = series[0]
    return _lp_sum(pointwise, f0.dx**f0.d, spatial_norm.q)


def is_admissible(p: float, q: float, d: int, tol: float = 1e-12) -> bool:
    """Schrödinger admissibility ``2/p + d/q = d/2`` with ``p, q >= 2``."""
    if p < 2 or q < 2:
        return False
    if d == 2 and p == 2 and q == math.inf:
        return False
    return abs(2.0 / p + d / q - d / 2.0) <= tol


def boundary_mass_fraction(field: SpectralField) -> float:
    """Share of the mass in the top dyadic shell ``|xi| > xi_max / 2``."""
    axi = field.abs_xi()
    top = np.abs(field.coeffs[axi > axi.max() / 2]) ** 2
    total = field.mass()
    return float(top.sum() / total) if total > 0 else 0.0


def warn_if_boundary_mass(field: SpectralField, tol: float = BOUNDARY_MASS_TOL) -> bool:
    frac = boundary_mass_fraction(field)
    if frac > tol:
        warnings.warn(f"{frac:.3g} of the mass sits in the top frequency shell; "
                      "the periodic box no longer resolves the whole-space problem",
                      RuntimeWarning, stacklevel=2)
        return True
    return False
