"""Modulated dispersive solvers in the mild formulation.

The equation ``du/dt = (dW/dt) * L u + N(u)`` is never integrated with the
derivative of ``W``. Linear sub-steps use the exact path increment
``W(t + dt) - W(t)``:

* power NLS and Wick cubic NLS: Lie or Strang splitting between the exact
  linear flow and the exact pointwise phase rotation of the nonlinear flow;
* quintic gKdV: fourth-order Runge-Kutta in the interaction picture
  ``v = exp(-i phi W_t) u_hat`` with a dealiased pseudo-spectral ``(u^5)_x``.

Sign conventions (linear flow ``u_hat -> exp(+i phi dw) u_hat``):
focusing NLS rotates by ``exp(-i tau |u|^{2m})``, defocusing by
``exp(+i tau |u|^{2m})``; focusing gKdV is ``u_t + W' u_xxx + u^4 u_x = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .paths import ModulationPath, eval_path
from .spectral import (DispersionSymbol, SpectralField, mixed_spacetime_norm, propagate_linear,
                       warn_if_boundary_mass)

NONLINEARITIES = ("power_nls", "wick_cubic", "gkdv_quintic", "none")
SCHEMES = ("lie", "strang", "if_rk4")


@dataclass(frozen=True)
class Nonlinearity:
    kind: str = "power_nls"
    sign: str = "defocusing"
    m: int = 1

    def __post_init__(self):
        if self.kind not in NONLINEARITIES:
            raise ValueError(f"unknown nonlinearity {self.kind!r}")
        if self.sign not in ("focusing", "defocusing"):
            raise ValueError(f"sign must be 'focusing' or 'defocusing', got {self.sign!r}")
        if self.kind == "power_nls" and (int(self.m) != self.m or self.m < 1):
            raise ValueError(f"power_nls needs a positive integer m, got {self.m}")

    @property
    def rotation(self) -> float:
        """Sign of the nonlinear phase rotation for NLS-type flows."""
        return -1.0 if self.sign == "focusing" else 1.0


@dataclass(frozen=True)
class ModelSpec:
    symbol: DispersionSymbol = field(default_factory=DispersionSymbol)
    nonlinearity: Nonlinearity = field(default_factory=Nonlinearity)
    dealias_fraction: float | None = None

    def __post_init__(self):
        nl = self.nonlinearity
        if nl.kind == "gkdv_quintic" and self.symbol.kind != "airy":
            raise ValueError("gkdv_quintic requires the airy symbol")
        if nl.kind == "wick_cubic" and self.symbol.kind != "schroedinger":
            raise ValueError("wick_cubic requires the schroedinger symbol")
        frac = self.dealias
        if not 0 < frac <= 1:
            raise ValueError(f"dealias_fraction must lie in (0, 1], got {frac}")

    @property
    def dealias(self) -> float:
        if self.dealias_fraction is not None:
            return float(self.dealias_fraction)
        return 2.0 / 3.0 if self.nonlinearity.kind == "gkdv_quintic" else 1.0

    @property
    def real_valued(self) -> bool:
        return self.nonlinearity.kind == "gkdv_quintic"


@dataclass(frozen=True)
class RunConfig:
    dt: float
    T: float
    scheme: str = "strang"
    blowup_threshold: float = 10.0
    h1_threshold: float | None = None
    snapshot_stride: int = 1
    adaptive: bool = False
    mass_tol: float = 1e-8
    max_halvings: int = 8
    check_boundary: bool = False

    @property
    def h1_limit(self) -> float:
        """H1 multiplier; defaults to the L-infinity one."""
        return self.blowup_threshold if self.h1_threshold is None else self.h1_threshold

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.T > 0:
            raise ValueError("T must be positive")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if not self.blowup_threshold > 1:
            raise ValueError("blowup_threshold must exceed 1")
        if self.h1_threshold is not None and not self.h1_threshold > 1:
            raise ValueError("h1_threshold must exceed 1")
        if int(self.snapshot_stride) != self.snapshot_stride or self.snapshot_stride < 1:
            raise ValueError("snapshot_stride must be a positive integer")


@dataclass(eq=False)
class Trajectory:
    times: np.ndarray
    fields: list
    diag_times: np.ndarray
    mass: np.ndarray
    h1: np.ndarray
    linf: np.ndarray
    status: str = "completed"
    t_star: float | None = None
    fired: list = field(default_factory=list)
    stride: int = 1
    dt: float = 0.0

    def mass_drift(self) -> float:
        return float(np.max(np.abs(self.mass - self.mass[0])) / self.mass[0])

    def summary(self) -> dict:
        return {
            "status": self.status,
            "t_star": self.t_star,
            "fired": list(self.fired),
            "final_time": float(self.diag_times[-1]),
            "mass_drift": self.mass_drift(),
            "max_linf_ratio": float(self.linf.max() / self.linf[0]),
            "max_h1_ratio": float(self.h1.max() / self.h1[0]),
            "n_steps": int(self.diag_times.size - 1),
            "dt": self.dt,
        }


def _dealias_mask(field: SpectralField, fraction: float) -> np.ndarray:
    if fraction >= 1.0:
        return np.ones(field.coeffs.shape, dtype=bool)
    n = np.abs(field.modes()).max(axis=0)
    return n <= fraction * field.N / 2


def nonlinear_step_exact(field: SpectralField, nonlinearity: Nonlinearity, tau: float) -> SpectralField:
    """Exact flow of the NLS-type nonlinear sub-equation over time ``tau``.

    ``|u|`` is conserved pointwise by that sub-flow, so it is a pure phase
    rotation; the Wick-ordered version subtracts ``2 ||u||^2_{L^2}``.
    """
    kind = nonlinearity.kind
    if kind == "gkdv_quintic":
        raise ValueError("gkdv_quintic has no exact nonlinear flow; use scheme='if_rk4'")
    if tau == 0 or kind == "none":
        return field
    u = field.physical()
    if kind == "power_nls":
        phase = np.abs(u) ** (2 * nonlinearity.m)
    else:
        phase = np.abs(u) ** 2 - 2.0 * field.mass()
    return SpectralField.from_physical(u * np.exp(1j * nonlinearity.rotation * tau * phase),
                                       field.box_length, field.real_valued)


class _QuinticFlux:
    """``-s/5 d_x (u^5)`` for real ``u``, dealiased, products on a 3x padded grid."""

    def __init__(self, field: SpectralField, sign: str, fraction: float):
        self.N = field.N
        self.M = 3 * field.N
        self.L = field.box_length
        self.mask = _dealias_mask(field, fraction)
        n = field.modes()[0]
        xi = 2 * math.pi / self.L * n
        xi[n == -self.N // 2] = 0.0
        self.deriv = 1j * xi * self.mask
        self.idx = np.mod(n, self.M)
        self.coef = -(1.0 if sign == "focusing" else -1.0) / 5.0

    def __call__(self, uh: np.ndarray) -> np.ndarray:
        pad = np.zeros(self.M, dtype=complex)
        pad[self.idx] = uh * self.mask
        u = np.fft.ifft(pad).real * (self.M / math.sqrt(self.L))
        g = np.fft.fft(u**5)[self.idx] * (math.sqrt(self.L) / self.M)
        return self.coef * self.deriv * g


class _Diagnostics:
    """Mass, H1 norm and grid maximum; the H1 weights are computed once per run."""

    def __init__(self, field: SpectralField):
        self.w2 = 1.0 + field.abs_xi() ** 2

    def __call__(self, field: SpectralField):
        a2 = np.abs(field.coeffs) ** 2
        return (float(a2.sum()), float(np.sqrt(np.sum(self.w2 * a2))),
                float(np.max(np.abs(field.physical()))))


def _check_inputs(model: ModelSpec, path: ModulationPath, u0: SpectralField, config: RunConfig):
    if path.horizon < config.T * (1 - 1e-12):
        raise ValueError(f"path horizon {path.horizon} is shorter than T={config.T}")
    if model.real_valued != u0.real_valued:
        raise ValueError("initial data real/complex type does not match the model")
    if model.nonlinearity.kind == "gkdv_quintic":
        if config.scheme != "if_rk4":
            raise ValueError("gkdv_quintic runs use scheme='if_rk4'")
        if u0.d != 1:
            raise ValueError("gkdv is one-dimensional")
    elif config.scheme == "if_rk4" and model.nonlinearity.kind != "none":
        raise ValueError("if_rk4 is reserved for gkdv_quintic")
    if model.nonlinearity.kind == "wick_cubic" and u0.d != 1:
        raise ValueError("the Wick-ordered model is one-dimensional")
    if config.adaptive and model.nonlinearity.kind != "gkdv_quintic":
        raise ValueError("adaptive stepping is only available for gkdv_quintic")


def step_times(path: ModulationPath, config: RunConfig) -> np.ndarray:
    """Uniform step times; ``dt`` snaps to a multiple of a uniform random-path grid."""
    dt = config.dt
    if path.kind.get("kind") in ("brownian", "fbm"):
        h = float(path.t_grid[1] - path.t_grid[0])
        dt = max(1, round(dt / h)) * h
    n = round(config.T / dt)
    if n < 1 or abs(n * dt - config.T) > 1e-9 * config.T:
        raise ValueError(f"dt={dt} does not divide T={config.T}")
    t = np.arange(n + 1) * dt
    t[-1] = config.T
    return t


def run_modulated(model: ModelSpec, path: ModulationPath, u0: SpectralField,
                  config: RunConfig) -> Trajectory:
    """Integrate the modulated equation from ``u0`` along ``path`` up to ``config.T``."""
    _check_inputs(model, path, u0, config)
    times = step_times(path, config)
    w = eval_path(path, times)
    nl = model.nonlinearity
    symbol = model.symbol
    mask = _dealias_mask(u0, model.dealias)

    u = u0
    if model.dealias < 1.0:
        u = u.with_coeffs(u.coeffs * mask)
    _diagnostics = _Diagnostics(u)
    m0, h0, l0 = _diagnostics(u)
    diag = [(0.0, m0, h0, l0)]
    snaps_t, snaps = [0.0], [u]
    status, t_star, fired = "completed", None, []

    if nl.kind == "gkdv_quintic":
        flux = _QuinticFlux(u, nl.sign, model.dealias)
        phase = symbol.phase(u)

    def nls_step(v: SpectralField, dt: float, dw: float) -> SpectralField:
        if config.scheme == "lie":
            v = nonlinear_step_exact(v, nl, dt)
            v = propagate_linear(v, symbol, dw)
        else:
            v = nonlinear_step_exact(v, nl, dt / 2)
            v = propagate_linear(v, symbol, dw)
            v = nonlinear_step_exact(v, nl, dt / 2)
        if model.dealias < 1.0:
            v = v.with_coeffs(v.coeffs * mask)
        return v

    def rk4_step(uh: np.ndarray, t0: float, dt: float) -> np.ndarray:
        w0 = eval_path(path, t0)
        dh = eval_path(path, t0 + dt / 2) - w0
        d1 = eval_path(path, t0 + dt) - w0
        eh, e1 = np.exp(1j * phase * dh), np.exp(1j * phase * d1)
        k1 = flux(uh)
        k2 = flux(eh * (uh + dt / 2 * k1)) / eh
        k3 = flux(eh * (uh + dt / 2 * k2)) / eh
        k4 = flux(e1 * (uh + dt * k3)) / e1
        return e1 * (uh + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4))

    def adaptive_step(uh: np.ndarray, t0: float, dt: float, depth: int) -> np.ndarray:
        new = rk4_step(uh, t0, dt)
        m_old = np.sum(np.abs(uh) ** 2)
        drift = abs(np.sum(np.abs(new) ** 2) - m_old) / m_old
        if drift <= config.mass_tol or depth >= config.max_halvings:
            return new
        mid = adaptive_step(uh, t0, dt / 2, depth + 1)
        return adaptive_step(mid, t0 + dt / 2, dt / 2, depth + 1)

    for j in range(1, times.size):
        t_prev, t = times[j - 1], times[j]
        dt = t - t_prev
        with np.errstate(over="ignore", invalid="ignore"):
            if nl.kind == "gkdv_quintic":
                uh = (adaptive_step(u.coeffs, t_prev, dt, 0) if config.adaptive
                      else rk4_step(u.coeffs, t_prev, dt))
                if not np.all(np.isfinite(uh)):
                    status, t_star = "nan", float(t)
                    break
                # keep the field exactly real
                uh = np.fft.fft(np.fft.ifft(uh).real)
                u = u.with_coeffs(uh)
            else:
                try:
                    u = nls_step(u, dt, w[j] - w[j - 1])
                except ValueError:
                    status, t_star = "nan", float(t)
                    break
        m, h1, linf = _diagnostics(u)
        if not all(math.isfinite(v) for v in (m, h1, linf)):
            status, t_star = "nan", float(t)
            break
        diag.append((float(t), m, h1, linf))
        if j % config.snapshot_stride == 0 or j == times.size - 1:
            snaps_t.append(float(t))
            snaps.append(u)
            if config.check_boundary:
                warn_if_boundary_mass(u)
        if linf > config.blowup_threshold * l0:
            fired.append("linf")
        if h1 > config.h1_limit * h0:
            fired.append("h1")
        if fired:
            status, t_star = "blowup", float(t)
            break

    d = np.array(diag)
    return Trajectory(
        times=np.array(snaps_t), fields=snaps, diag_times=d[:, 0], mass=d[:, 1], h1=d[:, 2],
        linf=d[:, 3], status=status, t_star=t_star, fired=fired,
        stride=int(config.snapshot_stride), dt=float(times[1] - times[0]),
    )


def linear_series(u0: SpectralField, symbol: DispersionSymbol, path: ModulationPath,
                  times) -> list[SpectralField]:
    """``exp(i phi (W_t - W_0)) u0`` at each of ``times``, without time stepping."""
    w = eval_path(path, np.asarray(times, dtype=float))
    w0 = eval_path(path, 0.0)
    return [propagate_linear(u0, symbol, wi - w0) for wi in np.atleast_1d(w)]


def linear_lq_profile(u0: SpectralField, symbol: DispersionSymbol, z, q: float = 4.0,
                      chunk: int = 4096) -> np.ndarray:
    """``||exp(i phi z) u0||_{L^q}^q`` for every path value in ``z`` (batched FFTs)."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    phase = symbol.phase(u0)
    c = u0.coeffs
    axes = tuple(range(1, u0.d + 1))
    scale = u0.N**u0.d / u0.box_length ** (u0.d / 2)
    out = np.empty(z.size)
    for s in range(0, z.size, chunk):
        zz = z[s:s + chunk].reshape((-1,) + (1,) * u0.d)
        u = np.fft.ifftn(c[None] * np.exp(1j * zz * phase[None]), axes=axes) * scale
        if u0.real_valued:
            u = u.real
        out[s:s + chunk] = np.sum(np.abs(u) ** q, axis=axes) * u0.dx**u0.d
    return out


def strichartz_accumulate(trajectory: Trajectory, p: float, spatial_norm, order: str = "time_outside") -> float:
    """Space-time norm of a stride-1 trajectory."""
    if trajectory.stride != 1:
        raise ValueError(f"snapshot stride {trajectory.stride} is too coarse; rerun with stride 1")
    if trajectory.status != "completed":
        raise ValueError(f"trajectory ended with status {trajectory.status!r}")
    return mixed_spacetime_norm(trajectory.fields, trajectory.times, p, spatial_norm, order)


def gaussian_bump(N: int, box_length: float = 2 * math.pi, amplitude: float = 1.0,
                  width: float = 0.5, center: float | None = None, real: bool = False,
                  d: int = 1) -> SpectralField:
    """``amplitude * exp(-|x - center|^2 / (2 width^2))`` on the periodic grid."""
    x = np.arange(N) * (box_length / N)
    c = box_length / 2 if center is None else center
    r2 = sum(g**2 for g in np.meshgrid(*([x - c] * d), indexing="ij"))
    u = amplitude * np.exp(-r2 / (2 * width**2))
    return SpectralField.from_physical(u if real else u.astype(complex), box_length, real)
