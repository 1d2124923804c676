"""Modulation paths ``W_t`` stored as piecewise-linear interpolants.

A path is a strictly increasing time grid starting at 0 together with the path
values on that grid. Everything downstream (occupation measures, Fourier
transforms of local time, solver increments) treats the path as the continuous
piecewise-linear function through those nodes, never as a bag of samples.

Generators
----------
``identity``            W_t = t.
``dispersion_managed``  periodic, piecewise-constant derivative given by a rate
                        table; integrated exactly at the breakpoints.
``brownian``            scaled Brownian motion on a uniform grid.
``fbm``                 fractional Brownian motion (circulant embedding, dense
                        Cholesky fallback).
``file``                two-column ``t,w`` CSV.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .rng import STREAM_PATH, make_rng

PATH_KINDS = ("identity", "dispersion_managed", "brownian", "fbm", "file")


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ModulationPath:
    """Continuous piecewise-linear path through ``(t_grid[k], w_values[k])``.

    Parameters
    ----------
    t_grid : array_like
        Strictly increasing times, ``t_grid[0] == 0``.
    w_values : array_like
        Path values at the grid times.
    kind : dict
        Generator tag (name and parameters); informational only.
    """

    t_grid: np.ndarray
    w_values: np.ndarray
    kind: dict = field(default_factory=lambda: {"kind": "custom"})

    def __post_init__(self):
        t = _frozen(self.t_grid)
        w = _frozen(self.w_values)
        if t.ndim != 1 or w.ndim != 1:
            raise ValueError("t_grid and w_values must be one-dimensional")
        if t.size < 2:
            raise ValueError("a path needs at least two grid points")
        if t.shape != w.shape:
            raise ValueError(f"t_grid and w_values differ in length ({t.size} vs {w.size})")
        if t[0] != 0.0:
            raise ValueError(f"t_grid must start at 0, got {t[0]!r}")
        if not np.all(np.diff(t) > 0):
            raise ValueError("t_grid must be strictly increasing")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(w))):
            raise ValueError("path contains non-finite values")
        object.__setattr__(self, "t_grid", t)
        object.__setattr__(self, "w_values", w)
        object.__setattr__(self, "kind", dict(self.kind))

    @property
    def horizon(self) -> float:
        return float(self.t_grid[-1])

    @property
    def n_steps(self) -> int:
        return self.t_grid.size - 1

    def __call__(self, t):
        return eval_path(self, t)

    def increments(self) -> np.ndarray:
        return np.diff(self.w_values)

    def refine(self, times) -> "ModulationPath":
        """Same continuous path with extra nodes inserted at ``times``."""
        times = np.asarray(times, dtype=float).ravel()
        _check_times(self, times)
        t = np.union1d(self.t_grid, times)
        return ModulationPath(t, np.interp(t, self.t_grid, self.w_values), self.kind)

    def restrict(self, t_end: float) -> "ModulationPath":
        """The path on ``[0, t_end]`` (``t_end > 0``)."""
        _check_times(self, [t_end])
        if t_end <= 0:
            raise ValueError("restriction horizon must be positive")
        keep = self.t_grid < t_end
        t = np.append(self.t_grid[keep], t_end)
        w = np.append(self.w_values[keep], float(np.interp(t_end, self.t_grid, self.w_values)))
        return ModulationPath(t, w, self.kind)

    def value_range(self) -> tuple[float, float]:
        return float(self.w_values.min()), float(self.w_values.max())


def _check_times(path: ModulationPath, t) -> None:
    t = np.asarray(t, dtype=float)
    if t.size and (np.any(~np.isfinite(t)) or t.min() < 0.0 or t.max() > path.horizon):
        raise ValueError(f"time outside [0, {path.horizon}]")


def eval_path(path: ModulationPath, t):
    """Piecewise-linear evaluation of ``path`` at time(s) ``t`` in ``[0, T]``."""
    _check_times(path, t)
    out = np.interp(t, path.t_grid, path.w_values)
    return float(out) if np.ndim(out) == 0 else out


def gen_path(
    kind: str,
    T: float,
    n: int,
    seed: int | None = None,
    *,
    hurst: float | None = None,
    rates=None,
    breakpoints=None,
    period: float | None = None,
    scale: float = 1.0,
    file: str | Path | None = None,
) -> ModulationPath:
    """Generate a modulation path on a uniform grid of ``n`` steps over ``[0, T]``.

    Parameters
    ----------
    kind : str
        One of ``PATH_KINDS``.
    T : float
        Horizon, ``T > 0``.
    n : int
        Number of steps; the grid has ``n + 1`` points ``k T / n``.
    seed : int, optional
        Required for ``brownian`` and ``fbm``.
    hurst : float
        Hurst exponent in (0, 1), ``fbm`` only.
    rates, breakpoints, period
        ``dispersion_managed`` only. ``rates[k]`` is the slope on the k-th
        piece of each period, the pieces being separated by ``breakpoints``
        (times inside ``(0, period)``). ``period`` defaults to ``T``.
    scale : float
        Multiplies random paths (noise amplitude).
    file : path-like
        Source CSV for ``kind="file"``; ``T`` and ``n`` are then ignored.
    """
    if kind == "file":
        if file is None:
            raise ValueError("kind='file' needs a file argument")
        return load_path_csv(file)
    if kind not in PATH_KINDS:
        raise ValueError(f"unknown path kind {kind!r}; expected one of {PATH_KINDS}")
    if not T > 0:
        raise ValueError(f"horizon T must be positive, got {T}")
    n = int(n)
    if n < 1:
        raise ValueError(f"step count n must be >= 1, got {n}")
    t = np.arange(n + 1) * (T / n)
    t[-1] = T

    if kind == "identity":
        return ModulationPath(t, t.copy(), {"kind": "identity"})

    if kind == "dispersion_managed":
        w, tag = _dispersion_managed(t, T, n, rates, breakpoints, period)
        return ModulationPath(t, w, tag)

    if seed is None:
        raise ValueError(f"kind={kind!r} is random and requires a seed")
    rng = make_rng(seed, STREAM_PATH)
    if kind == "brownian":
        dw = rng.standard_normal(n) * math.sqrt(T / n)
        tag = {"kind": "brownian", "seed": int(seed), "scale": float(scale)}
    else:
        if hurst is None or not 0.0 < hurst < 1.0:
            raise ValueError(f"Hurst exponent must lie in (0, 1), got {hurst}")
        dw, method = fgn_increments(rng, n, T, hurst)
        tag = {"kind": "fbm", "seed": int(seed), "hurst": float(hurst),
               "scale": float(scale), "method": method}
    w = np.concatenate(([0.0], np.cumsum(dw * scale)))
    return ModulationPath(t, w, tag)


def _dispersion_managed(t, T, n, rates, breakpoints, period):
    if rates is None or len(rates) == 0:
        raise ValueError("dispersion-managed path needs a nonempty rate table")
    rates = np.asarray(rates, dtype=float)
    if np.any(rates == 0):
        raise ValueError("dispersion-managed rates must be nonzero")
    period = float(T if period is None else period)
    if period <= 0:
        raise ValueError("period must be positive")
    bp = np.asarray([] if breakpoints is None else breakpoints, dtype=float)
    if bp.size != rates.size - 1:
        raise ValueError(f"{rates.size} rates need {rates.size - 1} breakpoints, got {bp.size}")
    nodes = np.concatenate(([0.0], bp, [period]))
    if np.any(np.diff(nodes) <= 0):
        raise ValueError("breakpoints must be strictly increasing inside (0, period)")

    # every switching time in [0, T] has to sit on the uniform grid
    h = T / n
    n_periods = int(math.ceil(T / period - 1e-12))
    switches = (np.arange(n_periods + 1)[:, None] * period + nodes[None, :-1]).ravel()
    switches = switches[(switches > 0) & (switches < T)]
    k = switches / h
    if np.any(np.abs(k - np.round(k)) > 1e-9 * max(1.0, float(np.max(k, initial=1.0)))):
        raise ValueError(f"n={n} is too small to resolve the breakpoints on [0, {T}]")

    cum = np.concatenate(([0.0], np.cumsum(rates * np.diff(nodes))))
    q = np.floor(t / period)
    r = t - q * period
    w = q * cum[-1] + np.interp(r, nodes, cum)
    tag = {"kind": "dispersion_managed", "rates": rates.tolist(),
           "breakpoints": bp.tolist(), "period": period}
    return w, tag


def fgn_autocovariance(k, h: float, hurst: float) -> np.ndarray:
    """Autocovariance of fractional Gaussian noise with step ``h`` at lags ``k``."""
    k = np.abs(np.asarray(k, dtype=float))
    H2 = 2.0 * hurst
    return 0.5 * h**H2 * ((k + 1) ** H2 - 2 * k**H2 + np.abs(k - 1) ** H2)


def fbm_covariance(s, t, hurst: float):
    """Covariance ``(s^2H + t^2H - |t-s|^2H) / 2`` of standard fBm."""
    H2 = 2.0 * hurst
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    return 0.5 * (np.abs(s) ** H2 + np.abs(t) ** H2 - np.abs(t - s) ** H2)


def fgn_increments(rng: np.random.Generator, n: int, T: float, hurst: float):
    """Exact fGn increments on ``n`` uniform steps; returns ``(increments, method)``."""
    h = T / n
    gamma = fgn_autocovariance(np.arange(n + 1), h, hurst)
    row = np.concatenate((gamma, gamma[-2:0:-1])) if n > 1 else gamma[:1]
    eig = np.fft.fft(row).real
    if n > 1 and eig.min() >= -1e-12 * eig.max():
        m = row.size
        z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        y = np.fft.fft(np.sqrt(np.clip(eig, 0.0, None) / m) * z)
        return y.real[:n].copy(), "circulant"
    # dense Cholesky of the Toeplitz increment covariance
    lags = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    chol = np.linalg.cholesky(fgn_autocovariance(lags, h, hurst))
    return chol @ rng.standard_normal(n), "cholesky"


def load_path_csv(filename: str | Path) -> ModulationPath:
    """Read a ``t,w`` CSV (with header) into a validated path."""
    filename = Path(filename)
    with filename.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["t", "w"]:
        raise ValueError(f"{filename}: expected header 't,w'")
    try:
        data = np.array([[float(a), float(b)] for a, b in rows[1:]], dtype=float)
    except ValueError as exc:
        raise ValueError(f"{filename}: malformed row ({exc})") from None
    if data.shape[0] < 2:
        raise ValueError(f"{filename}: need at least two rows")
    return ModulationPath(data[:, 0], data[:, 1], {"kind": "file", "file": str(filename)})


def save_path_csv(path: ModulationPath, filename: str | Path) -> None:
    with Path(filename).open("w", newline="") as fh:
        fh.write("t,w\n")
        for t, w in zip(path.t_grid, path.w_values):
            fh.write(f"{t:.17g},{w:.17g}\n")
