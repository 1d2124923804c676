"""Occupation measures, local times and their Fourier transforms.

All quantities are computed from the exact geometry of the piecewise-linear
path: a linear segment from ``w0`` to ``w1`` over a duration ``h`` spends time
``h * |J ∩ [w0, w1]| / |w1 - w0|`` in a value interval ``J``, and a constant
segment spends its whole duration at a single value. Sample-counting histograms
(:func:`histogram_local_time`) exist only as a cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .paths import ModulationPath

# |theta| below which (e^{i theta} - 1) / (i theta) is evaluated by its Taylor series
SERIES_SWITCH = 1e-4
# padding of the default bin range, in bins, on each side of the path range
PAD_BINS = 2


class InsufficientFrequencyRange(ValueError):
    """Raised when a frequency grid is too short for a stable decay fit."""


@dataclass(frozen=True, eq=False)
class LocalTimeField:
    """Binned local time ``L(t_i, z_k) = mu_[0,t_i]([z_k, z_k+1)) / dz``."""

    t_grid: np.ndarray
    z_edges: np.ndarray
    density: np.ndarray

    @property
    def dz(self) -> float:
        return float(self.z_edges[1] - self.z_edges[0])

    @property
    def z_centers(self) -> np.ndarray:
        return 0.5 * (self.z_edges[:-1] + self.z_edges[1:])

    def mass(self) -> np.ndarray:
        """Total occupation ``dz * sum_k L(t_i, z_k)`` for every ``t_i``."""
        return self.dz * self.density.sum(axis=1)

    def sup_norm(self) -> np.ndarray:
        return self.density.max(axis=1)

    def summary(self) -> dict:
        mass = self.mass()
        return {
            "n_times": int(self.t_grid.size),
            "n_bins": int(self.density.shape[1]),
            "dz": self.dz,
            "z_min": float(self.z_edges[0]),
            "z_max": float(self.z_edges[-1]),
            "sup_norm": self.sup_norm().tolist(),
            "mass": mass.tolist(),
            "max_mass_error": float(np.max(np.abs(mass - self.t_grid))),
        }


@dataclass(frozen=True)
class IrregularityEstimate:
    """Fitted Fourier decay of local-time increments for one Hölder exponent."""

    gamma: float
    rho_hat: float
    constant: float
    diagnostics: dict = field(default_factory=dict)


def _segments(path: ModulationPath):
    return path.w_values[:-1], path.w_values[1:], np.diff(path.t_grid)


def occupation_measure(path: ModulationPath, t: float, interval) -> float:
    """Lebesgue measure of ``{s in [0, t] : W_s in [a, b]}``."""
    a, b = map(float, interval)
    if not a < b:
        raise ValueError(f"degenerate interval [{a}, {b}]")
    if not 0.0 <= t <= path.horizon:
        raise ValueError(f"t={t} outside [0, {path.horizon}]")
    if t == 0.0:
        return 0.0
    w0, w1, h = _segments(path.restrict(t))
    lo = np.minimum(w0, w1)
    hi = np.maximum(w0, w1)
    flat = hi == lo
    span = np.where(flat, 1.0, hi - lo)
    overlap = np.clip(np.minimum(hi, b) - np.maximum(lo, a), 0.0, None)
    part = np.where(flat, np.where((lo >= a) & (lo <= b), h, 0.0), h * overlap / span)
    return math.fsum(part)


def default_edges(path: ModulationPath, n_bins: int, t_end: float | None = None) -> np.ndarray:
    """Uniform edges over the path range padded by ``PAD_BINS`` bins per side."""
    if n_bins < 2:
        raise ValueError(f"n_bins must be >= 2, got {n_bins}")
    p = path if t_end is None or t_end >= path.horizon else path.restrict(t_end)
    lo, hi = p.value_range()
    pad = PAD_BINS if n_bins > 2 * PAD_BINS else 0
    span = hi - lo if hi > lo else 1.0
    dz = span / (n_bins - 2 * pad)
    return lo - pad * dz + dz * np.arange(n_bins + 1)


def _segment_bin_masses(w0, w1, h, edges):
    """Exact time spent by each segment in each bin, as ``(segment, bin, mass)``."""
    nb = edges.size - 1
    lo = np.minimum(w0, w1)
    hi = np.maximum(w0, w1)
    flat = hi == lo

    kl = np.searchsorted(edges, lo, side="right") - 1
    kh = np.searchsorted(edges, hi, side="left") - 1
    # a segment lying entirely outside the bins contributes nothing
    inside = (hi > edges[0]) & (lo < edges[-1]) & ~flat
    kl = np.clip(kl, 0, nb - 1)
    kh = np.clip(kh, 0, nb - 1)
    count = np.where(inside, kh - kl + 1, 0)

    seg = np.repeat(np.nonzero(count)[0], count[count > 0])
    offs = np.arange(seg.size) - np.repeat(np.cumsum(count)[count > 0] - count[count > 0], count[count > 0])
    k = kl[seg] + offs
    overlap = np.minimum(hi[seg], edges[k + 1]) - np.maximum(lo[seg], edges[k])
    mass = h[seg] * np.clip(overlap, 0.0, None) / (hi[seg] - lo[seg])

    fk = np.searchsorted(edges, lo[flat], side="right") - 1
    fok = (fk >= 0) & (fk < nb)
    fseg = np.nonzero(flat)[0][fok]
    return (np.concatenate((seg, fseg)), np.concatenate((k, fk[fok])),
            np.concatenate((mass, h[fseg])))


def local_time(path: ModulationPath, t_grid, n_bins: int, z_range=None) -> LocalTimeField:
    """Binned local time at the times ``t_grid`` from exact segment geometry.

    Parameters
    ----------
    t_grid : array_like
        Increasing times in ``[0, T]``.
    n_bins : int
        Number of bins, ``>= 2``.
    z_range : (float, float), optional
        Bin range; defaults to the path range over ``[0, max(t_grid)]`` padded
        by two bins on each side.
    """
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if np.any(np.diff(t_grid) < 0):
        raise ValueError("t_grid must be nondecreasing")
    if n_bins < 2:
        raise ValueError(f"n_bins must be >= 2, got {n_bins}")
    t_max = float(t_grid.max())
    if z_range is None:
        edges = default_edges(path, n_bins, t_max if t_max > 0 else None)
    else:
        a, b = map(float, z_range)
        if not a < b:
            raise ValueError("z_range must be increasing")
        edges = np.linspace(a, b, n_bins + 1)

    fine = path.refine(t_grid)
    w0, w1, h = _segments(fine)
    seg_end = fine.t_grid[1:]
    # segment j belongs to the first requested time at or after its end
    slot = np.searchsorted(t_grid, seg_end, side="left")
    seg, k, mass = _segment_bin_masses(w0, w1, h, edges)
    slot = slot[seg]
    keep = slot < t_grid.size
    acc = np.bincount(slot[keep] * n_bins + k[keep], weights=mass[keep],
                      minlength=t_grid.size * n_bins).reshape(t_grid.size, n_bins)
    density = np.cumsum(acc, axis=0) / (edges[1] - edges[0])
    return LocalTimeField(t_grid, edges, density)


def histogram_local_time(path: ModulationPath, t: float, edges, n_samples: int) -> np.ndarray:
    """Sample-counting estimate of ``L(t, .)``; cross-check oracle only."""
    s = (np.arange(n_samples) + 0.5) * (t / n_samples)
    counts, _ = np.histogram(np.interp(s, path.t_grid, path.w_values), bins=edges)
    return counts * (t / n_samples) / np.diff(edges)


def _gauss_segments(F, w0, w1, h, order):
    x, wt = np.polynomial.legendre.leggauss(order)
    s = 0.5 * (x + 1.0)
    z = w0[:, None] + (w1 - w0)[:, None] * s[None, :]
    vals = np.asarray(F(z), dtype=float)
    if vals.shape != z.shape:
        vals = np.broadcast_to(vals, z.shape)
    _check_F(vals)
    return (0.5 * h[:, None] * wt[None, :] * vals).sum(axis=1)


def _check_F(vals):
    if not np.all(np.isfinite(vals)):
        raise ValueError("F returned non-finite values")
    if np.any(vals < 0):
        raise ValueError("F must be non-negative")


def integrate_along_path(path: ModulationPath, F, rtol: float = 1e-14, max_order: int = 128) -> float:
    """``∫_0^T F(W_t) dt`` by Gauss-Legendre per segment with order doubling."""
    w0, w1, h = _segments(path)
    order = 4
    prev = _gauss_segments(F, w0, w1, h, order)
    while order < max_order:
        order *= 2
        cur = _gauss_segments(F, w0, w1, h, order)
        if math.fsum(np.abs(cur - prev)) <= rtol * max(math.fsum(np.abs(cur)), 1e-300):
            return math.fsum(cur)
        prev = cur
    return math.fsum(prev)


def check_occupation_formula(path: ModulationPath, F, T: float, n_bins: int, z_range=None):
    """Both sides of ``∫_0^T F(W_t) dt = ∫ F(z) L(T, z) dz``.

    Returns ``(lhs, rhs, rel_err)``: the left side by per-segment quadrature,
    the right side as the midpoint sum of ``F`` against the binned occupation
    measure.
    """
    if not 0 < T <= path.horizon:
        raise ValueError(f"T={T} outside (0, {path.horizon}]")
    p = path.restrict(T) if T < path.horizon else path
    lhs = integrate_along_path(p, F)
    field_ = local_time(p, [T], n_bins, z_range=z_range)
    fz = np.asarray(F(field_.z_centers), dtype=float)
    _check_F(fz)
    rhs = math.fsum(fz * field_.density[0] * field_.dz)
    rel_err = abs(lhs - rhs) / max(abs(lhs), 1e-300)
    return lhs, rhs, rel_err


def localtime_modulus(path: ModulationPath, t_grid, n_bins: int, z_range=None):
    """``(t_i, sup_z L(t_i, z))`` on a common bin grid (that of ``max(t_grid)``)."""
    field_ = local_time(path, t_grid, n_bins, z_range=z_range)
    return np.column_stack((field_.t_grid, field_.sup_norm()))


def _phase_factor(theta):
    """``(e^{i theta} - 1) / (i theta)`` with a series branch near 0."""
    small = np.abs(theta) < SERIES_SWITCH
    th = np.where(small, 1.0, theta)
    exact = (np.exp(1j * th) - 1.0) / (1j * th)
    series = 1.0 + 1j * theta / 2 - theta**2 / 6 - 1j * theta**3 / 24
    return np.where(small, series, exact)


def fourier_localtime(path: ModulationPath, t, xi_grid, chunk: int = 1 << 22):
    """``Phi_t(xi) = ∫_0^t exp(i xi W_s) ds``, exact per linear segment.

    ``t`` may be a scalar (result shape ``(len(xi),)``) or an increasing array
    of times (result shape ``(len(t), len(xi))``).
    """
    xi = np.atleast_1d(np.asarray(xi_grid, dtype=float))
    scalar = np.ndim(t) == 0
    times = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(np.diff(times) < 0):
        raise ValueError("times must be nondecreasing")
    fine = path.refine(times[times > 0]) if np.any(times > 0) else path
    h = np.diff(fine.t_grid)
    slot = np.searchsorted(times, fine.t_grid[1:], side="left")
    m = int(np.count_nonzero(slot < times.size))  # segments past max(times) are a suffix
    nodes, h, slot = fine.w_values[:m + 1], h[:m], slot[:m]
    dw = np.diff(nodes)

    out = np.zeros((times.size, xi.size), dtype=complex)
    step = max(1, chunk // max(1, nodes.size))
    for j in range(0, xi.size, step):
        x = xi[j:j + step]
        e = np.exp(1j * nodes[:, None] * x[None, :])
        theta = dw[:, None] * x[None, :]
        small = np.abs(theta) < SERIES_SWITCH
        c = (e[1:] - e[:-1]) / (1j * np.where(small, 1.0, theta))
        if small.any():
            c[small] = e[:-1][small] * _phase_factor(theta[small])
        c *= h[:, None]
        acc = np.zeros((times.size, x.size), dtype=complex)
        _grouped_sum(acc, slot, c)
        out[:, j:j + step] = np.cumsum(acc, axis=0)
    return out[0] if scalar else out


def _grouped_sum(acc, slot, c):
    # slot is nondecreasing: contiguous groups
    starts = np.flatnonzero(np.r_[True, slot[1:] != slot[:-1]])
    acc[slot[starts]] = np.add.reduceat(c, starts, axis=0)


def dyadic_time_pairs(T: float, levels: int):
    """Pairs ``(k T 2^-j, (k+1) T 2^-j)`` for ``j = 0..levels``."""
    pairs = []
    for j in range(levels + 1):
        d = T / 2**j
        pairs.extend((k * d, (k + 1) * d) for k in range(2**j))
    return np.array(pairs)


def japanese(x):
    return np.sqrt(1.0 + np.asarray(x, dtype=float) ** 2)


def estimate_irregularity(
    path: ModulationPath,
    gamma_grid,
    xi_grid,
    time_pairs=None,
    n_subbins: int = 8,
) -> list[IrregularityEstimate]:
    """Fit the Fourier decay exponent of local-time increments, per ``gamma``.

    For each ``gamma`` the envelope ``E(xi) = sup_{(s,t)} |Phi_t(xi) -
    Phi_s(xi)| / |t - s|^gamma`` is formed over the time pairs, its upper
    envelope over ``n_subbins`` logarithmic sub-bins of the largest frequency
    decade is regressed against ``log <xi>``, and ``rho_hat`` is minus the
    slope. ``constant`` is ``sup <xi>^rho_hat E(xi)`` over that decade.
    """
    xi = np.asarray(xi_grid, dtype=float)
    axi = np.abs(xi)
    top = axi.max()
    if axi[axi > 0].min() * 100 > top:
        raise InsufficientFrequencyRange("xi_grid must span at least two decades")
    fit_mask = axi >= top / 10
    if fit_mask.sum() < 2 * n_subbins:
        raise InsufficientFrequencyRange(
            f"need >= {2 * n_subbins} frequencies in the top decade, got {int(fit_mask.sum())}")

    if time_pairs is None:
        levels = max(0, int(math.floor(math.log2(max(path.n_steps, 4) / 4))))
        levels = min(levels, int(math.ceil(math.log2(path.horizon * top))) + 2)
        time_pairs = dyadic_time_pairs(path.horizon, levels)
    time_pairs = np.asarray(time_pairs, dtype=float)
    if np.any(time_pairs[:, 1] <= time_pairs[:, 0]):
        raise ValueError("time pairs must satisfy s < t")
    times = np.unique(time_pairs.ravel())
    phi = fourier_localtime(path, times, xi)
    i_s = np.searchsorted(times, time_pairs[:, 0])
    i_t = np.searchsorted(times, time_pairs[:, 1])
    delta_phi = np.abs(phi[i_t] - phi[i_s])
    dt = time_pairs[:, 1] - time_pairs[:, 0]

    lx = np.log(japanese(xi[fit_mask]))
    sub_edges = np.linspace(lx.min(), lx.max() + 1e-12, n_subbins + 1)
    which = np.clip(np.searchsorted(sub_edges, lx, side="right") - 1, 0, n_subbins - 1)

    results = []
    for gamma in np.atleast_1d(gamma_grid):
        gamma = float(gamma)
        if not 0.0 <= gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
        env = (delta_phi / dt[:, None] ** gamma).max(axis=0)
        e_fit = env[fit_mask]
        xs, ys = [], []
        for b in range(n_subbins):
            sel = np.nonzero(which == b)[0]
            if sel.size:
                i = sel[np.argmax(e_fit[sel])]
                xs.append(lx[i])
                ys.append(math.log(max(e_fit[i], 1e-300)))
        xs, ys = np.array(xs), np.array(ys)
        slope, intercept = np.polyfit(xs, ys, 1)
        rho_hat = -float(slope)
        constant = float(np.max(np.exp(rho_hat * lx) * e_fit))
        results.append(IrregularityEstimate(
            gamma=gamma,
            rho_hat=rho_hat,
            constant=constant,
            diagnostics={
                "time_window": [0.0, float(path.horizon)],
                "n_pairs": int(dt.size),
                "fit_xi_range": [float(top / 10), float(top)],
                "slope": float(slope),
                "intercept": float(intercept),
                "log_bracket_xi": xs.tolist(),
                "log_envelope": ys.tolist(),
                "residuals": (ys - (slope * xs + intercept)).tolist(),
            },
        ))
    return results
