"""p-variation numerics for right-continuous step functions.

A :class:`DiscretePath` is a step function ``u(t) = u_k`` on ``[t_k, t_{k+1})``
with values in ``C^M``. The stored grid is the whole universe: ``vp_norm`` is
the exact supremum over every sub-partition of it, found by dynamic
programming. U^p norms are infima over atomic decompositions and are only
bounded from above here; the duality pairing gives certified lower bounds for
the dual norm.

Endpoint conventions are fixed by the constructor used:

``DiscretePath.plain``  samples as given.
``DiscretePath.vp``     a terminal zero is appended at the horizon (V^p).
``DiscretePath.up``     the first value must vanish (U^p).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .rng import STREAM_WITNESS, make_rng

CONVENTIONS = ("plain", "vp", "up")
BRUTE_FORCE_MAX_POINTS = 16
NORMALIZATION_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DiscretePath:
    """Step function ``u(t) = values[k]`` on ``[times[k], times[k+1])``.

    Build it through :meth:`plain`, :meth:`vp` or :meth:`up`; the convention
    decides which samples the p-variation sees.
    """

    times: np.ndarray
    values: np.ndarray
    horizon: float
    convention: str = "plain"

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        v = np.array(self.values, dtype=complex)
        if v.ndim == 1:
            v = v[:, None]
        if t.ndim != 1 or v.ndim != 2 or t.size != v.shape[0]:
            raise ValueError("times must be 1-d and values must have one row per time")
        if t.size == 0:
            raise ValueError("empty path")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise ValueError("path contains non-finite entries")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        horizon = float(self.horizon)
        if t[0] < 0 or not horizon > t[-1]:
            raise ValueError(f"times must lie in [0, {horizon})")
        if self.convention not in CONVENTIONS:
            raise ValueError(f"unknown convention {self.convention!r}")
        if self.convention == "up" and np.any(v[0] != 0):
            raise ValueError("U^p paths must vanish at the left endpoint (nonzero left value)")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "horizon", horizon)

    @classmethod
    def plain(cls, times, values, horizon=None):
        times = np.asarray(times, dtype=float)
        if horizon is None:
            horizon = times[-1] + (times[-1] - times[-2] if times.size > 1 else 1.0)
        return cls(times, values, horizon, "plain")

    @classmethod
    def vp(cls, times, values, horizon):
        return cls(times, values, horizon, "vp")

    @classmethod
    def up(cls, times, values, horizon):
        return cls(times, values, horizon, "up")

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def __len__(self):
        return self.times.size

    def widths(self) -> np.ndarray:
        """Lengths of the constancy intervals, the last one ending at the horizon."""
        return np.diff(np.append(self.times, self.horizon))

    def samples(self) -> np.ndarray:
        """Values seen by the p-variation (terminal zero appended for ``vp``)."""
        if self.convention == "vp":
            return np.vstack((self.values, np.zeros((1, self.dim), complex)))
        return self.values

    def as_vp(self) -> "DiscretePath":
        return DiscretePath(self.times, self.values, self.horizon, "vp")


def _pair_powers(samples: np.ndarray, p: float) -> np.ndarray:
    # D[..., i, j] = |u_j - u_i|^p
    diff = samples[..., None, :, :] - samples[..., :, None, :]
    return np.linalg.norm(diff, axis=-1) ** p


def vp_dp_batch(samples, p: float) -> np.ndarray:
    """Exact p-variation of a batch of sample sequences.

    Parameters
    ----------
    samples : array_like, shape (B, K, M) or (K, M) or (K,)
    p : float
        ``p >= 1``.

    Returns
    -------
    ndarray, shape (B,) (or scalar for unbatched input)
    """
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    x = np.asarray(samples)
    single = x.ndim < 3
    if x.ndim == 1:
        x = x[:, None]
    if single:
        x = x[None]
    K = x.shape[1]
    if K == 0:
        raise ValueError("empty path")
    if K == 1:
        out = np.zeros(x.shape[0])
        return out[0] if single else out
    D = _pair_powers(x.astype(complex), p)
    best = np.zeros((x.shape[0], K))
    for j in range(1, K):
        best[:, j] = np.max(best[:, :j] + D[:, :j, j], axis=1)
    out = best.max(axis=1) ** (1.0 / p)
    return out[0] if single else out


def vp_norm(path: DiscretePath, p: float) -> float:
    """Supremum over sub-partitions of the stored grid of ``(sum |du|^p)^(1/p)``."""
    if len(path) + (path.convention == "vp") < 2:
        raise ValueError("vp_norm needs at least two sample points")
    return float(vp_dp_batch(path.samples(), p))


def vp_bruteforce(samples, p: float) -> float:
    """Oracle: maximise over every subset of interior points (endpoints kept)."""
    x = np.asarray(samples, dtype=complex)
    if x.ndim == 1:
        x = x[:, None]
    K = x.shape[0]
    if K > BRUTE_FORCE_MAX_POINTS:
        raise ValueError(f"brute force limited to {BRUTE_FORCE_MAX_POINTS} points")
    if K < 2:
        return 0.0
    best = 0.0
    interior = range(1, K - 1)
    for r in range(K - 1):
        for subset in itertools.combinations(interior, r):
            idx = (0, *subset, K - 1)
            s = math.fsum(float(np.linalg.norm(x[b] - x[a])) ** p for a, b in zip(idx, idx[1:]))
            best = max(best, s)
    return best ** (1.0 / p)


@dataclass(frozen=True)
class AtomicBound:
    """Upper bound on a U^p norm together with the decomposition realising it.

    ``coefficients[i] * atoms[i]`` summed over ``i`` rebuilds the path; each atom
    has unit l^p mass. The value is an upper bound, never the norm itself.
    """

    value: float
    method: str
    coefficients: np.ndarray
    atoms: list

    def reconstruct(self) -> np.ndarray:
        out = np.zeros_like(self.atoms[0]) if self.atoms else None
        for c, a in zip(self.coefficients, self.atoms):
            out = out + c * a
        return out


def up_atomic_upper(path: DiscretePath, p: float) -> AtomicBound:
    """Upper bound for the U^p norm of a step function vanishing at the left end.

    Two admissible decompositions are formed and the smaller total is kept:
    one atom per jump (coefficient ``|jump|``), and the whole path as a single
    atom scaled by its l^p mass ``(sum_k |u_k|^p)^(1/p)``.
    """
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if path.convention != "up":
        path = DiscretePath.up(path.times, path.values, path.horizon)
    u = path.values
    jumps = np.diff(u, axis=0)
    sizes = np.linalg.norm(jumps, axis=1)
    jump_atoms, jump_coeffs = [], []
    for k in np.nonzero(sizes > 0)[0]:
        atom = np.zeros_like(u)
        atom[k + 1:] = jumps[k] / sizes[k]
        jump_atoms.append(atom)
        jump_coeffs.append(sizes[k])
    jump_total = math.fsum(jump_coeffs)

    mass = float(np.sum(np.linalg.norm(u, axis=1) ** p) ** (1.0 / p))
    if mass == 0.0:
        return AtomicBound(0.0, "zero", np.zeros(0), [])
    if mass < jump_total:
        return AtomicBound(mass, "single_atom", np.array([mass]), [u / mass])
    return AtomicBound(jump_total, "jumps", np.array(jump_coeffs), jump_atoms)


def primitive(f: DiscretePath) -> DiscretePath:
    """``U(t) = int_0^t f`` sampled at the grid nodes and at the horizon, as a U^p path."""
    w = f.widths()
    U = np.vstack((np.zeros((1, f.dim), complex), np.cumsum(f.values * w[:, None], axis=0)))
    times = np.append(f.times, f.horizon)
    return DiscretePath.up(times - times[0], U, f.horizon - f.times[0] + w[-1])


def pairing(f: DiscretePath, v: DiscretePath) -> float:
    """``|sum_k <f_k, v_k> dt_k|`` for paths on the same grid."""
    if f.times.shape != v.times.shape or np.any(f.times != v.times) or f.horizon != v.horizon:
        raise ValueError("integrand and witness must share the time grid")
    inner = np.sum(f.values * np.conj(v.values), axis=1)
    return float(abs(np.sum(inner * f.widths())))


def greedy_witness(f: DiscretePath) -> DiscretePath:
    """Constant witness aligned with ``F = int f``; unit V^2 norm with the terminal zero."""
    F = np.sum(f.values * f.widths()[:, None], axis=0)
    nF = np.linalg.norm(F)
    vals = np.zeros_like(f.values) if nF == 0 else np.tile(F / nF, (len(f), 1))
    return DiscretePath.vp(f.times, vals, f.horizon)


WITNESS_BLOCK = 1000


def random_witnesses(template: DiscretePath, count: int, seed: int, n_jumps: int | None = None) -> np.ndarray:
    """Random step functions on the grid of ``template``, V^2-normalised.

    Returns an array of shape ``(count, K, M)``. Witnesses are drawn in blocks
    of ``WITNESS_BLOCK`` from disjoint counter ranges, so the first ``c`` of a
    larger draw coincide with a draw of size ``c``.
    """
    K, M = template.values.shape
    out = np.empty((count, K, M), complex)
    for start in range(0, count, WITNESS_BLOCK):
        rng = make_rng(seed, STREAM_WITNESS, block=1 + start // WITNESS_BLOCK)
        b = min(WITNESS_BLOCK, count - start)
        z = rng.standard_normal((WITNESS_BLOCK, K, M)) + 1j * rng.standard_normal((WITNESS_BLOCK, K, M))
        if n_jumps is not None and n_jumps < K - 1:
            # hold values between a few random jump times
            for i in range(WITNESS_BLOCK):
                keep = np.sort(rng.choice(np.arange(1, K), size=n_jumps, replace=False))
                idx = np.searchsorted(keep, np.arange(K), side="right")
                z[i] = np.vstack((z[i, :1], z[i, keep]))[idx]
        out[start:start + b] = z[:b]
    samples = np.concatenate((out, np.zeros((count, 1, M))), axis=1)
    out /= vp_dp_batch(samples, 2.0)[:, None, None]
    return out


def duality_lower(f: DiscretePath, witnesses, chunk: int = 4096) -> float:
    """Largest pairing of ``f`` against V^2-normalised witnesses (a certified lower bound).

    ``witnesses`` is a list of :class:`DiscretePath` on the grid of ``f`` or an
    array of witness values of shape ``(B, K, M)``. Witnesses whose V^2 norm
    (terminal zero included) exceeds one are rejected.
    """
    if isinstance(witnesses, np.ndarray):
        vals = witnesses
    else:
        witnesses = list(witnesses)
        for v in witnesses:
            if v.times.shape != f.times.shape or np.any(v.times != f.times) or v.horizon != f.horizon:
                raise ValueError("integrand and witness must share the time grid")
        vals = np.array([v.values for v in witnesses]).reshape(-1, *f.values.shape)
    if vals.shape[1:] != f.values.shape:
        raise ValueError("witness shape does not match the integrand")
    w = f.widths()
    best = 0.0
    zero = np.zeros((1, 1, f.dim))
    for s in range(0, vals.shape[0], chunk):
        v = vals[s:s + chunk]
        norms = vp_dp_batch(np.concatenate((v, np.broadcast_to(zero, (v.shape[0], 1, f.dim))), axis=1), 2.0)
        if np.any(norms > 1.0 + NORMALIZATION_TOL):
            raise ValueError(f"witness not normalised: V^2 norm {norms.max():.6g} > 1")
        pair = np.abs(np.einsum("km,bkm,k->b", f.values, np.conj(v), w))
        best = max(best, float(pair.max(initial=0.0)))
    return best


def embedding_sweep(n_instances: int, n_jumps: int, dim: int, p: float, seed: int) -> dict:
    """Measure ``max vp_norm / up_atomic_upper`` over random step functions.

    V^p norms include the terminal zero. Each increment of a unit atom obeys
    ``|a_j - a_i|^p <= 2^(p-1) (|a_j|^p + |a_i|^p)``, so the ratio never exceeds 2;
    a single normalised jump already gives ``2^(1/p)``.
    """
    rng = make_rng(seed, STREAM_WITNESS)
    times = np.arange(n_jumps + 1, dtype=float)
    ratios = np.empty(n_instances)
    for i in range(n_instances):
        vals = rng.standard_normal((n_jumps + 1, dim)) + 1j * rng.standard_normal((n_jumps + 1, dim))
        vals[0] = 0.0
        path = DiscretePath.up(times, vals, n_jumps + 1.0)
        ratios[i] = vp_norm(path.as_vp(), p) / up_atomic_upper(path, p).value
    return {"p": p, "n_instances": n_instances, "n_jumps": n_jumps,
            "c_emp": float(ratios.max()), "median_ratio": float(np.median(ratios)),
            "bound": 2.0}
