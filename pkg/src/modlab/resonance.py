"""Integer-lattice sums: resonance factorization, Wick weight sums, restriction sums.

Constraints and resonance functions are evaluated in exact integer arithmetic
(int64 arrays, Python ints in the oracles); only the final weighted
accumulation is floating point. The Japanese bracket is ``<x> = (1 + x^2)^(1/2)``.

Dyadic blocks use sharp annuli: ``A(1) = {|n| <= 1}`` and
``A(N) = {N/2 < |n| <= N}`` for ``N >= 2`` (Euclidean norm in ``Z^d``).
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np
from scipy.special import zeta

MAX_BLOCK = 16
MAX_ENUMERATION = 50_000_000
INNER_CHUNK = 4_000_000


def japanese(x):
    return np.sqrt(1.0 + np.asarray(x, dtype=float) ** 2)


@dataclass(frozen=True)
class LatticeConstraint:
    """``sum_j s_j n_j = 0`` with resonance function ``Omega = sum_j s_j |n_j|^2``.

    The default sign pattern ``(-, +, -, +, ...)`` matches the integrand
    ``conj(u0) u1 conj(u2) u3 ...``; any tuple with equally many ``+1`` and ``-1``
    entries and length ``2m + 2`` is accepted.
    """

    d: int = 1
    m: int = 1
    signs: tuple | None = None

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.d}")
        if self.m not in (1, 2):
            raise ValueError(f"half-degree m must be 1 or 2, got {self.m}")
        signs = self.signs
        if signs is None:
            signs = tuple(-1 if j % 2 == 0 else 1 for j in range(2 * self.m + 2))
        signs = tuple(int(s) for s in signs)
        if len(signs) != 2 * self.m + 2 or any(s not in (-1, 1) for s in signs):
            raise ValueError(f"inconsistent sign tuple {signs} for m={self.m}")
        if sum(signs) != 0:
            raise ValueError(f"inconsistent sign tuple {signs}: needs equal numbers of + and -")
        object.__setattr__(self, "signs", signs)

    @property
    def n_factors(self) -> int:
        return 2 * self.m + 2

    def omega(self, *ns) -> int:
        return sum(s * _sq(n) for s, n in zip(self.signs, ns))

    def momentum(self, *ns):
        if self.d == 1:
            return sum(s * int(n) for s, n in zip(self.signs, ns))
        return tuple(sum(s * int(n[i]) for s, n in zip(self.signs, ns)) for i in range(self.d))


def _sq(n) -> int:
    if np.ndim(n) == 0:
        return int(n) ** 2
    return sum(int(c) ** 2 for c in n)


# --------------------------------------------------------------------------
# cubic factorization


def cubic_factorization_check(n_range: int, max_witnesses: int = 100) -> dict:
    """Exhaustive check of ``Omega = 2 (n1 - n2)(n2 - n3)`` on ``n0 = n1 - n2 + n3``.

    Here ``Omega = n1^2 - n2^2 + n3^2 - n0^2`` and every ``|n_j| <= n_range``.
    Also cross-tabulates the alternative factor ``2 (n1 - n2)(n0 - n2)`` and
    lists the quadruples where it disagrees with ``Omega`` in absolute value
    (the first ``max_witnesses`` in lexicographic order; the total is reported).
    """
    R = int(n_range)
    r = np.arange(-R, R + 1, dtype=np.int64)
    n1, n2, n3 = np.meshgrid(r, r, r, indexing="ij")
    n0 = n1 - n2 + n3
    ok = np.abs(n0) <= R
    n0, n1, n2, n3 = n0[ok], n1[ok], n2[ok], n3[ok]
    omega = n1 * n1 - n2 * n2 + n3 * n3 - n0 * n0
    derived = 2 * (n1 - n2) * (n2 - n3)
    printed = 2 * (n1 - n2) * (n0 - n2)
    bad = np.nonzero(omega != derived)[0]
    disagree = np.nonzero(np.abs(omega) != np.abs(printed))[0]
    nonres = (n2 != n1) & (n2 != n3)
    order = np.lexsort((n3[disagree], n2[disagree], n1[disagree], n0[disagree]))[:max_witnesses]
    witnesses = [dict(n=[int(n0[i]), int(n1[i]), int(n2[i]), int(n3[i])],
                      omega=int(omega[i]), printed_factor=int(printed[i]))
                 for i in disagree[order]]
    return {
        "n_range": R,
        "n_quadruples": int(omega.size),
        "identity": "Omega = 2(n1-n2)(n2-n3) = -2(n1-n2)(n3-n2)",
        "violations": [[int(n0[i]), int(n1[i]), int(n2[i]), int(n3[i])] for i in bad],
        "n_violations": int(bad.size),
        "resonant_zero": bool(np.all(omega[~nonres] == 0)),
        "n_printed_disagreements": int(disagree.size),
        "printed_disagreement_witnesses": witnesses,
    }


def printed_factor_disagrees(n0: int, n1: int, n2: int, n3: int) -> bool:
    """True when ``|2 (n1 - n2)(n0 - n2)|`` differs from ``|Omega|`` on a constrained quadruple."""
    if n0 != n1 - n2 + n3:
        raise ValueError("quadruple violates n0 = n1 - n2 + n3")
    omega = n1 * n1 - n2 * n2 + n3 * n3 - n0 * n0
    return abs(omega) != abs(2 * (n1 - n2) * (n0 - n2))


# --------------------------------------------------------------------------
# Wick weight sum


def _check_exponent(r: float):
    if not r > 1:
        raise ValueError(f"r'rho must exceed 1 (divergent regime), got {r}")


def wick_weight_sum(r_prime_rho: float, M: int) -> float:
    """``S(M) = sum over 0 < |m1|, |m2| <= M of <m1 m2>^(-r'rho)``."""
    _check_exponent(r_prime_rho)
    M = int(M)
    if M < 1:
        raise ValueError("truncation M must be >= 1")
    a = np.arange(1, M + 1, dtype=float)
    rows = max(1, INNER_CHUNK // M)
    parts = []
    for s in range(0, M, rows):
        prod = np.outer(a[s:s + rows], a)
        parts.extend(np.sum((1.0 + prod * prod) ** (-0.5 * r_prime_rho), axis=1).tolist())
    return 4.0 * math.fsum(parts)


def wick_weight_sum_oracle(r_prime_rho: float, M: int) -> float:
    """Same sum grouped by the product ``k = a b`` (divisor counting)."""
    _check_exponent(r_prime_rho)
    M = int(M)
    counts = np.zeros(M * M + 1, dtype=np.int64)
    for a in range(1, M + 1):
        counts[a * np.arange(1, M + 1)] += 1
    k = np.nonzero(counts)[0]
    terms = counts[k] * (1.0 + k.astype(float) ** 2) ** (-0.5 * r_prime_rho)
    return 4.0 * math.fsum(terms.tolist())


def wick_tail_bound(r_prime_rho: float, M: int) -> float:
    """Upper bound on ``S(inf) - S(M)`` from integral comparison.

    ``sum_{b > M} (ab)^-r <= a^-r M^(1-r) / (r-1)``, summed over the three
    regions where at least one index exceeds ``M``.
    """
    _check_exponent(r_prime_rho)
    r = r_prime_rho
    g = M ** (1.0 - r) / (r - 1.0)
    return float(4.0 * (2.0 * zeta(r) * g + g * g))


def wick_partial_table(r_prime_rho: float, exponents) -> list[dict]:
    """Partial sums at ``M = 2^k`` with successive differences and tail bounds."""
    out, prev = [], None
    for k in exponents:
        M = 2 ** int(k)
        s = wick_weight_sum(r_prime_rho, M)
        out.append({"M": M, "S": s, "diff": None if prev is None else s - prev,
                    "tail_bound": wick_tail_bound(r_prime_rho, M)})
        prev = s
    return out


# --------------------------------------------------------------------------
# restriction sums


def _check_block(N: int):
    N = int(N)
    if N < 1 or N & (N - 1):
        raise ValueError(f"block size must be a power of two, got {N}")
    return N


def in_annulus(sq, N: int):
    """Membership of ``|n|^2 = sq`` in the dyadic block ``A(N)`` (exact integers)."""
    if N == 1:
        return sq <= 1
    return (4 * sq > N * N) & (sq <= N * N)


def annulus_points(d: int, N: int) -> np.ndarray:
    """Lattice points of ``A(N)`` in ``Z^d``, shape ``(P, d)``, lexicographic order."""
    N = _check_block(N)
    r = np.arange(-N, N + 1, dtype=np.int64)
    pts = np.stack(np.meshgrid(*([r] * d), indexing="ij"), axis=-1).reshape(-1, d)
    return pts[in_annulus(np.sum(pts * pts, axis=1), N)]


@dataclass(frozen=True)
class Cube:
    """Half-open lattice cube ``center + [-side/2, side/2)^d``."""

    center: tuple
    side: int

    def contains(self, pts: np.ndarray) -> np.ndarray:
        c = np.asarray(self.center, dtype=float)
        rel = pts - c
        return np.all((2 * rel >= -self.side) & (2 * rel < self.side), axis=-1)


def _dense_weights(d, N, pts, coeff):
    # weight lookup on the box [-N, N]^d, zero outside the annulus
    box = np.zeros((2 * N + 1,) * d)
    vals = np.ones(len(pts)) if coeff is None else np.asarray(coeff, dtype=float)
    if vals.shape != (len(pts),):
        raise ValueError(f"coefficients for block {N} must have {len(pts)} entries")
    if np.any(vals < 0) or not np.all(np.isfinite(vals)):
        raise ValueError("coefficients must be finite and non-negative")
    box[tuple((pts + N).T)] = vals
    return box, vals


def omega_table(constraint: LatticeConstraint, N_blocks, cube0: Cube | None = None,
                cube1: Cube | None = None, coefficients=None):
    """Weighted counts of constrained tuples grouped by the resonance value.

    Returns ``(omegas, sums, counts)`` with ``sums[i]`` the sum of the product of
    coefficients over tuples with ``Omega = omegas[i]``.
    """
    c = constraint
    N = tuple(_check_block(n) for n in N_blocks)
    if len(N) != c.n_factors:
        raise ValueError(f"need {c.n_factors} block sizes, got {len(N)}")
    if max(N) > MAX_BLOCK:
        raise ValueError(f"size guard exceeded: blocks above {MAX_BLOCK}")
    if coefficients is None:
        coefficients = [None] * c.n_factors
    pts = [annulus_points(c.d, n) for n in N]
    dense = [_dense_weights(c.d, n, p, a) for n, p, a in zip(N, pts, coefficients)]
    total = math.prod(len(p) for p in pts[1:])
    if total > MAX_ENUMERATION:
        raise ValueError(f"size guard exceeded: {total} tuples > {MAX_ENUMERATION}")

    s = c.signs
    # tuples of factors 2.. combined once; factor 1 is the outer loop
    rest_mom = np.zeros((1, c.d), np.int64)
    rest_om = np.zeros(1, np.int64)
    rest_w = np.ones(1)
    for j in range(2, c.n_factors):
        p, w = pts[j], dense[j][1]
        rest_mom = (rest_mom[:, None, :] + s[j] * p[None, :, :]).reshape(-1, c.d)
        rest_om = (rest_om[:, None] + s[j] * np.sum(p * p, axis=1)[None, :]).ravel()
        rest_w = (rest_w[:, None] * w[None, :]).ravel()

    p1, w1 = pts[1], dense[1][1]
    if cube1 is not None:
        keep = cube1.contains(p1)
        p1, w1 = p1[keep], w1[keep]
    box0 = dense[0][0]
    N0 = N[0]
    om_max = sum(n * n * c.d for n in N)
    sums = np.zeros(2 * om_max + 1)
    counts = np.zeros(2 * om_max + 1, np.int64)
    for q, wq in zip(p1, w1):
        n0 = -s[0] * (s[1] * q[None, :] + rest_mom)
        sq0 = np.sum(n0 * n0, axis=1)
        ok = in_annulus(sq0, N0)
        if cube0 is not None:
            ok &= cube0.contains(n0)
        if not np.any(ok):
            continue
        om = s[0] * sq0[ok] + s[1] * int(q @ q) + rest_om[ok]
        w = wq * rest_w[ok] * box0[tuple((n0[ok] + N0).T)]
        idx = om + om_max
        sums += np.bincount(idx, weights=w, minlength=sums.size)
        counts += np.bincount(idx, minlength=counts.size)
    nz = np.nonzero(counts)[0]
    return nz - om_max, sums[nz], counts[nz]


def restriction_sum_bruteforce(constraint: LatticeConstraint, N_blocks, cube0: Cube | None = None,
                               cube1: Cube | None = None, nu="sup", coefficients=None,
                               rho: float | None = None) -> float:
    """Exact constrained lattice sum of ``prod_j a_j(n_j)``.

    Parameters
    ----------
    constraint : LatticeConstraint
    N_blocks : sequence of int
        Dyadic block size for each factor.
    cube0, cube1 : Cube, optional
        Restrict ``n0`` (resp. ``n1``) to a lattice cube.
    nu : int, "sup" or None
        Fixed resonance value, supremum over values, or sum over all values.
    coefficients : list of arrays, optional
        Non-negative weights aligned with :func:`annulus_points` per factor
        (unit weights by default, which counts lattice points).
    rho : float, optional
        Extra weight ``<Omega>^(-rho)``.
    """
    omegas, sums, _ = omega_table(constraint, N_blocks, cube0, cube1, coefficients)
    if omegas.size == 0:
        return 0.0
    weighted = sums if rho is None else sums * japanese(omegas) ** (-rho)
    if nu is None:
        return math.fsum(weighted.tolist())
    if isinstance(nu, str):
        if nu != "sup":
            raise ValueError(f"nu must be an integer, 'sup' or None, got {nu!r}")
        return float(weighted.max())
    hit = np.nonzero(omegas == int(nu))[0]
    return float(weighted[hit[0]]) if hit.size else 0.0


def restriction_table_oracle(constraint: LatticeConstraint, N_blocks, cube0=None, cube1=None,
                             coefficients=None) -> dict:
    """Nested-loop reference: ``{Omega: weighted count}`` in pure Python.

    Loops over factors ``1..2m+1`` and looks ``n0`` up in a dictionary of the
    first block, sharing no code with :func:`omega_table`.
    """
    c = constraint
    d = c.d

    def block(N):
        out = []
        for n in itertools.product(range(-N, N + 1), repeat=d):
            sq = sum(x * x for x in n)
            if (sq <= 1) if N == 1 else (4 * sq > N * N and sq <= N * N):
                out.append(n)
        return out

    def in_cube(n, cube):
        if cube is None:
            return True
        ctr = [cube.center] * d if np.ndim(cube.center) == 0 else list(cube.center)
        return all(-cube.side <= 2 * (x - cc) < cube.side for x, cc in zip(n, ctr))

    blocks = [block(int(N)) for N in N_blocks]
    weights = []
    for j, pts in enumerate(blocks):
        a = None if coefficients is None else coefficients[j]
        weights.append({n: (1.0 if a is None else float(a[i])) for i, n in enumerate(pts)})
    first = {n: w for n, w in weights[0].items() if in_cube(n, cube0)}
    s0 = c.signs[0]
    table = defaultdict(float)
    for tup in itertools.product(*blocks[1:]):
        if not in_cube(tup[0], cube1):
            continue
        n0 = tuple(-s0 * sum(s * n[i] for s, n in zip(c.signs[1:], tup)) for i in range(d))
        if n0 not in first:
            continue
        om = s0 * sum(x * x for x in n0) + sum(s * sum(x * x for x in n) for s, n in zip(c.signs[1:], tup))
        w = first[n0]
        for j, n in enumerate(tup, start=1):
            w *= weights[j][n]
        table[om] += w
    return dict(table)


def restriction_sum_oracle(constraint: LatticeConstraint, N_blocks, cube0=None, cube1=None,
                           nu="sup", coefficients=None, rho=None) -> float:
    """Reference value for :func:`restriction_sum_bruteforce`."""
    table = restriction_table_oracle(constraint, N_blocks, cube0, cube1, coefficients)
    return reduce_table(table, nu, rho)


def reduce_table(table: dict, nu="sup", rho=None) -> float:
    """Apply the ``nu`` selection and optional ``<Omega>^(-rho)`` weight to a table."""
    if not table:
        return 0.0
    vals = {om: v * (1.0 if rho is None else (1.0 + om * om) ** (-rho / 2)) for om, v in table.items()}
    if nu is None:
        return math.fsum(vals.values())
    if nu == "sup":
        return max(vals.values())
    return vals.get(int(nu), 0.0)


def block_l2_masses(d: int, N_blocks, coefficients) -> np.ndarray:
    """l^2 norm of each factor's coefficients over its block."""
    out = []
    for N, a in zip(N_blocks, coefficients):
        pts = annulus_points(d, N)
        a = np.ones(len(pts)) if a is None else np.asarray(a, float)
        out.append(float(np.sqrt(np.sum(a * a))))
    return np.array(out)


# --------------------------------------------------------------------------
# strips


def strip_width(N1: int, N2: int) -> int:
    """``M = max(N2^2 / N1, 1)`` rounded up to an integer."""
    return max(1, -(-N2 * N2 // N1))


def strip_index(pts, center, M: int) -> np.ndarray:
    """Index ``alpha`` with ``n . c`` in ``[alpha |c| M, (alpha + 1) |c| M)``."""
    c = np.asarray(center, dtype=float)
    proj = np.asarray(pts, dtype=float) @ c
    return np.floor(proj / (np.linalg.norm(c) * M)).astype(np.int64)


def strip_pairing_count(constraint: LatticeConstraint, N_blocks, center0, center1,
                        nu_max: float | None = None) -> dict:
    """Count, for each strip ``alpha`` of ``n0``, the strips ``beta`` of ``n1`` that co-occur.

    ``n0`` and ``n1`` are confined to the cubes ``center + [-N2, N2]^d`` and only
    tuples with ``|Omega| <= nu_max`` (default ``N2^2 / 4``) are kept.
    """
    c = constraint
    N = tuple(_check_block(n) for n in N_blocks)
    N1, N2 = N[1], N[2]
    M = strip_width(N1, N2)
    nu_max = N2 * N2 / 4.0 if nu_max is None else nu_max
    cubes = [Cube(tuple(int(x) for x in np.broadcast_to(ctr, (c.d,))), 2 * N2 + 1)
             for ctr in (center0, center1)]
    pts = [annulus_points(c.d, n) for n in N]
    p0 = pts[0][cubes[0].contains(pts[0])]
    p1 = pts[1][cubes[1].contains(pts[1])]
    s = c.signs
    rest_mom = np.zeros((1, c.d), np.int64)
    rest_om = np.zeros(1, np.int64)
    for j in range(2, c.n_factors):
        p = pts[j]
        rest_mom = (rest_mom[:, None, :] + s[j] * p[None, :, :]).reshape(-1, c.d)
        rest_om = (rest_om[:, None] + s[j] * np.sum(p * p, axis=1)[None, :]).ravel()
    index0 = {tuple(int(x) for x in n): i for i, n in enumerate(p0)}
    a0 = strip_index(p0, center0, M)
    b1 = strip_index(p1, center1, M)
    pairs = defaultdict(set)
    for q, beta in zip(p1, b1):
        n0 = -s[0] * (s[1] * q[None, :] + rest_mom)
        om = s[0] * np.sum(n0 * n0, axis=1) + s[1] * int(q @ q) + rest_om
        for k in np.nonzero(np.abs(om) <= nu_max)[0]:
            i = index0.get(tuple(int(x) for x in n0[k]))
            if i is not None:
                pairs[int(a0[i])].add(int(beta))
    per_alpha = {a: len(b) for a, b in sorted(pairs.items())}
    return {"M": M, "nu_max": nu_max, "n_alpha": len(per_alpha),
            "max_betas_per_alpha": max(per_alpha.values(), default=0),
            "betas_per_alpha": per_alpha}
