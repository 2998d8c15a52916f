"""Bipartite boxes with binary inputs and outputs.

A box is the conditional distribution P(a, b | x, y), stored as a read-only
numpy array indexed ``[a, b, x, y]``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError, NegativeEntry, NormalizationError, SignalingBox

STRICT_TOL = 1e-12
SIMULATED_TOL = 1e-9
TSIRELSON_Q = (2 + math.sqrt(2)) / 4

BITS = (0, 1)


@dataclass(frozen=True, eq=False)
class Box:
    table: np.ndarray

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        if t.shape != (2, 2, 2, 2):
            raise NormalizationError(f"box table must have shape (2,2,2,2), got {t.shape}")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    def __call__(self, a, b, x, y):
        return self.table[a, b, x, y]

    def __eq__(self, other):
        if not isinstance(other, Box):
            return NotImplemented
        return self.isclose(other)

    __hash__ = None

    def isclose(self, other: "Box", tol: float = SIMULATED_TOL) -> bool:
        return bool(np.max(np.abs(self.table - other.table)) <= tol)

    def mix(self, other: "Box", lam: float) -> "Box":
        """Convex mixture ``lam * self + (1 - lam) * other``."""
        return Box(lam * self.table + (1 - lam) * other.table)

    def __repr__(self):
        e = correlations(self)
        return f"Box(E=({e.e00:.6g}, {e.e01:.6g}, {e.e10:.6g}, {e.e11:.6g}))"


@dataclass(frozen=True)
class CorrelationVector:
    e00: float
    e01: float
    e10: float
    e11: float

    def as_array(self) -> np.ndarray:
        """Indexed ``[x, y]``."""
        return np.array([[self.e00, self.e01], [self.e10, self.e11]])


@dataclass(frozen=True)
class ChshValue:
    nl: float
    q_equiv: float


@dataclass(frozen=True)
class BoxClass:
    signaling: bool
    local: bool
    independent: bool


def validate_box(raw, tol: float = STRICT_TOL) -> Box:
    """Build a Box from 16 reals indexed (a, b, x, y).

    Accepts a flat sequence in row-major (a, b, x, y) order or anything that
    reshapes to (2, 2, 2, 2).
    """
    t = np.asarray(raw, dtype=float)
    if t.size != 16:
        raise NormalizationError(f"expected 16 entries, got {t.size}")
    t = t.reshape(2, 2, 2, 2)
    if not np.all(np.isfinite(t)):
        raise NormalizationError("box entries must be finite")
    if np.any(t < -tol):
        a, b, x, y = np.argwhere(t < -tol)[0]
        raise NegativeEntry(f"P({a},{b}|{x},{y}) = {t[a, b, x, y]!r} < 0")
    sums = t.sum(axis=(0, 1))
    bad = np.abs(sums - 1) > tol
    if np.any(bad):
        x, y = np.argwhere(bad)[0]
        raise NormalizationError(f"sum_ab P(a,b|{x},{y}) = {sums[x, y]!r} != 1")
    if np.any(t > 1 + tol):
        raise NegativeEntry("entry exceeds 1")
    return Box(t)


def from_function(f) -> Box:
    """Tabulate ``f(a, b, x, y)`` into a box (validated)."""
    t = np.zeros((2, 2, 2, 2))
    for a, b, x, y in itertools.product(BITS, repeat=4):
        t[a, b, x, y] = f(a, b, x, y)
    return validate_box(t)


def pr_box() -> Box:
    return isotropic_box(1.0)


def uniform_box() -> Box:
    return Box(np.full((2, 2, 2, 2), 0.25))


def isotropic_box(q: float) -> Box:
    if not 0 <= q <= 1:
        raise DomainError(f"q must lie in [0, 1], got {q}")
    return from_function(lambda a, b, x, y: q / 2 if (a ^ b) == (x & y) else (1 - q) / 2)


def deterministic_box(f0: int, f1: int, g0: int, g1: int) -> Box:
    """Local deterministic strategy a = f_x, b = g_y."""
    f, g = (f0, f1), (g0, g1)
    return Box(_det_table(f, g))


def correlated_error_box(q: float) -> Box:
    """q-PR-box whose entire error sits on input (1, 1).

    For (x, y) != (1, 1) the outputs satisfy a = b exactly; on (1, 1) they
    satisfy a != b with probability 4q - 3. Needs q in [3/4, 1].
    """
    if not 0.75 <= q <= 1:
        raise DomainError(f"correlated-error box needs q in [3/4, 1], got {q}")
    s = 4 * q - 3

    def p(a, b, x, y):
        if (x, y) != (1, 1):
            return 0.5 if a == b else 0.0
        return s / 2 if a != b else (1 - s) / 2

    return from_function(p)


def _det_table(f, g) -> np.ndarray:
    t = np.zeros((2, 2, 2, 2))
    for x, y in itertools.product(BITS, repeat=2):
        t[f[x], g[y], x, y] = 1.0
    return t


def is_non_signaling(b: Box, tol: float = STRICT_TOL) -> bool:
    t = b.table
    pa = t.sum(axis=1)  # [a, x, y]
    pb = t.sum(axis=0)  # [b, x, y]
    return bool(
        np.max(np.abs(pa[:, :, 0] - pa[:, :, 1])) <= tol
        and np.max(np.abs(pb[:, 0, :] - pb[:, 1, :])) <= tol
    )


def marginal_alice(b: Box, tol: float = STRICT_TOL) -> np.ndarray:
    """P_A(a|x) indexed ``[a, x]``."""
    pa = b.table.sum(axis=1)
    if np.max(np.abs(pa[:, :, 0] - pa[:, :, 1])) > tol:
        raise SignalingBox("Alice's marginal depends on Bob's input")
    return pa.mean(axis=2)


def marginal_bob(b: Box, tol: float = STRICT_TOL) -> np.ndarray:
    """P_B(b|y) indexed ``[b, y]``."""
    pb = b.table.sum(axis=0)
    if np.max(np.abs(pb[:, 0, :] - pb[:, 1, :])) > tol:
        raise SignalingBox("Bob's marginal depends on Alice's input")
    return pb.mean(axis=1)


def correlations(b: Box) -> CorrelationVector:
    t = b.table
    e = t[0, 0] + t[1, 1] - t[0, 1] - t[1, 0]
    return CorrelationVector(float(e[0, 0]), float(e[0, 1]), float(e[1, 0]), float(e[1, 1]))


def chsh(b: Box) -> ChshValue:
    """CHSH value E00 + E01 + E10 - E11 for the box as labelled."""
    e = correlations(b)
    nl = e.e00 + e.e01 + e.e10 - e.e11
    return ChshValue(nl, 0.5 + nl / 8)


# Relabelings: Alice flips her input (sx), then XORs her output with
# ca ^ (da & x_original); Bob likewise. 64 elements, identity first.
RELABELINGS = tuple(itertools.product(BITS, repeat=6))


def relabel(b: Box, g) -> Box:
    sx, ca, da, sy, cb, db = g
    t = b.table
    out = np.empty_like(t)
    for a, bb, x, y in itertools.product(BITS, repeat=4):
        xs, ys = x ^ sx, y ^ sy
        out[a ^ ca ^ (da & x), bb ^ cb ^ (db & y), x, y] = t[a, bb, xs, ys]
    return Box(out)


def canonicalize(b: Box, tol: float = STRICT_TOL) -> Box:
    """Local relabeling maximising the CHSH value with E00, E01, E10 >= 0.

    Ties are broken by the enumeration order of `RELABELINGS`, so a box that
    is already canonical is returned unchanged.
    """
    return relabel(b, canonical_relabeling(b, tol))


def canonical_relabeling(b: Box, tol: float = STRICT_TOL):
    best, best_key = None, None
    for g in RELABELINGS:
        e = correlations(relabel(b, g))
        nl = e.e00 + e.e01 + e.e10 - e.e11
        signs_ok = min(e.e00, e.e01, e.e10) >= -tol
        key = (round(nl / tol) if tol else nl, signs_ok)
        if best_key is None or key > best_key:
            best, best_key = g, key
    return best


def max_chsh(b: Box) -> float:
    """Largest CHSH value over the 8 odd sign patterns (= canonical nl)."""
    return max_chsh_from_correlators(correlations(b).as_array())


ODD_SIGNS = np.array(
    [s for s in itertools.product((1, -1), repeat=4) if np.prod(s) == -1], dtype=float
)


def max_chsh_from_correlators(e) -> float:
    e = np.asarray(e, dtype=float).reshape(4)
    return float(np.max(ODD_SIGNS @ e))


def is_local(b: Box, method: str = "lp", tol: float = STRICT_TOL) -> bool:
    """Membership in the local polytope.

    ``method="lp"`` runs an exact rational feasibility LP over the 16
    deterministic strategies; ``method="chsh"`` checks the 8 CHSH facets.
    """
    if not is_non_signaling(b, tol=max(tol, SIMULATED_TOL)):
        raise SignalingBox("locality is only decided for non-signaling boxes")
    if method == "chsh":
        return max_chsh(b) <= 2 + tol
    if method == "lp":
        return _lp_local(b)
    raise ValueError(f"unknown method {method!r}")


def classify(b: Box, tol: float = STRICT_TOL) -> BoxClass:
    signaling = not is_non_signaling(b, tol)
    local = False if signaling else is_local(b, tol=tol)
    return BoxClass(signaling=signaling, local=local, independent=is_independent(b, tol))


def is_independent(b: Box, tol: float = STRICT_TOL) -> bool:
    """P(a,b|x,y) = P_A(a|x) P_B(b|y)."""
    if not is_non_signaling(b, tol):
        return False
    pa, pb = marginal_alice(b, tol), marginal_bob(b, tol)
    prod = np.einsum("ax,by->abxy", pa, pb)
    return bool(np.max(np.abs(prod - b.table)) <= tol)


def is_isotropic(b: Box, tol: float = SIMULATED_TOL) -> bool:
    e = correlations(b)
    if not (abs(e.e00 - e.e01) <= tol and abs(e.e00 - e.e10) <= tol and abs(e.e00 + e.e11) <= tol):
        return False
    if e.e00 < -tol:
        return False
    pa = b.table.sum(axis=1)
    pb = b.table.sum(axis=0)
    return bool(np.max(np.abs(pa - 0.5)) <= tol and np.max(np.abs(pb - 0.5)) <= tol)


# --- exact LP oracle ---------------------------------------------------------

def _rationalize(b: Box) -> dict:
    """Exact non-signaling rational table closest to the float box."""
    t = b.table
    pa0 = [Fraction(float(t[0, :, x, :].sum() / 2)).limit_denominator(10**12) for x in BITS]
    pb0 = [Fraction(float(t[:, 0, :, y].sum() / 2)).limit_denominator(10**12) for y in BITS]
    out = {}
    for x, y in itertools.product(BITS, repeat=2):
        p00 = Fraction(float(t[0, 0, x, y])).limit_denominator(10**12)
        out[0, 0, x, y] = p00
        out[0, 1, x, y] = pa0[x] - p00
        out[1, 0, x, y] = pb0[y] - p00
        out[1, 1, x, y] = 1 - pa0[x] - pb0[y] + p00
    return out


def _lp_local(b: Box) -> bool:
    p = _rationalize(b)
    if any(v < 0 for v in p.values()):
        return False
    strategies = list(itertools.product(BITS, repeat=4))
    rows, rhs = [], []
    for a, bb, x, y in itertools.product(BITS, repeat=4):
        rows.append([Fraction(int(f[x] == a and g[y] == bb))
                     for f0, f1, g0, g1 in strategies
                     for f, g in [((f0, f1), (g0, g1))]])
        rhs.append(p[a, bb, x, y])
    rows.append([Fraction(1)] * len(strategies))
    rhs.append(Fraction(1))
    return exact_feasible(rows, rhs)


def exact_feasible(A, b) -> bool:
    """Is {w >= 0 : A w = b} non-empty?  Phase-I simplex in exact rationals.

    Uses Bland's rule, so it terminates on degenerate problems.
    """
    m, n = len(A), len(A[0])
    # tableau rows: [A | I | b], with b made non-negative
    T = []
    for i in range(m):
        sign = -1 if b[i] < 0 else 1
        row = [sign * Fraction(v) for v in A[i]]
        row += [Fraction(int(i == j)) for j in range(m)]
        row.append(sign * Fraction(b[i]))
        T.append(row)
    basis = list(range(n, n + m))
    width = n + m
    # objective: minimise sum of artificials -> reduced costs
    cost = [Fraction(0)] * width + [Fraction(0)]
    for i in range(m):
        for j in range(width + 1):
            cost[j] -= T[i][j]
    for j in range(n, width):
        cost[j] += 1
    while True:
        enter = next((j for j in range(width) if cost[j] < 0), None)
        if enter is None:
            break
        best, leave = None, None
        for i in range(m):
            if T[i][enter] > 0:
                ratio = T[i][-1] / T[i][enter]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:  # unbounded: impossible for phase I
            break
        piv = T[leave][enter]
        T[leave] = [v / piv for v in T[leave]]
        for i in range(m):
            if i != leave and T[i][enter] != 0:
                f = T[i][enter]
                T[i] = [vi - f * vl for vi, vl in zip(T[i], T[leave])]
        f = cost[enter]
        cost = [c - f * vl for c, vl in zip(cost, T[leave])]
        basis[leave] = enter
    return -cost[-1] == 0
