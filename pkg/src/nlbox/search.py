"""Exhaustive search over deterministic wirings.

Scores are computed in bulk: each party wiring becomes a signed response
matrix ``U[(w, x), (outputs, inputs)]`` and the n-fold resource becomes the
matrix ``R[(a, x_vec), (b, y_vec)]``, so all correlators of a block of wiring
pairs come out of one product ``U R V^T``.  The winning pair is re-simulated
exactly with `apply_wiring`.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import bounds
from .box import (
    SIMULATED_TOL,
    Box,
    canonical_relabeling,
    canonicalize,
    chsh,
    is_isotropic,
    is_non_signaling,
)
from .errors import DomainError, InvariantError, SignalingResource, SpaceTooLarge
from .wiring import BoolFn, PartyWiring, Protocol, apply_wiring, relabel_wiring

DEFAULT_BUDGET = 2**30
BLOCK = 256
_ROUND = 1e12


@dataclass(frozen=True)
class SearchSpace:
    n: int
    adaptive: bool = True
    output_class: str = "all"  # "all" | "xor-affine"
    symmetry_reduction: bool = True
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("need at least one box")
        if self.output_class not in ("all", "xor-affine"):
            raise DomainError(f"unknown output class {self.output_class!r}")


@dataclass(frozen=True)
class SearchReport:
    resource_q: float
    best_nl: float
    best_q: float
    best_protocol: Protocol
    wirings_examined: int
    bound_q: float | None
    bound_respected: bool | None


# --- enumeration -----------------------------------------------------------------

def _input_widths(s: SearchSpace) -> list:
    return [1 << (1 + k) if s.adaptive else 2 for k in range(s.n)]


def _output_width(s: SearchSpace) -> int:
    return 1 << (1 + s.n)


def _output_tables(s: SearchSpace) -> np.ndarray:
    width = _output_width(s)
    if s.output_class == "all":
        return np.arange(1 << width, dtype=np.int64)
    nvars = 1 + s.n
    tables = set()
    for c in (0, 1):
        for lin in range(1 << nvars):
            t = 0
            for idx in range(width):
                t |= (c ^ (bin(idx & lin).count("1") & 1)) << idx
            tables.add(t)
    return np.array(sorted(tables), dtype=np.int64)


def closed_form_count(s: SearchSpace) -> int:
    """Number of wirings per side before symmetry reduction."""
    n_out = (1 << _output_width(s)) if s.output_class == "all" else 1 << (2 + s.n)
    return math.prod(1 << w for w in _input_widths(s)) * n_out


def _lut(width: int, flip: int, c: int, d: int) -> np.ndarray:
    """Table value -> table value under x -> x^flip, output ^= c ^ (d & x)."""
    v = np.arange(1 << width, dtype=np.int64)
    idx = np.arange(width)
    bits = (v[:, None] >> idx[None, :]) & 1
    new = bits[:, idx ^ flip] ^ c ^ (d & idx & 1)[None, :]
    return (new << idx[None, :]).sum(axis=1)


def _codes(tables, radices) -> np.ndarray:
    code = np.zeros(len(tables[0]), dtype=np.int64)
    for t, r in zip(tables, radices):
        code = code * r + t
    return code


def wiring_tables(s: SearchSpace) -> list:
    """Per-position table arrays of all wirings in canonical order.

    Returns ``[in_0, ..., in_{n-1}, out]``, each an int64 array of equal
    length; the canonical order is lexicographic in that tuple.
    """
    widths = _input_widths(s)
    count = closed_form_count(s)
    if count > s.budget:
        raise SpaceTooLarge(f"{count} wirings per side exceeds budget {s.budget}")
    ranges = [np.arange(1 << w, dtype=np.int64) for w in widths] + [_output_tables(s)]
    grids = np.meshgrid(*ranges, indexing="ij")
    tables = [g.ravel() for g in grids]
    if len(tables[0]) != count:
        raise InvariantError(f"enumerated {len(tables[0])} wirings, closed form says {count}")
    if not s.symmetry_reduction:
        return tables
    radices = [1 << w for w in widths] + [1 << _output_width(s)]
    code = _codes(tables, radices)
    keep = np.ones(len(code), dtype=bool)
    for flip, c, d in itertools.product((0, 1), repeat=3):
        if (flip, c, d) == (0, 0, 0):
            continue
        moved = [_lut(w, flip, 0, 0)[t] for w, t in zip(widths, tables[:-1])]
        moved.append(_lut(_output_width(s), flip, c, d)[tables[-1]])
        keep &= code <= _codes(moved, radices)
    return [t[keep] for t in tables]


def _reads(s: SearchSpace, order, k):
    return tuple(order[:k]) if s.adaptive else ()


def make_wiring(s: SearchSpace, tables, order=None) -> PartyWiring:
    order = tuple(range(s.n)) if order is None else tuple(order)
    fns = tuple(BoolFn(int(t), _reads(s, order, k)) for k, t in enumerate(tables[:-1]))
    return PartyWiring(s.n, order, fns, int(tables[-1]))


def enumerate_wirings(s: SearchSpace, order=None):
    """Yield every causally valid wiring once, in canonical order."""
    tables = wiring_tables(s)
    for i in range(len(tables[0])):
        yield make_wiring(s, [t[i] for t in tables], order)


# --- bulk scoring -------------------------------------------------------------------

def _responses(s: SearchSpace, tables, order):
    """Box-input pattern and output bit for each wiring, x and output pattern.

    Returns int arrays of shape (W, 2, 2**n).
    """
    n = s.n
    pats = np.arange(1 << n, dtype=np.int64)
    W = len(tables[0])
    xin = np.zeros((W, 2, 1 << n), dtype=np.int64)
    out = np.zeros((W, 2, 1 << n), dtype=np.int64)
    for x in (0, 1):
        for k, box in enumerate(order):
            idx = np.full(pats.shape, x, dtype=np.int64)
            for j, r in enumerate(_reads(s, order, k)):
                idx |= ((pats >> r) & 1) << (j + 1)
            xin[:, x, :] |= ((tables[k][:, None] >> idx[None, :]) & 1) << box
        out[:, x, :] = (tables[-1][:, None] >> (x | (pats << 1))[None, :]) & 1
    return xin, out


def _signed_matrix(xin, out, n) -> np.ndarray:
    """Rows (w, x); columns (output pattern, input pattern); entries +-1."""
    W = xin.shape[0]
    A = 1 << n
    M = np.zeros((W, 2, A, A))
    w, x, a = np.meshgrid(np.arange(W), np.arange(2), np.arange(A), indexing="ij")
    M[w, x, a, xin] = 1.0 - 2.0 * out
    return M.reshape(W * 2, A * A)


def resource_matrix(resource: Box, n: int) -> np.ndarray:
    """R[(a, xv), (b, yv)] = prod_k P(a_k, b_k | x_k, y_k)."""
    A = 1 << n
    p = np.arange(A)
    a, xv, b, yv = np.meshgrid(p, p, p, p, indexing="ij")
    R = np.ones(a.shape)
    t = resource.table
    for k in range(n):
        R *= t[(a >> k) & 1, (b >> k) & 1, (xv >> k) & 1, (yv >> k) & 1]
    return R.reshape(A * A, A * A)


def max_odd_chsh(E) -> np.ndarray:
    """Max over the 8 odd sign patterns of sum s_xy E_xy; E[..., x, y]."""
    flat = E.reshape(E.shape[:-2] + (4,))
    ab = np.abs(flat)
    even = (np.count_nonzero(flat < 0, axis=-1) % 2) == 0
    return ab.sum(axis=-1) - 2 * ab.min(axis=-1) * even


def _score_block(UR_rows, VT, nb):
    """Best (rounded, score, row, col) for one block of Alice wirings."""
    E = UR_rows @ VT  # (Wb*2, NB*2)
    Wb = E.shape[0] // 2
    E = E.reshape(Wb, 2, nb, 2).transpose(0, 2, 1, 3)
    scores = max_odd_chsh(E)
    rounded = np.rint(scores * _ROUND).astype(np.int64)
    flat = int(np.argmax(rounded))
    i, j = divmod(flat, nb)
    return int(rounded[i, j]), float(scores[i, j]), i, j


def search_max_nl(s: SearchSpace, resource: Box, threads: int = 1) -> SearchReport:
    """Maximise canonical CHSH over all wiring pairs acting on n copies of ``resource``.

    Alice's boxes are used in the fixed order 0..n-1 (the copies are
    identical, so a joint relabelling of boxes makes this general); Bob's
    wirings range over every usage order, which covers intertwined boxes.
    """
    if not is_non_signaling(resource, SIMULATED_TOL):
        raise SignalingResource("search needs a non-signaling resource")
    n = s.n
    ident = tuple(range(n))
    a_tab = wiring_tables(s)
    orders = list(itertools.permutations(range(n)))
    b_tabs = [a_tab] * len(orders)
    n_pairs = len(a_tab[0]) * len(a_tab[0]) * len(orders)
    if n_pairs > s.budget:
        raise SpaceTooLarge(f"{n_pairs} wiring pairs exceed budget {s.budget}")

    R = resource_matrix(resource, n)
    b_cols, b_index = [], []
    for oi, (order, tabs) in enumerate(zip(orders, b_tabs)):
        xin, out = _responses(s, tabs, order)
        b_cols.append(_signed_matrix(xin, out, n))
        b_index += [(oi, j) for j in range(len(tabs[0]))]
    V = np.concatenate(b_cols)  # (NB*2, A*A)
    VT = np.ascontiguousarray(V.T)
    nb = V.shape[0] // 2

    na = len(a_tab[0])
    starts = list(range(0, na, BLOCK))

    def work(start):
        sub = [t[start:start + BLOCK] for t in a_tab]
        xin, out = _responses(s, sub, ident)
        UR = _signed_matrix(xin, out, n) @ R
        r, sc, i, j = _score_block(UR, VT, nb)
        return r, sc, start + i, j

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(work, starts))
    else:
        results = [work(st) for st in starts]
    best = max(results, key=lambda r: (r[0], -r[2], -r[3]))
    _, score, ia, jb = best

    oi, ib = b_index[jb]
    alice = make_wiring(s, [t[ia] for t in a_tab], ident)
    bob = make_wiring(s, [t[ib] for t in b_tabs[oi]], orders[oi])
    proto = _absorb_relabeling(Protocol.deterministic(alice, bob), resource)
    box = apply_wiring(proto, [resource] * n)
    val = chsh(box)
    if abs(val.nl - score) > 1e-9:
        raise InvariantError(f"bulk score {score} disagrees with exact simulation {val.nl}")
    return _report(resource, val.nl, proto, n_pairs)


def _absorb_relabeling(p: Protocol, resource: Box) -> Protocol:
    """Fold the canonicalising relabeling of the output into the wirings."""
    br = p.branches[0]
    box = apply_wiring(p, [resource] * p.n)
    sx, ca, da, sy, cb, db = canonical_relabeling(box)
    alice = relabel_wiring(br.alice, sx, ca, da)
    bob = relabel_wiring(br.bob, sy, cb, db)
    return Protocol.deterministic(alice, bob)


def _report(resource, best_nl, proto, examined) -> SearchReport:
    canon = canonicalize(resource)
    rq = chsh(canon).q_equiv
    best_q = 0.5 + best_nl / 8
    bound_q = respected = None
    if is_isotropic(canon) and bounds.in_domain(rq):
        bound_q = bounds.gap(bounds.clip_to_domain(rq)).ceiling
        respected = best_q <= bound_q + 1e-9
    return SearchReport(rq, best_nl, best_q, proto, examined, bound_q, respected)


def sweep(s: SearchSpace, q_grid, resource_fn=None, threads: int = 1) -> list:
    """One search per q; ``resource_fn(q)`` defaults to the isotropic box."""
    from .box import isotropic_box

    resource_fn = resource_fn or isotropic_box
    reports = []
    for q in q_grid:
        if not 0.5 <= q <= 1:
            raise DomainError(f"sweep grid must lie in [1/2, 1], got {q}")
        reports.append(search_max_nl(s, resource_fn(q), threads=threads))
    return reports
