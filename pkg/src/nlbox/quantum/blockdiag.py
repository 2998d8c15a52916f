"""Simultaneous 1x1 / 2x2 block diagonalisation of two complementary projector pairs."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateEigenvector, NotComplementary, NotProjector

PROJ_TOL = 1e-10
DEGENERATE_TOL = 1e-10
MAX_RETRIES = 8


@dataclass(frozen=True, eq=False)
class BlockDecomposition:
    basis: np.ndarray  # columns are the new basis vectors
    blocks: tuple  # consecutive column ranges, each of size 1 or 2

    @property
    def sizes(self) -> list:
        return [len(b) for b in self.blocks]

    def conjugate(self, x) -> np.ndarray:
        return self.basis.conj().T @ np.asarray(x) @ self.basis

    def off_block_mass(self, x) -> float:
        y = self.conjugate(x)
        mask = np.ones(y.shape, dtype=bool)
        for b in self.blocks:
            mask[np.ix_(b, b)] = False
        return float(np.linalg.norm(y[mask]))

    def unitarity_error(self) -> float:
        d = self.basis.shape[0]
        return float(np.max(np.abs(self.basis.conj().T @ self.basis - np.eye(d))))


def _check_pair(p0, p1, name):
    d = p0.shape[0]
    for m in (p0, p1):
        if m.shape != (d, d) or np.max(np.abs(m - m.conj().T)) > PROJ_TOL or np.max(np.abs(m @ m - m)) > PROJ_TOL:
            raise NotProjector(f"{name} contains a matrix that is not an orthogonal projector")
    if np.max(np.abs(p0 + p1 - np.eye(d))) > PROJ_TOL:
        raise NotComplementary(f"{name}0 + {name}1 != I")


def _joint_eigvecs(ops, space, rng):
    """Orthonormal joint eigenvectors (columns) of commuting ops restricted to span(space)."""
    restricted = [space.conj().T @ o @ space for o in ops]
    w = rng.normal(size=len(ops))
    _, vecs = np.linalg.eigh(sum(c * r for c, r in zip(w, restricted)))
    for r in restricted:
        lam = np.einsum("ij,ij->j", vecs.conj(), r @ vecs).real
        if np.max(np.abs(r @ vecs - vecs * lam)) > 1e-8:
            return None
    return space @ vecs


def _side(q, p0, p1, space, rng):
    """Blocks seeded from eigenvectors of q inside span(space)."""
    vecs = _joint_eigvecs([q, q @ p0 @ q, q @ p1 @ q], space, rng)
    if vecs is None:
        return None
    blocks = []
    for v in vecs.T:
        if np.linalg.norm(q @ v - v) > 1e-8:
            continue
        a1, a2 = p0 @ v, p1 @ v
        l1, l2 = np.vdot(v, a1).real, np.vdot(v, a2).real
        if l1 < DEGENERATE_TOL or l2 < DEGENERATE_TOL:
            blocks.append([v])
            continue
        w = a1 / l1 - a2 / l2
        blocks.append([v, w / np.linalg.norm(w)])
    return blocks


def _complement(cols, d):
    if not cols:
        return np.eye(d, dtype=complex)
    b = np.array(cols).T
    vals, vecs = np.linalg.eigh(np.eye(d) - b @ b.conj().T)
    return vecs[:, vals > 0.5]


def _attempt(p0, p1, q0, q1, rng):
    d = p0.shape[0]
    blocks = _side(q0, p0, p1, np.eye(d, dtype=complex), rng)
    if blocks is None:
        return None
    rest = _complement([u for b in blocks for u in b], d)
    if rest.shape[1]:
        more = _side(q1, p0, p1, rest, rng)
        if more is None:
            return None
        blocks += more
    cols, ranges = [], []
    for b in blocks:
        ranges.append(tuple(range(len(cols), len(cols) + len(b))))
        cols.extend(b)
    if len(cols) != d:
        return None
    dec = BlockDecomposition(np.array(cols).T, tuple(ranges))
    if dec.unitarity_error() > PROJ_TOL:
        return None
    if max(dec.off_block_mass(m) for m in (p0, p1, q0, q1)) > PROJ_TOL:
        return None
    return dec


def block_diagonalize(P0, P1, Q0, Q1, rng_seed=0x5EED) -> BlockDecomposition:
    """Basis in which P0, P1, Q0, Q1 are all block diagonal with blocks of size 1 or 2.

    Each eigenvector v of Q0 (in a joint eigenbasis of Q0, Q0 P0 Q0, Q0 P1 Q0)
    seeds a block: {v} if P0 v or P1 v vanishes, otherwise {v, w} with
    w = P0 v / l1 - P1 v / l2, which lies in the range of Q1.  What is left
    is handled the same way from the Q1 side.
    """
    p0, p1, q0, q1 = (np.asarray(m, dtype=complex) for m in (P0, P1, Q0, Q1))
    _check_pair(p0, p1, "P")
    _check_pair(q0, q1, "Q")
    if q0.shape != p0.shape:
        raise NotComplementary("P and Q act on spaces of different dimension")
    rng = np.random.default_rng(rng_seed)
    for _ in range(MAX_RETRIES):
        dec = _attempt(p0, p1, q0, q1, rng)
        if dec is not None:
            return dec
    raise DegenerateEigenvector(f"no valid joint eigenbasis after {MAX_RETRIES} draws")


def random_projector_pair(rng: np.random.Generator, d: int, rank: int | None = None):
    """(P, I - P) with P projecting onto a Haar-random subspace."""
    from .edp import haar_unitary

    rank = d // 2 if rank is None else rank
    u = haar_unitary(rng, d)[:, :rank]
    p = u @ u.conj().T
    return p, np.eye(d) - p
