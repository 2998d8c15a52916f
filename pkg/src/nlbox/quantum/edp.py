"""Non-interactive entanglement distillation: local unitaries + partial trace."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionBudget, DomainError
from .entanglement import fidelity_plus, fully_entangled_fraction
from .states import DensityMatrix, hermitize, omega_power, omega_power_decomposition, proj

MAX_DIM = 4096


def haar_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    """Haar-random unitary: QR of a complex Ginibre matrix with phase fix."""
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph[None, :]


@dataclass(frozen=True)
class EdpSample:
    state: DensityMatrix
    F: float
    F_plus: float


def _split_parties(pairs_state: np.ndarray, n: int) -> np.ndarray:
    """Reorder (A1 B1)(A2 B2)... into (A1..An)(B1..Bn); returns a 4-index tensor."""
    t = pairs_state.reshape((2,) * (4 * n))
    row_a = [2 * i for i in range(n)]
    row_b = [2 * i + 1 for i in range(n)]
    perm = row_a + row_b + [2 * n + i for i in row_a] + [2 * n + i for i in row_b]
    d = 2 ** n
    return t.transpose(perm).reshape(d, d, d, d)


def _with_ancillas(t: np.ndarray, ancillas: int) -> np.ndarray:
    if not ancillas:
        return t
    d = t.shape[0]
    da = 2 ** ancillas
    big = np.zeros((d, da, d, da, d, da, d, da), dtype=complex)
    big[:, 0, :, 0, :, 0, :, 0] = t
    return big.reshape(d * da, d * da, d * da, d * da)


def run_edp(pairs_state: np.ndarray, n: int, ua: np.ndarray, ub: np.ndarray, ancillas: int = 0) -> np.ndarray:
    """Apply ua (x) ub to the state plus |0> ancillas and keep the first
    qubit on each side."""
    t = _with_ancillas(_split_parties(pairs_state, n), ancillas)
    t = np.einsum("ia,jb,abcd,kc,ld->ijkl", ua, ub, t, ua.conj(), ub.conj(), optimize=True)
    D = t.shape[0]
    h = D // 2
    t = t.reshape(2, h, 2, h, 2, h, 2, h)
    out = np.einsum("aibjcidj->abcd", t)
    return hermitize(out.reshape(4, 4))


def _check_budget(n: int, ancillas: int):
    if not 1 <= n <= 3 or not 0 <= ancillas <= 2:
        raise DimensionBudget("need n in 1..3 and at most 2 ancillas per side")
    if 4 ** (n + ancillas) > MAX_DIM:
        raise DimensionBudget(f"total dimension {4 ** (n + ancillas)} exceeds {MAX_DIM}")


def sample_edp(alpha: float, n: int, ancillas: int = 0, rng_seed=0x5EED, unitaries=None) -> EdpSample:
    """One non-interactive EDP on n copies of Omega_alpha.

    Haar-random local unitaries unless ``unitaries=(ua, ub)`` is given;
    ``unitaries="identity"`` keeps the first pair untouched.
    """
    if not 0 <= alpha <= 1:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    _check_budget(n, ancillas)
    d = 2 ** (n + ancillas)
    if unitaries is None:
        rng = np.random.default_rng(rng_seed)
        ua, ub = haar_unitary(rng, d), haar_unitary(rng, d)
    elif isinstance(unitaries, str) and unitaries == "identity":
        ua = ub = np.eye(d)
    else:
        ua, ub = unitaries
    out = run_edp(omega_power(alpha, n), n, ua, ub, ancillas)
    return EdpSample(DensityMatrix(out), fully_entangled_fraction(out), fidelity_plus(out))


@dataclass(frozen=True)
class EdpSweep:
    alpha: float
    n: int
    ancillas: int
    trials: int
    max_F: float
    bound: float
    violations: int
    identity_F: float


def edp_sweep(alpha: float, n: int, trials: int, seed: int = 0x5EED, ancillas: int = 0,
              threads: int = 1, tol: float = 1e-9) -> EdpSweep:
    """Max fully entangled fraction over seeded random EDPs; trial i uses
    the stream ``default_rng([seed, i])`` whatever the thread count."""
    bound = (1 + alpha) / 2

    def one(i):
        return sample_edp(alpha, n, ancillas, rng_seed=[seed, i]).F

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            fs = list(ex.map(one, range(trials)))
    else:
        fs = [one(i) for i in range(trials)]
    ident = sample_edp(alpha, n, ancillas, unitaries="identity").F
    return EdpSweep(alpha, n, ancillas, trials, float(max(fs)), bound,
                    int(sum(f > bound + tol for f in fs)), float(ident))


def degree_mixture(n: int, r: int) -> np.ndarray:
    """omega_r^n: uniform mixture of the degree-r product terms."""
    terms = [t for t in omega_power_decomposition(0.5, n) if t.degree == r]
    return sum(proj(t.ket()) for t in terms) / len(terms)


def fplus_degree_margin(n: int, r: int, ua, ub, ancillas: int = 0) -> float:
    """(1 - r/2n) - F+(E(omega_r^n)); non-negative when the external
    inequality holds for this EDP."""
    out = run_edp(degree_mixture(n, r), n, ua, ub, ancillas)
    return 1 - r / (2 * n) - fidelity_plus(out)

