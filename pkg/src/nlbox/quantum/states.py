"""Two-qubit states, the Omega_alpha family and its tensor-power decomposition."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionBudget, DomainError, InvalidState

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SX, SY, SZ)

KET00 = np.array([1, 0, 0, 0], dtype=complex)
KET11 = np.array([0, 0, 0, 1], dtype=complex)
PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)
PHI_MINUS = np.array([1, 0, 0, -1], dtype=complex) / math.sqrt(2)
PSI_PLUS = np.array([0, 1, 1, 0], dtype=complex) / math.sqrt(2)
PSI_MINUS = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)
BELL_BASIS = (PHI_PLUS, PHI_MINUS, PSI_PLUS, PSI_MINUS)


def proj(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def kron(*ops) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        d = m.shape[0]
        if m.shape != (d, d) or d & (d - 1) or d < 2:
            raise InvalidState(f"density matrix must be square with power-of-two size, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise InvalidState("density matrix is not Hermitian")
        if abs(np.trace(m) - 1) > TRACE_TOL:
            raise InvalidState(f"trace {np.trace(m).real!r} != 1")
        if np.linalg.eigvalsh(m).min() < -PSD_TOL:
            raise InvalidState("density matrix is not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def as_matrix(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def hermitize(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    return (m + m.conj().T) / 2


@dataclass(frozen=True, eq=False)
class OmegaState:
    alpha: float
    state: DensityMatrix

    @property
    def matrix(self) -> np.ndarray:
        return self.state.matrix


def omega(alpha: float) -> OmegaState:
    """(1+alpha)/2 |Phi+><Phi+| + (1-alpha)/2 |Phi-><Phi-|."""
    if not 0 <= alpha <= 1:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    bell_form = (1 + alpha) / 2 * proj(PHI_PLUS) + (1 - alpha) / 2 * proj(PHI_MINUS)
    product_form = alpha * proj(PHI_PLUS) + (1 - alpha) / 2 * (proj(KET00) + proj(KET11))
    if np.max(np.abs(bell_form - product_form)) > 1e-12:
        raise InvalidState("the two forms of Omega_alpha disagree")
    return OmegaState(alpha, DensityMatrix(bell_form))


def partial_trace(rho, dims, keep) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``."""
    rho = as_matrix(rho)
    k = len(dims)
    t = rho.reshape(tuple(dims) * 2)
    keep = sorted(keep)
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = [letters[i] for i in range(k)]
    col = [letters[k + i] if i in keep else letters[i] for i in range(k)]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    res = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    d = math.prod(dims[i] for i in keep)
    return res.reshape(d, d)


# --- random states -----------------------------------------------------------------

def random_pure(rng: np.random.Generator, dim: int = 4) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return proj(v / np.linalg.norm(v))


def random_mixed(rng: np.random.Generator, dim: int = 4, rank: int | None = None) -> np.ndarray:
    """Induced (Hilbert-Schmidt for full rank) random mixed state."""
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    return hermitize(m / np.trace(m).real)


def random_two_qubit_state(rng: np.random.Generator) -> np.ndarray:
    """Draw from a mix of families so extremal regions get covered."""
    kind = rng.integers(6)
    if kind == 0:
        return random_pure(rng)
    if kind == 1:
        return random_mixed(rng, 4, int(rng.integers(1, 5)))
    if kind == 2:  # Bell-diagonal
        p = rng.dirichlet(np.ones(4) * 0.5)
        return sum(pi * proj(b) for pi, b in zip(p, BELL_BASIS))
    if kind == 3:  # locally rotated Omega
        from .edp import haar_unitary

        u = np.kron(haar_unitary(rng, 2), haar_unitary(rng, 2))
        return hermitize(u @ omega(float(rng.uniform())).matrix @ u.conj().T)
    if kind == 4:  # pure state mixed with noise
        lam = rng.uniform()
        return hermitize(lam * random_pure(rng) + (1 - lam) * random_mixed(rng))
    a = random_pure(rng, 2)
    b = random_pure(rng, 2)
    return np.kron(a, b)


# --- Omega^{(x)n} decomposition -------------------------------------------------------

STAR = "*"
_FACTORS = {0: KET00, 1: KET11, STAR: PHI_PLUS}


@dataclass(frozen=True)
class DecompositionTerm:
    v: tuple
    degree: int
    weight: float

    def ket(self) -> np.ndarray:
        return kron(*[_FACTORS[s].reshape(4, 1) for s in self.v]).ravel()


def omega_power_decomposition(alpha: float, n: int) -> list:
    """All 3**n terms alpha^(n-r) ((1-alpha)/2)^r |phi_v><phi_v|, v in {0,1,*}^n.

    Pairs are ordered (A1 B1)(A2 B2)... as in the plain Kronecker power.
    """
    if not 0 <= alpha <= 1:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    if not 1 <= n <= 4:
        raise DimensionBudget(f"n must be in 1..4 (dimension 4**n <= 256), got {n}")
    terms = []
    for v in itertools.product((STAR, 0, 1), repeat=n):
        r = sum(s != STAR for s in v)
        terms.append(DecompositionTerm(v, r, alpha ** (n - r) * ((1 - alpha) / 2) ** r))
    return terms


def reconstruct(terms) -> np.ndarray:
    d = 4 ** len(terms[0].v)
    out = np.zeros((d, d), dtype=complex)
    for t in terms:
        if t.weight:
            out += t.weight * proj(t.ket())
    return out


def omega_power(alpha: float, n: int) -> np.ndarray:
    return kron(*[omega(alpha).matrix] * n)
