"""Correlation matrix, CHSH capacity and fully entangled fraction of two qubits."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from ..errors import CounterexampleFound, DomainError, OptimizerDivergence
from .states import (
    KET00,
    PAULIS,
    PHI_PLUS,
    as_matrix,
    omega,
    proj,
    random_two_qubit_state,
)

_PAULI_PAIRS = np.array([[np.kron(a, b) for b in PAULIS] for a in PAULIS])  # (3,3,4,4)
_SQ2 = math.sqrt(2)


@dataclass(frozen=True)
class TMatrix:
    t: np.ndarray

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.t, compute_uv=False)

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.t))


def t_matrix(rho) -> TMatrix:
    """T_ij = Tr(rho (sigma_i (x) sigma_j))."""
    m = as_matrix(rho)
    t = np.einsum("ijab,ba->ij", _PAULI_PAIRS, m).real
    return TMatrix(t)


def nl_state(rho) -> float:
    """Maximal CHSH value of a two-qubit state: 2 sqrt(u1 + u2), u = eig(T^T T)."""
    t = t_matrix(rho).t
    u = np.sort(np.linalg.eigvalsh(t.T @ t))[::-1]
    return 2 * math.sqrt(max(u[0] + u[1], 0.0))


def fidelity_plus(sigma) -> float:
    """<Phi+| sigma |Phi+>."""
    m = as_matrix(sigma)
    return float(np.real(PHI_PLUS.conj() @ m @ PHI_PLUS))


def fef_closed_form(rho) -> float:
    """F from the singular values of T, split on the sign of det T."""
    tm = t_matrix(rho)
    s = tm.singular_values()
    if tm.det < 0:
        return (1 + s.sum()) / 4
    return (1 + s[0] + s[1] - s[2]) / 4


def _su2(a, b, c):
    """Rz(a) Ry(b) Rz(c) as a nested tuple (plain complex arithmetic is
    much cheaper than numpy for 2x2 work inside the optimiser)."""
    cb, sb = math.cos(b / 2), math.sin(b / 2)
    ea, ec = cmath.exp(-0.5j * a), cmath.exp(-0.5j * c)
    return ((ea * cb * ec, -ea * sb / ec), (sb * ec / ea, cb / (ea * ec)))


def _overlap(params, m) -> float:
    """<psi| m |psi> with psi = (UA (x) UB)^dagger |Phi+>."""
    ua, ub = _su2(*params[:3]), _su2(*params[3:])
    psi = np.array([
        sum((ua[k][i] * ub[k][j]).conjugate() for k in (0, 1)) for i in (0, 1) for j in (0, 1)
    ]) / _SQ2
    return float(np.real(np.vdot(psi, m @ psi)))


def fef_numeric(rho, starts: int = 32, seed: int = 0, tol: float = 1e-10) -> float:
    """Multi-start Nelder-Mead over local unitaries (3 Euler angles per side)."""
    m = as_matrix(rho)
    rng = np.random.default_rng(seed)
    best = -np.inf
    for _ in range(starts):
        x0 = rng.uniform(0, 2 * np.pi, size=6)
        res = minimize(lambda p: -_overlap(p, m), x0, method="Nelder-Mead",
                       options={"xatol": tol, "fatol": tol * 1e-2, "maxiter": 4000})
        best = max(best, -res.fun)
    return best


def fully_entangled_fraction(rho, check: bool = False, starts: int = 32, seed: int = 0) -> float:
    """max over local unitaries of <Phi+| U rho U^dagger |Phi+>.

    The closed form is returned; with ``check=True`` it is compared against
    the numerical maximisation and `OptimizerDivergence` raised beyond 1e-6.
    """
    f = fef_closed_form(rho)
    if check:
        g = fef_numeric(rho, starts=starts, seed=seed)
        if abs(f - g) > 1e-6:
            raise OptimizerDivergence(f"closed form {f} vs optimiser {g}")
    return f


def nl_upper_from_F(F: float) -> float:
    """Largest CHSH value compatible with fully entangled fraction F."""
    if not 0.25 - 1e-12 <= F <= 1 + 1e-12:
        raise DomainError(f"F must lie in [1/4, 1], got {F}")
    if F < 0.5:
        return float(4 * F)
    return 2 * math.sqrt(1 + (2 * F - 1) ** 2)


def c_alpha(alpha: float) -> float:
    if not 0 <= alpha <= 1:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    return alpha * (2 * _SQ2 - 2) - 2 * math.sqrt(1 + alpha * alpha) + 2


# --- ensemble inequality -----------------------------------------------------------

@dataclass(frozen=True)
class Lemma5Report:
    alpha: float
    trials: int
    violations: int
    worst_margin: float  # min over samples of (NL[Omega] + c) - sum p NL
    extremal_residual: float


def _ensemble_sums(weights, states):
    f = sum(w * fef_closed_form(s) for w, s in zip(weights, states))
    nl = sum(w * nl_state(s) for w, s in zip(weights, states))
    return f, nl


def lemma5_witness(alpha: float, trials: int, rng_seed: int = 0x5EED, tol: float = 1e-9) -> Lemma5Report:
    """Sample ensembles with sum p F(sigma) <= F(Omega_alpha) and test
    sum p NL[sigma] <= NL[Omega_alpha] + c(alpha).

    An ensemble whose mean F overshoots is topped up with |00> until the
    premise holds with equality, which keeps samples near the boundary.
    """
    if not 0 <= alpha <= 1:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    rng = np.random.default_rng(rng_seed)
    f_target = (1 + alpha) / 2
    rhs = 2 * math.sqrt(1 + alpha * alpha) + c_alpha(alpha)
    product = proj(KET00)
    violations = 0
    worst = np.inf
    for _ in range(trials):
        k = int(rng.integers(1, 5))
        states = [random_two_qubit_state(rng) for _ in range(k)]
        weights = list(rng.dirichlet(np.ones(k)))
        f, nl = _ensemble_sums(weights, states)
        if f > f_target:
            w = (f - f_target) / (f - 0.5)
            weights = [(1 - w) * p for p in weights] + [w]
            states = states + [product]
            f, nl = _ensemble_sums(weights, states)
        if f > f_target + tol:
            raise CounterexampleFound(f"premise repair failed: {f} > {f_target}")
        margin = rhs - nl
        worst = min(worst, margin)
        if margin < -tol:
            violations += 1
    f_ext, nl_ext = _ensemble_sums([alpha, 1 - alpha], [proj(PHI_PLUS), product])
    residual = max(abs(f_ext - f_target), abs(nl_ext - rhs))
    if violations:
        raise CounterexampleFound(f"{violations} ensembles violate the conclusion at alpha={alpha}")
    return Lemma5Report(alpha, trials, violations, float(worst), float(residual))


def omega_properties(alpha: float):
    """(nl_state, fully_entangled_fraction) of Omega_alpha."""
    m = omega(alpha).matrix
    return nl_state(m), fully_entangled_fraction(m)
