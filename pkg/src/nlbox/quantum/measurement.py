"""Binary projective measurements and the boxes they generate."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..box import SIMULATED_TOL, Box, validate_box
from ..errors import DomainError, NotProjector
from ..wiring import apply_wiring, twirl_protocol
from .states import PAULIS, SX, SZ, as_matrix, kron, omega


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian matrix with eigenvalues +-1."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        d = m.shape[0]
        if np.max(np.abs(m - m.conj().T)) > 1e-12 or np.max(np.abs(m @ m - np.eye(d))) > 1e-12:
            raise NotProjector("observable must be Hermitian and square to the identity")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def as_projectors(self):
        """(P0, P1) with P0 - P1 = M and P0 + P1 = I."""
        d = self.matrix.shape[0]
        eye = np.eye(d)
        return (eye + self.matrix) / 2, (eye - self.matrix) / 2

    @classmethod
    def from_projector(cls, p0) -> "Observable":
        p0 = np.asarray(p0, dtype=complex)
        return cls(2 * p0 - np.eye(p0.shape[0]))


def xz_observable(angle: float) -> Observable:
    """cos(angle) sigma_X + sin(angle) sigma_Z."""
    return Observable(math.cos(angle) * SX + math.sin(angle) * SZ)


def bloch_observable(v) -> Observable:
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    return Observable(sum(c * s for c, s in zip(v, PAULIS)))


def canonical_measurements(alpha: float):
    """Alice: sigma_Z, sigma_X.  Bob: (+-alpha sigma_X + sigma_Z) / sqrt(1 + alpha^2)."""
    if not 0 <= alpha <= 1:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    s = math.sqrt(1 + alpha * alpha)
    alice = (Observable(SZ), Observable(SX))
    bob = (Observable(alpha / s * SX + 1 / s * SZ), Observable(-alpha / s * SX + 1 / s * SZ))
    return alice, bob


def measure_box(rho, alice, bob) -> Box:
    """Born-rule box P(a,b|x,y) = Tr((P_A^{x,a} (x) P_B^{y,b}) rho)."""
    m = as_matrix(rho)
    t = np.zeros((2, 2, 2, 2))
    for x, oa in enumerate(alice):
        pa = oa.as_projectors
        for y, ob in enumerate(bob):
            pb = ob.as_projectors
            for a in (0, 1):
                for b in (0, 1):
                    t[a, b, x, y] = np.trace(kron(pa[a], pb[b]) @ m).real
    return validate_box(t, tol=SIMULATED_TOL)


def expectation(rho, a: Observable, b: Observable) -> float:
    return float(np.trace(kron(a.matrix, b.matrix) @ as_matrix(rho)).real)


def simulate_isotropic(alpha: float) -> Box:
    """Isotropic box obtained by measuring Omega_alpha and twirling."""
    state = omega(alpha)
    raw = measure_box(state.matrix, *canonical_measurements(alpha))
    return apply_wiring(twirl_protocol(), [raw])
