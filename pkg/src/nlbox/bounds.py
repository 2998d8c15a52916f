"""Closed-form limits on distilling isotropic boxes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .box import TSIRELSON_Q, chsh
from .errors import DomainError, InvariantError

BELL_Q = 0.75
DOMAIN = (BELL_Q, TSIRELSON_Q)
_EDGE = 1e-12  # slack for floating representations of the endpoints
_SQ2 = math.sqrt(2)


@dataclass(frozen=True)
class GapEvaluation:
    q: float
    g: float
    ceiling: float
    alpha_of_q: float


@dataclass(frozen=True)
class BoundCurve:
    kind: str  # "distillability_ceiling" | "nl_vs_fef"
    samples: list
    domain: tuple

    def as_array(self) -> np.ndarray:
        return np.array(self.samples, dtype=float)


def in_domain(q: float) -> bool:
    return DOMAIN[0] - _EDGE <= q <= DOMAIN[1] + _EDGE


def clip_to_domain(q: float) -> float:
    return min(max(q, DOMAIN[0]), DOMAIN[1])


def alpha_of_q(q: float) -> float:
    """Inverse of q = 1/2 + sqrt(1 + alpha^2) / 4."""
    return math.sqrt(max((4 * q - 2) ** 2 - 1, 0.0))


def gap_value(q: float) -> float:
    return 0.75 - q + (_SQ2 - 1) / 4 * math.sqrt(max(4 * (2 * q - 1) ** 2 - 1, 0.0))


def gap(q: float) -> GapEvaluation:
    """Distillability gap g(q) and ceiling q + g(q) for isotropic boxes.

    The ceiling is recomputed from the state-side quantities
    1/2 + (NL[Omega_alpha] + c(alpha)) / 8 and the two must agree to 1e-12.
    """
    from .quantum.entanglement import c_alpha

    if not in_domain(q):
        raise DomainError(f"g(q) is defined for q in [3/4, (2+sqrt2)/4], got {q}")
    q = clip_to_domain(q)
    g = gap_value(q)
    a = alpha_of_q(q)
    via_state = 0.5 + (2 * math.sqrt(1 + a * a) + c_alpha(min(a, 1.0))) / 8
    if abs(via_state - (q + g)) > 1e-12:
        raise InvariantError(f"ceiling mismatch at q={q}: {q + g} vs {via_state}")
    return GapEvaluation(q, g, q + g, a)


def max_gap(tol: float = 1e-10):
    """Golden-section search for the interior maximum of g on the domain."""
    lo, hi = DOMAIN
    inv = (math.sqrt(5) - 1) / 2
    c, d = hi - inv * (hi - lo), lo + inv * (hi - lo)
    fc, fd = gap_value(c), gap_value(d)
    while hi - lo > tol:
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - inv * (hi - lo)
            fc = gap_value(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + inv * (hi - lo)
            fd = gap_value(d)
    q = (lo + hi) / 2
    return q, gap_value(q)


def max_gap_location() -> float:
    """Closed-form argmax 1/2 + sqrt((1 + sqrt2) / 2) / 4."""
    return 0.5 + 0.25 * math.sqrt((1 + _SQ2) / 2)


def ceiling_curve(grid_points: int) -> BoundCurve:
    if grid_points < 2:
        raise DomainError("need at least two grid points")
    qs = np.linspace(DOMAIN[0], DOMAIN[1], grid_points)
    return BoundCurve("distillability_ceiling", [(float(q), gap(q).ceiling) for q in qs], DOMAIN)


def nl_vs_fef_curve(grid_points: int) -> BoundCurve:
    from .quantum.entanglement import nl_upper_from_F

    if grid_points < 2:
        raise DomainError("need at least two grid points")
    fs = np.linspace(0.25, 1.0, grid_points)
    return BoundCurve("nl_vs_fef", [(float(f), nl_upper_from_F(f)) for f in fs], (0.25, 1.0))


def known_limits(q: float, p: float) -> dict:
    """Which of the three classical no-go results forbid turning q into p."""
    if not 0.5 <= q <= 1:
        raise DomainError(f"q must lie in [1/2, 1], got {q}")
    return {
        "bell_blocked": q <= BELL_Q and p > BELL_Q,
        "tsirelson_blocked": q <= TSIRELSON_Q and p > TSIRELSON_Q,
        "perfection_blocked": q < 1 and p >= 1,
    }


@dataclass(frozen=True)
class StepVerdict:
    q: float
    eps: float
    delta: float
    gamma: float
    arity: int
    composed: object = field(repr=False)
    claimed_q: float
    ceiling_q: float
    contradiction: bool
    observed_q: float | None = None
    observed_consistent: bool | None = None


def step_function_check(q, eps, delta, gamma, inner=None, outer=None, resource=None) -> StepVerdict:
    """Chain two distillation claims through `compose`.

    ``inner`` (n boxes) is claimed to turn q into q + delta and ``outer``
    (m boxes) to turn q + delta into q + eps + gamma.  Their composition is an
    n*m-box protocol from q to q + eps + gamma, which contradicts a ceiling of
    q + eps whenever gamma > 0.  With a ``resource`` the composed protocol is
    also simulated and its actual output compared with the ceiling.
    """
    from .wiring import apply_wiring, compose, identity_protocol

    if not 0 <= delta < eps or gamma < 0:
        raise DomainError("need 0 <= delta < eps and gamma >= 0")
    inner = inner or identity_protocol(1)
    outer = outer or identity_protocol(1)
    composed = compose(outer, [inner] * outer.n)
    claimed = q + eps + gamma
    ceiling = q + eps
    observed = consistent = None
    if resource is not None:
        observed = chsh(apply_wiring(composed, [resource] * composed.n)).q_equiv
        consistent = observed <= ceiling + 1e-9
    return StepVerdict(q, eps, delta, gamma, composed.n, composed, claimed, ceiling,
                       claimed > ceiling, observed, consistent)
