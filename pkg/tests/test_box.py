import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from _strategies import LOCAL_VERTICES, PR_VERTICES, local_boxes, ns_boxes
from nlbox.box import (
    TSIRELSON_Q,
    Box,
    canonical_relabeling,
    canonicalize,
    chsh,
    correlations,
    deterministic_box,
    from_function,
    is_isotropic,
    is_local,
    is_non_signaling,
    isotropic_box,
    marginal_alice,
    marginal_bob,
    max_chsh,
    pr_box,
    relabel,
    uniform_box,
    validate_box,
)
from nlbox.errors import DomainError, NegativeEntry, NormalizationError, SignalingBox


def signaling_box():
    # Alice outputs Bob's input.
    return from_function(lambda a, b, x, y: 0.5 if a == y else 0.0)


def test_validate_rejects_bad_tables():
    with pytest.raises(NormalizationError):
        validate_box(np.full(16, 0.3))
    t = np.full((2, 2, 2, 2), 0.25)
    t[0, 0, 0, 0], t[1, 1, 0, 0] = -0.25, 0.75
    with pytest.raises(NegativeEntry):
        validate_box(t)
    with pytest.raises(NormalizationError):
        validate_box(np.zeros(15))


def test_box_is_immutable():
    b = pr_box()
    with pytest.raises(ValueError):
        b.table[0, 0, 0, 0] = 1.0


def test_non_signaling_examples():
    assert is_non_signaling(pr_box())
    assert is_non_signaling(isotropic_box(0.85))
    assert not is_non_signaling(signaling_box())


def test_marginals():
    assert np.allclose(marginal_alice(pr_box()), 0.5)
    assert np.allclose(marginal_bob(isotropic_box(0.8)), 0.5)
    ind = deterministic_box(0, 0, 1, 0)
    assert np.allclose(marginal_alice(ind)[0], 1.0)
    with pytest.raises(SignalingBox):
        marginal_alice(signaling_box())


def test_correlation_examples():
    e = correlations(pr_box())
    assert (e.e00, e.e01, e.e10, e.e11) == (1, 1, 1, -1)
    assert np.allclose(correlations(uniform_box()).as_array(), 0)
    q = 0.83
    assert np.allclose(correlations(isotropic_box(q)).as_array(), [[2 * q - 1, 2 * q - 1], [2 * q - 1, 1 - 2 * q]])


def test_chsh_examples():
    v = chsh(pr_box())
    assert v.nl == 4 and v.q_equiv == 1
    assert chsh(uniform_box()).nl == 0
    assert math.isclose(chsh(isotropic_box(TSIRELSON_Q)).nl, 2 * math.sqrt(2), abs_tol=1e-12)
    assert math.isclose(chsh(isotropic_box(0.75)).nl, 2, abs_tol=1e-12)


def test_isotropic_endpoints():
    assert isotropic_box(1.0) == pr_box()
    assert isotropic_box(0.5) == uniform_box()
    with pytest.raises(DomainError):
        isotropic_box(1.2)


def test_canonicalize_examples():
    anti = from_function(lambda a, b, x, y: 0.5 if (a ^ b) != (x & y) else 0.0)
    assert canonicalize(anti) == pr_box()
    assert canonicalize(pr_box()) == pr_box()
    flipped = relabel(isotropic_box(0.9), (0, 1, 0, 0, 0, 0))
    assert flipped != isotropic_box(0.9)
    assert canonicalize(flipped) == isotropic_box(0.9)


def test_canonical_relabeling_of_canonical_box_is_identity():
    assert canonical_relabeling(isotropic_box(0.8)) == (0, 0, 0, 0, 0, 0)


def test_locality_examples():
    assert is_local(isotropic_box(0.75))
    assert not is_local(isotropic_box(0.76))
    assert is_local(uniform_box())
    with pytest.raises(SignalingBox):
        is_local(signaling_box())


def test_isotropy_examples():
    assert is_isotropic(isotropic_box(0.8))
    assert is_isotropic(pr_box())
    mixed = pr_box().mix(deterministic_box(0, 0, 0, 0), 0.5)
    e = correlations(mixed)
    assert e.e00 == 1 and e.e01 == 1
    assert not is_isotropic(mixed)


def test_polytope_vertices():
    assert len(LOCAL_VERTICES) == 16 and len(PR_VERTICES) == 8
    assert all(is_local(v) for v in LOCAL_VERTICES)
    assert all(not is_local(v) and max_chsh(v) == 4 for v in PR_VERTICES)


@given(st.floats(0.5, 1.0))
def test_isotropic_chsh_is_linear_in_q(q):
    v = chsh(isotropic_box(q))
    assert math.isclose(v.nl, 8 * q - 4, abs_tol=1e-12)
    assert math.isclose(v.q_equiv, q, abs_tol=1e-12)


@given(ns_boxes, ns_boxes, st.floats(0, 1))
def test_chsh_convexity_and_ns_closure(b1, b2, lam):
    m = b1.mix(b2, lam)
    assert is_non_signaling(m, 1e-12)
    assert math.isclose(chsh(m).nl, lam * chsh(b1).nl + (1 - lam) * chsh(b2).nl, abs_tol=1e-12)


@given(ns_boxes)
def test_lp_and_chsh_locality_agree(b):
    assume(abs(max_chsh(b) - 2) > 1e-9)
    assert is_local(b, "lp") == is_local(b, "chsh")


@given(local_boxes)
def test_local_mixtures_are_local(b):
    assert is_local(b, "lp")
    assert max_chsh(b) <= 2 + 1e-12


@given(ns_boxes)
def test_canonicalize_preserves_invariants(b):
    c = canonicalize(b)
    assert is_non_signaling(c)
    assert sorted(np.abs(correlations(c).as_array()).ravel()) == pytest.approx(
        sorted(np.abs(correlations(b).as_array()).ravel()), abs=1e-12)
    assert math.isclose(chsh(c).nl, max_chsh(b), abs_tol=1e-12)
    e = correlations(c)
    assert min(e.e00, e.e01, e.e10) >= -1e-12
    if abs(max_chsh(b) - 2) > 1e-9:
        assert is_local(c) == is_local(b)


@given(ns_boxes)
def test_max_chsh_bounded_by_algebra(b):
    assert max_chsh(b) <= 4 + 1e-12


def test_box_equality_tolerance():
    t = isotropic_box(0.8).table.copy()
    t[0, 0, 0, 0] += 1e-11
    t[0, 1, 0, 0] -= 1e-11
    assert Box(t) == isotropic_box(0.8)
