import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nlbox import bounds
from nlbox.box import TSIRELSON_Q, isotropic_box
from nlbox.errors import DomainError
from nlbox.quantum.entanglement import c_alpha, nl_state
from nlbox.quantum.states import omega
from nlbox.wiring import identity_protocol, xor_protocol

Q_STAR = 0.5 + 0.25 * math.sqrt((1 + math.sqrt(2)) / 2)


def test_gap_endpoints_and_peak():
    assert abs(bounds.gap(0.75).g) <= 1e-12
    assert abs(bounds.gap(TSIRELSON_Q).g) <= 1e-12
    assert bounds.gap(Q_STAR).g == pytest.approx(0.0225, abs=5e-4)
    assert bounds.gap(0.8).alpha_of_q == pytest.approx(math.sqrt(1.2 ** 2 - 1))


def test_gap_domain():
    for q in (0.7, 0.86):
        with pytest.raises(DomainError):
            bounds.gap(q)


def test_golden_section_finds_closed_form_peak():
    q, g = bounds.max_gap()
    assert abs(q - Q_STAR) <= 1e-9
    assert abs(q - bounds.max_gap_location()) <= 1e-9
    assert g == pytest.approx(bounds.gap(Q_STAR).g, abs=1e-15)


@given(st.floats(0.75, TSIRELSON_Q))
def test_gap_non_negative_and_below_tsirelson(q):
    e = bounds.gap(q)
    assert e.g >= -1e-15
    assert e.ceiling <= TSIRELSON_Q + 1e-12
    assert e.g <= bounds.gap(Q_STAR).g + 1e-15


@pytest.mark.parametrize("alpha", np.linspace(0, 1, 21))
def test_identity_chain(alpha):
    q = 0.5 + math.sqrt(1 + alpha ** 2) / 4
    via_state = 0.5 + (nl_state(omega(alpha).matrix) + c_alpha(alpha)) / 8
    assert abs(bounds.gap(q).ceiling - via_state) <= 1e-12


def test_curves():
    c = bounds.ceiling_curve(11).as_array()
    assert np.allclose(c[0], [0.75, 0.75], atol=1e-12)
    assert np.allclose(c[-1], [TSIRELSON_Q, TSIRELSON_Q], atol=1e-12)
    assert np.all(c[:, 1] >= c[:, 0] - 1e-15)
    f = dict(bounds.nl_vs_fef_curve(76).samples)
    assert f[0.9] == pytest.approx(2 * math.sqrt(1.64))
    assert f[0.3] == pytest.approx(1.2)
    with pytest.raises(DomainError):
        bounds.ceiling_curve(1)


def test_known_limits():
    assert bounds.known_limits(0.74, 0.76)["bell_blocked"]
    assert bounds.known_limits(0.85, 0.86)["tsirelson_blocked"]
    assert bounds.known_limits(0.99, 1.0)["perfection_blocked"]
    assert not any(bounds.known_limits(0.8, 0.81).values())


def test_step_function_check():
    v = bounds.step_function_check(0.8, 0.02, 0.0, 0.0)
    assert not v.contradiction
    v = bounds.step_function_check(0.8, 0.02, 0.01, 0.005, inner=xor_protocol(2), outer=xor_protocol(3))
    assert v.contradiction and v.arity == 6
    v = bounds.step_function_check(0.8, 0.02, 0.01, 0.005, inner=identity_protocol(1),
                                   outer=identity_protocol(1), resource=isotropic_box(0.8))
    assert v.observed_consistent and v.observed_q == pytest.approx(0.8)
    with pytest.raises(DomainError):
        bounds.step_function_check(0.8, 0.01, 0.02, 0.0)
