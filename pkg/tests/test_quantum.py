import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from nlbox.box import TSIRELSON_Q, chsh, correlations, is_isotropic, is_non_signaling, isotropic_box, uniform_box
from nlbox.errors import (
    CounterexampleFound,
    DimensionBudget,
    DomainError,
    InvalidState,
    NotComplementary,
    NotProjector,
)
from nlbox.quantum import blockdiag, edp, entanglement, measurement, states
from nlbox.quantum.entanglement import (
    c_alpha,
    fef_closed_form,
    fef_numeric,
    fidelity_plus,
    fully_entangled_fraction,
    lemma5_witness,
    nl_state,
    nl_upper_from_F,
    t_matrix,
)
from nlbox.quantum.states import KET00, PHI_PLUS, omega, proj

seeds = st.integers(0, 2**32 - 1)
MIXED = np.eye(4) / 4


# --- states --------------------------------------------------------------------------

def test_omega_examples():
    assert np.allclose(omega(1).matrix, proj(PHI_PLUS), atol=1e-12)
    assert np.allclose(omega(0).matrix, (proj(KET00) + proj(states.KET11)) / 2, atol=1e-12)
    bell = np.array(states.BELL_BASIS)
    diag = np.real(np.einsum("ia,ab,ib->i", bell.conj(), omega(0.5).matrix, bell))
    assert np.allclose(sorted(diag, reverse=True), [0.75, 0.25, 0, 0], atol=1e-12)
    with pytest.raises(DomainError):
        omega(1.5)


def test_bell_basis_orthonormal():
    b = np.array(states.BELL_BASIS)
    assert np.allclose(b.conj() @ b.T, np.eye(4), atol=1e-15)


def test_density_matrix_validation():
    with pytest.raises(InvalidState):
        states.DensityMatrix(np.diag([1.2, -0.2, 0, 0]))
    with pytest.raises(InvalidState):
        states.DensityMatrix(np.eye(3) / 3)
    with pytest.raises(InvalidState):
        states.DensityMatrix(np.eye(4) / 2)


def test_partial_trace_of_product():
    a, b = states.random_mixed(np.random.default_rng(1), 2), states.random_mixed(np.random.default_rng(2), 4)
    assert np.allclose(states.partial_trace(np.kron(a, b), (2, 4), [0]), a)
    assert np.allclose(states.partial_trace(np.kron(a, b), (2, 4), [1]), b)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("alpha", [0.0, 0.3, 0.7, 1.0])
def test_decomposition_reconstructs_tensor_power(n, alpha):
    terms = states.omega_power_decomposition(alpha, n)
    assert len(terms) == 3 ** n
    assert math.isclose(sum(t.weight for t in terms), 1.0, abs_tol=1e-12)
    assert np.max(np.abs(states.reconstruct(terms) - states.omega_power(alpha, n))) <= 1e-12
    for r in range(n + 1):
        assert sum(t.degree == r for t in terms) == math.comb(n, r) * 2 ** r


def test_decomposition_budget():
    assert sum(t.degree == 1 for t in states.omega_power_decomposition(0.5, 2)) == 4
    with pytest.raises(DimensionBudget):
        states.omega_power_decomposition(0.5, 5)


# --- measurements -----------------------------------------------------------------------

def test_observables_square_to_identity():
    for a in (0, 0.4, 1):
        alice, bob = measurement.canonical_measurements(a)
        for o in alice + bob:
            assert np.allclose(o.matrix @ o.matrix, np.eye(2), atol=1e-12)
            p0, p1 = o.as_projectors
            assert np.allclose(p0 @ p1, 0) and np.allclose(p0 + p1, np.eye(2))
    _, bob = measurement.canonical_measurements(0)
    assert np.allclose(bob[0].matrix, states.SZ) and np.allclose(bob[1].matrix, states.SZ)
    _, bob = measurement.canonical_measurements(1)
    assert np.allclose(bob[0].matrix, (states.SX + states.SZ) / math.sqrt(2))
    assert np.allclose(bob[1].matrix, (-states.SX + states.SZ) / math.sqrt(2))
    with pytest.raises(NotProjector):
        measurement.Observable(np.diag([1.0, 0.5]))


def test_measure_box_examples():
    b = measurement.measure_box(proj(PHI_PLUS), *measurement.canonical_measurements(1))
    assert math.isclose(chsh(b).nl, 2 * math.sqrt(2), abs_tol=1e-12)
    obs = measurement.canonical_measurements(0.3)
    assert measurement.measure_box(MIXED, *obs) == uniform_box()
    for a in (0.2, 0.9):
        e = correlations(measurement.measure_box(omega(a).matrix, *measurement.canonical_measurements(a)))
        s = math.sqrt(1 + a * a)
        assert np.allclose([e.e00, e.e01, e.e10, e.e11], [1 / s, 1 / s, a * a / s, -a * a / s], atol=1e-12)


@given(seeds)
def test_measured_boxes_are_non_signaling(seed):
    rng = np.random.default_rng(seed)
    rho = states.random_two_qubit_state(rng)
    obs = [measurement.bloch_observable(rng.normal(size=3)) for _ in range(4)]
    assert is_non_signaling(measurement.measure_box(rho, obs[:2], obs[2:]), 1e-12)


def test_simulate_isotropic_examples():
    assert measurement.simulate_isotropic(1.0) == isotropic_box(TSIRELSON_Q)
    assert measurement.simulate_isotropic(0.0) == isotropic_box(0.75)
    assert math.isclose(chsh(measurement.simulate_isotropic(0.6)).q_equiv, 0.79155, abs_tol=1e-5)


@given(st.floats(0, 1))
def test_simulation_saturates_state_nonlocality(a):
    b = measurement.simulate_isotropic(a)
    assert is_isotropic(b)
    assert math.isclose(chsh(b).nl, nl_state(omega(a).matrix), abs_tol=1e-9)
    assert np.allclose(np.abs(correlations(b).as_array()), math.sqrt(1 + a * a) / 2, atol=1e-9)


# --- T-matrix, NL, F ------------------------------------------------------------------------

def test_t_matrix_examples():
    for a in (0.0, 0.4, 1.0):
        assert np.allclose(t_matrix(omega(a).matrix).t, np.diag([a, -a, 1]), atol=1e-12)
        assert math.isclose(nl_state(omega(a).matrix), 2 * math.sqrt(1 + a * a), abs_tol=1e-12)
    assert np.allclose(t_matrix(MIXED).t, 0) and nl_state(MIXED) == 0
    assert math.isclose(nl_state(proj(PHI_PLUS)), 2 * math.sqrt(2), abs_tol=1e-12)


def _optimised_chsh(rho, starts, rng):
    def unit(th, ph):
        return measurement.bloch_observable([math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)])

    def neg(p):
        obs = [unit(p[2 * i], p[2 * i + 1]) for i in range(4)]
        e = [measurement.expectation(rho, obs[x], obs[2 + y]) for x in (0, 1) for y in (0, 1)]
        return -(e[0] + e[1] + e[2] - e[3])

    return max(-minimize(neg, rng.uniform(0, 2 * np.pi, 8), method="Nelder-Mead",
                         options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 8000}).fun
               for _ in range(starts))


@settings(max_examples=4)
@given(seeds)
def test_nl_state_matches_optimised_measurements(seed):
    rng = np.random.default_rng(seed)
    rho = states.random_two_qubit_state(rng)
    best = _optimised_chsh(rho, 6, rng)
    assert best <= nl_state(rho) + 1e-9
    assert nl_state(rho) - best <= 1e-6


def test_fef_examples():
    for a in (0.0, 0.35, 1.0):
        assert math.isclose(fully_entangled_fraction(omega(a).matrix), (1 + a) / 2, abs_tol=1e-12)
    assert math.isclose(fully_entangled_fraction(MIXED), 0.25, abs_tol=1e-12)
    assert math.isclose(fully_entangled_fraction(proj(KET00), check=True), 0.5, abs_tol=1e-12)


def test_fef_of_product_state_by_grid():
    # only V = UB^dagger conj(UA) matters, so a grid over one SU(2) suffices
    best = 0.0
    grid = np.linspace(0, 2 * np.pi, 25)
    for a, b, c in itertools.product(grid, repeat=3):
        v = entanglement._su2(a, b, c)
        u = np.kron(np.eye(2), np.array(v))
        psi = u.conj().T @ PHI_PLUS
        best = max(best, float(np.real(psi.conj() @ proj(KET00) @ psi)))
    assert math.isclose(best, 0.5, abs_tol=1e-12)


@settings(max_examples=6)
@given(seeds)
def test_fef_closed_form_matches_optimiser(seed):
    rho = states.random_two_qubit_state(np.random.default_rng(seed))
    assert abs(fef_closed_form(rho) - fef_numeric(rho, starts=32, seed=seed)) <= 1e-6


@given(seeds)
def test_fidelity_plus_below_fef(seed):
    rho = states.random_two_qubit_state(np.random.default_rng(seed))
    assert fidelity_plus(rho) <= fully_entangled_fraction(rho) + 1e-12
    assert 0.25 - 1e-12 <= fully_entangled_fraction(rho) <= 1 + 1e-12


@given(seeds)
def test_nl_below_fef_curve(seed):
    rho = states.random_two_qubit_state(np.random.default_rng(seed))
    assert nl_state(rho) <= nl_upper_from_F(fef_closed_form(rho)) + 1e-6


def test_nl_upper_from_f_examples():
    assert math.isclose(nl_upper_from_F(1.0), 2 * math.sqrt(2))
    assert nl_upper_from_F(0.5) == 2 and math.isclose(nl_upper_from_F(0.5 - 1e-15), 2)
    assert nl_upper_from_F(0.25) == 1
    with pytest.raises(DomainError):
        nl_upper_from_F(0.2)


def test_c_alpha_examples():
    assert c_alpha(0) == pytest.approx(0, abs=1e-15)
    assert c_alpha(1) == pytest.approx(0, abs=1e-15)
    assert c_alpha(0.5) == pytest.approx(0.178, abs=5e-4)
    with pytest.raises(DomainError):
        c_alpha(-0.1)


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
def test_c_alpha_is_the_envelope_gap(alpha):
    # best two-point mixture on the NL-vs-F curve with mean F fixed at (1+alpha)/2
    target = (1 + alpha) / 2
    fs = np.linspace(0.25, 1.0, 601)
    best = -np.inf
    for f1 in fs[fs <= target]:
        for f2 in fs[fs >= target]:
            w = 1.0 if f2 == f1 else (target - f1) / (f2 - f1)
            best = max(best, (1 - w) * nl_upper_from_F(f1) + w * nl_upper_from_F(f2))
    assert math.isclose(best - 2 * math.sqrt(1 + alpha ** 2), c_alpha(alpha), abs_tol=1e-9)


def test_lemma5_small_runs():
    r = lemma5_witness(0.5, 300, rng_seed=3)
    assert r.violations == 0 and r.extremal_residual <= 1e-9
    r1 = lemma5_witness(1.0, 100, rng_seed=4)
    assert r1.worst_margin >= -1e-9
    with pytest.raises(DomainError):
        lemma5_witness(1.1, 1)


def test_lemma5_raises_on_counterexample(monkeypatch):
    monkeypatch.setattr(entanglement, "c_alpha", lambda a: -1.0)
    with pytest.raises(CounterexampleFound):
        lemma5_witness(0.5, 20, rng_seed=0)


# --- EDPs -------------------------------------------------------------------------------------

def test_haar_unitary_is_unitary():
    u = edp.haar_unitary(np.random.default_rng(0), 8)
    assert np.allclose(u.conj().T @ u, np.eye(8), atol=1e-12)


@pytest.mark.parametrize("n,anc", [(1, 0), (2, 0), (2, 1), (3, 0)])
def test_identity_edp_is_tight(n, anc):
    s = edp.sample_edp(0.6, n, anc, unitaries="identity")
    assert abs(s.F - 0.8) <= 1e-12


@settings(max_examples=15)
@given(seeds, st.floats(0, 1), st.sampled_from([(1, 0), (1, 1), (2, 0), (2, 1)]))
def test_random_edps_respect_bound(seed, alpha, shape):
    n, anc = shape
    s = edp.sample_edp(alpha, n, anc, rng_seed=seed)
    assert s.F <= (1 + alpha) / 2 + 1e-9
    assert abs(np.trace(s.state.matrix) - 1) <= 1e-12


def test_edp_budget_and_threads():
    with pytest.raises(DimensionBudget):
        edp.sample_edp(0.5, 4)
    with pytest.raises(DimensionBudget):
        edp.sample_edp(0.5, 2, ancillas=3)
    assert edp.edp_sweep(0.5, 2, 40, seed=9, threads=1) == edp.edp_sweep(0.5, 2, 40, seed=9, threads=4)


@settings(max_examples=10)
@given(seeds)
def test_degree_mixture_fidelity_spot_check(seed):
    rng = np.random.default_rng(seed)
    n = 2
    ua, ub = edp.haar_unitary(rng, 2 ** n), edp.haar_unitary(rng, 2 ** n)
    for r in range(n + 1):
        assert edp.fplus_degree_margin(n, r, ua, ub) >= -1e-9


# --- block diagonalisation -------------------------------------------------------------------

def test_blockdiag_examples():
    p0 = np.diag([1.0, 0.0])
    i2 = np.eye(2)
    assert blockdiag.block_diagonalize(p0, i2 - p0, p0, i2 - p0).sizes == [1, 1]
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    q0 = h @ p0 @ h
    dec = blockdiag.block_diagonalize(p0, i2 - p0, q0, i2 - q0)
    assert dec.sizes == [2]


def test_blockdiag_rejects_bad_input():
    with pytest.raises(NotProjector):
        blockdiag.block_diagonalize(np.diag([1, 0.5]), np.diag([0, 0.5]), np.eye(2), np.zeros((2, 2)))
    with pytest.raises(NotComplementary):
        blockdiag.block_diagonalize(np.diag([1, 0]), np.diag([1, 0]), np.eye(2), np.zeros((2, 2)))


@given(seeds, st.sampled_from([2, 4, 8]), st.data())
def test_blockdiag_property(seed, d, data):
    rng = np.random.default_rng(seed)
    rp = data.draw(st.integers(0, d))
    rq = data.draw(st.integers(0, d))
    p = blockdiag.random_projector_pair(rng, d, rp)
    q = blockdiag.random_projector_pair(rng, d, rq)
    dec = blockdiag.block_diagonalize(*p, *q, rng_seed=seed)
    assert set(dec.sizes) <= {1, 2} and sum(dec.sizes) == d
    assert dec.unitarity_error() <= 1e-10
    assert max(dec.off_block_mass(m) for m in (*p, *q)) <= 1e-10
