"""The acceptance checks, shared by ``nlbox verify all`` and the test suite.

Every check is deterministic given the seed; reports carry no timings so
runs at different thread counts can be compared byte for byte.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb

import numpy as np

from . import bounds
from .box import TSIRELSON_Q, chsh, correlations, is_isotropic, isotropic_box
from .quantum import blockdiag, edp, entanglement, measurement, states
from .search import SearchSpace, search_max_nl

DEFAULT_SEED = 0x5EED


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:>2} {self.title}: {self.detail}"


def _e(x: float) -> str:
    return f"{x:.3e}"


def check_gap(seed=DEFAULT_SEED, threads=1) -> CriterionResult:
    g_lo = bounds.gap(bounds.BELL_Q).g
    g_hi = bounds.gap(TSIRELSON_Q).g
    q_star = bounds.max_gap_location()
    g_star = bounds.gap(q_star).g
    ok = abs(g_lo) <= 1e-12 and abs(g_hi) <= 1e-12 and abs(g_star - 0.0225) <= 5e-4
    return CriterionResult(1, "gap endpoints and maximum", ok,
                           f"g(3/4)={_e(g_lo)} g(tsirelson)={_e(g_hi)} g(q*={q_star:.6f})={g_star:.6f}")


def check_omega_grid(seed=DEFAULT_SEED, threads=1) -> CriterionResult:
    nl_err = f_err = opt_err = 0.0
    for a in np.linspace(0, 1, 101):
        m = states.omega(float(a)).matrix
        nl_err = max(nl_err, abs(entanglement.nl_state(m) - 2 * math.sqrt(1 + a * a)))
        f = entanglement.fef_closed_form(m)
        f_err = max(f_err, abs(f - (1 + a) / 2))
        opt_err = max(opt_err, abs(f - entanglement.fef_numeric(m, starts=32, seed=seed)))
    ok = nl_err <= 1e-9 and f_err <= 1e-9 and opt_err <= 1e-6
    return CriterionResult(2, "Omega_alpha NL and F on 101-point grid", ok,
                           f"max|NL err|={_e(nl_err)} max|F err|={_e(f_err)} max|closed-optimiser|={_e(opt_err)}")


def check_simulation(seed=DEFAULT_SEED, threads=1) -> CriterionResult:
    q_err = c_err = 0.0
    iso = True
    for a in (0.0, 0.3, 0.6, 1.0):
        s = math.sqrt(1 + a * a)
        b = measurement.simulate_isotropic(a)
        iso &= is_isotropic(b)
        q_err = max(q_err, abs(chsh(b).q_equiv - (0.5 + s / 4)))
        raw = measurement.measure_box(states.omega(a).matrix, *measurement.canonical_measurements(a))
        want = np.array([1, 1, a * a, -a * a]) / s
        got = np.array(correlations(raw).as_array()).ravel()
        c_err = max(c_err, float(np.max(np.abs(got - want))))
    ok = iso and q_err <= 1e-9 and c_err <= 1e-9
    return CriterionResult(3, "measured Omega_alpha gives isotropic box", ok,
                           f"isotropic={iso} max|q err|={_e(q_err)} max|pre-twirl E err|={_e(c_err)}")


def check_decomposition(seed=DEFAULT_SEED, threads=1) -> CriterionResult:
    err = 0.0
    counts_ok = True
    for n in (1, 2, 3):
        for a in (0.0, 0.3, 0.7, 1.0):
            terms = states.omega_power_decomposition(a, n)
            err = max(err, float(np.max(np.abs(states.reconstruct(terms) - states.omega_power(a, n)))))
            for r in range(n + 1):
                counts_ok &= sum(t.degree == r for t in terms) == comb(n, r) * 2 ** r
    ok = err <= 1e-12 and counts_ok
    return CriterionResult(4, "tensor-power decomposition", ok,
                           f"max entry err={_e(err)} degree counts ok={counts_ok}")


def _edp_summaries(seed, threads):
    return [edp.edp_sweep(a, 2, 1000, seed=seed, threads=threads) for a in (0.5, 0.8)]


def check_edp(seed=DEFAULT_SEED, threads=1) -> CriterionResult:
    sweeps = _edp_summaries(seed, threads)
    ok = all(s.violations == 0 and s.max_F <= s.bound + 1e-9 and abs(s.identity_F - s.bound) <= 1e-12
             for s in sweeps)
    detail = " ".join(f"alpha={s.alpha}: maxF={s.max_F:.6f}<=bound={s.bound} identity err={_e(abs(s.identity_F - s.bound))}"
                      for s in sweeps)
    return CriterionResult(5, "random EDPs respect (1+alpha)/2", ok, detail)


def check_ensembles(seed=DEFAULT_SEED, threads=1) -> CriterionResult:
    reps = [entanglement.lemma5_witness(a, 10_000, rng_seed=[seed, 6, i]) for i, a in enumerate((0.3, 0.7))]
    ok = all(r.violations == 0 and r.extremal_residual <= 1e-9 for r in reps)
    detail = " ".join(f"alpha={r.alpha}: violations={r.violations} min margin={_e(r.worst_margin)} "
                      f"extremal residual={_e(r.extremal_residual)}" for r in reps)
    return CriterionResult(6, "ensemble NL inequality", ok, detail)


def check_blockdiag(seed=DEFAULT_SEED, threads=1) -> CriterionResult:
    rng = np.random.default_rng([seed, 7])
    worst = 0.0
    sizes_ok = True
    total = 0
    for d in (2, 4, 8):
        for _ in range(200):
            p = blockdiag.random_projector_pair(rng, d, int(rng.integers(1, d)))
            q = blockdiag.random_projector_pair(rng, d, int(rng.integers(1, d)))
            dec = blockdiag.block_diagonalize(*p, *q, rng_seed=[seed, total])
            total += 1
            worst = max(worst, dec.unitarity_error(), *(dec.off_block_mass(m) for m in (*p, *q)))
            sizes_ok &= set(dec.sizes) <= {1, 2} and sum(dec.sizes) == d
    ok = worst <= 1e-10 and sizes_ok
    return CriterionResult(7, "projector pairs block-diagonalise", ok,
                           f"{total} pairs, max off-block mass={_e(worst)} sizes in {{1,2}}={sizes_ok}")


def _search_reports(threads):
    s = SearchSpace(2)
    return {q: search_max_nl(s, isotropic_box(q), threads=threads) for q in (0.75, 0.8, 0.85, 0.99)}


def check_search(seed=DEFAULT_SEED, threads=1) -> CriterionResult:
    reps = _search_reports(threads)
    ok = reps[0.75].best_q <= 0.75 + 1e-9
    for q in (0.8, 0.85):
        ok &= reps[q].best_q <= q + bounds.gap(q).g + 1e-9
    ok &= reps[0.99].best_q < 1
    detail = " ".join(f"q={q}: best={r.best_q:.12f}" for q, r in reps.items())
    return CriterionResult(8, "n=2 exhaustive search vs known limits", ok, detail)


def check_dominance(seed=DEFAULT_SEED, threads=1) -> CriterionResult:
    rng = np.random.default_rng([seed, 9])
    worst = -np.inf
    for _ in range(10_000):
        r = states.random_two_qubit_state(rng)
        worst = max(worst, entanglement.nl_state(r) - entanglement.nl_upper_from_F(entanglement.fef_closed_form(r)))
    ok = worst <= 1e-6
    return CriterionResult(9, "NL below the F-curve for random states", ok, f"max excess={_e(worst)}")


def check_determinism(seed=DEFAULT_SEED, threads=1) -> CriterionResult:
    """The two fan-out computations at 1 and 8 threads must agree exactly;
    the byte-level comparison of whole reports lives in the test suite."""
    same_edp = _edp_summaries(seed, 1) == _edp_summaries(seed, 8)
    r1, r8 = _search_reports(1), _search_reports(8)
    same_search = all((r1[q].best_nl, r1[q].best_protocol) == (r8[q].best_nl, r8[q].best_protocol) for q in r1)
    return CriterionResult(10, "thread-count independence", same_edp and same_search,
                           f"edp sweeps identical={same_edp} searches identical={same_search}")


CHECKS = (check_gap, check_omega_grid, check_simulation, check_decomposition, check_edp,
          check_ensembles, check_blockdiag, check_search, check_dominance, check_determinism)


def run_all(seed=DEFAULT_SEED, threads=1, only=None) -> list:
    out = []
    for fn in CHECKS:
        if only is None or CHECKS.index(fn) + 1 in only:
            out.append(fn(seed=seed, threads=threads))
    return out


def format_report(results, seed=DEFAULT_SEED) -> str:
    lines = [f"nlbox acceptance report (seed {seed:#x})"]
    lines += [r.line() for r in results]
    n_ok = sum(r.passed for r in results)
    lines.append(f"{n_ok}/{len(results)} criteria passed")
    return "\n".join(lines) + "\n"
