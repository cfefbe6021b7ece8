"""Acceptance criteria 1-13, one test each.

Criteria 3, 6 (type I) and 7 (type I) do not hold for the model as built and
are left failing on purpose; see README "Known deviations".
"""

import math
import warnings

import numpy as np
import pytest
from scipy.stats import qmc

from stql import entangle, hyperfine, pair, pulses
from stql.params import ReducedVars, dipole_dipole_strength, stark_frequency
from stql.rotor import exact_stark_levels, first_order_moment
from stql.verify import appendix_b_checks, k_law_checks, mixing_checks, table1_checks


def _report(checks):
    return "\n".join(f"{c.name}: ref {c.reference:.6g} got {c.value:.6g} dev {c.deviation:.3g} tol {c.tolerance:g}" for c in checks)


def test_01_analytic_cosine_elements():
    c1 = hyperfine.dressed_cosines("I", 0.0)
    c2 = hyperfine.dressed_cosines("II", 0.0)
    assert c1.as_tuple() == pytest.approx((-0.5, -1 / 6, math.sqrt(15) / 10), abs=1e-12)
    assert c2.as_tuple() == pytest.approx((0.5, -0.5, 0.0), abs=1e-12)


def test_02_quadrupole_energies():
    eqQ = -4.22
    # qubit states carry (M_J, M_I) = (-1, +1) or (+1, -1)
    for mj, mi in ((-1, 1), (1, -1)):
        assert hyperfine.quad_diagonal_energy(1, 1, 1, mj, mi, eqQ) == pytest.approx(eqQ / 40, abs=1e-12)
        assert hyperfine.quad_diagonal_energy(2, 1, 1, mj, mi, eqQ) == pytest.approx(eqQ / 56, abs=1e-12)
    assert hyperfine.quad_prefactor(1, 1, 1, eqQ) == pytest.approx(eqQ / 40, abs=1e-12)
    assert hyperfine.quad_prefactor(2, 1, 1, eqQ) == pytest.approx(-eqQ / 168, abs=1e-12)


def test_03_mixing_slopes():
    # fidelities pass; the fitted slopes land at 0.1500 and 0.1855 (see README)
    checks = mixing_checks()
    assert all(c.passed for c in checks), _report(checks)


def test_04_table1_refit():
    checks = table1_checks()
    assert len(checks) == 12
    for c in checks:
        if c.name.endswith("c1"):
            assert c.note.startswith("residual")
    assert all(c.passed for c in checks), _report(checks)


def test_05_ch3cn_numbers(ch3cn, rv):
    assert stark_frequency(ch3cn.mu, 500.0) == pytest.approx(988.0, rel=3e-3)
    assert dipole_dipole_strength(ch3cn.mu, 0.5, 90.0) == pytest.approx(18.5, rel=5e-3)
    assert rv.w == pytest.approx(4.3e-3, rel=2e-2)


@pytest.mark.parametrize("kind,factor,splitting", [("I", 1 / 9, 3.07), ("II", 1.0, 9.20)])
def test_06_frequencies(ch3cn, defaults, rv, kind, factor, splitting):
    h = pair.build_pair_hamiltonian(kind, ch3cn, defaults.geometry)
    f = pair.eigen_frequencies(pair.diagonalize_pair(h))
    c1, c2 = h.cos1, h.cos2
    expected = pair.delta_omega(c1, c2, rv.y)  # Omega_a (C1 - C0)(C1' - C0')
    assert expected == pytest.approx(factor * rv.y, rel=1e-2)
    assert pair.site_splitting(pair.TransitionReport(kind, f, {})) * ch3cn.B == pytest.approx(splitting, rel=1e-2)
    # explicit relative check: approx's default abs=1e-12 would swamp a 2e-7 quantity
    assert abs(f["delta_omega"] / expected - 1) <= 1e-9


def _halton_grid(n=100):
    pts = qmc.Halton(d=4, scramble=False).random(n + 1)[1:]
    return [
        ReducedVars(x=0.05 + 0.9 * a, x_prime=0.05 + 0.9 * a + 10 ** (-4 + 2 * b), y=10 ** (-8 + 3 * c), z=-5e-3 + 1e-2 * d)
        for a, b, c, d in pts
    ]


@pytest.mark.parametrize("kind", ["I", "II"])
def test_07_eigenvalue_formulas(kind):
    bad = []
    for rv in _halton_grid():
        es = pair.diagonalize_pair(pair.build_pair_hamiltonian_reduced(kind, rv))
        tol = max(1e-9, 10 * rv.y**2)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", pair.OutOfRegimeWarning)
            err = max(abs(es.energies[i - 1] - pair.eigenvalue_formula(kind, rv, i)) for i in range(1, 5))
        if err > tol:
            bad.append((rv.x, rv.delta_x, rv.y, rv.z, err / tol))
    assert not bad, f"{len(bad)}/100 points exceed tolerance, worst {max(b[-1] for b in bad):.3g}x"


def test_08_concurrence_law():
    worst = 0.0
    for x in np.linspace(0, 1, 11):
        for y in np.geomspace(1e-8, 1e-5, 7):
            rv = ReducedVars(x=float(x), x_prime=float(x) + 1e-3, y=float(y))
            c = entangle.eigenstate_concurrences("I", rv, use_quadrupole=False)
            K = entangle.k_law(rv.x, rv.x_prime)
            worst = max(worst, abs(c[0] / (K * y) - 1), abs(c[3] / (K * y) - 1))
    assert worst < 0.05
    checks = k_law_checks()
    assert all(c.passed for c in checks), _report(checks)


@pytest.mark.parametrize("kind", ["I", "II"])
def test_09_fig2(rv, kind):
    rows = entangle.fig2_scan(kind, rv, np.geomspace(1e-2, 1e2, 41))
    assert max(abs(r.c12_exact - r.c12_model) for r in rows) <= 1e-3
    assert rows[0].c12_exact >= 0.999
    assert rows[-1].c12_exact == pytest.approx(0.02, abs=1e-3)


def test_10_appendix_b_refits():
    checks = appendix_b_checks()
    assert {c.name.split(" (")[0] for c in checks} == {"type I c2", "type I d1", "type II b2", "type II d1"}
    assert all(c.passed for c in checks), _report(checks)


@pytest.mark.parametrize("kind", ["I", "II"])
def test_11_pulse_dynamics(ch3cn, rv, kind):
    assert pulses.bell_sequence(kind, rv, ch3cn.B).concurrence >= 0.999
    rep = pulses.precession_cnot(kind, rv, ch3cn.B)
    assert rep.free_time == pytest.approx(1 / (2 * rep.delta_omega_hz))
    assert rep.fidelity >= 0.999
    sim = pulses.PulseSimulator.create(kind, rv, ch3cn.B)
    sim.prepare_basis("00")
    steps = pulses.parse_sequence("pi2@w1,pi@w2,free@13us,pulse(area=1.3,phase=0.4)@w3,pi2@site1,pi@w4,free@2ms")
    for step in steps:
        before = sim.state.amplitudes
        if isinstance(step, pulses.PulseSpec):
            sim.pulse(step)
        else:
            sim.wait(step)
        assert abs(np.linalg.norm(sim.state.amplitudes) - np.linalg.norm(before)) <= 1e-12


def test_12_switchable_dipole(ch3cn):
    # M = +-1 moment: the M-odd part of the exact moment
    assert first_order_moment(ch3cn, 500.0) == pytest.approx(1.96, rel=5e-3)
    lv = exact_stark_levels(ch3cn, 500.0, 1, 1)[0]
    assert lv.mu_eff == pytest.approx(lv.mu_eff_fd, rel=1e-6)
    assert 500 <= pair.switchable_dipole_ratio(ch3cn, 1000.0) <= 560


def test_13_type1_omega1_formula_consistency(ch3cn, rv):
    # the quoted 35,869 MHz is excluded; the exact line has to match the closed form
    rep = pair.transition_frequencies("I", rv)
    w1 = rep.exact["w1"] * ch3cn.B
    assert w1 == pytest.approx(rep.closed_form["w1"] * ch3cn.B, rel=1e-7)
    assert w1 == pytest.approx(ch3cn.B * (4 - rv.x_prime / 3), rel=1e-5)
