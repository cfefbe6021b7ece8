import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stql import entangle
from stql.params import ReducedVars


def test_concurrence_reference_states():
    s = 1 / math.sqrt(2)
    assert entangle.concurrence_pure([s, 0, 0, s]) == pytest.approx(1.0)
    assert entangle.concurrence_pure([0, s, -s, 0]) == pytest.approx(1.0)
    assert entangle.concurrence_pure([1, 0, 0, 0]) == 0.0
    assert entangle.concurrence_pure([0.5, 0.5, 0.5, 0.5]) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        entangle.concurrence_pure([1, 1, 0, 0])


_unit = st.floats(-1, 1, allow_nan=False)


@given(st.lists(st.tuples(_unit, _unit), min_size=4, max_size=4).filter(lambda v: sum(a * a + b * b for a, b in v) > 1e-3))
def test_concurrence_bounds_and_local_invariance(raw):
    psi = np.array([complex(a, b) for a, b in raw])
    psi /= np.linalg.norm(psi)
    c = entangle.concurrence_pure(psi)
    assert 0 <= c <= 1
    # a local unitary on site 2 leaves the concurrence unchanged
    u = np.array([[np.cos(0.3), -np.sin(0.3)], [np.sin(0.3), np.cos(0.3)]]) * np.exp(0.7j)
    rotated = np.kron(np.eye(2), u) @ psi
    assert entangle.concurrence_pure(rotated) == pytest.approx(c, abs=1e-12)


@given(st.floats(-1, 1).filter(lambda v: abs(v) > 1e-9), st.floats(-10, 10))
def test_two_level_roots(delta, gap):
    r = entangle.two_level_concurrence(0.0, gap, delta)
    assert r.alpha_plus * r.alpha_minus == pytest.approx(-1.0, rel=1e-12)
    assert r.c12 == pytest.approx(abs(2 * delta) / math.hypot(gap, 2 * delta), rel=1e-12)
    assert sum(v * v for v in r.psi_plus) == pytest.approx(1.0)


def test_two_level_limits():
    assert entangle.two_level_concurrence(0.0, 0.0, 1e-6).c12 == pytest.approx(1.0)
    far = entangle.two_level_concurrence(0.0, 100.0, 1.0)
    assert far.c12 == pytest.approx(0.02, rel=1e-3)
    assert entangle.two_level_concurrence(0.0, 1.0, 0.0).degenerate


def test_k_law():
    assert entangle.k_law(0.0) == entangle.K_LAW[0]
    assert entangle.k_law(0.5, 0.5) == pytest.approx(entangle.k_law(0.5))
    with pytest.warns(UserWarning):
        entangle.k_law(0.1, 0.2)
    coef, resid = entangle.fit_k_law()
    assert coef == pytest.approx([0.037501, 0.0031105, 0.00029641], rel=1e-3)
    assert resid < 1e-5  # vs K ~ 0.0375


def test_eigenstate_concurrence_frozen():
    rv = ReducedVars(x=0.107262561, x_prime=0.108262561, y=2.01685611e-6)
    c = entangle.eigenstate_concurrences("I", rv, use_quadrupole=False)
    assert c[0] == pytest.approx(7.6317e-8, rel=1e-3)
    assert c[0] == pytest.approx(entangle.k_law(rv.x, rv.x_prime) * rv.y, rel=1e-3)


def test_fig2_scan_rows(rv):
    rows = entangle.fig2_scan("II", rv, [0.01, 1.0, 100.0])
    assert [r.ratio for r in rows] == pytest.approx([0.01, 1.0, 100.0], rel=1e-3)
    assert rows[1].c12_model == pytest.approx(2 / math.hypot(rows[1].ratio, 2), rel=1e-9)
    assert all(0 < r.delta_x <= 0.1 for r in rows)
    with pytest.raises(ValueError):
        entangle.fig2_scan("II", rv, [0.0])
    with pytest.raises(ValueError):
        entangle.fig2_scan("I", rv, [1e6])


def test_appendix_b_frozen():
    fits = {(k, f.name): f for k in ("I", "II") for f in entangle.refit_appendixB(k)}
    assert fits["I", "c2"].fitted == pytest.approx(-0.45, rel=1e-3)
    assert fits["I", "d1"].fitted == pytest.approx(-0.018753, rel=1e-3)
    assert fits["II", "b2"].fitted == pytest.approx(-0.02248, rel=2e-3)
    assert fits["II", "d1"].fitted == pytest.approx(0.011248, rel=2e-3)
    assert fits["II", "d1"].magnitude_error == pytest.approx(0.011248 / 0.0118 - 1, abs=2e-3)


def test_appendix_b_grid_validation():
    rv = ReducedVars(x=0.1, x_prime=0.101, y=1e-7)
    with pytest.raises(ValueError):
        entangle.refit_appendixB("I", [rv, rv, rv])
    with pytest.raises(ValueError):
        entangle.refit_appendixB("I", [rv])


def test_linear_in_x():
    k0, k1 = entangle.fit_linear_in_x("I", "c2", delta_x=1e-3)
    assert abs(k1) < abs(k0)
