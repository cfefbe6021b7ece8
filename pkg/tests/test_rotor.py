import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sympy import sqrt as ssqrt
from sympy.physics.wigner import wigner_3j

from stql.params import BUILTIN_MOLECULES
from stql.rotor import (
    RotorState,
    cosine_element,
    exact_stark_levels,
    first_order_moment,
    rotational_energy,
    second_order_moment_m0,
    stark_energy_first_order,
    stark_map,
)

MOL = BUILTIN_MOLECULES["CH3CN"]


def _cos_3j(J1, J2, K, M):
    """<J1 K M|cos|J2 K M> from Wigner 3j symbols (independent of the closed forms)."""
    v = (-1) ** (M - K) * ssqrt((2 * J1 + 1) * (2 * J2 + 1)) * wigner_3j(J1, 1, J2, -M, 0, M) * wigner_3j(J1, 1, J2, -K, 0, K)
    return float(v)


@pytest.mark.parametrize("J", range(1, 5))
def test_cosine_elements_match_3j(J):
    for K in range(-J, J + 1):
        for M in range(-J, J + 1):
            a = RotorState(J, K, M)
            assert cosine_element(a, a) == pytest.approx(_cos_3j(J, J, K, M), abs=1e-14)
            if abs(K) <= J + 1:
                b = RotorState(J + 1, K, M)
                # off-diagonal phase depends on convention
                assert abs(cosine_element(a, b)) == pytest.approx(abs(_cos_3j(J, J + 1, K, M)), abs=1e-14)


def test_qubit_cosines():
    assert cosine_element(RotorState(1, 1, -1), RotorState(1, 1, -1)) == pytest.approx(-0.5)
    assert cosine_element(RotorState(2, 1, -1), RotorState(2, 1, -1)) == pytest.approx(-1 / 6)
    assert cosine_element(RotorState(1, 1, -1), RotorState(2, 1, -1)) == pytest.approx(math.sqrt(15) / 10)
    assert cosine_element(RotorState(1, 1, 1), RotorState(1, 1, -1)) == 0.0


@given(J=st.integers(1, 8), data=st.data())
def test_cosine_sum_rule(J, data):
    K = data.draw(st.integers(-J, J))
    M = data.draw(st.integers(-J, J))
    s = RotorState(J, K, M)
    # sum over J' of |<J|cos|J'>|^2 equals <cos^2>, which is between 0 and 1
    total = sum(cosine_element(s, RotorState(Jp, K, M)) ** 2 for Jp in range(max(abs(K), abs(M), J - 1), J + 2))
    assert 0 <= total <= 1 + 1e-12
    assert cosine_element(s, s) == pytest.approx(M * K / (J * (J + 1)))


def test_rotor_state_validation():
    with pytest.raises(ValueError):
        RotorState(1, 2, 0)
    with pytest.raises(ValueError):
        stark_energy_first_order(RotorState(0, 0, 0), 1.0)


def test_rotational_and_first_order():
    s = RotorState(1, 1, -1)
    assert rotational_energy(s, MOL) == pytest.approx(MOL.B * 2 + MOL.A - MOL.B)
    assert stark_energy_first_order(s, 100.0) == pytest.approx(50.0)
    assert stark_energy_first_order(RotorState(2, 1, -1), 60.0) == pytest.approx(10.0)


@given(st.floats(1, 5000))
@settings(max_examples=15, deadline=None)
def test_exact_moment_hellmann_feynman(eps):
    for M in (-1, 0, 1):
        lv = exact_stark_levels(MOL, eps, 1, M)[0]
        assert lv.mu_eff == pytest.approx(lv.mu_eff_fd, rel=1e-6, abs=1e-8)


def test_exact_moments_frozen():
    assert exact_stark_levels(MOL, 500.0, 1, 1)[0].mu_eff == pytest.approx(1.99111, rel=1e-5)
    assert first_order_moment(MOL, 500.0) == pytest.approx(1.95958, rel=1e-5)
    assert first_order_moment(MOL, 1000.0) == pytest.approx(1.95831, rel=1e-5)
    assert exact_stark_levels(MOL, 1000.0, 1, 0)[0].mu_eff == pytest.approx(0.084041, rel=1e-4)


@pytest.mark.parametrize("eps", [50.0, 200.0, 500.0])
def test_m0_moment_matches_perturbation_theory(eps):
    exact = exact_stark_levels(MOL, eps, 1, 0)[0].mu_eff
    pt = second_order_moment_m0(MOL, eps)
    # next correction is third order in x
    assert exact == pytest.approx(pt, rel=5e-3 * eps / 500)


def test_weak_field_first_order_limit():
    # linear Stark slope: mu M K / J(J+1) = mu / 2
    assert first_order_moment(MOL, 1.0) == pytest.approx(MOL.mu / 2, rel=1e-6)


def test_jmax_validation():
    with pytest.raises(ValueError):
        exact_stark_levels(MOL, 100.0, 1, 1, Jmax=2)
    with pytest.raises(ValueError):
        exact_stark_levels(MOL, -1.0, 1, 1)


def test_stark_map_rows():
    grid = np.linspace(0, 1, 11)
    rows = stark_map(MOL, 1, [1, 2], grid)
    assert len(rows) == len(grid) * (3 + 5)
    hfs = [r for r in rows if r["J"] == 1 and r["M"] == -1]
    slope = (hfs[-1]["W_over_B"] - hfs[0]["W_over_B"]) / (hfs[-1]["x"] - hfs[0]["x"])
    assert slope == pytest.approx(0.5)
    with pytest.raises(ValueError):
        stark_map(MOL, 1, [1], [])
