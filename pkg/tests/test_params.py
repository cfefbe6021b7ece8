import math

import pytest
from hypothesis import given, strategies as st

from stql import params
from stql.params import (
    BUILTIN_MOLECULES,
    Conditions,
    FieldGeometry,
    MoleculeParams,
    ReducedVars,
    RegistryConflictError,
    RegistryError,
    dipole_dipole_strength,
    field_for_delta_x,
    format_registry,
    get_molecule,
    load_molecule_registry,
    parse_registry,
    reduced_vars,
    stark_frequency,
)


def test_conversion_constants():
    # 1 D = 3.33564e-30 C m; h = 6.62607015e-34 J s
    assert params.STARK_MHZ_PER_DEBYE_V_CM == pytest.approx(3.33564095e-30 * 100 / 6.62607015e-34 / 1e6, rel=1e-8)
    assert params.STARK_MHZ_PER_DEBYE_V_CM == pytest.approx(0.503412, rel=1e-6)
    assert params.DIPOLE_HZ_PER_DEBYE2_UM3 == pytest.approx(150.919, rel=1e-5)


def test_ch3cn_reduced_values(rv):
    assert rv.x == pytest.approx(0.107262561, rel=1e-8)
    assert rv.delta_x == pytest.approx(1e-3, rel=1e-9)
    assert rv.y == pytest.approx(2.01685611e-6, rel=1e-8)
    assert rv.z == pytest.approx(-4.22 / 9198.8, rel=1e-12)
    assert rv.w == pytest.approx(4.27694e-3, rel=1e-5)
    assert rv.w_prime == pytest.approx(rv.w * rv.x / rv.x_prime, rel=1e-12)


def test_magic_angle_cancels_coupling():
    assert dipole_dipole_strength(3.92, 0.5, params.MAGIC_ANGLE_DEG) == pytest.approx(0.0, abs=1e-12)
    assert dipole_dipole_strength(3.92, 0.5, 0.0) == pytest.approx(-2 * dipole_dipole_strength(3.92, 0.5, 90.0))


@given(
    mu=st.floats(0.01, 10),
    r=st.floats(0.05, 5),
    k=st.floats(0.1, 10),
)
def test_coupling_homogeneity(mu, r, k):
    base = dipole_dipole_strength(mu, r)
    assert dipole_dipole_strength(k * mu, r) == pytest.approx(k**2 * base, rel=1e-12)
    assert dipole_dipole_strength(mu, k * r) == pytest.approx(base / k**3, rel=1e-12)
    assert stark_frequency(k * mu, 100.0) == pytest.approx(k * stark_frequency(mu, 100.0), rel=1e-12)


@given(dx=st.floats(1e-6, 1e-1))
def test_field_for_delta_x_inverts(dx):
    mol = BUILTIN_MOLECULES["CH3CN"]
    g = FieldGeometry(500.0, 500.0 + field_for_delta_x(mol, dx))
    assert reduced_vars(mol, g).delta_x == pytest.approx(dx, rel=1e-9)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        stark_frequency(-1.0, 10)
    with pytest.raises(ValueError):
        stark_frequency(1.0, -10)
    with pytest.raises(ValueError):
        dipole_dipole_strength(1.0, 0.0)
    with pytest.raises(ValueError):
        FieldGeometry(1, 1, alpha=200)
    with pytest.raises(ValueError):
        MoleculeParams("X", mu=1, A=1, B=0)
    with pytest.raises(ValueError):
        MoleculeParams("bad name", mu=1, A=1, B=1)
    with pytest.raises(ValueError):
        MoleculeParams("X", mu=1, A=1, B=1, spin_I=0.3)
    with pytest.raises(ValueError):
        ReducedVars(x=0.0, x_prime=0.0, z=1e-3)
    with pytest.raises(ValueError):
        reduced_vars(BUILTIN_MOLECULES["CH3CN"], FieldGeometry(0.0, 1.0))


def test_with_delta_x_tracks_w():
    rv = ReducedVars(x=0.1, x_prime=0.1, z=-1e-3)
    moved = rv.with_delta_x(0.01)
    assert moved.x_prime == pytest.approx(0.11)
    assert moved.w_prime == pytest.approx(1e-3 / 0.11)
    assert moved.w == rv.w


def test_conditions_delta_x_default(defaults):
    assert defaults.reduced.delta_x == pytest.approx(1e-3, rel=1e-9)
    explicit = Conditions(deps=10.0)
    assert explicit.geometry.eps_prime == 510.0


_names = st.text(alphabet="ABCDEFGHXYZ0123456789", min_size=1, max_size=8)
_pos = st.floats(1e-3, 1e6, allow_nan=False)


@given(
    st.lists(
        st.tuples(_names, _pos, _pos, _pos, st.floats(-100, 100), st.sampled_from([0.0, 0.5, 1.0, 1.5, 2.0])),
        min_size=1,
        max_size=5,
        unique_by=lambda t: t[0],
    )
)
def test_registry_round_trip(entries):
    mols = [MoleculeParams(n, mu=m, A=a, B=b, eqQ=q, spin_I=i) for n, m, a, b, q, i in entries]
    assert parse_registry(format_registry(mols)) == mols


def test_registry_errors_name_the_line():
    with pytest.raises(RegistryError, match=r"^f\.txt:2:"):
        parse_registry("name = X\nmu_debye = abc\n", "f.txt")
    with pytest.raises(RegistryError, match="unknown key"):
        parse_registry("name = X\ncolour = 3\n")
    with pytest.raises(RegistryError, match="before any 'name'"):
        parse_registry("mu_debye = 1\n")
    with pytest.raises(RegistryError, match="missing"):
        parse_registry("name = X\nmu_debye = 1\n")
    with pytest.raises(RegistryConflictError):
        parse_registry("name = X\nmu_debye=1\nA_MHz=1\nB_MHz=1\nname = X\nmu_debye=1\nA_MHz=1\nB_MHz=1\n")


def test_registry_file_and_env(tmp_path, monkeypatch):
    f = tmp_path / "mols.txt"
    f.write_text("# extra\nname = CH3F\nmu_debye = 1.85\nA_MHz = 155000\nB_MHz = 25536\neqQ_MHz = 0\n")
    assert get_molecule("ch3f", f).B == 25536
    monkeypatch.setenv(params.REGISTRY_ENV, str(f))
    assert "CH3F" in [m.name for m in load_molecule_registry()]
    clash = tmp_path / "clash.txt"
    clash.write_text("name = CH3CN\nmu_debye = 1\nA_MHz = 1\nB_MHz = 1\n")
    with pytest.raises(RegistryConflictError):
        load_molecule_registry(clash)
    with pytest.raises(KeyError):
        get_molecule("nope")


def test_builtin_molecules_are_valid():
    for m in BUILTIN_MOLECULES.values():
        assert m.mu > 0 and m.B > 0 and math.isfinite(m.eqQ)
