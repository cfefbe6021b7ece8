"""Molecule constants, unit conversions and the dimensionless knobs x, y, z, w.

Every energy in the package is a frequency E/h in MHz unless a function says
it works in units of the rotational constant B.
"""

from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from scipy import constants as sc

DEBYE = 1e-21 / sc.c  # C m

# mu * eps / h for 1 D in 1 V/cm, in MHz (0.503412)
STARK_MHZ_PER_DEBYE_V_CM = DEBYE * 100.0 / sc.h / 1e6

# mu^2 / (4 pi eps0 r^3 h) for 1 D at 1 um, in Hz (150.92)
DIPOLE_HZ_PER_DEBYE2_UM3 = DEBYE**2 / (4 * math.pi * sc.epsilon_0 * 1e-18) / sc.h

MAGIC_ANGLE_DEG = math.degrees(math.acos(1 / math.sqrt(3)))

REGISTRY_ENV = "STQL_MOLECULES"
REGISTRY_KEYS = ("name", "mu_debye", "A_MHz", "B_MHz", "eqQ_MHz", "spin_I")


class RegistryError(ValueError):
    """Malformed molecule registry file."""

    def __init__(self, message: str, path: str | os.PathLike | None = None, line: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
        self.path = path
        self.line = line


class RegistryConflictError(RegistryError):
    """Two registry entries share a name."""


def _check_finite(**values: float) -> None:
    for key, v in values.items():
        if not math.isfinite(v):
            raise ValueError(f"{key} must be finite, got {v!r}")


@dataclass(frozen=True)
class MoleculeParams:
    """Body-frame constants of one polar symmetric top."""

    name: str
    mu: float  # Debye
    A: float  # MHz, symmetry-axis rotational constant
    B: float  # MHz
    eqQ: float = 0.0  # MHz
    spin_I: float = 1.0

    def __post_init__(self) -> None:
        _check_finite(mu=self.mu, A=self.A, B=self.B, eqQ=self.eqQ, spin_I=self.spin_I)
        if not self.name or any(ch.isspace() for ch in self.name):
            raise ValueError(f"molecule name must be a non-empty token, got {self.name!r}")
        if self.mu <= 0:
            raise ValueError(f"mu must be > 0, got {self.mu}")
        if self.A <= 0 or self.B <= 0:
            raise ValueError(f"rotational constants must be > 0, got A={self.A}, B={self.B}")
        if self.spin_I < 0 or (2 * self.spin_I) != int(2 * self.spin_I):
            raise ValueError(f"spin_I must be a non-negative half-integer, got {self.spin_I}")


@dataclass(frozen=True)
class FieldGeometry:
    """Field strengths at the two sites, their spacing and orientation."""

    eps: float  # V/cm at site 1
    eps_prime: float  # V/cm at site 2
    r12: float = 0.5  # um
    alpha: float = 90.0  # deg between r12 and the field

    def __post_init__(self) -> None:
        _check_finite(eps=self.eps, eps_prime=self.eps_prime, r12=self.r12, alpha=self.alpha)
        if self.eps < 0 or self.eps_prime < 0:
            raise ValueError("field strengths must be >= 0")
        if self.r12 <= 0:
            raise ValueError(f"r12 must be > 0, got {self.r12}")
        if not 0 <= self.alpha <= 180:
            raise ValueError(f"alpha must lie in [0, 180] deg, got {self.alpha}")


@dataclass(frozen=True)
class ReducedVars:
    """Dimensionless variables: x = mu eps/B, y = Omega_alpha/B, z = eqQ/B, w = |eqQ|/mu eps.

    ``w_prime`` is the site-2 value |eqQ|/mu eps'. When ``w`` or ``w_prime`` are
    left as None they are derived from z and x (w = |z|/x).
    """

    x: float
    x_prime: float
    y: float = 0.0
    z: float = 0.0
    w: float | None = None
    w_prime: float | None = None

    def __post_init__(self) -> None:
        _check_finite(x=self.x, x_prime=self.x_prime, y=self.y, z=self.z)
        if self.w is None:
            object.__setattr__(self, "w", _ratio_w(self.z, self.x))
        if self.w_prime is None:
            object.__setattr__(self, "w_prime", _ratio_w(self.z, self.x_prime))
        if self.w < 0 or self.w_prime < 0:
            raise ValueError("w must be >= 0")

    @property
    def delta_x(self) -> float:
        return self.x_prime - self.x

    def with_delta_x(self, delta_x: float) -> ReducedVars:
        """Same site-1 conditions, site 2 moved to x + delta_x (w' follows z)."""
        x_prime = self.x + delta_x
        if self.z == 0:
            return replace(self, x_prime=x_prime, w_prime=self.w)
        return replace(self, x_prime=x_prime, w_prime=_ratio_w(self.z, x_prime))


def _ratio_w(z: float, x: float) -> float:
    if z == 0:
        return 0.0
    if x == 0:
        raise ValueError("w = |eqQ|/(mu eps) is undefined at zero field with eqQ != 0")
    return abs(z) / abs(x)


def stark_frequency(mu: float, eps: float) -> float:
    """Stark energy scale mu*eps/h in MHz for mu in Debye and eps in V/cm."""
    _check_finite(mu=mu, eps=eps)
    if mu <= 0:
        raise ValueError(f"mu must be > 0, got {mu}")
    if eps < 0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    return mu * eps * STARK_MHZ_PER_DEBYE_V_CM


def dipole_dipole_strength(mu: float, r12: float, alpha: float = 90.0) -> float:
    """Azimuthally averaged coupling Omega_alpha = mu^2 (1 - 3 cos^2 alpha)/r^3, in kHz.

    mu in Debye, r12 in micrometres, alpha in degrees.
    """
    _check_finite(mu=mu, r12=r12, alpha=alpha)
    if r12 <= 0:
        raise ValueError(f"r12 must be > 0, got {r12}")
    angular = 1.0 - 3.0 * math.cos(math.radians(alpha)) ** 2
    return mu**2 / r12**3 * angular * DIPOLE_HZ_PER_DEBYE2_UM3 / 1e3


def reduced_vars(mol: MoleculeParams, geom: FieldGeometry) -> ReducedVars:
    s1 = stark_frequency(mol.mu, geom.eps)
    s2 = stark_frequency(mol.mu, geom.eps_prime)
    omega = dipole_dipole_strength(mol.mu, geom.r12, geom.alpha) / 1e3  # MHz
    if mol.eqQ != 0 and (s1 == 0 or s2 == 0):
        raise ValueError("w = |eqQ|/(mu eps) is undefined at zero field with eqQ != 0")
    w = abs(mol.eqQ) / s1 if mol.eqQ else 0.0
    w_prime = abs(mol.eqQ) / s2 if mol.eqQ else 0.0
    return ReducedVars(
        x=s1 / mol.B,
        x_prime=s2 / mol.B,
        y=omega / mol.B,
        z=mol.eqQ / mol.B,
        w=w,
        w_prime=w_prime,
    )


def field_for_delta_x(mol: MoleculeParams, delta_x: float) -> float:
    """Field difference eps' - eps (V/cm) that produces the requested delta_x."""
    return delta_x * mol.B / (mol.mu * STARK_MHZ_PER_DEBYE_V_CM)


# eqQ values for every entry and mu, B for CH3CN are the reference inputs;
# the remaining mu, A, B are approximate literature values.
BUILTIN_MOLECULES: dict[str, MoleculeParams] = {
    m.name: m
    for m in (
        MoleculeParams("CH3CN", mu=3.92, A=158099.0, B=9198.8, eqQ=-4.22, spin_I=1),
        MoleculeParams("NH3", mu=1.4719, A=186726.0, B=298117.0, eqQ=-4.09, spin_I=1),
        MoleculeParams("NF3", mu=0.235, A=5828.0, B=10681.0, eqQ=7.07, spin_I=1),
        MoleculeParams("CH3D", mu=0.0057, A=157400.0, B=116320.0, eqQ=0.191, spin_I=1),
        MoleculeParams("CF3D", mu=1.65, A=5670.0, B=10240.0, eqQ=0.171, spin_I=1),
    )
}


def parse_registry(text: str, path: str | os.PathLike | None = None) -> list[MoleculeParams]:
    """Parse ``key = value`` records; each record starts with a ``name`` line."""
    records: list[tuple[int, dict[str, str]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise RegistryError(f"expected 'key = value', got {raw.strip()!r}", path, lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in REGISTRY_KEYS:
            raise RegistryError(f"unknown key {key!r}", path, lineno)
        if not value:
            raise RegistryError(f"empty value for {key!r}", path, lineno)
        if key == "name":
            records.append((lineno, {"name": value}))
            continue
        if not records:
            raise RegistryError(f"{key!r} before any 'name' line", path, lineno)
        fields = records[-1][1]
        if key in fields:
            raise RegistryError(f"repeated key {key!r} in record {fields['name']!r}", path, lineno)
        try:
            float(value)
        except ValueError:
            raise RegistryError(f"{key} is not a number: {value!r}", path, lineno) from None
        fields[key] = value

    out = []
    seen: dict[str, int] = {}
    for lineno, fields in records:
        name = fields["name"]
        if name in seen:
            raise RegistryConflictError(
                f"duplicate molecule {name!r} (first defined on line {seen[name]})", path, lineno
            )
        seen[name] = lineno
        missing = [k for k in ("mu_debye", "A_MHz", "B_MHz") if k not in fields]
        if missing:
            raise RegistryError(f"record {name!r} missing {', '.join(missing)}", path, lineno)
        try:
            out.append(
                MoleculeParams(
                    name=name,
                    mu=float(fields["mu_debye"]),
                    A=float(fields["A_MHz"]),
                    B=float(fields["B_MHz"]),
                    eqQ=float(fields.get("eqQ_MHz", 0.0)),
                    spin_I=float(fields.get("spin_I", 1.0)),
                )
            )
        except ValueError as exc:
            raise RegistryError(str(exc), path, lineno) from None
    return out


def format_registry(molecules: list[MoleculeParams]) -> str:
    """Inverse of :func:`parse_registry`; floats use repr so reloads are exact."""
    blocks = []
    for m in molecules:
        blocks.append(
            "\n".join(
                [
                    f"name = {m.name}",
                    f"mu_debye = {m.mu!r}",
                    f"A_MHz = {m.A!r}",
                    f"B_MHz = {m.B!r}",
                    f"eqQ_MHz = {m.eqQ!r}",
                    f"spin_I = {m.spin_I!r}",
                ]
            )
        )
    return "\n\n".join(blocks) + "\n"


def load_molecule_registry(path: str | os.PathLike | None = None) -> list[MoleculeParams]:
    """Built-in molecules merged with entries from ``path`` and ``$STQL_MOLECULES``."""
    merged = dict(BUILTIN_MOLECULES)
    sources = [p for p in (path, os.environ.get(REGISTRY_ENV)) if p]
    for src in sources:
        for mol in parse_registry(Path(src).read_text(encoding="utf-8"), src):
            if mol.name in merged:
                raise RegistryConflictError(f"molecule {mol.name!r} is already defined", src)
            merged[mol.name] = mol
    return list(merged.values())


def get_molecule(name: str, path: str | os.PathLike | None = None) -> MoleculeParams:
    for mol in load_molecule_registry(path):
        if mol.name.lower() == name.lower():
            return mol
    raise KeyError(f"unknown molecule {name!r}")


def molecule_record(mol: MoleculeParams) -> dict[str, float | str]:
    d = asdict(mol)
    return {
        "name": d["name"],
        "mu_debye": d["mu"],
        "A_MHz": d["A"],
        "B_MHz": d["B"],
        "eqQ_MHz": d["eqQ"],
        "spin_I": d["spin_I"],
    }


@dataclass(frozen=True)
class Conditions:
    """Molecule plus geometry; the defaults are the CH3CN reference conditions."""

    molecule: MoleculeParams = field(default_factory=lambda: BUILTIN_MOLECULES["CH3CN"])
    eps: float = 500.0
    delta_x: float | None = 1e-3
    deps: float | None = None
    r12: float = 0.5
    alpha: float = 90.0

    @property
    def geometry(self) -> FieldGeometry:
        if self.deps is not None:
            deps = self.deps
        elif self.delta_x is not None:
            deps = field_for_delta_x(self.molecule, self.delta_x)
        else:
            deps = 0.0
        return FieldGeometry(self.eps, self.eps + deps, self.r12, self.alpha)

    @property
    def reduced(self) -> ReducedVars:
        return reduced_vars(self.molecule, self.geometry)
