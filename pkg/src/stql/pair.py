"""Two coupled symmetric-top dipoles on the four-state basis |00>, |01>, |10>, |11>.

Energies here are in units of B with 2A removed, so the field-free type I
diagonal is (2, 6, 6, 10) and type II is (2, 2, 2, 2). The first label is
site 1 (field eps), the second is site 2 (field eps').
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from .hyperfine import CosineElements, dressed_cosines, normalize_type, quad_diagonal_energy
from .params import FieldGeometry, MoleculeParams, ReducedVars, reduced_vars
from .rotor import exact_stark_levels, first_order_moment

BASIS = ("00", "01", "10", "11")
_INDEX = {lab: i for i, lab in enumerate(BASIS)}


class OutOfRegimeWarning(UserWarning):
    pass


@dataclass(frozen=True)
class QubitEncoding:
    kind: str
    state0: tuple[int, int, int, int]  # (J, K, M_J, M_I)
    state1: tuple[int, int, int, int]

    def __post_init__(self) -> None:
        expected = _ENCODING_STATES.get(self.kind)
        if expected is None or (self.state0, self.state1) != expected:
            raise ValueError(f"unsupported qubit encoding {self.kind!r}: {self.state0}, {self.state1}")

    def states(self) -> tuple[tuple[int, int, int, int], tuple[int, int, int, int]]:
        return (self.state0, self.state1)


_ENCODING_STATES = {
    "I": ((1, 1, -1, 1), (2, 1, -1, 1)),
    "II": ((1, 1, 1, -1), (1, 1, -1, 1)),
}

# Eigenstate pairs (lower, upper) addressed by each transition, by dominant basis label
TRANSITIONS: dict[str, dict[str, tuple[str, str]]] = {
    "I": {"w1": ("00", "01"), "w2": ("01", "11"), "w3": ("00", "10"), "w4": ("10", "11")},
    "II": {"w1": ("00", "10"), "w2": ("10", "11"), "w3": ("00", "01"), "w4": ("01", "11")},
}

# Which basis label the second-lowest eigenstate carries when x' > x
_MIDDLE_LOW = {"I": "01", "II": "10"}


def encoding(kind: str | QubitEncoding) -> QubitEncoding:
    if isinstance(kind, QubitEncoding):
        return kind
    k = normalize_type(kind)
    return QubitEncoding(k, *_ENCODING_STATES[k])


def _site_field_energy(state: tuple[int, int, int, int], x: float, z: float, use_quadrupole: bool) -> float:
    """Stark (plus first-order quadrupole) energy of one molecule, units of B."""
    J, K, MJ, MI = state
    e = -x * MJ * K / (J * (J + 1))
    if use_quadrupole:
        e += quad_diagonal_energy(J, K, 1, MJ, MI, z)
    return e


def _rotational(state: tuple[int, int, int, int]) -> int:
    """(E_R - A)/B, an integer for K = 1."""
    J, K, _, _ = state
    return J * (J + 1) - K * K


def _pairs(a, b) -> np.ndarray:
    return np.array([a[i] + b[j] for i in (0, 1) for j in (0, 1)], dtype=float)


@dataclass(frozen=True)
class PairHamiltonian:
    """Diagonal site-energy sums plus the dipole-dipole block, in units of B.

    The diagonal is kept in two parts, the integer rotational energies and
    the small field-dependent site energies, so that transition frequencies
    and the delta-omega shift can be formed without cancellation.
    """

    encoding: QubitEncoding
    rot_sites: tuple[int, int]  # per qubit state, shared by both sites
    field1: tuple[float, float]  # site 1, qubit states 0 and 1
    field2: tuple[float, float]
    vdd: np.ndarray = field(repr=False)
    cos1: CosineElements
    cos2: CosineElements
    reduced: ReducedVars
    use_quadrupole: bool = True
    B: float | None = None  # MHz, for conversions
    A: float | None = None

    @property
    def rotational(self) -> np.ndarray:
        return _pairs(self.rot_sites, self.rot_sites)

    @property
    def field_diag(self) -> np.ndarray:
        return _pairs(self.field1, self.field2)

    @property
    def diag(self) -> np.ndarray:
        return self.rotational + self.field_diag

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.diag) + self.vdd

    def diag_difference(self, j: int) -> np.ndarray:
        """diag - diag[j] with the rotational integers subtracted exactly."""
        return (self.rotational - self.rotational[j]) + (self.field_diag - self.field_diag[j])


def coupling_matrix(y: float, c1: CosineElements, c2: CosineElements) -> np.ndarray:
    """y * (site-1 element) * (site-2 element) over the product basis."""
    m1 = np.array([[c1.C0, c1.CX], [c1.CX, c1.C1]])
    m2 = np.array([[c2.C0, c2.CX], [c2.CX, c2.C1]])
    return y * np.kron(m1, m2)


def build_pair_hamiltonian_reduced(
    enc: str | QubitEncoding,
    rv: ReducedVars,
    use_quadrupole: bool = True,
    B: float | None = None,
    A: float | None = None,
) -> PairHamiltonian:
    enc = encoding(enc)
    sign = -1.0 if rv.z < 0 else 1.0
    if use_quadrupole:
        c1 = dressed_cosines(enc.kind, rv.w, sign)
        c2 = dressed_cosines(enc.kind, rv.w_prime, sign)
    else:
        c1 = c2 = dressed_cosines(enc.kind, 0.0)
    s = enc.states()
    return PairHamiltonian(
        encoding=enc,
        rot_sites=(_rotational(s[0]), _rotational(s[1])),
        field1=tuple(_site_field_energy(st, rv.x, rv.z, use_quadrupole) for st in s),
        field2=tuple(_site_field_energy(st, rv.x_prime, rv.z, use_quadrupole) for st in s),
        vdd=coupling_matrix(rv.y, c1, c2),
        cos1=c1,
        cos2=c2,
        reduced=rv,
        use_quadrupole=use_quadrupole,
        B=B,
        A=A,
    )


def build_pair_hamiltonian(
    enc: str | QubitEncoding,
    mol: MoleculeParams,
    geom: FieldGeometry,
    use_quadrupole: bool = True,
) -> PairHamiltonian:
    return build_pair_hamiltonian_reduced(enc, reduced_vars(mol, geom), use_quadrupole, B=mol.B, A=mol.A)


@dataclass(frozen=True)
class PairEigensystem:
    energies: np.ndarray  # units of B, 2A removed
    coeffs: np.ndarray  # row k = (a_k, b_k, c_k, d_k)
    ordering_tag: str  # "by-energy" or "by-overlap"
    labels: tuple[str, str, str, str]  # dominant basis state of each eigenstate
    shifts: np.ndarray  # E_k - diag[label_k], formed without cancellation
    hamiltonian: PairHamiltonian = field(repr=False)

    def index_of(self, label: str) -> int:
        return self.labels.index(label)

    def energy_of(self, label: str) -> float:
        return float(self.energies[self.labels.index(label)])

    def shift_of(self, label: str) -> float:
        return float(self.shifts[self.labels.index(label)])

    def state_of(self, label: str) -> np.ndarray:
        return self.coeffs[self.labels.index(label)]

    def energies_mhz(self) -> np.ndarray:
        h = self.hamiltonian
        if h.B is None or h.A is None:
            raise ValueError("Hamiltonian was built without rotational constants")
        return 2 * h.A + h.B * self.energies


def diagonalize_pair(h: PairHamiltonian) -> PairEigensystem:
    """Exact 4x4 eigen decomposition; eigenvalues ascending.

    When the middle pair is closer than 1e-3 of the |01>-|10> coupling the two
    states are ordered by overlap instead (the |01>-like state second for
    type I, the |10>-like state second for type II).
    """
    # shift by the |00> diagonal so the solver sees O(1) or smaller numbers
    e, v = np.linalg.eigh(np.diag(h.diag_difference(0)) + h.vdd)
    vecs = v.T.copy()
    tag = "by-energy"
    if abs(e[2] - e[1]) < 1e-3 * abs(h.vdd[1, 2]):
        tag = "by-overlap"
        low = _INDEX[_MIDDLE_LOW[h.encoding.kind]]
        if vecs[2, low] ** 2 > vecs[1, low] ** 2:
            e[[1, 2]] = e[[2, 1]]
            vecs[[1, 2]] = vecs[[2, 1]]
    for k in range(4):
        big = np.argmax(np.abs(vecs[k]))
        if vecs[k, big] < 0:
            vecs[k] = -vecs[k]
    perm = max(permutations(range(4)), key=lambda p: sum(vecs[k, p[k]] ** 2 for k in range(4)))
    labels = tuple(BASIS[p] for p in perm)

    # Rayleigh quotients relative to each state's own diagonal entry: the
    # eigenvector error enters only at second order
    shifts = np.array([vecs[k] @ (h.diag_difference(perm[k]) * vecs[k]) + vecs[k] @ h.vdd @ vecs[k] for k in range(4)])
    return PairEigensystem(e + h.diag[0], vecs, tag, labels, shifts, h)


def in_pertinent_regime(rv: ReducedVars) -> bool:
    return rv.x < 1 and rv.x_prime < 1 and abs(rv.y) < 1e-5 and abs(rv.z) < 5e-3


def _warn_regime(rv: ReducedVars) -> bool:
    ok = in_pertinent_regime(rv)
    if not ok:
        warnings.warn(
            f"x={rv.x:g}, x'={rv.x_prime:g}, y={rv.y:g}, z={rv.z:g} outside x<1, |y|<1e-5, |z|<5e-3",
            OutOfRegimeWarning,
            stacklevel=3,
        )
    return ok


def eigenvalue_formula(enc: str | QubitEncoding, rv: ReducedVars, i: int) -> float:
    """Linear closed form for (E_i - 2A)/B, i = 1..4 in ascending order (x' > x)."""
    if i not in (1, 2, 3, 4):
        raise ValueError("i must be 1..4")
    _warn_regime(rv)
    x, xp, y, z = rv.x, rv.x_prime, rv.y, rv.z
    if encoding(enc).kind == "I":
        forms = (
            2 + x / 2 + xp / 2 + y / 4 + z / 20,
            6 + x / 2 + xp / 6 + y / 12 + 3 * z / 70,
            6 + xp / 2 + x / 6 + y / 12 + 3 * z / 70,
            10 + x / 6 + xp / 6 + y / 36 + z / 28,
        )
    else:
        forms = (
            2 - x / 2 - xp / 2 + y / 4 + z / 20,
            2 + x / 2 - xp / 2 - y / 4 + z / 20,
            2 + xp / 2 - x / 2 - y / 4 + z / 20,
            2 + x / 2 + xp / 2 + y / 4 + z / 20,
        )
    return forms[i - 1]


@dataclass(frozen=True)
class TransitionReport:
    encoding: str
    exact: dict[str, float]  # w1..w4 and delta_omega, units of B
    closed_form: dict[str, float]

    def mhz(self, B: float) -> dict[str, float]:
        return {k: v * B for k, v in self.exact.items()}


def closed_form_frequencies(enc: str | QubitEncoding, rv: ReducedVars) -> dict[str, float]:
    x, xp, y, z = rv.x, rv.x_prime, rv.y, rv.z
    if encoding(enc).kind == "I":
        return {
            "w1": 4 - xp / 3 - y / 6 - z / 140,
            "w2": 4 - x / 3 - y / 18 - z / 140,
            "w3": 4 - x / 3 - y / 6 - z / 140,
            "w4": 4 - xp / 3 - y / 18 - z / 140,
            "delta_omega": y / 9,
        }
    return {"w1": x - y / 2, "w2": xp + y / 2, "w3": xp - y / 2, "w4": x + y / 2, "delta_omega": y}


def _flip_gap(h: PairHamiltonian, lo: str, hi: str) -> float:
    """Diagonal energy change when one site flips from lo to hi, units of B."""
    site = 0 if lo[0] != hi[0] else 1
    f = h.field1 if site == 0 else h.field2
    a, b = int(lo[site]), int(hi[site])
    return (h.rot_sites[b] - h.rot_sites[a]) + (f[b] - f[a])


def eigen_frequencies(es: PairEigensystem) -> dict[str, float]:
    """w1..w4 and delta_omega from the eigenvalues, paired by dominant basis label.

    Each frequency is the single-site diagonal gap plus the difference of the
    two eigenvalue shifts. The gaps cancel identically in w4 - w1 and w2 - w3,
    so both are reported from the shifts alone.
    """
    h = es.hamiltonian
    d = {lab: es.shift_of(lab) for lab in BASIS}
    out = {}
    for name, (lo, hi) in TRANSITIONS[h.encoding.kind].items():
        out[name] = float(_flip_gap(h, lo, hi) + d[hi] - d[lo])
    t = TRANSITIONS[h.encoding.kind]
    out["w4_minus_w1"] = float((d[t["w4"][1]] - d[t["w4"][0]]) - (d[t["w1"][1]] - d[t["w1"][0]]))
    out["w2_minus_w3"] = float((d[t["w2"][1]] - d[t["w2"][0]]) - (d[t["w3"][1]] - d[t["w3"][0]]))
    out["delta_omega"] = float((d["00"] + d["11"]) - (d["01"] + d["10"]))
    return out


def transition_frequencies(enc: str | QubitEncoding, rv: ReducedVars, use_quadrupole: bool = True) -> TransitionReport:
    enc = encoding(enc)
    es = diagonalize_pair(build_pair_hamiltonian_reduced(enc, rv, use_quadrupole))
    return TransitionReport(enc.kind, eigen_frequencies(es), closed_form_frequencies(enc, rv))


def site_splitting(report: TransitionReport) -> float:
    """|w1 - w2|: separation of the two site-addressing lines, units of B."""
    return abs(report.exact["w1"] - report.exact["w2"])


def delta_omega(c1: CosineElements, c2: CosineElements, omega_alpha: float) -> float:
    return omega_alpha * (c1.C1 - c1.C0) * (c2.C1 - c2.C0)


def switchable_dipole_ratio(mol: MoleculeParams, eps: float, component: str = "odd") -> float:
    """(mu_eff(M=+-1) / mu_eff(M=0))^2 for the J=1, K=1 level from the exact Stark oracle.

    ``component`` picks the M=+-1 moment: "odd" is the part odd in M (the
    linear Stark moment), "plus" or "minus" the full moment of that level.
    """
    if eps <= 0:
        raise ValueError("eps must be > 0")
    m0 = exact_stark_levels(mol, eps, 1, 0)[0].mu_eff
    if component == "odd":
        m1 = first_order_moment(mol, eps)
    elif component == "plus":
        m1 = exact_stark_levels(mol, eps, 1, 1)[0].mu_eff
    elif component == "minus":
        m1 = exact_stark_levels(mol, eps, 1, -1)[0].mu_eff
    else:
        raise ValueError(f"unknown component {component!r}")
    return (m1 / m0) ** 2
