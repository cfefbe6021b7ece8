"""Nuclear quadrupole coupling of an on-axis I=1 nucleus in the strong-field limit.

The Stark splitting dominates, so M_J and M_I are nearly good quantum numbers
and the quadrupole term only mixes states with the same M_F = M_J + M_I. The
qubit states all sit in the M_F = 0 block, a 3x3 problem per rotational level.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import permutations, product

import numpy as np

from .rotor import _cos_diag, _cos_up

SQRT3 = math.sqrt(3.0)

# (M_J, M_I) order of every M_F = 0 block; Stark energy is lowest for M_J = +1
MF0_LABELS: tuple[tuple[int, int], ...] = ((1, -1), (0, 0), (-1, 1))
_MJ = np.array([lab[0] for lab in MF0_LABELS], dtype=float)


class UnsupportedCaseError(ValueError):
    pass


@dataclass(frozen=True)
class CosineElements:
    """C0 = <0|cos|0>, C1 = <1|cos|1>, CX = <0|cos|1> for one site."""

    C0: float
    C1: float
    CX: float

    def __post_init__(self) -> None:
        for key in ("C0", "C1", "CX"):
            v = getattr(self, key)
            if not math.isfinite(v) or abs(v) > 1:
                raise ValueError(f"{key} must lie in [-1, 1], got {v}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.C0, self.C1, self.CX)


@dataclass(frozen=True)
class HyperfineState:
    J: int
    K: int
    MJ_tilde: int
    MI: int
    amplitudes: dict[tuple[int, int], float] = field(hash=False)

    def __post_init__(self) -> None:
        norm = sum(a * a for a in self.amplitudes.values())
        if abs(norm - 1) > 1e-12:
            raise ValueError(f"amplitudes not normalized: |psi|^2 = {norm}")
        mf = self.MJ_tilde + self.MI
        if any(mj + mi != mf for mj, mi in self.amplitudes):
            raise ValueError("every component must share M_F = M_J + M_I")

    def vector(self, labels=MF0_LABELS) -> np.ndarray:
        return np.array([self.amplitudes.get(lab, 0.0) for lab in labels])


@dataclass(frozen=True)
class QuadBlock:
    MF: int
    labels: tuple[tuple[float, float], ...]
    matrix: np.ndarray = field(hash=False)

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (len(self.labels), len(self.labels)):
            raise ValueError("block dimension does not match labels")
        if not np.allclose(m, m.T, rtol=0, atol=1e-12 * max(1.0, np.abs(m).max(initial=0))):
            raise ValueError("block must be symmetric")
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class MixingResult:
    J: int
    w: float
    coefficient: float  # a for J=1, b for J=2
    fidelity: float  # worst ansatz-vs-exact overlap squared over the three states
    energies: tuple[float, float, float]  # units of mu*eps, labels (+1, 0, -1)
    states: tuple[HyperfineState, HyperfineState, HyperfineState]
    reordered: bool = False


def quad_prefactor(J: int, K: int, I: float, eqQ: float) -> float:
    """P(J,K,I) = eqQ [3K^2/J(J+1) - 1] / [4(2J-1)(2J+3)(2I-1)], in MHz."""
    if J < 1:
        raise ValueError("J must be >= 1")
    if I < 1:
        raise ValueError("the quadrupole prefactor needs I >= 1")
    return eqQ * (3 * K * K / (J * (J + 1)) - 1) / (4 * (2 * J - 1) * (2 * J + 3) * (2 * I - 1))


def quad_diagonal_energy(J: int, K: int, I: float, MJ: float, MI: float, eqQ: float) -> float:
    return quad_prefactor(J, K, I, eqQ) * (3 * MJ * MJ - J * (J + 1)) * (3 * MI * MI - I * (I + 1))


def _angular_ops(j: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    m = np.arange(j, -j - 1, -1)
    jp = np.zeros((len(m), len(m)))
    for i in range(1, len(m)):
        jp[i - 1, i] = math.sqrt(j * (j + 1) - m[i] * (m[i] + 1))
    return m, np.diag(m), jp


def quadrupole_matrix(J: int, K: int, I: float, eqQ: float) -> tuple[np.ndarray, list[tuple[float, float]]]:
    """First-order quadrupole operator within one |J K> manifold, over |M_J, M_I>.

    eqQ [3K^2/J(J+1) - 1] [3(I.J)^2 + 3/2 (I.J) - I^2 J^2] / [2 I(2I-1)(2J-1)(2J+3)].
    """
    if J < 1 or I < 1:
        raise ValueError("need J >= 1 and I >= 1")
    mj, jz, jp = _angular_ops(J)
    mi, iz, ip = _angular_ops(I)
    eye = np.eye(len(mj) * len(mi))
    ij = np.kron(jz, iz) + 0.5 * (np.kron(jp, ip.T) + np.kron(jp.T, ip))
    y = 3 * ij @ ij + 1.5 * ij - J * (J + 1) * I * (I + 1) * eye
    h = eqQ * (3 * K * K / (J * (J + 1)) - 1) * y / (2 * I * (2 * I - 1) * (2 * J - 1) * (2 * J + 3))
    labels = [(float(a), float(b)) for a, b in product(mj, mi)]
    return h, labels


def quad_blocks(J: int, K: int, stark: float, eqQ: float, I: float = 1.0) -> list[QuadBlock]:
    """All M_F blocks of H_S + H_Q for one |J K> manifold, M_F descending."""
    h, labels = quadrupole_matrix(J, K, I, eqQ)
    h = h + np.diag([-stark * mj * K / (J * (J + 1)) for mj, _ in labels])
    mfs = sorted({mj + mi for mj, mi in labels}, reverse=True)
    blocks = []
    for mf in mfs:
        idx = [i for i, (mj, mi) in enumerate(labels) if mj + mi == mf]
        blocks.append(QuadBlock(mf, tuple(labels[i] for i in idx), h[np.ix_(idx, idx)]))
    return blocks


def build_mf0_block(J: int, stark: float, eqQ: float, K: int = 1, I: float = 1.0, a6_as_printed: bool = False) -> QuadBlock:
    """3x3 M_F = 0 block of H_S + H_Q over (M_J, M_I) = (+1,-1), (0,0), (-1,+1).

    J=1: P(1,1,1) [[1,-3,6],[-3,4,-3],[6,-3,1]].
    J=2: 3 P(2,1,1) [[-1,-r3,6],[-r3,4,-r3],[6,-r3,-1]], which is what the
    quadrupole operator gives and what reproduces the diagonal energies
    P [3M_J^2 - J(J+1)][3M_I^2 - 2]. ``a6_as_printed`` drops the factor 3,
    for comparison only.
    """
    if K != 1 or I != 1 or J not in (1, 2):
        raise UnsupportedCaseError(f"M_F=0 closed form only for J in (1, 2), K=1, I=1; got J={J}, K={K}, I={I}")
    P = quad_prefactor(J, 1, 1, eqQ)
    if J == 1:
        q = P * np.array([[1.0, -3.0, 6.0], [-3.0, 4.0, -3.0], [6.0, -3.0, 1.0]])
    else:
        scale = P if a6_as_printed else 3 * P
        q = scale * np.array([[-1.0, -SQRT3, 6.0], [-SQRT3, 4.0, -SQRT3], [6.0, -SQRT3, -1.0]])
    stark_diag = -stark * _MJ / (J * (J + 1))
    return QuadBlock(0, MF0_LABELS, q + np.diag(stark_diag))


def ansatz_vectors(J: int, c: float) -> dict[int, np.ndarray]:
    """Single-coefficient approximate eigenvectors keyed by nominal M_J (unnormalized)."""
    if J == 1:
        return {
            -1: np.array([c, -c, 1 - c * c]),
            0: np.array([-c, 1 - c * c, c]),
            1: np.array([1 - c * c, c, -c]),
        }
    if J == 2:
        return {
            -1: np.array([-SQRT3 * c, c, 1 - 2 * c * c]),
            0: np.array([c, 1 - c * c, -c]),
            1: np.array([1 - 2 * c * c, -c, SQRT3 * c]),
        }
    raise UnsupportedCaseError(f"no ansatz for J={J}")


def _assign_by_overlap(vecs: np.ndarray) -> tuple[list[int], bool]:
    """Column index for each basis label (+1, 0, -1) maximizing total squared overlap."""
    ov = vecs**2
    best = max(permutations(range(3)), key=lambda p: sum(ov[k, p[k]] for k in range(3)))
    return list(best), list(best) != [0, 1, 2]


def mf0_eigenstates(J: int, w: float, eqq_sign: float = 1.0, a6_as_printed: bool = False):
    """Exact M_F=0 eigenpairs with the Stark scale set to 1 and eqQ = sign * w.

    Returns (energies, vectors, reordered) keyed by nominal M_J in (+1, 0, -1);
    each vector's dominant component is made positive.
    """
    if w < 0:
        raise ValueError("w must be >= 0")
    block = build_mf0_block(J, 1.0, math.copysign(w, eqq_sign) if w else 0.0, a6_as_printed=a6_as_printed)
    e, v = np.linalg.eigh(block.matrix)
    cols, reordered = _assign_by_overlap(v)
    energies, vectors = {}, {}
    for k, lab in enumerate((1, 0, -1)):
        vec = v[:, cols[k]]
        vec = vec * np.sign(vec[k])
        energies[lab] = float(e[cols[k]])
        vectors[lab] = vec
    return energies, vectors, reordered


def _fit_coefficient(J: int, exact: dict[int, np.ndarray]) -> tuple[float, float]:
    from scipy.optimize import minimize_scalar

    def loss(c: float) -> float:
        ans = ansatz_vectors(J, c)
        return sum(float(np.sum((ans[k] - exact[k]) ** 2)) for k in exact)

    c = minimize_scalar(loss, bounds=(-0.5, 0.5), method="bounded", options={"xatol": 1e-14}).x
    ans = ansatz_vectors(J, c)
    fid = min(float(ans[k] @ exact[k]) ** 2 / float(ans[k] @ ans[k]) for k in exact)
    return float(c), fid


def strong_field_mixing(J: int, w: float, eqq_sign: float = 1.0) -> MixingResult:
    """Exact M_F=0 eigenstates for quadrupole/Stark ratio w, plus the best single
    mixing coefficient of the one-parameter ansatz (a for J=1, b for J=2)."""
    energies, vectors, reordered = mf0_eigenstates(J, w, eqq_sign)
    if reordered:
        warnings.warn(f"w={w}: level crossing, eigenstates ordered by overlap", RuntimeWarning, stacklevel=2)
    if w == 0:
        c, fid = 0.0, 1.0
    else:
        c, fid = _fit_coefficient(J, vectors)
    states = tuple(
        HyperfineState(
            J=J,
            K=1,
            MJ_tilde=lab,
            MI=-lab,
            amplitudes={label: float(a) for label, a in zip(MF0_LABELS, vectors[lab] / np.linalg.norm(vectors[lab]))},
        )
        for lab in (1, 0, -1)
    )
    return MixingResult(J, w, c, fid, (energies[1], energies[0], energies[-1]), states, reordered)


def mixing_slope(J: int, w_max: float = 0.1, points: int = 50, eqq_sign: float = 1.0) -> tuple[float, float]:
    """Least-squares slope c/w through the origin over w in (0, w_max], and the worst fidelity."""
    ws = np.linspace(w_max / points, w_max, points)
    res = [strong_field_mixing(J, float(w), eqq_sign) for w in ws]
    cs = np.array([r.coefficient for r in res])
    slope = float(ws @ cs / (ws @ ws))
    return slope, min(r.fidelity for r in res)


_C12 = np.array([_cos_up(1, 1, int(m)) for m in _MJ])


@lru_cache(maxsize=4096)
def _dressed(qubit_type: str, w: float, eqq_sign: float, a6_as_printed: bool) -> tuple[float, float, float]:
    _, s1, _ = mf0_eigenstates(1, w, eqq_sign, a6_as_printed)
    diag1 = np.array([_cos_diag(1, 1, int(m)) for m in _MJ])
    if qubit_type == "II":
        p, m = s1[1], s1[-1]
        return float(p**2 @ diag1), float(m**2 @ diag1), float((p * m) @ diag1)
    _, s2, _ = mf0_eigenstates(2, w, eqq_sign, a6_as_printed)
    diag2 = np.array([_cos_diag(2, 1, int(m)) for m in _MJ])
    lo, hi = s1[-1], s2[-1]
    return float(lo**2 @ diag1), float(hi**2 @ diag2), float((lo * hi) @ _C12)


def normalize_type(qubit_type: str) -> str:
    t = str(qubit_type).strip().upper()
    if t in ("1", "I"):
        return "I"
    if t in ("2", "II"):
        return "II"
    raise ValueError(f"qubit type must be I or II, got {qubit_type!r}")


def dressed_cosines(qubit_type: str, w: float, eqq_sign: float = 1.0, a6_as_printed: bool = False) -> CosineElements:
    """(C0, C1, CX) between quadrupole-dressed qubit states, from exact M_F=0 eigenvectors.

    Type I: |0> = J=1 and |1> = J=2, both nominal (M_J, M_I) = (-1, +1).
    Type II: |0> = (+1, -1) and |1> = (-1, +1) of J=1. The cosine operator
    is diagonal in M_I, so it is summed over the shared (M_J, M_I) components.
    """
    if not 0 <= w < 1:
        raise ValueError(f"w must lie in [0, 1), got {w}")
    sign = 1.0 if eqq_sign >= 0 else -1.0
    return CosineElements(*_dressed(normalize_type(qubit_type), float(w), sign, bool(a6_as_printed)))


@dataclass(frozen=True)
class QuadraticFit:
    element: str
    c0: float
    c1: float
    c2: float
    residual: float  # 2-norm of fit residuals


TABLE1_ELEMENTS = ("C0", "C1", "CX")

# Published quadratic coefficients (c0, c1, c2), kept as regression targets only
TABLE1_REFERENCE: dict[str, dict[str, tuple[float, float, float]]] = {
    "I": {
        "C0": (-0.5, -0.00168, 0.0418),
        "C1": (-1 / 6, 0.00526, 0.0218),
        "CX": (math.sqrt(15) / 10, -0.00658, -0.0437),
    },
    "II": {
        "C0": (0.5, -0.00347, -0.0213),
        "C1": (-0.5, -0.00168, 0.0418),
        "CX": (0.0, 0.153, -0.0108),
    },
}


def default_table1_grid() -> np.ndarray:
    return np.linspace(0.05, 0.95, 37)


def refit_table1(
    qubit_type: str,
    w_grid=None,
    eqq_sign: float = 1.0,
    fix_c0: bool = True,
    a6_as_printed: bool = False,
) -> list[QuadraticFit]:
    """Quadratic fits c0 + c1 w + c2 w^2 of the dressed cosine elements over w_grid.

    With ``fix_c0`` the intercept is pinned to the exact w=0 value and only c1, c2
    are fitted; otherwise all three float.
    """
    ws = default_table1_grid() if w_grid is None else np.asarray(w_grid, dtype=float)
    if ws.ndim != 1 or len(ws) < 20:
        raise ValueError("w_grid needs at least 20 points")
    if np.any(ws <= 0) or np.any(ws >= 1):
        raise ValueError("w_grid must lie inside (0, 1)")
    design = np.stack([np.ones_like(ws), ws, ws**2], axis=1)
    if fix_c0:
        design = design[:, 1:]
    if len(np.unique(ws)) < design.shape[1] + 1 or np.linalg.cond(design) > 1e8:
        raise ValueError("w_grid is ill-conditioned for a quadratic fit")

    values = np.array([dressed_cosines(qubit_type, float(w), eqq_sign, a6_as_printed).as_tuple() for w in ws])
    base = dressed_cosines(qubit_type, 0.0).as_tuple()
    fits = []
    for k, name in enumerate(TABLE1_ELEMENTS):
        target = values[:, k] - (base[k] if fix_c0 else 0.0)
        coef, *_ = np.linalg.lstsq(design, target, rcond=None)
        resid = float(np.linalg.norm(design @ coef - target))
        c0, c1, c2 = (base[k], *coef) if fix_c0 else tuple(coef)
        fits.append(QuadraticFit(name, float(c0), float(c1), float(c2), resid))
    return fits
