"""Single symmetric top in a static field: rigid-rotor levels, first-order Stark
shifts, direction-cosine matrix elements and an exact truncated-basis solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .params import STARK_MHZ_PER_DEBYE_V_CM, MoleculeParams, stark_frequency


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class RotorState:
    J: int
    K: int
    M: int

    def __post_init__(self) -> None:
        for key in ("J", "K", "M"):
            if int(getattr(self, key)) != getattr(self, key):
                raise ValueError(f"{key} must be an integer")
        if self.J < 0 or abs(self.K) > self.J or abs(self.M) > self.J:
            raise ValueError(f"invalid rotor state J={self.J}, K={self.K}, M={self.M}")


@dataclass(frozen=True)
class StarkLevel:
    state: RotorState
    energy: float  # MHz
    cos_expectation: float
    mu_eff: float  # Debye, mu * <cos theta>
    mu_eff_fd: float | None = None  # Debye, -dE/d eps by central difference


def rotational_energy(state: RotorState, mol: MoleculeParams) -> float:
    return mol.B * state.J * (state.J + 1) + (mol.A - mol.B) * state.K**2


def stark_energy_first_order(state: RotorState, stark: float) -> float:
    """-(mu eps) M K / J(J+1); ``stark`` is mu*eps/h in MHz."""
    if state.J == 0:
        raise ValueError("first-order Stark energy is undefined for J = 0")
    return -stark * state.M * state.K / (state.J * (state.J + 1))


def _cos_diag(J: int, K: int, M: int) -> float:
    if J == 0:
        return 0.0
    return M * K / (J * (J + 1))


def _cos_up(J: int, K: int, M: int) -> float:
    """<J K M| cos theta |J+1 K M>."""
    num = ((J + 1) ** 2 - K**2) * ((J + 1) ** 2 - M**2)
    return math.sqrt(num) / ((J + 1) * math.sqrt((2 * J + 1) * (2 * J + 3)))


def cosine_element(bra: RotorState, ket: RotorState) -> float:
    """<bra| cos theta |ket> in the symmetric-top basis (zero unless dK = dM = 0, |dJ| <= 1)."""
    if bra.K != ket.K or bra.M != ket.M:
        return 0.0
    K, M = bra.K, bra.M
    if bra.J == ket.J:
        return _cos_diag(bra.J, K, M)
    lo = min(bra.J, ket.J)
    if abs(bra.J - ket.J) == 1:
        return _cos_up(lo, K, M)
    return 0.0


def _stark_matrices(mol: MoleculeParams, K: int, M: int, Jmax: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    Jmin = max(abs(K), abs(M))
    Js = np.arange(Jmin, Jmax + 1)
    h0 = np.diag(mol.B * Js * (Js + 1) + (mol.A - mol.B) * K**2).astype(float)
    cos = np.diag([_cos_diag(int(J), K, M) for J in Js]).astype(float)
    for i, J in enumerate(Js[:-1]):
        cos[i, i + 1] = cos[i + 1, i] = _cos_up(int(J), K, M)
    return Js, h0, cos


def _solve(mol: MoleculeParams, eps: float, K: int, M: int, Jmax: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    Js, h0, cos = _stark_matrices(mol, K, M, Jmax)
    # eps may dip below zero inside the finite-difference stencil
    energies, vecs = np.linalg.eigh(h0 - mol.mu * eps * STARK_MHZ_PER_DEBYE_V_CM * cos)
    cos_exp = np.einsum("ik,ij,jk->k", vecs, cos, vecs)
    return Js, energies, cos_exp


def exact_stark_levels(
    mol: MoleculeParams,
    eps: float,
    K: int,
    M: int,
    Jmax: int | None = None,
    track: int = 3,
    rtol: float = 1e-10,
) -> list[StarkLevel]:
    """Diagonalize H_R + H_S over |J K M>, J <= Jmax, escalating Jmax until the
    lowest ``track`` levels move by less than ``rtol`` when two more J are added.

    Levels are returned in ascending energy and labelled by the field-free J
    they connect to. The effective dipole moment is computed both from
    <cos theta> and as a central difference of the energy in the field.
    """
    stark_frequency(mol.mu, eps)  # validates eps
    Jmin = max(abs(K), abs(M))
    if Jmax is None:
        Jmax = abs(K) + 6
    if Jmax < Jmin + 3:
        raise ValueError(f"Jmax must be >= max(|K|,|M|) + 3 = {Jmin + 3}")
    n = min(track, Jmax - Jmin + 1)
    ceiling = Jmax + 60
    while True:
        _, e, c = _solve(mol, eps, K, M, Jmax)
        _, e_ref, _ = _solve(mol, eps, K, M, Jmax + 2)
        scale = np.maximum(np.abs(e_ref[:n]), mol.B)
        if np.all(np.abs(e[:n] - e_ref[:n]) <= rtol * scale):
            break
        Jmax += 2
        if Jmax > ceiling:
            raise ConvergenceError(f"Stark levels did not converge by Jmax={Jmax}")

    h = max(abs(eps) * 1e-4, 1e-2)
    _, e_hi, _ = _solve(mol, eps + h, K, M, Jmax)
    _, e_lo, _ = _solve(mol, eps - h, K, M, Jmax)
    # mu_eff = -dE/d eps; E in MHz, eps in V/cm -> Debye via the Stark conversion
    dE = (e_hi - e_lo) / (2 * h)
    mu_fd = -dE / STARK_MHZ_PER_DEBYE_V_CM

    Js = range(Jmin, Jmax + 1)
    return [
        StarkLevel(
            state=RotorState(J, K, M),
            energy=float(e[i]),
            cos_expectation=float(c[i]),
            mu_eff=float(mol.mu * c[i]),
            mu_eff_fd=float(mu_fd[i]),
        )
        for i, J in enumerate(Js)
    ]


def first_order_moment(mol: MoleculeParams, eps: float, J: int = 1, K: int = 1, M: int = 1) -> float:
    """Part of the exact effective moment that is odd in M (linear Stark effect plus odd orders).

    The levels for +M and -M share all even-order shifts, so half the difference
    of their exact moments isolates the first-order contribution mu M K / J(J+1).
    """
    if M == 0:
        raise ValueError("M must be non-zero")
    idx = J - max(abs(K), abs(M))
    plus = exact_stark_levels(mol, eps, K, abs(M))[idx]
    minus = exact_stark_levels(mol, eps, K, -abs(M))[idx]
    return math.copysign(1, M) * (plus.mu_eff - minus.mu_eff) / 2


def second_order_moment_m0(mol: MoleculeParams, eps: float, J: int = 1, K: int = 1) -> float:
    """Perturbation-theory moment of |J K M=0>: mu * 2 x sum_J' |<J|cos|J'>|^2 / (E_J - E_J') * B."""
    x = stark_frequency(mol.mu, eps) / mol.B
    total = 0.0
    if J + 1 >= abs(K):
        total += _cos_up(J, K, 0) ** 2 / (J * (J + 1) - (J + 1) * (J + 2))
    if J - 1 >= abs(K):
        total += _cos_up(J - 1, K, 0) ** 2 / (J * (J + 1) - (J - 1) * J)
    return -2.0 * mol.mu * x * total


def stark_map(
    mol: MoleculeParams,
    K: int,
    J_list: Sequence[int],
    x_grid: Iterable[float],
) -> list[dict[str, float]]:
    """First-order W/B = (E_R + E_S)/B and <cos theta> for every M of each J, per grid point."""
    xs = [float(v) for v in x_grid]
    if not xs:
        raise ValueError("x_grid must not be empty")
    if any(b < a for a, b in zip(xs, xs[1:])):
        raise ValueError("x_grid must be ascending")
    rows = []
    for x in xs:
        for J in J_list:
            for M in range(-J, J + 1):
                st = RotorState(J, K, M)
                w = (rotational_energy(st, mol) + stark_energy_first_order(st, x * mol.B)) / mol.B
                rows.append({"x": x, "J": J, "K": K, "M": M, "W_over_B": w, "cos_exp": _cos_diag(J, K, M)})
    return rows
