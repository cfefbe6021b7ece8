"""Ideal resonant pulses and free precession on the four two-dipole eigenstates.

Dynamics run in the eigenbasis, in a frame rotating with the single-site
frequencies of the |00> -> |10> and |00> -> |01> lines. In that frame free
evolution only advances the phase of the |11>-like state, at the delta-omega
frequency. Reports convert back to the basis-qubit frame with the eigenvector
coefficients.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .entangle import concurrence_pure
from .pair import BASIS, TRANSITIONS, PairEigensystem, build_pair_hamiltonian_reduced, diagonalize_pair, eigen_frequencies, encoding
from .params import ReducedVars

SITE_PAIRS = {
    "site1": (("00", "10"), ("01", "11")),
    "site2": (("00", "01"), ("10", "11")),
}

_TIME_UNITS = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9}


class SequenceParseError(ValueError):
    def __init__(self, message: str, index: int, column: int, token: str):
        super().__init__(f"token {index + 1} at column {column + 1} ({token!r}): {message}")
        self.index = index
        self.column = column
        self.token = token


@dataclass(frozen=True)
class StateVector4:
    """Amplitudes over (|00>, |01>, |10>, |11>) or over the eigenstates carrying those labels."""

    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        a = np.asarray(self.amplitudes, dtype=complex).reshape(4)
        n = float(np.vdot(a, a).real)
        if abs(n - 1) > 1e-12:
            raise ValueError(f"state not normalized: |psi|^2 = {n}")
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def basis(cls, label: str) -> StateVector4:
        a = np.zeros(4, dtype=complex)
        a[BASIS.index(label)] = 1
        return cls(a)

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def concurrence(self) -> float:
        return concurrence_pure(self.amplitudes)

    def __repr__(self) -> str:
        parts = ", ".join(f"{lab}: {a.real:+.6f}{a.imag:+.6f}j" for lab, a in zip(BASIS, self.amplitudes))
        return f"StateVector4({parts})"


@dataclass(frozen=True)
class PulseSpec:
    """Resonant rotation by ``area`` with rf phase ``phase`` on one transition.

    ``transition`` is a named line ("w1".."w4"), a site ("site1", "site2", both
    of that site's lines at once) or an explicit (lower, upper) label pair.
    """

    transition: str | tuple[str, str]
    area: float = math.pi
    phase: float = 0.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.area) or self.area < 0:
            raise ValueError(f"pulse area must be >= 0, got {self.area}")
        if not math.isfinite(self.phase):
            raise ValueError("pulse phase must be finite")
        t = self.transition
        if isinstance(t, str):
            if t not in ("w1", "w2", "w3", "w4", "site1", "site2"):
                raise ValueError(f"unknown transition {t!r}")
        elif tuple(t) not in _ALLOWED_PAIRS:
            raise ValueError(f"transition {t!r} is not one of the four single-site lines")


_ALLOWED_PAIRS = {("00", "01"), ("00", "10"), ("01", "11"), ("10", "11")}


def resolve_pairs(transition, kind: str) -> tuple[tuple[str, str], ...]:
    if isinstance(transition, str):
        if transition in SITE_PAIRS:
            return SITE_PAIRS[transition]
        return (TRANSITIONS[kind][transition],)
    return (tuple(transition),)


def rotation(area: float, phase: float) -> np.ndarray:
    """exp[-i (area/2)(cos(phase) sx + sin(phase) sy)] on (lower, upper)."""
    c, s = math.cos(area / 2), math.sin(area / 2)
    return np.array(
        [[c, -1j * s * np.exp(-1j * phase)], [-1j * s * np.exp(1j * phase), c]],
        dtype=complex,
    )


def apply_pulse(state: StateVector4, pulse: PulseSpec, kind: str = "I", phase_offsets: dict | None = None) -> StateVector4:
    """Rotate the addressed eigenstate pair(s); every other amplitude is untouched.

    ``phase_offsets`` maps a label pair to an extra phase, used by the
    sequence runner for lines that drift against the rotating frame.
    """
    a = state.amplitudes.copy()
    for lo, hi in resolve_pairs(pulse.transition, encoding(kind).kind):
        extra = (phase_offsets or {}).get((lo, hi), 0.0)
        i, j = BASIS.index(lo), BASIS.index(hi)
        a[[i, j]] = rotation(pulse.area, pulse.phase + extra) @ a[[i, j]]
    return StateVector4(a)


def free_evolution(state: StateVector4, delta_omega_hz: float, t: float) -> StateVector4:
    """Rotating-frame precession: only the |11>-like eigenstate picks up exp(-2 pi i dw t)."""
    if t < 0:
        raise ValueError("time must be >= 0")
    a = state.amplitudes.copy()
    a[3] *= np.exp(-2j * math.pi * delta_omega_hz * t)
    return StateVector4(a)


@dataclass
class PulseSimulator:
    """Runs a sequence of pulses and waits on one pair of coupled dipoles."""

    kind: str
    eigensystem: PairEigensystem
    B: float  # MHz
    time: float = 0.0
    state: StateVector4 | None = None

    def __post_init__(self) -> None:
        if self.state is None:
            self.state = StateVector4.basis("00")  # ground eigenstate

    @classmethod
    def create(cls, enc, rv: ReducedVars, B: float, use_quadrupole: bool = True) -> PulseSimulator:
        kind = encoding(enc).kind
        return cls(kind, diagonalize_pair(build_pair_hamiltonian_reduced(kind, rv, use_quadrupole)), B)

    @property
    def delta_omega_hz(self) -> float:
        return eigen_frequencies(self.eigensystem)["delta_omega"] * self.B * 1e6

    def _drift(self) -> dict[tuple[str, str], float]:
        # a line ending on |11> sits delta-omega above the frame frequency, so a
        # pulse resonant with it at time t carries an extra phase -2 pi dw t
        phi = 2 * math.pi * self.delta_omega_hz * self.time
        return {("10", "11"): -phi, ("01", "11"): -phi}

    def pulse(self, spec: PulseSpec) -> StateVector4:
        # site pulses are carried at the frame frequency and cover both lines
        drift = None if spec.transition in SITE_PAIRS else self._drift()
        self.state = apply_pulse(self.state, spec, self.kind, drift)
        return self.state

    def wait(self, t: float) -> StateVector4:
        self.state = free_evolution(self.state, self.delta_omega_hz, t)
        self.time += t
        return self.state

    def prepare_basis(self, label: str) -> StateVector4:
        """Start from the exact basis-qubit state |label>, expressed over eigenstates."""
        psi = np.zeros(4)
        psi[BASIS.index(label)] = 1.0
        self.state = StateVector4(to_eigen_frame(psi, self.eigensystem))
        self.time = 0.0
        return self.state

    def basis_frame(self) -> StateVector4:
        return to_basis_frame(self.state, self.eigensystem)


def _label_rows(es: PairEigensystem) -> np.ndarray:
    """Eigenvector coefficients as rows ordered by their dominant basis label."""
    return np.array([es.state_of(lab) for lab in BASIS])


def to_basis_frame(state: StateVector4, es: PairEigensystem) -> StateVector4:
    return StateVector4(_label_rows(es).T @ state.amplitudes)


def to_eigen_frame(psi_basis, es: PairEigensystem) -> np.ndarray:
    return _label_rows(es) @ np.asarray(psi_basis, dtype=complex)


@dataclass(frozen=True)
class BellResult:
    state: StateVector4  # basis-qubit frame
    eigen_state: StateVector4
    concurrence: float


def bell_sequence(enc, rv: ReducedVars, B: float = 1.0, phase: float = 0.0, swapped: bool = False, use_quadrupole: bool = True) -> BellResult:
    """pi/2 on w1 then pi on w2 from the ground eigenstate (w3 then w4 if ``swapped``)."""
    sim = PulseSimulator.create(enc, rv, B, use_quadrupole)
    first, second = ("w3", "w4") if swapped else ("w1", "w2")
    sim.pulse(PulseSpec(first, math.pi / 2, phase))
    sim.pulse(PulseSpec(second, math.pi, phase))
    basis = sim.basis_frame()
    return BellResult(basis, sim.state, basis.concurrence())


CNOT_MAP = {"00": "00", "01": "11", "10": "10", "11": "01"}  # site 2 controls site 1


@dataclass(frozen=True)
class CnotReport:
    free_time: float  # s
    delta_omega_hz: float
    truth_table: np.ndarray  # [input, output] populations in the basis-qubit frame
    fidelity: float  # mean population landing on the CNOT output
    note: str = "truth table compared up to single-qubit phases"


def precession_cnot(enc, rv: ReducedVars, B: float, free_time: float | None = None, use_quadrupole: bool = True) -> CnotReport:
    """pi/2 on site 1, free precession, pi/2 on site 1 with opposite phase.

    At t = 1/(2 dw) the site-1 populations coupled to site 2 in |0> and |1>
    end up 180 degrees apart, which flips site 1 only when site 2 is |1>.
    """
    sim = PulseSimulator.create(enc, rv, B, use_quadrupole)
    dw = sim.delta_omega_hz
    if dw <= 0:
        raise ValueError(f"precession gate needs delta-omega > 0, got {dw} Hz")
    t = 1 / (2 * dw) if free_time is None else free_time
    if t <= 0:
        raise ValueError("free time must be > 0")
    table = np.zeros((4, 4))
    for i, label in enumerate(BASIS):
        sim.prepare_basis(label)
        sim.pulse(PulseSpec("site1", math.pi / 2, math.pi / 2))
        sim.wait(t)
        sim.pulse(PulseSpec("site1", math.pi / 2, -math.pi / 2))
        table[i] = sim.basis_frame().populations
    fid = float(np.mean([table[i, BASIS.index(CNOT_MAP[lab])] for i, lab in enumerate(BASIS)]))
    return CnotReport(t, dw, table, fid)


_TOKEN = re.compile(
    r"^(?P<kind>pi2|pi|pulse|free)(?:\((?P<args>[^()]*)\))?@(?P<target>[A-Za-z0-9_.+\-]+)$"
)
_DURATION = re.compile(r"^(?P<value>[0-9]*\.?[0-9]+(?:[eE][+\-]?[0-9]+)?)(?P<unit>s|ms|us|ns)$")


def _split_top_level(text: str) -> list[tuple[int, str]]:
    out, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            out.append((start, text[start:i]))
            start = i + 1
    out.append((start, text[start:]))
    return out


def parse_sequence(text: str) -> list[PulseSpec | float]:
    """Parse e.g. ``pi2@w1,pi@w2``, ``free@27us`` or ``pulse(area=1.2,phase=0.5)@w3``.

    Pulses target w1..w4, site1 or site2; ``pi`` and ``pi2`` accept an optional
    ``(phase=...)``. Waits come back as floats in seconds.
    """
    if not text.strip():
        return []
    steps: list[PulseSpec | float] = []
    for idx, (col, raw) in enumerate(_split_top_level(text)):
        tok = raw.strip()
        col += len(raw) - len(raw.lstrip())
        m = _TOKEN.match(tok)
        if not m:
            raise SequenceParseError("expected pi2@.., pi@.., pulse(area=..,phase=..)@.. or free@<time>", idx, col, tok)
        kind, args, target = m["kind"], m["args"], m["target"]
        if kind == "free":
            if args is not None:
                raise SequenceParseError("free takes no arguments", idx, col, tok)
            d = _DURATION.match(target)
            if not d:
                raise SequenceParseError("duration must look like 27us, 1.5ms, 3e-5s", idx, col, tok)
            steps.append(float(d["value"]) * _TIME_UNITS[d["unit"]])
            continue
        params: dict[str, float] = {}
        for item in filter(None, (a.strip() for a in (args or "").split(","))):
            key, sep, value = item.partition("=")
            key = key.strip()
            if not sep or key not in ("area", "phase") or key in params:
                raise SequenceParseError(f"bad argument {item!r}", idx, col, tok)
            try:
                params[key] = float(value)
            except ValueError:
                raise SequenceParseError(f"{key} is not a number", idx, col, tok) from None
        if kind == "pulse" and "area" not in params:
            raise SequenceParseError("pulse(...) needs area=", idx, col, tok)
        if kind != "pulse" and "area" in params:
            raise SequenceParseError(f"{kind} has a fixed area", idx, col, tok)
        area = {"pi": math.pi, "pi2": math.pi / 2}.get(kind, params.get("area"))
        try:
            steps.append(PulseSpec(target, area, params.get("phase", 0.0)))
        except ValueError as exc:
            raise SequenceParseError(str(exc), idx, col, tok) from None
    return steps


@dataclass(frozen=True)
class SequenceResult:
    eigen_state: StateVector4
    basis_state: StateVector4
    concurrence: float
    elapsed: float  # s


def run_sequence(enc, rv: ReducedVars, B: float, steps, use_quadrupole: bool = True) -> SequenceResult:
    sim = PulseSimulator.create(enc, rv, B, use_quadrupole)
    for step in steps:
        if isinstance(step, PulseSpec):
            sim.pulse(step)
        else:
            sim.wait(float(step))
    basis = sim.basis_frame()
    return SequenceResult(sim.state, basis, basis.concurrence(), sim.time)
