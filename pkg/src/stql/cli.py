"""``stql`` command line: spectra, coupled-pair reports, scans and refit checks.

Every subcommand writes a table as CSV (default) or JSON, with numbers
rendered at 12 significant digits so repeated runs are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from . import entangle, hyperfine, pair, pulses, rotor, verify
from .params import (
    Conditions,
    dipole_dipole_strength,
    get_molecule,
    load_molecule_registry,
    molecule_record,
    stark_frequency,
)

SIG = 12


class CliError(Exception):
    def __init__(self, message: str, code: int = 2):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class RunConfig:
    molecule: str
    eps: float
    eps_prime: float | None
    r12: float
    alpha: float
    encoding: str | None
    output: str | None
    format: str
    registry: str | None = None
    use_quadrupole: bool = True

    def conditions(self) -> Conditions:
        try:
            mol = get_molecule(self.molecule, self.registry)
        except KeyError as exc:
            raise CliError(str(exc.args[0])) from None
        deps = None if self.eps_prime is None else self.eps_prime - self.eps
        return Conditions(mol, self.eps, 1e-3, deps, self.r12, self.alpha)

    def encodings(self) -> list[str]:
        return [self.encoding] if self.encoding else ["I", "II"]


def _fmt(v: Any) -> Any:
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            return str(v)
        s = f"{v:.{SIG}g}"
        return "0" if s == "-0" else s
    return v


def render(rows: list[dict[str, Any]], fmt: str) -> str:
    if not rows:
        return "" if fmt == "csv" else "[]\n"
    cols = list(rows[0])
    if fmt == "json":
        out = []
        for r in rows:
            rec = {}
            for k in cols:
                v = _fmt(r[k])
                if isinstance(v, str) and isinstance(r[k], (float, np.floating)) and math.isfinite(float(r[k])):
                    v = float(v)
                rec[k] = v
            out.append(rec)
        return json.dumps(out, indent=2, ensure_ascii=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(r[k]) for k in cols])
    return buf.getvalue()


def emit(rows: list[dict[str, Any]], cfg: RunConfig) -> None:
    text = render(rows, cfg.format)
    if cfg.output in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(f"cannot write {cfg.output}: {exc.strerror}") from None


def cmd_molecule(cfg: RunConfig, args) -> list[dict]:
    if args.list:
        return [molecule_record(m) for m in load_molecule_registry(cfg.registry)]
    return [molecule_record(cfg.conditions().molecule)]


def cmd_reduced(cfg: RunConfig, args) -> list[dict]:
    c = cfg.conditions()
    g, rv, m = c.geometry, c.reduced, c.molecule
    return [
        {
            "molecule": m.name,
            "eps_V_cm": g.eps,
            "eps_prime_V_cm": g.eps_prime,
            "mu_eps_MHz": stark_frequency(m.mu, g.eps),
            "omega_alpha_kHz": dipole_dipole_strength(m.mu, g.r12, g.alpha),
            "x": rv.x,
            "x_prime": rv.x_prime,
            "delta_x": rv.delta_x,
            "y": rv.y,
            "z": rv.z,
            "w": rv.w,
            "w_prime": rv.w_prime,
        }
    ]


def cmd_stark_map(cfg: RunConfig, args) -> list[dict]:
    if not args.x_max > 0:
        raise CliError("--x-max must be > 0")
    if args.points < 2:
        raise CliError("--points must be >= 2")
    mol = cfg.conditions().molecule
    grid = np.linspace(0.0, args.x_max, args.points)
    return rotor.stark_map(mol, 1, args.J, grid)


def cmd_cosines(cfg: RunConfig, args) -> list[dict]:
    c = cfg.conditions()
    rv = c.reduced
    sign = -1.0 if c.molecule.eqQ < 0 else 1.0
    if args.refit:
        rows = []
        for kind in cfg.encodings():
            for f in hyperfine.refit_table1(kind, eqq_sign=args.refit_sign):
                rows.append({"type": kind, "element": f.element, "c0": f.c0, "c1": f.c1, "c2": f.c2, "residual": f.residual})
        return rows
    rows = []
    for kind in cfg.encodings():
        for site, w in (("1", rv.w), ("2", rv.w_prime)):
            ce = hyperfine.dressed_cosines(kind, w, sign)
            rows.append({"type": kind, "site": site, "w": w, "C0": ce.C0, "C1": ce.C1, "CX": ce.CX})
    return rows


def cmd_pair(cfg: RunConfig, args) -> list[dict]:
    c = cfg.conditions()
    rv, mol = c.reduced, c.molecule
    rows = []
    for kind in cfg.encodings():
        es = pair.diagonalize_pair(pair.build_pair_hamiltonian(kind, mol, c.geometry, cfg.use_quadrupole))
        e_mhz = es.energies_mhz()
        for i in range(4):
            a, b, cc, d = es.coeffs[i]
            rows.append(
                {
                    "encoding": kind,
                    "i": i + 1,
                    "label": es.labels[i],
                    "E_minus_2A_over_B": es.energies[i],
                    "formula_over_B": pair.eigenvalue_formula(kind, rv, i + 1),
                    "E_MHz": e_mhz[i],
                    "a": a,
                    "b": b,
                    "c": cc,
                    "d": d,
                    "C12": entangle.concurrence_pure(es.coeffs[i]),
                    "ordering": es.ordering_tag,
                }
            )
    return rows


def cmd_frequencies(cfg: RunConfig, args) -> list[dict]:
    c = cfg.conditions()
    rv, B = c.reduced, c.molecule.B
    rows = []
    for kind in cfg.encodings():
        rep = pair.transition_frequencies(kind, rv, cfg.use_quadrupole)
        for source, vals in (("exact", rep.exact), ("closed_form", rep.closed_form)):
            rows.append(
                {
                    "encoding": kind,
                    "omega1_MHz": vals["w1"] * B,
                    "omega2_MHz": vals["w2"] * B,
                    "omega3_MHz": vals["w3"] * B,
                    "omega4_MHz": vals["w4"] * B,
                    "delta_omega_kHz": vals["delta_omega"] * B * 1e3,
                    "site_splitting_MHz": abs(vals["w1"] - vals["w2"]) * B,
                    "source": source,
                }
            )
    return rows


def cmd_concurrence_scan(cfg: RunConfig, args) -> list[dict]:
    if not 0 < args.ratio_min < args.ratio_max:
        raise CliError("need 0 < --ratio-min < --ratio-max")
    if args.points < 2:
        raise CliError("--points must be >= 2")
    rv = cfg.conditions().reduced
    grid = np.geomspace(args.ratio_min, args.ratio_max, args.points)
    rows = []
    for kind in cfg.encodings():
        try:
            scan = entangle.fig2_scan(kind, rv, grid, cfg.use_quadrupole)
        except ValueError as exc:
            raise CliError(f"type {kind}: {exc}") from None
        rows += [{"ratio": r.ratio, "c12_exact": r.c12_exact, "c12_model": r.c12_model, "encoding": r.encoding} for r in scan]
    return rows


def cmd_pulse_sim(cfg: RunConfig, args) -> list[dict]:
    c = cfg.conditions()
    rv, B = c.reduced, c.molecule.B
    kind = cfg.encoding or "II"
    if args.cnot:
        rep = pulses.precession_cnot(kind, rv, B, args.free_time_us * 1e-6 if args.free_time_us else None, cfg.use_quadrupole)
        rows = []
        for i, lab in enumerate(pair.BASIS):
            row = {"input": f"|{lab}>"}
            row.update({f"P_{out}": rep.truth_table[i, j] for j, out in enumerate(pair.BASIS)})
            row.update({"fidelity": rep.fidelity, "free_time_us": rep.free_time * 1e6, "delta_omega_kHz": rep.delta_omega_hz / 1e3})
            rows.append(row)
        return rows
    try:
        steps = pulses.parse_sequence(args.sequence)
    except pulses.SequenceParseError as exc:
        raise CliError(f"sequence: {exc}") from None
    res = pulses.run_sequence(kind, rv, B, steps, cfg.use_quadrupole)
    rows = []
    for frame, st in (("eigen", res.eigen_state), ("basis", res.basis_state)):
        for lab, amp, pop in zip(pair.BASIS, st.amplitudes, st.populations):
            rows.append(
                {
                    "frame": frame,
                    "state": f"|{lab}>",
                    "re": amp.real,
                    "im": amp.imag,
                    "population": pop,
                    "concurrence": res.concurrence,
                    "elapsed_us": res.elapsed * 1e6,
                }
            )
    return rows


def cmd_verify(cfg: RunConfig, args) -> list[dict]:
    return [
        {
            "check": ch.name,
            "reference": ch.reference,
            "value": ch.value,
            "deviation": ch.deviation,
            "tolerance": ch.tolerance,
            "status": "PASS" if ch.passed else "FAIL",
            "note": ch.note,
        }
        for ch in verify.run_all()
    ]


COMMANDS = {
    "molecule": cmd_molecule,
    "reduced": cmd_reduced,
    "stark-map": cmd_stark_map,
    "cosines": cmd_cosines,
    "pair": cmd_pair,
    "frequencies": cmd_frequencies,
    "concurrence-scan": cmd_concurrence_scan,
    "pulse-sim": cmd_pulse_sim,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--molecule", default="CH3CN")
    common.add_argument("--registry", help="extra molecule registry file")
    common.add_argument("--field-v-cm", type=float, default=500.0, help="field at site 1 (V/cm)")
    common.add_argument(
        "--dfield-v-cm",
        type=float,
        default=None,
        help="field difference eps' - eps (V/cm); default gives delta_x = 1e-3",
    )
    common.add_argument("--spacing-um", type=float, default=0.5)
    common.add_argument("--alpha-deg", type=float, default=90.0)
    common.add_argument("--type", choices=["I", "II"], default=None, help="qubit encoding (default: both)")
    common.add_argument("--no-quadrupole", action="store_true")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=["csv", "json"], default="csv")

    p = argparse.ArgumentParser(prog="stql", description="Symmetric-top molecules as rotational qubits.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("molecule", parents=[common], help="look up molecule constants")
    s.add_argument("--list", action="store_true", help="print the whole registry")
    sub.add_parser("reduced", parents=[common], help="reduced variables x, y, z, w")
    s = sub.add_parser("stark-map", parents=[common], help="first-order Stark levels against x")
    s.add_argument("--x-max", type=float, default=1.0)
    s.add_argument("--points", type=int, default=101)
    s.add_argument("--J", type=int, nargs="+", default=[1, 2])
    s = sub.add_parser("cosines", parents=[common], help="quadrupole-dressed cosine elements")
    s.add_argument("--refit", action="store_true", help="quadratic refit over w in (0, 1)")
    s.add_argument("--refit-sign", type=float, default=1.0, help="sign of eqQ used for the refit")
    sub.add_parser("pair", parents=[common], help="two-dipole eigensystem")
    sub.add_parser("frequencies", parents=[common], help="transition frequencies and delta-omega")
    s = sub.add_parser("concurrence-scan", parents=[common], help="middle-pair concurrence scan")
    s.add_argument("--ratio-min", type=float, default=1e-2)
    s.add_argument("--ratio-max", type=float, default=1e2)
    s.add_argument("--points", type=int, default=41)
    s = sub.add_parser("pulse-sim", parents=[common], help="pulse sequences and the precession CNOT")
    s.add_argument("--sequence", default="", help="e.g. 'pi2@w1,pi@w2' or 'pi2@site1,free@27us,pi2@site1'")
    s.add_argument("--cnot", action="store_true", help="precession CNOT truth table")
    s.add_argument("--free-time-us", type=float, default=None, help="CNOT wait (default 1/(2 dw))")
    sub.add_parser("verify", parents=[common], help="refit published constants, exit 1 on any failure")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    eps_prime = None if args.dfield_v_cm is None else args.field_v_cm + args.dfield_v_cm
    cfg = RunConfig(
        molecule=args.molecule,
        eps=args.field_v_cm,
        eps_prime=eps_prime,
        r12=args.spacing_um,
        alpha=args.alpha_deg,
        encoding=args.type,
        output=args.out,
        format=args.format,
        registry=args.registry,
        use_quadrupole=not args.no_quadrupole,
    )
    try:
        rows = COMMANDS[args.command](cfg, args)
        emit(rows, cfg)
    except CliError as exc:
        print(f"stql: error: {exc}", file=sys.stderr)
        return exc.code
    except (ValueError, OSError) as exc:
        print(f"stql: error: {exc}", file=sys.stderr)
        return 2
    if args.command == "verify" and any(r["status"] == "FAIL" for r in rows):
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
