"""Command-line front end.

Exit codes: 0 success, 1 user error (I/O, syntax, typing, bad input),
2 internal invariant violation (deadlock, step budget, machine/oracle
disagreement).
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import syntax as S
from .errors import MachineError, QLambdaError
from .generate import TermGenerator
from .machine import SCHEDULERS, TokenMachine, canonical_circuit, trace_record
from .mll import pretty_sequent, sequent_of
from .oracle import oracle_vector
from .quantum import DEFAULT_GATES, basis, load_gate_config, register_to_json
from .typecheck import infer

AGREEMENT_TOL = 1e-9


class UserError(Exception):
    pass


@dataclass
class RunReport:
    term: str
    type: str
    derivation_size: int
    circuit: list
    sigma: list
    register: list
    oracle_register: list | None = None
    agreement: bool | None = None
    max_deviation: float | None = None
    steps: int = 0


def _amp(z: complex):
    re, im = float(z.real), float(z.imag)
    if im == 0:
        return int(re) if re == int(re) else re
    return [re, im]


def format_register(q) -> str:
    return json.dumps([_amp(a) for a in q])


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load(args):
    gates = load_gate_config(args.gates) if getattr(args, "gates", None) else DEFAULT_GATES
    text = _read(args.file)
    if not text.strip():
        raise S.ParseError("empty input")
    term = S.parse_term(text)
    env = S.parse_env(args.env) if getattr(args, "env", None) else []
    return term, env, gates


def cmd_check(args, out) -> int:
    term, env, gates = _load(args)
    pi = infer(env, term, gates)
    if args.json:
        print(json.dumps(pi.to_json()), file=out)
    else:
        print(S.pretty_type(pi.type), file=out)
    return 0


def cmd_mll(args, out) -> int:
    term, env, gates = _load(args)
    pi = infer(env, term, gates)
    print(pretty_sequent(sequent_of(pi)), file=out)
    return 0


def _oracle_term(term, pi, input_bits):
    """Closed ground term to normalise, or None if the oracle does not apply."""
    if S.ground_arity(pi.type) is not None and not input_bits:
        return term
    t = pi.type
    if isinstance(t, S.Arrow) and S.ground_arity(t.dom) is not None and S.ground_arity(t.cod) is not None:
        used = set(S.bit_labels(term))
        labels, nxt = [], 1
        for _ in input_bits:
            while nxt in used:
                nxt += 1
            labels.append(nxt)
            used.add(nxt)
        arg = S.tuple_term([S.BitConst(int(b), l) for b, l in zip(input_bits, labels)])
        return S.App(term, arg)
    return None


def cmd_run(args, out) -> int:
    term, env, gates = _load(args)
    if env:
        raise UserError("run needs a closed term")
    pi = infer((), term, gates)
    machine = TokenMachine(pi, gates)
    bits = args.input or ""
    if len(bits) != machine.input_arity:
        raise UserError(f"term has input arity {machine.input_arity}, --input gave {len(bits)} bits")
    q = basis(bits)
    scheduler = SCHEDULERS[args.scheduler]

    def on_step(n, move, prev, s):
        if args.trace:
            print(json.dumps(trace_record(n, move, s)), file=out)

    info = machine.run(machine.initial_state(q), scheduler, on_step)
    circuit, _ = canonical_circuit(machine)
    report = RunReport(
        term=S.pretty(term), type=S.pretty_type(pi.type), derivation_size=pi.size(),
        circuit=circuit, sigma=info.sigma, register=register_to_json(info.register), steps=info.steps,
    )
    oracle_term = _oracle_term(term, pi, bits)
    if oracle_term is not None:
        expected = oracle_vector(oracle_term, gates)
        dev = float(np.max(np.abs(expected - info.register)))
        report.oracle_register = register_to_json(expected)
        report.max_deviation = dev
        report.agreement = dev <= AGREEMENT_TOL
    if args.json:
        print(json.dumps(asdict(report)), file=out)
    else:
        print(f"type: {report.type}", file=out)
        print(f"register: {format_register(info.register)}", file=out)
        gates_txt = " ".join(f"{c['gate']}{c['targets']}" for c in circuit) or "(none)"
        print(f"circuit: {gates_txt}", file=out)
        if report.agreement is not None:
            verdict = "agree" if report.agreement else "DISAGREE"
            print(f"oracle: {verdict} (max deviation {report.max_deviation:.3g})", file=out)
    return 0 if report.agreement in (None, True) else 2


def cmd_extract(args, out) -> int:
    term, env, gates = _load(args)
    if env:
        raise UserError("extract needs a closed term")
    pi = infer((), term, gates)
    circuit, wiring = canonical_circuit(TokenMachine(pi, gates))
    print(json.dumps(circuit), file=out)
    if args.wiring:
        print(json.dumps({"wiring": wiring}), file=out)
    return 0


def cmd_validate(args, out) -> int:
    gen = TermGenerator(args.seed)
    start = time.perf_counter()
    worst, failures = 0.0, 0
    for _ in range(args.count):
        term = gen.ground(args.max_qubits, args.max_gates)
        pi = infer((), term)
        info = TokenMachine(pi).run(TokenMachine(pi).initial_state())
        dev = float(np.max(np.abs(oracle_vector(term) - info.register)))
        worst = max(worst, dev)
        if dev > AGREEMENT_TOL:
            failures += 1
            print(json.dumps({"term": S.pretty(term), "deviation": dev}), file=out)
    print(json.dumps({"checked": args.count, "failures": failures, "max_deviation": worst,
                      "seconds": round(time.perf_counter() - start, 3)}), file=out)
    return 0 if failures == 0 else 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qlambda", description="Quantum lambda calculus token machine")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, env=False):
        sp.add_argument("file", help="term file, or - for stdin")
        sp.add_argument("--gates", help="JSON file with extra gate matrices")
        if env:
            sp.add_argument("--env", help="typing environment, e.g. 'x:B, f:B -o B'")

    sp = sub.add_parser("check", help="type-check a term")
    common(sp, env=True)
    sp.add_argument("--json", action="store_true", help="print the derivation tree as JSON")
    sp.set_defaults(func=cmd_check)

    for name, trace in (("run", False), ("trace", True)):
        sp = sub.add_parser(name, help="run the token machine" + (" and print the trace" if trace else ""))
        common(sp)
        sp.add_argument("--input", help="input basis state as a bit string")
        sp.add_argument("--trace", action="store_true", default=trace, help="print one JSON line per step")
        sp.add_argument("--json", action="store_true", help="print the run report as JSON")
        sp.add_argument("--scheduler", choices=sorted(SCHEDULERS), default="lowest")
        sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("extract", help="print the circuit of a derivation as JSON")
    common(sp)
    sp.add_argument("--wiring", action="store_true", help="also print the input-to-wire map")
    sp.set_defaults(func=cmd_extract)

    sp = sub.add_parser("mll", help="print the MLL sequent of a judgement")
    common(sp, env=True)
    sp.set_defaults(func=cmd_mll)

    sp = sub.add_parser("validate", help="cross-check machine and oracle on random terms")
    sp.add_argument("--count", type=int, default=200)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--max-qubits", type=int, default=6)
    sp.add_argument("--max-gates", type=int, default=8)
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except MachineError as exc:
        print(f"internal error: {exc}", file=err)
        return 2
    except (QLambdaError, UserError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=err)
        return 1


if __name__ == "__main__":
    sys.exit(main())
