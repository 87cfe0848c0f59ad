"""Command-line front end: ``smolinqss {run,bellscan,verify}``.

Exit codes: 0 success (Secure verdict and matching keys for ``run``),
2 Insecure or inconclusive verdict, 1 any error.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import config as configmod
from .adversary import eve_key_knowledge
from .belltest import DEFAULT_K, Verdict, chsh4_exact, violation_threshold_check
from .errors import ConfigError, QSSError
from .protocol import SecurityReport, run_session
from .qstate import depolarize, smolin_state
from .verify import run_all

EXIT_OK, EXIT_ERROR, EXIT_INSECURE = 0, 1, 2
TWO_SQRT2 = 2.0 * math.sqrt(2.0)


@dataclass(frozen=True)
class RunReport:
    config: dict
    security: SecurityReport
    alice_key_bits: int
    bc_key_bits: int
    keys_agree: bool
    eve_knowledge: float
    transcript_sha256: str
    seed: int
    elapsed_s: float | None = None

    def fields(self) -> list[tuple[str, str]]:
        s = self.security
        rows = [("config." + k, str(v)) for k, v in self.config.items()]
        rows += [
            ("seed", str(self.seed)),
            ("bell_value", f"{s.value:.6f}"),
            ("std_error", f"{s.std_error:.6f}"),
            ("check_samples", str(s.sample_count)),
            ("term_counts", ",".join(map(str, s.term_counts))),
            ("verdict_k", f"{s.confidence_k:g}"),
            ("verdict", s.verdict.value),
            ("alice_key_bits", str(self.alice_key_bits)),
            ("bc_key_bits", str(self.bc_key_bits)),
            ("keys_agree", "true" if self.keys_agree else "false"),
            ("eve_knowledge", f"{self.eve_knowledge:.4f}"),
            ("transcript_sha256", self.transcript_sha256),
        ]
        if self.elapsed_s is not None:
            rows.append(("elapsed_s", f"{self.elapsed_s:.3f}"))
        return rows

    def render(self, fmt: str) -> str:
        rows = self.fields()
        if fmt == "records":
            return "".join(f"{i}\treport\tsystem\tfield\t{k}={v}\n" for i, (k, v) in enumerate(rows))
        width = max(len(k) for k, _ in rows)
        return "".join(f"{k.ljust(width)}  {v}\n" for k, v in rows)


class _Parser(argparse.ArgumentParser):
    # argparse's default status 2 would read as an Insecure verdict.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _add_session_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="flat key = value config file")
    p.add_argument("--seed", metavar="U64")
    p.add_argument("--copies", metavar="N")
    p.add_argument("--check-fraction", metavar="F")
    p.add_argument("--attack", choices=["none", "clone", "bell-resend"])
    p.add_argument("--p", metavar="F", help="surviving Smolin fraction under the clone attack")
    p.add_argument("--attack-probability", metavar="F", help="per-copy probability that Eve attacks")
    p.add_argument("--allow-weak-clone", metavar="BOOL", help="permit clone attacks with p > 2/3")
    p.add_argument("--verdict-k", metavar="F")
    p.add_argument("--schedule", metavar="NAME", help="random or round-robin")


def _add_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=["table", "records"], default="table")
    p.add_argument("--out", metavar="DIR", help="write report and artefacts to DIR")
    p.add_argument("--no-timing", action="store_true", help="omit timing fields")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="smolinqss", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run one secret-sharing session")
    _add_session_flags(run)
    _add_output_flags(run)

    scan = sub.add_parser("bellscan", help="exact four-qubit Bell value over a noise grid")
    scan.add_argument("--p-min", type=float, default=0.0)
    scan.add_argument("--p-max", type=float, default=1.0)
    scan.add_argument("--steps", type=int, default=11)
    scan.add_argument("--include-boundary", action="store_true", help="add the point p = 1/sqrt(2)")
    scan.add_argument("--verdict-k", type=float, default=DEFAULT_K)
    _add_output_flags(scan)

    ver = sub.add_parser("verify", help="run the exact-algebra property suite")
    ver.add_argument("--format", choices=["table", "records"], default="table")
    return parser


def _write_out(out: str | None, files: dict[str, str]) -> None:
    if not out:
        return
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (d / name).write_text(text, encoding="utf-8")


def cmd_run(args: argparse.Namespace) -> int:
    overrides = {
        k: getattr(args, k)
        for k in ("seed", "copies", "check_fraction", "attack", "p",
                  "attack_probability", "allow_weak_clone", "verdict_k", "schedule")
    }
    try:
        values = configmod.load(args.config, overrides)
        cfg = configmod.to_session_config(values)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    start = time.perf_counter()
    result = run_session(cfg)
    elapsed = None if args.no_timing else time.perf_counter() - start

    agree = result.alice_key == result.bc_key
    report = RunReport(
        config={k: values[k] for k in configmod.DEFAULTS},
        security=result.report,
        alice_key_bits=len(result.alice_key),
        bc_key_bits=len(result.bc_key),
        keys_agree=agree,
        eve_knowledge=eve_key_knowledge(cfg.attack, result),
        transcript_sha256=result.transcript.digest(),
        seed=cfg.master_seed,
        elapsed_s=elapsed,
    )
    text = report.render(args.format)
    sys.stdout.write(text)
    _write_out(args.out, {
        "transcript.log": result.transcript.dumps(),
        "alice.key": result.alice_key.to_hex() + "\n",
        "bc.key": result.bc_key.to_hex() + "\n",
        "report.txt": text,
    })

    if result.report.verdict is not Verdict.SECURE:
        return EXIT_INSECURE
    if not agree:
        print("error: Secure verdict but Alice's key and Bob+Charlie's key differ", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


def bellscan_rows(p_min: float, p_max: float, steps: int, include_boundary: bool = False,
                  k: float = DEFAULT_K) -> list[tuple[float, float, float, Verdict]]:
    if not (0.0 <= p_min <= p_max <= 1.0) or steps < 2:
        raise ValueError("need 0 <= p_min <= p_max <= 1 and steps >= 2")
    grid = [p_min + (p_max - p_min) * i / (steps - 1) for i in range(steps)]
    boundary = 1.0 / math.sqrt(2.0)
    if include_boundary and p_min <= boundary <= p_max and boundary not in grid:
        grid = sorted(grid + [boundary])
    rho = smolin_state()
    rows = []
    for p in grid:
        res = chsh4_exact(depolarize(rho, p))
        rows.append((p, res.value, res.value / TWO_SQRT2, violation_threshold_check(res, k)))
    return rows


def cmd_bellscan(args: argparse.Namespace) -> int:
    try:
        rows = bellscan_rows(args.p_min, args.p_max, args.steps, args.include_boundary, args.verdict_k)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if args.format == "records":
        text = "".join(
            f"{i}\tbellscan\tsystem\trow\tp={p!r} value={v!r} ratio={r!r} verdict={vd.value}\n"
            for i, (p, v, r, vd) in enumerate(rows)
        )
    else:
        text = f"{'p':>10}  {'value':>10}  {'value/2sqrt2':>12}  verdict\n"
        text += "".join(f"{p:10.6f}  {v:10.6f}  {r:12.6f}  {vd.value}\n" for p, v, r, vd in rows)
    sys.stdout.write(text)
    _write_out(args.out, {"bellscan.txt": text})
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    results = run_all()
    for i, r in enumerate(results):
        status = "PASS" if r.passed else "FAIL"
        if args.format == "records":
            print(f"{i}\tverify\tsystem\t{status.lower()}\tname={r.name} detail={r.detail!r}")
        else:
            print(f"{status}  {r.name}: {r.detail}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_ERROR


COMMANDS = {"run": cmd_run, "bellscan": cmd_bellscan, "verify": cmd_verify}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except QSSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
