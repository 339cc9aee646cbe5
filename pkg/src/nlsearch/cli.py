"""Command-line front end: ``nlsearch {algo1,algo2,verify,sweep} [options]``.

Exit codes: 0 success, 1 a check failed, 2 bad configuration,
3 numerical failure (singular coefficient or step too coarse).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import NLSearchError
from .harness import ExperimentConfig, run_algo1, run_algo2, run_sweep, run_verify
from .harness.config import SWEEPABLE
from .harness.output import to_csv, to_json
from .nonlinear import MODELS

log = logging.getLogger("nlsearch")

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class _ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _ConfigError(message)


def _values(text: str):
    return [v for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--n", default="3", help="input qubits (1..20); comma list to sweep")
    common.add_argument("--oracle-hex", help="truth table, bit idx of the hex number = f(idx)")
    common.add_argument("--s", default="1", help="marked inputs for a random oracle; comma list to sweep")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--model", choices=sorted(MODELS), default=None)
    common.add_argument("--eps", default="1.0")
    common.add_argument("--eta", default="0.01")
    common.add_argument("--alpha", default="1000")
    common.add_argument("--t-final", type=float)
    common.add_argument("--dt", type=float)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", type=Path, help="output file (default stdout)")
    common.add_argument("--allow-any-s", action="store_true")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="nlsearch", description="Nonlinear quantum search simulator")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)
    sub.add_parser("algo1", parents=[common], help="linear stage + nonlinear flag amplification")
    p2 = sub.add_parser("algo2", parents=[common], help="second algorithm (continuous or scan)")
    p2.add_argument("--mode", choices=("continuous", "discrete"), default="continuous")
    pv = sub.add_parser("verify", parents=[common], help="run the self-check suite")
    pv.add_argument("--only", action="append", help="run only the named check (repeatable)")
    ps = sub.add_parser("sweep", parents=[common], help="sweep one of --n/--s/--eps/--eta/--alpha")
    ps.add_argument("--jobs", type=int, default=1)
    return parser


def config_from_args(args) -> ExperimentConfig:
    raw = {k: _values(getattr(args, k)) for k in SWEEPABLE}
    swept = [k for k, v in raw.items() if len(v) > 1]
    if args.verb != "sweep" and swept:
        raise _ConfigError(f"comma lists are only allowed with 'sweep' (got {swept})")
    if args.verb == "sweep" and len(swept) != 1:
        raise _ConfigError(f"sweep needs exactly one axis with several values, got {swept or 'none'}")
    casts = {"n": int, "s": int, "eps": float, "eta": float, "alpha": float}
    try:
        parsed = {k: [casts[k](x) for x in v] for k, v in raw.items()}
    except ValueError as exc:
        raise _ConfigError(str(exc)) from None
    mode = {"algo1": "algo1", "verify": "verify", "sweep": "sweep"}.get(args.verb)
    if args.verb == "algo2":
        mode = f"algo2-{args.mode}"
    model = args.model or ("alpha" if args.verb == "algo2" else "gated")
    scalars = {k: v[0] for k, v in parsed.items()}
    return ExperimentConfig(
        n=scalars["n"],
        oracle_hex=args.oracle_hex,
        s=scalars["s"],
        seed=args.seed,
        model=model,
        eps=scalars["eps"],
        eta=scalars["eta"],
        alpha=scalars["alpha"],
        t_final=args.t_final,
        dt=args.dt,
        format=args.format,
        mode=mode,
        allow_any_s=args.allow_any_s,
        sweep_axis=swept[0] if swept else None,
        sweep_values=tuple(parsed[swept[0]]) if swept else (),
    ).validate()


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        out.write_text(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(message)s")
        config = config_from_args(args)
        if args.verb == "verify":
            records = run_verify(config, only=args.only)
            for r in records:
                status = "PASS" if r.passed else "FAIL"
                print(f"[{status}] {r.name}: deviation {r.deviation:.3g} (tol {r.tolerance:g}, "
                      f"{r.seconds:.2f}s) {r.detail}", file=sys.stderr)
            failed = not all(r.passed for r in records)
        else:
            if args.verb == "sweep":
                records = run_sweep(config, jobs=args.jobs)
            elif args.verb == "algo1":
                records = [run_algo1(config)]
            else:
                records = [run_algo2(config)]
            failed = not all(r.passed for r in records)
            for r in records:
                if not r.passed:
                    log.warning("record n=%s s=%s failed checks: %s", r.n, r.s,
                                [k for k, ok in r.checks.items() if not ok])
        text = to_json(config.echo(), records) if config.format == "json" else to_csv(records)
        _emit(text, args.out)
        return EXIT_FAILED if failed else EXIT_OK
    except _ConfigError as exc:
        print(f"nlsearch: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NLSearchError as exc:
        print(f"nlsearch: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
