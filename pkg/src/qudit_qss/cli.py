"""Command-line entry point: ``qss run | attack | compare | verify-mubs``.

Exit codes: 0 clean, 2 corrupt verdict, 3 configuration error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional

from . import analysis, transcript
from .adversary import AdversaryConfig, evaluate_attack
from .mub import check_dimension, verify_mubs
from .protocol import ProtocolConfig, run_session

EXIT_OK = 0
EXIT_FAILED_CHECK = 1
EXIT_CORRUPT = 2
EXIT_CONFIG = 3
EXIT_IO = 4

log = logging.getLogger("qudit_qss")


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse's own exit code 2 would collide with "corrupt"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


# key -> (type, default); file keys use these names, flags the dashed form
RUN_KEYS = {
    "d": (int, 3),
    "recipients": (int, 2),
    "rounds": (int, 10000),
    "seed": (int, None),
    "check_fraction": (float, 0.1),
    "threshold": (float, 0.0),
    "link_noise": (float, 0.0),
    "out": (str, "."),
    "format": (str, "jsonl"),
}


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def merge_settings(args: argparse.Namespace, keys: dict) -> dict:
    file_values = read_config_file(args.config) if getattr(args, "config", None) else {}
    unknown = set(file_values) - set(keys)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    merged = {}
    for key, (kind, default) in keys.items():
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
        elif key in file_values:
            try:
                merged[key] = kind(file_values[key])
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {file_values[key]!r}") from exc
        else:
            merged[key] = default
    if "seed" in merged and merged["seed"] is None:
        env = os.environ.get("QSS_SEED")
        try:
            merged["seed"] = int(env) if env is not None else 0
        except ValueError as exc:
            raise ConfigError(f"QSS_SEED is not an integer: {env!r}") from exc
    if merged.get("format", "jsonl") not in ("jsonl", "csv"):
        raise ConfigError("format must be jsonl or csv")
    return merged


def _validate_d(d: int) -> int:
    try:
        return check_dimension(d)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _outdir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise OSError(f"output directory {out} is not writable")
    return out


def _write_rows(rows, path: Path, fmt: str) -> None:
    with path.open("w") as fh:
        if fmt == "csv":
            analysis.write_summary_csv(rows, fh)
        else:
            for r in rows:
                fh.write(json.dumps(r.__dict__, separators=(",", ":")) + "\n")


def cmd_run(args) -> int:
    s = merge_settings(args, RUN_KEYS)
    d = _validate_d(s["d"])
    try:
        config = ProtocolConfig(
            d=d,
            n_recipients=s["recipients"],
            n_rounds=s["rounds"],
            check_fraction=s["check_fraction"],
            corruption_threshold=s["threshold"],
            seed=s["seed"],
            link_noise=s["link_noise"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    log.info("running %d rounds, d=%d, N=%d, seed=%d", config.n_rounds, d, config.n_recipients, config.seed)
    t = run_session(config)
    out = _outdir(s["out"])
    for view in transcript.VIEWS:
        with (out / f"transcript_{view}.jsonl").open("w") as fh:
            transcript.write_transcript(t, fh, view)
    _write_rows(analysis.aggregate([t]), out / f"summary.{s['format']}", s["format"])
    print(f"verdict: {t.verdict}")
    print(f"valid-round rate: {t.valid_fraction:.5f} ({t.n_valid}/{len(t.rounds)}; ideal 1/d = {1 / d:.5f})")
    print(f"check rounds: {t.n_checks}, violation rate: {t.observed_violation_rate:.5f}")
    return EXIT_CORRUPT if t.verdict == "corrupt" else EXIT_OK


ATTACK_KEYS = {
    "kind": (str, None),
    "d": (int, 3),
    "recipients": (int, 2),
    "rounds": (int, 30000),
    "seed": (int, None),
    "link": (int, None),
    "basis": (str, "uniform"),
    "num_check": (float, 0.0),
    "check_fraction": (float, 1.0),
    "threshold": (float, 0.0),
    "out": (str, "."),
    "format": (str, "jsonl"),
}


def cmd_attack(args) -> int:
    s = merge_settings(args, ATTACK_KEYS)
    d = _validate_d(s["d"])
    if s["kind"] is None:
        raise ConfigError("--kind is required")
    kind = s["kind"].replace("-", "_")
    link = s["link"]
    if link is None:
        link = 2 if kind == "multi_pulse" else 1
    basis = s["basis"] if s["basis"] == "uniform" else None
    if basis is None:
        try:
            basis = int(s["basis"])
        except ValueError as exc:
            raise ConfigError("--basis must be 'uniform' or an integer") from exc
    try:
        adv = AdversaryConfig(kind, link, basis, s["num_check"], seed=s["seed"] + 1)
        adv.validate_for(s["recipients"])
        config = ProtocolConfig(
            d=d,
            n_recipients=s["recipients"],
            n_rounds=s["rounds"],
            check_fraction=s["check_fraction"],
            corruption_threshold=s["threshold"],
            seed=s["seed"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    report, _ = evaluate_attack(config, adv)
    out = _outdir(s["out"])
    path = out / f"attack_report.{s['format']}"
    row = report.as_row()
    with path.open("w") as fh:
        if s["format"] == "csv":
            fh.write(",".join(row) + "\n")
            fh.write(",".join(str(v) for v in row.values()) + "\n")
        else:
            fh.write(json.dumps(row, separators=(",", ":")) + "\n")
    print(
        f"{report.kind} on link {report.link}: guess_rate={report.eve_guess_correct_rate:.4f} "
        f"detection_rate={report.detection_rate:.4f} [{report.ci_low:.4f}, {report.ci_high:.4f}] "
        f"({report.detection_samples} samples) detected={report.detected}"
    )
    return EXIT_OK


def _print_mub_report(ds) -> bool:
    ok = True
    for d in ds:
        d = _validate_d(d)
        for name, (passed, detail) in verify_mubs(d).items():
            ok &= passed
            print(f"d={d} {name}: {'PASS' if passed else 'FAIL'} ({detail})")
    return ok


def cmd_compare(args) -> int:
    if args.verify_mubs:
        return EXIT_OK if _print_mub_report(args.d) else EXIT_FAILED_CHECK
    rows = []
    try:
        for N in args.N:
            for d in args.d:
                for p in args.p:
                    for eta in args.eta:
                        rows.extend(analysis.comparison_rows(N, d, p, eta))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if args.out:
        with open(args.out, "w") as fh:
            analysis.write_summary_csv(rows, fh)
    else:
        analysis.write_summary_csv(rows, sys.stdout)
    return EXIT_OK


def cmd_verify_mubs(args) -> int:
    return EXIT_OK if _print_mub_report(args.d) else EXIT_FAILED_CHECK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qss", description="Single-qudit secret sharing simulator")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", help="flat key = value file; flags override it")
        p.add_argument("--d", type=int, help="odd prime dimension")
        p.add_argument("--recipients", type=int, help="number of recipients N")
        p.add_argument("--rounds", type=int)
        p.add_argument("--seed", type=int, help="falls back to $QSS_SEED, then 0")
        p.add_argument("--check-fraction", dest="check_fraction", type=float)
        p.add_argument("--threshold", type=float, help="corruption threshold on the violation rate")
        p.add_argument("--out", help="output directory")
        p.add_argument("--format", choices=("jsonl", "csv"))

    run = sub.add_parser("run", help="run an honest session and write transcripts")
    common(run)
    run.add_argument("--link-noise", dest="link_noise", type=float)
    run.set_defaults(func=cmd_run)

    attack = sub.add_parser("attack", help="run a session under attack and report detection")
    common(attack)
    attack.add_argument("--kind", choices=("intercept-resend", "substitute-qudit", "multi-pulse"))
    attack.add_argument("--link", type=int)
    attack.add_argument("--basis", help="'uniform' or a fixed basis index for intercept-resend")
    attack.add_argument("--num-check", dest="num_check", type=float,
                        help="particle-number check probability (multi-pulse)")
    attack.set_defaults(func=cmd_attack)

    compare = sub.add_parser("compare", help="tabulate QKD/GHZ/single-qudit efficiency")
    compare.add_argument("--N", type=int, nargs="+", default=[10])
    compare.add_argument("--d", type=int, nargs="+", default=[23])
    compare.add_argument("--p", type=float, nargs="+", default=[0.8])
    compare.add_argument("--eta", type=float, nargs="+", default=[1.0])
    compare.add_argument("--out", help="CSV path (default stdout)")
    compare.add_argument("--verify-mubs", action="store_true",
                         help="instead run the exhaustive MUB checks for each --d")
    compare.set_defaults(func=cmd_compare)

    vm = sub.add_parser("verify-mubs", help="exhaustive MUB and cyclic-gate checks")
    vm.add_argument("--d", type=int, nargs="+", default=[3, 5, 7, 11, 13])
    vm.set_defaults(func=cmd_verify_mubs)
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"qss: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"qss: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
