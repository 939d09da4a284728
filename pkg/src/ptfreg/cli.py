"""Command-line front end: ``ptfreg {decompose,approximate,verify,ensemble}``.

Structured output (``--format jsonl``) is one JSON object per line. The
first line is a header carrying the only timestamp plus the full run
configuration and constants, so reruns differ in that one field alone.

Exit status: 0 when the command's success criterion holds, 1 when it does
not, 2 for invalid input, 3 for resource limits.
"""
from __future__ import annotations

import argparse
import dataclasses
import datetime as _dt
import json
import sys
from typing import Optional, Sequence

import numpy as np

from .battery import BATTERY, run_battery
from .checks import ensemble_experiment
from .constants import TheoryConstants
from .errors import InvalidInputError, PTFError, ResourceLimitError
from .lowweight import approximate
from .poly import MultilinearPolynomial, load_polynomial, random_polynomial
from .tree import build_tree, path_mass

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_RESOURCE = 0, 1, 2, 3


@dataclasses.dataclass(frozen=True)
class RunConfig:
    command: str
    input: Optional[str] = None
    generate: Optional[str] = None
    tau: Optional[float] = None
    epsilon: Optional[float] = None
    degree: Optional[int] = None
    M: Optional[int] = None
    n: Optional[int] = None
    d: Optional[int] = None
    const: tuple = ()
    checks: tuple = ()
    format: str = "jsonl"
    out: Optional[str] = None
    seed: int = 0

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["const"] = [list(kv) for kv in self.const]
        out["checks"] = list(self.checks)
        return out

    def constants(self) -> TheoryConstants:
        return TheoryConstants.from_overrides(dict(self.const))


def _parse_const(text: str) -> tuple[str, str]:
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    return name.strip(), value.strip()


def _parse_generate(spec: str) -> tuple[int, int, int]:
    try:
        n, d, seed = (int(x) for x in spec.split(":"))
    except ValueError as exc:
        raise InvalidInputError(f"--generate expects n:d:seed, got {spec!r}") from exc
    if not 1 <= d <= n:
        raise InvalidInputError("--generate needs 1 <= d <= n")
    return n, d, seed


def load_input(cfg: RunConfig) -> MultilinearPolynomial:
    if (cfg.input is None) == (cfg.generate is None):
        raise InvalidInputError("give exactly one of --input or --generate")
    if cfg.generate is not None:
        n, d, seed = _parse_generate(cfg.generate)
        return random_polynomial(n, d, seed)
    try:
        with open(cfg.input, encoding="utf-8") as fp:
            return load_polynomial(fp)
    except OSError as exc:
        raise InvalidInputError(f"cannot read {cfg.input}: {exc}") from exc


def _jsonable(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serialisable: {type(obj).__name__}")


def cmd_decompose(cfg: RunConfig) -> tuple[int, list[dict]]:
    if cfg.tau is None:
        raise InvalidInputError("decompose needs --tau")
    constants = cfg.constants()
    p = load_input(cfg)
    tree = build_tree(p, cfg.tau, constants, degree=cfg.degree)
    report = path_mass(tree)
    ok = report.good_mass >= 1.0 - cfg.tau
    records = [
        {"record": "tree", **tree.to_dict()},
        {"record": "path_mass", **report.to_dict(), "depth": tree.depth},
        {"record": "summary", "command": "decompose", "success": ok,
         "good_mass": report.good_mass, "threshold": 1.0 - cfg.tau},
    ]
    return (EXIT_OK if ok else EXIT_FAIL), records


def cmd_approximate(cfg: RunConfig) -> tuple[int, list[dict]]:
    if cfg.epsilon is None:
        raise InvalidInputError("approximate needs --epsilon")
    if not 0 < cfg.epsilon < 1:
        raise InvalidInputError(f"epsilon must lie in (0, 1), got {cfg.epsilon}")
    constants = cfg.constants()
    p = load_input(cfg)
    cert = approximate(p, cfg.epsilon, constants)
    records = [
        {"record": "certificate", **cert.to_dict()},
        {"record": "path_mass", **path_mass(cert.tree).to_dict()},
        {"record": "summary", "command": "approximate", "success": cert.certified,
         "distance": cert.distance, "epsilon": cfg.epsilon},
    ]
    return (EXIT_OK if cert.certified else EXIT_FAIL), records


def cmd_verify(cfg: RunConfig) -> tuple[int, list[dict]]:
    constants = cfg.constants()
    reports = run_battery(cfg.checks or None, seed=cfg.seed, constants=constants)
    failed = [r.name for r in reports if r.failed]
    records = [{"record": "check", **r.to_dict()} for r in reports]
    if len(records) > 1:
        records.append({"record": "summary", "command": "verify", "success": not failed,
                        "failed": failed, "constants": constants.to_dict()})
    return (EXIT_FAIL if failed else EXIT_OK), records


def cmd_ensemble(cfg: RunConfig) -> tuple[int, list[dict]]:
    if None in (cfg.M, cfg.n, cfg.d):
        raise InvalidInputError("ensemble needs --M, --n and --d")
    constants = cfg.constants()
    result = ensemble_experiment(cfg.M, cfg.n, cfg.d, cfg.seed, constants)
    min_d = result.min_distance
    ok = min_d is None or min_d > 0
    records = [
        {"record": "ensemble", **result.to_dict()},
        {"record": "summary", "command": "ensemble", "success": ok, "min_distance": min_d},
    ]
    return (EXIT_OK if ok else EXIT_FAIL), records


COMMANDS = {
    "decompose": cmd_decompose,
    "approximate": cmd_approximate,
    "verify": cmd_verify,
    "ensemble": cmd_ensemble,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--const", action="append", type=_parse_const, default=[],
                        metavar="NAME=VALUE", help="override a theory constant (repeatable)")
    common.add_argument("--seed", type=int, default=0, help="master seed")
    common.add_argument("--format", choices=("human", "jsonl"), default="jsonl")
    common.add_argument("--out", help="write records here instead of stdout")

    source = argparse.ArgumentParser(add_help=False)
    source.add_argument("--input", help="polynomial JSON file")
    source.add_argument("--generate", metavar="n:d:seed",
                        help="random Gaussian-coefficient polynomial")
    source.add_argument("--degree", type=int, help="degree used for parameters (default: actual)")

    parser = argparse.ArgumentParser(prog="ptfreg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    dec = sub.add_parser("decompose", parents=[common, source], help="grow the regularity tree")
    dec.add_argument("--tau", type=float, required=True)
    app = sub.add_parser("approximate", parents=[common, source], help="build a low-weight approximator")
    app.add_argument("--epsilon", type=float, required=True)
    ver = sub.add_parser("verify", parents=[common], help="run the check battery")
    ver.add_argument("--check", action="append", default=[], choices=sorted(BATTERY),
                     help="run only this check (repeatable)")
    ens = sub.add_parser("ensemble", parents=[common], help="pairwise distances of random PTFs")
    ens.add_argument("--M", type=int, required=True)
    ens.add_argument("--n", type=int, required=True)
    ens.add_argument("--d", type=int, required=True)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        input=getattr(args, "input", None),
        generate=getattr(args, "generate", None),
        tau=getattr(args, "tau", None),
        epsilon=getattr(args, "epsilon", None),
        degree=getattr(args, "degree", None),
        M=getattr(args, "M", None),
        n=getattr(args, "n", None),
        d=getattr(args, "d", None),
        const=tuple(args.const),
        checks=tuple(getattr(args, "check", ())),
        format=args.format,
        out=args.out,
        seed=args.seed,
    )


def header_record(cfg: RunConfig, constants: Optional[TheoryConstants]) -> dict:
    return {"record": "header",
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            "config": cfg.to_dict(),
            "constants": constants.to_dict() if constants else None}


def render_jsonl(records: Sequence[dict]) -> str:
    return "".join(json.dumps(r, sort_keys=True, default=_jsonable) + "\n" for r in records)


def render_human(records: Sequence[dict]) -> str:
    lines = []
    for rec in records:
        kind = rec.get("record")
        if kind == "header":
            lines.append(f"# {rec['config']['command']} at {rec['timestamp']}")
        elif kind == "check":
            lines.append(f"{rec['check']:<26} {rec['status']:<5} measured={rec['measured']} "
                         f"bound={rec['bound']}")
        elif kind == "tree":
            lines.append(f"tree over n={rec['n']} variables")
        elif kind == "path_mass":
            lines.append(f"good mass {rec['good_mass']:.6g}; counts {rec['counts']}; "
                         f"max depth {rec['max_depth']}")
        elif kind == "certificate":
            lines.append(f"distance {rec['distance']:.6g} (eps {rec['eps']}); weight {rec['weight']}; "
                         f"tree depth {rec['tree_depth']}; bad mass {rec['bad_mass']:.3g}")
        elif kind == "ensemble":
            lines.append(f"ensemble M={rec['M']} n={rec['n']} d={rec['d']}: min distance "
                         f"{rec['min_distance']}; floor {rec['distance_floor']:.4g}; "
                         f"consistent {rec['consistent']}")
        elif kind == "summary":
            lines.append("OK" if rec["success"] else "FAILED")
        elif kind == "error":
            lines.append(f"error ({rec['kind']}): {rec['message']}")
    return "\n".join(lines) + "\n"


def run(cfg: RunConfig) -> tuple[int, list[dict]]:
    """Execute ``cfg``; returns the exit status and all records including the header."""
    try:
        constants = cfg.constants()
    except (InvalidInputError, ValueError) as exc:
        return EXIT_INVALID, [header_record(cfg, None),
                              {"record": "error", "kind": "invalid_input", "message": str(exc)}]
    header = header_record(cfg, constants)
    try:
        status, records = COMMANDS[cfg.command](cfg)
    except ResourceLimitError as exc:
        return EXIT_RESOURCE, [header, {"record": "error", "kind": "resource", "message": str(exc)}]
    except (InvalidInputError, PTFError) as exc:
        return EXIT_INVALID, [header, {"record": "error", "kind": "invalid_input", "message": str(exc)}]
    return status, [header] + records


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = config_from_args(args)
    status, records = run(cfg)
    text = render_jsonl(records) if cfg.format == "jsonl" else render_human(records)
    for rec in records:
        if rec.get("record") == "error":
            print(f"ptfreg: {rec['message']}", file=sys.stderr)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fp:
            fp.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
