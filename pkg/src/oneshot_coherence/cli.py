"""Command-line interface.

Reports are deterministic: identical inputs, flags and seed give
byte-identical files. Every report carries the tool version, seed, epsilon
and the sha256 of each input file.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import tempfile
from typing import Any, Sequence

from . import __version__
from .channels import build_concentration_channel, certify_incoherent, concentrate
from .qstate import ValidationError
from .rates import BudgetExceeded, assisted_rate, ensemble_rate, ncopy_sweep, pure_rate
from .serialization import (
    channel_to_json,
    density_from_json,
    dumps,
    ensemble_from_json,
    load_json,
    state_from_json,
)
from .verify import SUITES, run_suite

TOOL = "oneshot-coherence"
SWEEP_HEADER = ["n", "rate_bits", "rate_per_copy", "target_avg_bits", "target_da_bits"]
RATE_HEADER = ["epsilon", "M_achievable", "rate_lower_bits", "rate_upper_bits",
               "smoothed_value_bits"]


class UsageError(Exception):
    """Bad command line; reported like a validation error."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _num(x: Any) -> str:
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def _sha256(path: str) -> str:
    try:
        with open(path, "rb") as fh:
            return hashlib.sha256(fh.read()).hexdigest()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}", "input", "readable file") from exc


def _require(args, name: str, flag: str):
    value = getattr(args, name)
    if value is None:
        raise ValidationError(f"{flag} is required for {args.command}", name, "required flag")
    return value


def _epsilon(args, required: bool = True) -> float | None:
    eps = args.epsilon
    if eps is None:
        if required:
            raise ValidationError(f"--epsilon is required for {args.command}", "epsilon",
                                  "required flag")
        return None
    if not 0 <= eps < 0.5:
        raise ValidationError(f"epsilon {eps!r} outside [0, 0.5)", "epsilon", "0 <= eps < 0.5")
    return eps


def _header(args, inputs: dict[str, str], epsilon) -> dict[str, Any]:
    return {
        "tool": TOOL,
        "version": __version__,
        "command": args.command,
        "seed": args.seed,
        "epsilon": epsilon,
        "input_sha256": {role: _sha256(path) for role, path in sorted(inputs.items())},
    }


def _csv_text(meta: dict[str, Any], header: list[str], rows: list[list[Any]]) -> str:
    buf = io.StringIO()
    # metadata as leading comment lines so the table itself stays plain CSV
    for key in ("tool", "version", "command", "seed", "epsilon"):
        buf.write(f"# {key}={_num(meta[key])}\n")
    for role, digest in meta["input_sha256"].items():
        buf.write(f"# input_sha256.{role}={digest}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_num(x) for x in row])
    return buf.getvalue()


def _rate_output(args, meta, report) -> str:
    if args.format == "csv":
        d = report.to_dict()
        return _csv_text(meta, RATE_HEADER, [[d[k] for k in RATE_HEADER]])
    return dumps({**meta, "report": report.to_dict()})


def _json_only(args) -> None:
    if args.format != "json":
        raise ValidationError(f"{args.command} supports only --format json", "format",
                              "format in {json}")


def cmd_pure_rate(args) -> tuple[str, int]:
    path = _require(args, "state", "--state")
    eps = _epsilon(args)
    psi = state_from_json(load_json(path))
    meta = _header(args, {"state": path}, eps)
    return _rate_output(args, meta, pure_rate(psi, eps)), 0


def cmd_ensemble_rate(args) -> tuple[str, int]:
    path = _require(args, "ensemble", "--ensemble")
    eps = _epsilon(args)
    ens = ensemble_from_json(load_json(path))
    meta = _header(args, {"ensemble": path}, eps)
    return _rate_output(args, meta, ensemble_rate(ens, eps)), 0


def cmd_assisted_rate(args) -> tuple[str, int]:
    path = _require(args, "rho", "--rho")
    eps = _epsilon(args)
    rho = density_from_json(load_json(path))
    report = assisted_rate(rho, eps, members=args.members, restarts=args.restarts,
                           seed=args.seed, threads=args.threads)
    meta = _header(args, {"rho": path}, eps)
    return _rate_output(args, meta, report), 0


def cmd_asymptotic_sweep(args) -> tuple[str, int]:
    path = _require(args, "ensemble", "--ensemble")
    eps = _epsilon(args)
    n_max = _require(args, "max_copies", "--max-copies")
    if n_max < 1:
        raise ValidationError("--max-copies must be >= 1", "max_copies", "n_max >= 1")
    ens = ensemble_from_json(load_json(path))
    meta = _header(args, {"ensemble": path}, eps)
    rows = ncopy_sweep(ens, eps, n_max, threads=args.threads)
    if args.format == "csv":
        return _csv_text(meta, SWEEP_HEADER,
                         [[getattr(r, k) for k in SWEEP_HEADER] for r in rows]), 0
    table = [{k: getattr(r, k) for k in SWEEP_HEADER} for r in rows]
    return dumps({**meta, "max_copies": n_max, "rows": table}), 0


def cmd_build_channel(args) -> tuple[str, int]:
    _json_only(args)
    path = _require(args, "state", "--state")
    psi = state_from_json(load_json(path))
    if args.M is not None:
        if args.M < 1 or args.M > psi.dim:
            raise ValidationError(f"M={args.M} outside [1, {psi.dim}]", "M", "1 <= M <= dim")
        eps = _epsilon(args, required=False)
        channel = build_concentration_channel(psi, args.M)
    else:
        eps = _epsilon(args)
        _, channel, _ = concentrate(psi, eps)
    if not certify_incoherent(channel):
        raise ValidationError("constructed channel failed certification", "kraus",
                              "incoherent Kraus operators")
    meta = _header(args, {"state": path}, eps)
    return dumps({**channel_to_json(channel), "metadata": meta}), 0


def cmd_verify(args) -> tuple[str, int]:
    _json_only(args)
    suite = _require(args, "suite", "--suite")
    if args.trials < 1 or args.dim < 1:
        raise ValidationError("--trials and --dim must be positive", "trials", "positive")
    result = run_suite(suite, args.trials, args.dim, args.seed)
    meta = _header(args, {}, None)
    out = {**meta, "dim": args.dim, "result": result.to_dict()}
    return dumps(out), 0 if result.ok else 1


COMMANDS = {
    "pure-rate": cmd_pure_rate,
    "ensemble-rate": cmd_ensemble_rate,
    "assisted-rate": cmd_assisted_rate,
    "asymptotic-sweep": cmd_asymptotic_sweep,
    "build-channel": cmd_build_channel,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog=TOOL, description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--state", help="pure state JSON")
        p.add_argument("--ensemble", help="pure ensemble JSON")
        p.add_argument("--rho", help="density operator JSON")
        p.add_argument("--epsilon", type=float)
        p.add_argument("--M", type=int)
        p.add_argument("--members", type=int)
        p.add_argument("--restarts", type=int, default=16)
        p.add_argument("--max-copies", dest="max_copies", type=int)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--suite", choices=sorted(SUITES))
        p.add_argument("--trials", type=int, default=100)
        p.add_argument("--dim", type=int, default=4)
    return parser


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fail(kind: str, message: str, field: str = "", invariant: str = "") -> int:
    err = {"error": kind, "message": message, "field": field, "invariant": invariant}
    sys.stderr.write(json.dumps(err, sort_keys=True) + "\n")
    return 2


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _fail("usage", str(exc), "argv", "valid command line")
    if not 0 <= args.seed < 2**64:
        return _fail("validation", "seed must be a 64-bit unsigned integer", "seed", "0 <= seed < 2^64")
    if args.threads < 1:
        return _fail("validation", "--threads must be >= 1", "threads", "threads >= 1")
    try:
        text, status = COMMANDS[args.command](args)
    except ValidationError as exc:
        return _fail("validation", str(exc), exc.field, exc.invariant)
    except BudgetExceeded as exc:
        return _fail("budget_exceeded", str(exc), "max_copies", "group count <= 1e6")
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    raise SystemExit(main())
