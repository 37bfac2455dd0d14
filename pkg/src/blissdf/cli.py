"""Command line front end for factorization, optimization, and verification.

Subcommands:
    factorize  Eigendecomposition-based double factorization of an FCIDUMP
               file; writes factors.npz, summary.json, manifest.json.
    optimize   Joint symmetry-shift + factorization descent; writes
               report.json, trace.jsonl, factors.npz, manifest.json.
    verify     Self-check suites over the dense fermionic oracle.
    report     Render a report.json as a table (method, N, R, lambda, error).

Exit codes: 0 success, 1 input problem (parse or config errors, missing
files, schema mismatch), 2 data problem (two-body tensor not factorizable),
3 numeric failure (non-finite cost), 4 verification failure.

All JSON outputs are deterministic for a fixed input and seed; wall-clock
timestamps appear only in manifest.json. Linear algebra thread counts follow
the BLAS environment variables (for example OMP_NUM_THREADS).
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import platform
import sys
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import jsonschema

from blissdf import __version__
from blissdf.factorization import (
    IndefiniteTensorError,
    initial_double_factorization,
    lambda_df,
    save_factor_set,
)
from blissdf.fcidump import INTEGRAL_CONVENTION, FcidumpError, load_integrals
from blissdf.hamiltonian import effective_one_body, frobenius_error
from blissdf.optimizer import (
    ConfigError,
    NonFiniteCostError,
    OptimizationConfig,
    optimize,
)
from blissdf.verify import LEVELS, run_verification

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3
EXIT_VERIFICATION = 4


def load_schema(name: str) -> dict:
    """Load one of the shipped draft-07 schema documents by file name."""
    text = resources.files("blissdf").joinpath("schemas", name).read_text()
    return json.loads(text)


def file_checksum(path: str | Path) -> str:
    """Hex sha256 of a file's bytes."""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _dump_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _input_block(path: str, checksum: str, ham) -> dict:
    return {
        "path": str(path),
        "sha256": checksum,
        "n_orbitals": ham.n_orbitals,
        "n_electrons": ham.n_electrons,
        "integral_convention": INTEGRAL_CONVENTION,
    }


def _write_manifest(
    out_dir: Path, kind: str, checksum: str, config: OptimizationConfig | None
) -> str:
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "input_checksum": checksum,
        "config": config.to_dict() if config is not None else None,
        "tool_version": __version__,
        "created_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "platform": f"{platform.platform()} python-{platform.python_version()}",
    }
    jsonschema.validate(manifest, load_schema("manifest.schema.json"))
    _dump_json(out_dir / "manifest.json", manifest)
    return "manifest.json"


def cmd_factorize(args) -> int:
    ham = load_integrals(args.input)
    checksum = file_checksum(args.input)
    factor_set = initial_double_factorization(ham.g, args.rank)
    err = frobenius_error(ham.g, factor_set)
    breakdown = lambda_df(factor_set, effective_one_body(ham))

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_name = _write_manifest(out_dir, "factorize", checksum, None)
    save_factor_set(
        out_dir / "factors.npz",
        factor_set,
        manifest={"input_sha256": checksum, "tool_version": __version__},
    )
    summary = {
        "schema_version": SCHEMA_VERSION,
        "manifest": manifest_name,
        "input": _input_block(args.input, checksum, ham),
        "n_orbitals": ham.n_orbitals,
        "rank": factor_set.rank,
        "lambda_df": breakdown.lambda_total,
        "err": err,
        "lambda_one_body": breakdown.one_body_part,
        "lambda_two_body": breakdown.two_body_part,
        "per_factor": [float(x) for x in breakdown.per_factor],
    }
    jsonschema.validate(summary, load_schema("summary.schema.json"))
    _dump_json(out_dir / "summary.json", summary)

    print(
        f"N={ham.n_orbitals} R={factor_set.rank} "
        f"lambda_df={breakdown.lambda_total:.12g} err={err:.6e}"
    )
    print(f"wrote {out_dir / 'summary.json'} and {out_dir / 'factors.npz'}")
    return EXIT_OK


def cmd_optimize(args) -> int:
    ham = load_integrals(args.input)
    checksum = file_checksum(args.input)
    if args.config is not None:
        config = OptimizationConfig.from_json(args.config)
    else:
        config = OptimizationConfig()
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)

    report = optimize(ham, args.rank, config)
    best_kappa, best_xi, best_factor_set = report.best_params

    init_factors = initial_double_factorization(ham.g, args.rank)
    init_breakdown = lambda_df(init_factors, effective_one_body(ham))

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_name = _write_manifest(out_dir, "optimize", checksum, config)
    save_factor_set(
        out_dir / "factors.npz",
        best_factor_set,
        manifest={"input_sha256": checksum, "tool_version": __version__},
        kappa=best_kappa,
        xi=best_xi,
    )

    trace_schema = load_schema("trace.schema.json")
    with open(out_dir / "trace.jsonl", "w") as handle:
        for iteration, (total, err, lam) in enumerate(report.total_trace):
            line = {
                "iter": iteration,
                "total": float(total),
                "err": float(err),
                "lambda": float(lam),
            }
            if iteration == 0:
                jsonschema.validate(line, trace_schema)
            handle.write(json.dumps(line, sort_keys=True) + "\n")

    n = ham.n_orbitals
    report_doc = {
        "schema_version": SCHEMA_VERSION,
        "manifest": manifest_name,
        "input": _input_block(args.input, checksum, ham),
        "rank": args.rank,
        "config": config.to_dict(),
        "c_approx_used": report.c_approx_used,
        "runs": [
            {
                "method": "XDF",
                "n_orbitals": n,
                "rank": init_factors.rank,
                "lambda": init_breakdown.lambda_total,
                "err": report.initial_err,
                "lambda_one_body": init_breakdown.one_body_part,
                "lambda_two_body": init_breakdown.two_body_part,
            },
            {
                "method": "optimized",
                "n_orbitals": n,
                "rank": best_factor_set.rank,
                "lambda": report.lambda_breakdown.lambda_total,
                "err": report.err_final,
                "lambda_one_body": report.lambda_breakdown.one_body_part,
                "lambda_two_body": report.lambda_breakdown.two_body_part,
                "iterations": report.iterations_run,
                "stop_reason": report.stop_reason,
                "best_iteration": report.best_iteration,
            },
        ],
        "best": {
            "kappa": best_kappa,
            "xi": [[float(x) for x in row] for row in best_xi],
            "lambda": report.lambda_breakdown.lambda_total,
            "lambda_one_body": report.lambda_breakdown.one_body_part,
            "lambda_two_body": report.lambda_breakdown.two_body_part,
            "err": report.err_final,
            "best_iteration": report.best_iteration,
        },
    }
    jsonschema.validate(report_doc, load_schema("report.schema.json"))
    _dump_json(out_dir / "report.json", report_doc)

    print(
        f"lambda={report.lambda_breakdown.lambda_total:.12g} "
        f"err={report.err_final:.6e} iterations={report.iterations_run} "
        f"({report.stop_reason})"
    )
    print(f"wrote {out_dir / 'report.json'}, trace.jsonl, factors.npz")
    return EXIT_OK


def cmd_verify(args) -> int:
    results = run_verification(args.level)
    failed = [r for r in results if not r.passed]
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        print(
            f"{status}  {result.name}: max deviation {result.max_deviation:.3e} "
            f"(tolerance {result.tolerance:.1e})"
        )
    if failed:
        names = ", ".join(r.name for r in failed)
        print(f"verification failed: {names}", file=sys.stderr)
        return EXIT_VERIFICATION
    print(f"all {len(results)} checks passed ({args.level} level)")
    return EXIT_OK


def cmd_report(args) -> int:
    try:
        data = json.loads(Path(args.input).read_text())
    except json.JSONDecodeError as exc:
        print(f"{args.input}: not valid JSON ({exc})", file=sys.stderr)
        return EXIT_INPUT
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        print(
            f"{args.input}: report schema version {version!r} is not "
            f"supported (this tool reads version {SCHEMA_VERSION})",
            file=sys.stderr,
        )
        return EXIT_INPUT
    try:
        jsonschema.validate(data, load_schema("report.schema.json"))
    except jsonschema.ValidationError as exc:
        print(f"{args.input}: schema mismatch: {exc.message}", file=sys.stderr)
        return EXIT_INPUT

    header = f"{'method':<12} {'N':>4} {'R':>5} {'lambda':>18} {'error':>12}"
    print(header)
    print("-" * len(header))
    for run in data["runs"]:
        print(
            f"{run['method']:<12} {run['n_orbitals']:>4} {run['rank']:>5} "
            f"{run['lambda']:>18.10g} {run['err']:>12.3e}"
        )
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with the input-error code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="blissdf",
        description=(
            "Minimize the block-encoding scaling constant of an "
            "electronic-structure Hamiltonian via a symmetry shift and "
            "double factorization."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_fact = sub.add_parser(
        "factorize", help="double-factorize the two-body tensor of an FCIDUMP file"
    )
    p_fact.add_argument("--input", required=True, help="FCIDUMP file")
    p_fact.add_argument(
        "--rank", required=True, type=int, help="number of factors R"
    )
    p_fact.add_argument("--out", required=True, help="output directory")
    p_fact.set_defaults(func=cmd_factorize)

    p_opt = sub.add_parser(
        "optimize", help="jointly optimize the symmetry shift and the factors"
    )
    p_opt.add_argument("--input", required=True, help="FCIDUMP file")
    p_opt.add_argument("--rank", required=True, type=int, help="number of factors R")
    p_opt.add_argument(
        "--config", help="optimization config JSON (defaults when omitted)"
    )
    p_opt.add_argument("--out", required=True, help="output directory")
    p_opt.add_argument(
        "--seed", type=int, help="override the config seed for provenance"
    )
    p_opt.set_defaults(func=cmd_optimize)

    p_ver = sub.add_parser("verify", help="run the dense-oracle self checks")
    p_ver.add_argument(
        "--level", choices=LEVELS, default="fast", help="check depth"
    )
    p_ver.set_defaults(func=cmd_verify)

    p_rep = sub.add_parser("report", help="render a report.json as a table")
    p_rep.add_argument("--input", required=True, help="report JSON file")
    p_rep.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NonFiniteCostError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except IndefiniteTensorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (FcidumpError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return EXIT_INPUT
    except (IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
