"""CLI of the mutual-independence toolkit."""
import argparse
from collections.abc import Callable, Sequence
import csv
import io
import json
from pathlib import Path
import sys
from typing import Any, Literal, NoReturn

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, FilePath, ValidationError

from mutual_independence.classical.decomposition import classical_rates, ki_decompose
from mutual_independence.classical.distribution import JointDistribution
from mutual_independence.classical.privacy import FunctionTables, classical_mindep_rate, hash_sim
from mutual_independence.common.errors import JobError, MutualIndependenceError, NonConvergenceError
from mutual_independence.common.io import load_model
from mutual_independence.common.logger import logger, set_level
from mutual_independence.common.settings import Settings, reset_settings, use_settings
from mutual_independence.compression.rates import rate_region_report
from mutual_independence.conjectures.nolock import (
    NoLockParams,
    nolock_search,
    run_locking_control,
    write_violation_certificate,
)
from mutual_independence.conjectures.operators import OperatorPair, operator_check, operator_conjecture_test
from mutual_independence.mindep.bounds import mi_bounds
from mutual_independence.mindep.exact import LabelSplit
from mutual_independence.mindep.search import SplitDims
from mutual_independence.quantum.entropy import entropic_report
from mutual_independence.quantum.measures import Cut, esq_upper, measures_report
from mutual_independence.quantum.state import MultipartiteState
from mutual_independence.selftest import MANIFEST, run_selftest


EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NONCONVERGENCE = 2
EXIT_VIOLATION = 3

OutputFormat = Literal["table", "json", "csv"]
COMMON_OPTIONS = {"command", "input", "seed", "jobs", "format", "set", "log_level"}


class MutindArgumentParser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with the validation-error code."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


class RunConfig(BaseModel):
    """
    Pydantic model of a validated command line; a run is reproducible from its serialized form.

    :param str command: Subcommand, e.g. ``mindep`` or ``classical-decompose``
    :param list inputs: Input files
    :param int seed: Master seed
    :param int jobs: Worker processes
    :param str output_format: ``table``, ``json`` or ``csv``
    :param dict overrides: Settings overridden with ``--set key=value``
    :param dict options: Command-specific options
    """

    model_config = ConfigDict(frozen=True)

    command: str
    inputs: list[FilePath] = Field(default_factory=list)
    seed: int = Field(default=0, ge=0, lt=2**64)
    jobs: int = Field(default=1, ge=1)
    output_format: OutputFormat = "table"
    overrides: dict[str, str] = Field(default_factory=dict)
    options: dict[str, Any] = Field(default_factory=dict)


def parse_cut(text: str | None, state: MultipartiteState) -> Cut:
    """
    Parse ``"A,A':B,B'"`` into Alice's and Bob's labels; a two-subsystem state defaults to its own labels.

    :param str text: Cut description or ``None``
    :param MultipartiteState state: State the cut applies to

    :return: Both label tuples
    :rtype: tuple
    """
    if text is None:
        if len(state.labels) != 2:
            raise ValueError(f"--cut is required for states with subsystems {list(state.labels)}")
        return (state.labels[0],), (state.labels[1],)
    left, sep, right = text.partition(":")
    if not sep:
        raise ValueError(f"cut {text!r} must look like 'A,A':B,B''")
    return _labels(left), _labels(right)


def _ints(text: str) -> list[int]:
    return [int(part) for part in text.split(",")]


def _labels(text: str) -> tuple[str, ...]:
    return tuple(label.strip() for label in text.split(","))


# ---------------------------------------------------------------------------------------------
# commands: each returns the report and the exit code


def cmd_info(config: RunConfig) -> tuple[BaseModel, int]:
    """Entropic report of a state."""
    state = load_model(MultipartiteState, config.inputs[0])
    parts = [_labels(p) for p in config.options["parts"]] if config.options.get("parts") else None
    return entropic_report(state, parts), EXIT_OK


def cmd_measures(config: RunConfig) -> tuple[BaseModel, int]:
    """Logarithmic negativity, E_r-PPT and the squashed-entanglement heuristic."""
    state = load_model(MultipartiteState, config.inputs[0])
    return measures_report(state, parse_cut(config.options.get("cut"), state), seed=config.seed), EXIT_OK


def cmd_mindep(config: RunConfig) -> tuple[BaseModel, int]:
    """Bounds on mutual independence."""
    state = load_model(MultipartiteState, config.inputs[0])
    options = config.options
    declared = [load_model(LabelSplit, Path(p)) for p in options.get("split") or []]
    split_dims = None
    if options.get("split_dims"):
        alpha, a, beta, b = _ints(options["split_dims"])
        split_dims = SplitDims(alpha=alpha, a=a, beta=beta, b=b)
    report = mi_bounds(
        state,
        parse_cut(options.get("cut"), state),
        declared=declared,
        split_dims=split_dims,
        include_er_ppt=not options.get("no_er_ppt", False),
        seed=config.seed,
    )
    return report, EXIT_OK


def cmd_rates(config: RunConfig) -> tuple[BaseModel, int]:
    """Rate-region report, with an exact split and an I_ind value when given."""
    state = load_model(MultipartiteState, config.inputs[0])
    options = config.options
    cut = parse_cut(options.get("cut"), state)
    split = load_model(LabelSplit, Path(options["split"])) if options.get("split") else None
    esq = options.get("esq")
    if esq is None:
        esq = esq_upper(state, cut, seed=config.seed).value
    report = rate_region_report(
        state,
        esq,
        cut,
        split=split,
        iind_value=options.get("iind"),
        iind_provenance=options.get("iind_provenance") or "",
    )
    return report, EXIT_OK


def cmd_nolock(config: RunConfig) -> tuple[BaseModel, int]:
    """No-locking campaign, or the planted control with ``--control``."""
    options = config.options
    if options.get("control"):
        result = run_locking_control(options["control"])
        return result, EXIT_VIOLATION if result.violation else EXIT_OK
    dims = _ints(options["dims"])
    if len(dims) not in (3, 4):
        raise ValueError(f"--dims takes |X|,|A|,|B| or |X|,|A|,|B|,|G|, got {options['dims']!r}")
    params = NoLockParams(
        dim_x=dims[0],
        dim_a=dims[1],
        dim_b=dims[2],
        dim_g=dims[3] if len(dims) == 4 else None,
        optimize=options.get("optimize", False),
        max_iters=options.get("max_iters", 400),
    )
    summary = nolock_search(params, options.get("trials", 100), seed=config.seed, start=options.get("start_index", 0))
    for record in summary.violations:
        certificate = write_violation_certificate(params, record, Path(options.get("certificates", "nolock_certificates")))
        logger.error(f"🚨 Certificate written, reproduce with: {certificate.command}")
    return summary, EXIT_VIOLATION if summary.violations else EXIT_OK


def cmd_operators(config: RunConfig) -> tuple[BaseModel, int]:
    """Operator-condition check of a given pair, or search with optional certification."""
    state = load_model(MultipartiteState, config.inputs[0])
    options = config.options
    cut = parse_cut(options.get("cut"), state)
    if options.get("pair"):
        pair = load_model(OperatorPair, Path(options["pair"]))
        return operator_check(state, pair.a_op, pair.b_op, cut=cut), EXIT_OK
    report = operator_conjecture_test(
        state,
        seed=config.seed,
        restarts=options.get("restarts"),
        diagonal=options.get("diagonal", False),
        cut=cut,
        certify=options.get("certify", False),
    )
    return report, EXIT_VIOLATION if report.violation else EXIT_OK


def cmd_classical_decompose(config: RunConfig) -> tuple[BaseModel, int]:
    """Redundant decomposition of a distribution."""
    dist = load_model(JointDistribution, config.inputs[0])
    return ki_decompose(dist, _labels(config.options.get("source") or "X,Y")), EXIT_OK


def cmd_classical_rates(config: RunConfig) -> tuple[BaseModel, int]:
    """Slepian-Wolf sum and optimal rate ``H(LJ)``."""
    dist = load_model(JointDistribution, config.inputs[0])
    return classical_rates(dist, _labels(config.options.get("source") or "X,Y")), EXIT_OK


def cmd_classical_mindep(config: RunConfig) -> tuple[BaseModel, int]:
    """Mutual independence of local functions, identity functions by default."""
    dist = load_model(JointDistribution, config.inputs[0])
    x, y = config.options.get("x", "X"), config.options.get("y", "Y")
    if config.options.get("functions"):
        tables = load_model(FunctionTables, Path(config.options["functions"]))
        f_table, g_table = np.array(tables.F), np.array(tables.G)
    else:
        size_x, size_y = (dist.alphabets[i].size for i in dist.axes((x, y)))
        f_table, g_table = np.eye(size_x), np.eye(size_y)
    return classical_mindep_rate(dist, f_table, g_table, x=x, y=y), EXIT_OK


def cmd_classical_hashsim(config: RunConfig) -> tuple[BaseModel, int]:
    """Local hashing simulation."""
    dist = load_model(JointDistribution, config.inputs[0])
    options = config.options
    result = hash_sim(
        dist,
        options["n"],
        options["out_bits"],
        trials=options.get("trials", 100_000),
        seed=config.seed,
        x=options.get("x", "X"),
        y=options.get("y", "Y"),
        shared_hash=not options.get("independent_hashes", False),
    )
    return result, EXIT_OK


def cmd_selftest(config: RunConfig) -> tuple[BaseModel, int]:
    """Expected values of the shipped corpus."""
    report = run_selftest(Path(config.options.get("manifest") or MANIFEST))
    return report, EXIT_OK if report.passed else EXIT_INVALID


COMMANDS: dict[str, Callable[[RunConfig], tuple[BaseModel, int]]] = {
    "info": cmd_info,
    "measures": cmd_measures,
    "mindep": cmd_mindep,
    "rates": cmd_rates,
    "nolock": cmd_nolock,
    "operators": cmd_operators,
    "classical-decompose": cmd_classical_decompose,
    "classical-rates": cmd_classical_rates,
    "classical-mindep": cmd_classical_mindep,
    "classical-hashsim": cmd_classical_hashsim,
    "selftest": cmd_selftest,
}


# ---------------------------------------------------------------------------------------------
# rendering


def _flatten(data: Any, prefix: str = "") -> list[tuple[str, str]]:
    """Flatten nested JSON data into ``(dotted key, value)`` rows; long numeric lists are summarized."""
    if isinstance(data, dict):
        rows = []
        for key, value in data.items():
            rows += _flatten(value, f"{prefix}.{key}" if prefix else str(key))
        return rows
    if isinstance(data, list):
        if len(data) > 16 and not any(isinstance(item, dict) for item in data):
            return [(prefix, f"<{len(data)} entries>")]
        if any(isinstance(item, dict | list) for item in data):
            rows = []
            for index, item in enumerate(data):
                rows += _flatten(item, f"{prefix}[{index}]")
            return rows
        return [(prefix, json.dumps(data))]
    if isinstance(data, float):
        return [(prefix, repr(data))]
    return [(prefix, "null" if data is None else str(data))]


def _header(config: RunConfig, settings: Settings) -> list[str]:
    rows = _flatten({"run": config.model_dump(mode="json"), "settings": settings.model_dump(mode="json")})
    return [f"# {key} = {value}" for key, value in rows]


def render(report: BaseModel, config: RunConfig, settings: Settings) -> str:
    """
    Render a report in the requested format; table and JSON carry the run configuration and all settings.

    :param BaseModel report: Report
    :param RunConfig config: Run configuration
    :param Settings settings: Settings the run used

    :return: Text written to stdout
    :rtype: str
    """
    if config.output_format == "json":
        document = {
            "config": {"run": config.model_dump(mode="json"), "settings": settings.model_dump(mode="json")},
            "result": report.model_dump(mode="json"),
        }
        return json.dumps(document, indent=2) + "\n"
    if config.output_format == "csv":
        if hasattr(report, "to_csv"):
            return report.to_csv()
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["quantity", "value"])
        writer.writerows(_flatten(report.model_dump(mode="json")))
        return buffer.getvalue()
    if hasattr(report, "to_table"):
        body = report.to_table()
    else:
        rows = _flatten(report.model_dump(mode="json"))
        width = max((len(key) for key, _ in rows), default=8)
        body = "\n".join([f"{'quantity':<{width}}  value"] + [f"{key:<{width}}  {value}" for key, value in rows]) + "\n"
    return "\n".join(_header(config, settings)) + "\n" + body


# ---------------------------------------------------------------------------------------------
# argument parsing


def _common_parser() -> argparse.ArgumentParser:
    common = MutindArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="Master seed of every random stream")
    common.add_argument("--jobs", type=int, default=1, help="Maximum worker processes")
    common.add_argument("--format", choices=["table", "json", "csv"], default="table", help="Output format")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="Override a setting")
    common.add_argument("--log-level", help="Log level, shortcut for --set log_level=...")
    return common


def build_parser() -> argparse.ArgumentParser:
    """
    Build the argument parser with one subcommand per report.

    :return: Parser
    :rtype: argparse.ArgumentParser
    """
    common = _common_parser()
    parser = MutindArgumentParser(prog="mutind", description="Quantum mutual independence toolkit")
    commands = parser.add_subparsers(dest="command", required=True)

    info = commands.add_parser("info", parents=[common], help="Entropic report of a state")
    info.add_argument("input", help="State file or archive")
    info.add_argument("--parts", nargs="+", help="Parties as comma-separated labels, one subsystem each by default")

    measures = commands.add_parser("measures", parents=[common], help="Entanglement measures across a cut")
    measures.add_argument("input", help="State file or archive")
    measures.add_argument("--cut", help="Cut as 'A,A':B,B''")

    mindep = commands.add_parser("mindep", parents=[common], help="Bounds on mutual independence")
    mindep.add_argument("input", help="State file or archive")
    mindep.add_argument("--cut", help="Cut as 'A,A':B,B''")
    mindep.add_argument("--split", action="append", help="Declared label split file, repeatable")
    mindep.add_argument("--split-dims", help="Split search factor dims alpha,a,beta,b")
    mindep.add_argument("--no-er-ppt", action="store_true", help="Skip the conditional E_r-PPT bound")

    rates = commands.add_parser("rates", parents=[common], help="Distributed-compression rates")
    rates.add_argument("input", help="State file or archive")
    rates.add_argument("--cut", help="Cut as 'A,A':B,B''")
    rates.add_argument("--split", help="Label split file with an independent key")
    rates.add_argument("--iind", type=float, help="Certified mutual-independence value")
    rates.add_argument("--iind-provenance", help="Where the --iind value comes from")
    rates.add_argument("--esq", type=float, help="Squashed-entanglement bound, computed when absent")

    nolock = commands.add_parser("nolock", parents=[common], help="No-locking conjecture campaign")
    nolock.add_argument("--dims", default="2,2,2", help="|X|,|A|,|B| or |X|,|A|,|B|,|G|")
    nolock.add_argument("--trials", type=int, default=100, help="Number of trials")
    nolock.add_argument("--start-index", type=int, default=0, help="Index of the first trial")
    nolock.add_argument("--optimize", action="store_true", help="Ascend the negativity in every trial")
    nolock.add_argument("--max-iters", type=int, default=400, help="Iteration cap of the ascent")
    nolock.add_argument("--control", type=int, help="Run the planted locking control of this dimension instead")
    nolock.add_argument("--certificates", default="nolock_certificates", help="Directory of violation certificates")

    operators = commands.add_parser("operators", parents=[common], help="Constant-expectation operator condition")
    operators.add_argument("input", help="State file or archive")
    operators.add_argument("--cut", help="Cut as 'A,A':B,B''")
    operators.add_argument("--pair", help="Operator pair file to check instead of searching")
    operators.add_argument("--restarts", type=int, help="Random starts of the search")
    operators.add_argument("--diagonal", action="store_true", help="Only operators diagonal in the standard basis")
    operators.add_argument("--certify", action="store_true", help="Set the search against a certified lower bound")

    classical = commands.add_parser("classical", help="Classical analogue")
    classical_commands = classical.add_subparsers(dest="classical_command", required=True)
    for name, text in (("decompose", "Redundant decomposition"), ("rates", "Compression rates")):
        sub = classical_commands.add_parser(name, parents=[common], help=text)
        sub.add_argument("input", help="Distribution file or archive")
        sub.add_argument("--source", default="X,Y", help="Source variables")
    classical_mindep = classical_commands.add_parser("mindep", parents=[common], help="Local-function independence")
    classical_mindep.add_argument("input", help="Distribution file or archive")
    classical_mindep.add_argument("--functions", help="File with stochastic tables F and G, identities by default")
    classical_mindep.add_argument("--x", default="X", help="Alice's variable")
    classical_mindep.add_argument("--y", default="Y", help="Bob's variable")
    hashsim = classical_commands.add_parser("hashsim", parents=[common], help="Local hashing simulation")
    hashsim.add_argument("input", help="Distribution file or archive")
    hashsim.add_argument("--n", type=int, required=True, help="Block length")
    hashsim.add_argument("--out-bits", type=int, required=True, help="Hash output bits of each party")
    hashsim.add_argument("--trials", type=int, default=100_000, help="Monte-Carlo trials")
    hashsim.add_argument("--x", default="X", help="Alice's variable")
    hashsim.add_argument("--y", default="Y", help="Bob's variable")
    hashsim.add_argument("--independent-hashes", action="store_true", help="Draw a separate matrix for Bob")

    selftest = commands.add_parser("selftest", parents=[common], help="Check the shipped example corpus")
    selftest.add_argument("--manifest", help="Manifest file, the shipped one by default")
    return parser


def parse_args(argv: Sequence[str] | None = None) -> RunConfig:
    """
    Parse and validate command-line arguments using Pydantic.

    :param Sequence argv: Arguments, ``sys.argv[1:]`` by default

    :return: Validated run configuration
    :rtype: RunConfig
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command if args.command != "classical" else f"classical-{args.classical_command}"
    overrides = {}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            parser.error(f"--set expects KEY=VALUE, got {item!r}")
        overrides[key.strip()] = value.strip()
    if args.log_level:
        overrides["log_level"] = args.log_level.upper()
    options = {
        key: value
        for key, value in vars(args).items()
        if key not in COMMON_OPTIONS | {"classical_command"} and value is not None
    }
    try:
        return RunConfig(
            command=command,
            inputs=[args.input] if getattr(args, "input", None) else [],
            seed=args.seed,
            jobs=args.jobs,
            output_format=args.format,
            overrides=overrides,
            options=options,
        )
    except ValidationError as exc:
        parser.error(str(exc))


def run(config: RunConfig) -> int:
    """
    Execute a validated run, print its report to stdout and return the exit code.

    Exit codes: 0 success, 1 validation or precondition error, 2 optimizer non-convergence,
    3 conjecture violation found.

    :param RunConfig config: Run configuration

    :return: Exit code
    :rtype: int
    """
    try:
        settings = use_settings(**config.overrides, seed=config.seed, jobs=config.jobs)
    except ValidationError as exc:
        logger.error(f"❌ Invalid setting override: {exc}")
        return EXIT_INVALID
    set_level(settings.log_level)
    try:
        report, code = COMMANDS[config.command](config)
    except NonConvergenceError as exc:
        logger.error(f"⚠️ {exc}")
        return EXIT_NONCONVERGENCE
    except (ValidationError, ValueError, MutualIndependenceError, JobError, OSError) as exc:
        logger.error(f"❌ {exc}")
        return EXIT_INVALID
    finally:
        reset_settings()
    sys.stdout.write(render(report, config, settings))
    return code


def main() -> None:
    """
    Run the ``mutind`` command line.

    Steps:
        1. Parse CLI arguments and validate them using Pydantic.
        2. Install the settings overrides, seed and parallel width.
        3. Run the subcommand and print its report.
        4. Exit with the code of the outcome.
    """
    sys.exit(run(parse_args()))


if __name__ == "__main__":
    main()
