from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from logging import getLogger
from pathlib import Path
from typing import Any, Callable, Sequence

import torch
from torch import Tensor

from pyrptorch.geometry import cayley, classify_boundary, in_crown, sphere_point, xi0
from pyrptorch.integral_reps import planewave_quadrature
from pyrptorch.kernels import (
    CanonicalKernel,
    MassParam,
    PhiCKernel,
    PhiKernel,
    PsiKernel,
    QNuKernel,
)
from pyrptorch.matrices import DEFAULT_MATRIX_DTYPE, basis
from pyrptorch.oracles import discrete_kernel_convergence, phi_series
from pyrptorch.quadrature import QuadratureOptions
from pyrptorch.suites import Suite, SuiteConfig, run_suite
from pyrptorch.utils import StrEnum

logger = getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED_CHECK = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

NAMED_POINTS: dict[str, Callable[[int], Tensor]] = {
    "e0": lambda n: basis(n, 0),
    "en": lambda n: basis(n, n),
    "xi0": xi0,
}


class Command(StrEnum):
    EVAL = "eval"
    """Evaluate one kernel value."""
    SWEEP = "sweep"
    """Evaluate Psi_m over a range of masses."""
    VERIFY = "verify"
    """Run a verification suite."""
    PLANEWAVE = "planewave"
    """Evaluate Phi_m^c by plane wave quadrature."""
    ORACLE = "oracle"
    """Spectral series and discrete circle model."""
    GEOMETRY = "geometry"
    """Classify points, test crown membership, apply the Cayley transform."""


class OutputFormat(StrEnum):
    JSON = "json"
    """One JSON object per line, keys sorted."""
    CSV = "csv"
    """Comma separated values with a header row."""


class KernelType(StrEnum):
    PSI = "psi"
    PHI = "phi"
    PHI_C = "phic"
    Q_NU = "qnu"
    CANONICAL = "canonical"


class OracleType(StrEnum):
    SERIES = "series"
    CIRCLE = "circle"


class GeometryAction(StrEnum):
    CLASSIFY = "classify"
    CROWN = "crown"
    CAYLEY = "cayley"


DEFAULT_FORMATS = {Command.SWEEP: OutputFormat.CSV}


@dataclass
class RunConfig:
    """A parsed command line.

    Points are complex tensors of size n+1; `m` holds one mass or the grid of a sweep.
    """

    command: Command
    n: int = 2
    m: list[float] = field(default_factory=lambda: [1.0])
    t: float | None = None
    z: Tensor | None = None
    w: Tensor | None = None
    kernel: KernelType = KernelType.PSI
    nu: float = 1.0
    lam: float = 1.0
    suite: Suite = Suite.ALL
    oracle: OracleType = OracleType.SERIES
    action: GeometryAction = GeometryAction.CLASSIFY
    c: float = 0.0
    grid: list[int] = field(default_factory=lambda: [64, 128, 256, 512])
    max_degree: int | None = None
    seed: int = 0
    tol: float | None = None
    max_nodes: int | None = None
    trials: int = 100_000
    out: Path | None = None
    format: OutputFormat | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"--n must be a positive integer, got {self.n}.")
        if not self.m or any(not math.isfinite(m) or m < 0 for m in self.m):
            raise ValueError(f"--m must be finite and non-negative, got {self.m}.")
        if self.tol is not None and not self.tol > 0:
            raise ValueError(f"--tol must be positive, got {self.tol}.")
        if self.max_nodes is not None and self.max_nodes <= 0:
            raise ValueError(f"--max-nodes must be positive, got {self.max_nodes}.")
        for name in ("z", "w"):
            point = getattr(self, name)
            if point is not None and point.size(-1) != self.n + 1:
                raise ValueError(f"--{name} must have {self.n + 1} coordinates for n={self.n}.")

    @property
    def output_format(self) -> OutputFormat:
        if self.format is not None:
            return self.format
        if self.command == Command.ORACLE and self.oracle == OracleType.CIRCLE:
            return OutputFormat.CSV
        return DEFAULT_FORMATS.get(self.command, OutputFormat.JSON)

    def quadrature_options(self, base: QuadratureOptions | None = None) -> QuadratureOptions:
        options = base or QuadratureOptions()
        if self.tol is not None:
            options.tol = self.tol
        if self.max_nodes is not None:
            options.max_nodes = self.max_nodes
        return options


def parse_point(n: int, text: str) -> Tensor:
    """Points as comma separated re:im entries ("1:0,0:0.5,0") or one of e0, en, xi0."""
    text = text.strip()
    if text in NAMED_POINTS:
        return NAMED_POINTS[text](n)
    entries = []
    for piece in text.split(","):
        real, _, imag = piece.strip().partition(":")
        try:
            entries.append(complex(float(real), float(imag) if imag else 0.0))
        except ValueError:
            raise ValueError(f"Cannot read {piece!r} as re:im in point {text!r}.") from None
    if len(entries) != n + 1:
        raise ValueError(f"Point {text!r} has {len(entries)} coordinates, expected {n + 1}.")
    return torch.tensor(entries, dtype=DEFAULT_MATRIX_DTYPE)


def parse_mass_range(text: str) -> list[float]:
    """A single mass, a comma separated list, or an inclusive range start:step:stop."""
    if ":" not in text:
        return [float(x) for x in text.split(",")]
    parts = [float(x) for x in text.split(":")]
    if len(parts) != 3:
        raise ValueError(f"A mass range reads start:step:stop, got {text!r}.")
    start, step, stop = parts
    if step <= 0 or stop < start:
        raise ValueError(f"Empty mass range {text!r}.")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(count)]


def _complex(value: Any) -> dict[str, float]:
    z = complex(value)
    return {"re": z.real, "im": z.imag}


def _point_json(z: Tensor) -> list[list[float]]:
    return [[float(x.real), float(x.imag)] for x in z.reshape(-1)]


def _kernel_points(config: RunConfig) -> tuple[Tensor, Tensor]:
    w = config.w if config.w is not None else basis(config.n, 0)
    if config.z is not None:
        return config.z, w
    if config.t is None:
        raise ValueError("Give either --t or --z.")
    return sphere_point(config.n, config.t), w


def _eval(config: RunConfig) -> list[dict[str, Any]]:
    z, w = _kernel_points(config)
    if config.kernel == KernelType.Q_NU:
        value = QNuKernel(config.n, config.nu)(z, w)
        return [{"n": config.n, "nu": config.nu, "value": _complex(value)}]
    if config.kernel == KernelType.CANONICAL:
        value = CanonicalKernel(config.n, config.lam)(z, w)
        return [{"n": config.n, "lambda": _complex(config.lam), "value": _complex(value)}]
    kernels = {KernelType.PSI: PsiKernel, KernelType.PHI: PhiKernel, KernelType.PHI_C: PhiCKernel}
    records = []
    for m in config.m:
        p = MassParam(config.n, m)
        value = kernels[config.kernel](p)(z, w)
        records.append(
            {"n": config.n, "m": m, "lambda": _complex(p.lam), "value": _complex(value)}
        )
    return records


def _sweep(config: RunConfig) -> list[dict[str, Any]]:
    z, w = _kernel_points(config)
    rows = []
    for m in sorted(config.m):
        p = MassParam(config.n, m)
        value = complex(PsiKernel(p)(z, w))
        rows.append(
            {
                "n": config.n,
                "m": m,
                "lambda_re": p.lam.real,
                "lambda_im": p.lam.imag,
                "psi_re": value.real,
                "psi_im": value.imag,
            }
        )
    return rows


def _planewave(config: RunConfig) -> list[dict[str, Any]]:
    if config.z is None or config.w is None:
        raise ValueError("planewave needs --z and --w.")
    records = []
    for m in config.m:
        p = MassParam(config.n, m)
        result = planewave_quadrature(p, config.z, config.w, config.quadrature_options())
        kernel = PhiCKernel(p)(config.z, config.w)
        records.append(
            {
                "n": config.n,
                "m": m,
                "value": _complex(result.value),
                "nodes": result.nodes,
                "error": result.error,
                "kernel": _complex(kernel),
            }
        )
    return records


def _oracle(config: RunConfig) -> list[dict[str, Any]]:
    if config.oracle == OracleType.CIRCLE:
        records = []
        for m in config.m:
            for row in discrete_kernel_convergence(m, config.grid):
                slope = None if math.isnan(row.slope) else row.slope
                records.append({"N": row.N, "m": m, "max_err": row.max_err, "slope": slope})
        return records
    records = []
    for m in config.m:
        kwargs: dict[str, Any] = {"max_degree": config.max_degree}
        if config.tol is not None:
            kwargs["tol"] = config.tol
        value, tail = phi_series(config.n, m, config.c, **kwargs)
        records.append({"n": config.n, "m": m, "c": config.c, "value": value, "tail": tail})
    return records


def _geometry(config: RunConfig) -> list[dict[str, Any]]:
    if config.z is None:
        raise ValueError("geometry needs --z.")
    record: dict[str, Any] = {"point": _point_json(config.z)}
    if config.action == GeometryAction.CLASSIFY:
        record["class"] = str(classify_boundary(config.z))
    elif config.action == GeometryAction.CROWN:
        record["in_crown"] = bool(in_crown(config.z))
    else:
        record["cayley"] = _point_json(cayley(config.z))
    return [record]


HANDLERS: dict[Command, Callable[[RunConfig], list[dict[str, Any]]]] = {
    Command.EVAL: _eval,
    Command.SWEEP: _sweep,
    Command.PLANEWAVE: _planewave,
    Command.ORACLE: _oracle,
    Command.GEOMETRY: _geometry,
}


def _cell(value: Any) -> Any:
    if isinstance(value, dict) and set(value) == {"re", "im"}:
        return f"{value['re']!r}:{value['im']!r}"
    if isinstance(value, (dict, list)):
        return json.dumps(value, sort_keys=True)
    return value


def format_records(records: Sequence[dict[str, Any]], fmt: OutputFormat) -> str:
    """Serialize records as JSON lines or as CSV with the keys of the first record."""
    if fmt == OutputFormat.JSON:
        return "".join(json.dumps(record, sort_keys=True) + "\n" for record in records)
    if not records:
        return ""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(records[0]), lineterminator="\n")
    writer.writeheader()
    for record in records:
        writer.writerow({key: _cell(value) for key, value in record.items()})
    return buffer.getvalue()


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")


def _verify(config: RunConfig) -> int:
    suite_config = SuiteConfig(seed=config.seed, search_trials=config.trials)
    suite_config.quadrature = config.quadrature_options(suite_config.quadrature)
    checks = run_suite(config.suite, suite_config)
    _emit(format_records([check.to_dict() for check in checks], config.output_format), config.out)
    failed = [check.name for check in checks if not check.passed]
    if failed:
        logger.error(f"{len(failed)} of {len(checks)} checks failed: {', '.join(failed)}")
        return EXIT_FAILED_CHECK
    return EXIT_OK


def run(config: RunConfig) -> int:
    """Execute a parsed command and return its exit code.

    Returns:
        0 on success, 1 when a verification check fails, 3 when a computation raises.
    """
    torch.manual_seed(config.seed)
    try:
        if config.command == Command.VERIFY:
            return _verify(config)
        records = HANDLERS[config.command](config)
    except (ValueError, RuntimeError) as err:
        logger.error(f"{config.command} failed: {err}")
        return EXIT_NUMERIC
    _emit(format_records(records, config.output_format), config.out)
    return EXIT_OK


def _common_arguments() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=2, help="Dimension of the sphere S^n.")
    common.add_argument(
        "--m",
        default="1.0",
        help="Mass, comma separated masses or an inclusive range start:step:stop.",
    )
    common.add_argument("--seed", type=int, default=0, help="Seed of every random draw.")
    common.add_argument("--tol", type=float, help="Convergence tolerance of quadratures.")
    common.add_argument("--max-nodes", type=int, help="Node cap of adaptive quadratures.")
    common.add_argument("--out", type=Path, help="Output file, standard output by default.")
    common.add_argument("--format", choices=OutputFormat.list(), help="Output format.")
    return common


def _point_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--t", type=float, help="Use the point cos(t) e_0 + sin(t) e_n.")
    parser.add_argument(
        "--z",
        help="First point: re:im entries separated by commas, or e0, en, xi0. "
        "Write --z=-1:0,... for entries starting with a minus sign.",
    )
    parser.add_argument("--w", help="Second point, e_0 by default.")


def build_parser() -> argparse.ArgumentParser:
    common = _common_arguments()
    parser = argparse.ArgumentParser(
        prog="pyrptorch",
        description="Reflection positive kernels on spheres and the crown of the hyperboloid.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    evaluate = commands.add_parser(Command.EVAL.value, parents=[common], help=Command.EVAL.value)
    _point_arguments(evaluate)
    evaluate.add_argument("--kernel", choices=KernelType.list(), default=KernelType.PSI.value)
    evaluate.add_argument("--nu", type=float, default=1.0, help="Exponent of Q_nu.")
    evaluate.add_argument("--lam", type=float, default=1.0, help="Parameter of C_lambda.")

    sweep = commands.add_parser(Command.SWEEP.value, parents=[common])
    _point_arguments(sweep)

    verify = commands.add_parser(Command.VERIFY.value, parents=[common])
    verify.add_argument("--suite", choices=Suite.list(), default=Suite.ALL.value)
    verify.add_argument(
        "--trials", type=int, default=100_000, help="Budget of randomized searches."
    )

    planewave = commands.add_parser(Command.PLANEWAVE.value, parents=[common])
    _point_arguments(planewave)

    oracle = commands.add_parser(Command.ORACLE.value, parents=[common])
    oracle.add_argument("oracle", choices=OracleType.list())
    oracle.add_argument("--c", type=float, default=0.0, help="Cosine x.y of the series.")
    oracle.add_argument("--max-degree", type=int, help="Fixed truncation degree.")
    oracle.add_argument(
        "--N", dest="grid", default="64,128,256,512", help="Grid sizes of the circle model."
    )

    geometry = commands.add_parser(Command.GEOMETRY.value, parents=[common])
    geometry.add_argument("action", choices=GeometryAction.list())
    geometry.add_argument("--z", required=True, help="Point, as for eval.")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Turn parsed arguments into a validated RunConfig.

    Raises:
        ValueError: For malformed points, mass ranges or out of range values.
    """
    command = Command(args.command)
    n = args.n
    values: dict[str, Any] = {
        "command": command,
        "n": n,
        "m": parse_mass_range(args.m),
        "seed": args.seed,
        "tol": args.tol,
        "max_nodes": args.max_nodes,
        "out": args.out,
        "format": OutputFormat(args.format) if args.format else None,
    }
    for name in ("z", "w"):
        text = getattr(args, name, None)
        if text is not None:
            values[name] = parse_point(n, text)
    if getattr(args, "t", None) is not None:
        values["t"] = args.t
    if command == Command.EVAL:
        values.update(kernel=KernelType(args.kernel), nu=args.nu, lam=args.lam)
    elif command == Command.VERIFY:
        values.update(suite=Suite(args.suite), trials=args.trials)
    elif command == Command.ORACLE:
        grid = [int(x) for x in args.grid.split(",")]
        values.update(
            oracle=OracleType(args.oracle), c=args.c, max_degree=args.max_degree, grid=grid
        )
    elif command == Command.GEOMETRY:
        values["action"] = GeometryAction(args.action)
    return RunConfig(**values)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
    except ValueError as err:
        parser.print_usage(sys.stderr)
        logger.error(f"invalid arguments: {err}")
        return EXIT_USAGE
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
