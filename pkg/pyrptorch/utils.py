from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from logging import getLogger
from typing import Any

import torch
from torch import Tensor

from pyrptorch.matrices import DEFAULT_MATRIX_DTYPE, DEFAULT_REAL_DTYPE

Point = Tensor
Scalar = complex | float | Tensor

GEOM_TOL = 1e-9
TANGENT_TOL = 1e-10
GROUP_TOL = 1e-10

logger = getLogger(__name__)


class StrEnum(str, Enum):
    def __str__(self) -> str:
        """Used when dumping enum fields in a schema."""
        ret: str = self.value
        return ret

    @classmethod
    def list(cls) -> list[str]:
        return list(map(lambda c: c.value, cls))  # type: ignore


class BoundaryType(StrEnum):
    """Classes of points of the closure of the crown."""

    DE_SITTER = "de_sitter"
    """Points of de Sitter space, the boundary orbit with vanishing light-like part."""
    LIGHT_RAY_ORBIT = "light_ray_orbit"
    """Points of the orbit of xi0 + e_{n-1}."""
    NOT_BOUNDARY = "not_boundary"
    """Interior points, points off the complex sphere, or points outside the closure."""


class Regime(StrEnum):
    """Regime of the spectral parameter lambda_m."""

    COMPLEMENTARY = "complementary"
    """m < rho: lambda is real and positive."""
    PRINCIPAL = "principal"
    """m >= rho: lambda is purely imaginary, including lambda = 0 at m = rho."""


def to_complex(value: Scalar) -> complex:
    """Turn a python number or a one-element tensor into a finite python complex."""
    if isinstance(value, Tensor):
        value = value.item()
    z = complex(value)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"Expected a finite complex number, got {value}.")
    return z


def as_point(z: Tensor | Any, dtype: torch.dtype = DEFAULT_MATRIX_DTYPE) -> Tensor:
    """Convert array-likes to complex tensors and reject non-finite entries."""
    z = torch.as_tensor(z, dtype=dtype)
    if not bool(torch.isfinite(z).all()):
        raise ValueError("Points must have finite coordinates.")
    return z


def as_real(x: Tensor | Any) -> Tensor:
    return torch.as_tensor(x, dtype=DEFAULT_REAL_DTYPE)


def generator(seed: int) -> torch.Generator:
    """A seeded CPU generator; every random draw in the package goes through one."""
    gen = torch.Generator()
    gen.manual_seed(seed)
    return gen


def rms_norm(x: Tensor) -> Tensor:
    """Root mean square over the last dimension, the error norm of adaptive integrators.

    Args:
        x: Tensor of shape `(..., k)`.

    Returns:
        Tensor of shape `(...)`.
    """
    return torch.linalg.vector_norm(x, dim=-1) / math.sqrt(x.size(-1))


@dataclass
class Result:
    """Values of a continued function at the requested end points."""

    values: Tensor
    derivatives: Tensor


class CheckMode(StrEnum):
    """How a check compares its measured value with the expected one."""

    ABSOLUTE = "absolute"
    """|got - expected| <= tol."""
    RELATIVE = "relative"
    """|got - expected| <= tol |expected|."""
    AT_LEAST = "at_least"
    """got >= expected - tol, for real values."""
    AT_MOST = "at_most"
    """got <= expected + tol, for real values."""


@dataclass
class CheckResult:
    """Outcome of a single verification check."""

    name: str
    expected: Any
    got: Any
    tol: float
    mode: CheckMode = CheckMode.ABSOLUTE
    passed: bool = field(init=False)

    def __post_init__(self) -> None:
        self.passed = check_close(self.got, self.expected, self.tol, self.mode)
        if logger.isEnabledFor(logging.DEBUG):
            logger.debug(f"check {self.name}: expected={self.expected} got={self.got}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "expected": _jsonable(self.expected),
            "got": _jsonable(self.got),
            "tol": self.tol,
            "pass": self.passed,
        }


def check_close(
    got: Any, expected: Any, tol: float, mode: CheckMode = CheckMode.ABSOLUTE
) -> bool:
    """Booleans and strings compare exactly, numbers according to the mode."""
    if isinstance(expected, (bool, str)) or expected is None:
        return bool(got == expected)
    got_c, exp_c = to_complex(got), to_complex(expected)
    if mode == CheckMode.AT_LEAST:
        return got_c.real >= exp_c.real - tol
    if mode == CheckMode.AT_MOST:
        return got_c.real <= exp_c.real + tol
    scale = max(abs(exp_c), 1e-300) if mode == CheckMode.RELATIVE else 1.0
    return bool(abs(got_c - exp_c) <= tol * scale)


def _jsonable(value: Any) -> Any:
    if isinstance(value, Tensor):
        value = value.item() if value.numel() == 1 else value.tolist()
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    return value


class SolverType(StrEnum):
    DP5 = "dp5"
    """Uses fifth-order Dormand-Prince continuation of the hypergeometric equation"""
