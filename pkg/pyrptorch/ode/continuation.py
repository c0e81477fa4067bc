from __future__ import annotations

from logging import getLogger
from typing import Any

import torch
from torch import Tensor

from pyrptorch.ode.options import ContinuationOptions
from pyrptorch.ode.solvers import HypergeometricDormandPrince5
from pyrptorch.utils import Result, SolverType

logger = getLogger(__name__)

SOLVERS = {SolverType.DP5: HypergeometricDormandPrince5}


def continue_2f1(
    a: complex,
    b: complex,
    c: complex,
    z0: Tensor,
    z1: Tensor,
    f0: Tensor,
    df0: Tensor,
    solver: SolverType = SolverType.DP5,
    options: dict[str, Any] = {},
) -> Result:
    """Continue a solution of the hypergeometric equation along the segments [z0, z1].

    Args:
        a, b, c: parameters of the equation.
        z0 (Tensor): start points, shape `(batch,)`.
        z1 (Tensor): end points, shape `(batch,)`.
        f0 (Tensor): values of the solution at `z0`.
        df0 (Tensor): derivatives of the solution at `z0`.
        solver (SolverType): name of the solver to use.
        options (dict[str, Any], optional): passed to `ContinuationOptions`. Defaults to {}.

    Returns:
        Result: values and derivatives at `z1`.

    Raises:
        ValueError: If `solver` names no available solver.
    """
    opt = ContinuationOptions(**options)
    y0 = torch.stack([f0, df0], dim=1).to(opt.ctype)
    s = SOLVERS[SolverType(solver)](a, b, c, z0, z1, y0, opt)
    result = s.run()
    logger.debug(f"2F1 continuation of {z0.numel()} paths took {s.step_counter} steps")

    return Result(result[:, 0], result[:, 1])
