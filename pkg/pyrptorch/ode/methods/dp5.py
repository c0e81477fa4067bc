from __future__ import annotations

from typing import Any

import torch
from torch import Tensor

from pyrptorch.ode.integrators.adaptive import PathIntegrator

# Butcher tableau of Dormand and Prince, A family of embedded Runge-Kutta formulae (1980)
NODES = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
STAGES = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
WEIGHTS_5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
WEIGHTS_4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)


class DormandPrince5(PathIntegrator):
    """Fifth order Dormand-Prince pair with a fourth order error estimate.

    The last stage is evaluated at the new point, so each accepted step costs six evaluations.
    """

    def __init__(self, *args: Any) -> None:
        super().__init__(*args)
        dtype = self.options.ctype
        self.weights = torch.tensor(WEIGHTS_5, dtype=dtype)
        self.error_weights = self.weights - torch.tensor(WEIGHTS_4, dtype=dtype)

    @property
    def order(self) -> int:
        return 5

    def step(self, tau: float, y: Tensor, f: Tensor, h: float) -> tuple[Tensor, Tensor, Tensor]:
        k = [f]
        for node, row in zip(NODES[1:], STAGES[1:]):
            dy = sum(coeff * ki for coeff, ki in zip(row, k) if coeff != 0.0)
            k.append(self.ode_fun(tau + node * h, y + h * dy))
        slopes = torch.stack(k)
        y_new = y + h * torch.tensordot(self.weights, slopes, dims=1)
        y_err = h * torch.tensordot(self.error_weights, slopes, dims=1)
        return k[-1], y_new, y_err
