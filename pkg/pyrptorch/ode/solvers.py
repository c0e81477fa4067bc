from __future__ import annotations

import torch
from torch import Tensor

from pyrptorch.ode.integrators.adaptive import PathIntegrator
from pyrptorch.ode.methods.dp5 import DormandPrince5
from pyrptorch.ode.options import ContinuationOptions


class HypergeometricSolver(PathIntegrator):
    """The hypergeometric equation along straight segments `z(tau) = z0 + tau (z1 - z0)`.

    The state has shape `(batch, 2)` and holds `(F, dF/dz)` at `z(tau)`, one segment per row.
    """

    def __init__(
        self,
        a: complex,
        b: complex,
        c: complex,
        z0: Tensor,
        z1: Tensor,
        y0: Tensor,
        options: ContinuationOptions,
    ):
        super().__init__(y0, options)
        self.a, self.b, self.c = a, b, c
        self.z0 = z0
        self.delta = z1 - z0

    def ode_fun(self, tau: float, y: Tensor) -> Tensor:
        """z(1-z)F'' + (c - (a+b+1)z)F' - abF = 0 as a first order system in tau."""
        z = self.z0 + tau * self.delta
        f, df = y[:, 0], y[:, 1]
        d2f = (self.a * self.b * f - (self.c - (self.a + self.b + 1) * z) * df) / (z * (1 - z))
        return self.delta[:, None] * torch.stack([df, d2f], dim=1)


class HypergeometricDormandPrince5(HypergeometricSolver, DormandPrince5):
    pass
