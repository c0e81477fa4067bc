from __future__ import annotations

from abc import abstractmethod
from logging import getLogger

import torch
from torch import Tensor

from pyrptorch.ode.options import ContinuationOptions
from pyrptorch.utils import rms_norm

logger = getLogger(__name__)


class PathIntegrator:
    """Embedded Runge-Kutta integration of `dy/dtau = f(tau, y)` for `tau` in `[0, 1]`.

    The state `y` has shape `(batch, k)`, one row per path. All paths share the step, whose
    size is controlled by the worst path, following Chapter II.4 of [1].

    [1] Hairer et al., Solving Ordinary Differential Equations I (1993), Springer
        Series in Computational Mathematics.
    """

    def __init__(self, y0: Tensor, options: ContinuationOptions):
        self.y0 = y0
        self.options = options
        self.step_counter = 0

    @property
    @abstractmethod
    def order(self) -> int:
        pass

    @abstractmethod
    def ode_fun(self, tau: float, y: Tensor) -> Tensor:
        pass

    @abstractmethod
    def step(self, tau: float, y: Tensor, f: Tensor, h: float) -> tuple[Tensor, Tensor, Tensor]:
        """One embedded step; returns the slope at the new point, the new state and the
        difference of the two embedded solutions."""
        pass

    def _scale(self, y0: Tensor, y1: Tensor | None = None) -> Tensor:
        size = y0.abs() if y1 is None else torch.maximum(y0.abs(), y1.abs())
        return self.options.atol + self.options.rtol * size

    @torch.no_grad()
    def error(self, y_err: Tensor, y0: Tensor, y1: Tensor) -> float:
        """Eq. (4.11) of [1], maximized over paths."""
        return float(rms_norm(y_err / self._scale(y0, y1)).max())

    @torch.no_grad()
    def initial_step(self, y0: Tensor, f0: Tensor) -> float:
        """Starting step size, eq. (4.14) of [1]."""
        sc = self._scale(y0)
        d0 = float(rms_norm(y0 / sc).max())
        d1 = float(rms_norm(f0 / sc).max())
        h0 = 1e-6 if min(d0, d1) < 1e-5 else 0.01 * d0 / d1
        f1 = self.ode_fun(h0, y0 + h0 * f0)
        d2 = float(rms_norm((f1 - f0) / sc).max()) / h0
        if max(d1, d2) <= 1e-15:
            h1 = max(1e-6, 1e-3 * h0)
        else:
            h1 = (0.01 / max(d1, d2)) ** (1.0 / (self.order + 1))
        return min(100 * h0, h1, 1.0)

    def next_step(self, h: float, error: float) -> float:
        """Step size after a step with the given error, eqs. (4.12) and (4.13) of [1]."""
        opt = self.options
        if error == 0:
            return h * opt.max_factor
        factor = opt.safety_factor * error ** (-1.0 / self.order)
        if error <= 1:
            # accepted steps never shrink
            return h * min(opt.max_factor, max(1.0, factor))
        return h * max(opt.min_factor, factor)

    def _count(self, tau: float) -> None:
        self.step_counter += 1
        if self.step_counter >= self.options.max_steps:
            raise RuntimeError(
                f"The continuation stopped at tau={tau:.3g} after {self.step_counter} steps"
                f" (`max_steps={self.options.max_steps}`). The path probably passes too"
                " close to a singular point of the equation."
            )

    def run(self) -> Tensor:
        """Integrate from `tau = 0` to `tau = 1` and return the final state."""
        tau, y = 0.0, self.y0
        f = self.ode_fun(tau, y)
        h = self.initial_step(y, f)
        rejected = 0
        while tau < 1.0:
            h_try = min(h, 1.0 - tau)
            f_new, y_new, y_err = self.step(tau, y, f, h_try)
            error = self.error(y_err, y, y_new)
            if error <= 1:
                tau = 1.0 if h_try == 1.0 - tau else tau + h_try
                y, f = y_new, f_new
            else:
                rejected += 1
            h = self.next_step(h_try if error > 1 else h, error)
            self._count(tau)
        logger.debug(f"path integration: {self.step_counter} steps, {rejected} rejected")
        return y
