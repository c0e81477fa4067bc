from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import dtype


@dataclass
class ContinuationOptions:
    """Tolerances and step size control of the 2F1 continuation."""

    atol: float = 1e-14
    rtol: float = 1e-13
    max_steps: int = 100_000
    safety_factor: float = 0.9
    min_factor: float = 0.2
    max_factor: float = 5.0
    ctype: dtype = torch.complex128
