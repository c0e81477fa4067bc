from __future__ import annotations

import torch
from torch import Tensor

DEFAULT_REAL_DTYPE = torch.float64
DEFAULT_MATRIX_DTYPE = torch.cdouble


def minkowski_metric(n: int, dtype: torch.dtype = DEFAULT_REAL_DTYPE) -> Tensor:
    """The Lorentz form eta = diag(1, -1, ..., -1) on R^{n+1}."""
    diag = -torch.ones(n + 1, dtype=dtype)
    diag[0] = 1.0
    return torch.diag(diag)


def iota(n: int, dtype: torch.dtype = DEFAULT_MATRIX_DTYPE) -> Tensor:
    """The map iota = diag(1, i, ..., i) sending R^{1,n} onto V = R e_0 + iR^n."""
    diag = torch.full((n + 1,), 1j, dtype=dtype)
    diag[0] = 1.0
    return torch.diag(diag)


def basis(n: int, k: int, dtype: torch.dtype = DEFAULT_MATRIX_DTYPE) -> Tensor:
    """The standard basis vector e_k of C^{n+1}."""
    if not 0 <= k <= n:
        raise ValueError(f"Basis index {k} out of range for n={n}.")
    e = torch.zeros(n + 1, dtype=dtype)
    e[k] = 1.0
    return e


def embed_block(
    block: Tensor, n: int, start: int, dtype: torch.dtype = DEFAULT_REAL_DTYPE
) -> Tensor:
    """Place a square block on the diagonal of the (n+1)x(n+1) identity, starting at `start`."""
    size = block.size(-1)
    if start + size > n + 1:
        raise ValueError(f"A block of size {size} does not fit at index {start} for n={n}.")
    mat = torch.eye(n + 1, dtype=dtype)
    mat[start : start + size, start : start + size] = block.to(dtype)
    return mat
