from __future__ import annotations

import math

import torch
from torch import Tensor

from pyrptorch.matrices import DEFAULT_MATRIX_DTYPE, DEFAULT_REAL_DTYPE
from pyrptorch.utils import Point


def _uniform(count: int, low: float, high: float, generator: torch.Generator) -> Tensor:
    return low + (high - low) * torch.rand(count, generator=generator, dtype=DEFAULT_REAL_DTYPE)


def unit_vectors(count: int, size: int, generator: torch.Generator) -> Tensor:
    """Uniform samples of S^{size-1} in R^size."""
    x = torch.randn(count, size, generator=generator, dtype=DEFAULT_REAL_DTYPE)
    return x / torch.linalg.vector_norm(x, dim=-1, keepdim=True)


def random_orthogonal_batch(count: int, size: int, generator: torch.Generator) -> Tensor:
    x = torch.randn(count, size, size, generator=generator, dtype=DEFAULT_REAL_DTYPE)
    q, r = torch.linalg.qr(x)
    return q * torch.sign(torch.diagonal(r, dim1=-2, dim2=-1)).unsqueeze(-2)


def _radial(omega: Tensor, cos: Tensor, sin: Tensor) -> Point:
    return torch.cat([cos[:, None], sin[:, None] * omega], dim=-1)


def sample_half_sphere(
    n: int, count: int, generator: torch.Generator, margin: float = 0.0
) -> Point:
    """Points cos(t) e_0 + sin(t) omega of S^n_+ with t < pi/2 - margin."""
    t = _uniform(count, 0.0, math.pi / 2 - margin, generator)
    omega = unit_vectors(count, n, generator)
    return _radial(omega, torch.cos(t), torch.sin(t)).to(DEFAULT_MATRIX_DTYPE)


def sample_hyperbolic(n: int, count: int, generator: torch.Generator, max_t: float = 2.0) -> Point:
    """Points k a_t.e_0 = cosh(t) e_0 + i sinh(t) omega of the hyperboloid H^n_V."""
    t = _uniform(count, 0.0, max_t, generator)
    omega = unit_vectors(count, n, generator).to(DEFAULT_MATRIX_DTYPE)
    return _radial(1j * omega, torch.cosh(t).to(DEFAULT_MATRIX_DTYPE), torch.sinh(t))


def sample_light_cone(
    n: int, count: int, generator: torch.Generator, max_scale: float = 2.0
) -> Point:
    """Points s (1, i omega) of the forward light cone with 0 < s <= max_scale."""
    s = _uniform(count, 0.1, max_scale, generator).to(DEFAULT_MATRIX_DTYPE)
    omega = unit_vectors(count, n, generator).to(DEFAULT_MATRIX_DTYPE)
    ones = torch.ones(count, 1, dtype=DEFAULT_MATRIX_DTYPE)
    return s[:, None] * torch.cat([ones, 1j * omega], dim=-1)


def sample_de_sitter(n: int, count: int, generator: torch.Generator, max_t: float = 2.0) -> Point:
    """Points (i sinh t, cosh(t) omega) of de Sitter space, the boundary orbit of e_n."""
    t = _uniform(count, -max_t, max_t, generator)
    omega = unit_vectors(count, n, generator)
    head = 1j * torch.sinh(t).to(DEFAULT_MATRIX_DTYPE)
    return torch.cat([head[:, None], (torch.cosh(t)[:, None] * omega).to(head.dtype)], dim=-1)


def boost_batch(n: int, s: Tensor) -> Tensor:
    """Complex realizations of a_s for a batch of s."""
    g = torch.eye(n + 1, dtype=DEFAULT_MATRIX_DTYPE).repeat(s.numel(), 1, 1)
    ch, sh = torch.cosh(s).to(DEFAULT_MATRIX_DTYPE), torch.sinh(s).to(DEFAULT_MATRIX_DTYPE)
    g[:, 0, 0] = g[:, n, n] = ch
    g[:, 0, n] = -1j * sh
    g[:, n, 0] = 1j * sh
    return g


def rotation_batch(n: int, count: int, generator: torch.Generator) -> Tensor:
    k = torch.eye(n + 1, dtype=DEFAULT_MATRIX_DTYPE).repeat(count, 1, 1)
    k[:, 1:, 1:] = random_orthogonal_batch(count, n, generator).to(DEFAULT_MATRIX_DTYPE)
    return k


def sample_crown(
    n: int,
    count: int,
    generator: torch.Generator,
    max_boost: float = 3.0,
    margin: float = 0.0,
) -> Point:
    """Points k a_s.x of the crown, x in S^n_+, k in K and |s| <= max_boost.

    Every element of G^c is of the form k a_s k', so these are G^c-translates of the
    half-sphere.
    """
    x = sample_half_sphere(n, count, generator, margin)
    s = _uniform(count, -max_boost, max_boost, generator)
    g = rotation_batch(n, count, generator) @ boost_batch(n, s)
    return (g @ x.unsqueeze(-1)).squeeze(-1)
