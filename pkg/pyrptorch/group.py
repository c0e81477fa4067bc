from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import reduce
from logging import getLogger
from typing import Any, Callable, Iterator

import torch
from torch import Tensor
from torch.nn import Module, ModuleList

from pyrptorch.matrices import (
    DEFAULT_MATRIX_DTYPE,
    DEFAULT_REAL_DTYPE,
    embed_block,
    iota,
    minkowski_metric,
)
from pyrptorch.utils import GROUP_TOL, Point, Scalar, as_point, as_real, to_complex

logger = getLogger(__name__)

ORTHOGONALITY_TOL = 1e-12
UNIT_TOL = 1e-12


def forward_hook(module: Module, args: Any, output: Tensor) -> None:
    logger.debug(f"{module.__class__.__name__} acted on a batch of shape {tuple(output.shape)}")


@dataclass
class BlockView:
    """g = [[a, i v^T], [i w, A]] for g in G^c."""

    a: float
    v: Tensor
    w: Tensor
    A: Tensor

    def assemble(self) -> Tensor:
        n = self.v.numel()
        g = torch.empty((n + 1, n + 1), dtype=DEFAULT_MATRIX_DTYPE)
        g[0, 0] = self.a
        g[0, 1:] = 1j * self.v
        g[1:, 0] = 1j * self.w
        g[1:, 1:] = self.A
        return g


class LorentzElement(Module):
    """An element L of O(1,n)^+ together with its complex realization g = iota L iota^{-1}.

    The complex matrix acts on column vectors of C^{n+1}; it preserves the complex bilinear
    form, the Minkowski space V, the tube over the future cone and the crown.
    """

    def __init__(self, L: Tensor, check: bool = True) -> None:
        super().__init__()
        L = as_real(L)
        if L.dim() != 2 or L.size(0) != L.size(1):
            raise ValueError(f"Expected a square matrix, got shape {tuple(L.shape)}.")
        self.n = L.size(0) - 1
        j = iota(self.n)
        self.register_buffer("L", L)
        self.register_buffer("g", j @ L.to(DEFAULT_MATRIX_DTYPE) @ torch.linalg.inv(j))
        if check:
            self.check_invariants(GROUP_TOL)

        if logger.isEnabledFor(logging.DEBUG):
            self.register_forward_hook(forward_hook)

    def extra_repr(self) -> str:
        return f"n={self.n}"

    def check_invariants(self, tol: float = GROUP_TOL) -> None:
        """Raise if L^T eta L != eta, L_00 <= 0 or g^T g != 1, relative to the size of L."""
        eta = minkowski_metric(self.n)
        scale = max(1.0, float(torch.linalg.matrix_norm(self.L)) ** 2)
        lorentz = float(torch.linalg.matrix_norm(self.L.T @ eta @ self.L - eta)) / scale
        eye = torch.eye(self.n + 1, dtype=DEFAULT_MATRIX_DTYPE)
        orthogonal = float(torch.linalg.matrix_norm(self.g.T @ self.g - eye)) / scale
        if lorentz > tol or orthogonal > tol:
            raise ValueError(
                f"Not a Lorentz matrix: |L^T eta L - eta| = {lorentz:.2e}, "
                f"|g^T g - 1| = {orthogonal:.2e} (tol {tol:.0e})."
            )
        if float(self.L[0, 0]) <= 0:
            raise ValueError("The Lorentz matrix is not orthochronous.")

    def forward(self, z: Point) -> Point:
        """The action g.z on points of shape (..., n+1)."""
        z = as_point(z)
        if z.size(-1) != self.n + 1:
            raise ValueError(f"Dimension mismatch: point of size {z.size(-1)}, n={self.n}.")
        return z @ self.g.T

    def __matmul__(self, other: LorentzElement) -> LorentzElement:
        return LorentzElement(self.L @ other.L, check=False)

    def inverse(self) -> LorentzElement:
        eta = minkowski_metric(self.n)
        return LorentzElement(eta @ self.L.T @ eta, check=False)

    def block_view(self) -> BlockView:
        L = self.L
        return BlockView(float(L[0, 0]), -L[0, 1:], L[1:, 0], L[1:, 1:])

    def boundary_action(self, u: Tensor) -> tuple[Tensor, Tensor]:
        """Action on the sphere S^{n-1} and conformal factor j(g, u).

        With g = [[a, i v^T], [i w, A]] one has g.xi_u = j(g, u) xi_{g.u} where
        j(g, u) = a - v.u and g.u = (w + A u) / j(g, u).

        Arguments:
            u: Unit vectors of shape (..., n).

        Returns:
            The pair (g.u, j(g, u)).
        """
        u = as_real(u)
        if bool(((torch.linalg.vector_norm(u, dim=-1) - 1).abs() > UNIT_TOL).any()):
            raise ValueError("The boundary action is defined on unit vectors only.")
        block = self.block_view()
        j = block.a - u @ block.v
        image = (block.w + u @ block.A.T) / j[..., None]
        return image, j

    def jlambda(self, u: Tensor, lam: Scalar) -> Tensor:
        """j_lambda(g, u) = j(g, u)^{-lambda-rho} with rho = (n-1)/2."""
        _, j = self.boundary_action(u)
        rho = (self.n - 1) / 2
        return torch.exp(-(to_complex(lam) + rho) * torch.log(j.to(DEFAULT_MATRIX_DTYPE)))


def identity(n: int) -> LorentzElement:
    return LorentzElement(torch.eye(n + 1, dtype=DEFAULT_REAL_DTYPE))


class Boost(LorentzElement):
    """a_t, the hyperbolic rotation in the (e_0, e_n)-plane."""

    def __init__(self, n: int, t: float) -> None:
        L = torch.eye(n + 1, dtype=DEFAULT_REAL_DTYPE)
        L[0, 0] = L[n, n] = math.cosh(t)
        L[0, n] = L[n, 0] = math.sinh(t)
        super().__init__(L)
        self.t = t

    def extra_repr(self) -> str:
        return f"n={self.n}, t={self.t}"


class Horospherical(LorentzElement):
    """n_v for v in R^{n-1}, fixing the light ray through xi0."""

    def __init__(self, v: Tensor) -> None:
        v = as_real(v).reshape(-1)
        n = v.numel() + 1
        s = float(v @ v) / 2
        L = torch.eye(n + 1, dtype=DEFAULT_REAL_DTYPE)
        L[0, 0], L[0, n], L[n, 0], L[n, n] = 1 + s, -s, s, 1 - s
        L[0, 1:n] = L[n, 1:n] = v
        L[1:n, 0] = v
        L[1:n, n] = -v
        super().__init__(L)


def _check_orthogonal(k: Tensor, size: int) -> Tensor:
    k = as_real(k)
    if k.shape != (size, size):
        raise ValueError(f"Expected an orthogonal {size}x{size} matrix, got {tuple(k.shape)}.")
    eye = torch.eye(size, dtype=DEFAULT_REAL_DTYPE)
    if float(torch.linalg.matrix_norm(k.T @ k - eye)) > ORTHOGONALITY_TOL:
        raise ValueError("The matrix is not orthogonal.")
    return k


class Rotation(LorentzElement):
    """diag(1, k) for k in O(n), the maximal compact subgroup K."""

    def __init__(self, k: Tensor) -> None:
        k = as_real(k)
        n = k.size(-1)
        super().__init__(embed_block(_check_orthogonal(k, n), n, 1))


class MRotation(LorentzElement):
    """diag(1, A, 1) for A in O(n-1), the centralizer M of the boosts in K."""

    def __init__(self, A: Tensor) -> None:
        A = as_real(A)
        n = A.size(-1) + 1
        super().__init__(embed_block(_check_orthogonal(A, n - 1), n, 1))


def make_boost(n: int, t: float) -> LorentzElement:
    return Boost(n, t)


def make_horospherical(v: Tensor) -> LorentzElement:
    return Horospherical(v)


def make_rotation(k: Tensor) -> LorentzElement:
    return Rotation(k)


def make_m(A: Tensor) -> LorentzElement:
    return MRotation(A)


def plane_rotation(n: int, theta: float, i: int, j: int) -> Tensor:
    """Orthogonal n x n matrix rotating the (i, j)-plane of R^n (0-based indices)."""
    k = torch.eye(n, dtype=DEFAULT_REAL_DTYPE)
    k[i, i] = k[j, j] = math.cos(theta)
    k[i, j], k[j, i] = -math.sin(theta), math.sin(theta)
    return k


def random_orthogonal(size: int, generator: torch.Generator) -> Tensor:
    """Haar distributed element of O(size) via the QR decomposition of a gaussian matrix."""
    x = torch.randn(size, size, generator=generator, dtype=DEFAULT_REAL_DTYPE)
    q, r = torch.linalg.qr(x)
    return q * torch.sign(torch.diagonal(r))


class LorentzWord(Module):
    """A product g_1 g_2 ... g_k of generators.

    Acting on a point applies g_k first and g_1 last.
    """

    def __init__(self, generators: list[LorentzElement]) -> None:
        super().__init__()
        if not generators:
            raise ValueError("A word needs at least one generator.")
        if len({g.n for g in generators}) != 1:
            raise ValueError("All generators of a word must act on the same dimension.")
        self.generators = ModuleList(generators)
        self.n = generators[0].n

        if logger.isEnabledFor(logging.DEBUG):
            self.register_forward_hook(forward_hook)

    def __iter__(self) -> Iterator[LorentzElement]:
        return iter(self.generators)  # type: ignore[arg-type]

    def __len__(self) -> int:
        return len(self.generators)

    def forward(self, z: Point) -> Point:
        for g in reversed(self.generators):
            z = g(z)
        return z

    def element(self) -> LorentzElement:
        return reduce(lambda x, y: x @ y, self.generators)  # type: ignore[no-any-return]

    def inverse(self) -> LorentzWord:
        return LorentzWord([g.inverse() for g in reversed(self.generators)])


def random_word(
    n: int,
    length: int,
    generator: torch.Generator,
    max_boost: float = 2.0,
    max_horo: float = 2.0,
) -> LorentzWord:
    """A word of the given length drawn uniformly from rotations, boosts and horospherical
    elements, with |t| <= max_boost and |v| <= max_horo."""
    gens: list[LorentzElement] = []
    kinds = torch.randint(0, 3, (length,), generator=generator)
    for kind in kinds.tolist():
        if kind == 0:
            gens.append(Rotation(random_orthogonal(n, generator)))
        elif kind == 1:
            t = (2 * torch.rand(1, generator=generator, dtype=DEFAULT_REAL_DTYPE) - 1) * max_boost
            gens.append(Boost(n, float(t)))
        else:
            v = torch.randn(n - 1, generator=generator, dtype=DEFAULT_REAL_DTYPE)
            radius = max_horo * torch.rand(1, generator=generator, dtype=DEFAULT_REAL_DTYPE)
            norm = torch.linalg.vector_norm(v)
            gens.append(Horospherical(v / norm * radius if norm > 0 else v))
    return LorentzWord(gens)


def random_element(n: int, generator: torch.Generator, max_length: int = 6) -> LorentzElement:
    length = int(torch.randint(1, max_length + 1, (1,), generator=generator))
    return random_word(n, length, generator).element()


def _rotation_token(n: int, args: list[float]) -> LorentzElement:
    if n < 2:
        raise ValueError("rot needs n >= 2.")
    theta, *plane = args
    i, j = (int(plane[0]), int(plane[1])) if plane else (n - 2, n - 1)
    return Rotation(plane_rotation(n, theta, i, j))


def _boost_token(n: int, args: list[float]) -> LorentzElement:
    if len(args) != 1:
        raise ValueError("boost takes exactly one parameter.")
    return Boost(n, args[0])


def _horo_token(n: int, args: list[float]) -> LorentzElement:
    if len(args) != n - 1:
        raise ValueError(f"horo takes {n - 1} parameters for n={n}.")
    return Horospherical(torch.tensor(args, dtype=DEFAULT_REAL_DTYPE))


GENERATOR_TOKENS: dict[str, Callable[[int, list[float]], LorentzElement]] = {
    "rot": _rotation_token,
    "boost": _boost_token,
    "horo": _horo_token,
}


def parse_word(n: int, text: str) -> LorentzWord:
    """Parse words like "rot:0.3,boost:1.2,horo:0.3,0.1".

    Each generator starts with `name:`; following comma separated entries without a name
    are further parameters of the previous generator. `rot:theta[:i:j]` rotates the (i, j)
    coordinate plane of R^n, by default the last two coordinates.
    """
    tokens: list[tuple[str, list[float]]] = []
    for piece in (p.strip() for p in text.split(",")):
        if not piece:
            raise ValueError(f"Empty entry in generator word {text!r}.")
        if ":" in piece:
            name, *values = piece.split(":")
            if name not in GENERATOR_TOKENS:
                raise ValueError(f"Unknown generator {name!r}, expected {list(GENERATOR_TOKENS)}.")
            tokens.append((name, [float(x) for x in values if x]))
        elif tokens:
            tokens[-1][1].append(float(piece))
        else:
            raise ValueError(f"Generator word {text!r} must start with a generator name.")
    return LorentzWord([GENERATOR_TOKENS[name](n, args) for name, args in tokens])


def principal_series_action(
    g: LorentzElement, phi: Callable[[Point], Tensor]
) -> Callable[[Point], Tensor]:
    """(pi_lambda(g) phi)(xi) = phi(g^{-1}.xi) for homogeneous functions on the light cone."""
    g_inv = g.inverse()

    def acted(xi: Point) -> Tensor:
        return phi(g_inv(xi))

    return acted


def act(g: LorentzElement | LorentzWord, z: Point) -> Point:
    return g(z)


def boundary_action(g: LorentzElement, u: Tensor) -> tuple[Tensor, Tensor]:
    return g.boundary_action(u)


def jlambda(g: LorentzElement, u: Tensor, lam: Scalar) -> Tensor:
    return g.jlambda(u, lam)
