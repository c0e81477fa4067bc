from __future__ import annotations

import math
from dataclasses import dataclass
from logging import getLogger

import torch
from torch import Tensor

from pyrptorch.matrices import DEFAULT_MATRIX_DTYPE, basis
from pyrptorch.special import entire_C, entire_S
from pyrptorch.utils import GEOM_TOL, TANGENT_TOL, BoundaryType, Point, Scalar, as_point

logger = getLogger(__name__)


@dataclass
class VDecomposition:
    """Splitting z = u + i v with u, v in V = R e_0 + i R^n."""

    u: Point
    v: Point

    def reconstruct(self) -> Point:
        return self.u + 1j * self.v


def xi0(n: int) -> Point:
    """The light-like vector e_0 + i e_n."""
    return basis(n, 0) + 1j * basis(n, n)


def xi_u(u: Tensor) -> Point:
    """Light-cone points (1, i u) for unit vectors u of shape (..., n)."""
    u = torch.as_tensor(u, dtype=DEFAULT_MATRIX_DTYPE)
    ones = torch.ones(u.shape[:-1] + (1,), dtype=DEFAULT_MATRIX_DTYPE)
    return torch.cat([ones, 1j * u], dim=-1)


def sphere_point(n: int, t: Scalar | Tensor) -> Point:
    """cos(t) e_0 + sin(t) e_n, batched over t."""
    t = torch.as_tensor(t, dtype=DEFAULT_MATRIX_DTYPE)
    return torch.cos(t)[..., None] * basis(n, 0) + torch.sin(t)[..., None] * basis(n, n)


def hyperbolic_point(n: int, t: Scalar | Tensor) -> Point:
    """a_t.e_0 = cosh(t) e_0 + i sinh(t) e_n, batched over t; t may be complex."""
    t = torch.as_tensor(t, dtype=DEFAULT_MATRIX_DTYPE)
    return torch.cosh(t)[..., None] * basis(n, 0) + 1j * torch.sinh(t)[..., None] * basis(n, n)


def de_sitter_limit_path(n: int, t: float, r: Scalar | Tensor) -> Point:
    """The crown path a_{t - ir}.e_0, which tends to -i sinh(t) e_0 + cosh(t) e_n in dS^n
    as r increases to pi/2."""
    return hyperbolic_point(n, t - 1j * torch.as_tensor(r, dtype=DEFAULT_MATRIX_DTYPE))


def bilinear(z: Point, w: Point) -> Tensor:
    """The complex bilinear form z.w = sum_j z_j w_j, batched over leading dimensions."""
    z, w = as_point(z), as_point(w)
    if z.size(-1) != w.size(-1):
        raise ValueError(f"Dimension mismatch: {z.size(-1)} != {w.size(-1)}.")
    return (z * w).sum(-1)


def sigma_R(z: Point) -> Point:
    """Complex conjugation, fixing R^{n+1}."""
    return as_point(z).conj()


def sigma_V(z: Point) -> Point:
    """(z_0, z_1, ..., z_n) -> (conj z_0, -conj z_1, ..., -conj z_n), fixing V."""
    z = as_point(z)
    out = -z.conj()
    out[..., 0] = z[..., 0].conj()
    return out


def reflect(z: Point, k: int) -> Point:
    """The reflection r_k changing the sign of the k-th coordinate."""
    out = as_point(z).clone()
    out[..., k] = -out[..., k]
    return out


def r0(z: Point) -> Point:
    return reflect(z, 0)


def v_decompose(z: Point) -> VDecomposition:
    z = as_point(z)
    u = 1j * z.imag.to(z.dtype)
    u[..., 0] = z[..., 0].real
    v = -1j * z.real.to(z.dtype)
    v[..., 0] = z[..., 0].imag
    return VDecomposition(u, v)


def in_v(z: Point, tol: float = GEOM_TOL) -> Tensor:
    """Membership in V: real 0th coordinate and purely imaginary others."""
    z = as_point(z)
    return (z[..., 0].imag.abs() <= tol) & (z[..., 1:].real.abs() <= tol).all(-1)


def on_sphere(z: Point, tol: float = GEOM_TOL) -> Tensor:
    return (bilinear(z, z) - 1).abs() <= tol


def on_light_cone(xi: Point, tol: float = GEOM_TOL) -> Tensor:
    """Forward light cone in V: [xi, xi] = 0 with xi_0 > 0."""
    return in_v(xi, tol) & (bilinear(xi, xi).abs() <= tol) & (as_point(xi)[..., 0].real > 0)


def in_tube(z: Point, tol: float = GEOM_TOL) -> Tensor:
    """Membership in the tube V_+ + iV: the V-part u of z is future time-like."""
    z = as_point(z)
    re0 = z[..., 0].real
    return (re0 > 0) & (re0**2 - (z[..., 1:].imag ** 2).sum(-1) > tol)


def in_crown(z: Point, tol: float = GEOM_TOL) -> Tensor:
    """Membership in the crown, the intersection of the tube with the complex sphere."""
    return on_sphere(z, tol) & in_tube(z, tol)


def classify_boundary(z: Point, tol: float = GEOM_TOL) -> BoundaryType:
    """Classify a point of the closure of the crown.

    Boundary points are the u + iv with [u,u] = 0, u_0 >= 0, [v,v] = -1 and [u,v] = 0. They
    lie on de Sitter space when u = 0 and on the orbit of xi0 + e_{n-1} otherwise.
    """
    z = as_point(z)
    if z.dim() != 1:
        raise ValueError("classify_boundary expects a single point.")
    parts = v_decompose(z)
    u, v = parts.u, parts.v
    boundary = (
        bool(on_sphere(z, tol))
        and abs(complex(bilinear(u, u))) <= tol
        and float(u[0].real) >= -tol
        and abs(complex(bilinear(v, v)) + 1) <= tol
        and abs(complex(bilinear(u, v))) <= tol
    )
    if not boundary:
        return BoundaryType.NOT_BOUNDARY
    if float(torch.linalg.vector_norm(u)) <= tol:
        return BoundaryType.DE_SITTER
    return BoundaryType.LIGHT_RAY_ORBIT


def exp_point(p: Point, v: Point, tol: float = TANGENT_TOL) -> Point:
    """Exponential map of the complex sphere, Exp_p(v) = C(v.v) p + S(v.v) v.

    Raises:
        ValueError: If p is not on the sphere or v is not tangent at p.
    """
    p, v = as_point(p), as_point(v)
    if not bool(on_sphere(p, tol).all()):
        raise ValueError("The base point of the exponential map must lie on the sphere.")
    if not bool((bilinear(p, v).abs() <= tol).all()):
        raise ValueError("The vector is not tangent to the sphere at the base point.")
    q = bilinear(v, v)
    return entire_C(q)[..., None] * p + entire_S(q)[..., None] * v


def crown_from_de_sitter(v: Point, t: float = 1.0, tol: float = TANGENT_TOL) -> Point:
    """Exp_{e_n}(t v) for v in the cone R_+ e_0 + iR^{n-1} with 0 < [tv, tv] < pi^2.

    Every such point lies in the crown, and the crown is the G^c-orbit of these points.
    """
    v = as_point(v)
    n = v.size(-1) - 1
    tv = t * v
    cone = (
        bool((tv[..., 0].imag.abs() <= tol).all())
        and bool((tv[..., 0].real > 0).all())
        and bool((tv[..., 1:n].real.abs() <= tol).all())
        and bool((tv[..., n].abs() <= tol).all())
    )
    norm = bilinear(tv, tv)
    if not cone or not bool(((norm.real > 0) & (norm.real < math.pi**2)).all()):
        raise ValueError("The tangent vector does not lie in the cone of radius pi at e_n.")
    return exp_point(basis(n, n), tv, tol)


def ray_inversion(z: Point) -> Point:
    """r(z) = z / (z.z), an involution of the complement of the null cone."""
    z = as_point(z)
    det = bilinear(z, z)
    if bool((det == 0).any()):
        raise ValueError("Ray inversion is undefined where z.z = 0.")
    return z / det[..., None]


def alpha(z: Point) -> Point:
    """Jordan conjugation (z_0, bold z) -> (z_0, -bold z)."""
    out = -as_point(z).clone()
    out[..., 0] = -out[..., 0]
    return out


def jordan_det(z: Point) -> Tensor:
    return bilinear(z, z)


def jordan_product(x: Point, y: Point) -> Point:
    """(t, bold x)(s, bold y) = (ts - bold x . bold y, t bold y + s bold x)."""
    x, y = as_point(x), as_point(y)
    t, s = x[..., :1], y[..., :1]
    head = t * s - (x[..., 1:] * y[..., 1:]).sum(-1, keepdim=True)
    return torch.cat([head, t * y[..., 1:] + s * x[..., 1:]], dim=-1)


def jordan_inverse(x: Point, tol: float = 0.0) -> Point:
    det = jordan_det(x)
    if bool((det.abs() <= tol).any()):
        raise ValueError("Singular Jordan element: z.z = 0.")
    return alpha(x) / det[..., None]


def cayley(z: Point) -> Point:
    """Cayley transform C(z) = (z - e)(z + e)^{-1}, e = e_0."""
    z = as_point(z)
    e = basis(z.size(-1) - 1, 0)
    return jordan_product(z - e, jordan_inverse(z + e))


def lie_ball_contains(w: Point, tol: float = GEOM_TOL) -> Tensor:
    """Membership of w in {0} x (Lie ball): |w|^2 + sqrt(|w|^4 - |w.w|^2) < 1."""
    w = as_point(w)
    bold = w[..., 1:]
    norm2 = (bold.abs() ** 2).sum(-1)
    square = (bold * bold).sum(-1).abs()
    root = torch.sqrt(torch.clamp(norm2**2 - square**2, min=0.0))
    return (w[..., 0].abs() <= tol) & (norm2 + root < 1)


def beta_form(z: Point) -> Tensor:
    """beta(z) = [z, sigma_V z] = |z_0|^2 - sum_j |z_j|^2."""
    return bilinear(z, sigma_V(z)).real


def xi_prime_contains(z: Point, tol: float = GEOM_TOL) -> Tensor:
    """Membership in the domain of the canonical kernels, {z in crown : beta(z) > 0}."""
    return in_crown(z, tol) & (beta_form(z) > tol)


def zeta_map(z: Scalar | Tensor) -> Point:
    """The n = 1 chart C^x -> S^1_C, z -> (1/2 (z + 1/z), 1/(2i) (z - 1/z))."""
    z = torch.as_tensor(z, dtype=DEFAULT_MATRIX_DTYPE)
    if bool((z == 0).any()):
        raise ValueError("zeta is undefined at 0.")
    return torch.stack([(z + 1 / z) / 2, (z - 1 / z) / 2j], dim=-1)


def zeta_inverse(p: Point) -> Tensor:
    p = as_point(p)
    if p.size(-1) != 2:
        raise ValueError("zeta_inverse expects points of the complex circle.")
    return p[..., 0] + 1j * p[..., 1]
