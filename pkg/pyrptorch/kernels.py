from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from logging import getLogger
from typing import Any

import torch
from torch import Tensor
from torch.nn import Module

from pyrptorch.geometry import (
    bilinear,
    classify_boundary,
    in_v,
    on_sphere,
    sigma_R,
    sigma_V,
    sphere_point,
    xi_prime_contains,
)
from pyrptorch.matrices import DEFAULT_MATRIX_DTYPE, DEFAULT_REAL_DTYPE, basis
from pyrptorch.special import HypParams, gauss_2f1, log_gamma, pochhammer, principal_power
from pyrptorch.utils import GEOM_TOL, BoundaryType, Point, Regime, as_point

logger = getLogger(__name__)

PSD_TOL = 1e-10
HERMITIAN_TOL = 1e-12


def forward_hook(module: Module, args: Any, output: Tensor) -> None:
    logger.debug(f"{module.__class__.__name__} evaluated {output.numel()} kernel values")


@dataclass(frozen=True)
class MassParam:
    """Dimension n and mass m together with rho = (n-1)/2 and the spectral parameter
    lambda = sqrt(rho^2 - m^2), taken in [0, rho) for m < rho and in i[0, inf) for m >= rho."""

    n: int
    m: float

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}.")
        if not math.isfinite(self.m) or self.m < 0:
            raise ValueError(f"The mass must be a finite non-negative number, got {self.m}.")

    @property
    def rho(self) -> float:
        return (self.n - 1) / 2

    @property
    def regime(self) -> Regime:
        return Regime.COMPLEMENTARY if self.m < self.rho else Regime.PRINCIPAL

    @cached_property
    def lam(self) -> complex:
        if self.regime == Regime.COMPLEMENTARY:
            return complex(math.sqrt((self.rho - self.m) * (self.rho + self.m)), 0.0)
        return complex(0.0, math.sqrt((self.m - self.rho) * (self.m + self.rho)))

    @property
    def rho_plus_lambda(self) -> complex:
        return self.rho + self.lam

    @property
    def rho_minus_lambda(self) -> complex:
        # (rho - lambda)(rho + lambda) = m^2 avoids cancellation for small m
        if self.regime == Regime.COMPLEMENTARY:
            return complex(self.m**2 / (self.rho + self.lam.real), 0.0)
        return self.rho - self.lam

    def hyp_params(self) -> HypParams:
        return HypParams(self.rho_plus_lambda, self.rho_minus_lambda, self.n / 2)


def mass_param(n: int, m: float) -> MassParam:
    return MassParam(n, m)


def gamma_const(p: MassParam) -> float:
    """gamma_{n,m} = Gamma(rho + lambda) Gamma(rho - lambda) / Gamma(n).

    Raises:
        ValueError: At m = 0, where the constant has a pole.
    """
    if p.m == 0:
        raise ValueError("gamma_{n,m} has a pole at m = 0.")
    args = torch.tensor([p.rho_plus_lambda, p.rho_minus_lambda, p.n], dtype=DEFAULT_MATRIX_DTYPE)
    lg = log_gamma(args)
    return float(torch.exp(lg[0] + lg[1] - lg[2]).real)


@dataclass
class GramReport:
    """A sampled kernel matrix with its smallest eigenvalue and PSD verdict."""

    points: Tensor
    matrix: Tensor
    min_eig: float
    trace: float
    psd: bool
    tol: float


def gram_report(matrix: Tensor, points: Tensor | None = None, tol: float = PSD_TOL) -> GramReport:
    """Eigenvalue summary of a hermitian matrix; psd iff min_eig >= -tol * max(1, trace).

    Raises:
        ValueError: If the matrix is not hermitian within 1e-12 relative to its largest entry.
    """
    matrix = matrix.to(DEFAULT_MATRIX_DTYPE)
    scale = max(1.0, float(matrix.abs().max()))
    if float((matrix - matrix.mH).abs().max()) > HERMITIAN_TOL * scale:
        raise ValueError("The Gram matrix is not hermitian.")
    eigs = torch.linalg.eigvalsh((matrix + matrix.mH) / 2)
    trace = float(torch.diagonal(matrix).real.sum())
    min_eig = float(eigs.min())
    psd = min_eig >= -tol * max(1.0, trace)
    if logger.isEnabledFor(logging.DEBUG):
        logger.debug(f"Gram matrix of size {matrix.size(0)}: min_eig={min_eig:.3e}, trace={trace}")
    if points is None:
        points = torch.empty(0)
    return GramReport(points, matrix, min_eig, trace, psd, tol)


class Kernel(Module):
    """Base class of kernels on subsets of the complex sphere, evaluated pointwise on
    broadcastable batches of points of shape (..., n+1)."""

    def __init__(self, n: int) -> None:
        super().__init__()
        self.n = n
        if logger.isEnabledFor(logging.DEBUG):
            self.register_forward_hook(forward_hook)

    def _points(self, z: Point, w: Point) -> tuple[Tensor, Tensor]:
        z, w = as_point(z), as_point(w)
        if z.size(-1) != self.n + 1 or w.size(-1) != self.n + 1:
            raise ValueError(f"Kernel on S^{self.n} evaluated on points of the wrong size.")
        return z, w

    def pairing(self, z: Point, w: Point) -> Tensor:
        """[z, sigma_V w], the hermitian form underlying all invariant kernels."""
        return bilinear(z, sigma_V(w))

    def forward(self, z: Point, w: Point) -> Tensor:
        raise NotImplementedError

    def gram(self, points: Point, tol: float = PSD_TOL) -> GramReport:
        """Gram matrix of the kernel on `points` of shape (count, n+1).

        Only pairs with i <= j are evaluated; the lower triangle is filled with conjugates and
        the diagonal is taken real, so the matrix is hermitian exactly.
        """
        points = as_point(points)
        count = points.size(0)
        rows, cols = torch.triu_indices(count, count)
        upper = torch.as_tensor(self(points[rows], points[cols]), dtype=DEFAULT_MATRIX_DTYPE)
        matrix = torch.zeros(count, count, dtype=DEFAULT_MATRIX_DTYPE)
        matrix[cols, rows] = upper.conj()
        matrix[rows, cols] = upper
        diagonal = torch.arange(count)
        matrix[diagonal, diagonal] = matrix[diagonal, diagonal].real.to(DEFAULT_MATRIX_DTYPE)
        return gram_report(matrix, points, tol)


def _check_branch(arg: Tensor, what: str) -> None:
    if bool(((arg.imag == 0) & (arg.real >= 1)).any()):
        raise ValueError(f"{what}: the 2F1 argument reaches the branch cut [1, inf).")


class PsiKernel(Kernel):
    """Psi_m(z, w) = gamma_{n,m} 2F1(rho+lambda, rho-lambda; n/2; (1 - [z, sigma_V w])/2)."""

    def __init__(self, p: MassParam) -> None:
        super().__init__(p.n)
        self.p = p
        self.gamma = gamma_const(p)

    def extra_repr(self) -> str:
        return f"n={self.p.n}, m={self.p.m}"

    def forward(self, z: Point, w: Point) -> Tensor:
        z, w = self._points(z, w)
        arg = (1 - self.pairing(z, w)) / 2
        _check_branch(arg, "Psi_m")
        return self.gamma * gauss_2f1(self.p.hyp_params(), arg)


class PhiKernel(Kernel):
    """Phi_m(x, y) = gamma_{n,m} 2F1(rho+lambda, rho-lambda; n/2; (1 + x.sigma_R(y))/2),
    singular on the diagonal x = y."""

    def __init__(self, p: MassParam) -> None:
        super().__init__(p.n)
        self.p = p
        self.gamma = gamma_const(p)

    def extra_repr(self) -> str:
        return f"n={self.p.n}, m={self.p.m}"

    def forward(self, x: Point, y: Point) -> Tensor:
        x, y = self._points(x, y)
        arg = (1 + bilinear(x, sigma_R(y))) / 2
        if bool(((arg.imag == 0) & (arg.real >= 1)).any()):
            raise ValueError("Phi_m is singular on the diagonal x.y = 1.")
        return self.gamma * gauss_2f1(self.p.hyp_params(), arg)


class PhiCKernel(Kernel):
    """The normalized kernel Phi_m^c = Psi_m / Psi_m(e_0, e_0); identically 1 for m = 0."""

    def __init__(self, p: MassParam) -> None:
        super().__init__(p.n)
        self.p = p

    def extra_repr(self) -> str:
        return f"n={self.p.n}, m={self.p.m}"

    def forward(self, z: Point, w: Point) -> Tensor:
        z, w = self._points(z, w)
        pairing = self.pairing(z, w)
        if self.p.m == 0:
            return torch.ones_like(pairing)
        arg = (1 - pairing) / 2
        _check_branch(arg, "Phi_m^c")
        return gauss_2f1(self.p.hyp_params(), arg)


class CanonicalKernel(Kernel):
    """C_lambda(z, w) = [z, sigma_V w]^{-2 lambda} on the domain {z in crown : beta(z) > 0}."""

    def __init__(self, n: int, lam: float, tol: float = GEOM_TOL) -> None:
        super().__init__(n)
        if lam <= 0:
            raise ValueError(f"The canonical kernels need lambda > 0, got {lam}.")
        self.lam = lam
        self.tol = tol

    def extra_repr(self) -> str:
        return f"n={self.n}, lambda={self.lam}"

    def forward(self, z: Point, w: Point) -> Tensor:
        z, w = self._points(z, w)
        if not bool(xi_prime_contains(z, self.tol).all() and xi_prime_contains(w, self.tol).all()):
            raise ValueError("C_lambda is defined for points z of the crown with beta(z) > 0.")
        return principal_power(self.pairing(z, w), -2 * self.lam)


class QNuKernel(Kernel):
    """Q_nu(z, w) = ((1 + [z, sigma_V w]) / 2)^{-nu}."""

    def __init__(self, n: int, nu: float) -> None:
        super().__init__(n)
        if nu < 0:
            raise ValueError(f"nu must be non-negative, got {nu}.")
        self.nu = nu

    def extra_repr(self) -> str:
        return f"n={self.n}, nu={self.nu}"

    def forward(self, z: Point, w: Point) -> Tensor:
        z, w = self._points(z, w)
        base = (1 + self.pairing(z, w)) / 2
        if bool(((base.imag == 0) & (base.real <= 0)).any()):
            raise ValueError("Q_nu: the base (1 + [z, sigma_V w])/2 lies on (-inf, 0].")
        return principal_power(base, -self.nu)


class BerezinKernel(Module):
    """B_lambda(x, y) = ((1 - |x|^2)(1 - |y|^2) / (1 - x.y)^2)^lambda on the real unit ball."""

    def __init__(self, n: int, lam: float) -> None:
        super().__init__()
        self.n = n
        self.lam = lam

    def forward(self, x: Tensor, y: Tensor) -> Tensor:
        x = torch.as_tensor(x, dtype=DEFAULT_REAL_DTYPE)
        y = torch.as_tensor(y, dtype=DEFAULT_REAL_DTYPE)
        if bool(((x * x).sum(-1) >= 1).any() or ((y * y).sum(-1) >= 1).any()):
            raise ValueError("The Berezin kernel is defined on the open unit ball.")
        num = (1 - (x * x).sum(-1)) * (1 - (y * y).sum(-1))
        return (num / (1 - (x * y).sum(-1)) ** 2) ** self.lam


def ball_chart(x: Point) -> Tensor:
    """The chart (x_0, i bold x) -> bold x / x_0 from the hyperboloid H^n_V onto the ball."""
    x = as_point(x)
    return x[..., 1:].imag / x[..., 0].real[..., None]


def canonical_discrete_points(n: int, lam: float) -> list[float]:
    """The points s_j = rho - 2 lambda - 2j > 0 carrying point masses of the spectral measure
    of C_lambda, i.e. its complementary series part."""
    rho = (n - 1) / 2
    points = []
    j = 0
    while rho - 2 * lam - 2 * j > 0:
        points.append(rho - 2 * lam - 2 * j)
        j += 1
    return points


def q_nu_mass(n: int, nu: float) -> float:
    """The mass m_nu = sqrt(rho^2 - lambda_nu^2), lambda_nu = rho - nu, of the complementary
    series point mass of Q_nu for (n-2)/2 <= nu < rho. At nu = (n-2)/2, Q_nu = Phi^c_{m_nu}."""
    rho = (n - 1) / 2
    if not (n - 2) / 2 <= nu < rho:
        raise ValueError(f"Q_nu has a complementary point mass for {(n - 2) / 2} <= nu < {rho}.")
    lam = rho - nu
    return math.sqrt(rho**2 - lam**2)


def psi_kernel(p: MassParam, z: Point, w: Point) -> Tensor:
    return PsiKernel(p)(z, w)


def phi_kernel(p: MassParam, x: Point, y: Point) -> Tensor:
    return PhiKernel(p)(x, y)


def phi_c_kernel(p: MassParam, z: Point, w: Point) -> Tensor:
    return PhiCKernel(p)(z, w)


def canonical_kernel(lam: float, z: Point, w: Point) -> Tensor:
    return CanonicalKernel(as_point(z).size(-1) - 1, lam)(z, w)


def q_nu_kernel(nu: float, z: Point, w: Point) -> Tensor:
    return QNuKernel(as_point(z).size(-1) - 1, nu)(z, w)


def spherical_function(p: MassParam, x: Point, tol: float = GEOM_TOL) -> Tensor:
    """phi_m(x) = Phi_m^c(x, e_0) for x on the hyperboloid H^n_V.

    Raises:
        ValueError: If x is not on H^n_V.
    """
    x = as_point(x)
    if not bool((on_sphere(x, tol) & in_v(x, tol) & (x[..., 0].real > 0)).all()):
        raise ValueError("The spherical function is evaluated on the hyperboloid H^n_V.")
    return phi_c_kernel(p, x, basis(p.n, 0))


def spherical_function_radial(p: MassParam, t: Tensor | float) -> Tensor:
    """phi_m(a_t.e_0) = 2F1(rho+lambda, rho-lambda; n/2; -sinh^2(t/2))."""
    t = torch.as_tensor(t, dtype=DEFAULT_REAL_DTYPE)
    return gauss_2f1(p.hyp_params(), -torch.sinh(t / 2) ** 2)


def spherical_function_quadratic(p: MassParam, t: Tensor | float) -> Tensor:
    """phi_m(a_t.e_0) = 2F1((rho+lambda)/2, (rho-lambda)/2; n/2; -sinh^2(t))."""
    t = torch.as_tensor(t, dtype=DEFAULT_REAL_DTYPE)
    half = HypParams(p.rho_plus_lambda / 2, p.rho_minus_lambda / 2, p.n / 2)
    return gauss_2f1(half, -torch.sinh(t) ** 2)


def spherical_normalization(p: MassParam) -> float:
    """(n-1)! / (Gamma(rho+lambda) Gamma(rho-lambda)), so that phi_m = c Psi_m(., e_0)."""
    return 1.0 / gamma_const(p)


def odd_n_closed_form(p: MassParam, t: float) -> Tensor:
    """Elementary form of Psi_m((cos t, 0, ..., sin t), e_0) for odd n = 2k+1.

    With D = (2 / sin t) d/dt one has

        Psi_m = gamma_{n,m} (1/2)_k / prod_{j<k} (j^2 + m^2 - rho^2) D^k cos(lambda t),

    where cos(lambda t) = cosh(sqrt(m^2 - rho^2) t) for m >= rho. The derivatives are
    computed with torch autograd.

    Raises:
        ValueError: For even n, t outside (0, pi) or a vanishing denominator.
    """
    if p.n % 2 == 0:
        raise ValueError("The elementary closed form exists for odd n only.")
    if not 0 < t < math.pi:
        raise ValueError("t must lie in (0, pi).")
    k = (p.n - 1) // 2
    denominator = 1.0
    for j in range(k):
        denominator *= j**2 + p.m**2 - p.rho**2
    if abs(denominator) < 1e-12:
        raise ValueError(f"A factor j^2 + m^2 - rho^2 vanishes for n={p.n}, m={p.m}.")

    s = torch.tensor(t, dtype=DEFAULT_REAL_DTYPE, requires_grad=k > 0)
    if p.regime == Regime.COMPLEMENTARY:
        f = torch.cos(p.lam.real * s)
    else:
        f = torch.cosh(p.lam.imag * s)
    for _ in range(k):
        (df,) = torch.autograd.grad(f, s, create_graph=True)
        f = 2 * df / torch.sin(s)
    prefactor = gamma_const(p) * pochhammer(0.5, k).real / denominator
    return torch.as_tensor(prefactor * f.detach(), dtype=DEFAULT_MATRIX_DTYPE)


def radial_profile(p: MassParam, t: Tensor | float) -> Tensor:
    """eta(t) = Psi_m((cos t, 0, ..., 0, sin t), e_0)."""
    return psi_kernel(p, sphere_point(p.n, t), basis(p.n, 0))


def radial_ode_residual(p: MassParam, t: float, h: float = 1e-4) -> float:
    """|eta'' + (n-1) cot(t) eta' - m^2 eta| by central differences of step h.

    Raises:
        ValueError: If h > 1e-3 or t is within h of 0 or pi.
    """
    if h > 1e-3 or h <= 0:
        raise ValueError(f"The difference step must lie in (0, 1e-3], got {h}.")
    if not h < t < math.pi - h:
        raise ValueError(f"t={t} is too close to the poles 0 and pi.")
    grid = torch.tensor([t - h, t, t + h], dtype=DEFAULT_REAL_DTYPE)
    eta_minus, eta, eta_plus = radial_profile(p, grid).unbind()
    d1 = (eta_plus - eta_minus) / (2 * h)
    d2 = (eta_plus - 2 * eta + eta_minus) / h**2
    residual = d2 + (p.n - 1) / math.tan(t) * d1 - p.m**2 * eta
    return float(residual.abs())


def boundary_kernel_ds(p: MassParam, x: Point, w: Point, tol: float = GEOM_TOL) -> Tensor:
    """Boundary value of Phi_m^c at x in dS^n:
    2F1(rho+lambda, rho-lambda; n/2; (1 - [x, sigma_V w]) / 2)."""
    x = as_point(x)
    if classify_boundary(x, tol) != BoundaryType.DE_SITTER:
        raise ValueError("The first argument must be a point of de Sitter space.")
    return phi_c_kernel(p, x, w)


def boundary_kernel_ds_mirrored(
    p: MassParam, z: Point, y: Point, tol: float = GEOM_TOL
) -> Tensor:
    """Boundary value of Phi_m^c at y in dS^n:
    2F1(rho+lambda, rho-lambda; n/2; (1 + [z, y]) / 2)."""
    y = as_point(y)
    if classify_boundary(y, tol) != BoundaryType.DE_SITTER:
        raise ValueError("The second argument must be a point of de Sitter space.")
    arg = (1 + bilinear(z, y)) / 2
    _check_branch(arg, "boundary value of Phi_m^c")
    if p.m == 0:
        return torch.ones_like(arg)
    return gauss_2f1(p.hyp_params(), arg)


def boundary_q_nu(nu: float, z: Point, y: Point, tol: float = GEOM_TOL) -> Tensor:
    """Boundary value of Q_nu at y in dS^n: ((1 - [z, y]) / 2)^{-nu}."""
    y = as_point(y)
    if classify_boundary(y, tol) != BoundaryType.DE_SITTER:
        raise ValueError("The second argument must be a point of de Sitter space.")
    return principal_power((1 - bilinear(z, y)) / 2, -nu)

