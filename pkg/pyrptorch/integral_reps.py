from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import partial
from logging import getLogger
from typing import Callable

import torch
from torch import Tensor

from pyrptorch.geometry import bilinear, in_crown, on_light_cone, sigma_V, xi_u
from pyrptorch.group import LorentzElement, principal_series_action
from pyrptorch.kernels import MassParam, PsiKernel
from pyrptorch.matrices import DEFAULT_MATRIX_DTYPE, basis
from pyrptorch.quadrature import (
    QuadratureOptions,
    QuadratureResult,
    QuadratureRule,
    adaptive_integral,
    adaptive_sphere_integral,
    radial_integral,
    singular_rule,
)
from pyrptorch.special import log_gamma, principal_power
from pyrptorch.utils import GEOM_TOL, Point, Scalar, as_point, to_complex

logger = getLogger(__name__)

BoundaryFunction = Callable[[Point], Tensor]


@dataclass
class BoundaryFunctionSamples:
    """A function of H_lambda sampled at the points xi_u for the nodes u of a rule on S^{n-1}.

    Functions of H_lambda are homogeneous, phi(t xi) = t^{-lambda-rho} phi(xi), so the values on
    the section xi_u determine them. When `fn` is given the samples can be moved to other nodes.
    """

    rule: QuadratureRule
    values: Tensor
    lam: complex
    fn: BoundaryFunction | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.values.shape[-1] != len(self.rule):
            raise ValueError(
                f"{self.values.shape[-1]} samples for a rule with {len(self.rule)} nodes."
            )

    def resample(self, rule: QuadratureRule) -> BoundaryFunctionSamples:
        if self.fn is None:
            raise ValueError("Resampling needs the function the samples were taken from.")
        return boundary_samples(self.lam, rule, self.fn)

    def translate(self, g: LorentzElement) -> BoundaryFunctionSamples:
        """pi_lambda(g) phi = phi o g^{-1} sampled on the same nodes."""
        if self.fn is None:
            raise ValueError("Translation needs the function the samples were taken from.")
        return boundary_samples(self.lam, self.rule, principal_series_action(g, self.fn))


def boundary_samples(
    lam: Scalar, rule: QuadratureRule, fn: BoundaryFunction
) -> BoundaryFunctionSamples:
    values = torch.as_tensor(fn(xi_u(rule.nodes)), dtype=DEFAULT_MATRIX_DTYPE)
    return BoundaryFunctionSamples(rule, values, to_complex(lam), fn)


def _check_cone(xi: Point, tol: float) -> None:
    if not bool(on_light_cone(xi, tol).all()):
        raise ValueError("The point is not on the forward light cone.")


def one_lambda(p: MassParam, xi: Point, tol: float = GEOM_TOL) -> Tensor:
    """The K-fixed vector 1_lambda(xi) = [e_0, xi]^{-lambda-rho} of H_lambda."""
    xi = as_point(xi)
    _check_cone(xi, tol)
    return principal_power(xi[..., 0], -p.lam - p.rho)


def lightcone_constant(n: int, lam: Scalar) -> complex:
    """2^{lambda+(n-3)/2} Gamma(n/2) Gamma(lambda) / (sqrt(pi) Gamma(lambda+rho)).

    The constant equals 1 at lambda = rho.
    """
    lam = to_complex(lam)
    rho = (n - 1) / 2
    if lam == rho:
        return 1 + 0j
    lg = log_gamma(torch.tensor([n / 2, lam, lam + rho], dtype=DEFAULT_MATRIX_DTYPE))
    log_const = (lam + (n - 3) / 2) * math.log(2) - 0.5 * math.log(math.pi)
    return complex(torch.exp(log_const + lg[0] + lg[1] - lg[2]))


def _cone_split(n: int, x: Point, tol: float) -> tuple[float, Tensor]:
    x = as_point(x)
    if x.dim() != 1 or x.size(-1) != n + 1:
        raise ValueError(f"Expected a single light cone point of size {n + 1}.")
    _check_cone(x, tol)
    scale = float(x[0].real)
    return scale, x[1:].imag / scale


def lightcone_integral(
    n: int,
    lam: Scalar,
    x: Point,
    phi: Callable[[Tensor], Tensor] | None = None,
    options: QuadratureOptions = QuadratureOptions(),
    tol: float = GEOM_TOL,
) -> QuadratureResult:
    """int_{S^{n-1}} [x, xi_u]^{lambda-rho} phi(u) dmu(u) for x = s (1, i omega) on the light cone.

    Since [x, xi_u] = s (1 - omega.u), the singular factor is absorbed into Gauss-Jacobi rules
    with pole omega. phi defaults to 1.

    Raises:
        ValueError: If Re lambda <= 0, where the integral diverges, or x is not on the cone.
    """
    lam = to_complex(lam)
    if lam.real <= 0:
        raise ValueError(f"The light cone integral converges for Re lambda > 0 only, got {lam}.")
    rho = (n - 1) / 2
    scale, pole = _cone_split(n, x, tol)
    exponent = lam - rho

    def integrand(u: Tensor) -> Tensor:
        values = torch.ones(u.shape[:-1], dtype=DEFAULT_MATRIX_DTYPE)
        if exponent.imag != 0:
            base = torch.clamp(1 - u @ pole, min=0.0).to(DEFAULT_MATRIX_DTYPE)
            values = principal_power(base, 1j * exponent.imag)
        if phi is not None:
            values = values * torch.as_tensor(phi(u), dtype=DEFAULT_MATRIX_DTYPE)
        return values

    result = adaptive_integral(
        partial(singular_rule, n - 1, pole, exponent.real), integrand, options
    )
    result.value = result.value * scale**exponent
    return result


def lightcone_closed_form(n: int, lam: Scalar, x: Point) -> Tensor:
    """lightcone_constant(n, lambda) [e_0, x]^{lambda - rho}."""
    x = as_point(x)
    lam = to_complex(lam)
    return lightcone_constant(n, lam) * principal_power(x[..., 0], lam - (n - 1) / 2)


def poisson_kernel(p: MassParam, z: Point, xi: Point, tol: float = GEOM_TOL) -> Tensor:
    """P_lambda(z, xi) = [z, xi]^{-lambda-rho} for z in the crown and xi on the light cone.

    Raises:
        ValueError: If z is not in the crown or xi is not on the forward light cone.
    """
    z, xi = as_point(z), as_point(xi)
    if not bool(in_crown(z, tol).all()):
        raise ValueError("The Poisson kernel is defined for points of the crown.")
    _check_cone(xi, tol)
    return principal_power(bilinear(z, xi), -p.lam - p.rho)


def poisson_transform(p: MassParam, phi: BoundaryFunctionSamples, z: Point) -> Tensor:
    """(P_lambda phi)(z) = int_{S^{n-1}} P_lambda(z, xi_u) phi(xi_u) dmu(u) on the nodes of phi.

    Raises:
        ValueError: If the rule of phi does not live on S^{n-1} or phi is not in H_lambda.
    """
    if phi.rule.dim != p.n - 1:
        raise ValueError(f"Boundary samples on S^{phi.rule.dim} for n={p.n}.")
    if abs(phi.lam - p.lam) > 1e-12:
        raise ValueError(f"Boundary samples of H_{phi.lam} for lambda={p.lam}.")
    z = as_point(z)
    xi = xi_u(phi.rule.nodes)
    kernel = poisson_kernel(p, z[..., None, :], xi)
    return phi.rule.integrate(kernel * phi.values)


def intertwiner_A(
    p: MassParam,
    phi: BoundaryFunctionSamples,
    x: Point,
    options: QuadratureOptions = QuadratureOptions(),
) -> Tensor:
    """(A_lambda phi)(x) = lightcone_constant^{-1} int [x, xi_u]^{lambda-rho} phi(xi_u) dmu(u).

    A_lambda maps H_lambda to H_{-lambda} and intertwines pi_lambda with pi_{-lambda}.

    Raises:
        ValueError: In the principal regime or when phi cannot be resampled.
    """
    if p.m >= p.rho:
        raise ValueError("The intertwiner A_lambda is built for the complementary regime m < rho.")
    if phi.fn is None:
        raise ValueError("The intertwiner needs the function the samples were taken from.")
    fn = phi.fn

    def values(u: Tensor) -> Tensor:
        return fn(xi_u(u))

    result = lightcone_integral(p.n, p.lam, x, values, options)
    return result.value / lightcone_constant(p.n, p.lam)


def planewave_integrand(p: MassParam, z: Point, w: Point) -> Callable[[Tensor], Tensor]:
    z, w_bar = as_point(z), sigma_V(as_point(w))

    def integrand(u: Tensor) -> Tensor:
        xi = xi_u(u)
        left = principal_power(bilinear(w_bar, xi), p.lam - p.rho)
        return left * principal_power(bilinear(z, xi), -p.lam - p.rho)

    return integrand


def planewave_quadrature(
    p: MassParam,
    z: Point,
    w: Point,
    options: QuadratureOptions = QuadratureOptions(),
    tol: float = GEOM_TOL,
) -> QuadratureResult:
    """int_{S^{n-1}} [sigma_V(w), xi_u]^{lambda-rho} [z, xi_u]^{-lambda-rho} dmu(u) by adaptive
    sphere rules, together with the node count and the last difference of the doubling."""
    z, w = as_point(z), as_point(w)
    if not bool(in_crown(z, tol).all() and in_crown(w, tol).all()):
        raise ValueError("The plane wave representation is evaluated on the crown.")
    return adaptive_sphere_integral(p.n - 1, planewave_integrand(p, z, w), options)


def phi_c_via_planewaves(
    p: MassParam, z: Point, w: Point, options: QuadratureOptions = QuadratureOptions()
) -> complex:
    return complex(planewave_quadrature(p, z, w, options).value)


def reproducing_pairing(p: MassParam, z: Point, w: Point, rule: QuadratureRule) -> Tensor:
    """The pairing of P_{-conj(lambda), w} and P_{lambda, z} discretized on the nodes of a rule."""
    z, w = as_point(z), as_point(w)
    xi = xi_u(rule.nodes)
    left = principal_power(bilinear(w, xi), p.lam.conjugate() - p.rho).conj()
    return rule.integrate(left * poisson_kernel(p, z, xi))


def spherical_function_integral(
    p: MassParam, x: Point, options: QuadratureOptions = QuadratureOptions()
) -> QuadratureResult:
    """phi_m(x) = int_{S^{n-1}} [x, xi_u]^{-lambda-rho} dmu(u)."""
    x = as_point(x)
    e0 = basis(p.n, 0)
    return adaptive_sphere_integral(p.n - 1, planewave_integrand(p, x, e0), options)


def l2_normalization(p: MassParam, options: QuadratureOptions = QuadratureOptions()) -> float:
    """int_{S^n} Psi_m(x, e_0) dmu(x), which equals 1/m^2.

    The radial integrand is singular at x = -e_0, so the angular radial rule is used.
    """
    kernel = PsiKernel(p)
    e0 = basis(p.n, 0)

    def alpha(t: Tensor) -> Tensor:
        x = torch.zeros(t.shape + (p.n + 1,), dtype=DEFAULT_MATRIX_DTYPE)
        x[..., 0] = t
        x[..., -1] = torch.sqrt(1 - t**2)
        return kernel(x, e0)

    value = radial_integral(p.n, alpha, options, angular=True)
    if logger.isEnabledFor(logging.DEBUG):
        logger.debug(f"L2 normalization n={p.n}, m={p.m}: {complex(value)}")
    return float(value.real)
