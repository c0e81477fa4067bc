from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import partial
from logging import getLogger
from typing import Callable

import torch
from scipy import special
from torch import Tensor

from pyrptorch.matrices import DEFAULT_REAL_DTYPE

logger = getLogger(__name__)

SUPPORTED_SPHERE_DIMS = (1, 2, 3)


@dataclass
class QuadratureOptions:

    tol: float = 1e-8
    max_nodes: int = 10_000
    start_order: int = 8
    radial_nodes: int = 64
    growth: float = 2.0


@dataclass
class QuadratureRule:
    """Nodes and weights of a probability rule on S^dim in R^{dim+1}.

    The rule integrates against `mass` times the probability measure it discretizes; for the
    plain sphere rules `mass` is 1 and the measure is the invariant probability measure.
    """

    dim: int
    nodes: Tensor
    weights: Tensor
    exact_degree: int
    mass: float = 1.0

    def __len__(self) -> int:
        return self.weights.numel()

    def integrate(self, values: Tensor) -> Tensor:
        """mass * sum_i w_i f(u_i) for sampled values of shape (..., len(self))."""
        values = torch.as_tensor(values)
        weights = self.weights.to(values.dtype) if values.is_complex() else self.weights
        return self.mass * (values * weights).sum(-1)

    def __call__(self, integrand: Callable[[Tensor], Tensor]) -> Tensor:
        values = integrand(self.nodes)
        if not bool(torch.isfinite(torch.as_tensor(values)).all()):
            raise ValueError("The integrand is not finite at the quadrature nodes.")
        return self.integrate(values)


@dataclass
class QuadratureResult:
    value: Tensor
    nodes: int
    error: float


def _legendre(order: int) -> tuple[Tensor, Tensor]:
    x, w = special.roots_legendre(order)
    return torch.from_numpy(x), torch.from_numpy(w)


def _jacobi(order: int, alpha: float, beta: float) -> tuple[Tensor, Tensor]:
    x, w = special.roots_jacobi(order, alpha, beta)
    return torch.from_numpy(x), torch.from_numpy(w)


def _circle(count: int) -> Tensor:
    theta = 2 * math.pi * torch.arange(count, dtype=DEFAULT_REAL_DTYPE) / count
    return torch.stack([torch.cos(theta), torch.sin(theta)], dim=-1)


def _axial_product(
    axis: Tensor, axis_weights: Tensor, base: Tensor, base_weights: Tensor
) -> tuple[Tensor, Tensor]:
    """Nodes (sqrt(1 - s^2) v, s) for s on the axis and v on a lower dimensional sphere."""
    radius = torch.sqrt(torch.clamp(1 - axis**2, min=0.0))
    nodes = torch.cat(
        [
            (radius[:, None, None] * base[None, :, :]).reshape(-1, base.size(-1)),
            axis.repeat_interleave(base.size(0))[:, None],
        ],
        dim=-1,
    )
    weights = (axis_weights[:, None] * base_weights[None, :]).reshape(-1)
    return nodes, weights / weights.sum()


def sphere_rule(d: int, order: int) -> QuadratureRule:
    """Probability rule on S^d exact for polynomials of degree 2 order - 1.

    S^1 uses the trapezoidal rule with 2 order points. S^2 uses Gauss-Legendre nodes in the
    last coordinate times the trapezoidal rule in longitude. S^3 extends the S^2 rule by
    Gauss-Jacobi nodes for the weight (1 - s^2)^{1/2} in the last coordinate.

    Raises:
        ValueError: For d outside {1, 2, 3} or order < 2.
    """
    if d not in SUPPORTED_SPHERE_DIMS:
        raise ValueError(f"Sphere rules are available for d in {SUPPORTED_SPHERE_DIMS}, got {d}.")
    if order < 2:
        raise ValueError(f"The order of a sphere rule must be at least 2, got {order}.")
    circle = _circle(2 * order)
    circle_weights = torch.full((2 * order,), 1 / (2 * order), dtype=DEFAULT_REAL_DTYPE)
    if d == 1:
        return QuadratureRule(1, circle, circle_weights, 2 * order - 1)
    s, w = _legendre(order)
    nodes, weights = _axial_product(s, w, circle, circle_weights)
    if d == 3:
        s, w = _jacobi(order, 0.5, 0.5)
        nodes, weights = _axial_product(s, w, nodes, weights)
    return QuadratureRule(d, nodes, weights, 2 * order - 1)


def sphere_dimension_constant(d: int) -> float:
    """Gamma((d+1)/2) / (sqrt(pi) Gamma(d/2)), the density of u_0 under the measure of S^d."""
    return math.exp(math.lgamma((d + 1) / 2) - math.lgamma(d / 2)) / math.sqrt(math.pi)


def _orthonormal_complement(pole: Tensor) -> Tensor:
    """Columns spanning the orthogonal complement of a unit vector."""
    size = pole.numel()
    q, _ = torch.linalg.qr(torch.cat([pole[:, None], torch.eye(size, dtype=pole.dtype)], dim=1))
    return q[:, 1:size]


def singular_rule(d: int, pole: Tensor, exponent: float, order: int) -> QuadratureRule:
    """Rule for integrals f(u) (1 - pole.u)^exponent dmu(u) over S^d, exponent > -d/2.

    The axial variable s = pole.u carries Gauss-Jacobi nodes for the weight
    (1 - s)^{exponent + d/2 - 1} (1 + s)^{d/2 - 1}; the orthogonal directions use the rule of
    S^{d-1}. The result has probability weights and `mass` equal to the integral of the
    singular factor.

    Raises:
        ValueError: For unsupported d or a non-integrable exponent <= -d/2.
    """
    if d not in SUPPORTED_SPHERE_DIMS:
        raise ValueError(f"Sphere rules are available for d in {SUPPORTED_SPHERE_DIMS}, got {d}.")
    if exponent <= -d / 2:
        raise ValueError(f"(1 - pole.u)^{exponent} is not integrable on S^{d}.")
    pole = torch.as_tensor(pole, dtype=DEFAULT_REAL_DTYPE)
    pole = pole / torch.linalg.vector_norm(pole)
    alpha, beta = exponent + d / 2 - 1, d / 2 - 1
    s, w = _jacobi(order, alpha, beta)
    if d == 1:
        base = torch.tensor([[1.0], [-1.0]], dtype=DEFAULT_REAL_DTYPE)
        base_weights = torch.full((2,), 0.5, dtype=DEFAULT_REAL_DTYPE)
    else:
        lower = sphere_rule(d - 1, order)
        base, base_weights = lower.nodes, lower.weights
    local, weights = _axial_product(s, w, base, base_weights)
    frame = torch.cat([_orthonormal_complement(pole), pole[:, None]], dim=1)
    nodes = local @ frame.T
    mass = (
        sphere_dimension_constant(d) * 2 ** (alpha + beta + 1) * special.beta(alpha + 1, beta + 1)
    )
    return QuadratureRule(d, nodes, weights, 2 * order - 1, float(mass))


def adaptive_integral(
    build_rule: Callable[[int], QuadratureRule],
    integrand: Callable[[Tensor], Tensor],
    options: QuadratureOptions = QuadratureOptions(),
) -> QuadratureResult:
    """Integrate with rules of growing order until two successive values agree.

    The order is multiplied by `options.growth` at every step, doubling by default.

    Raises:
        RuntimeError: If the node cap is reached before convergence.
    """
    order = options.start_order
    rule = build_rule(order)
    previous = rule(integrand)
    while True:
        order = max(order + 1, math.ceil(order * options.growth))
        rule = build_rule(order)
        if len(rule) > options.max_nodes:
            raise RuntimeError(
                f"Quadrature did not converge within {options.max_nodes} nodes "
                f"(last value {complex(previous)})."
            )
        value = rule(integrand)
        error = float((value - previous).abs())
        if logger.isEnabledFor(logging.DEBUG):
            logger.debug(f"order {order}: {len(rule)} nodes, {complex(value)}, err {error:.2e}")
        if error <= options.tol * max(1.0, float(value.abs())):
            return QuadratureResult(value, len(rule), error)
        previous = value


def adaptive_sphere_integral(
    d: int,
    integrand: Callable[[Tensor], Tensor],
    options: QuadratureOptions = QuadratureOptions(),
) -> QuadratureResult:
    return adaptive_integral(partial(sphere_rule, d), integrand, options)


def radial_rule(n: int, nodes: int, angular: bool = False) -> tuple[Tensor, Tensor]:
    """Nodes t in (-1, 1) and weights w with sum w alpha(t) = int_{S^n} alpha(x_0) dmu(x).

    The default rule is Gauss-Jacobi for the weight (1 - t^2)^{n/2 - 1}. The angular rule
    substitutes t = -cos(theta) and uses Gauss-Legendre nodes in theta, which resolves
    integrands with algebraic singularities at t = -1.
    """
    constant = sphere_dimension_constant(n)
    if angular:
        x, w = _legendre(nodes)
        theta = math.pi * (x + 1) / 2
        weights = constant * (math.pi / 2) * w * torch.sin(theta) ** (n - 1)
        return -torch.cos(theta), weights
    t, w = _jacobi(nodes, n / 2 - 1, n / 2 - 1)
    return t, constant * w


def radial_integral(
    n: int,
    alpha: Callable[[Tensor], Tensor],
    options: QuadratureOptions = QuadratureOptions(),
    angular: bool = False,
) -> Tensor:
    """int_{S^n} alpha(x_0) dmu(x) = c_n int_{-1}^{1} alpha(t) (1 - t^2)^{n/2 - 1} dt.

    The node count starts at `options.radial_nodes` and doubles until two successive values
    agree to `options.tol`.

    Raises:
        ValueError: If alpha is not finite at the nodes.
        RuntimeError: If the node cap is reached before convergence.
    """
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}.")
    count = options.radial_nodes
    previous = None
    while count <= options.max_nodes:
        t, w = radial_rule(n, count, angular)
        values = torch.as_tensor(alpha(t))
        if not bool(torch.isfinite(values).all()):
            raise ValueError("The radial integrand is not finite at the quadrature nodes.")
        value = (values * w.to(values.dtype)).sum()
        if previous is not None:
            error = float((value - previous).abs())
            if logger.isEnabledFor(logging.DEBUG):
                logger.debug(f"radial rule with {count} nodes: {complex(value)}, err {error:.2e}")
            if error <= options.tol * max(1.0, float(value.abs())):
                return value
        previous = value
        count *= 2
    raise RuntimeError(f"The radial integral did not converge within {options.max_nodes} nodes.")

