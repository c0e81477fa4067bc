from __future__ import annotations

import math
from functools import partial

import pytest
import torch

from pyrptorch.quadrature import (
    QuadratureOptions,
    adaptive_integral,
    adaptive_sphere_integral,
    radial_integral,
    singular_rule,
    sphere_dimension_constant,
    sphere_rule,
)

ATOL = 1e-13


@pytest.mark.parametrize("d", [1, 2, 3])
def test_sphere_rule_moments(d: int) -> None:
    rule = sphere_rule(d, 4)
    assert abs(float(rule.weights.sum()) - 1.0) < ATOL
    assert torch.allclose(
        torch.linalg.vector_norm(rule.nodes, dim=-1), torch.ones(len(rule), dtype=torch.float64)
    )
    for k in range(d + 1):
        u = rule.nodes[:, k]
        assert abs(float(rule.integrate(u))) < ATOL
        assert abs(float(rule.integrate(u**2)) - 1 / (d + 1)) < ATOL
        assert abs(float(rule.integrate(u**4)) - 3 / ((d + 1) * (d + 3))) < ATOL


def test_invalid_rules() -> None:
    with pytest.raises(ValueError):
        sphere_rule(4, 8)
    with pytest.raises(ValueError):
        sphere_rule(2, 1)
    pole = torch.tensor([0.0, 0.0, 1.0], dtype=torch.float64)
    with pytest.raises(ValueError):
        singular_rule(2, pole, -1.0, 8)


def test_dimension_constant() -> None:
    assert abs(sphere_dimension_constant(2) - 0.5) < ATOL
    assert abs(sphere_dimension_constant(1) - 1 / math.pi) < ATOL


@pytest.mark.parametrize("exponent", [-0.4, 0.0, 0.5, 1.7])
def test_singular_rule_on_s2(exponent: float) -> None:
    pole = torch.tensor([0.3, -0.4, 0.5], dtype=torch.float64)
    pole = pole / torch.linalg.vector_norm(pole)
    rule = singular_rule(2, pole, exponent, 16)
    e = exponent
    # on S^2 the axial coordinate s = pole.u is uniform on [-1, 1]
    assert abs(float(rule(lambda u: torch.ones(u.shape[:-1]))) - 2**e / (e + 1)) < 1e-12
    first = (2 ** (e + 1) / (e + 1) - 2 ** (e + 2) / (e + 2)) / 2
    assert abs(float(rule(lambda u: u @ pole)) - first) < 1e-12


def test_non_finite_integrand() -> None:
    rule = sphere_rule(2, 4)
    with pytest.raises(ValueError):
        rule(lambda u: 1 / (u[..., 0] - u[..., 0]))


def test_adaptive_integral() -> None:
    result = adaptive_sphere_integral(2, lambda u: torch.exp(u[..., 2]))
    assert abs(float(result.value) - math.sinh(1.0)) < 1e-12
    assert result.nodes > 0
    assert result.error <= 1e-8
    with pytest.raises(RuntimeError):
        adaptive_integral(
            partial(sphere_rule, 2),
            lambda u: torch.abs(u[..., 0]) ** 0.5,
            QuadratureOptions(tol=1e-15, max_nodes=2_000),
        )


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("angular", [False, True])
def test_radial_integral(n: int, angular: bool) -> None:
    value = radial_integral(n, lambda t: t**2, angular=angular)
    assert abs(float(value) - 1 / (n + 1)) < 1e-10
    with pytest.raises(ValueError):
        radial_integral(0, lambda t: t)
