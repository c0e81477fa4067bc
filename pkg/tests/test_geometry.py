from __future__ import annotations

import math

import pytest
import torch

from pyrptorch.geometry import (
    alpha,
    beta_form,
    bilinear,
    cayley,
    classify_boundary,
    crown_from_de_sitter,
    de_sitter_limit_path,
    exp_point,
    hyperbolic_point,
    in_crown,
    in_tube,
    in_v,
    jordan_inverse,
    jordan_product,
    lie_ball_contains,
    on_light_cone,
    on_sphere,
    ray_inversion,
    sigma_R,
    sigma_V,
    sphere_point,
    v_decompose,
    xi0,
    xi_prime_contains,
    xi_u,
    zeta_inverse,
    zeta_map,
)
from pyrptorch.matrices import DEFAULT_MATRIX_DTYPE, basis
from pyrptorch.sampling import sample_crown, sample_de_sitter, sample_light_cone, unit_vectors
from pyrptorch.utils import BoundaryType, as_point


def _random_points(count: int, n: int, gen: torch.Generator) -> torch.Tensor:
    real = torch.randn(count, n + 1, generator=gen, dtype=torch.float64)
    imag = torch.randn(count, n + 1, generator=gen, dtype=torch.float64)
    return torch.complex(real, imag)


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_base_points(n: int) -> None:
    assert bool(on_light_cone(xi0(n)))
    assert bool(in_crown(basis(n, 0)))
    assert not bool(in_crown(basis(n, n)))
    t = torch.linspace(-1.5, 1.5, 7, dtype=torch.float64)
    assert bool(in_crown(sphere_point(n, t)).all())
    assert bool(in_crown(hyperbolic_point(n, 3 * t)).all())
    assert not bool(in_crown(sphere_point(n, 2.0)))


def test_involutions(gen: torch.Generator) -> None:
    z = _random_points(20, 3, gen)
    assert torch.equal(sigma_V(sigma_V(z)), z)
    assert torch.equal(sigma_R(sigma_R(z)), z)
    assert torch.allclose(ray_inversion(ray_inversion(z)), z, rtol=1e-12, atol=1e-12)
    assert torch.equal(alpha(alpha(z)), z)


def test_sigma_v_fixes_v(gen: torch.Generator) -> None:
    z = _random_points(10, 2, gen)
    parts = v_decompose(z)
    assert torch.allclose(parts.reconstruct(), z, atol=1e-15)
    assert bool(in_v(parts.u).all() and in_v(parts.v).all())
    assert torch.allclose(sigma_V(parts.u), parts.u)


def test_bilinear_dimension_mismatch() -> None:
    with pytest.raises(ValueError):
        bilinear(basis(2, 0), basis(3, 0))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_crown_samples(n: int, gen: torch.Generator) -> None:
    z = sample_crown(n, 200, gen, max_boost=2.0, margin=0.05)
    assert bool(in_crown(z).all())
    assert torch.allclose(ray_inversion(z), z, atol=1e-9)
    assert bool(in_tube(z).all())


@pytest.mark.parametrize("n", [2, 3, 4])
def test_classify_boundary(n: int, gen: torch.Generator) -> None:
    assert classify_boundary(basis(n, n)) == BoundaryType.DE_SITTER
    assert classify_boundary(xi0(n) + basis(n, n - 1)) == BoundaryType.LIGHT_RAY_ORBIT
    assert classify_boundary(basis(n, 0)) == BoundaryType.NOT_BOUNDARY
    assert classify_boundary(2 * basis(n, 0)) == BoundaryType.NOT_BOUNDARY
    for y in sample_de_sitter(n, 10, gen):
        assert classify_boundary(y) == BoundaryType.DE_SITTER
    with pytest.raises(ValueError):
        classify_boundary(sample_de_sitter(n, 2, gen))


def test_de_sitter_limit_path() -> None:
    n, t = 3, 0.8
    r = torch.tensor([0.5, 1.0, 1.5], dtype=torch.float64)
    assert bool(in_crown(de_sitter_limit_path(n, t, r)).all())
    limit = de_sitter_limit_path(n, t, math.pi / 2)
    expected = -1j * math.sinh(t) * basis(n, 0) + math.cosh(t) * basis(n, n)
    assert torch.allclose(limit, expected, atol=1e-14)
    assert classify_boundary(limit) == BoundaryType.DE_SITTER


def test_python_inputs_keep_double_precision() -> None:
    z = as_point([0.3, 0.1j])
    assert z.dtype == DEFAULT_MATRIX_DTYPE
    assert complex(z[0]) == 0.3 and complex(z[1]) == 0.1j
    assert abs(complex(sphere_point(2, 0.3)[0]) - math.cos(0.3)) <= 1e-15
    assert abs(complex(hyperbolic_point(2, 0.7)[-1]) - 1j * math.sinh(0.7)) <= 1e-15
    w = 0.3 + 0.2j
    assert abs(complex(zeta_map(w)[0]) - (w + 1 / w) / 2) <= 1e-15
    assert abs(complex(xi_u([0.6, 0.8])[1]) - 0.6j) == 0.0


def test_light_cone(gen: torch.Generator) -> None:
    u = unit_vectors(10, 3, gen)
    assert bool(on_light_cone(xi_u(u)).all())
    assert bool(on_light_cone(sample_light_cone(3, 10, gen)).all())
    assert not bool(on_light_cone(-xi0(3)))


def test_ray_inversion_null_cone() -> None:
    with pytest.raises(ValueError):
        ray_inversion(xi0(2))


def test_exponential_map() -> None:
    t = 0.7
    image = exp_point(basis(2, 0), t * basis(2, 2))
    assert torch.allclose(image, sphere_point(2, t), atol=1e-15)
    with pytest.raises(ValueError):
        exp_point(basis(2, 0), basis(2, 0))
    with pytest.raises(ValueError):
        exp_point(2 * basis(2, 0), basis(2, 2))


def test_crown_from_de_sitter() -> None:
    n = 3
    v = torch.zeros(n + 1, dtype=DEFAULT_MATRIX_DTYPE)
    v[0], v[1] = 1.0, 0.5j
    z = crown_from_de_sitter(v, t=1.2)
    assert bool(in_crown(z))
    with pytest.raises(ValueError):
        crown_from_de_sitter(basis(n, 1))
    with pytest.raises(ValueError):
        crown_from_de_sitter(v, t=4.0)


def test_jordan_inverse(gen: torch.Generator) -> None:
    z = _random_points(10, 3, gen)
    unit = jordan_product(z, jordan_inverse(z))
    assert torch.allclose(unit, basis(3, 0).expand_as(unit), atol=1e-10)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_cayley_maps_crown_into_lie_ball(n: int, gen: torch.Generator) -> None:
    z = sample_crown(n, 100, gen, max_boost=1.0, margin=0.05)
    w = cayley(z)
    assert torch.allclose(w[..., 0], torch.zeros_like(w[..., 0]), atol=1e-9)
    assert bool(lie_ball_contains(w).all())
    assert torch.allclose(cayley(basis(n, 0)), torch.zeros(n + 1, dtype=w.dtype))


def test_lie_ball() -> None:
    w = torch.zeros(3, dtype=DEFAULT_MATRIX_DTYPE)
    assert bool(lie_ball_contains(w))
    w[1] = 1.0
    assert not bool(lie_ball_contains(w))


def test_zeta_chart() -> None:
    z = torch.tensor([0.5 + 0.5j, 2.0, -1.0j], dtype=DEFAULT_MATRIX_DTYPE)
    p = zeta_map(z)
    assert bool(on_sphere(p).all())
    assert torch.allclose(zeta_inverse(p), z, atol=1e-15)
    with pytest.raises(ValueError):
        zeta_map(0.0)


@pytest.mark.parametrize("n", [2, 3])
def test_xi_prime(n: int) -> None:
    t = torch.tensor([0.3, 1.1, 2.0], dtype=torch.float64)
    assert bool(xi_prime_contains(hyperbolic_point(n, t)).all())
    assert torch.allclose(beta_form(hyperbolic_point(n, t)), torch.ones(3, dtype=torch.float64))
    x = sphere_point(n, 1.2)
    assert bool(in_crown(x))
    assert math.isclose(float(beta_form(x)), math.cos(2.4), rel_tol=1e-12)
    assert not bool(xi_prime_contains(x))
