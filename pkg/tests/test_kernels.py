from __future__ import annotations

import math

import pytest
import torch

from pyrptorch.geometry import (
    bilinear,
    classify_boundary,
    de_sitter_limit_path,
    hyperbolic_point,
    in_crown,
    r0,
    sphere_point,
)
from pyrptorch.group import random_word
from pyrptorch.kernels import (
    BerezinKernel,
    CanonicalKernel,
    MassParam,
    PhiCKernel,
    PhiKernel,
    PsiKernel,
    QNuKernel,
    ball_chart,
    boundary_kernel_ds,
    boundary_kernel_ds_mirrored,
    boundary_q_nu,
    canonical_discrete_points,
    canonical_kernel,
    gamma_const,
    gram_report,
    odd_n_closed_form,
    phi_c_kernel,
    phi_kernel,
    psi_kernel,
    q_nu_kernel,
    q_nu_mass,
    radial_ode_residual,
    radial_profile,
    spherical_function,
    spherical_function_quadratic,
    spherical_function_radial,
    spherical_normalization,
)
from pyrptorch.matrices import basis
from pyrptorch.sampling import (
    sample_crown,
    sample_half_sphere,
    sample_hyperbolic,
    unit_vectors,
)
from pyrptorch.utils import BoundaryType, Regime


def test_spectral_parameter() -> None:
    p = MassParam(3, 0.6)
    assert p.regime == Regime.COMPLEMENTARY
    assert abs(p.lam - 0.8) < 1e-15
    p = MassParam(3, 2.0)
    assert p.regime == Regime.PRINCIPAL
    assert abs(p.lam - 1j * math.sqrt(3)) < 1e-15
    assert MassParam(3, 1.0).lam == 0
    small = MassParam(3, 1e-4)
    assert abs(small.rho_minus_lambda.real / 5e-9 - 1) < 1e-6


@pytest.mark.parametrize("args", [(0, 1.0), (2, -0.1), (2, math.nan), (2, math.inf)])
def test_invalid_mass_param(args: tuple[int, float]) -> None:
    with pytest.raises(ValueError):
        MassParam(*args)


@pytest.mark.parametrize("m", [0.1, 1.0, 10.0])
def test_gamma_const_circle(m: float) -> None:
    expected = math.pi / (m * math.sinh(math.pi * m))
    assert abs(gamma_const(MassParam(1, m)) - expected) <= 1e-10 * expected


def test_gamma_const_pole() -> None:
    with pytest.raises(ValueError):
        gamma_const(MassParam(2, 0.0))


def test_mass_zero_limit() -> None:
    for n in (2, 3, 4):
        p = MassParam(n, 1e-3)
        assert abs(p.m**2 * gamma_const(p) - 1) < 1e-4


def test_psi_hermitian(mass_param: MassParam, gen: torch.Generator) -> None:
    z = sample_crown(mass_param.n, 10, gen, max_boost=1.0, margin=0.05)
    w = sample_crown(mass_param.n, 10, gen, max_boost=1.0, margin=0.05)
    kernel = PsiKernel(mass_param)
    assert torch.allclose(kernel(z, w), kernel(w, z).conj(), rtol=1e-9, atol=1e-12)


def test_psi_invariance(mass_param: MassParam, gen: torch.Generator) -> None:
    n = mass_param.n
    z = sample_crown(n, 8, gen, max_boost=1.0, margin=0.05)
    w = sample_crown(n, 8, gen, max_boost=1.0, margin=0.05)
    g = random_word(n, 3, gen, max_boost=0.5, max_horo=0.5)
    kernel = PsiKernel(mass_param)
    assert torch.allclose(kernel(g(z), g(w)), kernel(z, w), rtol=1e-8, atol=1e-10)


def test_psi_on_sphere_is_reflected_phi(mass_param: MassParam, gen: torch.Generator) -> None:
    x = sample_half_sphere(mass_param.n, 10, gen, margin=0.1)
    y = sample_half_sphere(mass_param.n, 10, gen, margin=0.1)
    psi = PsiKernel(mass_param)(x, y)
    phi = phi_kernel(mass_param, x, r0(y))
    assert torch.allclose(psi, phi, rtol=1e-10, atol=0.0)
    assert torch.allclose(psi.imag, torch.zeros_like(psi.real), atol=1e-12)


def test_normalized_kernel(mass_param: MassParam, gen: torch.Generator) -> None:
    e0 = basis(mass_param.n, 0)
    assert abs(complex(PsiKernel(mass_param)(e0, e0)) - gamma_const(mass_param)) < 1e-12
    z = sample_crown(mass_param.n, 5, gen, max_boost=1.0, margin=0.05)
    scaled = gamma_const(mass_param) * phi_c_kernel(mass_param, z, e0)
    assert torch.allclose(scaled, psi_kernel(mass_param, z, e0), rtol=1e-12)


def test_phi_c_mass_zero(gen: torch.Generator) -> None:
    z = sample_crown(3, 4, gen)
    out = PhiCKernel(MassParam(3, 0.0))(z, z)
    assert torch.equal(out, torch.ones_like(out))


def test_phi_singular_on_diagonal() -> None:
    p = MassParam(2, 0.5)
    x = sphere_point(2, 0.3)
    with pytest.raises(ValueError):
        PhiKernel(p)(x, x)
    with pytest.raises(ValueError):
        PsiKernel(p)(basis(2, 0), basis(3, 0))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_psi_positive_definite_on_half_sphere(n: int, gen: torch.Generator) -> None:
    x = sample_half_sphere(n, 30, gen, margin=0.05)
    report = PsiKernel(MassParam(n, 0.8)).gram(x)
    assert report.psd
    assert report.matrix.shape == (30, 30)


@pytest.mark.parametrize("n, m", [(2, 0.5), (3, 1.0)])
def test_gram_is_hermitian_on_crown(n: int, m: float, gen: torch.Generator) -> None:
    points = sample_crown(n, 25, gen)
    kernel = PsiKernel(MassParam(n, m))
    report = kernel.gram(points)
    assert torch.equal(report.matrix, report.matrix.mH)
    assert torch.all(torch.diagonal(report.matrix).imag == 0)
    assert torch.allclose(report.matrix[3, 7], kernel(points[3], points[7]))
    assert report.psd


def test_gram_report_rejects_non_hermitian() -> None:
    with pytest.raises(ValueError):
        gram_report(torch.tensor([[1.0, 2.0], [0.0, 1.0]]))
    report = gram_report(torch.tensor([[1.0, 2.0], [2.0, 1.0]]))
    assert not report.psd
    assert abs(report.min_eig + 1.0) < 1e-12


@pytest.mark.parametrize("n, nu", [(3, 0.5), (4, 1.0), (5, 1.5)])
def test_q_nu_boundary_mass(n: int, nu: float, gen: torch.Generator) -> None:
    m = q_nu_mass(n, nu)
    z = sample_crown(n, 6, gen, max_boost=0.5, margin=0.1)
    w = sample_crown(n, 6, gen, max_boost=0.5, margin=0.1)
    q = q_nu_kernel(nu, z, w)
    assert torch.allclose(q, phi_c_kernel(MassParam(n, m), z, w), rtol=1e-8, atol=1e-10)


def test_q_nu_basics() -> None:
    e0 = basis(3, 0)
    assert abs(complex(QNuKernel(3, 2.5)(e0, e0)) - 1.0) < 1e-15
    with pytest.raises(ValueError):
        QNuKernel(3, -1.0)
    with pytest.raises(ValueError):
        q_nu_mass(4, 2.0)


def test_canonical_kernel_is_berezin(gen: torch.Generator) -> None:
    n, lam = 3, 0.7
    x = sample_hyperbolic(n, 6, gen, max_t=1.5)
    y = sample_hyperbolic(n, 6, gen, max_t=1.5)
    canonical = CanonicalKernel(n, lam)(x[:, None, :], y[None, :, :])
    berezin = BerezinKernel(n, lam)(ball_chart(x)[:, None, :], ball_chart(y)[None, :, :])
    assert torch.allclose(canonical.real, berezin, rtol=1e-10)
    assert torch.allclose(canonical.imag, torch.zeros_like(berezin), atol=1e-10)
    assert torch.equal(canonical_kernel(lam, x, y), CanonicalKernel(n, lam)(x, y))
    with pytest.raises(ValueError):
        CanonicalKernel(n, lam)(basis(n, n), basis(n, 0))
    with pytest.raises(ValueError):
        CanonicalKernel(n, 0.0)
    with pytest.raises(ValueError):
        BerezinKernel(n, lam)(torch.ones(3), torch.zeros(3))


def test_canonical_discrete_points() -> None:
    assert canonical_discrete_points(6, 0.5) == [1.5]
    assert canonical_discrete_points(9, 0.25) == [3.5, 1.5]
    assert canonical_discrete_points(2, 1.0) == []


@pytest.mark.parametrize("t", [0.2, 1.0, 2.5])
def test_spherical_function(mass_param: MassParam, t: float) -> None:
    x = hyperbolic_point(mass_param.n, t)
    radial = spherical_function_radial(mass_param, t)
    assert torch.allclose(spherical_function(mass_param, x), radial, rtol=1e-12)
    assert torch.allclose(spherical_function_quadratic(mass_param, t), radial, rtol=1e-9)
    scaled = spherical_normalization(mass_param) * psi_kernel(mass_param, x, basis(mass_param.n, 0))
    assert torch.allclose(scaled, radial, rtol=1e-12)
    with pytest.raises(ValueError):
        spherical_function(mass_param, sphere_point(mass_param.n, 0.3))


@pytest.mark.parametrize("n", [1, 3, 5])
@pytest.mark.parametrize("m", [0.5, 2.5])
def test_odd_n_closed_form(n: int, m: float) -> None:
    p = MassParam(n, m)
    for t in (0.4, 1.5, 2.7):
        closed = complex(odd_n_closed_form(p, t))
        expected = complex(radial_profile(p, t))
        assert abs(closed - expected) <= 1e-9 * abs(expected)
    with pytest.raises(ValueError):
        odd_n_closed_form(MassParam(2, m), 1.0)


@pytest.mark.parametrize("n, m", [(3, 1.0), (5, 2.0), (5, math.sqrt(3.0))])
def test_odd_n_closed_form_vanishing_factor(n: int, m: float) -> None:
    with pytest.raises(ValueError):
        odd_n_closed_form(MassParam(n, m), 1.0)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("m", [0.5, 2.0])
def test_radial_ode(n: int, m: float) -> None:
    p = MassParam(n, m)
    for t in (0.3, math.pi / 2, 2.5):
        assert radial_ode_residual(p, t) < 1e-5
    with pytest.raises(ValueError):
        radial_ode_residual(p, 1e-5)


def test_boundary_values(gen: torch.Generator) -> None:
    n, p, nu = 3, MassParam(3, 0.7), 0.8
    y = basis(n, n)
    z = sample_crown(n, 5, gen, max_boost=1.0, margin=0.1)
    assert torch.allclose(boundary_kernel_ds(p, y, z), phi_c_kernel(p, y, z))
    assert torch.allclose(boundary_kernel_ds_mirrored(p, z, y), phi_c_kernel(p, z, y))
    assert torch.allclose(boundary_q_nu(nu, z, y), q_nu_kernel(nu, z, y))
    with pytest.raises(ValueError):
        boundary_kernel_ds(p, basis(n, 0), z)


@pytest.mark.parametrize("n, m", [(2, 0.5), (3, 0.7), (3, 2.0)])
def test_boundary_value_is_limit_from_crown(n: int, m: float, gen: torch.Generator) -> None:
    p, t, h = MassParam(n, m), 0.6, 4e-3
    x = de_sitter_limit_path(n, t, math.pi / 2)
    w = sample_crown(n, 4, gen, max_boost=1.0, margin=0.2)
    f1, f2, f4 = (
        phi_c_kernel(p, de_sitter_limit_path(n, t, math.pi / 2 - eps), w)
        for eps in (h, h / 2, h / 4)
    )
    r1, r2 = 2 * f2 - f1, 2 * f4 - f2
    limit = (4 * r2 - r1) / 3
    assert torch.allclose(limit, boundary_kernel_ds(p, x, w), rtol=1e-6, atol=1e-6)
    assert not torch.allclose(f1, boundary_kernel_ds(p, x, w), rtol=1e-6, atol=1e-6)


def test_real_pairings_of_crown_and_de_sitter(gen: torch.Generator) -> None:
    n, count = 3, 20
    z = sample_half_sphere(n, count, gen, margin=0.05)
    zeros = torch.zeros(count, 1, dtype=torch.float64)
    x = torch.cat([zeros, unit_vectors(count, n, gen)], dim=-1).to(torch.cdouble)
    g = random_word(n, 3, gen, max_boost=1.0, max_horo=1.0)
    gz, gx = g(z), g(x)
    assert bool(in_crown(gz).all())
    assert all(classify_boundary(y) == BoundaryType.DE_SITTER for y in gx)
    values = bilinear(gz, gx)
    assert float(values.imag.abs().max()) < 1e-12
    assert float(values.real.abs().max()) < 1
