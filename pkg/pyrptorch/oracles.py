from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from logging import getLogger
from typing import Callable

import numpy as np
import torch
from scipy import sparse
from torch import Tensor

from pyrptorch.kernels import GramReport, Kernel, gram_report
from pyrptorch.matrices import DEFAULT_REAL_DTYPE

logger = getLogger(__name__)

MAX_DEGREE = 100_000
START_DEGREE = 64
SERIES_TOL = 1e-9


def gegenbauer_table(degree: int, alpha: float, s: np.ndarray | float) -> np.ndarray:
    """C_q^alpha(s) for q = 0..degree by the three-term recurrence, shape (degree+1, *s.shape).

    (q+1) C_{q+1} = 2 (q + alpha) s C_q - (q + 2 alpha - 1) C_{q-1}
    """
    s = np.asarray(s, dtype=np.float64)
    table = np.empty((degree + 1,) + s.shape)
    table[0] = 1.0
    if degree >= 1:
        table[1] = 2 * alpha * s
    for q in range(1, degree):
        table[q + 1] = (2 * (q + alpha) * s * table[q] - (q + 2 * alpha - 1) * table[q - 1]) / (
            q + 1
        )
    return table


def gegenbauer(q: int, alpha: float, s: float) -> float:
    """C_q^alpha(s) with C_0 = 1 and C_1(s) = 2 alpha s."""
    if q < 0:
        raise ValueError(f"The degree must be non-negative, got {q}.")
    return float(gegenbauer_table(q, alpha, s)[q])


def harmonic_dimension(n: int, q: int | np.ndarray) -> np.ndarray:
    """d_{q,n} = (2q+n-1)/(n-1) binom(q+n-2, q), the dimension of degree q harmonics on S^n."""
    q = np.asarray(q, dtype=np.float64)
    log_binom = np.array(
        [math.lgamma(k + n - 1) - math.lgamma(k + 1) - math.lgamma(n - 1) for k in q.reshape(-1)]
    ).reshape(q.shape)
    return (2 * q + n - 1) / (n - 1) * np.exp(log_binom)


def zonal_table(n: int, degree: int, s: np.ndarray | float) -> np.ndarray:
    """Z_q(s) = d_{q,n} C_q^rho(s) / C_q^rho(1) for q = 0..degree.

    Raises:
        ValueError: For n = 1, which has no Gegenbauer parameter; use the Fourier series.
    """
    if n < 2:
        raise ValueError("Zonal projectors by Gegenbauer polynomials need n >= 2.")
    rho = (n - 1) / 2
    s = np.asarray(s, dtype=np.float64)
    table = gegenbauer_table(degree, rho, np.append(s.reshape(-1), 1.0))
    ratio = table[:, :-1] / table[:, -1:]
    dims = harmonic_dimension(n, np.arange(degree + 1))
    return (dims[:, None] * ratio).reshape((degree + 1,) + s.shape)


def zonal_projector(n: int, q: int, s: float) -> float:
    return float(zonal_table(n, q, s)[q])


def _subtracted_green(n: int, c: float) -> float:
    """sum_{q >= 1} Z_q(c) / (q (q + n - 1)), the Green's function of -Delta on S^n, n = 2, 3."""
    theta = math.acos(c)
    if n == 2:
        return -1.0 - math.log((1 - c) / 2)
    # (pi - t) cot t tends to -1 at the antipode
    ratio = -1.0 if c == -1 else (math.pi - theta) / math.tan(theta)
    return ratio / 2 - 0.25


def _remainder_bound(n: int, m: float, c: float, degree: int) -> float:
    """Bound of m^2 sum_{q > degree} |Z_q(c)| / (q(q+n-1) (q(q+n-1) + m^2)).

    Uses |P_q(cos t)| <= min(1, (2 / (pi q sin t))^{1/2}) for n = 2 and
    |U_q(cos t)| <= min(q + 1, 1 / sin t) for n = 3.
    """
    sin = math.sqrt(max(0.0, 1 - c * c))
    Q = degree
    if n == 2:
        crude = 1.5 * m**2 / Q**2
        if sin == 0:
            return crude
        return min(crude, 3 * m**2 * math.sqrt(2 / (math.pi * sin)) / (2.5 * Q**2.5))
    crude = 4 * m**2 / Q
    if sin == 0:
        return crude
    return min(crude, m**2 / (sin * Q**2))


def circle_fourier_series(m: float, theta: float, degree: int) -> tuple[float, float]:
    """sum_{|q| <= degree} e^{iq theta} / (q^2 + m^2) with its tail bound.

    The m-free part sum_{q>=1} cos(q theta)/q^2 = pi^2/6 - pi t/2 + t^2/4 (t = |theta| mod 2 pi)
    is subtracted, and the remaining absolutely convergent sum is summed with compensation.
    """
    if m <= 0:
        raise ValueError(f"The mass must be positive, got {m}.")
    t = abs(theta) % (2 * math.pi)
    closed = math.pi**2 / 6 - math.pi * t / 2 + t**2 / 4
    terms = [m**2 * math.cos(q * t) / (q**2 * (q**2 + m**2)) for q in range(1, degree + 1)]
    value = 1 / m**2 + 2 * (closed - math.fsum(terms))
    tail = 2 * m**2 / (3 * degree**3)
    return value, tail


@dataclass
class SpectralSeries:
    """Truncated expansion sum_q Z_q(c) / (q(q+n-1) + m^2) of the resolvent (m^2 - Delta)^{-1}."""

    n: int
    m: float
    max_degree: int
    coefficients: np.ndarray

    def tail_bound(self, c: float) -> float:
        if self.n == 1:
            return 2 * self.m**2 / (3 * self.max_degree**3)
        return _remainder_bound(self.n, self.m, c, self.max_degree)

    def evaluate(self, c: float) -> float:
        """The resolvent kernel at x.y = c, with the Green's function of -Delta subtracted and
        added back in closed form."""
        if self.n == 1:
            return circle_fourier_series(self.m, math.acos(c), self.max_degree)[0]
        q = np.arange(1, self.max_degree + 1, dtype=np.float64)
        eigen = q * (q + self.n - 1)
        zonal = zonal_table(self.n, self.max_degree, c)[1:]
        remainder = math.fsum(self.m**2 * zonal / (eigen * (eigen + self.m**2)))
        return 1 / self.m**2 + _subtracted_green(self.n, c) - remainder


def spectral_series(n: int, m: float, max_degree: int) -> SpectralSeries:
    if n not in (1, 2, 3):
        raise ValueError(f"The spectral oracle is available for n in (1, 2, 3), got {n}.")
    if m <= 0:
        raise ValueError(f"The mass must be positive, got {m}.")
    q = np.arange(max_degree + 1, dtype=np.float64)
    return SpectralSeries(n, m, max_degree, 1 / (q * (q + n - 1) + m**2))


def phi_series(
    n: int, m: float, c: float, max_degree: int | None = None, tol: float = SERIES_TOL
) -> tuple[float, float]:
    """The spectral value of Phi_m at x.y = c together with a rigorous bound of the truncation.

    Without `max_degree` the degree doubles from 64 until the tail bound is below `tol`.

    Raises:
        ValueError: For c outside [-1, 1).
        RuntimeError: If the tail bound stays above `tol` at degree 100000.
    """
    if not -1 <= c < 1:
        raise ValueError(f"The series is evaluated for -1 <= c < 1, got {c}.")
    degree = max_degree or START_DEGREE
    series = spectral_series(n, m, degree)
    while max_degree is None and series.tail_bound(c) > tol:
        if degree >= MAX_DEGREE:
            raise RuntimeError(
                f"Tail bound {series.tail_bound(c):.2e} exceeds {tol:.0e} at degree {degree}."
            )
        degree = min(2 * degree, MAX_DEGREE)
        series = spectral_series(n, m, degree)
    value = series.evaluate(c)
    if logger.isEnabledFor(logging.DEBUG):
        logger.debug(f"spectral series n={n} m={m} c={c}: degree {degree}, value {value}")
    return value, series.tail_bound(c)


@dataclass
class CircleModel:
    """Nearest neighbour model of (m^2 - Delta)^{-1} on N equispaced points of the circle."""

    N: int
    h: float
    m: float
    laplacian: sparse.csr_matrix
    resolvent: Tensor
    reflection: Tensor

    def angles(self) -> Tensor:
        return self.h * torch.arange(self.N, dtype=DEFAULT_REAL_DTYPE)

    def precision(self) -> Tensor:
        """The sparse operator m^2 - Delta as a dense matrix."""
        operator = self.m**2 * sparse.identity(self.N, format="csr") - self.laplacian
        return torch.from_numpy(operator.toarray())


def build_circle_model(N: int, m: float) -> CircleModel:
    """Circulant Laplacian (phi_{i+1} - 2 phi_i + phi_{i-1}) / h^2, its resolvent and the
    reflection i -> -i mod N.

    Raises:
        ValueError: For odd N, N < 8 or m <= 0.
    """
    if N < 8 or N % 2:
        raise ValueError(f"The grid size must be even and at least 8, got {N}.")
    if m <= 0:
        raise ValueError(f"The mass must be positive, got {m}.")
    h = 2 * math.pi / N
    off = np.ones(N) / h**2
    laplacian = sparse.diags(
        [off[:-1], -2 * off, off[:-1], off[:1], off[:1]], [-1, 0, 1, N - 1, -(N - 1)], format="csr"
    )
    operator = m**2 * np.eye(N) - laplacian.toarray()
    resolvent = torch.linalg.inv(torch.from_numpy(operator))
    resolvent = (resolvent + resolvent.T) / 2
    reflection = (-torch.arange(N)) % N
    return CircleModel(N, h, m, laplacian, resolvent, reflection)


def twisted_gram(
    model: CircleModel, plus_indices: Tensor | list[int], tol: float = 1e-12
) -> GramReport:
    """G_ij = <theta delta_i, delta_j> = C_{theta(i), j} on the given grid indices.

    Raises:
        ValueError: For indices outside the grid.
    """
    idx = torch.as_tensor(plus_indices, dtype=torch.long)
    if bool(((idx < 0) | (idx >= model.N)).any()):
        raise ValueError(f"Grid indices must lie in [0, {model.N}).")
    gram = model.resolvent[model.reflection[idx]][:, idx]
    return gram_report(gram, idx, tol)


def half_indices(model: CircleModel) -> tuple[Tensor, Tensor, Tensor]:
    """Indices of the closed half circles [0, pi], [pi, 2 pi] and of the interface {0, pi}."""
    half = model.N // 2
    plus = torch.arange(half + 1)
    minus = torch.cat([torch.arange(half, model.N), torch.zeros(1, dtype=torch.long)])
    return plus, minus, torch.tensor([0, half])


def _projection(model: CircleModel, idx: Tensor) -> Tensor:
    """Orthogonal projection onto span{delta_i : i in idx} for <phi, psi> = phi^T C psi.

    With A = C^{-1} and S' the complement of idx the projection keeps phi_S and adds
    -A_{S S'} A_{S' S'}^{-1} phi_{S'}; only the sparse operator A is inverted.
    """
    A = model.precision()
    keep = torch.zeros(model.N, dtype=torch.bool)
    keep[idx] = True
    rest = torch.nonzero(~keep).reshape(-1)
    kept = torch.nonzero(keep).reshape(-1)
    P = torch.zeros((model.N, model.N), dtype=DEFAULT_REAL_DTYPE)
    P[kept, kept] = 1.0
    if rest.numel():
        coupling = torch.linalg.solve(A[rest][:, rest], A[rest][:, kept])
        P[kept[:, None], rest[None, :]] = -coupling.T
    return P


def markov_check(model: CircleModel) -> float:
    """Spectral norm of P_- P_+ - P_0 for the projections onto the two closed half circles and
    their interface.

    Raises:
        ValueError: If N is not divisible by 4.
    """
    if model.N % 4:
        raise ValueError(f"The Markov check needs N divisible by 4, got {model.N}.")
    plus, minus, zero = half_indices(model)
    P_plus, P_minus, P_zero = (_projection(model, idx) for idx in (plus, minus, zero))
    deviation = float(torch.linalg.matrix_norm(P_minus @ P_plus - P_zero, ord=2))
    if logger.isEnabledFor(logging.DEBUG):
        logger.debug(f"Markov deviation for N={model.N}, m={model.m}: {deviation:.2e}")
    return deviation


def markov_interface_check(model: CircleModel, pairs: int, generator: torch.Generator) -> float:
    """max |<phi, psi> - <P_0 phi, P_0 psi>| over random phi in E_+ and psi in E_-."""
    plus, minus, zero = half_indices(model)
    P_zero = _projection(model, zero)
    C = model.resolvent
    worst = 0.0
    for _ in range(pairs):
        phi = torch.zeros(model.N, dtype=DEFAULT_REAL_DTYPE)
        psi = torch.zeros(model.N, dtype=DEFAULT_REAL_DTYPE)
        phi[plus] = torch.randn(plus.numel(), generator=generator, dtype=DEFAULT_REAL_DTYPE)
        psi[minus] = torch.randn(minus.numel(), generator=generator, dtype=DEFAULT_REAL_DTYPE)
        direct = phi @ C @ psi
        interface = (P_zero @ phi) @ C @ (P_zero @ psi)
        worst = max(worst, float((direct - interface).abs()))
    return worst


@dataclass
class ConvergenceRow:
    N: int
    max_err: float
    slope: float


def circle_kernel(m: float, theta: Tensor) -> Tensor:
    """gamma_{1,m} cosh((pi - |theta|) m) with |theta| the distance to 0 on the circle."""
    distance = torch.minimum(theta, 2 * math.pi - theta)
    gamma = math.pi / (m * math.sinh(math.pi * m))
    return gamma * torch.cosh((math.pi - distance) * m)


def discrete_kernel_convergence(m: float, N_list: list[int]) -> list[ConvergenceRow]:
    """Maximal deviation of (2 pi / h) C e_0 from the continuum kernel and observed orders."""
    rows: list[ConvergenceRow] = []
    for N in sorted(N_list):
        model = build_circle_model(N, m)
        discrete = 2 * math.pi / model.h * model.resolvent[:, 0]
        err = float((discrete - circle_kernel(m, model.angles())).abs().max())
        slope = math.nan
        if rows:
            slope = math.log(rows[-1].max_err / err) / math.log(N / rows[-1].N)
        rows.append(ConvergenceRow(N, err, slope))
    return rows


def find_negative_gram(
    kernel: Kernel | Callable[[Tensor, Tensor], Tensor],
    sampler: Callable[[torch.Generator], Tensor],
    generator: torch.Generator,
    trials: int,
    threshold: float = 1e-8,
) -> GramReport | None:
    """Randomized search for points whose Gram matrix has min_eig < -threshold * trace.

    Returns None when no such point set is found within the trial budget.
    """
    for trial in range(trials):
        points = sampler(generator)
        if isinstance(kernel, Kernel):
            report = kernel.gram(points)
        else:
            report = gram_report(kernel(points[:, None, :], points[None, :, :]), points)
        if report.min_eig < -threshold * max(1.0, report.trace):
            logger.debug(f"negative Gram matrix after {trial + 1} trials: {report.min_eig:.3e}")
            return report
    return None
