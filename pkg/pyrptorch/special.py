from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from logging import getLogger
from typing import Callable

import torch
from torch import Tensor

from pyrptorch.matrices import DEFAULT_MATRIX_DTYPE
from pyrptorch.ode.continuation import continue_2f1
from pyrptorch.utils import Scalar, to_complex

logger = getLogger(__name__)

LANCZOS_G = 7.0
LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)

# distance from an integer below which a parameter difference counts as degenerate
DEGENERATE_TOL = 1e-5
REGULARIZATION_STEP = 2.5e-3

# regions of the complex plane served by each representation of 2F1
POWER_SERIES_RADIUS = 0.6
SERIES_RADIUS = 0.5
FAR_RADIUS = 2.0
ODE_START_RADIUS = 2.05


@dataclass(frozen=True)
class SeriesOptions:

    cutoff: float = 1e-17
    max_terms: int = 10_000


@dataclass(frozen=True)
class HypParams:
    """Parameters (a, b, c) of the Gauss hypergeometric function."""

    a: complex
    b: complex
    c: complex

    def __post_init__(self) -> None:
        for name in ("a", "b", "c"):
            object.__setattr__(self, name, to_complex(getattr(self, name)))
        if is_nonpositive_integer(self.c):
            raise ValueError(f"c={self.c} is a non-positive integer, 2F1 is undefined.")

    def swapped(self) -> HypParams:
        return HypParams(self.b, self.a, self.c)

    def shifted(self, k: int = 1) -> HypParams:
        """Parameters of the k-th derivative, (a+k, b+k, c+k)."""
        return HypParams(self.a + k, self.b + k, self.c + k)


def is_nonpositive_integer(z: complex, tol: float = 0.0) -> bool:
    return abs(z.imag) <= tol and z.real <= tol and abs(z.real - round(z.real)) <= tol


def _as_complex_tensor(z: Scalar | Tensor) -> Tensor:
    return torch.as_tensor(z, dtype=DEFAULT_MATRIX_DTYPE)


def _poles(z: Tensor) -> Tensor:
    return (z.imag == 0) & (z.real <= 0) & (z.real == torch.round(z.real))


def _lanczos(z: Tensor) -> Tensor:
    z = z - 1
    x = torch.full_like(z, LANCZOS_COEFFS[0])
    for i, coeff in enumerate(LANCZOS_COEFFS[1:], start=1):
        x = x + coeff / (z + i)
    t = z + LANCZOS_G + 0.5
    return HALF_LOG_2PI + (z + 0.5) * torch.log(t) - t + torch.log(x)


def log_gamma(z: Scalar | Tensor) -> Tensor:
    """Logarithm of the Gamma function for complex arguments.

    Uses the Lanczos approximation for Re z >= 1/2 and the reflection formula
    log Gamma(z) = log(pi) - log(sin(pi z)) - log Gamma(1 - z) otherwise.

    Arguments:
        z: Complex scalar or tensor.

    Returns:
        Tensor with the values of log Gamma. The imaginary part is fixed modulo 2 pi only
        in the reflected half-plane.

    Raises:
        ValueError: If any entry of z is a pole, i.e. a non-positive integer.
    """
    z = _as_complex_tensor(z)
    if bool(_poles(z).any()):
        raise ValueError("log_gamma has poles at the non-positive integers.")
    reflect = z.real < 0.5
    direct = _lanczos(torch.where(reflect, 1 - z, z))
    reflected = math.log(math.pi) - torch.log(torch.sin(math.pi * z)) - direct
    return torch.where(reflect, reflected, direct)


def gamma(z: Scalar | Tensor) -> Tensor:
    return torch.exp(log_gamma(z))


def rgamma(z: Scalar | Tensor) -> Tensor:
    """Reciprocal Gamma function, vanishing at the poles of Gamma."""
    z = _as_complex_tensor(z)
    poles = _poles(z)
    safe = torch.where(poles, torch.ones_like(z), z)
    return torch.where(poles, torch.zeros_like(z), torch.exp(-log_gamma(safe)))


def gamma_ratio(num: list[complex], den: list[complex]) -> complex:
    """prod Gamma(num) / prod Gamma(den); zero when a denominator sits on a pole."""
    if any(is_nonpositive_integer(d) for d in den):
        return 0j
    if any(is_nonpositive_integer(x) for x in num):
        raise ValueError(f"Gamma pole in the numerator of a connection coefficient: {num}.")
    lg = log_gamma(torch.tensor(num + den, dtype=DEFAULT_MATRIX_DTYPE))
    return complex(torch.exp(lg[: len(num)].sum() - lg[len(num) :].sum()).item())


def gauss_sum(p: HypParams) -> complex:
    """Value of 2F1(a, b; c; 1) = Gamma(c)Gamma(c-a-b)/(Gamma(c-a)Gamma(c-b)) for Re(c-a-b) > 0."""
    delta = p.c - p.a - p.b
    if delta.real <= 0:
        raise ValueError(f"The series diverges at z=1 unless Re(c-a-b) > 0, got {delta}.")
    return gamma_ratio([p.c, delta], [p.c - p.a, p.c - p.b])


def hypergeometric_series(
    p: HypParams, z: Tensor, options: SeriesOptions = SeriesOptions()
) -> Tensor:
    """Partial sums of the defining power series, valid for |z| < 1.

    Raises:
        RuntimeError: If the series has not converged after `options.max_terms` terms.
    """
    a, b, c = p.a, p.b, p.c
    term = torch.ones_like(z)
    total = term.clone()
    previous_small = torch.zeros(z.shape, dtype=torch.bool)
    for k in range(options.max_terms):
        term = term * ((a + k) * (b + k) / ((c + k) * (k + 1))) * z
        total = total + term
        small = (term.abs() <= options.cutoff * total.abs()) | (term == 0)
        if bool((small & previous_small).all()):
            if logger.isEnabledFor(logging.DEBUG):
                logger.debug(f"2F1 series converged after {k + 1} terms")
            return total
        previous_small = small
    raise RuntimeError(
        f"2F1 series for {p} did not converge within {options.max_terms} terms."
    )


def _regularized(
    formula: Callable[[HypParams], Tensor], p: HypParams, b_sign: float = 1.0
) -> Tensor:
    """Evaluate a connection formula at a degenerate parameter difference.

    The parameters are moved to (a + s, b + b_sign s) for s = +-h, +-2h and +-4h, where the
    formula is regular. The symmetric averages are even in s and two Richardson stages remove
    the s^2 and s^4 terms. The set of moves is closed under swapping conjugate a and b, so
    the result keeps the symmetry 2F1(conj z) = conj 2F1(z) of conjugate parameter pairs.
    """
    h = REGULARIZATION_STEP

    def sym(step: float) -> Tensor:
        plus = formula(HypParams(p.a + step, p.b + b_sign * step, p.c))
        minus = formula(HypParams(p.a - step, p.b - b_sign * step, p.c))
        return (plus + minus) / 2

    s1, s2, s4 = sym(h), sym(2 * h), sym(4 * h)
    r1, r2 = (4 * s1 - s2) / 3, (4 * s2 - s4) / 3
    return (16 * r1 - r2) / 15


def _near_integer(delta: complex) -> bool:
    return abs(delta - round(delta.real)) < DEGENERATE_TOL


def _pfaff(p: HypParams, z: Tensor, options: SeriesOptions) -> Tensor:
    w = z / (z - 1)
    inner = hypergeometric_series(HypParams(p.a, p.c - p.b, p.c), w, options)
    return (1 - z) ** (-p.a) * inner


def _one_minus_z(p: HypParams, z: Tensor, options: SeriesOptions) -> Tensor:
    def formula(q: HypParams) -> Tensor:
        a, b, c = q.a, q.b, q.c
        w = 1 - z
        first = gamma_ratio([c, c - a - b], [c - a, c - b])
        second = gamma_ratio([c, a + b - c], [a, b])
        out = first * hypergeometric_series(HypParams(a, b, a + b - c + 1), w, options)
        tail = hypergeometric_series(HypParams(c - a, c - b, c - a - b + 1), w, options)
        return out + second * w ** (c - a - b) * tail

    delta = p.c - p.a - p.b
    if _near_integer(delta):
        return _regularized(formula, p)
    return formula(p)


def _inverse_one_minus_z(p: HypParams, z: Tensor, options: SeriesOptions) -> Tensor:
    def formula(q: HypParams) -> Tensor:
        a, b, c = q.a, q.b, q.c
        w = 1 / (1 - z)
        first = gamma_ratio([c, b - a], [b, c - a])
        second = gamma_ratio([c, a - b], [a, c - b])
        head = hypergeometric_series(HypParams(a, c - b, a - b + 1), w, options)
        out = first * (1 - z) ** (-a) * head
        tail = hypergeometric_series(HypParams(b, c - a, b - a + 1), w, options)
        return out + second * (1 - z) ** (-b) * tail

    delta = p.a - p.b
    if _near_integer(delta):
        return _regularized(formula, p, -1.0)
    return formula(p)


def _inverse_z(p: HypParams, z: Tensor, options: SeriesOptions) -> Tensor:
    def formula(q: HypParams) -> Tensor:
        a, b, c = q.a, q.b, q.c
        w = 1 / z
        first = gamma_ratio([c, b - a], [b, c - a])
        second = gamma_ratio([c, a - b], [a, c - b])
        head = hypergeometric_series(HypParams(a, a - c + 1, a - b + 1), w, options)
        out = first * (-z) ** (-a) * head
        tail = hypergeometric_series(HypParams(b, b - c + 1, b - a + 1), w, options)
        return out + second * (-z) ** (-b) * tail

    delta = p.a - p.b
    if _near_integer(delta):
        return _regularized(formula, p, -1.0)
    return formula(p)


def _regions(z: Tensor) -> list[Tensor]:
    """Masks selecting, in priority order, the representation used for each z."""
    taken = torch.zeros(z.shape, dtype=torch.bool)
    masks = []
    for cond in (
        z.abs() <= POWER_SERIES_RADIUS,
        (z / (z - 1)).abs() <= SERIES_RADIUS,
        (1 - z).abs() <= SERIES_RADIUS,
        (1 - z).abs() >= FAR_RADIUS,
        z.abs() >= FAR_RADIUS,
    ):
        mask = cond & ~taken
        masks.append(mask)
        taken = taken | mask
    masks.append(~taken)
    return masks


def _closed_form(p: HypParams, z: Tensor, options: SeriesOptions) -> Tensor:
    out = torch.empty_like(z)
    formulas = (hypergeometric_series, _pfaff, _one_minus_z, _inverse_one_minus_z, _inverse_z)
    masks = _regions(z)
    if bool(masks[-1].any()):
        raise ValueError("Closed-form evaluation requested outside the covered regions.")
    for mask, formula in zip(masks, formulas):
        if bool(mask.any()):
            out[mask] = formula(p, z[mask], options)
    return out


def _segment_distance(start: Tensor, end: Tensor, point: complex) -> Tensor:
    direction = end - start
    s = ((point - start) * direction.conj()).real / (direction.abs() ** 2)
    s = s.clamp(0.0, 1.0)
    return (start + s * direction - point).abs()


def _continuation_starts(z: Tensor) -> Tensor:
    """Pick per point the start on the closed-form regions whose straight path to z stays
    furthest from the singular points 0 and 1."""
    candidates = torch.stack(
        [
            SERIES_RADIUS * z / z.abs(),
            1 + ODE_START_RADIUS * (z - 1) / (z - 1).abs(),
            ODE_START_RADIUS * z / z.abs(),
        ]
    )
    clearance = torch.minimum(
        _segment_distance(candidates, z.expand_as(candidates), 0j),
        _segment_distance(candidates, z.expand_as(candidates), 1 + 0j),
    )
    best = clearance.argmax(dim=0)
    return candidates.gather(0, best.unsqueeze(0)).squeeze(0)


def _continued(p: HypParams, z: Tensor, options: SeriesOptions) -> Tensor:
    z0 = _continuation_starts(z)
    f0 = _closed_form(p, z0, options)
    df0 = p.a * p.b / p.c * _closed_form(p.shifted(), z0, options)
    return continue_2f1(p.a, p.b, p.c, z0, z, f0, df0).values


def gauss_2f1(
    p: HypParams, z: Scalar | Tensor, options: SeriesOptions = SeriesOptions()
) -> Tensor:
    """Principal branch of the Gauss hypergeometric function 2F1(a, b; c; z).

    The value is computed by the power series for |z| <= 0.6, by the Pfaff transformation,
    by the connection formulas around 1 and infinity, and by numerical continuation of the
    hypergeometric equation in the remaining bounded region. Degenerate connection formulas
    (integer parameter differences) are evaluated by symmetric perturbation of `a` combined
    with Richardson extrapolation.

    Arguments:
        p: Parameters (a, b, c).
        z: Complex scalar or tensor of any shape.
        options: Cutoff and term cap of the power series.

    Returns:
        Complex tensor with the shape of z.

    Raises:
        ValueError: If some z lies on the branch cut [1, inf).
        RuntimeError: If a series or the continuation does not converge.
    """
    z = _as_complex_tensor(z)
    if not bool(torch.isfinite(z).all()):
        raise ValueError("2F1 requires finite arguments.")
    if bool(((z.imag == 0) & (z.real >= 1)).any()):
        raise ValueError("2F1 is evaluated on its branch cut [1, inf).")
    # one canonical parameter order so that the function is symmetric in (a, b) bit for bit
    if (p.b.real, p.b.imag) < (p.a.real, p.a.imag):
        p = p.swapped()

    flat = z.reshape(-1)
    out = torch.empty_like(flat)
    masks = _regions(flat)
    closed = ~masks[-1]
    if bool(closed.any()):
        out[closed] = _closed_form(p, flat[closed], options)
    if bool(masks[-1].any()):
        out[masks[-1]] = _continued(p, flat[masks[-1]], options)
    return out.reshape(z.shape)


def hyp2f1(a: Scalar, b: Scalar, c: Scalar, z: Scalar | Tensor) -> Tensor:
    return gauss_2f1(HypParams(a, b, c), z)


def entire_C(z: Scalar | Tensor) -> Tensor:
    """C(z) = sum_k (-1)^k z^k/(2k)!, i.e. C(t^2) = cos(t)."""
    z = _as_complex_tensor(z)
    small = z.abs() < 1e-3
    series = 1 - z / 2 + z**2 / 24 - z**3 / 720
    return torch.where(small, series, torch.cos(torch.sqrt(z)))


def entire_S(z: Scalar | Tensor) -> Tensor:
    """S(z) = sum_k (-1)^k z^k/(2k+1)!, i.e. S(t^2) = sin(t)/t."""
    z = _as_complex_tensor(z)
    small = z.abs() < 1e-3
    series = 1 - z / 6 + z**2 / 120 - z**3 / 5040
    root = torch.sqrt(torch.where(small, torch.ones_like(z), z))
    return torch.where(small, series, torch.sin(root) / root)


def pochhammer(x: complex, k: int) -> complex:
    out = 1 + 0j
    for j in range(k):
        out *= x + j
    return out


def principal_power(base: Tensor, exponent: Scalar) -> Tensor:
    """base ** exponent = exp(exponent * Log base) with the principal logarithm."""
    base = _as_complex_tensor(base)
    return torch.exp(to_complex(exponent) * torch.log(base))
