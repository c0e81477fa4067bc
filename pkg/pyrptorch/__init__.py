from __future__ import annotations

import logging
import os
import sys

logging_levels = {
    "DEBUG": logging.DEBUG,
    "INFO": logging.INFO,
    "WARNING": logging.WARNING,
    "ERROR": logging.ERROR,
    "CRITICAL": logging.CRITICAL,
}

LOG_LEVEL: str = os.environ.get("PYRP_LOG_LEVEL", "").upper()

LOG_LEVEL: int = logging_levels.get(LOG_LEVEL, logging.INFO)  # type: ignore[arg-type, no-redef]
# If logger not setup, add handler to stderr
# else use the setup of the embedding application
handle = None
if __name__ not in logging.Logger.manager.loggerDict.keys():
    handle = logging.StreamHandler(sys.stderr)
    handle.set_name("console")

logger = logging.getLogger(__name__)
if handle:
    logger.addHandler(handle)
[
    h.setLevel(LOG_LEVEL)  # type: ignore[func-returns-value]
    for h in logger.handlers
    if h.get_name() == "console"
]
logger.setLevel(LOG_LEVEL)

logger.debug(f"pyrptorch logger successfully setup with log level {LOG_LEVEL}")


from .geometry import (
    cayley,
    classify_boundary,
    in_crown,
    in_tube,
    ray_inversion,
    sigma_R,
    sigma_V,
    sphere_point,
    xi0,
)
from .group import Boost, Horospherical, LorentzWord, MRotation, Rotation, act, jlambda
from .integral_reps import (
    intertwiner_A,
    lightcone_integral,
    planewave_quadrature,
    poisson_transform,
)
from .kernels import (
    CanonicalKernel,
    MassParam,
    PhiCKernel,
    PhiKernel,
    PsiKernel,
    QNuKernel,
    gamma_const,
    psi_kernel,
)
from .matrices import DEFAULT_MATRIX_DTYPE, DEFAULT_REAL_DTYPE
from .oracles import build_circle_model, discrete_kernel_convergence, phi_series
from .special import HypParams, gamma, gauss_2f1, hyp2f1, log_gamma
from .suites import Suite, run_suite
from .utils import BoundaryType, CheckResult, Regime

__all__ = [
    "DEFAULT_MATRIX_DTYPE",
    "DEFAULT_REAL_DTYPE",
    "HypParams",
    "gamma",
    "log_gamma",
    "gauss_2f1",
    "hyp2f1",
    "cayley",
    "classify_boundary",
    "in_crown",
    "in_tube",
    "ray_inversion",
    "sigma_R",
    "sigma_V",
    "sphere_point",
    "xi0",
    "Boost",
    "Horospherical",
    "LorentzWord",
    "MRotation",
    "Rotation",
    "act",
    "jlambda",
    "MassParam",
    "PsiKernel",
    "PhiKernel",
    "PhiCKernel",
    "CanonicalKernel",
    "QNuKernel",
    "gamma_const",
    "psi_kernel",
    "intertwiner_A",
    "lightcone_integral",
    "planewave_quadrature",
    "poisson_transform",
    "build_circle_model",
    "discrete_kernel_convergence",
    "phi_series",
    "Suite",
    "run_suite",
    "BoundaryType",
    "CheckResult",
    "Regime",
]
