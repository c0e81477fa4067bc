from __future__ import annotations

from functools import partial

import pytest
import torch

from pyrptorch.geometry import in_crown
from pyrptorch.kernels import QNuKernel, gram_report
from pyrptorch.matrices import basis
from pyrptorch.suites import (
    CLUSTER_POINTS,
    SUITES,
    Suite,
    SuiteConfig,
    _gram_check,
    crown_cluster,
    run_suite,
)
from pyrptorch.utils import CheckMode, CheckResult, check_close


@pytest.mark.parametrize("suite", [suite for suite in Suite.list() if suite != Suite.ALL])
def test_suite_passes(suite: str, suite_config: SuiteConfig) -> None:
    checks = run_suite(suite, suite_config)
    assert len(checks) > 0
    failed = [check.name for check in checks if not check.passed]
    assert not failed, failed


def test_unknown_suite() -> None:
    with pytest.raises(ValueError):
        run_suite("resolvent")


def test_suite_is_deterministic(suite_config: SuiteConfig) -> None:
    first = [check.to_dict() for check in run_suite(Suite.CROWN, suite_config)]
    second = [check.to_dict() for check in run_suite(Suite.CROWN, suite_config)]
    assert first == second


@pytest.mark.parametrize(
    "got,expected,tol,mode,passed",
    [
        (1.0 + 1e-9, 1.0, 1e-8, CheckMode.ABSOLUTE, True),
        (1.0 + 1e-7, 1.0, 1e-8, CheckMode.ABSOLUTE, False),
        (1e6 + 1e-3, 1e6, 1e-8, CheckMode.RELATIVE, True),
        (1e6 + 1.0, 1e6, 1e-8, CheckMode.RELATIVE, False),
        (1j, 1j + 1e-12, 1e-10, CheckMode.ABSOLUTE, True),
        (-1e-12, 0.0, 1e-10, CheckMode.AT_LEAST, True),
        (-1e-3, 0.0, 1e-10, CheckMode.AT_LEAST, False),
        (2.0, 0.0, 1e-10, CheckMode.AT_LEAST, True),
        (-2.0, 0.0, 1e-10, CheckMode.AT_MOST, True),
        (1e-3, 0.0, 1e-10, CheckMode.AT_MOST, False),
        (True, True, 0.0, CheckMode.ABSOLUTE, True),
        ("de_sitter", "light_cone", 0.0, CheckMode.ABSOLUTE, False),
    ],
)
def test_check_close(got, expected, tol: float, mode: CheckMode, passed: bool) -> None:
    assert check_close(got, expected, tol, mode) is passed


def test_check_result_to_dict() -> None:
    result = CheckResult("value", 1 + 2j, torch.tensor(1 + 2j, dtype=torch.cdouble), 1e-12)
    record = result.to_dict()
    assert record["pass"] is True
    assert record["expected"] == {"re": 1.0, "im": 2.0}
    assert record["got"] == {"re": 1.0, "im": 2.0}
    assert record["tol"] == 1e-12


def test_gram_check_fails_on_non_hermitian_matrix() -> None:
    matrix = torch.tensor([[1.0, 2.0], [0.0, 1.0]], dtype=torch.cdouble)
    check = _gram_check("skewed", partial(gram_report, matrix), 1e-10)
    assert not check.passed
    assert check.got == "not hermitian"
    assert _gram_check("identity", partial(gram_report, torch.eye(3)), 1e-10).passed


def test_suite_errors_become_failed_checks(monkeypatch: pytest.MonkeyPatch) -> None:
    def broken(config: SuiteConfig) -> list[CheckResult]:
        raise RuntimeError("no convergence")

    monkeypatch.setitem(SUITES, Suite.GAMMA, broken)
    (check,) = run_suite(Suite.GAMMA)
    assert not check.passed
    assert "no convergence" in check.got


def test_positivity_suite_completes(suite_config: SuiteConfig) -> None:
    checks = run_suite(Suite.POSITIVITY, suite_config)
    assert len(checks) == 16
    assert all(check.passed for check in checks)


def test_qnu_search_budget() -> None:
    assert SuiteConfig().search_trials == 100_000


def test_crown_cluster(gen: torch.Generator) -> None:
    points = crown_cluster(4, gen)
    assert points.shape == (CLUSTER_POINTS, 5)
    assert bool(in_crown(points).all())
    assert float((points - basis(4, 0)).abs().max()) < 1.0
    assert QNuKernel(4, 1.5).gram(points).psd
