from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import pytest
import torch

from pyrptorch.cli import (
    EXIT_FAILED_CHECK,
    EXIT_NUMERIC,
    EXIT_OK,
    EXIT_USAGE,
    main,
    parse_mass_range,
    parse_point,
)
from pyrptorch.geometry import sphere_point
from pyrptorch.kernels import MassParam, PsiKernel
from pyrptorch.matrices import basis
from pyrptorch.utils import CheckResult


def _json_lines(text: str) -> list[dict]:
    return [json.loads(line) for line in text.splitlines() if line]


def test_eval_psi(capsys: pytest.CaptureFixture) -> None:
    assert main(["eval", "--n", "2", "--m", "1.0", "--t", "1.0"]) == EXIT_OK
    (record,) = _json_lines(capsys.readouterr().out)
    assert set(record) == {"n", "m", "lambda", "value"}
    expected = complex(PsiKernel(MassParam(2, 1.0))(sphere_point(2, 1.0), basis(2, 0)))
    assert record["value"]["re"] == pytest.approx(expected.real, rel=1e-12)
    assert record["value"]["im"] == pytest.approx(expected.imag, abs=1e-12)


def test_eval_is_deterministic(capsys: pytest.CaptureFixture) -> None:
    argv = ["eval", "--n", "3", "--m", "0.4,2.0", "--z=0.6:0.2,0:0.5,0,0.8:0"]
    assert main(argv) == EXIT_OK
    first = capsys.readouterr().out
    assert main(argv) == EXIT_OK
    assert capsys.readouterr().out == first
    assert len(_json_lines(first)) == 2


def test_eval_qnu(capsys: pytest.CaptureFixture) -> None:
    assert main(["eval", "--kernel", "qnu", "--n", "4", "--nu", "1.5", "--t", "0.7"]) == EXIT_OK
    (record,) = _json_lines(capsys.readouterr().out)
    assert set(record) == {"n", "nu", "value"}


def test_sweep_csv(capsys: pytest.CaptureFixture) -> None:
    assert main(["sweep", "--n", "2", "--m", "0.1:0.1:3", "--t", "1.2"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "n,m,lambda_re,lambda_im,psi_re,psi_im"
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 30
    masses = [float(row["m"]) for row in rows]
    assert masses == sorted(masses)
    assert masses[0] == 0.1 and masses[-1] == 3.0


def test_mass_range() -> None:
    assert parse_mass_range("1.5") == [1.5]
    assert parse_mass_range("0.5,2") == [0.5, 2.0]
    assert parse_mass_range("0.25:0.25:1") == [0.25, 0.5, 0.75, 1.0]
    with pytest.raises(ValueError):
        parse_mass_range("1:0:2")
    with pytest.raises(ValueError):
        parse_mass_range("2:0.1:1")
    with pytest.raises(ValueError):
        parse_mass_range("1:2")


def test_parse_point() -> None:
    assert torch.equal(parse_point(2, "en"), basis(2, 2))
    z = parse_point(1, "1:0.5, -2")
    assert torch.equal(z, torch.tensor([1 + 0.5j, -2 + 0j], dtype=torch.cdouble))
    with pytest.raises(ValueError):
        parse_point(1, "1:0")
    with pytest.raises(ValueError):
        parse_point(1, "a:b,0")


def test_mass_zero_is_a_numeric_error(capsys: pytest.CaptureFixture) -> None:
    assert main(["eval", "--m", "0", "--t", "1.0"]) == EXIT_NUMERIC
    assert capsys.readouterr().out == ""


def test_usage_errors() -> None:
    assert main(["eval", "--n", "2", "--z", "1:0,0"]) == EXIT_USAGE
    assert main(["eval", "--m", "-1", "--t", "1.0"]) == EXIT_USAGE
    with pytest.raises(SystemExit) as info:
        main(["eval", "--kernel", "resolvent"])
    assert info.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == EXIT_USAGE


def test_verify_gamma(capsys: pytest.CaptureFixture) -> None:
    assert main(["verify", "--suite", "gamma"]) == EXIT_OK
    records = _json_lines(capsys.readouterr().out)
    assert records
    assert all(record["pass"] for record in records)
    assert set(records[0]) == {"name", "expected", "got", "tol", "pass"}


def test_verify_failure(monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture) -> None:
    monkeypatch.setattr(
        "pyrptorch.cli.run_suite", lambda suite, config: [CheckResult("forced", 0.0, 1.0, 0.0)]
    )
    assert main(["verify", "--suite", "gamma"]) == EXIT_FAILED_CHECK
    (record,) = _json_lines(capsys.readouterr().out)
    assert record["pass"] is False


def test_oracle_circle(capsys: pytest.CaptureFixture) -> None:
    assert main(["oracle", "circle", "--m", "1.0", "--N", "32,64,128,256"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "N,m,max_err,slope"
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [int(row["N"]) for row in rows] == [32, 64, 128, 256]
    assert rows[0]["slope"] == ""
    assert float(rows[-1]["slope"]) == pytest.approx(2.0, abs=0.3)


def test_oracle_circle_several_masses(capsys: pytest.CaptureFixture) -> None:
    assert main(["oracle", "circle", "--m", "0.5,2.0", "--N", "32,64"]) == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert [(float(row["m"]), int(row["N"])) for row in rows] == [
        (0.5, 32),
        (0.5, 64),
        (2.0, 32),
        (2.0, 64),
    ]


def test_oracle_series(capsys: pytest.CaptureFixture) -> None:
    assert main(["oracle", "series", "--n", "2", "--m", "1.0", "--c", "0.3"]) == EXIT_OK
    (record,) = _json_lines(capsys.readouterr().out)
    assert record["tail"] <= 1e-9
    assert record["c"] == 0.3


@pytest.mark.parametrize(
    "action,key,expected",
    [
        ("classify", "class", "de_sitter"),
        ("crown", "in_crown", False),
    ],
)
def test_geometry(capsys: pytest.CaptureFixture, action: str, key: str, expected) -> None:
    assert main(["geometry", action, "--n", "2", "--z", "en"]) == EXIT_OK
    (record,) = _json_lines(capsys.readouterr().out)
    assert record[key] == expected
    assert record["point"] == [[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]


def test_geometry_cayley_of_identity(capsys: pytest.CaptureFixture) -> None:
    assert main(["geometry", "cayley", "--n", "2", "--z", "e0"]) == EXIT_OK
    (record,) = _json_lines(capsys.readouterr().out)
    assert record["cayley"] == [[0.0, 0.0]] * 3


def test_output_file(tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
    out = tmp_path / "nested" / "psi.json"
    argv = ["eval", "--t", "0.5", "--out", str(out), "--format", "csv"]
    assert main(argv) == EXIT_OK
    assert capsys.readouterr().out == ""
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "n,m,lambda,value"
    assert len(lines) == 2
