"""One test per acceptance criterion; each prints a PASS/FAIL line."""
import subprocess
import sys

import pytest

from nlbox import acceptance


def _report(capsys, result):
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()


@pytest.mark.parametrize("check", acceptance.CHECKS[:9], ids=lambda f: f.__name__)
def test_criterion(check, capsys):
    _report(capsys, check())


def test_criterion_10_byte_identical_reports(capsys):
    runs = [
        subprocess.run([sys.executable, "-m", "nlbox.cli", "verify", "all", "--seed", "0x5EED", "--threads", t],
                       capture_output=True, check=False).stdout
        for t in ("1", "8")
    ]
    identical = runs[0] == runs[1] and len(runs[0]) > 0
    inner = acceptance.check_determinism()
    result = acceptance.CriterionResult(
        10, "verify all is byte-identical at 1 and 8 threads", identical and inner.passed,
        f"reports identical={identical} ({len(runs[0])} bytes); {inner.detail}")
    _report(capsys, result)
