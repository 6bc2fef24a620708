import numpy as np
import pytest

from stochwave.coefficients import CoefficientModel


def _xz(x, z):
    return np.asarray(x, dtype=float)[..., None], np.asarray(z, dtype=float)[..., None]


def smooth_model() -> CoefficientModel:
    """x-dependent coefficient with a^2 = 1.5 + 0.3 sin x cos z + 0.2 y1 + 0.1 x y2."""

    def a2(x, z, y, r=0):
        x, z = _xz(x, z)
        return 1.5 + 0.3 * np.sin(x) * np.cos(z) + 0.2 * y[:, 0] + 0.1 * x * y[:, 1]

    def ga2(x, z, y, r=0):
        x, z = _xz(x, z)
        gx = 0.3 * np.cos(x) * np.cos(z) + 0.1 * y[:, 1] + 0 * x
        gz = -0.3 * np.sin(x) * np.sin(z) + 0 * y[:, 0]
        return gx, gz

    return CoefficientModel("smooth", a2, ga2, (0.9, 1.5))


def linear_model() -> CoefficientModel:
    """a = 1 + 0.2 x + 0.1 z + 0.1 y1, linear in space so cell rules are exact."""

    def a(x, z, y):
        x, z = _xz(x, z)
        return 1.0 + 0.2 * x + 0.1 * z + 0.1 * y[:, 0]

    def a2(x, z, y, r=0):
        return a(x, z, y) ** 2

    def ga2(x, z, y, r=0):
        av = a(x, z, y)
        return 2 * av * 0.2, 2 * av * 0.1

    return CoefficientModel("linear", a2, ga2, (0.8, 1.5))


@pytest.fixture
def rng():
    return np.random.default_rng(20261017)


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, title: str, passed: bool, detail: str) -> None:
    """Print and remember one acceptance verdict for the terminal summary."""
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2} {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
