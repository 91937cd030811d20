"""Independent oracles shared by the tests.

Nothing here imports the package's own density or CF code: the
characteristic function is re-typed from its closed form and densities
come from numerical Fourier inversion with scipy quadrature.
"""

import cmath
import math

import numpy as np
import pytest
from hypothesis import settings
from scipy import integrate

# first calls build cached lookup tables, so per-example timing is noisy
settings.register_profile("default", deadline=None)
settings.load_profile("default")


def cf_oracle(alpha, beta, sigma, mu, u):
    """Closed-form stable CF, written out with complex scalars."""
    if u == 0:
        return 1 + 0j
    s = 1.0 if u > 0 else -1.0
    expo = -(sigma ** alpha) * abs(u) ** alpha * (1 - 1j * beta * s * math.tan(math.pi * alpha / 2))
    return cmath.exp(expo + 1j * u * mu)


def _cf_vec(alpha, beta, u):
    u = np.asarray(u, float)
    return np.exp(-np.abs(u) ** alpha * (1 - 1j * beta * np.sign(u) * math.tan(math.pi * alpha / 2)))


def pdf_oracle(x, alpha, beta):
    """Standard (sigma=1, mu=0) stable density by CF inversion."""
    def integrand(u):
        return (_cf_vec(alpha, beta, u) * np.exp(-1j * u * x)).real

    val, _ = integrate.quad(integrand, 0.0, np.inf, limit=400, epsabs=1e-12, epsrel=1e-10)
    return val / math.pi


def cdf_oracle(x, alpha, beta):
    """Standard stable CDF by Gil-Pelaez inversion."""
    def integrand(u):
        if u == 0:
            return 0.0
        return (np.exp(-1j * u * x) * _cf_vec(alpha, beta, u)).imag / u

    val, _ = integrate.quad(integrand, 0.0, np.inf, limit=400, epsabs=1e-11, epsrel=1e-9)
    return 0.5 - val / math.pi


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list = []


def report(name, passed, detail):
    line = f"{'PASS' if passed else 'FAIL'}  {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
