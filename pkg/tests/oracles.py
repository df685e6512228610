"""Independent reference values.  Nothing here imports the package under test."""

from __future__ import annotations

import math

import mpmath as mp


def stable_deriv_mp(alpha: float, n: int, u: float, dps: int = 30) -> float:
    """d^n p_N/du^n by Fourier inversion along the ray w = r e^{i theta}.

    Rotating the contour turns the oscillatory integrand into a decaying one,
    which is a different numerical route from the package's real-axis panels.
    """
    with mp.workdps(dps):
        a = mp.mpf(alpha)
        x = abs(mp.mpf(u))
        th = min(mp.pi / 2, mp.pi / (4 * a))
        e = mp.exp(1j * th)
        f = lambda r: (1j * r * e) ** n * mp.exp(-(r ** a) * mp.exp(1j * a * th) + 1j * x * r * e) * e
        val = mp.re(mp.quad(f, [0, 0.5, 2, 8, 30, mp.inf])) / mp.pi
    if u < 0 and n % 2:
        val = -val
    return float(val)


def cauchy_pdf(u, gamma=1.0):
    return gamma / (math.pi * (gamma ** 2 + u ** 2))


def cauchy_pdf_prime(u):
    return -2.0 * u / (math.pi * (1.0 + u * u) ** 2)


def cauchy_entropy(gamma):
    return math.log(4.0 * math.pi * gamma)


def gamma_mp(x: float) -> float:
    with mp.workdps(40):
        return float(mp.gamma(mp.mpf(x)))


def gamma_euler_product(x: float, terms: int = 50) -> float:
    """Gamma through the recurrence to x + terms and Stirling's series there."""
    with mp.workdps(40):
        z = mp.mpf(x) + terms
        log_g = (z - 0.5) * mp.log(z) - z + 0.5 * mp.log(2 * mp.pi)
        log_g += 1 / (12 * z) - 1 / (360 * z ** 3) + 1 / (1260 * z ** 5) - 1 / (1680 * z ** 7)
        prod = mp.mpf(1)
        for k in range(terms):
            prod *= mp.mpf(x) + k
        return float(mp.exp(log_g) / prod)


def stable_tail_coefficient(alpha: float) -> float:
    """Leading constant c with p_N(u) ~ c |u|^-(1+alpha)."""
    return math.gamma(1.0 + alpha) * math.sin(math.pi * alpha / 2.0) / math.pi
