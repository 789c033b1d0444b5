"""Reference values frozen into tests/test_quadrature.cpp and tests/test_model.cpp.

Computed with scipy/mpmath directly from the integral definitions, with no
code shared with the library. Run: python3 tools/oracles.py
"""
import math

import mpmath as mp
from scipy import integrate, special

TWO_PI = 2 * math.pi


def kt(T, w):
    """int_0^T sin(s w)^2 / w^2 ds."""
    if w < 1e-4:
        return T**3 / 3
    return (T / 2 - math.sin(2 * T * w) / (4 * w)) / w**2


def q_riesz_1d(xi, beta):
    """int |eta|^{beta-1} 2 pi exp(-(xi - eta)^2) d eta
    = 2 pi Gamma(beta/2) 1F1((1-beta)/2; 1/2; -xi^2)."""
    return float(TWO_PI * mp.gamma(beta / 2) * mp.hyp1f1((1 - beta) / 2, 0.5, -xi * xi))


def radial(f, breaks, tail_from):
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        total += integrate.quad(f, a, b, limit=2000, epsabs=0, epsrel=1e-12)[0]
    return total


def main():
    mp.mp.dps = 30
    # J(0, s=1) for Riesz beta = 0.5, d = 1, k = 1, alpha = 0, constant 1:
    # 2 int_0^inf r^{-p} sin^2 r dr = 2^{p-1} (-Gamma(1-p) cos(pi (1-p) / 2)), p = 5/2.
    p = mp.mpf(2.5)
    j0 = 2 ** (p - 1) * (-mp.gamma(1 - p) * mp.cos(mp.pi * (1 - p) / 2))
    print("J0", mp.nstr(j0, 15))
    # J(xi = 2.5, s = 1) = int |eta|^{-1/2} sin^2(xi - eta) / (xi - eta)^2 d eta, panels of
    # length pi around xi out to R, mean-value tail beyond.
    xi, R = 2.5, 4000.0
    g = lambda e: abs(e) ** (-0.5) * (math.sin(xi - e) / (xi - e)) ** 2 if e != xi else abs(e) ** (-0.5)
    edges = sorted({0.0} | {xi + n * math.pi for n in range(-int(R / math.pi), int(R / math.pi) + 1)})
    j25 = sum(integrate.quad(g, a, b, limit=200, epsabs=0, epsrel=1e-13)[0] for a, b in zip(edges[:-1], edges[1:]))
    lo, hi = edges[0], edges[-1]
    j25 += integrate.quad(lambda e: abs(e) ** (-0.5) * 0.5 / (xi - e) ** 2, -math.inf, lo)[0]
    j25 += integrate.quad(lambda e: abs(e) ** (-0.5) * 0.5 / (xi - e) ** 2, hi, math.inf)[0]
    print("J2.5", repr(j25))
    # Shifted condition integral, beta = 0.5, gamma = 1, xi = 2.
    s2 = mp.quad(lambda e: abs(e) ** (-0.5) / (1 + (2 - e) ** 2), [-mp.inf, -10, 0, 2, 10, mp.inf])
    print("shift2", mp.nstr(s2, 15))
    # Condition integral at xi = 0: Gamma(b/2) Gamma(g - b/2) / Gamma(g).
    print("cond0", mp.nstr(mp.gamma(0.25) * mp.gamma(0.75) / mp.gamma(1), 15))

    # Isometry with the Gaussian bump, Riesz beta = 0.5, d = 1, k = 1, T = 1.
    # K_T(x) = 1/(2 x^2) - sin(2x)/(4 x^3): the mean part is smooth, the
    # oscillating part goes through QAWO.
    for alpha in (0.0, 0.25):
        qv = lambda x: 2 * (1 + x * x) ** alpha * q_riesz_1d(x, 0.5)
        body = integrate.quad(lambda x: qv(x) * kt(1.0, x), 0, 1, epsabs=0, epsrel=1e-13)[0]
        edges = [2.0**i for i in range(0, 15)]
        for a, b in zip(edges[:-1], edges[1:]):
            body += integrate.quad(lambda x: qv(x) / (2 * x * x), a, b, epsabs=0, epsrel=1e-13, limit=200)[0]
            body -= integrate.quad(lambda x: qv(x) / (4 * x**3), a, b, weight="sin", wvar=2.0, epsabs=0,
                                   epsrel=1e-13, limit=400)[0]
        tail = 2 * TWO_PI * math.sqrt(math.pi) * 0.5 * integrate.quad(
            lambda x: (1 + x * x) ** alpha * x ** (-2.5), edges[-1], math.inf)[0]
        print("iso_riesz_alpha", alpha, repr(body + tail), "tail", tail)

    # Atoms at +-1.5, mass 0.7 each, k = 1, alpha = 0.25, T = 1.
    val = 0.0
    for a in (1.5, -1.5):
        f = lambda x: 0.7 * (1 + x * x) ** 0.25 * kt(1.0, abs(x)) * TWO_PI * math.exp(-((x - a) ** 2))
        val += integrate.quad(f, -40, 40, points=[a, 0], limit=400, epsabs=0, epsrel=1e-13)[0]
    print("iso_atoms", repr(val))

    # Flat level 1, d = 3, k = 2, alpha = 0, T = 1: Q = (2 pi)^3 pi^{3/2}.
    q = TWO_PI**3 * math.pi**1.5
    f = lambda r: 4 * math.pi * r * r * kt(1.0, r * r) * q
    body = sum(integrate.quad(f, a, b, limit=400, epsabs=0, epsrel=1e-13)[0]
               for a, b in zip([0, 1, 2, 4, 8, 16, 32, 64], [1, 2, 4, 8, 16, 32, 64, 128]))
    tail = 4 * math.pi * q * 0.5 * integrate.quad(lambda r: r ** (-2), 128, math.inf)[0]
    print("iso_flat3", repr(body + tail))

    # Riesz d = 2, beta = 1, k = 1, alpha = 0, T = 1 (constant 1):
    # Q(rho) = int r dr r^{beta-2} (2 pi)^2 int dphi exp(-|xi - eta|^2)
    #        = (2 pi)^3 int dr r^{beta-1} exp(-(rho - r)^2) i0e(2 rho r).
    def q2(rho):
        h = lambda r: TWO_PI**3 * r ** 0.0 * math.exp(-((rho - r) ** 2)) * special.i0e(2 * rho * r)
        return integrate.quad(h, 0, rho + 12, points=[rho], limit=400, epsabs=0, epsrel=1e-12)[0]
    f = lambda rho: TWO_PI * rho * kt(1.0, rho) * q2(rho)
    edges = [0, 1, 2, 4, 8, 16, 32, 64, 128, 256, 512]
    body = sum(integrate.quad(f, a, b, limit=800, epsabs=0, epsrel=1e-11)[0] for a, b in zip(edges[:-1], edges[1:]))
    # tail: Q -> (2 pi)^2 pi |xi|^{-1} ... use Q(rho) ~ q2(512) * 512 / rho, K_T -> 1/(2 rho^2)
    qinf = q2(512.0) * 512.0
    tail = TWO_PI * qinf * 0.5 * integrate.quad(lambda r: r ** (-2), 512, math.inf)[0]
    print("iso_riesz2", repr(body + tail), "tail", tail)

    # Increment second moment, Riesz beta = 0.5, d = 1, k = 1, alpha = 0, t1 = 0.5, t2 = 0.75.
    def incr_kernel(w, t1=0.5, t2=0.75):
        a = integrate.quad(lambda s: ((math.sin((t2 - s) * w) - math.sin((t1 - s) * w)) / w) ** 2, 0, t1,
                           limit=400, epsabs=0, epsrel=1e-12)[0]
        b = integrate.quad(lambda s: (math.sin((t2 - s) * w) / w) ** 2, t1, t2, limit=400, epsabs=0, epsrel=1e-12)[0]
        return a + b
    f = lambda x: 2 * incr_kernel(max(x, 1e-9)) * q_riesz_1d(x, 0.5)
    edges = [0] + [2.0**i for i in range(0, 12)]
    body = sum(integrate.quad(f, a, b, limit=800, epsabs=0, epsrel=1e-11)[0] for a, b in zip(edges[:-1], edges[1:]))
    # mean of the kernel at large w: (t1 + (t2 - t1)/2) / w^2 = 0.625 / w^2
    tail = 2 * TWO_PI * math.sqrt(math.pi) * 0.625 * integrate.quad(lambda x: x ** (-2.5), edges[-1], math.inf)[0]
    print("incr", repr(body + tail), "tail", tail)


if __name__ == "__main__":
    main()
