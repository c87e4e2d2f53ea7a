"""Normalized Bessel kernels J_nu(x)/x^nu for nu = n/2 - 1 and the spherical
exponential integral

    int_{S^{n-1}} exp(i y . M omega) dsigma(omega) = (2 pi)^{n/2} J_nu(|M^T y|) / |M^T y|^nu.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import NegativeArgument, SingularMatrix

X_SERIES = 8.0
X_SWITCH = 25.0


def bessel_order(n: int) -> float:
    if n < 1:
        raise ValueError("dimension must be >= 1")
    return n / 2.0 - 1.0


def _check_order(nu: float) -> None:
    if nu < -0.5 or (2 * nu) != int(2 * nu):
        raise ValueError(f"order {nu} is not an integer or half-integer >= -1/2")


def _series(nu: float, x: np.ndarray) -> np.ndarray:
    """sum_m (-1)^m (x/2)^{2m} / (m! Gamma(m + nu + 1)) / 2^nu, Kahan-summed."""
    z = -(x / 2.0) ** 2
    term = np.full_like(x, 1.0 / (2.0**nu * math.gamma(nu + 1.0)))
    total = term.copy()
    comp = np.zeros_like(x)
    for m in range(1, 80):
        term = term * z / (m * (m + nu))
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if np.all(np.abs(term) <= 1e-18 * np.maximum(np.abs(total), 1e-300)):
            break
    return total


def _half_integer(nu: float, x: np.ndarray) -> np.ndarray:
    """Closed form via spherical Bessel functions; valid for x not small."""
    l = int(round(nu - 0.5))
    s, c = np.sin(x), np.cos(x)
    if l == -1:
        return math.sqrt(2.0 / math.pi) * c
    # j_l(x) by upward recurrence, stable for x > l
    j_prev = s / x
    if l == 0:
        jl = j_prev
    else:
        j_cur = s / x**2 - c / x
        for k in range(1, l):
            j_prev, j_cur = j_cur, (2 * k + 1) / x * j_cur - j_prev
        jl = j_cur
    return math.sqrt(2.0 / math.pi) * jl / x**l


def _hankel_j01(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """J_0 and J_1 from the Hankel asymptotic expansion (x >= X_SWITCH)."""
    out = []
    for nu in (0, 1):
        mu = 4.0 * nu * nu
        P = np.ones_like(x)
        Qs = np.zeros_like(x)
        a = 1.0
        k = 1
        prev = np.full_like(x, np.inf)
        while k < 60:
            a = a * (mu - (2 * k - 1) ** 2) / (k * 8.0)
            term = a / x**k
            if np.all(np.abs(term) >= prev):
                break
            prev = np.abs(term)
            if k % 2 == 1:
                Qs = Qs + (-1) ** ((k - 1) // 2) * term
            else:
                P = P + (-1) ** (k // 2) * term
            if np.all(np.abs(term) < 1e-17):
                break
            k += 1
        chi = x - (nu / 2.0 + 0.25) * math.pi
        out.append(np.sqrt(2.0 / (math.pi * x)) * (P * np.cos(chi) - Qs * np.sin(chi)))
    return out[0], out[1]


def _miller(nu: int, x: np.ndarray) -> np.ndarray:
    """J_nu(x) by Miller's backward recurrence normalized with J_0 + 2 sum J_{2k} = 1."""
    start = 2 * ((int(x.max()) + 40 + nu) // 2)
    j_next = np.zeros_like(x)
    j_cur = np.full_like(x, 1e-300)
    norm = np.zeros_like(x)
    val = np.zeros_like(x)
    for k in range(start, 0, -1):
        j_next, j_cur = j_cur, 2.0 * k / x * j_cur - j_next
        if k - 1 == nu:
            val = j_cur.copy()
        if (k - 1) % 2 == 0 and k > 1:
            norm += 2.0 * j_cur
        big = np.abs(j_cur) > 1e250
        if np.any(big):
            for arr in (j_next, j_cur, val, norm):
                arr[big] *= 1e-250
    norm += j_cur
    return val / norm


def _integer_large(nu: int, x: np.ndarray, use_miller: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    if np.any(use_miller):
        out[use_miller] = _miller(nu, x[use_miller])
    far = ~use_miller
    if np.any(far):
        xf = x[far]
        j0, j1 = _hankel_j01(xf)
        if nu == 0:
            jn = j0
        else:
            # upward recurrence is stable for x > nu
            jm, jn = j0, j1
            for k in range(1, nu):
                jm, jn = jn, 2.0 * k / xf * jn - jm
        out[far] = jn
    return out


def normalized_bessel(nu: float, x):
    """J_nu(x) / x^nu for integer or half-integer nu >= -1/2, continuous at x = 0."""
    _check_order(nu)
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise NegativeArgument("argument must be nonnegative")
    flat = np.atleast_1d(xa).ravel()
    out = np.empty_like(flat)
    small = flat <= X_SERIES
    if np.any(small):
        out[small] = _series(nu, flat[small])
    big = ~small
    if np.any(big):
        xb = flat[big]
        if nu != int(nu):
            out[big] = _half_integer(nu, xb)
        else:
            jn = _integer_large(int(nu), xb, xb < X_SWITCH)
            out[big] = jn / xb**nu
    out = out.reshape(xa.shape)
    return out[()] if out.ndim == 0 else out


def sphere_exp_integral(M, y) -> np.ndarray | float:
    """Integral of exp(i y . M omega) over the unit sphere of dimension n - 1.

    ``y`` may carry leading batch axes.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if M.shape != (n, n):
        raise ValueError("M must be square")
    if abs(np.linalg.det(M)) <= 1e-14 * max(1.0, np.abs(M).max()) ** n:
        raise SingularMatrix("matrix is singular")
    y = np.asarray(y, dtype=float)
    rho = np.linalg.norm(y @ M, axis=-1)
    return (2.0 * math.pi) ** (n / 2.0) * normalized_bessel(bessel_order(n), rho)


def sphere_area(n: int) -> float:
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)
