"""Factorization of the radial profile into a root part and a non-vanishing part.

pi(r) = q0(r) q(r) with q0(r) = prod_j (r - r_j)^{m_j} over the nonnegative
real roots, and 1/q0(r) = sum_j sum_k C[j][k] (r - r_j)^{-k}.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from math import comb, factorial

import numpy as np
from numpy.polynomial import Polynomial

from .errors import NoConvergence, NotLowerBounded

log = logging.getLogger(__name__)

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class RootCluster:
    value: complex
    mult: int


@dataclass(frozen=True, eq=False)
class RadialFactorization:
    profile: Polynomial
    roots: tuple[float, ...]
    mults: tuple[int, ...]
    deflated: Polynomial
    pf: tuple[tuple[complex, ...], ...]  # pf[j][k-1] = C_{j,k}
    other_roots: tuple[RootCluster, ...]

    @property
    def maxmult(self) -> int:
        return max(self.mults, default=0)

    @property
    def is_regular(self) -> bool:
        return not self.roots

    def q0(self) -> Polynomial:
        out = Polynomial([1.0])
        for rj, mj in zip(self.roots, self.mults):
            out = out * Polynomial([-rj, 1.0]) ** mj
        return out

    def pf_eval(self, r):
        r = np.asarray(r, dtype=complex)
        acc = np.zeros_like(r)
        for rj, cj in zip(self.roots, self.pf):
            for k, c in enumerate(cj, start=1):
                acc = acc + c * (r - rj) ** (-k)
        return acc


def _poly_scale(coef: np.ndarray, z: complex, order: int) -> float:
    """Natural magnitude of the order-th derivative of the polynomial at z."""
    az = max(1.0, abs(z))
    tot = 0.0
    for i in range(order, coef.size):
        tot += abs(coef[i]) * factorial(i) / factorial(i - order) * az ** (i - order)
    return tot


def _newton(P: Polynomial, z: complex, iters: int = 50) -> complex:
    dP = P.deriv()
    for _ in range(iters):
        d = dP(z)
        if d == 0:
            break
        step = P(z) / d
        z = z - step
        if abs(step) <= 4 * EPS * max(1.0, abs(z)):
            break
    return complex(z)


def _derivative_residuals_ok(P: Polynomial, z: complex, m: int, tol: float) -> bool:
    coef = P.coef
    D = P
    for l in range(m):
        if abs(D(z)) > tol * _poly_scale(coef, z, l):
            return False
        D = D.deriv()
    return True


def find_roots(profile: Polynomial, cluster_tol: float = 1e-7, max_iter: int = 50) -> list[RootCluster]:
    """All complex roots of ``profile`` with multiplicities.

    Companion-matrix eigenvalues are grouped greedily: two groups merge when
    their members lie within the perturbation radius expected for the merged
    multiplicity and the polished centroid annihilates the lower derivatives.
    """
    coef = np.trim_zeros(np.asarray(profile.coef, dtype=complex), "b")
    if coef.size < 2:
        raise ValueError("profile must have degree >= 1")
    P = Polynomial(coef)
    raw = np.roots(coef[::-1])
    if not np.all(np.isfinite(raw)):
        raise NoConvergence("companion eigenvalues did not converge")
    groups = [[complex(z)] for z in raw]

    def spread_ok(members: list[complex]) -> bool:
        m = len(members)
        c = np.mean(members)
        dm = abs(P.deriv(m)(c)) / factorial(m) if m <= P.degree() else 0.0
        if dm == 0:
            return False
        radius = max(cluster_tol * (1 + abs(c)),
                     50.0 * (EPS * _poly_scale(coef, c, 0) / dm) ** (1.0 / m))
        return max(abs(z - c) for z in members) <= radius

    while len(groups) > 1:
        best = None
        for i in range(len(groups)):
            ci = np.mean(groups[i])
            for j in range(i + 1, len(groups)):
                dist = abs(ci - np.mean(groups[j]))
                if best is None or dist < best[0]:
                    best = (dist, i, j)
        _, i, j = best
        merged = groups[i] + groups[j]
        if not spread_ok(merged):
            break
        m = len(merged)
        c = _newton(P.deriv(m - 1), complex(np.mean(merged)), max_iter)
        if not _derivative_residuals_ok(P, c, m, 1e-7):
            break
        groups = [g for k, g in enumerate(groups) if k not in (i, j)] + [[c] * m]

    out = []
    for g in groups:
        m = len(g)
        z = _newton(P.deriv(m - 1), complex(np.mean(g)), max_iter)
        if abs(P(z)) > 1e-9 * _poly_scale(coef, z, 0):
            raise NoConvergence(f"root {z} has residual {abs(P(z)):.3e}")
        out.append(RootCluster(z, m))
    out.sort(key=lambda rc: (rc.value.real, rc.value.imag))
    return out


def _synthetic_division(coef: np.ndarray, root: complex) -> np.ndarray:
    """Divide the ascending-coefficient polynomial by (r - root)."""
    hi = coef[::-1]
    quot = np.empty(hi.size - 1, dtype=complex)
    acc = 0.0
    for i in range(hi.size - 1):
        acc = acc * root + hi[i]
        quot[i] = acc
    return quot[::-1]


def factor_radial(profile: Polynomial, tol: float = 1e-9, cluster_tol: float = 1e-7,
                  n: int | None = None) -> RadialFactorization:
    """Split ``profile`` into q0 (nonnegative real roots) and the deflated factor q.

    With the dimension ``n`` given, roots of multiplicity >= n trigger a warning.
    """
    clusters = find_roots(profile, cluster_tol=cluster_tol)
    coef = np.trim_zeros(np.asarray(profile.coef, dtype=complex), "b")
    real_roots: dict[float, int] = {}
    others = []
    for rc in clusters:
        z = rc.value
        if abs(z.imag) <= tol * (1 + abs(z)) and z.real >= -tol:
            rv = max(z.real, 0.0)
            if abs(rv) <= tol:
                rv = 0.0
            real_roots[rv] = real_roots.get(rv, 0) + rc.mult
        else:
            others.append(rc)
    roots = tuple(sorted(real_roots))
    mults = tuple(real_roots[r] for r in roots)

    if 0.0 in real_roots and real_roots[0.0] % 2 == 1:
        warnings.warn("odd-multiplicity root at r = 0 in the radial profile", RuntimeWarning)
    if n is not None:
        for rv, m in zip(roots, mults):
            if m >= n:
                warnings.warn(f"root multiplicity {m} at r = {rv:.6g} is >= dimension {n}; the radial "
                              "integrand is not forced to vanish to that order at r = 0", RuntimeWarning)

    q = coef.copy()
    # deflate the largest roots first; keeps the forward recursion stable
    for rv in sorted(roots, reverse=True):
        for _ in range(real_roots[rv]):
            q = _synthetic_division(q, rv)
    qpoly = Polynomial(q)
    fact = RadialFactorization(
        profile=Polynomial(coef),
        roots=roots,
        mults=mults,
        deflated=qpoly,
        pf=(),
        other_roots=tuple(others),
    )
    _check_lower_bounded(fact)
    pf = partial_fractions(fact) if roots else ()
    return RadialFactorization(fact.profile, roots, mults, qpoly, pf, tuple(others))


def _check_lower_bounded(fact: RadialFactorization) -> float:
    q = fact.deflated
    extent = max([abs(rc.value) for rc in fact.other_roots] + list(fact.roots) + [0.0])
    rmax = 2.0 * extent + 2.0
    samples = np.concatenate([
        np.linspace(0.0, rmax, 4097),
        [max(rc.value.real, 0.0) for rc in fact.other_roots],
    ])
    qmin = float(np.min(np.abs(q(samples))))
    qnorm = float(np.max(np.abs(q.coef)))
    if qmin < 1e-6 * qnorm:
        raise NotLowerBounded(
            f"deflated factor q nearly vanishes on [0, inf): min|q| = {qmin:.3e} "
            f"(|q| = {qnorm:.3e}); a root lies too close to the positive real axis"
        )
    return qmin


def _inverse_power_series(d: complex, m: int, order: int) -> np.ndarray:
    """Taylor coefficients in t of (d + t)^{-m}, up to t^order."""
    return np.array([_binom_neg(m, l) * d ** (-m - l) for l in range(order + 1)], dtype=complex)


def _binom_neg(m: int, l: int) -> int:
    # binom(-m, l) = (-1)^l binom(m + l - 1, l)
    return (-1) ** l * comb(m + l - 1, l)


def partial_fractions(fact: RadialFactorization) -> tuple[tuple[complex, ...], ...]:
    """Coefficients C_{j,k} of 1/q0 from the Taylor series of the cofactor at each root."""
    out = []
    for j, (rj, mj) in enumerate(zip(fact.roots, fact.mults)):
        series = np.zeros(mj, dtype=complex)
        series[0] = 1.0
        for i, (ri, mi) in enumerate(zip(fact.roots, fact.mults)):
            if i == j:
                continue
            factor = _inverse_power_series(rj - ri, mi, mj - 1)
            series = np.convolve(series, factor)[:mj]
        # C_{j,k} = coefficient of t^{m_j - k}
        out.append(tuple(complex(series[mj - k]) for k in range(1, mj + 1)))
    return tuple(out)


def verify_partial_fractions(fact: RadialFactorization, npts: int = 128, seed: int = 0) -> float:
    """Max relative error of the partial-fraction reconstruction of 1/q0."""
    if fact.is_regular:
        return 0.0
    rmax = max(fact.roots)
    rng = np.random.default_rng(seed)
    lo, hi = -1.0, 2.0 * rmax + 2.0
    pts = []
    roots = np.array(fact.roots)
    while len(pts) < npts:
        cand = rng.uniform(lo, hi, size=4 * npts)
        ok = np.min(np.abs(cand[:, None] - roots[None, :]), axis=1) >= 0.1
        pts.extend(cand[ok].tolist())
    r = np.array(pts[:npts])
    exact = 1.0 / fact.q0()(r)
    approx = fact.pf_eval(r)
    return float(np.max(np.abs(approx - exact) / np.abs(exact)))


def describe(fact: RadialFactorization) -> dict:
    """JSON-ready summary used by the CLI."""
    def cx(z):
        return [float(np.real(z)), float(np.imag(z))]

    return {
        "regular": fact.is_regular,
        "roots": list(fact.roots),
        "multiplicities": list(fact.mults),
        "maxmult": fact.maxmult,
        "partial_fractions": [
            {"root": rj, "k": k, "C": cx(c)}
            for rj, cj in zip(fact.roots, fact.pf)
            for k, c in enumerate(cj, start=1)
        ],
        "q": [cx(c) for c in fact.deflated.coef],
        "other_roots": [{"root": cx(rc.value), "mult": rc.mult} for rc in fact.other_roots],
        "pf_error": verify_partial_fractions(fact),
    }
