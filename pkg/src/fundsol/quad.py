"""Quadrature engines.

* product rules on S^{n-1} (n <= 3),
* piecewise Chebyshev (Lobatto) panels on [0, R_tail] with roots as endpoints,
* spectral r-derivatives on a panel,
* integrals of ln|r - a| h(r) with singularity subtraction,
* a brute-force oracle for int_0^inf (r - a)^{-k} psi(r) dr.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as C
from numpy.polynomial.legendre import leggauss
from scipy.fft import dct
from scipy.integrate import IntegrationWarning, quad as _adaptive

from .errors import (
    ErrorBudgetExceeded,
    HypothesisViolated,
    InsufficientNodes,
    TailNotDecayed,
    UnsupportedDimension,
)

# ---------------------------------------------------------------- sphere rules


@dataclass(frozen=True, eq=False)
class SphereRule:
    nodes: np.ndarray
    weights: np.ndarray
    order: int

    @property
    def n(self) -> int:
        return self.nodes.shape[1]

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Contract the last axis of ``values`` against the weights."""
        return values @ self.weights


def sphere_rule(n: int, order: int) -> SphereRule:
    """Rule on S^{n-1}, exact for spherical polynomials of degree <= 2*order - 1 (n >= 2)."""
    if order < 1:
        raise ValueError("order must be >= 1")
    if n == 1:
        return SphereRule(np.array([[-1.0], [1.0]]), np.ones(2), order)
    if n == 2:
        M = 2 * order
        th = 2 * math.pi * np.arange(M) / M
        return SphereRule(np.stack([np.cos(th), np.sin(th)], axis=1), np.full(M, 2 * math.pi / M), order)
    if n == 3:
        z, wz = leggauss(order)
        M = 2 * order
        ph = 2 * math.pi * np.arange(M) / M
        s = np.sqrt(1 - z**2)
        nodes = np.stack(
            [np.outer(s, np.cos(ph)).ravel(), np.outer(s, np.sin(ph)).ravel(), np.repeat(z, M)], axis=1
        )
        weights = np.repeat(wz, M) * (2 * math.pi / M)
        return SphereRule(nodes, weights, order)
    raise UnsupportedDimension(f"sphere rules implemented for n <= 3, got n = {n}")


# ---------------------------------------------------------------- Chebyshev panels


def lobatto_nodes(N: int) -> np.ndarray:
    """Chebyshev extreme points cos(pi j / N), j = 0..N, ascending."""
    return -np.cos(np.pi * np.arange(N + 1) / N)


def cheb_coeffs(values: np.ndarray) -> np.ndarray:
    """Chebyshev coefficients (along the last axis) of the interpolant through
    values at ascending Lobatto nodes."""
    N = values.shape[-1] - 1
    # DCT-I expects the cos(pi j/N) ordering, i.e. descending nodes
    c = dct(values[..., ::-1], type=1, axis=-1) / N
    c[..., 0] /= 2
    c[..., N] /= 2
    return c


@dataclass(frozen=True, eq=False)
class RadialGrid:
    edges: np.ndarray  # panel boundaries, ascending, edges[0] = 0, edges[-1] = R_tail
    nodes_per_panel: int = 32
    roots: tuple[float, ...] = ()

    @property
    def R_tail(self) -> float:
        return float(self.edges[-1])

    @property
    def panels(self) -> np.ndarray:
        return np.stack([self.edges[:-1], self.edges[1:]], axis=1)

    @property
    def npanels(self) -> int:
        return self.edges.size - 1

    def node_matrix(self) -> np.ndarray:
        """Lobatto nodes for every panel, shape (npanels, N + 1)."""
        t = lobatto_nodes(self.nodes_per_panel)
        lo, hi = self.edges[:-1, None], self.edges[1:, None]
        return 0.5 * (lo + hi) + 0.5 * (hi - lo) * t[None, :]


def build_grid(R_tail: float, roots=(), breaks=(), panel_width: float = 1.0, nodes: int = 32,
               fine_zones=()) -> RadialGrid:
    """Panels covering [0, R_tail]; every root and break is a panel endpoint.

    ``fine_zones`` is a list of (lo, hi, width) intervals meshed more finely.
    """
    pts = {0.0, float(R_tail)}
    pts.update(float(r) for r in roots if 0 <= r < R_tail)
    pts.update(float(b) for b in breaks if 0 < b < R_tail)
    for lo, hi, _ in fine_zones:
        pts.update(float(v) for v in (lo, hi) if 0 < v < R_tail)
    base = np.array(sorted(pts))
    edges = [0.0]
    for lo, hi in zip(base[:-1], base[1:]):
        w = panel_width
        for zlo, zhi, zw in fine_zones:
            if lo >= zlo - 1e-12 and hi <= zhi + 1e-12:
                w = min(w, zw)
        m = max(1, int(math.ceil((hi - lo) / w - 1e-9)))
        edges.extend(np.linspace(lo, hi, m + 1)[1:].tolist())
    return RadialGrid(np.array(edges), nodes, tuple(sorted(float(r) for r in roots)))


def cheb_derivative(samples: np.ndarray, k: int, panel=(-1.0, 1.0)) -> np.ndarray:
    """k-th derivative at the Lobatto nodes of the interpolant through ``samples``."""
    N = samples.shape[-1] - 1
    if N + 1 < k + 8:
        raise InsufficientNodes(f"{N + 1} nodes cannot resolve derivative order {k}")
    c = cheb_coeffs(samples)
    scale = (2.0 / (panel[1] - panel[0])) ** k
    d = C.chebder(c, k, axis=-1) * scale if k else c
    t = lobatto_nodes(N)
    return C.chebval(t, np.moveaxis(d, -1, 0))


# ---------------------------------------------------------------- log-weighted integrals

_GL_X, _GL_W = leggauss(64)
_GRADE_X, _GRADE_W = leggauss(16)
_GRADE_LEVELS = 45


def _graded_nodes(L: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights on (0, L] refined geometrically toward 0."""
    xs, ws = [], []
    for lvl in range(_GRADE_LEVELS):
        hi = L * 2.0**-lvl
        lo = hi / 2
        xs.append(0.5 * (lo + hi) + 0.5 * (hi - lo) * _GRADE_X)
        ws.append(0.5 * (hi - lo) * _GRADE_W)
    return np.concatenate(xs), np.concatenate(ws)


def _panel_log_integral(coef: np.ndarray, lo: float, hi: float, a: float) -> np.ndarray:
    """int_lo^hi ln|r - a| S(r) dr for Chebyshev series ``coef`` (last axis) on [lo, hi]."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    L = hi - lo
    tol = 1e-13 * max(1.0, abs(a))

    def series(r):
        t = (np.asarray(r) - mid) / half
        return C.chebval(t, np.moveaxis(coef, -1, 0))

    if a < lo - tol or a > hi + tol:
        r = mid + half * _GL_X
        vals = series(r) * np.log(np.abs(r - a))
        return vals @ (half * _GL_W)
    if abs(a - lo) <= tol or abs(a - hi) <= tol:
        at_lo = abs(a - lo) <= tol
        d, w = _graded_nodes(L)
        r = lo + d if at_lo else hi - d
        Sa = series(lo if at_lo else hi)
        rem = (series(r) - Sa[..., None]) * np.log(d)
        return rem @ w + Sa * L * (math.log(L) - 1.0)
    # interior singular point: split
    cl = _resample(coef, lo, hi, lo, a)
    ch = _resample(coef, lo, hi, a, hi)
    return _panel_log_integral(cl, lo, a, a) + _panel_log_integral(ch, a, hi, a)


def _resample(coef, lo, hi, nlo, nhi):
    N = coef.shape[-1] - 1
    t = lobatto_nodes(N)
    r = 0.5 * (nlo + nhi) + 0.5 * (nhi - nlo) * t
    vals = C.chebval((r - 0.5 * (lo + hi)) / (0.5 * (hi - lo)), np.moveaxis(coef, -1, 0))
    return cheb_coeffs(vals)


def log_integral_series(coefs: np.ndarray, grid: RadialGrid, a: float) -> np.ndarray:
    """Sum over panels of int ln|r - a| S_p(r) dr; ``coefs`` has shape (npanels, ..., N + 1)."""
    total = 0.0
    for p, (lo, hi) in enumerate(grid.panels):
        total = total + _panel_log_integral(coefs[p], lo, hi, a)
    return total


def _cc_weights_coef(N: int) -> np.ndarray:
    k = np.arange(N + 1)
    w = np.zeros(N + 1)
    even = k % 2 == 0
    w[even] = 2.0 / (1.0 - k[even] ** 2)
    return w


def plain_integral_series(coefs: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """Sum over panels of int S_p(r) dr."""
    N = coefs.shape[-1] - 1
    w = _cc_weights_coef(N)
    halves = 0.5 * np.diff(grid.edges)
    per_panel = coefs @ w
    return np.tensordot(halves, per_panel, axes=(0, 0))


def coarse_coeffs(samples: np.ndarray) -> np.ndarray:
    """Coefficients of the half-resolution interpolant (every other Lobatto node)."""
    return cheb_coeffs(samples[..., ::2])


@dataclass
class QuadResult:
    value: complex
    error: float
    diagnostics: dict = field(default_factory=dict)


def log_weighted_integral(h, a: float, grid: RadialGrid, tail_tol: float = 1e-14,
                          error_budget: float | None = None) -> QuadResult:
    """int_0^inf ln|r - a| h(r) dr for a vectorized callable ``h``.

    The tail beyond ``grid.R_tail`` must be negligible; it is bounded and added
    to the error estimate.  The estimate is the gap to the half-resolution rule.
    """
    rr = grid.node_matrix()
    vals = np.asarray(h(rr), dtype=complex)
    scale = max(float(np.max(np.abs(vals))), 1e-300)
    tail_val = abs(vals[-1, -1])
    if tail_val > tail_tol * scale and tail_val > 1e-300:
        raise TailNotDecayed(f"|h(R_tail)| = {tail_val:.3e} exceeds {tail_tol:.1e} * max|h|")
    fine = log_integral_series(cheb_coeffs(vals), grid, a)
    coarse = log_integral_series(coarse_coeffs(vals), grid, a)
    R = grid.R_tail
    tail_bound = tail_val * max(1.0, abs(math.log(max(R - a, 1e-300)))) * max(1.0, R)
    err = float(abs(fine - coarse) + tail_bound)
    if error_budget is not None and err > error_budget:
        raise ErrorBudgetExceeded(f"estimated error {err:.3e} exceeds budget {error_budget:.1e}")
    return QuadResult(complex(fine), err, {"panels": grid.npanels, "R_tail": R})


# ---------------------------------------------------------------- principal-value oracle

DEFAULT_EPS = tuple(2.0**-i for i in range(4, 21))


def _derivatives_at(psi, a: float, kmax: int, h: float = 0.25) -> np.ndarray:
    """psi^{(j)}(a), j <= kmax, from a Chebyshev interpolant on a one-sided or
    centred window."""
    lo, hi = (a, a + 2 * h) if a - h < 0 else (a - h, a + h)
    N = 40
    t = lobatto_nodes(N)
    r = 0.5 * (lo + hi) + 0.5 * (hi - lo) * t
    c = cheb_coeffs(np.asarray(psi(r), dtype=float))
    ta = (a - 0.5 * (lo + hi)) / (0.5 * (hi - lo))
    out = []
    for j in range(kmax + 1):
        d = C.chebder(c, j) * (2.0 / (hi - lo)) ** j if j else c
        out.append(C.chebval(ta, d))
    return np.array(out)


def pv_oracle(psi, a: float, k: int, eps_seq=DEFAULT_EPS, check_tol: float = 1e-8) -> float:
    """int_0^inf (r - a)^{-k} psi(r) dr by adaptive quadrature outside (a - eps, a + eps)
    with Richardson extrapolation eps -> 0.

    ``psi`` must vanish to order k at a.
    """
    if k < 1:
        raise ValueError("order k must be >= 1")
    derivs = _derivatives_at(psi, a, k - 1)
    scale = max(1.0, float(np.max(np.abs(psi(np.linspace(0, a + 5, 101))))))
    if np.any(np.abs(derivs[:k]) > check_tol * scale):
        raise HypothesisViolated(
            f"psi does not vanish to order {k} at a = {a}: derivatives {derivs[:k]}"
        )

    def f(r):
        return psi(r) / (r - a) ** k

    def I(eps):
        total = 0.0
        if a - eps > 0:
            total += _adaptive(f, 0.0, a - eps, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
        lo = max(a + eps, 0.0) if a > 0 else eps
        total += _adaptive(f, lo, np.inf, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
        return total

    eps = np.asarray(eps_seq, dtype=float)
    # the tightest windows hit QUADPACK's roundoff floor; extrapolation handles that
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        vals = np.array([I(e) for e in eps])
    # for a > 0 the excluded window is symmetric and only odd powers of eps appear;
    # for a = 0 it is one-sided and all powers appear
    powers = [1, 3, 5, 7] if a > 0 else [1, 2, 3, 4]
    best, best_gap = vals[-1], np.inf
    table = [vals]
    ratio = eps[0] / eps[1]
    for p in powers:
        prev = table[-1]
        nxt = (ratio**p * prev[1:] - prev[:-1]) / (ratio**p - 1)
        if nxt.size < 2:
            break
        table.append(nxt)
        gap = abs(nxt[-1] - nxt[-2])
        if gap < best_gap:
            best, best_gap = nxt[-1], gap
    return float(best)


def falling_factorial(x: int, l: int) -> int:
    """(x)_l = x (x - 1) ... (x - l + 1)."""
    out = 1
    for i in range(l):
        out *= x - i
    return out


def boundary_constant(a: float, k: int, derivs0) -> float:
    """The constant added to the log form when a > 0.

    ``derivs0[j]`` is psi^{(j)}(0) for j <= k - 1.
    """
    if a == 0:
        return 0.0
    total = 0.0
    for l in range(1, k):
        total += (-a) ** (l - k) / falling_factorial(k - 1, l) * derivs0[l - 1]
    return total - math.log(a) / math.factorial(k - 1) * derivs0[k - 1]
