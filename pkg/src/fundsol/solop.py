"""The explicit solution operator P0 for symbols with ellipsoidal radial symmetry.

For Fourier data v and a point x,

    E_q(v)(r, x) = int_{S^{n-1}} exp(i x.Phi(r,w)) Fv(Phi(r,w)) / q(r) * J(r) dsigma(w),

and with 1/q0(r) = sum_{j,k} C_{j,k} (r - r_j)^{-k},

    P0 v(x) = (2 pi)^{-n} sum_{j,k} C_{j,k} [P_{j,k} + R_{j,k}] v(x),
    P_{j,k} v(x) = -1/(k-1)! int_0^inf ln|r - r_j| d_r^k E_q(v)(r, x) dr,
    R_{j,k} v(x) = sum_{l=1}^{k-1} (-r_j)^{l-k} / (k-1)_l d_r^{l-1} E_q(v)(0, x)
                   - ln(r_j) / (k-1)! d_r^{k-1} E_q(v)(0, x)          (R = 0 when r_j = 0).

Without nonnegative real roots P0 v(x) = (2 pi)^{-n} int_0^inf E_q(v)(r, x) dr.
Pairings with distributions go through the dual action <P0 u, psi> = <u, A P0 A psi>.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from numpy.polynomial import chebyshev as C

from . import quad
from .errors import ErrorBudgetExceeded, PathsDisagree, SurfaceTooClose, TailNotDecayed
from .quad import RadialGrid, SphereRule, build_grid, cheb_coeffs, coarse_coeffs, sphere_rule
from .rootsys import RadialFactorization, factor_radial
from .special import sphere_exp_integral
from .symbol import SymbolSpec, jacobian_density, radial_profile
from .testfn import GaussPolyAtom, TestFunction, convolve_fn, derive, gaussian, poly_degree, reflect


@dataclass(frozen=True)
class QuadOptions:
    sphere_order: int = 12  # lower bound; raised automatically to resolve the integrand
    panel_width: float = 1.0
    nodes: int = 32
    tail_tol: float = 1e-16
    error_budget: float | None = None
    max_sphere_order: int = 200
    chunk: int = 1 << 16


DEFAULT_OPTIONS = QuadOptions()


@dataclass
class PairingResult:
    value: complex
    error: float
    diagnostics: dict = field(default_factory=dict)

    def __add__(self, other: "PairingResult") -> "PairingResult":
        return PairingResult(self.value + other.value, self.error + other.error,
                             _merge_diag(self.diagnostics, other.diagnostics))

    def scaled(self, c: complex) -> "PairingResult":
        return PairingResult(c * self.value, abs(c) * self.error, dict(self.diagnostics))


def _merge_diag(a: dict, b: dict) -> dict:
    out = dict(a)
    for key, val in b.items():
        if key in out and isinstance(val, (int, float)) and isinstance(out[key], (int, float)):
            out[key] = max(out[key], val)
        else:
            out.setdefault(key, val)
    return out


def factorize(spec: SymbolSpec) -> RadialFactorization:
    """Radial factorization of ``spec`` with the dimension-aware multiplicity warning."""
    return factor_radial(radial_profile(spec), n=spec.n)


# ---------------------------------------------------------------- Fourier data


def bump_profile(rho):
    """Smooth radial cutoff: 1 for rho <= 1, 0 for rho >= 2, C-infinity in between."""
    rho = np.asarray(rho, dtype=float)
    a = np.clip(2.0 - rho, 0.0, None)
    b = np.clip(rho - 1.0, 0.0, None)
    fa = np.where(a > 0, np.exp(-1.0 / np.where(a > 0, a, 1.0)), 0.0)
    fb = np.where(b > 0, np.exp(-1.0 / np.where(b > 0, b, 1.0)), 0.0)
    return fa / (fa + fb)


@dataclass(frozen=True)
class BumpSpec:
    """The cutoff eta (by its radial profile) and the dilation index k."""

    k: float
    n: int

    def eta(self, x):
        return bump_profile(np.linalg.norm(np.asarray(x, dtype=float), axis=-1))


@dataclass(frozen=True)
class BumpFourier:
    """Fourier data Fv_k(xi) = eta(-xi / k) of the approximant source."""

    bump: BumpSpec

    @property
    def n(self) -> int:
        return self.bump.n

    def eval_fourier(self, xi):
        return bump_profile(np.linalg.norm(xi, axis=-1) / self.bump.k).astype(complex)

    def radial(self, rho):
        return bump_profile(np.asarray(rho) / self.bump.k)


FourierData = Union[TestFunction, BumpFourier]


# ---------------------------------------------------------------- planning


def _polar_svals(spec: SymbolSpec) -> tuple[float, float]:
    w = spec.frame.W
    return 1.0 / math.sqrt(w.max()), 1.0 / math.sqrt(w.min())


def _fourier_atoms(v: TestFunction) -> tuple[GaussPolyAtom, ...]:
    return v._fourier.atoms


def _tail_radius(spec: SymbolSpec, v: FourierData, opts: QuadOptions, kmax: int) -> float:
    smin, smax = _polar_svals(spec)
    x0n = float(np.linalg.norm(spec.x0))
    if isinstance(v, BumpFourier):
        return (2.0 * v.bump.k + x0n) / smin
    atoms = _fourier_atoms(v)
    ref = max((float(np.abs(a.coef).sum()) for a in atoms), default=1.0)
    R = 1.0
    for a in atoms:
        dc = float(np.linalg.norm(spec.x0 - a.center))
        A = float(np.abs(a.coef).sum())
        D = poly_degree(a.coef)
        s2 = a.width**2
        Ra = 1.0
        for _ in range(8):
            budget = (math.log(1.0 / opts.tail_tol) + math.log(max(A / ref, 1e-300) + 1.0)
                      + (D + kmax + spec.n + 2) * math.log(2.0 + Ra * smax + dc) + kmax * math.log(2.0 + Ra * smax / s2))
            Ra = (dc + a.width * math.sqrt(2.0 * max(budget, 1.0))) / smin
        R = max(R, Ra)
    return R


def _radial_path_ok(spec: SymbolSpec, v: FourierData) -> bool:
    if not spec.is_isotropic:
        return False
    if isinstance(v, BumpFourier):
        return True
    return all(np.all(a.center == 0) and poly_degree(a.coef) == 0 for a in _fourier_atoms(v))


def _auto_order(spec: SymbolSpec, v: FourierData, x: np.ndarray, R: float, opts: QuadOptions) -> int:
    if spec.n == 1:
        return 1
    smin, smax = _polar_svals(spec)
    xn = float(np.linalg.norm(x))
    if isinstance(v, BumpFourier):
        band = R * smax * xn + spec.n
    else:
        band = 0.0
        for a in _fourier_atoms(v):
            s2 = a.width**2
            dc = float(np.linalg.norm(spec.x0 - a.center))
            aniso = R * R * (smax**2 - smin**2) / (2 * s2)
            # restrict the phase estimate to radii where the atom is not negligible
            Reff = min(R, (dc + 9.0 * a.width) / smin)
            b = (Reff * smax * (xn + float(np.linalg.norm(a.freq))) + Reff * smax * dc / s2
                 + aniso + poly_degree(a.coef))
            band = max(band, b)
    order = int(math.ceil(0.6 * band + 10))
    return int(min(max(order, opts.sphere_order), opts.max_sphere_order))


@dataclass
class _Plan:
    grid: RadialGrid
    rule: SphereRule | None
    radial: bool


def _plan(spec, fact, v, x, opts: QuadOptions, kmax: int) -> _Plan:
    R = _tail_radius(spec, v, opts, kmax)
    roots = fact.roots
    if roots:
        R = max(R, max(roots) + 1.0)
    breaks, zones = [], []
    if isinstance(v, BumpFourier):
        smin, smax = _polar_svals(spec)
        x0n = float(np.linalg.norm(spec.x0))
        k = v.bump.k
        if spec.is_isotropic:
            breaks = [k / smin, 2 * k / smin]
        lo = max((k - x0n) / smax, 0.0)
        zones = [(lo, R, opts.panel_width / 4)]
    grid = build_grid(R, roots=roots, breaks=breaks, panel_width=opts.panel_width,
                      nodes=opts.nodes, fine_zones=zones)
    radial = _radial_path_ok(spec, v)
    rule = None if radial else sphere_rule(spec.n, _auto_order(spec, v, x, R, opts))
    return _Plan(grid, rule, radial)


# ---------------------------------------------------------------- E_q


def _sphere_average(spec: SymbolSpec, v: FourierData, r: np.ndarray, x: np.ndarray,
                    rule: SphereRule, chunk: int) -> np.ndarray:
    u = rule.nodes @ spec.polar_matrix.T
    S = u.shape[0]
    out = np.empty(r.size, dtype=complex)
    step = max(1, chunk // S)
    for i in range(0, r.size, step):
        rr = r[i : i + step]
        xi = rr[:, None, None] * u[None, :, :] + spec.x0
        vals = v.eval_fourier(xi) * np.exp(1j * (xi @ x))
        out[i : i + step] = vals @ rule.weights
    return out


def _radial_average(spec: SymbolSpec, v: FourierData, r: np.ndarray, x: np.ndarray) -> np.ndarray:
    M = spec.polar_matrix
    w = float(spec.frame.W[0])
    if isinstance(v, BumpFourier):
        return v.radial(r / math.sqrt(w)) * sphere_exp_integral(M, r[:, None] * x[None, :])
    out = np.zeros(r.size, dtype=complex)
    for a in _fourier_atoms(v):
        c0 = complex(a.coef.flat[0])
        y = r[:, None] * (x + a.freq)[None, :]
        out += c0 * np.exp(-(r * r) / (2.0 * w * a.width**2)) * sphere_exp_integral(M, y)
    return out


def _sample_E(spec, fact, v, r, x, plan: _Plan, opts: QuadOptions) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    flat = r.ravel()
    if plan.radial:
        avg = _radial_average(spec, v, flat, x)
    else:
        avg = _sphere_average(spec, v, flat, x, plan.rule, opts.chunk)
    out = avg * jacobian_density(spec, flat) / fact.deflated(flat)
    return out.reshape(r.shape)


def e_q(spec: SymbolSpec, fact: RadialFactorization, v: FourierData, r, x,
        rule: SphereRule | None = None, opts: QuadOptions = DEFAULT_OPTIONS):
    """E_q(v)(r, x) at the radii ``r``; uses ``rule`` if given, else an automatic choice."""
    x = np.asarray(x, dtype=float)
    r = np.asarray(r, dtype=float)
    if rule is not None:
        plan = _Plan(None, rule, False)
    else:
        plan = _plan(spec, fact, v, x, opts, 0)
    out = _sample_E(spec, fact, v, r, x, plan, opts)
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------- Taylor jets (analytic path)


def _jet_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    K = a.shape[-1]
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=complex)
    for i in range(K):
        for j in range(K - i):
            out[..., i + j] += a[..., i] * b[..., j]
    return out


def _exp_jet(e0, e1, e2, K: int) -> np.ndarray:
    e0, e1, e2 = np.broadcast_arrays(e0, e1, e2)
    f = np.zeros(e0.shape + (K + 1,), dtype=complex)
    f[..., 0] = np.exp(e0)
    for k in range(1, K + 1):
        acc = e1 * f[..., k - 1]
        if k >= 2:
            acc = acc + 2.0 * e2 * f[..., k - 2]
        f[..., k] = acc / k
    return f


def _poly_jet(coef: np.ndarray, d0: np.ndarray, u: np.ndarray, K: int) -> np.ndarray:
    """Taylor coefficients in t of P(d0 + t u); d0 has shape (p, n), u shape (p, n)."""
    n = coef.ndim
    p = d0.shape[0]
    tmp = None
    for j in range(n - 1, -1, -1):
        D = coef.shape[j]
        V = np.zeros((p, D, K + 1), dtype=complex)
        for a in range(D):
            for i in range(min(a, K) + 1):
                V[:, a, i] = math.comb(a, i) * d0[:, j] ** (a - i) * u[:, j] ** i
        if tmp is None:
            tmp = np.einsum("pai,...a->p...i", V, coef)
        else:
            new = np.zeros(tmp.shape[:-2] + (K + 1,), dtype=complex)
            for i1 in range(K + 1):
                for i2 in range(K + 1 - i1):
                    new[..., i1 + i2] += np.einsum("p...a,pa->p...", tmp[..., i1], V[:, :, i2])
            tmp = new
    return tmp


def _radial_factor_jet(spec: SymbolSpec, fact: RadialFactorization, r0: np.ndarray, K: int) -> np.ndarray:
    """Taylor jet of J(r) / q(r) at r0."""
    n = spec.n
    detfac = float(np.prod(1.0 / np.sqrt(spec.frame.W)))
    dens = np.zeros((r0.size, K + 1))
    for i in range(min(n - 1, K) + 1):
        dens[:, i] = math.comb(n - 1, i) * r0 ** (n - 1 - i)
    dens *= detfac
    q = fact.deflated
    qj = np.zeros((r0.size, K + 1), dtype=complex)
    dq = q
    for i in range(K + 1):
        qj[:, i] = dq(r0) / math.factorial(i)
        dq = dq.deriv()
    inv = np.zeros_like(qj)
    inv[:, 0] = 1.0 / qj[:, 0]
    for k in range(1, K + 1):
        acc = np.zeros(r0.size, dtype=complex)
        for j in range(1, k + 1):
            acc += qj[:, j] * inv[:, k - j]
        inv[:, k] = -acc / qj[:, 0]
    return _jet_mul(dens.astype(complex), inv)


def e_q_jets(spec: SymbolSpec, fact: RadialFactorization, v: TestFunction, r, x,
             rule: SphereRule, K: int, chunk: int = 1 << 14) -> np.ndarray:
    """Exact r-derivatives d_r^k E_q(v)(r, x), k <= K, via Taylor arithmetic per sphere node.

    Returns shape (K + 1, len(r)).
    """
    x = np.asarray(x, dtype=float)
    r0 = np.atleast_1d(np.asarray(r, dtype=float))
    u = rule.nodes @ spec.polar_matrix.T
    S = u.shape[0]
    out = np.zeros((r0.size, K + 1), dtype=complex)
    step = max(1, chunk // S)
    for i in range(0, r0.size, step):
        rr = r0[i : i + step]
        R = rr.size
        xi0 = rr[:, None, None] * u[None] + spec.x0
        uu = np.broadcast_to(u[None], xi0.shape)
        acc = np.zeros((R, S, K + 1), dtype=complex)
        for a in _fourier_atoms(v):
            d0 = xi0 - a.center
            s2 = a.width**2
            phase = a.freq + x
            e0 = -np.sum(d0 * d0, axis=-1) / (2 * s2) + 1j * (xi0 @ phase)
            e1 = -np.sum(d0 * uu, axis=-1) / s2 + 1j * (uu @ phase)
            e2 = -np.sum(uu * uu, axis=-1) / (2 * s2)
            ej = _exp_jet(e0, e1, e2, K)
            pj = _poly_jet(a.coef, d0.reshape(-1, spec.n), uu.reshape(-1, spec.n), K).reshape(R, S, K + 1)
            acc += _jet_mul(ej, pj)
        out[i : i + step] = np.einsum("rsk,s->rk", acc, rule.weights)
    out = _jet_mul(out, _radial_factor_jet(spec, fact, r0, K))
    fac = np.array([math.factorial(k) for k in range(K + 1)])
    return (out * fac).T


def e_q_derivs(spec: SymbolSpec, fact: RadialFactorization, v: TestFunction, x, panel, kmax: int,
               opts: QuadOptions = DEFAULT_OPTIONS, rule: SphereRule | None = None,
               rtol: float = 1e-6) -> dict:
    """d_r^k E_q on the Lobatto nodes of ``panel`` for k <= kmax by two independent routes.

    ``cheb`` differentiates the sampled E_q spectrally; ``analytic`` propagates
    Taylor jets through the integrand at every sphere node.
    """
    x = np.asarray(x, dtype=float)
    lo, hi = panel
    t = quad.lobatto_nodes(opts.nodes)
    r = 0.5 * (lo + hi) + 0.5 * (hi - lo) * t
    if rule is None:
        R = _tail_radius(spec, v, opts, kmax)
        rule = sphere_rule(spec.n, _auto_order(spec, v, x, max(R, hi), opts))
    plan = _Plan(None, rule, False)
    E = _sample_E(spec, fact, v, r, x, plan, opts)
    cheb = np.stack([quad.cheb_derivative(E, k, (lo, hi)) for k in range(kmax + 1)])
    cheb[0] = E
    analytic = e_q_jets(spec, fact, v, r, x, rule, kmax)
    gap = 0.0
    for k in range(kmax + 1):
        scale = max(float(np.max(np.abs(analytic[k]))), 1e-300)
        gap = max(gap, float(np.max(np.abs(cheb[k] - analytic[k]))) / scale)
    if gap > rtol:
        raise PathsDisagree(f"Chebyshev and analytic derivatives differ by {gap:.3e} (relative)")
    return {"r": r, "cheb": cheb, "analytic": analytic, "gap": gap}


# ---------------------------------------------------------------- P0


def _deriv_coeffs(coefs: np.ndarray, grid: RadialGrid, k: int) -> np.ndarray:
    if k == 0:
        return coefs
    scale = (2.0 / np.diff(grid.edges)) ** k
    return C.chebder(coefs, k, axis=-1) * scale[:, None]


def _derivs_at_zero(coefs: np.ndarray, grid: RadialGrid, kmax: int) -> np.ndarray:
    first = coefs[:1]
    out = []
    for l in range(kmax + 1):
        d = _deriv_coeffs(first, RadialGrid(grid.edges[:2], grid.nodes_per_panel), l)[0]
        out.append(C.chebval(-1.0, d))
    return np.array(out)


def _residual_from_derivs(rj: float, k: int, d0: np.ndarray) -> complex:
    if rj == 0.0:
        return 0.0
    total = 0.0
    for l in range(1, k):
        total += (-rj) ** (l - k) / quad.falling_factorial(k - 1, l) * d0[l - 1]
    return total - math.log(rj) / math.factorial(k - 1) * d0[k - 1]


def _assemble(coefs: np.ndarray, grid: RadialGrid, fact: RadialFactorization, n: int) -> complex:
    norm = (2.0 * math.pi) ** (-n)
    if fact.is_regular:
        return complex(quad.plain_integral_series(coefs, grid)) * norm
    d0 = _derivs_at_zero(coefs, grid, fact.maxmult)
    total = 0.0
    # fixed order: roots ascending, k ascending
    for rj, mj, Cj in zip(fact.roots, fact.mults, fact.pf):
        for k in range(1, mj + 1):
            Dk = _deriv_coeffs(coefs, grid, k)
            pjk = -quad.log_integral_series(Dk, grid, rj) / math.factorial(k - 1)
            total += Cj[k - 1] * (pjk + _residual_from_derivs(rj, k, d0))
    return complex(total) * norm


def _sample_panels(spec, fact, v, x, opts, kmax):
    plan = _plan(spec, fact, v, x, opts, kmax)
    rr = plan.grid.node_matrix()
    E = _sample_E(spec, fact, v, rr, x, plan, opts)
    scale = max(float(np.max(np.abs(E))), 1e-300)
    tail = float(np.abs(E[-1, -1]))
    if tail > max(1e3 * opts.tail_tol, 1e-12) * scale:
        raise TailNotDecayed(f"|E_q(R_tail)| = {tail:.3e} relative to max {scale:.3e}")
    return plan, E, tail


def apply_p0(spec: SymbolSpec, fact: RadialFactorization, v: FourierData, x,
             opts: QuadOptions = DEFAULT_OPTIONS) -> PairingResult:
    """(P0 v)(x) with an error estimate from the half-resolution rule."""
    x = np.asarray(x, dtype=float)
    kmax = fact.maxmult
    plan, E, tail = _sample_panels(spec, fact, v, x, opts, kmax)
    grid = plan.grid
    fine = _assemble(cheb_coeffs(E), grid, fact, spec.n)
    coarse = _assemble(coarse_coeffs(E), RadialGrid(grid.edges, grid.nodes_per_panel // 2, grid.roots),
                       fact, spec.n)
    R = grid.R_tail
    tail_bound = tail * R * (1.0 + abs(math.log(R))) * (2.0 * math.pi) ** (-spec.n)
    err = float(abs(fine - coarse) + tail_bound)
    diag = {
        "sphere_order": 0 if plan.rule is None else plan.rule.order,
        "radial_path": plan.radial,
        "panels": grid.npanels,
        "nodes_per_panel": grid.nodes_per_panel + 1,
        "R_tail": R,
        "tail_bound": tail_bound,
    }
    if opts.error_budget is not None and err > opts.error_budget:
        raise ErrorBudgetExceeded(f"estimated error {err:.3e} exceeds budget {opts.error_budget:.1e}")
    return PairingResult(fine, err, diag)


def residual_R(spec: SymbolSpec, fact: RadialFactorization, v: FourierData, x, j: int, k: int,
               opts: QuadOptions = DEFAULT_OPTIONS) -> complex:
    """R_{j,k} v(x)."""
    rj = fact.roots[j]
    if rj == 0.0:
        return 0.0
    x = np.asarray(x, dtype=float)
    plan, E, _ = _sample_panels(spec, fact, v, x, opts, k)
    d0 = _derivs_at_zero(cheb_coeffs(E), plan.grid, k)
    return complex(_residual_from_derivs(rj, k, d0))


# ---------------------------------------------------------------- pairings


@dataclass(frozen=True)
class PointMass:
    """weight * d^alpha delta_y."""

    location: tuple
    alpha: tuple = ()
    weight: complex = 1.0


@dataclass(frozen=True)
class SourceTerm:
    """Finite combination of derivatives of point masses and Gaussian test functions."""

    terms: tuple
    n: int

    @classmethod
    def delta(cls, n: int, y=None) -> "SourceTerm":
        y = tuple(np.zeros(n)) if y is None else tuple(float(t) for t in y)
        return cls((PointMass(y, (0,) * n, 1.0),), n)


def pair_delta(spec: SymbolSpec, fact: RadialFactorization, psi: TestFunction,
               opts: QuadOptions = DEFAULT_OPTIONS) -> PairingResult:
    """<P0 delta_0, psi> = (P0 A psi)(0)."""
    return apply_p0(spec, fact, reflect(psi), np.zeros(spec.n), opts)


def pair_source(spec: SymbolSpec, fact: RadialFactorization, s: SourceTerm, psi: TestFunction,
                opts: QuadOptions = DEFAULT_OPTIONS) -> PairingResult:
    """<P0 s, psi> = <s, A P0 A psi>."""
    total = PairingResult(0.0, 0.0, {})
    for term in s.terms:
        if isinstance(term, PointMass):
            alpha = tuple(term.alpha) or (0,) * spec.n
            sign = (-1) ** sum(alpha)
            f = reflect(derive(psi, alpha))
            y = np.asarray(term.location, dtype=float)
            res = apply_p0(spec, fact, f, -y, opts).scaled(term.weight * sign)
        elif isinstance(term, TestFunction):
            # <g, A P0 A psi> = P0(A psi * g)(0)
            res = apply_p0(spec, fact, convolve_fn(reflect(psi), term), np.zeros(spec.n), opts)
        else:
            raise TypeError(f"unsupported source term {term!r}")
        total = total + res
    return total


def approximant_value(spec: SymbolSpec, fact: RadialFactorization, bump: BumpSpec, x,
                      opts: QuadOptions = DEFAULT_OPTIONS) -> PairingResult:
    """u_k(x) = P0(F eta_k)(x), an entire function approximating P0 delta_0."""
    return apply_p0(spec, fact, BumpFourier(bump), np.asarray(x, dtype=float), opts)


def circle_points(center, radius: float, num: int, axis=None) -> tuple[np.ndarray, np.ndarray]:
    """Equi-angular points on a circle (n = 2) or a circle in the plane normal to ``axis`` (n = 3)."""
    center = np.asarray(center, dtype=float)
    th = 2 * math.pi * np.arange(num) / num
    n = center.size
    if n == 2:
        pts = center + radius * np.stack([np.cos(th), np.sin(th)], axis=1)
    elif n == 3:
        ax = np.array([0.0, 0.0, 1.0]) if axis is None else np.asarray(axis, dtype=float)
        ax = ax / np.linalg.norm(ax)
        helper = np.array([1.0, 0.0, 0.0]) if abs(ax[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        e1 = np.cross(ax, helper)
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(ax, e1)
        pts = center + radius * (np.cos(th)[:, None] * e1 + np.sin(th)[:, None] * e2)
    else:
        raise ValueError("circles are defined for n = 2 or 3")
    return th, pts


def trace_on_surface(spec: SymbolSpec, fact: RadialFactorization, s: SourceTerm, center, radius: float,
                     num_samples: int, eps: float, axis=None,
                     opts: QuadOptions = DEFAULT_OPTIONS) -> tuple[np.ndarray, list[PairingResult]]:
    """Samples of (P0 s * eta_eps) on a circle, eta_eps a unit-mass Gaussian of width eps."""
    th, pts = circle_points(center, radius, num_samples, axis)
    for term in s.terms:
        if isinstance(term, PointMass):
            y = np.asarray(term.location, dtype=float)
            dist = float(np.min(np.linalg.norm(pts - y, axis=1)))
            if dist <= 3 * eps:
                raise SurfaceTooClose(f"source at {y} lies {dist:.3g} from the surface (<= 3 eps)")
    mass = (2 * math.pi * eps**2) ** (-spec.n / 2)
    out = []
    for p in pts:
        moll = gaussian(spec.n, center=p, width=eps, coef=np.full((1,) * spec.n, mass))
        out.append(pair_source(spec, fact, s, moll, opts))
    return th, out
