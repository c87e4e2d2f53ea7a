"""Named oracle checks with reported residuals.

Every check returns a :class:`CheckReport`; ``run_all`` executes the suite in a
fixed order.  Random panels draw from ``numpy.random.default_rng(seed)``.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate

from . import quad
from .rootsys import factor_radial, verify_partial_fractions
from .solop import (DEFAULT_OPTIONS, BumpSpec, PointMass, QuadOptions, SourceTerm, approximant_value,
                    e_q_derivs, pair_delta, pair_source)
from .special import sphere_area, sphere_exp_integral
from .symbol import EllipsoidalFrame, SymbolSpec, radial_profile, validate_frame
from .testfn import (TestFunction, apply_transpose, derive, evaluate, gaussian,
                     translate)

DEFAULT_SEED = 0xF0DD


@dataclass
class CheckReport:
    name: str
    residuals: dict
    tolerance: float
    passed: bool
    runtime: float
    seed: int | None = None
    budget: float | None = None
    details: dict = field(default_factory=dict)

    @property
    def residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    def to_json(self) -> dict:
        out = asdict(self)
        out["residual"] = self.residual
        return out

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name}: residual {self.residual:.3e} <= {self.tolerance:.1e} ({self.runtime:.2f} s)"


def _report(name, residuals, tol, t0, seed=None, budget=None, details=None, extra_ok=True) -> CheckReport:
    rt = time.perf_counter() - t0
    res = {k: float(v) for k, v in residuals.items()}
    ok = all(np.isfinite(v) and v <= tol for v in res.values()) and extra_ok
    if budget is not None and rt > budget:
        ok = False
    return CheckReport(name, res, float(tol), bool(ok), rt, seed, budget, details or {})


# ---------------------------------------------------------------- canonical symbols


def shifted_frame_spec() -> SymbolSpec:
    """n = 2, rotated and anisotropic frame with a first-order shift."""
    th = 0.4
    Q = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    frame = validate_frame(EllipsoidalFrame(Q, np.array([1.0, 2.0]), np.array([0.3, -0.2]), 0.5))
    return SymbolSpec.create(2, [2.0, -3.0, 1.0], frame)


CANONICAL_SPECS: dict[str, Callable[[], SymbolSpec]] = {
    "laplace3": lambda: SymbolSpec.create(3, [0.0, 1.0]),
    "yukawa3": lambda: SymbolSpec.create(3, [1.0, 1.0]),
    "helmholtz_pair2": lambda: SymbolSpec.create(2, [4.0, -5.0, 1.0]),
    "helmholtz_pair3": lambda: SymbolSpec.create(3, [4.0, -5.0, 1.0]),
    "shifted2": shifted_frame_spec,
}


def random_test_functions(n: int, count: int, rng: np.random.Generator) -> list[TestFunction]:
    """Gaussian-polynomial test functions with degree <= 2 and one or two atoms."""
    out = []
    for _ in range(count):
        f = None
        for _ in range(int(rng.integers(1, 3))):
            coef = np.zeros((3,) * n, dtype=complex)
            coef[(0,) * n] = 1.0
            for j in range(n):
                idx = [0] * n
                idx[j] = 1
                coef[tuple(idx)] = rng.uniform(-0.5, 0.5) + 1j * rng.uniform(-0.2, 0.2)
            idx = [0] * n
            idx[int(rng.integers(n))] = 2
            coef[tuple(idx)] = rng.uniform(-0.3, 0.3)
            g = gaussian(n, center=rng.uniform(-0.5, 0.5, n), width=rng.uniform(0.6, 1.2),
                         freq=rng.uniform(-0.5, 0.5, n), coef=coef * rng.uniform(0.5, 1.5))
            f = g if f is None else f + g
        out.append(f)
    return out


# ---------------------------------------------------------------- log regularization


@dataclass(frozen=True)
class _ExpPoly:
    """P(r) exp(-r) (kind 'exp') or P(r) exp(-r^2/2) (kind 'gauss')."""

    P: Polynomial
    kind: str

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        w = np.exp(-r) if self.kind == "exp" else np.exp(-0.5 * r * r)
        return self.P(r) * w

    def deriv(self, k: int = 1) -> "_ExpPoly":
        P = self.P
        inner = Polynomial([1.0]) if self.kind == "exp" else Polynomial([0.0, 1.0])
        for _ in range(k):
            P = P.deriv() - inner * P
        return _ExpPoly(P, self.kind)


def logres_family() -> list[tuple[float, int, _ExpPoly]]:
    """(a, k, psi) with psi vanishing to order k at a."""
    out = []
    for a in (0.0, 0.5, 1.0, 2.0):
        for k in (1, 2, 3):
            base = Polynomial([-a, 1.0]) ** k
            out.append((a, k, _ExpPoly(base, "exp")))
            out.append((a, k, _ExpPoly(base, "gauss")))
    return out


def log_form(psi: _ExpPoly, a: float, k: int) -> float:
    """-1/(k-1)! int ln|r - a| psi^{(k)} dr + C0."""
    grid = quad.build_grid(50.0, roots=(a,) if a > 0 else (), panel_width=1.0)
    h = psi.deriv(k)
    val = quad.log_weighted_integral(h, a, grid, tail_tol=1e-14).value.real
    derivs0 = [psi.deriv(l)(0.0) for l in range(k)]
    return -val / math.factorial(k - 1) + quad.boundary_constant(a, k, derivs0)


def check_logres(tol: float = 1e-7, budget: float = 10.0) -> CheckReport:
    t0 = time.perf_counter()
    res = {}
    for a, k, psi in logres_family():
        key = f"a={a},k={k},{psi.kind}"
        res[key] = abs(quad.pv_oracle(psi, a, k) - log_form(psi, a, k))
    zero = _ExpPoly(Polynomial([0.0]), "exp")
    res["zero"] = abs(log_form(zero, 1.0, 2))
    return _report("logres", res, tol, t0, budget=budget)


# ---------------------------------------------------------------- spherical Bessel identity


def _random_orthogonal(n: int, rng) -> np.ndarray:
    Q, R = np.linalg.qr(rng.normal(size=(n, n)))
    return Q * np.sign(np.diag(R))


def check_bessel(seed: int = DEFAULT_SEED, count: int = 20, tol: float = 1e-9, zero_tol: float = 1e-12,
                 budget: float = 5.0) -> CheckReport:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    res, zero_gaps = {}, {}
    for n in (2, 3):
        rule = quad.sphere_rule(n, 64)
        worst, worst0 = 0.0, 0.0
        for _ in range(count):
            M = _random_orthogonal(n, rng) @ np.diag(rng.uniform(0.5, 2.0, n))
            y = rng.normal(size=n)
            y *= rng.uniform(0.0, 10.0) / max(float(np.linalg.norm(y @ M)), 1e-300)
            closed = sphere_exp_integral(M, y)
            direct = rule.integrate(np.exp(1j * (rule.nodes @ (M.T @ y))))
            worst = max(worst, abs(closed - direct))
            zero = sphere_exp_integral(M, np.zeros(n))
            worst0 = max(worst0, abs(zero - sphere_area(n)))
        res[f"n={n}"] = worst
        zero_gaps[f"n={n},y=0"] = worst0
    return _report("bessel", res, tol, t0, seed=seed, budget=budget, details={"zero_tol": zero_tol, **zero_gaps},
                   extra_ok=max(zero_gaps.values()) <= zero_tol)


# ---------------------------------------------------------------- defining identity


def identity_residuals(spec: SymbolSpec, psis, opts: QuadOptions = DEFAULT_OPTIONS):
    fact = factor_radial(radial_profile(spec))
    gaps, errs = [], []
    for psi in psis:
        res = pair_delta(spec, fact, apply_transpose(spec, psi), opts)
        gaps.append(abs(res.value - complex(evaluate(psi, np.zeros(spec.n)))))
        errs.append(res.error)
    return np.array(gaps), np.array(errs)


def check_identity(spec: SymbolSpec, name: str = "identity", seed: int = DEFAULT_SEED, count: int = 5,
                   floor: float = 1e-6, budget: float = 60.0,
                   opts: QuadOptions = DEFAULT_OPTIONS) -> CheckReport:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    psis = random_test_functions(spec.n, count, rng)
    gaps, errs = identity_residuals(spec, psis, opts)
    tol = max(floor, 10.0 * float(errs.max()))
    res = {f"psi{i}": g for i, g in enumerate(gaps)}
    return _report(name, res, tol, t0, seed=seed, budget=budget,
                   details={"error_estimates": errs.tolist()})


# ---------------------------------------------------------------- closed forms


def newtonian_translated_oracle(shift: float) -> float:
    """int exp(-|x - s e1|^2/2) / (4 pi |x|) dx via Newton's shell theorem."""
    f = lambda r: r * r * np.exp(-0.5 * r * r) / max(r, shift)
    cuts = [0.0, shift, np.inf] if shift > 0 else [0.0, np.inf]
    return sum(integrate.quad(f, lo, hi, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
               for lo, hi in zip(cuts[:-1], cuts[1:]))


def yukawa_oracle() -> float:
    """int exp(-|x|^2/2) exp(-|x|) / (4 pi |x|) dx = int r exp(-r^2/2 - r) dr."""
    return integrate.quad(lambda r: r * np.exp(-0.5 * r * r - r), 0.0, np.inf, epsabs=1e-14, epsrel=1e-12)[0]


def check_closed_forms(tol: float = 1e-6, budget: float = 30.0,
                       opts: QuadOptions = DEFAULT_OPTIONS) -> CheckReport:
    t0 = time.perf_counter()
    psi = gaussian(3)
    lap = SymbolSpec.create(3, [0.0, 1.0])
    flap = factor_radial(radial_profile(lap))
    yuk = SymbolSpec.create(3, [1.0, 1.0])
    fyuk = factor_radial(radial_profile(yuk))
    vals = {
        "newtonian": (pair_delta(lap, flap, psi, opts).value, 1.0),
        "yukawa": (pair_delta(yuk, fyuk, psi, opts).value, yukawa_oracle()),
        "newtonian_shifted": (pair_delta(lap, flap, translate(psi, [1.0, 0.0, 0.0]), opts).value,
                              newtonian_translated_oracle(1.0)),
    }
    res = {k: abs(v - o) for k, (v, o) in vals.items()}
    return _report("closed_forms", res, tol, t0, budget=budget,
                   details={k: [complex(v).real, complex(v).imag, o] for k, (v, o) in vals.items()})


# ---------------------------------------------------------------- partial fractions

PF_CONFIGS = {
    "simple": [4.0, -5.0, 1.0],
    "double": [1.0, -2.0, 1.0],
    "zero_root": [0.0, 0.0, 1.0],
    "mixed": [0.0, 1.0, -2.0, 1.0],
    "mixed_triple": [0.0, 4.0, -5.0, 1.0],
}


def check_partial_fractions(tol: float = 1e-10, budget: float = 1.0) -> CheckReport:
    t0 = time.perf_counter()
    res = {}
    for name, co in PF_CONFIGS.items():
        fact = factor_radial(radial_profile(SymbolSpec.create(2, co)))
        res[name] = verify_partial_fractions(fact)
    return _report("partial_fractions", res, tol, t0, budget=budget)


# ---------------------------------------------------------------- commutators


def commutator_residuals(spec: SymbolSpec, psi: TestFunction, y, opts: QuadOptions = DEFAULT_OPTIONS) -> dict:
    fact = factor_radial(radial_profile(spec))
    n = spec.n
    y = np.asarray(y, dtype=float)
    shifted = pair_source(spec, fact, SourceTerm((PointMass(tuple(y), (0,) * n, 1.0),), n), psi, opts)
    direct = pair_delta(spec, fact, translate(psi, -y), opts)
    e1 = (1,) + (0,) * (n - 1)
    dsrc = pair_source(spec, fact, SourceTerm((PointMass((0.0,) * n, e1, 1.0),), n), psi, opts)
    dref = pair_delta(spec, fact, derive(psi, e1), opts)
    return {"translation": abs(shifted.value - direct.value), "derivative": abs(dsrc.value + dref.value)}


def check_commutators(seed: int = DEFAULT_SEED, tol: float = 1e-8, budget: float = 60.0,
                      opts: QuadOptions = DEFAULT_OPTIONS) -> CheckReport:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    res = {}
    for name in ("laplace3", "helmholtz_pair2"):
        spec = CANONICAL_SPECS[name]()
        psi = random_test_functions(spec.n, 1, rng)[0]
        y = rng.uniform(-0.7, 0.7, spec.n)
        for key, val in commutator_residuals(spec, psi, y, opts).items():
            res[f"{name}:{key}"] = val
    return _report("commutators", res, tol, t0, seed=seed, budget=budget)


# ---------------------------------------------------------------- dual-path derivatives


def check_dual_path(seed: int = DEFAULT_SEED, tol: float = 1e-8, budget: float = 30.0,
                    opts: QuadOptions = DEFAULT_OPTIONS) -> CheckReport:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    spec = CANONICAL_SPECS["helmholtz_pair2"]()
    fact = factor_radial(radial_profile(spec))
    res = {}
    for i in range(3):
        psi = random_test_functions(2, 1, rng)[0]
        x = rng.uniform(-0.5, 0.5, 2)
        lo = float(rng.uniform(0.0, 2.5))
        kmax = max(fact.maxmult, 2)
        out = e_q_derivs(spec, fact, psi, x, (lo, lo + 1.0), kmax, opts, rtol=np.inf)
        res[f"panel{i}"] = out["gap"]
    return _report("dual_path", res, tol, t0, seed=seed, budget=budget)


# ---------------------------------------------------------------- Paley-Wiener approximants


def radial_pairing(values_at, g: TestFunction, n: int, R: float = 10.0, nodes: int = 200) -> complex:
    """int u(x) g(x) dx for radial u and g, by Gauss-Legendre in |x|."""
    t, w = np.polynomial.legendre.leggauss(nodes)
    rho = 0.5 * R * (t + 1.0)
    w = 0.5 * R * w
    pts = np.zeros((nodes, n))
    pts[:, 0] = rho
    u = np.array([values_at(p) for p in pts])
    return complex(sphere_area(n) * np.sum(w * rho ** (n - 1) * u * evaluate(g, pts)))


def approximation_errors(spec: SymbolSpec, ks=(1, 2, 4, 8), opts: QuadOptions = DEFAULT_OPTIONS) -> dict:
    if not spec.is_isotropic or np.any(spec.x0 != 0):
        raise ValueError("approximation check needs a radially symmetric symbol")
    fact = factor_radial(radial_profile(spec))
    psi = gaussian(spec.n)
    g = apply_transpose(spec, psi)
    target = complex(evaluate(psi, np.zeros(spec.n)))
    out = {}
    for k in ks:
        bump = BumpSpec(float(k), spec.n)
        pairing = radial_pairing(lambda p: approximant_value(spec, fact, bump, p, opts).value, g, spec.n)
        out[k] = abs(pairing - target)
    return out


def check_approximation(spec: SymbolSpec, name: str = "approximation", tol: float = 1e-3,
                        budget: float = 120.0, opts: QuadOptions = DEFAULT_OPTIONS) -> CheckReport:
    t0 = time.perf_counter()
    errs = approximation_errors(spec, opts=opts)
    ks = sorted(errs)
    trend = errs[ks[-1]] <= errs[ks[0]]
    rep = _report(name, {f"e_{ks[-1]}": errs[ks[-1]]}, tol, t0, budget=budget, extra_ok=trend,
                  details={f"e_{k}": errs[k] for k in ks})
    return rep


# ---------------------------------------------------------------- suite


def suite(seed: int = DEFAULT_SEED, opts: QuadOptions = DEFAULT_OPTIONS) -> dict[str, Callable[[], CheckReport]]:
    checks: dict[str, Callable[[], CheckReport]] = {
        "logres": check_logres,
        "bessel": lambda: check_bessel(seed),
        "partial_fractions": check_partial_fractions,
    }
    for name, make in CANONICAL_SPECS.items():
        tol = 1e-5 if name == "shifted2" else 1e-6
        checks[f"identity:{name}"] = (lambda make=make, name=name, tol=tol:
                                      check_identity(make(), f"identity:{name}", seed, floor=tol, opts=opts))
    checks["closed_forms"] = lambda: check_closed_forms(opts=opts)
    checks["commutators"] = lambda: check_commutators(seed, opts=opts)
    checks["dual_path"] = lambda: check_dual_path(seed, opts=opts)
    for name in ("laplace3", "yukawa3"):
        checks[f"approximation:{name}"] = (lambda name=name:
                                           check_approximation(CANONICAL_SPECS[name](), f"approximation:{name}",
                                                               opts=opts))
    return checks


def run_all(seed: int = DEFAULT_SEED, only: str | None = None,
            opts: QuadOptions = DEFAULT_OPTIONS) -> list[CheckReport]:
    """Run every check (or those whose name starts with ``only``) in a fixed order."""
    checks = suite(seed, opts)
    names = [k for k in checks if only is None or k == only or k.startswith(only + ":") or k.startswith(only)]
    if not names:
        raise KeyError(f"no check named {only!r}; available: {', '.join(checks)}")
    return [checks[k]() for k in names]
