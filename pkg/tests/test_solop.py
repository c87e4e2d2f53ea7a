import math

import numpy as np
import pytest
from scipy import integrate

from fundsol.errors import PathsDisagree, SurfaceTooClose
from fundsol.quad import sphere_rule
from fundsol.solop import (BumpSpec, PointMass, SourceTerm, apply_p0, approximant_value, bump_profile, e_q,
                           e_q_derivs, factorize, pair_delta, pair_source, residual_R, trace_on_surface)
from fundsol.symbol import EllipsoidalFrame, SymbolSpec, validate_frame
from fundsol.testfn import (apply_transpose, derive, evaluate, gaussian, monomial_coef, reflect, translate)
from fundsol.verify import random_test_functions, shifted_frame_spec

YUKAWA = SymbolSpec.create(3, [1, 1])
LAPLACE = SymbolSpec.create(3, [0, 1])
PAIR2 = SymbolSpec.create(2, [4, -5, 1])
PAIR3 = SymbolSpec.create(3, [4, -5, 1])


def yukawa_closed(r):
    return 4 * math.pi * r * r * np.exp(-r * r / 2) * (2 * math.pi) ** 1.5 / (r * r + 1)


def test_bump_profile():
    rho = np.array([0.0, 0.5, 0.999, 1.0, 1.5, 2.0, 3.0])
    out = bump_profile(rho)
    np.testing.assert_array_equal(out[:4], 1.0)
    np.testing.assert_array_equal(out[5:], 0.0)
    assert 0 < out[4] < 1
    assert bump_profile(np.array([1.5]))[0] == pytest.approx(0.5)


def test_e_q_examples():
    fact = factorize(YUKAWA)
    rule = sphere_rule(3, 16)
    v = gaussian(3)
    assert e_q(YUKAWA, fact, v, 0.0, np.zeros(3), rule) == 0
    r = np.linspace(0.1, 6, 13)
    np.testing.assert_allclose(e_q(YUKAWA, fact, v, r, np.zeros(3), rule), yukawa_closed(r), rtol=1e-13)
    v1, v2 = random_test_functions(3, 2, np.random.default_rng(2))
    x = np.array([0.3, -0.2, 0.1])
    np.testing.assert_allclose(e_q(YUKAWA, fact, v1 + v2, r, x, rule),
                               e_q(YUKAWA, fact, v1, r, x, rule) + e_q(YUKAWA, fact, v2, r, x, rule),
                               rtol=1e-13, atol=1e-13)


def test_radial_fast_path_matches_sphere_quadrature():
    fact = factorize(YUKAWA)
    v = gaussian(3, freq=[0.3, 0.0, 0.2], width=0.8)
    x = np.array([0.4, -1.0, 0.5])
    r = np.linspace(0.2, 5, 9)
    fast = e_q(YUKAWA, fact, v, r, x)
    slow = e_q(YUKAWA, fact, v, r, x, rule=sphere_rule(3, 40))
    np.testing.assert_allclose(fast, slow, rtol=1e-11, atol=1e-13)


def test_e_q_derivs_closed_form():
    fact = factorize(YUKAWA)
    out = e_q_derivs(YUKAWA, fact, gaussian(3), np.zeros(3), (0.5, 1.5), 1)
    r = out["r"]
    np.testing.assert_array_equal(out["cheb"][0], e_q(YUKAWA, fact, gaussian(3), r, np.zeros(3),
                                                       rule=sphere_rule(3, 12)))
    c = 4 * math.pi * (2 * math.pi) ** 1.5
    d = lambda r: c * ((2 * r - r**3) * (r * r + 1) - 2 * r**3) * math.exp(-r * r / 2) / (r * r + 1) ** 2
    exact = np.array([d(t) for t in r])
    scale = np.abs(exact).max()
    assert r[len(r) // 2] == 1.0
    np.testing.assert_allclose(out["analytic"][1], exact, atol=1e-12 * scale)
    np.testing.assert_allclose(out["cheb"][1], exact, atol=1e-9 * scale)


def test_e_q_derivs_dual_path_random_atoms():
    fact = factorize(PAIR2)
    rng = np.random.default_rng(8)
    for psi in random_test_functions(2, 3, rng):
        out = e_q_derivs(PAIR2, fact, psi, rng.uniform(-0.5, 0.5, 2), (0.5, 1.5), 2)
        assert out["gap"] <= 1e-8


def test_e_q_derivs_flags_underresolved_panel():
    fact = factorize(PAIR2)
    psi = gaussian(2, width=0.05, center=[0.2, 0.1])  # very broad Fourier data on a long panel
    from fundsol.solop import QuadOptions
    with pytest.raises(PathsDisagree):
        e_q_derivs(PAIR2, fact, psi, np.array([3.0, 0.0]), (0.0, 40.0), 2, QuadOptions(nodes=16))


def yukawa_oracle(s):
    """(e^{-|.|}/(4 pi |.|) * e^{-|.|^2/2})(x) at |x| = s."""
    if s == 0:
        f = lambda p: p * math.exp(-p - p * p / 2)
    else:
        f = lambda p: p * math.exp(-p - (s - p) ** 2 / 2) * (1 - math.exp(-2 * s * p)) / (2 * s * p)
    return integrate.quad(f, 0, np.inf, epsabs=1e-14, epsrel=1e-12)[0]


@pytest.mark.parametrize("x", [[0.0, 0.0, 0.0], [0.7, 0.0, 0.0], [0.5, -1.0, 0.8]])
def test_apply_p0_yukawa(x):
    fact = factorize(YUKAWA)
    res = apply_p0(YUKAWA, fact, gaussian(3), np.array(x))
    assert res.value == pytest.approx(yukawa_oracle(np.linalg.norm(x)), abs=1e-6)
    assert res.error >= 0 and np.isfinite(res.error)


def test_apply_p0_linearity():
    fact = factorize(PAIR2)
    v1, v2 = random_test_functions(2, 2, np.random.default_rng(21))
    x = np.array([0.2, 0.4])
    tot = apply_p0(PAIR2, fact, v1 + v2, x).value
    parts = apply_p0(PAIR2, fact, v1, x).value + apply_p0(PAIR2, fact, v2, x).value
    assert abs(tot - parts) <= 1e-10


@pytest.mark.parametrize("x", [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
def test_apply_p0_identity(x):
    fact = factorize(PAIR3)
    v = gaussian(3, center=[0.1, 0.2, -0.1], width=0.9)
    res = apply_p0(PAIR3, fact, apply_symbol_(PAIR3, v), np.array(x))
    assert res.value == pytest.approx(evaluate(v, x), abs=1e-6)


def apply_symbol_(spec, v):
    from fundsol.testfn import apply_symbol

    return apply_symbol(spec, v)


@pytest.mark.filterwarnings("ignore:root multiplicity")
def test_residual_R_examples():
    x = np.array([0.3, 0.1])
    psi = gaussian(2, center=[0.1, 0.0])
    # zero root
    lap2 = SymbolSpec.create(2, [0, 1])
    assert residual_R(lap2, factorize(lap2), psi, x, 0, 1) == 0
    # k = 1, n >= 2: vanishes with the density
    fact = factorize(PAIR2)
    assert abs(residual_R(PAIR2, fact, psi, x, 1, 1)) <= 1e-13
    # k = 2, r_j = 1 in n = 1: equals -E_q(0, x)
    spec1 = SymbolSpec.create(1, [1, -2, 1])
    fact1 = factorize(spec1)
    assert fact1.roots == pytest.approx((1.0,)) and fact1.mults == (2,)
    v = gaussian(1, center=[0.2], freq=[0.3])
    x1 = np.array([0.4])
    expect = -e_q(spec1, fact1, v, 0.0, x1, rule=sphere_rule(1, 1))
    assert residual_R(spec1, fact1, v, x1, 0, 2) == pytest.approx(expect, rel=1e-10)


def test_pair_delta_newtonian_and_parity():
    fact = factorize(LAPLACE)
    assert pair_delta(LAPLACE, fact, gaussian(3)).value == pytest.approx(1.0, abs=1e-6)
    odd = gaussian(3, coef=monomial_coef(3, [((1, 0, 0), 1.0)]))
    for spec in (LAPLACE, YUKAWA, PAIR3):
        assert abs(pair_delta(spec, factorize(spec), odd).value) <= 1e-9


@pytest.mark.parametrize("spec", [PAIR2, PAIR3], ids=["n2", "n3"])
def test_pair_delta_identity(spec):
    fact = factorize(spec)
    for psi in random_test_functions(spec.n, 2, np.random.default_rng(31)):
        res = pair_delta(spec, fact, apply_transpose(spec, psi))
        assert abs(res.value - evaluate(psi, np.zeros(spec.n))) <= 1e-6


def test_pair_source_commutators():
    rng = np.random.default_rng(41)
    for spec in (LAPLACE, PAIR2):
        fact = factorize(spec)
        n = spec.n
        psi = random_test_functions(n, 1, rng)[0]
        assert pair_source(spec, fact, SourceTerm.delta(n), psi).value == pytest.approx(
            pair_delta(spec, fact, psi).value, abs=1e-15)
        y = rng.uniform(-0.5, 0.5, n)
        s = SourceTerm((PointMass(tuple(y)),), n)
        assert abs(pair_source(spec, fact, s, psi).value - pair_delta(spec, fact, translate(psi, -y)).value) <= 1e-8
        e1 = (1,) + (0,) * (n - 1)
        s = SourceTerm((PointMass((0.0,) * n, e1, 1.0),), n)
        assert abs(pair_source(spec, fact, s, psi).value + pair_delta(spec, fact, derive(psi, e1)).value) <= 1e-8


def test_pair_source_gaussian_term_matches_quadrature():
    # <P0 v, psi> = int (P0 v)(x) psi(x) dx for v a Gaussian source term (n = 1)
    spec = SymbolSpec.create(1, [1, 1])
    fact = factorize(spec)
    v = gaussian(1, center=[0.3], width=0.6)
    psi = gaussian(1, center=[-0.2], width=0.5, coef=[1.0, 0.4])
    t, w = np.polynomial.legendre.leggauss(120)
    xs = 8 * t
    vals = np.array([apply_p0(spec, fact, v, [x]).value for x in xs])
    quad_val = 8 * np.sum(w * vals * evaluate(psi, xs[:, None]))
    dual = pair_source(spec, fact, SourceTerm((v,), 1), psi).value
    assert abs(quad_val - dual) <= 1e-6
    # n = 1 Yukawa kernel e^{-|x|}/2
    f = lambda y: math.exp(-abs(0.1 - y)) / 2 * float(evaluate(v, [y]).real)
    direct = sum(integrate.quad(f, lo, hi, epsabs=1e-13)[0] for lo, hi in ((-np.inf, 0.1), (0.1, np.inf)))
    assert apply_p0(spec, fact, v, [0.1]).value == pytest.approx(direct, abs=1e-9)


def test_scaling_consistency():
    psi = random_test_functions(2, 1, np.random.default_rng(5))[0]
    base = pair_delta(PAIR2, factorize(PAIR2), psi).value
    lam = -2.5 + 1.0j
    scaled = SymbolSpec.create(2, [4 * lam, -5 * lam, lam])
    assert pair_delta(scaled, factorize(scaled), psi).value == pytest.approx(base / lam, rel=1e-10)


def test_helmholtz_standing_wave_continuity():
    # P0 for |xi|^2 - a^2 in n = 3 pairs like cos(a|x|)/(4 pi |x|); sampled on [0.5, 2]
    psi = gaussian(3)
    for a in np.linspace(0.5, 2.0, 5):
        spec = SymbolSpec.create(3, [-a * a, 1])
        res = pair_delta(spec, factorize(spec), psi)
        oracle = integrate.quad(lambda r: r * math.exp(-r * r / 2) * math.cos(a * r), 0, np.inf, epsabs=1e-14)[0]
        assert abs(res.value - oracle) <= max(1e-9, 10 * res.error)


def test_decay_shape():
    fact = factorize(PAIR2)
    psi = random_test_functions(2, 1, np.random.default_rng(6))[0]
    out = e_q_derivs(PAIR2, fact, psi, np.zeros(2), (5.0, 20.0), 2, rtol=np.inf)
    r = out["r"]
    for k in range(3):
        scaled = np.abs(out["analytic"][k]) * (1 + r * r) ** 2
        assert scaled[-1] <= scaled.max() and scaled[r > 12].max() <= 1e-3 * max(scaled.max(), 1e-300) + 1e-300


def test_shifted_frame_identity():
    spec = shifted_frame_spec()
    fact = factorize(spec)
    psi = random_test_functions(2, 1, np.random.default_rng(9))[0]
    res = pair_delta(spec, fact, apply_transpose(spec, psi))
    assert abs(res.value - evaluate(psi, np.zeros(2))) <= 1e-6


def test_det_minus_one_frame():
    frame = validate_frame(EllipsoidalFrame(np.array([[0.0, 1.0], [1.0, 0.0]]), np.array([1.0, 3.0]),
                                            np.zeros(2), 0.0))
    spec = SymbolSpec.create(2, [4, -5, 1], frame)
    psi = random_test_functions(2, 1, np.random.default_rng(10))[0]
    res = pair_delta(spec, factorize(spec), apply_transpose(spec, psi))
    assert abs(res.value - evaluate(psi, np.zeros(2))) <= 1e-6


def radial_u0_oracle(k):
    f = lambda p: 4 * math.pi * p * p * float(bump_profile(np.array(p / k))) / (p * p + 1)
    return integrate.quad(f, 0, 2 * k, points=[k], epsabs=1e-13, limit=200)[0] / (2 * math.pi) ** 3


def test_approximant_origin_values():
    fact = factorize(YUKAWA)
    vals = []
    for k in (1, 2, 4, 8):
        u = approximant_value(YUKAWA, fact, BumpSpec(k, 3), np.zeros(3)).value
        assert u == pytest.approx(radial_u0_oracle(k), rel=1e-9)
        vals.append(u.real)
    assert np.all(np.diff(vals) > 0)


def test_approximant_symmetry_and_growth():
    spec = SymbolSpec.create(2, [4, -5, 1])
    fact = factorize(spec)
    bump = BumpSpec(2, 2)
    for x in ([0.3, 0.4], [2.0, -1.0]):
        a = approximant_value(spec, fact, bump, np.array(x)).value
        b = approximant_value(spec, fact, bump, -np.array(x)).value
        assert abs(a - b) <= 1e-9
    far = [abs(approximant_value(spec, fact, bump, np.array([R, 0.0])).value) for R in (5.0, 10.0, 20.0)]
    # entire of exponential type with at most polynomial growth of degree maxmult along the real axis
    assert max(far) <= 10 * (1 + 20.0) ** fact.maxmult


def test_trace_newtonian():
    fact = factorize(LAPLACE)
    R = 2.0
    th, res = trace_on_surface(LAPLACE, fact, SourceTerm.delta(3), np.zeros(3), R, 8, 0.1, axis=[0, 0, 1])
    vals = np.array([r.value for r in res])
    assert np.ptp(vals.real) <= 1e-9
    assert vals[0] == pytest.approx(1 / (4 * math.pi * R), abs=1e-9)
    # halving eps: the Gaussian mollifier is exact for a harmonic kernel away from the source
    _, res2 = trace_on_surface(LAPLACE, fact, SourceTerm.delta(3), np.zeros(3), R, 2, 0.05)
    assert abs(res2[0].value - vals[0]) <= 1e-9


def test_trace_symmetric_sources_and_empty():
    fact = factorize(PAIR2)
    y = (0.5, 0.0)
    src = SourceTerm((PointMass(y), PointMass((-y[0], -y[1]))), 2)
    th, res = trace_on_surface(PAIR2, fact, src, np.zeros(2), 1.5, 8, 0.1)
    vals = np.array([r.value for r in res])
    # reflection x1 -> -x1 maps angle th to pi - th, i.e. index i to (4 - i) mod 8
    for i in range(8):
        assert abs(vals[i] - vals[(4 - i) % 8]) <= 1e-9
    _, res0 = trace_on_surface(PAIR2, fact, SourceTerm((), 2), np.zeros(2), 1.5, 4, 0.1)
    assert all(r.value == 0 for r in res0)


def test_trace_too_close():
    fact = factorize(LAPLACE)
    with pytest.raises(SurfaceTooClose):
        trace_on_surface(LAPLACE, fact, SourceTerm((PointMass((1.0, 0.0, 0.05)),), 3), np.zeros(3), 1.0, 8, 0.1)
