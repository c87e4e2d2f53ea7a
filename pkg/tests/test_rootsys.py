import warnings

import numpy as np
import pytest
from numpy.polynomial import Polynomial

from fundsol.errors import NotLowerBounded
from fundsol.rootsys import describe, factor_radial, find_roots, verify_partial_fractions


def P(*c):
    return Polynomial(c)


def test_find_roots_examples():
    vals = sorted(rc.value.real for rc in find_roots(P(4, 0, -5, 0, 1)))
    np.testing.assert_allclose(vals, [-2, -1, 1, 2], atol=1e-12)
    (rc,) = find_roots(P(0, 0, 1))
    assert rc.mult == 2 and abs(rc.value) < 1e-14
    np.testing.assert_allclose(sorted(rc.value.imag for rc in find_roots(P(1, 0, 1))), [-1, 1], atol=1e-14)


def test_factor_simple_pair():
    fact = factor_radial(P(4, 0, -5, 0, 1))
    np.testing.assert_allclose(fact.roots, [1, 2], atol=1e-13)
    assert fact.mults == (1, 1)
    np.testing.assert_allclose(fact.deflated.coef, [2, 3, 1], atol=1e-12)
    np.testing.assert_allclose([c[0] for c in fact.pf], [-1, 1], atol=1e-12)


def test_factor_single_positive_root():
    r0 = 1.7
    fact = factor_radial(P(-r0**2, 0, 1))
    assert fact.roots == pytest.approx((r0,))
    np.testing.assert_allclose(fact.deflated.coef, [r0, 1], atol=1e-13)


def test_factor_regular_case():
    fact = factor_radial(P(1, 0, 1))
    assert fact.is_regular and fact.pf == ()
    np.testing.assert_allclose(fact.deflated.coef, [1, 0, 1])
    assert verify_partial_fractions(fact) == 0.0


def test_partial_fraction_examples():
    fact = factor_radial(P(1, 0, -2, 0, 1))  # (r^2 - 1)^2 -> q0 = (r - 1)^2
    (c1, c2), = fact.pf
    assert abs(c1) < 1e-9 and c2 == pytest.approx(1.0, rel=1e-9)
    # q0 = r^2 (r - 1): profile r^2 (r^2 - 1) has root 0 (mult 2) and 1
    fact = factor_radial(P(0, 0, -1, 0, 1))
    assert fact.roots == pytest.approx((0.0, 1.0), abs=1e-12)
    c0, c1 = fact.pf
    np.testing.assert_allclose(c0, [-1, -1], atol=1e-10)
    np.testing.assert_allclose(c1, [1], atol=1e-10)
    for r in (0.5, 3.0):
        assert fact.pf_eval(r) == pytest.approx(1 / (r**2 * (r - 1)), rel=1e-12)


def test_partial_fraction_reconstruction():
    fact = factor_radial(P(4, 0, -5, 0, 1))
    assert verify_partial_fractions(fact) <= 1e-12
    # monic q0 with roots 0.5, 1.5, 1.5 in a profile with extra negative roots
    prof = P(-0.5, 1) * P(-1.5, 1) ** 2 * P(0.5, 1) * P(1.5, 1) ** 2
    fact = factor_radial(prof)
    assert fact.mults == (1, 2)
    assert verify_partial_fractions(fact) <= 1e-10


def test_factorization_invariants():
    for prof in (P(4, 0, -5, 0, 1), P(0, 0, 1, 0, -2, 0, 1), P(-1, 0, 1) ** 3, P(2, 0, 1) * P(-1, 0, 1)):
        fact = factor_radial(prof)
        prod = fact.q0() * fact.deflated
        scale = np.abs(prof.coef).max()
        np.testing.assert_allclose(prod.coef, prof.coef, atol=1e-8 * scale)
        assert sum(fact.mults) + fact.deflated.degree() == prof.degree()
        for rj, mj in zip(fact.roots, fact.mults):
            D = prof
            for _ in range(mj):
                assert abs(D(rj)) <= 1e-7 * scale * max(1, rj) ** prof.degree() * 10
                D = D.deriv()


def test_high_multiplicity_zero_root():
    fact = factor_radial(P(0, 0, 0, 0, 0, 0, 1))
    assert fact.roots == (0.0,) and fact.mults == (6,)


def test_warnings():
    with pytest.warns(RuntimeWarning, match="odd-multiplicity"):
        factor_radial(P(0, 1, 1))
    with pytest.warns(RuntimeWarning, match="dimension"):
        factor_radial(P(0, 0, 0, 0, 1), n=2)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        factor_radial(P(0, 0, 1), n=3)


def test_not_lower_bounded():
    # (r - 1)^2 + 1e-6 has a complex pair hugging r = 1
    prof = Polynomial(np.convolve([1 + 1e-6, -2, 1], [1, 0, 1]))
    with pytest.raises(NotLowerBounded):
        factor_radial(prof)


def test_describe_roundtrip():
    info = describe(factor_radial(P(4, 0, -5, 0, 1)))
    assert info["roots"] == pytest.approx([1.0, 2.0])
    assert info["multiplicities"] == [1, 1]
    assert info["pf_error"] < 1e-12
