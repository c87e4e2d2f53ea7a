"""Gaussian x polynomial x plane-wave test functions with exact Fourier calculus.

An atom is

    exp(-|x - a|^2 / (2 s^2)) * exp(i w.x) * P(x - a)

with P a dense complex polynomial (``coef[alpha]`` multiplies (x - a)^alpha).
Fourier convention: Ff(xi) = int exp(-i x.xi) f(x) dx.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from math import comb

import numpy as np
from numpy.polynomial import hermite_e
from scipy.signal import convolve

from .errors import DegreeOverflow

DEG_CAP = 32


# ---------------------------------------------------------------- polynomials

def _apply_axis(mat: np.ndarray, coef: np.ndarray, axis: int) -> np.ndarray:
    """Apply a linear map (new_index, old_index) along one axis of ``coef``."""
    return np.moveaxis(np.tensordot(mat, coef, axes=([1], [axis])), 0, axis)


def poly_eval(coef: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Evaluate a dense polynomial at points ``y`` of shape (..., n)."""
    n = coef.ndim
    pts = y.reshape(-1, n)
    tmp = None
    for j in range(n - 1, -1, -1):
        V = pts[:, j : j + 1] ** np.arange(coef.shape[j])
        if tmp is None:
            tmp = np.tensordot(V, coef, axes=([1], [n - 1]))  # (P, D0..D_{n-2})
        else:
            tmp = np.einsum("p...a,pa->p...", tmp, V)
    return tmp.reshape(y.shape[:-1])


def poly_shift(coef: np.ndarray, delta) -> np.ndarray:
    """Coefficients of P(y + delta) as a polynomial in y."""
    out = coef.astype(complex)
    for j, dj in enumerate(np.asarray(delta, dtype=float)):
        if dj == 0.0:
            continue
        D = out.shape[j]
        T = np.zeros((D, D))
        for k in range(D):
            for i in range(k + 1):
                T[i, k] = comb(k, i) * dj ** (k - i)
        out = _apply_axis(T, out, j)
    return out


def poly_mul(c1: np.ndarray, c2: np.ndarray) -> np.ndarray:
    return convolve(c1, c2, method="direct")


def poly_trim(coef: np.ndarray) -> np.ndarray:
    """Drop trailing all-zero slabs on every axis."""
    nz = np.nonzero(coef)
    if len(nz[0]) == 0:
        return np.zeros((1,) * coef.ndim, dtype=complex)
    return coef[tuple(slice(0, int(ix.max()) + 1) for ix in nz)]


def poly_degree(coef: np.ndarray) -> int:
    nz = np.nonzero(coef)
    if len(nz[0]) == 0:
        return 0
    return int(np.max(np.sum(np.stack(nz), axis=0)))


def _pad_axis(coef: np.ndarray, axis: int, front: int = 0, back: int = 0) -> np.ndarray:
    pad = [(0, 0)] * coef.ndim
    pad[axis] = (front, back)
    return np.pad(coef, pad)


def poly_deriv(coef: np.ndarray, axis: int) -> np.ndarray:
    D = coef.shape[axis]
    if D == 1:
        return np.zeros_like(coef)
    k = np.arange(1, D).reshape([-1 if i == axis else 1 for i in range(coef.ndim)])
    return np.take(coef, np.arange(1, D), axis=axis) * k


def poly_times_coordinate(coef: np.ndarray, axis: int) -> np.ndarray:
    return _pad_axis(coef, axis, front=1)


def _add_padded(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    shape = tuple(max(x, y) for x, y in zip(a.shape, b.shape))
    out = np.zeros(shape, dtype=complex)
    out[tuple(slice(0, s) for s in a.shape)] += a
    out[tuple(slice(0, s) for s in b.shape)] += b
    return out


def _hermite_map(D: int, s: float) -> np.ndarray:
    """Matrix sending y^k to the eta-coefficients of (-i s)^k He_k(s eta)."""
    H = np.zeros((D, D), dtype=complex)
    for k in range(D):
        he = hermite_e.herme2poly([0] * k + [1])
        for i, hc in enumerate(he):
            H[i, k] = (-1j * s) ** k * hc * s**i
    return H


# ---------------------------------------------------------------- atoms

@dataclass(frozen=True, eq=False)
class GaussPolyAtom:
    center: np.ndarray
    width: float
    freq: np.ndarray
    coef: np.ndarray

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("atom width must be positive")
        if poly_degree(self.coef) > DEG_CAP:
            raise DegreeOverflow(f"polynomial degree exceeds cap {DEG_CAP}")

    @property
    def n(self) -> int:
        return self.center.size

    def _replace(self, **kw) -> "GaussPolyAtom":
        args = dict(center=self.center, width=self.width, freq=self.freq, coef=self.coef)
        args.update(kw)
        args["coef"] = poly_trim(np.asarray(args["coef"], dtype=complex))
        return GaussPolyAtom(**args)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        y = x - self.center
        g = np.exp(-np.sum(y * y, axis=-1) / (2 * self.width**2) + 1j * (x @ self.freq))
        return g * poly_eval(self.coef, y)

    def fourier(self) -> "GaussPolyAtom":
        s, a, w = self.width, self.center, self.freq
        coef = self.coef.astype(complex)
        for j in range(self.n):
            coef = _apply_axis(_hermite_map(coef.shape[j], s), coef, j)
        const = (2 * math.pi) ** (self.n / 2) * s**self.n * np.exp(1j * float(a @ w))
        return GaussPolyAtom(w.copy(), 1.0 / s, -a, poly_trim(const * coef))


def _atom(n, center=None, width=1.0, freq=None, coef=None) -> GaussPolyAtom:
    center = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    freq = np.zeros(n) if freq is None else np.asarray(freq, dtype=float)
    coef = np.ones((1,) * n, dtype=complex) if coef is None else np.asarray(coef, dtype=complex)
    if center.shape != (n,) or freq.shape != (n,) or coef.ndim != n:
        raise ValueError("atom data inconsistent with dimension")
    return GaussPolyAtom(center, float(width), freq, poly_trim(coef))


# ---------------------------------------------------------------- test functions

@dataclass(frozen=True, eq=False)
class TestFunction:
    """Finite sum of :class:`GaussPolyAtom`."""

    __test__ = False  # not a pytest class

    atoms: tuple[GaussPolyAtom, ...]
    n: int

    def __call__(self, x) -> np.ndarray:
        return evaluate(self, x)

    def __add__(self, other: "TestFunction") -> "TestFunction":
        return TestFunction(self.atoms + other.atoms, self.n)

    def __mul__(self, c) -> "TestFunction":
        return TestFunction(tuple(a._replace(coef=c * a.coef) for a in self.atoms), self.n)

    __rmul__ = __mul__

    def __neg__(self) -> "TestFunction":
        return self * -1.0

    def __sub__(self, other: "TestFunction") -> "TestFunction":
        return self + (-other)

    @cached_property
    def _fourier(self) -> "TestFunction":
        return TestFunction(tuple(a.fourier() for a in self.atoms), self.n)

    def eval_fourier(self, xi) -> np.ndarray:
        return evaluate(self._fourier, xi)

    @property
    def max_degree(self) -> int:
        return max((poly_degree(a.coef) for a in self.atoms), default=0)


def gaussian(n: int, center=None, width: float = 1.0, freq=None, coef=None) -> TestFunction:
    """A single-atom test function; ``coef`` defaults to the constant 1."""
    return TestFunction((_atom(n, center, width, freq, coef),), n)


def monomial_coef(n: int, terms) -> np.ndarray:
    """Dense coefficients from ``[(alpha, c), ...]``."""
    terms = list(terms)
    if not terms:
        return np.zeros((1,) * n, dtype=complex)
    shape = [1 + max(int(alpha[j]) for alpha, _ in terms) for j in range(n)]
    coef = np.zeros(shape, dtype=complex)
    for alpha, c in terms:
        coef[tuple(int(a) for a in alpha)] += c
    return coef


def zero(n: int) -> TestFunction:
    return TestFunction((), n)


def evaluate(f: TestFunction, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape[:-1], dtype=complex)
    for a in f.atoms:
        out = out + a(x)
    return out[()] if out.ndim == 0 else out


def eval_fourier(f: TestFunction, xi) -> np.ndarray:
    return f.eval_fourier(xi)


def fourier(f: TestFunction) -> TestFunction:
    return f._fourier


def reflect(f: TestFunction) -> TestFunction:
    """x -> f(-x)."""
    atoms = []
    for a in f.atoms:
        coef = a.coef
        for j in range(f.n):
            k = np.arange(coef.shape[j]).reshape([-1 if i == j else 1 for i in range(f.n)])
            coef = coef * (-1.0) ** k
        atoms.append(GaussPolyAtom(-a.center, a.width, -a.freq, coef))
    return TestFunction(tuple(atoms), f.n)


def inv_fourier(f: TestFunction) -> TestFunction:
    return reflect(fourier(f)) * (2 * math.pi) ** (-f.n)


def translate(f: TestFunction, y) -> TestFunction:
    """x -> f(x - y)."""
    y = np.asarray(y, dtype=float)
    return TestFunction(
        tuple(GaussPolyAtom(a.center + y, a.width, a.freq, a.coef * np.exp(-1j * float(a.freq @ y)))
              for a in f.atoms),
        f.n,
    )


def _derive_atom(a: GaussPolyAtom, j: int) -> GaussPolyAtom:
    P = a.coef
    dP = _add_padded(poly_deriv(P, j), 1j * a.freq[j] * P)
    dP = _add_padded(dP, -poly_times_coordinate(P, j) / a.width**2)
    return a._replace(coef=dP)


def derive(f: TestFunction, alpha) -> TestFunction:
    """Apply the partial derivative d^alpha."""
    atoms = list(f.atoms)
    for j, aj in enumerate(alpha):
        for _ in range(int(aj)):
            atoms = [_derive_atom(a, j) for a in atoms]
    return TestFunction(tuple(atoms), f.n)


def _multiply_atoms(a1: GaussPolyAtom, a2: GaussPolyAtom) -> GaussPolyAtom:
    s1, s2 = a1.width**2, a2.width**2
    s = 1.0 / (1.0 / s1 + 1.0 / s2)
    a = s * (a1.center / s1 + a2.center / s2)
    d = a1.center - a2.center
    const = math.exp(-float(d @ d) / (2 * (s1 + s2)))
    P = poly_mul(poly_shift(a1.coef, a - a1.center), poly_shift(a2.coef, a - a2.center))
    return _atom(a1.n, a, math.sqrt(s), a1.freq + a2.freq, const * P)


def multiply(f: TestFunction, g: TestFunction) -> TestFunction:
    """Pointwise product; stays in the algebra."""
    return TestFunction(tuple(_multiply_atoms(a, b) for a in f.atoms for b in g.atoms), f.n)


def convolve_fn(f: TestFunction, g: TestFunction) -> TestFunction:
    """(f * g)(x) = int f(x - y) g(y) dy, computed on the Fourier side."""
    return inv_fourier(multiply(fourier(f), fourier(g)))


def symbol_polynomial(spec) -> np.ndarray:
    """Dense coefficients of p(xi) in absolute coordinates."""
    n = spec.n
    M = spec.metric
    quad = np.zeros((3,) * n, dtype=complex)
    for k in range(n):
        for l in range(n):
            idx = [0] * n
            idx[k] += 1
            idx[l] += 1
            quad[tuple(idx)] += M[k, l]
        idx = [0] * n
        idx[k] = 1
        quad[tuple(idx)] += spec.frame.b[k]
    quad[(0,) * n] += spec.frame.c
    acc = np.zeros((1,) * n, dtype=complex)
    for cj in spec.coeffs[::-1]:
        acc = poly_trim(poly_mul(acc, quad))
        acc = _add_padded(acc, np.full((1,) * n, cj, dtype=complex))
    return poly_trim(spec.scale * acc)


def apply_symbol(spec, f: TestFunction) -> TestFunction:
    """Op(p) f = F^{-1}[p F f], exact in the algebra."""
    P = symbol_polynomial(spec)
    atoms = []
    for a in fourier(f).atoms:
        coef = poly_mul(poly_shift(P, a.center), a.coef)
        if poly_degree(poly_trim(coef)) > DEG_CAP:
            raise DegreeOverflow(f"Op(p) f exceeds polynomial degree cap {DEG_CAP}")
        atoms.append(a._replace(coef=coef))
    return inv_fourier(TestFunction(tuple(atoms), f.n))


def apply_transpose(spec, f: TestFunction) -> TestFunction:
    """The transpose Op(p)^t f = A Op(p) A f, i.e. the multiplier p(-xi).

    Pairing identities <Op(p) u, f> = <u, Op(p)^t f> need this form; it equals
    ``apply_symbol`` whenever p is even.
    """
    return reflect(apply_symbol(spec, reflect(f)))
