"""Symbols with ellipsoidal radial symmetry.

The supported family is

    p(xi) = c_d * sum_j c_j [(Q xi)^T W (Q xi) + b.xi + c]^j ,   c_d = 1 after normalization,

together with the global polar map

    Phi(r, omega) = r Q^T W^{-1/2} omega - 1/2 Q^T W^{-1} Q b

which turns p o Phi into a polynomial in r alone.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np
from numpy.polynomial import Polynomial

from .errors import ConfigError, NonOrthogonal, NonPositiveWeight, NonUnitDirection

ORTHO_TOL = 1e-12
UNIT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class EllipsoidalFrame:
    Q: np.ndarray
    W: np.ndarray
    b: np.ndarray
    c: complex = 0.0
    det_Q: float = field(default=1.0, compare=False)

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    @classmethod
    def identity(cls, n: int) -> "EllipsoidalFrame":
        return validate_frame(cls(np.eye(n), np.ones(n), np.zeros(n), 0.0))


def validate_frame(frame: EllipsoidalFrame) -> EllipsoidalFrame:
    """Check orthogonality of Q and positivity of W; return a certified copy."""
    Q = np.asarray(frame.Q, dtype=float)
    W = np.asarray(frame.W, dtype=float).ravel()
    b = np.asarray(frame.b, dtype=float).ravel()
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise ConfigError(f"Q must be square, got shape {Q.shape}")
    n = Q.shape[0]
    if W.shape != (n,) or b.shape != (n,):
        raise ConfigError(f"W and b must have length {n}")
    gap = np.abs(Q.T @ Q - np.eye(n)).max()
    if gap > ORTHO_TOL:
        raise NonOrthogonal(f"|Q^T Q - I|_max = {gap:.3e} exceeds {ORTHO_TOL}")
    if np.any(W <= 0) or not np.all(np.isfinite(W)):
        raise NonPositiveWeight(f"weights must be positive, got {W}")
    det = float(np.linalg.det(Q))
    if abs(abs(det) - 1.0) > ORTHO_TOL:
        raise NonOrthogonal(f"|det Q| = {abs(det):.15f} differs from 1")
    for arr in (Q, W, b):
        arr.setflags(write=False)
    return EllipsoidalFrame(Q, W, b, complex(frame.c), det)


@dataclass(frozen=True, eq=False)
class SymbolSpec:
    """A supported multiplier.

    ``coeffs`` are normalized so that the leading one is exactly 1; the
    original leading coefficient is kept in ``scale``.  :func:`eval_symbol`
    and :func:`radial_profile` describe the *original* symbol, so the scale is
    carried along automatically through the deflated factor q.
    """

    n: int
    coeffs: np.ndarray
    frame: EllipsoidalFrame
    scale: complex
    x0: np.ndarray

    @classmethod
    def create(cls, n, coeffs, frame: EllipsoidalFrame | None = None) -> "SymbolSpec":
        c = np.asarray(coeffs, dtype=complex).ravel()
        if c.size < 2:
            raise ConfigError("need at least coefficients c_0, c_1 (degree d >= 1)")
        if c[-1] == 0:
            raise ConfigError("leading coefficient c_d must be nonzero")
        if n < 1:
            raise ConfigError("dimension must be >= 1")
        frame = validate_frame(frame if frame is not None else EllipsoidalFrame.identity(n))
        if frame.n != n:
            raise ConfigError(f"frame has dimension {frame.n}, expected {n}")
        scale = complex(c[-1])
        c = c / scale
        c[-1] = 1.0
        c.setflags(write=False)
        Q, W, b = frame.Q, frame.W, frame.b
        x0 = -0.5 * Q.T @ ((Q @ b) / W)
        x0.setflags(write=False)
        return cls(n, c, frame, scale, x0)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    @property
    def metric(self) -> np.ndarray:
        """Q^T W Q, the matrix of the quadratic part."""
        Q, W = self.frame.Q, self.frame.W
        return Q.T @ (W[:, None] * Q)

    @property
    def polar_matrix(self) -> np.ndarray:
        """Q^T W^{-1/2}: Phi(r, omega) = r * polar_matrix @ omega + x0."""
        Q, W = self.frame.Q, self.frame.W
        return Q.T * (1.0 / np.sqrt(W))[None, :]

    @property
    def kappa(self) -> complex:
        Q, W, b = self.frame.Q, self.frame.W, self.frame.b
        Qb = Q @ b
        return self.frame.c - 0.25 * float(Qb @ (Qb / W))

    @property
    def is_isotropic(self) -> bool:
        """True when Phi(r, .) traces a round sphere centred at the origin."""
        W = self.frame.W
        return bool(np.all(self.x0 == 0) and np.ptp(W) <= 1e-15 * W.max())


def eval_symbol(spec: SymbolSpec, xi) -> np.ndarray | complex:
    xi = np.asarray(xi, dtype=float)
    quad = np.einsum("...i,ij,...j->...", xi, spec.metric, xi) + xi @ spec.frame.b + spec.frame.c
    acc = np.zeros(np.shape(quad), dtype=complex)
    for cj in spec.coeffs[::-1]:
        acc = acc * quad + cj
    out = spec.scale * acc
    return out[()] if out.ndim == 0 else out


def phi(spec: SymbolSpec, r, omega) -> np.ndarray:
    """Evaluate the polar map; broadcasts over ``r`` and leading axes of ``omega``."""
    omega = np.asarray(omega, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(np.abs(np.linalg.norm(omega, axis=-1) - 1.0) > UNIT_TOL):
        raise NonUnitDirection("direction vectors must have unit length")
    if np.any(r < 0):
        raise ValueError("radius must be nonnegative")
    return r[..., None] * (omega @ spec.polar_matrix.T) + spec.x0


def radial_profile(spec: SymbolSpec) -> Polynomial:
    """pi(r) = (p o Phi)(r, omega) = scale * sum_j c_j (r^2 + kappa)^j."""
    d = spec.degree
    kappa = spec.kappa
    out = np.zeros(2 * d + 1, dtype=complex)
    for j, cj in enumerate(spec.coeffs):
        for i in range(j + 1):
            out[2 * i] += cj * comb(j, i) * kappa ** (j - i)
    return Polynomial(spec.scale * out)


def jacobian_density(spec: SymbolSpec, r):
    """Density of the pulled-back volume form relative to the sphere measure."""
    detfac = float(np.prod(1.0 / np.sqrt(spec.frame.W)))
    r = np.asarray(r, dtype=float)
    out = detfac * r ** (spec.n - 1) if spec.n > 1 else detfac * np.ones_like(r)
    return out[()] if out.ndim == 0 else out
