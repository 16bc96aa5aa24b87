"""Exact closed-form constants, volumes and densities.

Everything rational is computed in exact big-rational arithmetic
(``fractions.Fraction`` over Python integers); the transcendental factors
``pi^p`` and ``sqrt(s)`` of the volume formulas are carried symbolically by
:class:`ExactVolume` so that cross-formula identities can be checked with no
tolerance at all.  Gamma functions only ever appear at positive integer
arguments and are evaluated as exact factorials.

Quantities
----------
``vol_states(N, K)``   volume of the density matrices of size N under the
                       induced measure with environment dimension K (K = N is
                       the flat Hilbert-Schmidt case).
``vol_sub(N, K)``      same for the cone of subnormalized states.
``vol_flag(N)``        volume of the complex flag manifold U(N)/U(1)^N.
``vol_tni(N)``         closed-form volume attached to the set of completely
                       positive trace-nonincreasing maps on N-dimensional
                       states (see the note on ``tni_fraction``).
``box_sub_ratio``      exact probability that a subnormalized spectrum drawn
                       from the induced measure lands in the sub-tracial cube.
``density_*``          eigenvalue densities of reduced states, exact constants
                       with float evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

__all__ = [
    "BadParams",
    "NotOnSimplex",
    "ExactVolume",
    "gamma_int",
    "c_norm",
    "b_norm",
    "vol_flag",
    "vol_states",
    "vol_sub",
    "ch_measure",
    "selberg_i",
    "cube_measure",
    "vol_tni",
    "box_sub_ratio",
    "tni_fraction",
    "density_eigs",
    "density_radial_2",
    "radial_cdf_2",
    "density_polar_3",
    "polar_jacobian",
]


class BadParams(ValueError):
    """Parameters outside the domain of a closed-form expression."""


class NotOnSimplex(ValueError):
    """An eigenvalue vector does not lie on the probability simplex."""


def gamma_int(n: int) -> int:
    """Gamma at a positive integer, ``Gamma(n) = (n-1)!``."""
    if n < 1:
        raise BadParams(f"Gamma argument must be a positive integer, got {n}")
    return math.factorial(n - 1)


def _square_free(s: int) -> tuple[int, int]:
    """Split ``s = free * root^2`` with ``free`` square-free; return (free, root)."""
    if s < 1:
        raise ValueError("sqrt argument must be a positive integer")
    root = 1
    free = 1
    d = 2
    while d * d <= s:
        exp = 0
        while s % d == 0:
            s //= d
            exp += 1
        root *= d ** (exp // 2)
        if exp % 2:
            free *= d
        d += 1
    free *= s
    return free, root


@dataclass(frozen=True)
class ExactVolume:
    """Exact value ``q * pi^pi_power * sqrt(sqrt_arg)``.

    ``q`` is a rational in lowest terms and ``sqrt_arg`` a square-free
    positive integer, so equal values always compare equal structurally.
    """

    q: Fraction
    pi_power: int = 0
    sqrt_arg: int = 1

    def __post_init__(self) -> None:
        q = Fraction(self.q)
        free, root = _square_free(int(self.sqrt_arg))
        object.__setattr__(self, "q", q * root)
        object.__setattr__(self, "sqrt_arg", free)
        if self.pi_power < 0:
            raise ValueError("pi_power must be non-negative")

    def __mul__(self, other):
        if isinstance(other, ExactVolume):
            return ExactVolume(
                self.q * other.q,
                self.pi_power + other.pi_power,
                self.sqrt_arg * other.sqrt_arg,
            )
        return ExactVolume(self.q * Fraction(other), self.pi_power, self.sqrt_arg)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, ExactVolume):
            # sqrt(a)/sqrt(b) = sqrt(a b)/b
            return ExactVolume(
                self.q / (other.q * other.sqrt_arg),
                self.pi_power - other.pi_power,
                self.sqrt_arg * other.sqrt_arg,
            )
        return ExactVolume(self.q / Fraction(other), self.pi_power, self.sqrt_arg)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not supported")
        out = ExactVolume(Fraction(1))
        for _ in range(k):
            out = out * self
        return out

    def __float__(self) -> float:
        return float(self.q) * math.pi**self.pi_power * math.sqrt(self.sqrt_arg)

    @property
    def value(self) -> float:
        return float(self)

    def decimal(self, digits: int = 50) -> str:
        """Decimal rendering at the requested precision."""
        with mpmath.workdps(digits + 10):
            x = mpmath.mpf(self.q.numerator) / self.q.denominator
            x *= mpmath.pi**self.pi_power
            x *= mpmath.sqrt(self.sqrt_arg)
            return mpmath.nstr(x, digits)

    def exact_str(self) -> str:
        return f"{self.q} * pi^{self.pi_power} * sqrt({self.sqrt_arg})"


def _check_nk(n: int, k: int) -> None:
    if n < 1 or k < n:
        raise BadParams(f"need K >= N >= 1, got N={n}, K={k}")


def c_norm(n: int, alpha: int) -> Fraction:
    """Normalization of the eigenvalue density with repulsion exponent two.

    ``1/C = prod_{j=1..N} Gamma(1+j) Gamma(j+alpha-1) / Gamma(N^2+(alpha-1)N)``
    normalizes ``prod lambda_i^(alpha-1) prod_{i<j} (lambda_i-lambda_j)^2`` on
    the unit simplex.
    """
    if n < 1 or alpha < 1:
        raise BadParams(f"need N >= 1 and alpha >= 1, got N={n}, alpha={alpha}")
    denom = math.prod(gamma_int(1 + j) * gamma_int(j + alpha - 1) for j in range(1, n + 1))
    return Fraction(gamma_int(n * n + (alpha - 1) * n), denom)


def b_norm(n: int, k: int) -> Fraction:
    """Normalization of the induced eigenvalue density with environment K.

    ``B = Gamma(KN) / prod_{j=0..N-1} Gamma(K-j) Gamma(N-j+1)``; identical to
    ``c_norm(N, K-N+1)``.
    """
    _check_nk(n, k)
    denom = math.prod(gamma_int(k - j) * gamma_int(n - j + 1) for j in range(n))
    return Fraction(gamma_int(k * n), denom)


def vol_flag(n: int) -> ExactVolume:
    """Volume of the complex flag manifold ``U(N)/U(1)^N``.

    ``(2 pi)^(N(N-1)/2) / (1! 2! ... (N-1)!)``.
    """
    if n < 1:
        raise BadParams(f"need N >= 1, got {n}")
    e = n * (n - 1) // 2
    denom = math.prod(math.factorial(j) for j in range(1, n))
    return ExactVolume(Fraction(2**e, denom), pi_power=e)


def vol_states(n: int, k: int | None = None) -> ExactVolume:
    """Volume of the density matrices of size N under the induced measure.

    ``sqrt(N) (2 pi)^(N(N-1)/2) Gamma(K-N+1) ... Gamma(K) / Gamma(NK)``;
    ``K = N`` gives the Hilbert-Schmidt volume.
    """
    k = n if k is None else k
    _check_nk(n, k)
    e = n * (n - 1) // 2
    num = math.prod(gamma_int(k - n + j) for j in range(1, n + 1))
    return ExactVolume(Fraction(2**e * num, gamma_int(n * k)), pi_power=e, sqrt_arg=n)


def vol_sub(n: int, k: int | None = None) -> ExactVolume:
    """Volume of the cone of subnormalized states under the induced measure.

    ``(2 pi)^(N(N-1)/2) Gamma(K-N+1) ... Gamma(K) / (NK Gamma(NK))``.  At
    ``K = N`` this equals ``vol_states(N, N) / N^(5/2)`` (cone of height
    ``1/sqrt(N)`` over the N^2-1 dimensional base, Archimedes' formula).
    """
    k = n if k is None else k
    _check_nk(n, k)
    e = n * (n - 1) // 2
    num = math.prod(gamma_int(k - n + j) for j in range(1, n + 1))
    return ExactVolume(Fraction(2**e * num, n * k * gamma_int(n * k)), pi_power=e)


def ch_measure(n: int, k: int) -> Fraction:
    """Unnormalized mass of the cone of subnormalized spectra.

    Mass of ``conv{0, simplex}`` under
    ``prod lambda_i^(K-N) prod_{i<j}(lambda_i-lambda_j)^2 dlambda``, equal to
    ``1 / (K N c_norm(N, K-N+1))``.
    """
    _check_nk(n, k)
    return Fraction(1, k * n) / c_norm(n, k - n + 1)


def selberg_i(n: int, k: int) -> Fraction:
    """Selberg integral ``I(K-N+1, 1, 1, N)`` over the unit cube.

    ``prod_{j=1..N} Gamma(1+j) Gamma(K-N+j) Gamma(j) / (Gamma(2) Gamma(K+j))``.
    """
    _check_nk(n, k)
    return math.prod(
        Fraction(gamma_int(1 + j) * gamma_int(k - n + j) * gamma_int(j), gamma_int(k + j))
        for j in range(1, n + 1)
    )


def cube_measure(n: int, k: int) -> Fraction:
    """Mass of the sub-tracial cube ``[0, 1/N]^N`` under the same density.

    Rescaling each eigenvalue by N reduces it to the Selberg integral:
    ``selberg_i(N, K) / N^(KN)``.
    """
    _check_nk(n, k)
    return selberg_i(n, k) / Fraction(n ** (k * n))


def vol_tni(n: int) -> ExactVolume:
    """Closed-form volume attached to the CP trace-nonincreasing maps.

    ``(2 pi)^(N^2(N^2-1)/2) / (1! 2! ... N^2!) *
    prod_{j=1..N} Gamma(1+j) Gamma(N^3-N+j) Gamma(j) / (N^(N^3) Gamma(N^3+j))``

    which factors as ``vol_flag(N^2) / N^2! * cube_measure(N, N^3)``.  Note
    that the measurable acceptance fraction of the rejection sampler is
    ``tni_fraction(N)``, not the ratio of this value to ``vol_sub(N^2)``;
    see :func:`tni_fraction`.
    """
    if n < 1:
        raise BadParams(f"need N >= 1, got {n}")
    n2 = n * n
    e = n2 * (n2 - 1) // 2
    pref = Fraction(2**e, math.prod(math.factorial(j) for j in range(1, n2 + 1)))
    prod = math.prod(
        Fraction(
            gamma_int(1 + j) * gamma_int(n**3 - n + j) * gamma_int(j),
            n ** (n**3) * gamma_int(n**3 + j),
        )
        for j in range(1, n + 1)
    )
    return ExactVolume(pref * prod, pi_power=e)


def box_sub_ratio(n: int, k: int) -> Fraction:
    """Probability that an induced-measure subnormalized spectrum is sub-tracial.

    ``(NK)! / N^(NK) * prod_{j=1..N} Gamma(j) / Gamma(K+j)``, a rational in
    ``(0, 1]``.  Identically equal to
    ``N K c_norm(N, K-N+1) cube_measure(N, K)`` (cube mass over cone mass).
    """
    _check_nk(n, k)
    prod = math.prod(Fraction(gamma_int(j), gamma_int(k + j)) for j in range(1, n + 1))
    return Fraction(math.factorial(n * k), n ** (n * k)) * prod


def tni_fraction(n: int) -> Fraction:
    """Exact fraction of HS-random subnormalized states of size N^2 whose
    partial trace is sub-tracial, i.e. that are rescaled dynamical matrices
    of CP trace-nonincreasing maps.

    Under the flat measure on subnormalized states of size N^2 the spectrum
    of the reduced matrix follows the induced cone law with environment
    ``K = N^3``, so this is ``box_sub_ratio(N, N^3)``.  It is the exact
    acceptance rate of the rejection sampler for TNI Choi matrices.
    """
    if n < 1:
        raise BadParams(f"need N >= 1, got {n}")
    return box_sub_ratio(n, n**3)


# ---------------------------------------------------------------------------
# Densities of reduced-state spectra.
# ---------------------------------------------------------------------------


def density_eigs(n: int, k: int, lam) -> float:
    """Joint eigenvalue density of an induced-measure state on the simplex.

    ``b_norm(N, K) * prod lambda_i^(K-N) * prod_{i<j} (lambda_i-lambda_j)^2``.

    Raises:
        NotOnSimplex: the eigenvalues do not sum to 1 (tol 1e-12) or one of
            them is negative beyond -1e-12.
    """
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (n,):
        raise BadParams(f"expected {n} eigenvalues, got shape {lam.shape}")
    if abs(lam.sum() - 1.0) > 1e-12 or lam.min() < -1e-12:
        raise NotOnSimplex(f"eigenvalues {lam.tolist()} are not on the simplex")
    lam = np.clip(lam, 0.0, None)
    value = float(b_norm(n, k))
    value *= float(np.prod(lam ** (k - n)))
    for i in range(n):
        for j in range(i + 1, n):
            value *= (lam[i] - lam[j]) ** 2
    return value


# Radial density of the qubit spectrum reduced out of an HS-random two-qubit
# state: const * (1/4 - r^2)^6 * r^2 on [-1/2, 1/2], const = 4 * b_norm(2, 8).
_RADIAL2_CONST = 4 * b_norm(2, 8)

# Exact antiderivative coefficients: const * sum_k C(6,k)(-1)^k 4^(k-6)
# r^(2k+3) / (2k+3).
_RADIAL2_POLY = [
    (2 * kk + 3, _RADIAL2_CONST * Fraction(math.comb(6, kk) * (-1) ** kk, 4 ** (6 - kk) * (2 * kk + 3)))
    for kk in range(7)
]
_RADIAL2_OFFSET = -sum(c * Fraction(-1, 2) ** p for p, c in _RADIAL2_POLY)


def density_radial_2(r):
    """Radial eigenvalue-gap density ``720720 (1/4 - r^2)^6 r^2`` on [-1/2, 1/2].

    Zero outside the interval.  Accepts scalars or arrays.
    """
    r = np.asarray(r, dtype=float)
    inside = np.abs(r) <= 0.5
    val = float(_RADIAL2_CONST) * (0.25 - r * r) ** 6 * r * r
    out = np.where(inside, val, 0.0)
    return out[()]


def radial_cdf_2(r):
    """Exact-polynomial CDF of :func:`density_radial_2`."""
    r = np.asarray(r, dtype=float)
    rc = np.clip(r, -0.5, 0.5)
    out = np.full(rc.shape, float(_RADIAL2_OFFSET))
    for p, c in _RADIAL2_POLY:
        out = out + float(c) * rc**p
    return np.clip(out, 0.0, 1.0)[()]


# Polar density of the qutrit spectrum reduced out of an HS-random two-qutrit
# state: const * r^6 sin^2(3 phi) (1/27 - r^2/4 + r^3 cos(3 phi)/4)^24 on the
# polar image of the simplex; const = (27/16) * b_norm(3, 27).
_POLAR3_CONST = Fraction(27, 16) * b_norm(3, 27)

_TWO_THIRDS_PI = 2.0 * math.pi / 3.0


def density_polar_3(r, phi):
    """Polar eigenvalue density for reduced qutrits; zero outside the simplex.

    Invariant under ``phi -> -phi`` exactly (the angle enters through even
    functions of ``phi``) and under ``phi -> phi + 2k pi/3`` up to floating
    point rounding of the shifted argument.  The probability element is
    ``density * sqrt(3)/2 * r dr dphi``; see :func:`polar_jacobian`.
    """
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    # cos and sin^2 are even, so reduce through |.| to make phi -> -phi exact.
    l1 = 1.0 / 3.0 + r * np.cos(np.abs(phi + _TWO_THIRDS_PI))
    l2 = 1.0 / 3.0 + r * np.cos(np.abs(phi))
    l3 = 1.0 / 3.0 + r * np.cos(np.abs(phi - _TWO_THIRDS_PI))
    support = (r >= 0) & (l1 >= 0) & (l2 >= 0) & (l3 >= 0)
    s = np.sin(np.abs(3.0 * phi))
    c = np.cos(np.abs(3.0 * phi))
    base = 1.0 / 27.0 - 0.25 * r * r + 0.25 * r**3 * c
    val = float(_POLAR3_CONST) * r**6 * s * s * base**24
    return np.where(support, val, 0.0)[()]


def polar_jacobian(r):
    """Volume element factor for the qutrit polar plane: ``sqrt(3)/2 * r``."""
    r = np.asarray(r, dtype=float)
    return (math.sqrt(3.0) / 2.0 * r)[()]
