"""Classification and parametrization of normalized and subnormalized states.

A subnormalized state is a positive Hermitian matrix with trace at most one
(a density matrix when the trace equals one).  A sub-tracial state satisfies
the stronger bound ``sigma <= I/N``, i.e. every eigenvalue is at most
``1/N``; in eigenvalue space the sub-tracial states form the axis-aligned
cube inscribed in the cone of subnormalized spectra, touching the simplex of
density-matrix spectra only at the maximally mixed point ``I/N``.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np

from .linalg import (
    NonHermitianInput,
    hermitian_eig,
    is_hermitian,
    matrix_from_json,
    matrix_to_json,
)

__all__ = [
    "NotNormalized",
    "UnsupportedDimension",
    "StateKind",
    "SubnormalizedState",
    "classify",
    "gell_mann_basis",
    "coherence_vector",
    "state_from_coherence",
    "coherence_radius",
    "polar_to_spectrum",
    "spectrum_to_polar",
    "purity",
    "state_to_json",
    "state_from_json",
]

DEFAULT_TOL = 1e-9


class NotNormalized(ValueError):
    """A density matrix (unit trace) was required."""


class UnsupportedDimension(ValueError):
    """Polar spectra are defined only for N in {2, 3}."""


class StateKind(enum.Enum):
    """Classification of a Hermitian matrix as a state."""

    DENSITY = "density"
    SUBNORMALIZED = "subnormalized"
    SUBTRACIAL = "subtracial"
    SUBTRACIAL_DENSITY = "subtracial-density"
    NOT_A_STATE = "not-a-state"


@dataclass(frozen=True)
class SubnormalizedState:
    """A positive Hermitian matrix with trace <= 1, plus cached spectra data."""

    matrix: np.ndarray
    trace: float
    min_eigenvalue: float

    @classmethod
    def from_matrix(cls, m: np.ndarray, tol: float = DEFAULT_TOL) -> "SubnormalizedState":
        m = np.asarray(m, dtype=complex)
        if not is_hermitian(m):
            raise NonHermitianInput("state matrix is not Hermitian")
        eigs = np.linalg.eigvalsh(m)
        tr = float(eigs.sum())
        lo = float(eigs[0])
        if lo < -tol or tr > 1.0 + max(tol, 1e-12):
            raise ValueError(f"not subnormalized: min eig {lo}, trace {tr}")
        return cls(matrix=m, trace=tr, min_eigenvalue=lo)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def classify(sigma: np.ndarray, tol: float = DEFAULT_TOL) -> StateKind:
    """Classify a Hermitian matrix.

    Density means positive with trace 1 (within ``tol``); subnormalized means
    positive with trace <= 1; sub-tracial additionally requires the largest
    eigenvalue to be at most ``1/N``.  The only matrix that is both a density
    matrix and sub-tracial is the maximally mixed state ``I/N``.

    Raises:
        NonHermitianInput: ``sigma`` fails the Hermiticity check.
    """
    sigma = np.asarray(sigma, dtype=complex)
    if not is_hermitian(sigma):
        raise NonHermitianInput("classification requires a Hermitian matrix")
    n = sigma.shape[0]
    eigs = np.linalg.eigvalsh(sigma)
    tr = float(eigs.sum())
    if eigs[0] < -tol or tr > 1.0 + tol:
        return StateKind.NOT_A_STATE
    is_density = abs(tr - 1.0) <= tol
    is_subtracial = eigs[-1] <= 1.0 / n + tol
    if is_density and is_subtracial:
        return StateKind.SUBTRACIAL_DENSITY
    if is_density:
        return StateKind.DENSITY
    if is_subtracial:
        return StateKind.SUBTRACIAL
    return StateKind.SUBNORMALIZED


@functools.lru_cache(maxsize=None)
def gell_mann_basis(n: int) -> np.ndarray:
    """Generalized Gell-Mann generators, orthonormal under the trace form.

    Returns an array of shape ``(n^2 - 1, n, n)`` of traceless Hermitian
    matrices with ``Tr(X_i X_j) = delta_ij``, ordered as: symmetric pair
    generators (i < j, lexicographic), then antisymmetric pair generators,
    then the diagonal ones.  The ordering is a convention of this library;
    quantities that depend only on the coherence-vector length do not see it.
    """
    if n < 2:
        raise ValueError("basis requires n >= 2")
    mats = []
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    for i in range(n):
        for j in range(i + 1, n):
            m = np.zeros((n, n), dtype=complex)
            m[i, j] = inv_sqrt2
            m[j, i] = inv_sqrt2
            mats.append(m)
    for i in range(n):
        for j in range(i + 1, n):
            m = np.zeros((n, n), dtype=complex)
            m[i, j] = -1j * inv_sqrt2
            m[j, i] = 1j * inv_sqrt2
            mats.append(m)
    for l in range(1, n):
        m = np.zeros((n, n), dtype=complex)
        norm = 1.0 / math.sqrt(l * (l + 1))
        for k in range(l):
            m[k, k] = norm
        m[l, l] = -l * norm
        mats.append(m)
    out = np.stack(mats)
    out.setflags(write=False)
    return out


def coherence_radius(n: int) -> float:
    """Largest coherence-vector length, ``sqrt((N-1)/N)``, attained by pure states."""
    return math.sqrt((n - 1) / n)


def coherence_vector(rho: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Expand a density matrix as ``rho = I/N + xi . X`` and return ``xi``.

    Raises:
        NotNormalized: the trace of ``rho`` is not 1 within ``tol``.
    """
    rho = np.asarray(rho, dtype=complex)
    if not is_hermitian(rho):
        raise NonHermitianInput("coherence vector requires a Hermitian matrix")
    n = rho.shape[0]
    if abs(rho.trace().real - 1.0) > tol:
        raise NotNormalized(f"trace {rho.trace().real} is not 1")
    basis = gell_mann_basis(n)
    return np.einsum("kij,ji->k", basis, rho).real


def state_from_coherence(xi: np.ndarray, n: int) -> np.ndarray:
    """Inverse of :func:`coherence_vector`: ``I/N + xi . X``."""
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (n * n - 1,):
        raise ValueError(f"expected {n * n - 1} components, got shape {xi.shape}")
    basis = gell_mann_basis(n)
    return np.eye(n, dtype=complex) / n + np.tensordot(xi, basis, axes=1)


_TWO_THIRDS_PI = 2.0 * math.pi / 3.0


def polar_to_spectrum(n: int, point) -> np.ndarray:
    """Map a polar parametrization to eigenvalues summing to one.

    For ``n == 2``, ``point`` is a scalar ``r`` in ``[-1/2, 1/2]`` and the
    spectrum is ``(1/2 + r, 1/2 - r)``.  For ``n == 3``, ``point`` is a pair
    ``(r, phi)`` with ``r >= 0`` and

        lambda_1 = 1/3 + r cos(phi + 2pi/3)
        lambda_2 = 1/3 + r cos(phi)
        lambda_3 = 1/3 + r cos(phi - 2pi/3) .

    Raises:
        UnsupportedDimension: ``n`` not in {2, 3}.
        ValueError: the point maps outside the simplex.
    """
    if n == 2:
        r = float(point)
        if abs(r) > 0.5 + 1e-12:
            raise ValueError(f"r = {r} outside [-1/2, 1/2]")
        return np.array([0.5 + r, 0.5 - r])
    if n == 3:
        r, phi = float(point[0]), float(point[1])
        if r < 0:
            raise ValueError("radial coordinate must be non-negative")
        lam = np.array(
            [
                1.0 / 3.0 + r * math.cos(phi + _TWO_THIRDS_PI),
                1.0 / 3.0 + r * math.cos(phi),
                1.0 / 3.0 + r * math.cos(phi - _TWO_THIRDS_PI),
            ]
        )
        if lam.min() < -1e-12:
            raise ValueError(f"point (r={r}, phi={phi}) maps outside the simplex")
        return lam
    raise UnsupportedDimension(f"polar spectra are defined for N in {{2, 3}}, got {n}")


def spectrum_to_polar(n: int, eigenvalues) -> float | tuple[float, float]:
    """Canonical polar coordinates of a unit-trace spectrum.

    The parametrization is invariant under relabeling the eigenvalues; the
    canonical representative sorts them descending, which gives ``r >= 0``
    for ``n == 2`` and ``phi`` in ``[0, pi/3]`` for ``n == 3``.

    Raises:
        UnsupportedDimension: ``n`` not in {2, 3}.
    """
    lam = np.sort(np.asarray(eigenvalues, dtype=float))[::-1]
    if lam.shape != (n,):
        raise ValueError(f"expected {n} eigenvalues, got shape {lam.shape}")
    if abs(lam.sum() - 1.0) > 1e-9:
        raise NotNormalized(f"eigenvalues sum to {lam.sum()}, not 1")
    if n == 2:
        return float((lam[0] - lam[1]) / 2.0)
    if n == 3:
        # Descending (a, b, c) sits in the fundamental domain with slots
        # lambda_2 = a, lambda_3 = b, lambda_1 = c.
        x = lam[0] - 1.0 / 3.0
        y = (lam[1] - lam[2]) / math.sqrt(3.0)
        r = math.hypot(x, y)
        phi = math.atan2(y, x) if r > 0 else 0.0
        return r, phi
    raise UnsupportedDimension(f"polar spectra are defined for N in {{2, 3}}, got {n}")


def purity(sigma: np.ndarray) -> float:
    """``Tr(sigma^2)``, equal to the squared HS distance from the zero matrix."""
    sigma = np.asarray(sigma, dtype=complex)
    return float(np.vdot(sigma, sigma).real)


def state_to_json(sigma: np.ndarray, tol: float = DEFAULT_TOL) -> dict:
    """Matrix wire format extended with the classification under ``kind``."""
    obj = matrix_to_json(sigma)
    obj["kind"] = classify(sigma, tol).value
    return obj


def state_from_json(obj: dict) -> np.ndarray:
    """Read a state serialized by :func:`state_to_json`."""
    return matrix_from_json(obj)


def _spectrum(sigma: np.ndarray) -> np.ndarray:
    """Descending eigenvalues via the deterministic eigensolver."""
    return hermitian_eig(sigma).eigenvalues
