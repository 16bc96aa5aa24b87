"""Dense complex matrix kernel: Hermitian eigendecompositions, tensor
products, partial traces, the reshuffle permutation and the Hilbert-Schmidt
(Frobenius) distance.

Index convention
----------------
A composite index on a bipartite space ``H_A (x) H_B`` with dimensions
``(d_a, d_b)`` is flattened row-major with the A index slow,

    (m, n)  ->  m * d_b + n .

Every function in this package uses this one convention, so partial traces,
Kronecker products and reshuffles compose without surprises.  All functions
are pure: they never mutate their inputs and are safe to call concurrently.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "LinalgError",
    "DimensionMismatch",
    "NonHermitianInput",
    "NoConvergence",
    "NotPerfectSquareSide",
    "EigenSystem",
    "is_hermitian",
    "hermitian_eig",
    "partial_trace",
    "reshuffle",
    "kron",
    "hs_distance",
    "hs_norm",
    "matrix_to_json",
    "matrix_from_json",
    "load_matrix",
    "dump_matrix",
]

MAX_SIDE = 64

HERMITICITY_RTOL = 1e-12


class LinalgError(ValueError):
    """Base class for matrix-kernel errors."""


class DimensionMismatch(LinalgError):
    """Operands have incompatible or unsupported shapes."""


class NonHermitianInput(LinalgError):
    """A matrix required to be Hermitian fails the Hermiticity check."""


class NoConvergence(LinalgError):
    """The eigensolver exhausted its iteration budget."""


class NotPerfectSquareSide(LinalgError):
    """Reshuffle needs a square matrix whose side is a perfect square."""


@dataclass(frozen=True)
class EigenSystem:
    """Spectral decomposition of a Hermitian matrix.

    Attributes:
        eigenvalues: real eigenvalues, sorted descending.
        eigenvectors: unitary matrix whose k-th column is the eigenvector of
            ``eigenvalues[k]``; each column is phased so that its
            largest-magnitude component is real and non-negative.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        """Return ``V diag(lambda) V^dagger``."""
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _as_square(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    return m


def hs_norm(m: np.ndarray) -> float:
    """Hilbert-Schmidt (Frobenius) norm."""
    return float(np.linalg.norm(np.asarray(m)))


def is_hermitian(m: np.ndarray, rtol: float = HERMITICITY_RTOL) -> bool:
    """Check ``max_ij |M_ij - conj(M_ji)| <= rtol * (1 + ||M||_F)``."""
    m = _as_square(m)
    dev = np.abs(m - m.conj().T).max(initial=0.0)
    return bool(dev <= rtol * (1.0 + hs_norm(m)))


def hermitian_eig(m: np.ndarray, rtol: float = HERMITICITY_RTOL) -> EigenSystem:
    """Eigendecompose a Hermitian matrix with deterministic conventions.

    Eigenvalues come out sorted descending.  Each eigenvector is rotated by a
    global phase so that its largest-magnitude component is real and
    non-negative, which makes downstream Kraus extraction reproducible.

    Args:
        m: square Hermitian matrix, side at most 64.
        rtol: relative Hermiticity tolerance.

    Raises:
        NonHermitianInput: the Hermiticity check fails.
        NoConvergence: the underlying iteration does not converge.
        DimensionMismatch: not square or side larger than 64.
    """
    m = _as_square(m)
    n = m.shape[0]
    if n > MAX_SIDE:
        raise DimensionMismatch(f"side {n} exceeds the supported maximum {MAX_SIDE}")
    if not is_hermitian(m, rtol):
        raise NonHermitianInput("matrix is not Hermitian within tolerance")
    try:
        vals, vecs = np.linalg.eigh((m + m.conj().T) / 2.0)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails
        raise NoConvergence(str(exc)) from exc
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = vecs[:, order]
    # Phase convention: largest-magnitude component real and >= 0.
    anchor = np.abs(vecs).argmax(axis=0)
    phases = vecs[anchor, np.arange(n)]
    mags = np.abs(phases)
    safe = np.where(mags > 0, phases / np.where(mags > 0, mags, 1.0), 1.0)
    vecs = vecs * safe.conj()
    return EigenSystem(eigenvalues=vals, eigenvectors=vecs)


def partial_trace(
    m: np.ndarray, d_a: int, d_b: int, which: str = "A"
) -> np.ndarray:
    """Trace out one factor of a bipartite matrix.

    ``m`` acts on ``H_A (x) H_B`` with the A index slow.  ``which="A"``
    returns the ``d_b x d_b`` reduction, ``which="B"`` the ``d_a x d_a`` one.
    Works on a single matrix or on a leading batch dimension.

    Raises:
        DimensionMismatch: the side of ``m`` is not ``d_a * d_b``.
    """
    m = np.asarray(m, dtype=complex)
    side = d_a * d_b
    if m.shape[-2:] != (side, side):
        raise DimensionMismatch(
            f"matrix side {m.shape[-2:]} does not match d_a*d_b = {side}"
        )
    t = m.reshape(m.shape[:-2] + (d_a, d_b, d_a, d_b))
    if which == "A":
        return np.einsum("...abad->...bd", t)
    if which == "B":
        return np.einsum("...abcb->...ac", t)
    raise ValueError(f"which must be 'A' or 'B', got {which!r}")


def reshuffle(x: np.ndarray) -> np.ndarray:
    """Reshuffle the composite indices of an ``N^2 x N^2`` matrix.

    With row index ``(m, n)`` and column index ``(mu, nu)``, the output is

        out[(m, n), (mu, nu)] = x[(m, mu), (n, nu)] .

    This is the exact entry permutation linking a superoperator to its
    dynamical (Choi) matrix; it is an involution, bit for bit.

    Raises:
        NotPerfectSquareSide: the side of ``x`` is not a perfect square.
    """
    x = _as_square(x)
    side = x.shape[0]
    n = math.isqrt(side)
    if n * n != side:
        raise NotPerfectSquareSide(f"side {side} is not a perfect square")
    return x.reshape(n, n, n, n).transpose(0, 2, 1, 3).reshape(side, side)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with A slow: ``(A (x) B)[(m,n),(mu,nu)] = A[m,mu] B[n,nu]``."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def hs_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Hilbert-Schmidt distance ``sqrt(Tr[(A-B)^dagger (A-B)])``.

    Raises:
        DimensionMismatch: shapes differ.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    return float(np.linalg.norm(a - b))


# ---------------------------------------------------------------------------
# JSON wire format: {"rows": n, "cols": m, "data": [[re, im], ...]} row-major.
# ---------------------------------------------------------------------------


def matrix_to_json(m: np.ndarray) -> dict:
    """Serialize a matrix to the row-major ``[re, im]`` pair format."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d array, got shape {m.shape}")
    data = [[float(z.real), float(z.imag)] for z in m.reshape(-1)]
    return {"rows": int(m.shape[0]), "cols": int(m.shape[1]), "data": data}


def matrix_from_json(obj: dict) -> np.ndarray:
    """Parse the matrix wire format, rejecting NaN/Inf entries."""
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed matrix object: {exc}") from exc
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be positive")
    if len(data) != rows * cols:
        raise ValueError(f"expected {rows * cols} entries, got {len(data)}")
    out = np.empty(rows * cols, dtype=complex)
    for i, pair in enumerate(data):
        re, im = float(pair[0]), float(pair[1])
        if not (math.isfinite(re) and math.isfinite(im)):
            raise ValueError(f"non-finite entry at index {i}")
        out[i] = complex(re, im)
    return out.reshape(rows, cols)


def dump_matrix(m: np.ndarray) -> str:
    """Matrix to a compact JSON string."""
    return json.dumps(matrix_to_json(m), separators=(",", ":"))


def load_matrix(text: str) -> np.ndarray:
    """Matrix from a JSON string."""
    return matrix_from_json(json.loads(text))
