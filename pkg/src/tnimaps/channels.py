"""Superoperator and Choi representations of quantum maps, CP/TP/TNI
verification, generalized Kraus decompositions, and the k-extremal family of
trace-nonincreasing maps.

Representations and conventions
-------------------------------
A map acts linearly on row-major vectorized matrices,

    rho'[(m, mu)] = Phi[(m, mu), (n, nu)] rho[(n, nu)] ,

and its dynamical (Choi) matrix is the reshuffle D[(m,n),(mu,nu)] =
Phi[(m,mu),(n,nu)].  The canonical stored object is the rescaled dynamical
matrix ``sigma = D / N`` (trace at most 1 for trace-nonincreasing maps);
conversions to D multiply by N explicitly.

The standard facts wired into the checks: the map is completely positive iff
D is positive semidefinite (Choi); trace preserving iff ``Tr_A D = I``; trace
nonincreasing iff ``Tr_A sigma <= I/N``, i.e. the largest eigenvalue of the
reduced rescaled matrix is at most 1/N.  A CP-TNI map always admits at most
N^2 Kraus-style operators with ``sum A^dag A = N * (Tr_A sigma)^T``, the
trace-preserving case being the usual Kraus sum resolving the identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    DimensionMismatch,
    hermitian_eig,
    hs_norm,
    kron,
    matrix_from_json,
    matrix_to_json,
    partial_trace,
    reshuffle,
)
from .states import StateKind, SubnormalizedState, classify

__all__ = [
    "NotCompletelyPositive",
    "GramConditionViolated",
    "BadSubset",
    "Superoperator",
    "ChoiForm",
    "KrausSet",
    "ExtremalSpec",
    "ExtremalReport",
    "choi_from_superop",
    "superop_from_choi",
    "apply",
    "is_cp",
    "is_tp",
    "is_tni",
    "reduced_rescaled",
    "checked",
    "rescale_to_tni",
    "kraus_from_choi",
    "choi_from_kraus",
    "kraus_gram",
    "make_k_extremal",
    "verify_extremal_properties",
    "choi_to_json",
    "choi_from_json",
    "kraus_to_json",
    "kraus_from_json",
]

POSITIVITY_TOL = 1e-9
TP_TOL = 1e-9
RANK_TOL = 1e-12


class NotCompletelyPositive(ValueError):
    """Kraus extraction requires a positive semidefinite Choi matrix."""


class GramConditionViolated(ValueError):
    """The Kraus Gram sum exceeds the sub-tracial bound."""


class BadSubset(ValueError):
    """An extremal-map subset is not a sorted subset of 1..N."""


@dataclass(frozen=True)
class Superoperator:
    """Matrix of a linear map on vectorized states."""

    n: int
    matrix: np.ndarray

    def __post_init__(self) -> None:
        side = self.n * self.n
        if self.matrix.shape != (side, side):
            raise DimensionMismatch(
                f"superoperator for N={self.n} must be {side}x{side}, "
                f"got {self.matrix.shape}"
            )


@dataclass(frozen=True)
class ChoiForm:
    """Rescaled dynamical matrix ``sigma = D/N`` with cached check flags.

    Flags are tri-state: True/False when checked, None when not yet checked.
    """

    n: int
    sigma: np.ndarray
    is_cp: bool | None = None
    is_tp: bool | None = None
    is_tni: bool | None = None

    def __post_init__(self) -> None:
        side = self.n * self.n
        if self.sigma.shape != (side, side):
            raise DimensionMismatch(
                f"Choi matrix for N={self.n} must be {side}x{side}, "
                f"got {self.sigma.shape}"
            )

    @property
    def dynamical(self) -> np.ndarray:
        """The unrescaled dynamical matrix ``D = N * sigma``."""
        return self.n * self.sigma


@dataclass(frozen=True)
class KrausSet:
    """Operators realizing ``rho -> sum_mu A_mu rho A_mu^dag``."""

    n: int
    operators: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "operators", tuple(self.operators))
        for a in self.operators:
            if a.shape != (self.n, self.n):
                raise DimensionMismatch(
                    f"Kraus operators must be {self.n}x{self.n}, got {a.shape}"
                )


@dataclass(frozen=True)
class ExtremalSpec:
    """Parameters of a k-extremal map: a sorted subset of 1..N and an
    optional output state for the product construction."""

    n: int
    zeta: tuple[int, ...]
    omega: np.ndarray | None = None

    def __post_init__(self) -> None:
        z = tuple(int(i) for i in self.zeta)
        object.__setattr__(self, "zeta", z)
        if any(not 1 <= i <= self.n for i in z) or any(
            z[i] >= z[i + 1] for i in range(len(z) - 1)
        ):
            raise BadSubset(f"zeta must be a strictly increasing subset of 1..{self.n}")
        if self.omega is not None and self.omega.shape != (self.n, self.n):
            raise DimensionMismatch("omega must be an NxN density matrix")

    @property
    def k(self) -> int:
        return len(self.zeta)

    def projector(self) -> np.ndarray:
        """The rank-k projector onto the selected basis states."""
        p = np.zeros((self.n, self.n), dtype=complex)
        for i in self.zeta:
            p[i - 1, i - 1] = 1.0
        return p


# -- representation conversions ----------------------------------------------


def choi_from_superop(phi: Superoperator) -> ChoiForm:
    """``sigma = reshuffle(Phi) / N``."""
    return ChoiForm(n=phi.n, sigma=reshuffle(phi.matrix) / phi.n)


def superop_from_choi(choi: ChoiForm) -> Superoperator:
    """Inverse of :func:`choi_from_superop` (reshuffle is an involution)."""
    return Superoperator(n=choi.n, matrix=reshuffle(choi.n * choi.sigma))


def kraus_gram(ks: KrausSet) -> np.ndarray:
    """``sum_mu A_mu^dag A_mu``."""
    out = np.zeros((ks.n, ks.n), dtype=complex)
    for a in ks.operators:
        out += a.conj().T @ a
    return out


def choi_from_kraus(ks: KrausSet, tol: float = POSITIVITY_TOL) -> ChoiForm:
    """Choi matrix ``sigma = (1/N) sum_mu |A_mu>><<A_mu|`` of a Kraus family.

    The family must satisfy the sub-tracial Gram bound: the largest
    eigenvalue of ``(1/N) sum A^dag A`` may not exceed ``1/N``.

    Raises:
        GramConditionViolated: the Gram bound fails beyond ``tol``.
    """
    n = ks.n
    gram = kraus_gram(ks)
    lam_max = float(np.linalg.eigvalsh(gram)[-1])
    if lam_max / n > 1.0 / n + tol:
        raise GramConditionViolated(
            f"max eigenvalue of Gram/N is {lam_max / n}, exceeds 1/N = {1 / n}"
        )
    d = np.zeros((n * n, n * n), dtype=complex)
    for a in ks.operators:
        v = np.asarray(a, dtype=complex).reshape(-1)
        d += np.outer(v, v.conj())
    sigma = d / n
    tp = bool(hs_norm(gram - np.eye(n)) <= TP_TOL)
    return ChoiForm(n=n, sigma=sigma, is_cp=True, is_tp=tp, is_tni=True)


def kraus_from_choi(choi: ChoiForm, rank_tol: float = RANK_TOL) -> KrausSet:
    """Operators from the square-root decomposition of ``D = N * sigma``.

    Eigenpairs of D with eigenvalue below ``rank_tol * Tr(D)`` are dropped,
    so at most N^2 operators come back.  The eigensolver's deterministic
    phase convention makes the output reproducible.

    Raises:
        NotCompletelyPositive: the Choi matrix fails the positivity check.
    """
    if not is_cp(choi):
        raise NotCompletelyPositive("Choi matrix has a negative eigenvalue")
    n = choi.n
    d = choi.dynamical
    eig = hermitian_eig(d)
    cut = rank_tol * max(float(d.trace().real), 0.0)
    ops = []
    for lam, vec in zip(eig.eigenvalues, eig.eigenvectors.T):
        if lam > cut:
            ops.append(math.sqrt(lam) * vec.reshape(n, n))
    return KrausSet(n=n, operators=tuple(ops))


# -- applying a map -----------------------------------------------------------


def apply(op, rho: np.ndarray) -> np.ndarray:
    """Apply a map in any representation to a matrix.

    Accepts a :class:`Superoperator`, :class:`ChoiForm` or :class:`KrausSet`;
    the three routes agree on any input up to numerical rounding.
    """
    rho = np.asarray(rho, dtype=complex)
    if isinstance(op, Superoperator):
        n = op.n
        _check_state_shape(rho, n)
        return (op.matrix @ rho.reshape(-1)).reshape(n, n)
    if isinstance(op, ChoiForm):
        n = op.n
        _check_state_shape(rho, n)
        t = op.dynamical.reshape(n, n, n, n)
        return np.einsum("ijkl,jl->ik", t, rho)
    if isinstance(op, KrausSet):
        n = op.n
        _check_state_shape(rho, n)
        out = np.zeros((n, n), dtype=complex)
        for a in op.operators:
            out += a @ rho @ a.conj().T
        return out
    raise TypeError(f"cannot apply object of type {type(op).__name__}")


def _check_state_shape(rho: np.ndarray, n: int) -> None:
    if rho.shape != (n, n):
        raise DimensionMismatch(f"state must be {n}x{n}, got {rho.shape}")


# -- verification -------------------------------------------------------------


def is_cp(choi: ChoiForm, tol: float = POSITIVITY_TOL) -> bool:
    """Complete positivity: smallest eigenvalue of sigma above the tolerance
    floor ``-tol * max(1, ||sigma||_F)``."""
    lam_min = float(np.linalg.eigvalsh(choi.sigma)[0])
    return lam_min >= -tol * max(1.0, hs_norm(choi.sigma))


def is_tp(choi: ChoiForm, tol: float = TP_TOL) -> bool:
    """Trace preservation: ``Tr_A(N sigma) = I`` within ``tol`` (Frobenius)."""
    reduced = partial_trace(choi.dynamical, d_a=choi.n, d_b=choi.n, which="A")
    return bool(hs_norm(reduced - np.eye(choi.n)) <= tol)


def is_tni(choi: ChoiForm, tol: float = TP_TOL) -> bool:
    """Trace nonincrease: max eigenvalue of ``Tr_A sigma`` at most ``1/N + tol``."""
    reduced = partial_trace(choi.sigma, d_a=choi.n, d_b=choi.n, which="A")
    lam_max = float(np.linalg.eigvalsh(reduced)[-1])
    return lam_max <= 1.0 / choi.n + tol


def checked(choi: ChoiForm, tol: float = POSITIVITY_TOL) -> ChoiForm:
    """Copy of ``choi`` with all three flags computed."""
    return ChoiForm(
        n=choi.n,
        sigma=choi.sigma,
        is_cp=is_cp(choi, tol),
        is_tp=is_tp(choi),
        is_tni=is_tni(choi),
    )


def rescale_to_tni(choi: ChoiForm) -> ChoiForm:
    """Mix a CP map with the zero map until it is trace nonincreasing.

    Scales sigma by ``min(1, 1/(N lambda_max))`` where ``lambda_max`` is the
    largest eigenvalue of the reduced rescaled matrix; any CP map becomes
    TNI this way, sitting on the sub-tracial boundary if it was not TNI
    already.
    """
    reduced = partial_trace(choi.sigma, d_a=choi.n, d_b=choi.n, which="A")
    lam_max = float(np.linalg.eigvalsh(reduced)[-1])
    scale = 1.0 if lam_max <= 1.0 / choi.n else 1.0 / (choi.n * lam_max)
    return ChoiForm(
        n=choi.n, sigma=choi.sigma * scale, is_cp=choi.is_cp, is_tp=None, is_tni=True
    )


def reduced_rescaled(choi: ChoiForm) -> SubnormalizedState:
    """The reduced rescaled dynamical matrix ``Tr_A sigma``.

    For a CP-TNI map this is a sub-tracial state; its trace equals the trace
    of sigma.  For a TP map it is exactly ``I/N``.
    """
    reduced = partial_trace(choi.sigma, d_a=choi.n, d_b=choi.n, which="A")
    eigs = np.linalg.eigvalsh(reduced)
    return SubnormalizedState(
        matrix=reduced, trace=float(eigs.sum()), min_eigenvalue=float(eigs[0])
    )


# -- k-extremal maps -----------------------------------------------------------


def make_k_extremal(spec: ExtremalSpec) -> ChoiForm:
    """Product-form Choi matrix ``sigma = omega (x) P_zeta / N``.

    The reduced rescaled matrix is the diagonal projector ``P_zeta / N`` with
    exactly k entries equal to 1/N, so the map is CP and TNI by construction,
    trace preserving exactly when ``k = N``, and acts as
    ``rho -> omega Tr(P_zeta rho)``: the projected subspace is funneled into
    ``omega`` and the complement is annihilated.  ``omega`` defaults to the
    maximally mixed state.
    """
    omega = spec.omega
    if omega is None:
        omega = np.eye(spec.n, dtype=complex) / spec.n
    elif classify(omega) not in (StateKind.DENSITY, StateKind.SUBTRACIAL_DENSITY):
        raise ValueError("omega must be a density matrix")
    sigma = kron(omega, spec.projector()) / spec.n
    return ChoiForm(
        n=spec.n, sigma=sigma, is_cp=True, is_tp=spec.k == spec.n, is_tni=True
    )


@dataclass(frozen=True)
class ExtremalReport:
    """Outcome of the defining property checks of a k-extremal map."""

    n: int
    zeta: tuple[int, ...]
    n_random: int
    projected_trace_dev: float
    mixed_trace_dev: float
    omega_residual: float | None
    image_is_density: bool
    passed: bool
    failures: tuple[str, ...] = field(default_factory=tuple)


def verify_extremal_properties(
    choi: ChoiForm,
    spec: ExtremalSpec,
    n_random: int = 100,
    config=None,
    projected_tol: float = 1e-9,
    mixed_tol: float = 1e-12,
    omega_tol: float = 1e-10,
) -> ExtremalReport:
    """Check the three defining properties of a k-extremal map.

    (a) trace preservation on states projected into the selected subspace,
    (b) ``Tr Phi(I/N) = k/N``, and (c) ``Phi(I/N)`` proportional to a density
    matrix (equal to ``(k/N) omega`` for the product construction).
    """
    from .sampling import Sampler

    n, k = spec.n, spec.k
    p = spec.projector()
    sampler = Sampler(config)
    failures = []

    dev_a = 0.0
    for _ in range(n_random):
        x = sampler.density_induced(n, n)
        projected = p @ x @ p
        out_trace = apply(choi, projected).trace().real
        dev_a = max(dev_a, abs(out_trace - projected.trace().real))
    if dev_a > projected_tol:
        failures.append(f"projected trace deviation {dev_a}")

    mixed = np.eye(n, dtype=complex) / n
    image = apply(choi, mixed)
    dev_b = abs(image.trace().real - k / n)
    if dev_b > mixed_tol:
        failures.append(f"Tr Phi(I/N) deviates from k/N by {dev_b}")

    omega = spec.omega
    if omega is None:
        omega = np.eye(n, dtype=complex) / n
    omega_residual = hs_norm(image - (k / n) * omega)
    if omega_residual > omega_tol:
        failures.append(f"image differs from (k/N) omega by {omega_residual}")

    if k == 0:
        image_is_density = bool(hs_norm(image) <= omega_tol)
        if not image_is_density:
            failures.append("zero map has a nonzero image")
    else:
        normalized = image / (k / n)
        image_is_density = classify(normalized, tol=1e-8) in (
            StateKind.DENSITY,
            StateKind.SUBTRACIAL_DENSITY,
        )
        if not image_is_density:
            failures.append("Phi(I/N)/(k/N) is not a density matrix")

    return ExtremalReport(
        n=n,
        zeta=spec.zeta,
        n_random=n_random,
        projected_trace_dev=dev_a,
        mixed_trace_dev=dev_b,
        omega_residual=omega_residual,
        image_is_density=image_is_density,
        passed=not failures,
        failures=tuple(failures),
    )


# -- JSON wire formats ---------------------------------------------------------


def choi_to_json(choi: ChoiForm) -> dict:
    return {"n": choi.n, "sigma": matrix_to_json(choi.sigma)}


def choi_from_json(obj: dict) -> ChoiForm:
    return ChoiForm(n=int(obj["n"]), sigma=matrix_from_json(obj["sigma"]))


def kraus_to_json(ks: KrausSet) -> dict:
    return {"n": ks.n, "operators": [matrix_to_json(a) for a in ks.operators]}


def kraus_from_json(obj: dict) -> KrausSet:
    return KrausSet(
        n=int(obj["n"]),
        operators=tuple(matrix_from_json(a) for a in obj["operators"]),
    )
