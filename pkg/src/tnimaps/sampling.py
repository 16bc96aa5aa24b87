"""Seedable random generation of Ginibre matrices, density matrices under
Hilbert-Schmidt and induced measures, subnormalized states, and Choi matrices
of completely positive trace-nonincreasing maps.

The generator is numpy's PCG64 seeded through a ``SeedSequence`` with the
stream id as spawn key, so distinct ``stream_id`` values give statistically
independent streams for the same seed.  A :class:`Sampler` instance owns one
stream and is stateful; do not share one instance across threads.  Module
level ``sample_*`` helpers start a fresh stream per call, so the same config
always reproduces the same output.  Bit-level compatibility across library
versions or platforms is not promised; all downstream checks are statistical.

Sampling recipes
----------------
density, induced(N, K)   ``rho = M M^dag / Tr(M M^dag)`` with M an N x K
                         Ginibre matrix (i.i.d. standard complex Gaussian
                         entries).  K = N reproduces the HS measure.
subnormalized(N, K)      ``sigma = a rho`` with ``a = u^(1/(NK))``, u uniform
                         on [0, 1]; the cone scaling makes the trace density
                         proportional to ``t^(NK-1)``, which for K = N is the
                         flat HS measure on the cone over the state set.
tni_choi(N)              rejection: draw sigma from the HS measure on
                         subnormalized states of size N^2 and accept when the
                         partial trace has no eigenvalue above 1/N.
reduced_spectrum(N, K)   spectrum of ``Tr_A(rho_AB)`` with rho_AB HS-random
                         of size NK; equal in law to induced(N, N K^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import ChoiForm
from .linalg import partial_trace
from .states import SubnormalizedState

__all__ = [
    "BadDimensions",
    "RejectionBudgetExceeded",
    "SamplerConfig",
    "Sampler",
    "sample_ginibre",
    "sample_density_induced",
    "sample_subnormalized",
    "sample_tni_choi",
    "sample_reduced_spectrum",
]

DEFAULT_REJECTION_BUDGET = 10**7


class BadDimensions(ValueError):
    """Dimensions outside the sampler's domain (need K >= N >= 1)."""


class RejectionBudgetExceeded(RuntimeError):
    """The rejection sampler used up its proposal budget without accepting."""


@dataclass(frozen=True)
class SamplerConfig:
    """Seed and stream index of a sampler.

    Streams with distinct ``stream_id`` are independent and may run in
    parallel; merged results do not depend on the merge order.
    """

    seed: int = 0
    stream_id: int = 0


class Sampler:
    """Stateful random source bound to one (seed, stream_id) stream."""

    def __init__(self, config: SamplerConfig | None = None):
        self.config = config or SamplerConfig()
        seq = np.random.SeedSequence(
            entropy=self.config.seed, spawn_key=(self.config.stream_id,)
        )
        self.rng = np.random.default_rng(seq)

    # -- raw ensembles ------------------------------------------------------

    def ginibre(self, n: int, m: int, size: int | None = None) -> np.ndarray:
        """Complex Ginibre matrix: independent standard normal real and
        imaginary parts per entry (E|z|^2 = 2).

        With ``size`` set, returns a ``(size, n, m)`` batch.
        """
        if n < 1 or m < 1:
            raise BadDimensions(f"need n, m >= 1, got {n}, {m}")
        shape = (n, m) if size is None else (size, n, m)
        re = self.rng.standard_normal(shape)
        im = self.rng.standard_normal(shape)
        return re + 1j * im

    def haar_vector(self, n: int, size: int | None = None) -> np.ndarray:
        """Unit vector distributed by the unitarily invariant measure."""
        shape = (n,) if size is None else (size, n)
        v = self.rng.standard_normal(shape) + 1j * self.rng.standard_normal(shape)
        return v / np.linalg.norm(v, axis=-1, keepdims=True)

    # -- states -------------------------------------------------------------

    def density_induced(self, n: int, k: int, size: int | None = None) -> np.ndarray:
        """Density matrix under the induced measure with environment K."""
        if n < 1 or k < n:
            raise BadDimensions(f"need K >= N >= 1, got N={n}, K={k}")
        g = self.ginibre(n, k, size)
        w = g @ g.conj().swapaxes(-1, -2)
        tr = np.trace(w, axis1=-2, axis2=-1).real
        return w / tr[..., None, None]

    def subnormalized_matrix(self, n: int, k: int, size: int | None = None) -> np.ndarray:
        """Subnormalized state matrix ``a * rho`` with ``a = u^(1/(NK))``."""
        rho = self.density_induced(n, k, size)
        u = self.rng.uniform(size=() if size is None else (size,))
        a = u ** (1.0 / (n * k))
        return rho * np.asarray(a)[..., None, None]

    def subnormalized(self, n: int, k: int) -> SubnormalizedState:
        """One subnormalized state with cached trace and minimum eigenvalue."""
        return SubnormalizedState.from_matrix(self.subnormalized_matrix(n, k))

    def reduced_density(self, n: int, k: int, size: int | None = None) -> np.ndarray:
        """``Tr_A(rho_AB)`` for an HS-random state of size N*K (A of size K)."""
        if n < 1 or k < 1:
            raise BadDimensions(f"need N, K >= 1, got N={n}, K={k}")
        rho_ab = self.density_induced(n * k, n * k, size)
        return partial_trace(rho_ab, d_a=k, d_b=n, which="A")

    def reduced_spectrum(self, n: int, k: int, size: int | None = None) -> np.ndarray:
        """Descending spectrum of :meth:`reduced_density`; law induced(N, NK^2)."""
        eigs = np.linalg.eigvalsh(self.reduced_density(n, k, size))
        return eigs[..., ::-1]

    # -- maps ---------------------------------------------------------------

    def tni_choi(
        self,
        n: int,
        budget: int = DEFAULT_REJECTION_BUDGET,
        chunk: int = 4096,
    ) -> ChoiForm:
        """Choi matrix of a CP-TNI map under the restricted HS measure.

        Rejection sampling: proposals are HS-random subnormalized states of
        size N^2, accepted exactly when the largest eigenvalue of the partial
        trace is at most 1/N.  The exact acceptance rate is
        ``measures.tni_fraction(N)`` (about 0.0218 for N = 2, about 9e-7 for
        N = 3, so large N needs a generous budget).

        Raises:
            RejectionBudgetExceeded: no proposal accepted within ``budget``.
            BadDimensions: N outside 1..4.
        """
        if not 1 <= n <= 4:
            raise BadDimensions(f"tni_choi supports N in 1..4, got {n}")
        used = 0
        while used < budget:
            m = min(chunk, budget - used)
            sigma, accept = self._tni_proposals(n, m)
            used += m
            hits = np.flatnonzero(accept)
            if hits.size:
                return ChoiForm(
                    n=n, sigma=sigma[hits[0]], is_cp=True, is_tp=None, is_tni=True
                )
        raise RejectionBudgetExceeded(
            f"no acceptance within {budget} proposals (N={n})"
        )

    def _tni_proposals(self, n: int, size: int) -> tuple[np.ndarray, np.ndarray]:
        """One batch of rejection proposals and their acceptance mask."""
        sigma = self.subnormalized_matrix(n * n, n * n, size)
        reduced = partial_trace(sigma, d_a=n, d_b=n, which="A")
        lam_max = np.linalg.eigvalsh(reduced)[..., -1]
        return sigma, lam_max <= 1.0 / n


# -- one-shot helpers (fresh stream per call, reproducible per config) -------


def sample_ginibre(n: int, m: int, config: SamplerConfig | None = None) -> np.ndarray:
    return Sampler(config).ginibre(n, m)


def sample_density_induced(n: int, k: int, config: SamplerConfig | None = None) -> np.ndarray:
    return Sampler(config).density_induced(n, k)


def sample_subnormalized(n: int, k: int, config: SamplerConfig | None = None) -> SubnormalizedState:
    return Sampler(config).subnormalized(n, k)


def sample_tni_choi(
    n: int,
    config: SamplerConfig | None = None,
    budget: int = DEFAULT_REJECTION_BUDGET,
) -> ChoiForm:
    return Sampler(config).tni_choi(n, budget=budget)


def sample_reduced_spectrum(n: int, k: int, config: SamplerConfig | None = None) -> np.ndarray:
    return Sampler(config).reduced_spectrum(n, k)
