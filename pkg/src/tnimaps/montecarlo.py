"""Monte-Carlo cross-validation of the closed forms: volume-ratio estimates
against exact rationals, goodness-of-fit of sampled spectra against the exact
densities, and the cone scaling law.

Every pass/fail decision uses a pre-registered threshold (z bound, KS
distance or chi-square p-value) that never depends on the observed data;
suites run with fixed seeds so results are reproducible.  Bernoulli
estimators carry their success counts, so partial results from different
stream ids merge associatively by summing counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import stats

from .linalg import partial_trace
from .measures import (
    box_sub_ratio,
    density_polar_3,
    polar_jacobian,
    radial_cdf_2,
    tni_fraction,
)
from .sampling import Sampler, SamplerConfig

__all__ = [
    "McReport",
    "HistogramTest",
    "PolarReport",
    "merge_bernoulli",
    "ks_statistic",
    "estimate_box_fraction",
    "estimate_tni_acceptance",
    "radial_ks",
    "test_radial_density_2",
    "test_polar_density_3",
    "test_scaling_lemma1",
    "test_cone_height",
]

Z_MAX = 4.0


@dataclass(frozen=True)
class McReport:
    """Bernoulli Monte-Carlo estimate checked against an exact target."""

    estimate: float
    stderr: float
    n_samples: int
    target: float
    z_score: float
    passed: bool
    successes: int = 0


@dataclass(frozen=True)
class HistogramTest:
    """Goodness-of-fit outcome; ``ks_statistic`` holds the KS distance for
    one-dimensional tests and the chi-square statistic for binned ones."""

    bins: int
    ks_statistic: float
    threshold: float
    passed: bool
    p_value: float | None = None


@dataclass(frozen=True)
class PolarReport:
    """Outcome of the two-dimensional polar density test."""

    chi_square: HistogramTest
    sector_counts: tuple[int, int, int]
    sector_dev_sigma: float
    sector_passed: bool
    purity_dev_max: float
    purity_passed: bool
    passed: bool


def _bernoulli_report(
    successes: int, n: int, target: float, z_max: float = Z_MAX
) -> McReport:
    p_hat = successes / n
    stderr = math.sqrt(p_hat * (1.0 - p_hat) / n)
    if stderr > 0:
        z = (p_hat - target) / stderr
    else:
        z = 0.0 if p_hat == target else math.inf
    return McReport(
        estimate=p_hat,
        stderr=stderr,
        n_samples=n,
        target=target,
        z_score=z,
        passed=abs(z) <= z_max,
        successes=successes,
    )


def merge_bernoulli(reports: Sequence[McReport], z_max: float = Z_MAX) -> McReport:
    """Combine Bernoulli reports from independent streams by summing counts."""
    if not reports:
        raise ValueError("nothing to merge")
    target = reports[0].target
    if any(r.target != target for r in reports):
        raise ValueError("reports target different quantities")
    n = sum(r.n_samples for r in reports)
    successes = sum(r.successes for r in reports)
    return _bernoulli_report(successes, n, target, z_max)


def ks_statistic(sample: np.ndarray, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """One-sample Kolmogorov-Smirnov distance against an exact CDF."""
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    f = np.asarray(cdf(x), dtype=float)
    d_plus = float((np.arange(1, n + 1) / n - f).max())
    d_minus = float((f - np.arange(0, n) / n).max())
    return max(d_plus, d_minus)


def _chunks(total: int, chunk: int) -> Iterable[int]:
    done = 0
    while done < total:
        m = min(chunk, total - done)
        done += m
        yield m


# ---------------------------------------------------------------------------
# Volume-ratio estimators.
# ---------------------------------------------------------------------------


def estimate_box_fraction(
    n: int,
    k: int,
    n_samples: int,
    config: SamplerConfig | None = None,
    z_max: float = Z_MAX,
    chunk: int = 100_000,
) -> McReport:
    """Fraction of induced-measure subnormalized spectra inside the
    sub-tracial cube (every eigenvalue at most 1/N), against the exact
    ``box_sub_ratio(N, K)``."""
    sampler = Sampler(config)
    target = float(box_sub_ratio(n, k))
    successes = 0
    for m in _chunks(n_samples, chunk):
        sigma = sampler.subnormalized_matrix(n, k, m)
        lam_max = np.linalg.eigvalsh(sigma)[..., -1]
        successes += int((lam_max <= 1.0 / n).sum())
    return _bernoulli_report(successes, n_samples, target, z_max)


def estimate_tni_acceptance(
    n: int,
    n_samples: int,
    config: SamplerConfig | None = None,
    z_max: float = Z_MAX,
    chunk: int = 10_000,
) -> McReport:
    """Acceptance rate of the TNI rejection sampler over ``n_samples``
    proposals, against the exact ``tni_fraction(N)``.

    The proposal law (HS measure on subnormalized states of size N^2) sends
    the reduced spectrum to the induced cone law with environment N^3, so the
    exact acceptance probability is ``box_sub_ratio(N, N^3)``.
    """
    sampler = Sampler(config)
    target = float(tni_fraction(n))
    successes = 0
    for m in _chunks(n_samples, chunk):
        _, accept = sampler._tni_proposals(n, m)
        successes += int(accept.sum())
    return _bernoulli_report(successes, n_samples, target, z_max)


# ---------------------------------------------------------------------------
# Distribution tests.
# ---------------------------------------------------------------------------


def radial_ks(r_values: np.ndarray, threshold: float = 0.01) -> HistogramTest:
    """KS test of signed radial coordinates against the exact reduced-qubit
    radial law."""
    d = ks_statistic(r_values, radial_cdf_2)
    return HistogramTest(
        bins=int(np.asarray(r_values).size),
        ks_statistic=d,
        threshold=threshold,
        passed=d < threshold,
    )


def test_radial_density_2(
    n_samples: int,
    config: SamplerConfig | None = None,
    threshold: float = 0.01,
    chunk: int = 100_000,
) -> HistogramTest:
    """Sample reduced-qubit spectra and KS-test the signed radial coordinate.

    ``r = (lambda_1 - lambda_2)/2`` of the partial trace of an HS-random
    two-qubit state; an independent fair sign restores the exchange symmetry
    that descending eigenvalue order removes.
    """
    sampler = Sampler(config)
    parts = []
    for m in _chunks(n_samples, chunk):
        lam = sampler.reduced_spectrum(2, 2, m)
        r = (lam[:, 0] - lam[:, 1]) / 2.0
        signs = sampler.rng.integers(0, 2, size=m) * 2 - 1
        parts.append(r * signs)
    return radial_ks(np.concatenate(parts), threshold)


def _polar_fold(lam_desc: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Canonical (r, phi) in the fundamental domain from descending spectra."""
    x = lam_desc[:, 0] - 1.0 / 3.0
    y = (lam_desc[:, 1] - lam_desc[:, 2]) / math.sqrt(3.0)
    r = np.hypot(x, y)
    phi = np.arctan2(y, x)
    return r, phi


def _polar_bin_probabilities(
    r_edges: np.ndarray, phi_edges: np.ndarray, nodes: int = 32
) -> np.ndarray:
    """Exact-law probability of each (r, phi) bin in the fundamental domain.

    Integrates ``6 * density * sqrt(3)/2 * r`` per bin with tensor
    Gauss-Legendre quadrature (the density is smooth, the folding multiplies
    the law by the order of the symmetry group).
    """
    x, w = np.polynomial.legendre.leggauss(nodes)
    out = np.empty((len(r_edges) - 1, len(phi_edges) - 1))
    for i in range(len(r_edges) - 1):
        r0, r1 = r_edges[i], r_edges[i + 1]
        rn = (r1 - r0) / 2 * x + (r1 + r0) / 2
        rw = (r1 - r0) / 2 * w
        for j in range(len(phi_edges) - 1):
            p0, p1 = phi_edges[j], phi_edges[j + 1]
            pn = (p1 - p0) / 2 * x + (p1 + p0) / 2
            pw = (p1 - p0) / 2 * w
            rr, pp = np.meshgrid(rn, pn, indexing="ij")
            vals = 6.0 * density_polar_3(rr, pp) * polar_jacobian(rr)
            out[i, j] = float(np.einsum("i,j,ij->", rw, pw, vals))
    return out


def test_polar_density_3(
    n_samples: int,
    config: SamplerConfig | None = None,
    p_threshold: float = 1e-4,
    bins_r: int = 10,
    bins_phi: int = 6,
    min_expected: float = 5.0,
    sector_sigma: float = 4.0,
    purity_tol: float = 1e-10,
    chunk: int = 20_000,
) -> PolarReport:
    """Binned chi-square test of reduced-qutrit spectra against the exact
    polar density, plus the three-fold sector symmetry and the per-sample
    purity identity ``3/2 r^2 + 1/3 = sum lambda_i^2``.

    Sector labels come from ranking the first-row magnitudes of the
    eigenvectors, which under the unitarily invariant law is a uniform
    relabeling independent of the spectrum, so the three phi sectors must
    receive equal counts.
    """
    sampler = Sampler(config)
    r_all, phi_all = [], []
    sector_counts = np.zeros(3, dtype=np.int64)
    purity_dev = 0.0
    for m in _chunks(n_samples, chunk):
        rho = sampler.reduced_density(3, 3, m)
        vals, vecs = np.linalg.eigh(rho)
        lam_desc = vals[:, ::-1]
        v_desc = vecs[:, :, ::-1]
        r, phi = _polar_fold(lam_desc)
        r_all.append(r)
        phi_all.append(phi)

        dev = np.abs(1.5 * r * r + 1.0 / 3.0 - (lam_desc**2).sum(axis=1))
        purity_dev = max(purity_dev, float(dev.max()))

        weights = np.abs(v_desc[:, 0, :])
        perm = np.argsort(weights, axis=1)
        labeled = np.take_along_axis(lam_desc, perm, axis=1)
        yy = (labeled[:, 2] - labeled[:, 0]) / math.sqrt(3.0)
        xx = labeled[:, 1] - 1.0 / 3.0
        full_phi = np.mod(np.arctan2(yy, xx), 2.0 * math.pi)
        sectors = np.minimum((full_phi / (2.0 * math.pi / 3.0)).astype(int), 2)
        sector_counts += np.bincount(sectors, minlength=3)

    r = np.concatenate(r_all)
    phi = np.concatenate(phi_all)

    r_edges = np.linspace(0.0, 2.0 / 3.0, bins_r + 1)
    phi_edges = np.linspace(0.0, math.pi / 3.0, bins_phi + 1)
    probs = _polar_bin_probabilities(r_edges, phi_edges)
    observed, _, _ = np.histogram2d(r, phi, bins=[r_edges, phi_edges])

    keep = probs * n_samples >= min_expected
    exp_cells = list(probs[keep] * n_samples)
    obs_cells = list(observed[keep])
    tail_prob = 1.0 - probs[keep].sum()
    tail_obs = n_samples - observed[keep].sum()
    if tail_prob * n_samples >= min_expected:
        exp_cells.append(tail_prob * n_samples)
        obs_cells.append(tail_obs)
    else:
        # Fold the thin tail into the smallest kept cell.
        idx = int(np.argmin(exp_cells))
        exp_cells[idx] += tail_prob * n_samples
        obs_cells[idx] += tail_obs
    exp_arr = np.asarray(exp_cells)
    obs_arr = np.asarray(obs_cells)
    chi2 = float(((obs_arr - exp_arr) ** 2 / exp_arr).sum())
    dof = len(exp_cells) - 1
    p_value = float(stats.chi2.sf(chi2, dof))
    chi_test = HistogramTest(
        bins=len(exp_cells),
        ks_statistic=chi2,
        threshold=p_threshold,
        passed=p_value > p_threshold,
        p_value=p_value,
    )

    sector_sd = math.sqrt(n_samples * (1.0 / 3.0) * (2.0 / 3.0))
    sector_dev = float(np.abs(sector_counts - n_samples / 3.0).max() / sector_sd)
    sector_passed = sector_dev <= sector_sigma
    purity_passed = purity_dev <= purity_tol

    return PolarReport(
        chi_square=chi_test,
        sector_counts=tuple(int(c) for c in sector_counts),
        sector_dev_sigma=sector_dev,
        sector_passed=sector_passed,
        purity_dev_max=purity_dev,
        purity_passed=purity_passed,
        passed=chi_test.passed and sector_passed and purity_passed,
    )


# ---------------------------------------------------------------------------
# Scaling and geometry checks.
# ---------------------------------------------------------------------------


def test_scaling_lemma1(
    n: int,
    k: int,
    n_samples: int,
    config: SamplerConfig | None = None,
    grid: Sequence[float] = (0.25, 0.5, 0.75, 1.0),
    sigma_max: float = 5.0,
    chunk: int = 100_000,
) -> McReport:
    """Check the cone scaling law: the sampled subnormalized trace satisfies
    ``P(Tr sigma <= t) = t^(NK)``.

    Every grid point must sit within ``sigma_max`` binomial standard
    deviations of its target; the report carries the worst point.
    """
    sampler = Sampler(config)
    counts = np.zeros(len(grid), dtype=np.int64)
    for m in _chunks(n_samples, chunk):
        sigma = sampler.subnormalized_matrix(n, k, m)
        traces = np.trace(sigma, axis1=-2, axis2=-1).real
        for i, t in enumerate(grid):
            counts[i] += int((traces <= t).sum())
    worst = None
    for i, t in enumerate(grid):
        p0 = t ** (n * k)
        p_hat = counts[i] / n_samples
        sd = math.sqrt(p0 * (1.0 - p0) / n_samples)
        if sd > 0:
            z = (p_hat - p0) / sd
        else:
            z = 0.0 if p_hat == p0 else math.inf
        if worst is None or abs(z) > abs(worst[0]):
            worst = (z, p_hat, p0, counts[i])
    z, p_hat, p0, successes = worst
    return McReport(
        estimate=p_hat,
        stderr=math.sqrt(p0 * (1.0 - p0) / n_samples),
        n_samples=n_samples,
        target=p0,
        z_score=z,
        passed=abs(z) <= sigma_max,
        successes=int(successes),
    )


def test_cone_height(
    n: int,
    n_samples: int,
    config: SamplerConfig | None = None,
    envelope: float | None = None,
    chunk: int = 100_000,
) -> McReport:
    """Minimum HS distance to the zero matrix over sampled density matrices.

    The distance is ``sqrt(Tr rho^2) >= 1/sqrt(N)``, with equality only at
    the maximally mixed state; with ``envelope`` set, additionally require
    the observed minimum to be within ``envelope`` above the bound.
    """
    sampler = Sampler(config)
    best = math.inf
    for m in _chunks(n_samples, chunk):
        rho = sampler.density_induced(n, n, m)
        eigs = np.linalg.eigvalsh(rho)
        d = np.sqrt((eigs**2).sum(axis=1))
        best = min(best, float(d.min()))
    target = 1.0 / math.sqrt(n)
    passed = best >= target - 1e-12
    if envelope is not None:
        passed = passed and best <= target + envelope
    return McReport(
        estimate=best,
        stderr=0.0,
        n_samples=n_samples,
        target=target,
        z_score=0.0,
        passed=passed,
        successes=0,
    )
