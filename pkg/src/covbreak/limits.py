"""Null limit distributions of the two test statistics.

The integral-type statistic converges to a sum of integrated squared
Brownian bridges ("omega" law); the supremum-type statistic to the
supremum of the same sum of squares ("lambda" law). Both are indexed by
the vech dimension ``vdim``.

omega: the law equals ``sum_{k>=1} chi2_vdim(k) / (k pi)^2`` via the
Karhunen-Loeve expansion of the bridge. Its CDF is computed by numerical
inversion (Gil-Pelaez) of the characteristic function truncated at
``truncation`` eigenterms, with the (deterministic, analytically known)
mean of the discarded tail added back as a shift. An independent series
expansion in parabolic cylinder functions is available as a cross-check.

lambda: no analytic CDF is implemented. Quantiles come from Monte Carlo
of the supremum over a uniform grid. The sum of squares of independent
bridges is Markov, and its grid marginals are sampled exactly through
noncentral chi-square transitions, which is orders of magnitude cheaper
than building each bridge from cumulative sums. The direct construction
is kept (:func:`lambda_sup_samples_direct`) as a cross-check.

Standardizations: (omega - vdim/6)/sqrt(vdim/45) and
(lambda - vdim/4)/sqrt(vdim/8).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.stats import norm

__all__ = [
    "OmegaLaw",
    "LambdaLaw",
    "StandardizedQuantile",
    "omega_mean",
    "omega_sd",
    "lambda_mean",
    "lambda_sd",
    "standardize",
    "destandardize",
    "omega_cdf",
    "omega_cdf_series",
    "check_series_agreement",
    "omega_quantile",
    "omega_normal_approx_quantile",
    "lambda_sup_samples",
    "lambda_sup_samples_direct",
    "lambda_quantile",
    "lambda_cdf_mc",
    "normal_coverage",
    "standardized_quantile",
]

DEFAULT_SEED = 12345

# Replications are consumed in fixed-size batches, one RNG substream per
# (seed, batch index); results are independent of how batches are scheduled.
_SUP_BATCH = 20_000


@dataclass(frozen=True)
class OmegaLaw:
    """Configuration of the integral-statistic limit law."""

    vdim: int
    method: str = "cf_inversion"  # or "series"
    truncation: int = 1000

    def __post_init__(self):
        if self.vdim < 1:
            raise ValueError("vdim must be >= 1")
        if self.method not in ("cf_inversion", "series"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.truncation < 1:
            raise ValueError("truncation must be >= 1")


@dataclass(frozen=True)
class LambdaLaw:
    """Monte Carlo configuration of the supremum-statistic limit law."""

    vdim: int
    grid_points: int = 4097
    replications: int = 100_000
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.vdim < 1:
            raise ValueError("vdim must be >= 1")
        if self.grid_points < 3:
            raise ValueError("grid_points must be >= 3")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")


@dataclass(frozen=True)
class StandardizedQuantile:
    """A quantile together with its standardized value."""

    stat: str  # "omega" | "lambda"
    vdim: int
    level: float
    raw: float
    standardized: float


def omega_mean(vdim: int) -> float:
    return vdim / 6.0


def omega_sd(vdim: int) -> float:
    return float(np.sqrt(vdim / 45.0))


def lambda_mean(vdim: int) -> float:
    return vdim / 4.0


def lambda_sd(vdim: int) -> float:
    return float(np.sqrt(vdim / 8.0))


def standardize(stat: str, vdim: int, raw: float) -> float:
    if stat == "omega":
        return (raw - omega_mean(vdim)) / omega_sd(vdim)
    if stat == "lambda":
        return (raw - lambda_mean(vdim)) / lambda_sd(vdim)
    raise ValueError(f"unknown statistic {stat!r}")


def destandardize(stat: str, vdim: int, standardized: float) -> float:
    if stat == "omega":
        return omega_mean(vdim) + standardized * omega_sd(vdim)
    if stat == "lambda":
        return lambda_mean(vdim) + standardized * lambda_sd(vdim)
    raise ValueError(f"unknown statistic {stat!r}")


# ---------------------------------------------------------------------------
# omega law: characteristic-function inversion


@lru_cache(maxsize=8)
def _eigenvalues(truncation: int) -> tuple[np.ndarray, float]:
    """Bridge eigenvalues 1/(k pi)^2 up to truncation, plus the tail sum."""
    k = np.arange(1, truncation + 1)
    lam = 1.0 / (k * np.pi) ** 2
    tail = 1.0 / 6.0 - float(lam.sum())
    return lam, tail


def _law(law: OmegaLaw | int) -> OmegaLaw:
    return law if isinstance(law, OmegaLaw) else OmegaLaw(int(law))


def _omega_tail_bound(vdim: int, xs: float, lam: np.ndarray) -> float:
    """Chernoff bound on P(sum lam_k chi2_vdim(k) > xs), optimized over t."""
    t_max = 0.5 / lam[0]
    best = 0.0
    for frac in np.linspace(0.05, 0.999, 40):
        t = frac * t_max
        log_mgf = -0.5 * vdim * float(np.sum(np.log1p(-2.0 * lam * t)))
        best = min(best, -t * xs + log_mgf)
    return float(np.exp(best))


def _omega_cdf_cf(vdim: int, x: float, truncation: int) -> float:
    lam, tail = _eigenvalues(truncation)
    xs = x - vdim * tail  # discarded eigenterms enter as their mean
    if xs <= 0.0:
        return 0.0
    if _omega_tail_bound(vdim, xs, lam) < 1e-8:
        return 1.0  # provably beyond quadrature resolution
    lam_sum = float(lam.sum())

    def integrand(u: float) -> float:
        if u == 0.0:
            return vdim * lam_sum - xs
        a = 2.0 * lam * u
        theta = 0.5 * vdim * float(np.sum(np.arctan(a)))
        log_rho = 0.25 * vdim * float(np.sum(np.log1p(a * a)))
        return np.sin(theta - u * xs) * np.exp(-log_rho) / u

    # cutoff where the integrand envelope 1/rho is below ~4e-18
    u_hi = 1.0
    while 0.25 * vdim * float(np.sum(np.log1p((2.0 * lam * u_hi) ** 2))) < 40.0:
        u_hi *= 2.0
    # subdivision budget grows with the oscillation count of sin(theta - u x)
    limit = int(min(200_000, max(2000, 4.0 * u_hi * xs / (2.0 * np.pi))))
    val, _ = integrate.quad(integrand, 0.0, u_hi, limit=limit, epsabs=1e-8, epsrel=1e-10)
    return min(1.0, max(0.0, 0.5 - val / np.pi))


def omega_cdf(law: OmegaLaw | int, x: float) -> float:
    """P(omega law <= x) for x > 0."""
    law = _law(law)
    if not x > 0.0:
        raise ValueError("x must be positive")
    if law.method == "series":
        return omega_cdf_series(law.vdim, x)
    return _omega_cdf_cf(law.vdim, float(x), law.truncation)


def omega_cdf_series(vdim: int, x: float, terms: int = 50) -> float:
    """Series expansion of the omega CDF in parabolic cylinder functions.

    Valid for vdim >= 2. Evaluated in arbitrary precision; used as an
    independent cross-check of the characteristic-function route.
    """
    import mpmath as mp

    if vdim < 2:
        raise ValueError("series expansion requires vdim >= 2")
    if not x > 0.0:
        raise ValueError("x must be positive")
    with mp.workdps(30):
        xm = mp.mpf(x)
        half = mp.mpf(vdim) / 2
        nu = mp.mpf(vdim - 2) / 2
        pre = mp.mpf(2) ** (mp.mpf(vdim + 1) / 2) / (mp.sqrt(mp.pi) * xm ** (mp.mpf(vdim) / 4))
        total = mp.mpf(0)
        for j in range(terms):
            ratio = mp.gamma(j + half) / (mp.factorial(j) * mp.gamma(half))
            decay = mp.e ** (-((j + mp.mpf(vdim) / 4) ** 2) / xm)
            z = (2 * j + half) / mp.sqrt(xm)
            total += ratio * decay * mp.pcfd(nu, z)
        return float(min(1.0, max(0.0, pre * total)))


def check_series_agreement(vdim: int, x: float, tol: float = 1e-3) -> float:
    """Compare the two omega CDF routes at x; the absolute gap is returned.

    A disagreement above ``tol`` raises, which indicates a numerical
    problem in one of the routes.
    """
    a = _omega_cdf_cf(vdim, float(x), 1000)
    b = omega_cdf_series(vdim, float(x))
    gap = abs(a - b)
    if gap > tol:
        raise ArithmeticError(
            f"omega CDF routes disagree at vdim={vdim}, x={x}: cf={a}, series={b}"
        )
    return gap


def omega_quantile(law: OmegaLaw | int, level: float) -> float:
    """x with omega_cdf(law, x) == level, by bisection (tolerance 1e-8 in x)."""
    law = _law(law)
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    return _omega_quantile_cached(law.vdim, float(level), law.truncation, law.method)


@lru_cache(maxsize=4096)
def _omega_quantile_cached(vdim: int, level: float, truncation: int, method: str) -> float:
    law = OmegaLaw(vdim, method=method, truncation=truncation)
    lo = 0.0
    hi = omega_mean(vdim) + 20.0 * omega_sd(vdim)
    if omega_cdf(law, hi) < level:
        raise ArithmeticError(
            f"quantile bracketing failed at vdim={vdim}, level={level}; "
            "truncation too small"
        )
    while hi - lo > 1e-8:
        mid = 0.5 * (lo + hi)
        if omega_cdf(law, mid) < level:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def omega_normal_approx_quantile(vdim: int, level: float) -> float:
    """Large-vdim normal approximation: mean + z_level * sd."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    return omega_mean(vdim) + float(norm.ppf(level)) * omega_sd(vdim)


# ---------------------------------------------------------------------------
# lambda law: Monte Carlo over a uniform grid


def _sup_batch_markov(vdim: int, grid_points: int, nreps: int, rng: np.random.Generator) -> np.ndarray:
    """Exact samples of the grid supremum of the sum of squared bridges.

    The squared norm of a vdim-dimensional Brownian bridge is Markov on
    the grid i/G: given the value r at step i, the next value is
    sigma2 * noncentral_chi2(vdim, r * c) with the bridge-conditional
    coefficients below. Noncentral chi-square draws use the exact
    decomposition chi2_{vdim-1} + (Z + sqrt(nonc))^2.
    """
    g = grid_points - 1
    i = np.arange(g - 1, dtype=float)
    sigma2 = (1.0 / g) * (g - i - 1.0) / (g - i)
    lam_coef = g * (g - i - 1.0) / (g - i)
    shape = (vdim - 1) / 2.0
    r = np.zeros(nreps)
    peak = np.zeros(nreps)
    for step in range(g - 1):  # the final step returns to 0 exactly
        nonc = r * lam_coef[step]
        central = 2.0 * rng.standard_gamma(shape, size=nreps)
        z = rng.standard_normal(nreps)
        r = sigma2[step] * (central + (z + np.sqrt(nonc)) ** 2)
        np.maximum(peak, r, out=peak)
    return peak


@lru_cache(maxsize=6)
def lambda_sup_samples(law: LambdaLaw) -> np.ndarray:
    """Monte Carlo samples of the grid supremum, deterministic given the law.

    Replications are generated in fixed batches of 20_000 with one RNG
    substream per (seed, batch); the concatenation order is by batch
    index, independent of any parallel scheduling.
    """
    out = np.empty(law.replications)
    pos = 0
    batch_index = 0
    while pos < law.replications:
        take = min(_SUP_BATCH, law.replications - pos)
        rng = np.random.default_rng(
            np.random.SeedSequence([law.seed % 2**64, batch_index])
        )
        out[pos : pos + take] = _sup_batch_markov(law.vdim, law.grid_points, take, rng)
        pos += take
        batch_index += 1
    out.setflags(write=False)
    return out


def lambda_sup_samples_direct(
    vdim: int, grid_points: int, nreps: int, seed: int = DEFAULT_SEED
) -> np.ndarray:
    """Grid supremum via explicit bridges (cumulative sum + endpoint
    correction), one RNG substream per replication.

    Much slower than :func:`lambda_sup_samples`; retained as an
    independent construction of the same grid law for cross-checks.
    """
    g = grid_points - 1
    t = np.arange(1, grid_points, dtype=float) / g
    out = np.empty(nreps)
    for rep in range(nreps):
        rng = np.random.default_rng(np.random.SeedSequence([seed % 2**64, rep]))
        z = rng.standard_normal((vdim, g))
        w = np.cumsum(z, axis=1)
        b = w - w[:, -1][:, None] * t[None, :]
        out[rep] = np.einsum("ij,ij->j", b, b).max() / g
    return out


def lambda_quantile(law: LambdaLaw, level: float) -> float:
    """Monte Carlo quantile of the supremum law; deterministic given the law."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    return float(np.quantile(lambda_sup_samples(law), level))


def lambda_cdf_mc(law: LambdaLaw, x: float) -> tuple[float, float]:
    """Monte Carlo estimate of P(lambda law <= x) and its standard error."""
    samples = lambda_sup_samples(law)
    p = float(np.mean(samples <= x))
    se = float(np.sqrt(p * (1.0 - p) / samples.size))
    return p, se


def normal_coverage(vdim: int, level: float, stat: str, law: LambdaLaw | None = None) -> float:
    """P(standardized law <= z_level): the coverage of the normal approximation."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    z = float(norm.ppf(level))
    if stat == "omega":
        return omega_cdf(vdim, destandardize("omega", vdim, z))
    if stat == "lambda":
        law = law if law is not None else LambdaLaw(vdim)
        if law.vdim != vdim:
            raise ValueError("law.vdim does not match vdim")
        p, _ = lambda_cdf_mc(law, destandardize("lambda", vdim, z))
        return p
    raise ValueError(f"unknown statistic {stat!r}")


def standardized_quantile(
    stat: str, vdim: int, level: float, law: LambdaLaw | OmegaLaw | None = None
) -> StandardizedQuantile:
    """Quantile of either law together with its standardized value."""
    if stat == "omega":
        raw = omega_quantile(law if law is not None else vdim, level)
    elif stat == "lambda":
        lam_law = law if isinstance(law, LambdaLaw) else LambdaLaw(vdim)
        raw = lambda_quantile(lam_law, level)
    else:
        raise ValueError(f"unknown statistic {stat!r}")
    return StandardizedQuantile(stat, vdim, level, raw, standardize(stat, vdim, raw))
