"""Seeded simulators for the supported model families.

Families: finite-order linear processes, VARMA, constant-conditional-
correlation GARCH with vector (ccc) or full-matrix (jeantheau)
coefficients, factor models driven by ccc factors, and matrix
exponential GARCH. Each family has a stationarity/moment validator and
a recursion runner that can resume from a carried state, which is how
:func:`break_panel` realizes a parameter change: the post-change
recursion starts from the pre-change terminal state on the same
innovation stream.

Innovations are multivariate gaussian with a user covariance; the model
spec types keep an ``innovation`` slot for future laws.

Determinism: identical (spec, n, burn_in, seed) produce bitwise
identical panels. Each purpose reads its own substream -- primary
innovations from SeedSequence([seed, 0]), factor-model idiosyncratic
noise from SeedSequence([seed, 1]) -- so stream consumption does not
depend on how a run is segmented.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SimulationOverflowError, SpecValidationError
from .linalg import _sym_exp_matrix, spectral_norm, unvech, vech, vech_dim
from .panel import TimeSeriesPanel

__all__ = [
    "LinearProcessSpec",
    "VarmaSpec",
    "CccGarchSpec",
    "JeantheauSpec",
    "FactorSpec",
    "ExpGarchSpec",
    "ModelSpec",
    "GammaJEstimate",
    "check_gamma_c",
    "check_gamma_j",
    "check_varma_stationary",
    "check_expgarch",
    "validate_spec",
    "simulate",
    "break_panel",
    "DEFAULT_BURN_IN",
]

DEFAULT_BURN_IN = 500
VOLATILITY_CAP = 1e150
LOG_CAP = 345.0  # log of the volatility cap, for the exponential family


def _as_matrix(x, d1: int, d2: int, name: str) -> np.ndarray:
    m = np.asarray(x, dtype=float)
    if m.shape != (d1, d2):
        raise ValueError(f"{name} must have shape ({d1}, {d2}), got {m.shape}")
    return m


def _as_psi(x, d: int) -> np.ndarray:
    m = _as_matrix(x, d, d, "psi")
    if not np.allclose(m, m.T):
        raise ValueError("psi must be symmetric")
    return m


def _check_gaussian(innovation: str) -> None:
    if innovation != "gaussian":
        raise ValueError(f"unsupported innovation law {innovation!r}")


@dataclass
class LinearProcessSpec:
    """y_j = sum_{l=0}^{L} coeffs[l] eps_{j-l}, finite coefficient list."""

    d: int
    coeffs: list[np.ndarray]
    psi: np.ndarray | None = None
    innovation: str = "gaussian"

    def __post_init__(self):
        _check_gaussian(self.innovation)
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if not self.coeffs:
            raise ValueError("need at least the lag-0 coefficient")
        self.coeffs = [_as_matrix(c, self.d, self.d, f"coeffs[{i}]") for i, c in enumerate(self.coeffs)]
        self.psi = np.eye(self.d) if self.psi is None else _as_psi(self.psi, self.d)


@dataclass
class VarmaSpec:
    """y_j = sum A_l y_{j-l} + eps_j + sum B_l eps_{j-l}."""

    d: int
    ar: list[np.ndarray] = field(default_factory=list)
    ma: list[np.ndarray] = field(default_factory=list)
    psi: np.ndarray | None = None
    innovation: str = "gaussian"

    def __post_init__(self):
        _check_gaussian(self.innovation)
        self.ar = [_as_matrix(a, self.d, self.d, f"ar[{i}]") for i, a in enumerate(self.ar)]
        self.ma = [_as_matrix(b, self.d, self.d, f"ma[{i}]") for i, b in enumerate(self.ma)]
        self.psi = np.eye(self.d) if self.psi is None else _as_psi(self.psi, self.d)

    @property
    def p(self) -> int:
        return len(self.ar)

    @property
    def q(self) -> int:
        return len(self.ma)


def _as_coef_vector(x, d: int, name: str) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.shape != (d,):
        raise ValueError(f"{name} must have shape ({d},), got {v.shape}")
    if np.any(v < 0):
        raise ValueError(f"{name} must be componentwise nonnegative")
    return v


@dataclass
class CccGarchSpec:
    """Coordinatewise GARCH recursions coupled only through the innovation
    covariance: sigma2_j = omega + sum alpha_l * sigma2_{j-l} + sum beta_l * y2_{j-l}."""

    d: int
    omega: np.ndarray
    alpha: list[np.ndarray] = field(default_factory=list)
    beta: list[np.ndarray] = field(default_factory=list)
    psi: np.ndarray | None = None
    innovation: str = "gaussian"

    def __post_init__(self):
        _check_gaussian(self.innovation)
        self.omega = np.asarray(self.omega, dtype=float)
        if self.omega.shape != (self.d,) or np.any(self.omega <= 0):
            raise ValueError("omega must be a strictly positive d-vector")
        self.alpha = [_as_coef_vector(a, self.d, f"alpha[{i}]") for i, a in enumerate(self.alpha)]
        self.beta = [_as_coef_vector(b, self.d, f"beta[{i}]") for i, b in enumerate(self.beta)]
        self.psi = np.eye(self.d) if self.psi is None else _as_psi(self.psi, self.d)

    @property
    def p(self) -> int:
        return len(self.alpha)

    @property
    def q(self) -> int:
        return len(self.beta)


def _as_nonneg_matrix(x, d: int, name: str) -> np.ndarray:
    m = _as_matrix(x, d, d, name)
    if np.any(m < 0):
        raise ValueError(f"{name} must be entrywise nonnegative")
    return m


@dataclass
class JeantheauSpec:
    """Full-matrix variant: sigma2_j = omega + sum A_l sigma2_{j-l} + sum B_l y2_{j-l}."""

    d: int
    omega: np.ndarray
    a_mats: list[np.ndarray] = field(default_factory=list)
    b_mats: list[np.ndarray] = field(default_factory=list)
    psi: np.ndarray | None = None
    innovation: str = "gaussian"

    def __post_init__(self):
        _check_gaussian(self.innovation)
        self.omega = np.asarray(self.omega, dtype=float)
        if self.omega.shape != (self.d,) or np.any(self.omega <= 0):
            raise ValueError("omega must be a strictly positive d-vector")
        self.a_mats = [_as_nonneg_matrix(a, self.d, f"a_mats[{i}]") for i, a in enumerate(self.a_mats)]
        self.b_mats = [_as_nonneg_matrix(b, self.d, f"b_mats[{i}]") for i, b in enumerate(self.b_mats)]
        self.psi = np.eye(self.d) if self.psi is None else _as_psi(self.psi, self.d)

    @property
    def p(self) -> int:
        return len(self.a_mats)

    @property
    def q(self) -> int:
        return len(self.b_mats)


@dataclass
class FactorSpec:
    """y_j = loadings z_j + xi_j with ccc-GARCH factors z and iid noise xi."""

    d: int
    loadings: np.ndarray
    factors: CccGarchSpec
    noise_cov: np.ndarray | None = None

    def __post_init__(self):
        self.loadings = _as_matrix(self.loadings, self.d, self.factors.d, "loadings")
        if self.factors.d >= self.d:
            raise ValueError("factor dimension must be smaller than d")
        self.noise_cov = (
            np.eye(self.d) if self.noise_cov is None else _as_psi(self.noise_cov, self.d)
        )


@dataclass
class ExpGarchSpec:
    """Matrix exponential GARCH.

    State recursion on x_j = vech[log H_j - C]:
    ``x_j = a x_{j-1} + sum_l b_mats[l] eps_{j-l}
    + sum_l f_mats[l] (|eps_{j-l}| - E|eps|)``, then H_j = exp(C + unvech(x_j))
    and y_j = H_j^{1/2} eps_j. Positive definiteness needs no parameter
    constraints.
    """

    d: int
    c: np.ndarray
    a: np.ndarray
    b_mats: list[np.ndarray] = field(default_factory=list)
    f_mats: list[np.ndarray] = field(default_factory=list)
    psi: np.ndarray | None = None
    innovation: str = "gaussian"

    def __post_init__(self):
        _check_gaussian(self.innovation)
        vdim = vech_dim(self.d)
        self.c = _as_matrix(self.c, self.d, self.d, "c")
        if not np.allclose(self.c, self.c.T):
            raise ValueError("c must be symmetric")
        self.a = _as_matrix(self.a, vdim, vdim, "a")
        self.b_mats = [_as_matrix(b, vdim, self.d, f"b_mats[{i}]") for i, b in enumerate(self.b_mats)]
        self.f_mats = [_as_matrix(f, vdim, self.d, f"f_mats[{i}]") for i, f in enumerate(self.f_mats)]
        self.psi = np.eye(self.d) if self.psi is None else _as_psi(self.psi, self.d)

    @property
    def q(self) -> int:
        return max(len(self.b_mats), len(self.f_mats), 1)


ModelSpec = (
    LinearProcessSpec | VarmaSpec | CccGarchSpec | JeantheauSpec | FactorSpec | ExpGarchSpec
)


# ---------------------------------------------------------------------------
# stationarity / moment validators


def check_gamma_c(spec: CccGarchSpec) -> float:
    """Fourth-moment contraction constant of the ccc recursion (gaussian
    innovations, closed form). Below 1 certifies the test's dependence
    and moment conditions."""
    r = max(spec.p, spec.q, 1)
    m2 = np.diag(spec.psi)
    m4 = 3.0 * m2**2
    total = np.zeros(spec.d)
    for ell in range(r):
        a = spec.alpha[ell] if ell < spec.p else np.zeros(spec.d)
        b = spec.beta[ell] if ell < spec.q else np.zeros(spec.d)
        total += np.sqrt(a**2 + 2.0 * a * b * m2 + b**2 * m4)
    return float(total.max())


@dataclass(frozen=True)
class GammaJEstimate:
    """Monte Carlo estimate of the matrix-coefficient contraction constant."""

    value: float
    se: float
    draws: int

    def certifies(self, margin_se: float = 3.0) -> bool:
        return self.value + margin_se * self.se < 1.0


def check_gamma_j(
    spec: JeantheauSpec, alpha_norm: float = 2.0, draws: int = 100_000, seed: int = 0
) -> GammaJEstimate:
    """Monte Carlo estimate of ``sum_l (E |A_l + B_l diag(eps*eps)|_E^alpha)^(1/alpha)``
    with its standard error (delta method, shared draws across lags)."""
    if alpha_norm < 1.0:
        raise ValueError("alpha_norm must be >= 1")
    r = max(spec.p, spec.q, 1)
    rng = np.random.default_rng(np.random.SeedSequence(seed % 2**64))
    chol = np.linalg.cholesky(spec.psi)
    xs = np.empty((r, draws))
    block = 20_000
    for start in range(0, draws, block):
        stop = min(start + block, draws)
        eps = rng.standard_normal((stop - start, spec.d)) @ chol.T
        eps2 = eps**2
        for ell in range(r):
            a = spec.a_mats[ell] if ell < spec.p else np.zeros((spec.d, spec.d))
            b = spec.b_mats[ell] if ell < spec.q else np.zeros((spec.d, spec.d))
            m = a[None, :, :] + b[None, :, :] * eps2[:, None, :]
            s = np.linalg.svd(m, compute_uv=False)[:, 0]
            xs[ell, start:stop] = s**alpha_norm
    means = xs.mean(axis=1)
    value = float(np.sum(means ** (1.0 / alpha_norm)))
    grad = (1.0 / alpha_norm) * means ** (1.0 / alpha_norm - 1.0)
    cov = np.atleast_2d(np.cov(xs)) if r > 1 else np.array([[float(np.var(xs[0], ddof=1))]])
    se = float(np.sqrt(max(grad @ cov @ grad, 0.0) / draws))
    return GammaJEstimate(value=value, se=se, draws=draws)


def check_varma_stationary(spec: VarmaSpec) -> bool:
    """True iff the AR companion matrix has spectral radius < 1 - 1e-8."""
    p = spec.p
    if p == 0:
        return True
    d = spec.d
    comp = np.zeros((d * p, d * p))
    for ell in range(p):
        comp[:d, ell * d : (ell + 1) * d] = spec.ar[ell]
    if p > 1:
        comp[d:, : d * (p - 1)] = np.eye(d * (p - 1))
    radius = float(np.abs(np.linalg.eigvals(comp)).max())
    return radius < 1.0 - 1e-8


def check_expgarch(spec: ExpGarchSpec) -> bool:
    """True iff the state transition matrix has spectral norm < 1."""
    return spectral_norm(spec.a) < 1.0


def validate_spec(spec: ModelSpec) -> None:
    """Raise :class:`SpecValidationError` when the family validator fails."""
    if isinstance(spec, LinearProcessSpec):
        return  # finite coefficient lists are always summable
    if isinstance(spec, VarmaSpec):
        if not check_varma_stationary(spec):
            raise SpecValidationError("AR polynomial has roots on or inside the unit circle")
        return
    if isinstance(spec, CccGarchSpec):
        g = check_gamma_c(spec)
        if not g < 1.0:
            raise SpecValidationError(f"gamma_C = {g:.6g} >= 1")
        return
    if isinstance(spec, JeantheauSpec):
        est = check_gamma_j(spec, draws=20_000)
        if not est.certifies():
            raise SpecValidationError(
                f"gamma_J estimate {est.value:.6g} (se {est.se:.2g}) does not certify < 1"
            )
        return
    if isinstance(spec, FactorSpec):
        validate_spec(spec.factors)
        return
    if isinstance(spec, ExpGarchSpec):
        if not check_expgarch(spec):
            raise SpecValidationError("state transition matrix has spectral norm >= 1")
        return
    raise TypeError(f"unknown spec type {type(spec).__name__}")


# ---------------------------------------------------------------------------
# recursion runners with carried state


def _chol(psi: np.ndarray) -> np.ndarray:
    return np.linalg.cholesky(psi)


class _Streams:
    """Named RNG substreams, one per draw purpose."""

    __slots__ = ("main", "noise")

    def __init__(self, seed: int):
        base = seed % 2**64
        self.main = np.random.default_rng(np.random.SeedSequence([base, 0]))
        self.noise = np.random.default_rng(np.random.SeedSequence([base, 1]))


def _draw(rng: np.random.Generator, steps: int, chol: np.ndarray) -> np.ndarray:
    return rng.standard_normal((steps, chol.shape[0])) @ chol.T


def _guard(values: np.ndarray, step: int) -> None:
    if np.max(values) > VOLATILITY_CAP or not np.all(np.isfinite(values)):
        raise SimulationOverflowError(
            f"volatility recursion exceeded {VOLATILITY_CAP:g} at step {step}", index=step
        )


@dataclass
class _LinearState:
    eps_hist: np.ndarray  # (L, d), most recent lag first


def _run_linear(spec: LinearProcessSpec, steps: int, streams: _Streams, state: _LinearState | None):
    lags = len(spec.coeffs) - 1
    if state is None:
        state = _LinearState(np.zeros((lags, spec.d)))
    hist = state.eps_hist
    if hist.shape[0] != lags:  # lag depth changed across a break
        pad = np.zeros((max(lags - hist.shape[0], 0), spec.d))
        hist = np.vstack([hist[:lags], pad])
    eps = _draw(streams.main, steps, _chol(spec.psi))
    ext = np.vstack([hist[::-1], eps]) if lags else eps
    y = np.zeros((steps, spec.d))
    for ell, c in enumerate(spec.coeffs):
        y += ext[lags - ell : lags - ell + steps] @ c.T
    new_hist = ext[::-1][:lags].copy() if lags else np.zeros((0, spec.d))
    return y, _LinearState(new_hist)


@dataclass
class _VarmaState:
    y_hist: list[np.ndarray]
    eps_hist: list[np.ndarray]


def _run_varma(spec: VarmaSpec, steps: int, streams: _Streams, state: _VarmaState | None):
    d, p, q = spec.d, spec.p, spec.q
    if state is None:
        state = _VarmaState([np.zeros(d) for _ in range(p)], [np.zeros(d) for _ in range(q)])
    y_hist = [h.copy() for h in state.y_hist[:p]] + [np.zeros(d)] * max(p - len(state.y_hist), 0)
    e_hist = [h.copy() for h in state.eps_hist[:q]] + [np.zeros(d)] * max(q - len(state.eps_hist), 0)
    eps = _draw(streams.main, steps, _chol(spec.psi))
    out = np.empty((steps, d))
    for j in range(steps):
        y = eps[j].copy()
        for ell in range(p):
            y += spec.ar[ell] @ y_hist[ell]
        for ell in range(q):
            y += spec.ma[ell] @ e_hist[ell]
        out[j] = y
        if p:
            y_hist.insert(0, y)
            y_hist.pop()
        if q:
            e_hist.insert(0, eps[j])
            e_hist.pop()
    return out, _VarmaState(y_hist, e_hist)


@dataclass
class _GarchState:
    sig2_hist: list[np.ndarray]
    ysq_hist: list[np.ndarray]


def _garch_state(spec, state: _GarchState | None, p: int, q: int) -> _GarchState:
    if state is None:
        return _GarchState([spec.omega.copy() for _ in range(p)], [np.zeros(spec.d) for _ in range(q)])
    sig = [h.copy() for h in state.sig2_hist[:p]] + [spec.omega.copy()] * max(p - len(state.sig2_hist), 0)
    ysq = [h.copy() for h in state.ysq_hist[:q]] + [np.zeros(spec.d)] * max(q - len(state.ysq_hist), 0)
    return _GarchState(sig, ysq)


def _run_ccc(spec: CccGarchSpec, steps: int, streams: _Streams, state: _GarchState | None):
    p, q = spec.p, spec.q
    st = _garch_state(spec, state, p, q)
    eps = _draw(streams.main, steps, _chol(spec.psi))
    out = np.empty((steps, spec.d))
    for j in range(steps):
        sig2 = spec.omega.copy()
        for ell in range(p):
            sig2 += spec.alpha[ell] * st.sig2_hist[ell]
        for ell in range(q):
            sig2 += spec.beta[ell] * st.ysq_hist[ell]
        _guard(sig2, j)
        y = np.sqrt(sig2) * eps[j]
        out[j] = y
        if p:
            st.sig2_hist.insert(0, sig2)
            st.sig2_hist.pop()
        if q:
            st.ysq_hist.insert(0, y * y)
            st.ysq_hist.pop()
    return out, st


def _run_jeantheau(spec: JeantheauSpec, steps: int, streams: _Streams, state: _GarchState | None):
    p, q = spec.p, spec.q
    st = _garch_state(spec, state, p, q)
    eps = _draw(streams.main, steps, _chol(spec.psi))
    out = np.empty((steps, spec.d))
    for j in range(steps):
        sig2 = spec.omega.copy()
        for ell in range(p):
            sig2 += spec.a_mats[ell] @ st.sig2_hist[ell]
        for ell in range(q):
            sig2 += spec.b_mats[ell] @ st.ysq_hist[ell]
        _guard(sig2, j)
        y = np.sqrt(sig2) * eps[j]
        out[j] = y
        if p:
            st.sig2_hist.insert(0, sig2)
            st.sig2_hist.pop()
        if q:
            st.ysq_hist.insert(0, y * y)
            st.ysq_hist.pop()
    return out, st


@dataclass
class _FactorState:
    factor: _GarchState | None


def _run_factor(spec: FactorSpec, steps: int, streams: _Streams, state: _FactorState | None):
    inner = state.factor if state is not None else None
    z, new_inner = _run_ccc(spec.factors, steps, streams, inner)
    xi = _draw(streams.noise, steps, _chol(spec.noise_cov))
    return z @ spec.loadings.T + xi, _FactorState(new_inner)


@dataclass
class _ExpGarchState:
    logh: np.ndarray  # log H of the last completed step
    eps_hist: list[np.ndarray]  # most recent first


def _run_expgarch(spec: ExpGarchSpec, steps: int, streams: _Streams, state: _ExpGarchState | None):
    d, q = spec.d, spec.q
    if state is None:
        state = _ExpGarchState(spec.c.copy(), [np.zeros(d) for _ in range(q)])
    hist = [h.copy() for h in state.eps_hist[:q]] + [np.zeros(d)] * max(q - len(state.eps_hist), 0)
    logh = state.logh.copy()
    mean_abs = np.sqrt(2.0 / np.pi) * np.sqrt(np.diag(spec.psi))
    eps = _draw(streams.main, steps, _chol(spec.psi))
    out = np.empty((steps, d))
    for j in range(steps):
        x = spec.a @ vech(logh - spec.c)
        for ell, b in enumerate(spec.b_mats):
            x += b @ hist[ell]
        for ell, f in enumerate(spec.f_mats):
            x += f @ (np.abs(hist[ell]) - mean_abs)
        if np.max(np.abs(x)) > LOG_CAP or not np.all(np.isfinite(x)):
            raise SimulationOverflowError(
                f"log-volatility recursion exceeded its cap at step {j}", index=j
            )
        logh = spec.c + unvech(x)
        out[j] = _sym_exp_matrix(logh, scale=0.5) @ eps[j]
        hist.insert(0, eps[j])
        hist.pop()
    return out, _ExpGarchState(logh, hist)


_RUNNERS = {
    LinearProcessSpec: _run_linear,
    VarmaSpec: _run_varma,
    CccGarchSpec: _run_ccc,
    JeantheauSpec: _run_jeantheau,
    FactorSpec: _run_factor,
    ExpGarchSpec: _run_expgarch,
}


def _run(spec: ModelSpec, steps: int, streams: _Streams, state=None):
    return _RUNNERS[type(spec)](spec, steps, streams, state)


# ---------------------------------------------------------------------------
# public simulation entry points


def simulate(
    spec: ModelSpec,
    n: int,
    burn_in: int = DEFAULT_BURN_IN,
    seed: int = 0,
    allow_nonstationary: bool = False,
) -> TimeSeriesPanel:
    """n rows from the stationary recursion after discarding ``burn_in``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if burn_in < 0:
        raise ValueError("burn_in must be >= 0")
    if not allow_nonstationary:
        validate_spec(spec)
    rows, _ = _run(spec, burn_in + n, _Streams(seed))
    return TimeSeriesPanel(rows[burn_in:])


def break_panel(
    pre: ModelSpec,
    post: ModelSpec,
    n: int,
    theta: float,
    burn_in: int = DEFAULT_BURN_IN,
    seed: int = 0,
    allow_nonstationary: bool = False,
) -> TimeSeriesPanel:
    """A panel with a single parameter change at row floor(theta * n).

    Rows 1..k* come from the pre-change spec; the post-change recursion
    resumes from the pre-change terminal state (volatility and lag
    buffers carried over) on the same innovation stream, so
    ``pre == post`` reproduces :func:`simulate` exactly.
    """
    if type(pre) is not type(post):
        raise ValueError("pre and post specs must belong to the same family")
    if pre.d != post.d:
        raise ValueError("pre and post specs must have the same dimension")
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0, 1)")
    k_star = int(np.floor(theta * n))
    if not 1 <= k_star < n:
        raise ValueError(f"break index floor(theta*n) = {k_star} must lie in [1, n)")
    validate_spec(pre)
    if not allow_nonstationary:
        validate_spec(post)
    streams = _Streams(seed)
    rows_pre, state = _run(pre, burn_in + k_star, streams)
    rows_post, _ = _run(post, n - k_star, streams, state=state)
    return TimeSeriesPanel(np.vstack([rows_pre[burn_in:], rows_post]))
