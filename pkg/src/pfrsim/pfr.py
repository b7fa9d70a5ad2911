"""Exact index sampling over shared randomness and the index distribution.

Two samplers produce the transmitted index K with its accepted sample:

* ``run_pfr`` runs the selection rule directly: arrival times of a
  rate-one Poisson process are divided by the density ratio at i.i.d.
  reference draws, and K is the argmin.  The argmin ranges over
  infinitely many candidates, so iteration stops either exactly (bounded
  ratio) or once the expected number of future improvements falls below
  a caller-supplied ``delta`` (unbounded ratio).
* ``sample_index_exact`` draws the accepted sample from the target first
  and then the index from its conditional geometric law with success
  probability beta(u); the joint law matches the selection rule exactly
  and the cost is O(1) per draw, which is the only tractable route when
  E[K] is astronomically large.

``index_pmf`` integrates the conditional geometric law against the
target density on a cached quadrature grid, reporting the truncated pmf,
the exact tail mass, and optional tail certificates (checkpoint
probabilities plus moment bounds) that let downstream code bound
power sums over the untruncated tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import DistributionPair, renyi_divergence
from .errors import (
    DomainError,
    IndexOverflowError,
    IterationCapError,
    NegativeTailError,
    NonConvergenceError,
)
from .numerics import LOG2E, QuadratureSpec, integrate, log2_sum_exp, quadrature_grid

_UINT64_MAX = float(2**64 - 1)

#: Moment orders probed by the approximate stopping rule in run_pfr.
_STOP_MOMENT_ORDERS = (2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64)

#: Moment orders stored as tail certificates on IndexPmf.
_CERT_MOMENT_ORDERS = (1.0, 2.0, 4.0, 8.0, 16.0, 32.0)


def derive_stream(root_seed: int, i: int) -> np.random.Generator:
    """Stream i of a batch: seeded by root_seed XOR i."""
    return np.random.default_rng(root_seed ^ i)


@dataclass(frozen=True)
class PfrOutcome:
    """One run of a sampler: index, accepted sample, work done, and how it stopped."""

    index: int
    accepted: float | int
    candidates_examined: int
    termination: str  # "exact" | "approximate"
    delta: float | None = None

    def __post_init__(self) -> None:
        if self.index < 1:
            raise DomainError("index must be >= 1")
        if self.candidates_examined < self.index:
            raise DomainError("candidates_examined must be >= index")
        if self.termination not in ("exact", "approximate"):
            raise DomainError(f"unknown termination {self.termination!r}")


@dataclass(frozen=True)
class TailCertificate:
    """Data licensing upper bounds on sums over the truncated tail.

    ``checkpoints`` holds (k, P(K=k)) on a geometric ladder beyond the
    truncation point; the pmf is nonincreasing, so each block of indices
    is dominated by its leading checkpoint.  ``moment_log2_bounds`` holds
    (r, log2 B_r) with E[K^r] <= B_r, derived from closed-form divergences,
    which bounds the remainder beyond the last checkpoint.
    """

    checkpoints: tuple[tuple[int, float], ...]
    moment_log2_bounds: tuple[tuple[float, float], ...]


@dataclass
class IndexPmf:
    """Truncated index distribution: P(K=k) for k=1..N plus explicit tail mass."""

    probs: np.ndarray
    tail_mass: float
    tail_certificate: TailCertificate | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        self.probs = np.asarray(self.probs, dtype=float)
        if np.any(self.probs < 0.0):
            raise DomainError("pmf entries must be nonnegative")
        if self.tail_mass < -1e-9:
            raise NegativeTailError(f"tail mass {self.tail_mass} below -1e-9")
        total = float(self.probs.sum()) + self.tail_mass
        if abs(total - 1.0) > 1e-9:
            raise NonConvergenceError(
                f"pmf plus tail sums to {total}, off by {total - 1.0:.3e}"
            )
        self.tail_mass = max(self.tail_mass, 0.0)

    @property
    def n_max(self) -> int:
        return len(self.probs)

    def to_csv(self, f) -> None:
        """Write rows ``k,prob`` followed by a final ``tail,<tail_mass>`` row."""
        close = False
        if isinstance(f, (str, bytes)) or hasattr(f, "__fspath__"):
            f = open(f, "w", newline="")
            close = True
        try:
            f.write("k,prob\n")
            for k, p in enumerate(self.probs, start=1):
                f.write(f"{k},{p:.17g}\n")
            f.write(f"tail,{self.tail_mass:.17g}\n")
        finally:
            if close:
                f.close()

    @classmethod
    def from_csv(cls, f) -> "IndexPmf":
        close = False
        if isinstance(f, (str, bytes)) or hasattr(f, "__fspath__"):
            f = open(f, "r", newline="")
            close = True
        try:
            header = f.readline().strip()
            if header != "k,prob":
                raise DomainError(f"unexpected header {header!r}")
            probs = []
            tail = None
            for line in f:
                key, _, value = line.strip().partition(",")
                if key == "tail":
                    tail = float(value)
                else:
                    probs.append(float(value))
            if tail is None:
                raise DomainError("missing tail row")
            return cls(np.array(probs), tail)
        finally:
            if close:
                f.close()


def _log1m_from_log_beta(log_beta_vals: np.ndarray) -> np.ndarray:
    """log(1 - beta) from log(beta); -1e300 stands in for -inf at beta == 1."""
    b = np.exp(np.minimum(log_beta_vals, 0.0))
    with np.errstate(divide="ignore"):
        out = np.log1p(-b)
    return np.where(np.isneginf(out), -1e300, out)


def log_beta(pair: DistributionPair, u, spec: QuadratureSpec | None = None):
    """Natural log of the geometric success probability beta(u).

    beta(u)^-1 = E_{U~Q} max{dP/dQ(u), dP/dQ(U)}.  Monotone density
    ratios use the closed form (one CDF plus one survival term, in log
    space); non-monotone continuous pairs integrate the max directly;
    finite pairs sum exactly.  Accepts scalars or arrays.
    """
    if pair.is_finite_kind:
        lb_support = _log_beta_finite(pair)
        return lb_support[np.asarray(u, dtype=int)]
    direction = pair.ratio_monotonicity()
    uu = np.asarray(u, dtype=float)
    if direction == "constant":
        return np.zeros_like(uu)
    if direction == "nonincreasing":
        a = pair.p.log_cdf(uu)
        b = pair.log_ratio(uu) + pair.q.log_sf(uu)
        return -np.logaddexp(a, b)
    if direction == "nondecreasing":
        a = pair.log_ratio(uu) + pair.q.log_cdf(uu)
        b = pair.p.log_sf(uu)
        return -np.logaddexp(a, b)
    scalar = uu.ndim == 0
    vals = np.array(
        [_log_beta_quadrature(pair, float(x), spec) for x in np.atleast_1d(uu)]
    )
    return float(vals[0]) if scalar else vals


def _log_beta_quadrature(
    pair: DistributionPair, u: float, spec: QuadratureSpec | None
) -> float:
    log_ru = float(pair.log_ratio(u))

    def integrand(x: float) -> float:
        lr = max(float(pair.log_ratio(x)), log_ru)
        return math.exp(lr + float(pair.q.log_density(x)))

    return -math.log(integrate(integrand, -math.inf, math.inf, spec))


def _log_beta_finite(pair: DistributionPair) -> np.ndarray:
    p = np.asarray(pair.p.probs)
    q = np.asarray(pair.q.probs)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(q > 0.0, p / q, 0.0)
    expected_max = np.array([float(np.sum(q * np.maximum(ri, r))) for ri in r])
    with np.errstate(divide="ignore"):
        return -np.log(expected_max)


def beta(pair: DistributionPair, u, spec: QuadratureSpec | None = None) -> float:
    """Geometric success probability beta(u), in (0, 1]."""
    return float(np.exp(log_beta(pair, u, spec)))


def _geometric_index(log_beta_val: float, v: float) -> int:
    """Stable inverse-transform geometric draw: ceil(ln v / ln(1 - beta))."""
    if log_beta_val >= 0.0:
        return 1
    b = math.exp(log_beta_val)
    denom = math.log1p(-b) if b < 1.0 else -math.inf
    if denom == -math.inf:
        return 1
    if denom == 0.0:
        raise IndexOverflowError("beta underflows double precision")
    k = math.ceil(math.log(v) / denom)
    if k > _UINT64_MAX:
        raise IndexOverflowError(
            f"geometric index {k:.3e} exceeds the unsigned 64-bit range"
        )
    return max(int(k), 1)


def sample_index_exact(
    pair: DistributionPair,
    rng: np.random.Generator,
    spec: QuadratureSpec | None = None,
) -> PfrOutcome:
    """Draw (K, U_K) from its exact joint law via the conditional geometric.

    Mandatory for high-divergence pairs where running the selection rule
    is intractable.
    """
    u = pair.p.sample(rng)
    lb = float(log_beta(pair, u, spec))
    v = 1.0 - rng.random()  # in (0, 1]
    k = _geometric_index(lb, v)
    return PfrOutcome(
        index=k, accepted=u, candidates_examined=k, termination="exact"
    )


def sample_indices(
    pair: DistributionPair,
    n: int,
    rng: np.random.Generator,
    spec: QuadratureSpec | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized exact sampler: n draws of (K, U_K).

    Indices are returned as float64 (they can exceed int64 for heavy
    pairs); values above the unsigned 64-bit range raise.  For pairs
    without a monotone density ratio every draw needs its own beta
    quadrature; prefer run_pfr there when the ratio is bounded.
    """
    u = pair.p.sample(rng, n)
    lb = np.asarray(log_beta(pair, u, spec), dtype=float)
    v = 1.0 - rng.random(n)
    log1m = _log1m_from_log_beta(lb)
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.ceil(np.log(v) / log1m)
    k = np.where(np.isfinite(k), k, 1.0)
    k = np.maximum(k, 1.0)
    if np.any(k > _UINT64_MAX):
        raise IndexOverflowError("a geometric index exceeds the unsigned 64-bit range")
    return k, np.asarray(u, dtype=float)


def _stop_moments_log2(pair: DistributionPair) -> list[tuple[int, float]]:
    """(m, log2 E_Q[(dP/dQ)^m]) ladder for the approximate stopping rule."""
    ladder = []
    for m in _STOP_MOMENT_ORDERS:
        d = renyi_divergence(pair, float(m))
        if math.isfinite(d):
            ladder.append((m, (m - 1) * d))
    return ladder


def run_pfr(
    pair: DistributionPair,
    rng: np.random.Generator,
    delta: float = 1e-6,
    max_candidates: int = 10**8,
) -> PfrOutcome:
    """Run the Poisson-process selection rule for one sample.

    Candidate i has arrival time T_i (cumulative unit-rate exponential
    increments) and score T_i / (dP/dQ)(U_i); K is the argmin.  With a
    bounded ratio, iteration stops exactly once no future candidate can
    improve.  Otherwise it stops when the expected number of future
    improvements -- bounded via Markov's inequality applied to the best
    available ratio moment, min_m E[r^m] S^m / ((m-1) T^{m-1}) -- drops
    below ``delta``.
    """
    if not delta > 0.0:
        raise DomainError("delta must be positive")
    log_rmax = pair.log_ratio_sup()
    exact = math.isfinite(log_rmax)
    ladder = None
    if not exact:
        ladder = _stop_moments_log2(pair)
        if not ladder:
            raise DomainError(
                "unbounded density ratio with no finite ratio moment: "
                "no stopping rule applies (use sample_index_exact)"
            )
    log2_delta = math.log2(delta)

    t_last = 0.0
    best_score = math.inf  # natural log of min T_i / r(U_i)
    best_index = 0
    best_u: float | int = 0
    n = 0
    block = 64
    while True:
        if n >= max_candidates:
            raise IterationCapError(
                f"no stopping decision after {n} candidates"
            )
        b = min(block, max_candidates - n)
        gaps = rng.exponential(size=b)
        times = t_last + np.cumsum(gaps)
        t_last = float(times[-1])
        us = pair.q.sample(rng, b)
        log_r = np.asarray(pair.log_ratio(us), dtype=float)
        with np.errstate(invalid="ignore"):
            scores = np.log(times) - log_r
        scores = np.where(np.isnan(scores), math.inf, scores)
        i = int(np.argmin(scores))
        if float(scores[i]) < best_score:
            best_score = float(scores[i])
            best_index = n + i + 1
            best_u = us[i] if not pair.is_finite_kind else int(us[i])
        n += b
        block = min(block * 2, 8192)

        log_t = math.log(t_last)
        if exact:
            if log_t - log_rmax >= best_score:
                return PfrOutcome(
                    index=best_index,
                    accepted=best_u,
                    candidates_examined=n,
                    termination="exact",
                )
        else:
            log2_s = best_score * LOG2E
            log2_t = log_t * LOG2E
            bound = min(
                l2m + m * log2_s - (m - 1) * log2_t - math.log2(m - 1)
                for m, l2m in ladder
            )
            if bound <= log2_delta:
                return PfrOutcome(
                    index=best_index,
                    accepted=best_u,
                    candidates_examined=n,
                    termination="approximate",
                    delta=delta,
                )


def _certificate_checkpoints(n_max: int, ratio: float = 2.0**0.25, max_k: float = 1e12):
    ks = []
    k = float(n_max)
    while k < max_k:
        nk = int(math.ceil(k * ratio))
        if nk <= (ks[-1] if ks else n_max):
            nk = (ks[-1] if ks else n_max) + 1
        ks.append(nk)
        k = k * ratio
    return ks


def _moment_bounds_log2(pair: DistributionPair) -> tuple[tuple[float, float], ...]:
    """(r, log2 B_r) with E[K^r] <= B_r = Gamma(r+1) 4^{r-1} (2^{r D_{r+1}} + 1) + 2^{r-1}."""
    out = []
    for r in _CERT_MOMENT_ORDERS:
        d = renyi_divergence(pair, r + 1.0)
        if not math.isfinite(d):
            continue
        main = (
            math.lgamma(r + 1.0) * LOG2E
            + (2.0 * r - 2.0)
            + log2_sum_exp([r * d, 0.0])
        )
        out.append((r, log2_sum_exp([main, r - 1.0])))
    return tuple(out)


def _index_pmf_finite(pair: DistributionPair, n_max: int) -> IndexPmf:
    p = np.asarray(pair.p.probs)
    lb = _log_beta_finite(pair)
    keep = p > 0.0
    p, lb = p[keep], lb[keep]
    log1m = _log1m_from_log_beta(lb)
    ks = np.arange(1, n_max + 1)
    with np.errstate(over="ignore"):
        probs = np.exp((ks[:, None] - 1) * log1m[None, :] + lb[None, :]) @ p
        tail = float(np.exp(n_max * log1m) @ p)
        checkpoints = tuple(
            (k, float(np.exp((k - 1) * log1m + lb) @ p))
            for k in _certificate_checkpoints(n_max)
        )
    cert = TailCertificate(checkpoints, _moment_bounds_log2(pair))
    return IndexPmf(probs, tail, cert)


def index_pmf(
    pair: DistributionPair,
    n_max: int,
    spec: QuadratureSpec | None = None,
) -> IndexPmf:
    """Truncated pmf of K: P(K=k) for k <= n_max plus the exact tail mass.

    P(K=k) integrates (1-beta(u))^(k-1) beta(u) against the target
    density.  beta is evaluated once per quadrature node and the node
    set is reused across every k (and every tail checkpoint), so the
    whole table costs one grid construction plus dense array products.
    """
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    if pair.is_finite_kind:
        return _index_pmf_finite(pair, n_max)
    spec = spec or QuadratureSpec()

    def make_pilot(k: int):
        def pilot(u: float) -> float:
            lb = float(log_beta(pair, u, spec))
            lp = float(pair.p.log_density(u))
            b = math.exp(min(lb, 0.0))
            if b >= 1.0:
                return math.exp(lp) if k == 1 else 0.0
            return math.exp((k - 1) * math.log1p(-b) + lb + lp)

        return pilot

    def survival_pilot(u: float) -> float:
        lb = float(log_beta(pair, u, spec))
        lp = float(pair.p.log_density(u))
        b = math.exp(min(lb, 0.0))
        if b >= 1.0:
            return 0.0
        return math.exp(n_max * math.log1p(-b) + lp)

    pilot_ks = sorted({1, 4, 16, 64, 256, n_max} | {
        min(int(n_max * 2.0 ** j), 10**12) for j in (5, 10, 15, 20, 25, 30)
    })
    pilots = [make_pilot(k) for k in pilot_ks if k <= n_max]
    pilots.append(survival_pilot)
    pilots.extend(make_pilot(k) for k in pilot_ks if k > n_max)
    nodes, weights = quadrature_grid(pilots, -math.inf, math.inf, spec)

    lb = np.asarray(log_beta(pair, nodes, spec), dtype=float)
    log1m = _log1m_from_log_beta(lb)
    base = weights * np.exp(np.asarray(pair.p.log_density(nodes), dtype=float))

    probs = np.empty(n_max)
    chunk = max(1, int(4e6 // max(len(nodes), 1)))
    with np.errstate(over="ignore"):
        for start in range(0, n_max, chunk):
            ks = np.arange(start + 1, min(start + chunk, n_max) + 1)
            terms = np.exp((ks[:, None] - 1) * log1m[None, :] + lb[None, :])
            probs[start : start + len(ks)] = terms @ base
        tail = float(np.exp(n_max * log1m) @ base)

        checkpoints = tuple(
            (k, float(np.exp((k - 1) * log1m + lb) @ base))
            for k in _certificate_checkpoints(n_max)
        )
    cert = TailCertificate(checkpoints, _moment_bounds_log2(pair))
    return IndexPmf(probs, tail, cert)
