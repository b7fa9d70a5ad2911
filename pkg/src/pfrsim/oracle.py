"""Brute-force verification of the theory's inequalities.

Monte Carlo checks use the exact conditional-geometric sampler and pass
with three-standard-error margins; summation checks are direct partial
sums plus analytic tail bounds.  Every check returns a report with a
``passed`` flag; ``run_suite`` evaluates the built-in pair matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import lb1, lb2, optimize_ub
from .codes import OneToOne, PowerLaw, Universal, campbell_cost
from .distributions import (
    DistributionPair,
    Finite,
    Gaussian,
    Laplace,
    kl_divergence,
    renyi_divergence,
)
from .errors import DomainError, OrderError
from .pfr import IndexPmf, _log_beta_finite, derive_stream, index_pmf, sample_indices

#: Matrix of distribution pairs exercised by the full suite.  Pairs with a
#: mean gap of 10 or more are deliberately absent: their geometric success
#: probabilities fall below ~1e-19, pushing indices past the unsigned
#: 64-bit range, and the alpha-moment estimator variance explodes as the
#: order approaches one.
DEFAULT_PAIRS: tuple[tuple[str, DistributionPair], ...] = (
    ("finite:0.9,0.1|finite:0.5,0.5", DistributionPair(Finite((0.9, 0.1)), Finite((0.5, 0.5)))),
    ("finite:0.5,0.5|finite:0.25,0.75", DistributionPair(Finite((0.5, 0.5)), Finite((0.25, 0.75)))),
    ("finite:0.99,0.01|finite:0.5,0.5", DistributionPair(Finite((0.99, 0.01)), Finite((0.5, 0.5)))),
    ("normal:0,1|normal:1,1", DistributionPair(Gaussian(0, 1), Gaussian(1, 1))),
    ("normal:0,1|normal:2,1", DistributionPair(Gaussian(0, 1), Gaussian(2, 1))),
    ("normal:0,1|normal:5,1", DistributionPair(Gaussian(0, 1), Gaussian(5, 1))),
    ("laplace:0,1|laplace:1,1", DistributionPair(Laplace(0, 1), Laplace(1, 1))),
    ("laplace:0,1|laplace:3,1", DistributionPair(Laplace(0, 1), Laplace(3, 1))),
    ("laplace:0,1|laplace:5,1", DistributionPair(Laplace(0, 1), Laplace(5, 1))),
)

CHECK_NAMES = ("geometric", "moments", "logmoment", "code", "soundness", "band")


@dataclass(frozen=True)
class MomentReport:
    """Empirical alpha-moment of the index against its two-sided band."""

    alpha: float
    empirical_moment: float
    floor: float
    cap: float
    n_samples: int
    std_error: float

    def __post_init__(self) -> None:
        if self.floor > self.cap:
            raise DomainError("moment band is empty; bounds are inconsistent")

    @property
    def passed(self) -> bool:
        margin = 3.0 * self.std_error
        return (
            self.floor - margin
            <= self.empirical_moment
            <= self.cap + margin
        )


@dataclass(frozen=True)
class LogMomentReport:
    """Empirical mean of log2 K against divergence plus one bit."""

    empirical: float
    bound: float
    n_samples: int
    std_error: float

    @property
    def passed(self) -> bool:
        return self.empirical <= self.bound + 3.0 * self.std_error


@dataclass(frozen=True)
class GeometricMomentReport:
    """Direct r-th moment of a geometric law against its closed-form cap."""

    p: float
    r: float
    n_terms: int
    moment_sum: float
    tail_bound: float
    bound: float

    @property
    def passed(self) -> bool:
        return self.moment_sum + self.tail_bound <= self.bound * (1.0 + 1e-12)


@dataclass(frozen=True)
class CheckReport:
    """One PASS/FAIL line of the verification suite."""

    check: str
    subject: str
    alpha: float | None
    passed: bool
    details: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        alpha = "-" if self.alpha is None else f"{self.alpha:g}"
        return f"{status} {self.check} {self.subject} {alpha} {self.details}"


def verify_moment_bounds(
    pair: DistributionPair,
    alpha: float,
    n_samples: int,
    rng: np.random.Generator,
    permutation: np.ndarray | None = None,
) -> MomentReport:
    """Estimate E[K^alpha] and place it inside its proved band.

    ``permutation`` optionally relabels indices through a bijection before
    taking the moment (the lower bound holds for any relabeling); entries
    beyond the permutation's range map to themselves.
    """
    if not 0.0 < alpha < 1.0:
        raise OrderError(f"alpha must lie in (0, 1), got {alpha}")
    d = renyi_divergence(pair, alpha + 1.0)
    scale = 2.0 ** (alpha * d)
    k, _ = sample_indices(pair, n_samples, rng)
    if permutation is not None:
        small = k <= len(permutation)
        k = k.copy()
        k[small] = permutation[k[small].astype(np.int64) - 1]
    x = k**alpha
    emp = float(np.mean(x))
    se = float(np.std(x) / math.sqrt(n_samples))
    return MomentReport(
        alpha=alpha,
        empirical_moment=emp,
        floor=scale / (1.0 + alpha),
        cap=scale + alpha,
        n_samples=n_samples,
        std_error=se,
    )


def verify_log_moment(
    pair: DistributionPair, n_samples: int, rng: np.random.Generator
) -> LogMomentReport:
    """Estimate E[log2 K] against D(P||Q) + 1."""
    k, _ = sample_indices(pair, n_samples, rng)
    logk = np.log2(k)
    return LogMomentReport(
        empirical=float(np.mean(logk)),
        bound=kl_divergence(pair) + 1.0,
        n_samples=n_samples,
        std_error=float(np.std(logk) / math.sqrt(n_samples)),
    )


def verify_geometric_moment(
    p: float, r: float, n_terms: int = 10**6
) -> GeometricMomentReport:
    """Directly sum E[X^r] for X geometric(p) and compare with
    2^(r-1) (Gamma(r+1)/p^r + 1)."""
    if not 0.0 < p < 1.0:
        raise DomainError("p must lie in (0, 1)")
    if r < 1.0:
        raise DomainError("r must be >= 1")
    ks = np.arange(1, n_terms + 1, dtype=float)
    log_terms = r * np.log(ks) + math.log(p) + (ks - 1.0) * math.log1p(-p)
    moment = float(np.exp(log_terms).sum())
    # beyond n the term ratio is at most exp(r/(n+1)) (1-p) < 1
    rho = math.exp(r / (n_terms + 1.0)) * (1.0 - p)
    if rho < 1.0:
        log_next = r * math.log(n_terms + 1.0) + math.log(p) + n_terms * math.log1p(-p)
        tail = math.exp(log_next) / (1.0 - rho) if log_next > -745.0 else 0.0
    else:
        tail = math.inf
    bound = 2.0 ** (r - 1.0) * (math.exp(math.lgamma(r + 1.0) - r * math.log(p)) + 1.0)
    return GeometricMomentReport(
        p=p, r=r, n_terms=n_terms, moment_sum=moment, tail_bound=tail, bound=bound
    )


def _exact_finite_pmf(pair: DistributionPair, cap: int = 2 * 10**6) -> IndexPmf:
    """Truncate a finite pair's index law where the tail underflows to zero."""
    lb = _log_beta_finite(pair)
    probs = np.asarray(pair.p.probs)
    rates = [
        -math.log1p(-math.exp(b)) if math.exp(b) < 1.0 else math.inf
        for b, w in zip(lb, probs)
        if w > 0.0
    ]
    rate = min(rates)
    n = 16 if math.isinf(rate) else min(int(745.0 / rate) + 2, cap)
    return index_pmf(pair, n)


def verify_lb_via_optimal_code(
    pair: DistributionPair,
    alpha_grid=(0.3, 0.5, 0.7, 0.9),
) -> list[CheckReport]:
    """Exact index law of a small finite pair: every code's order-t cost
    must clear both lower bounds.

    Costs are evaluated under the optimal one-to-one lengths and under
    prefix codes; the pmf is sorted nonincreasing first (the one-to-one
    optimum assumes it).
    """
    if not isinstance(pair.p, Finite) or len(pair.p.probs) > 12:
        raise DomainError("exact verification needs a finite pair with support <= 12")
    pmf = _exact_finite_pmf(pair)
    ordered = IndexPmf(np.sort(pmf.probs)[::-1], pmf.tail_mass)
    label = f"finite:{','.join(f'{x:g}' for x in pair.p.probs)}"
    reports = []
    for alpha in alpha_grid:
        t = (1.0 - alpha) / alpha
        floor = max(lb1(pair, alpha), lb2(pair, alpha))
        for lf, lf_name in (
            (OneToOne(), "onetoone"),
            (PowerLaw(0.5), "powerlaw:0.5"),
            (Universal(0.5), "universal:0.5"),
        ):
            cost = campbell_cost(ordered, lf, t).value
            reports.append(
                CheckReport(
                    check="code",
                    subject=f"{label}/{lf_name}",
                    alpha=alpha,
                    passed=cost >= floor - 1e-9,
                    details=f"cost={cost:.4f} floor={floor:.4f}",
                )
            )
    return reports


def _check_geometric() -> list[CheckReport]:
    reports = []
    for p in (0.1, 0.5, 0.9):
        for r in (1.0, 1.5, 2.0, 3.0):
            rep = verify_geometric_moment(p, r)
            reports.append(
                CheckReport(
                    check="geometric",
                    subject=f"p={p},r={r}",
                    alpha=None,
                    passed=rep.passed,
                    details=f"sum={rep.moment_sum:.6g} cap={rep.bound:.6g}",
                )
            )
    return reports


def _check_moments(seed: int, n_samples: int) -> list[CheckReport]:
    reports = []
    for i, (label, pair) in enumerate(DEFAULT_PAIRS):
        rng = derive_stream(seed, 100 + i)
        rep = verify_moment_bounds(pair, 0.5, n_samples, rng)
        reports.append(
            CheckReport(
                check="moments",
                subject=label,
                alpha=0.5,
                passed=rep.passed,
                details=(
                    f"emp={rep.empirical_moment:.5g} "
                    f"band=[{rep.floor:.5g},{rep.cap:.5g}] "
                    f"se={rep.std_error:.2g}"
                ),
            )
        )
    # relabeling through a bijection keeps the lower bound valid
    label, pair = DEFAULT_PAIRS[3]
    perm_rng = derive_stream(seed, 199)
    perm = perm_rng.permutation(10**4) + 1
    rep = verify_moment_bounds(pair, 0.5, n_samples, derive_stream(seed, 198), perm)
    reports.append(
        CheckReport(
            check="moments",
            subject=label + "/permuted",
            alpha=0.5,
            passed=rep.empirical_moment >= rep.floor - 3.0 * rep.std_error,
            details=f"emp={rep.empirical_moment:.5g} floor={rep.floor:.5g}",
        )
    )
    return reports


def _check_logmoment(seed: int, n_samples: int) -> list[CheckReport]:
    reports = []
    for i, (label, pair) in enumerate(DEFAULT_PAIRS):
        rng = derive_stream(seed, 200 + i)
        rep = verify_log_moment(pair, n_samples, rng)
        reports.append(
            CheckReport(
                check="logmoment",
                subject=label,
                alpha=None,
                passed=rep.passed,
                details=f"emp={rep.empirical:.4f} bound={rep.bound:.4f}",
            )
        )
    return reports


def _check_code() -> list[CheckReport]:
    reports = []
    for label, pair in DEFAULT_PAIRS[:3]:
        reports.extend(verify_lb_via_optimal_code(pair))
    return reports


def _check_soundness(c1_offset: float) -> list[CheckReport]:
    reports = []
    for label, pair in DEFAULT_PAIRS:
        for alpha in np.linspace(0.25, 0.99, 8):
            floor = max(lb1(pair, alpha), lb2(pair, alpha))
            _, cap = optimize_ub(pair, alpha, "ub1")
            cap += c1_offset
            reports.append(
                CheckReport(
                    check="soundness",
                    subject=label,
                    alpha=float(alpha),
                    passed=floor <= cap + 1e-9,
                    details=f"lb={floor:.4f} ub={cap:.4f}",
                )
            )
    return reports


def _check_band() -> list[CheckReport]:
    reports = []
    for label, pair in DEFAULT_PAIRS:
        worst = math.inf
        ok = True
        for alpha in np.linspace(0.05, 0.95, 19):
            d = renyi_divergence(pair, alpha + 1.0)
            scale = 2.0 ** (alpha * d)
            lo, hi = scale / (1.0 + alpha), scale + alpha
            worst = min(worst, hi - lo)
            ok = ok and lo <= hi
        reports.append(
            CheckReport(
                check="band",
                subject=label,
                alpha=None,
                passed=ok,
                details=f"min_width={worst:.4g}",
            )
        )
    return reports


def run_suite(
    seed: int = 42,
    n_samples: int = 10**6,
    only: str | None = None,
    c1_offset: float = 0.0,
) -> list[CheckReport]:
    """Run the verification suite; returns one report per check instance.

    ``only`` restricts to a single check family; ``c1_offset`` shifts the
    first upper bound's constant (negative values are a deliberate-fault
    hook for exercising the failure path).
    """
    if only is not None and only not in CHECK_NAMES:
        raise DomainError(f"unknown check {only!r}; options: {', '.join(CHECK_NAMES)}")
    reports: list[CheckReport] = []
    if only in (None, "geometric"):
        reports.extend(_check_geometric())
    if only in (None, "moments"):
        reports.extend(_check_moments(seed, n_samples))
    if only in (None, "logmoment"):
        reports.extend(_check_logmoment(seed, n_samples))
    if only in (None, "code"):
        reports.extend(_check_code())
    if only in (None, "soundness"):
        reports.extend(_check_soundness(c1_offset))
    if only in (None, "band"):
        reports.extend(_check_band())
    return reports
