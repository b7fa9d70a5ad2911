"""Distribution pairs with density ratios and Renyi divergences.

Three kinds are supported: Gaussian, Laplace (both on R) and finite
discrete laws on {0, .., n-1}.  Closed-form divergences are evaluated in
nats and converted at the boundary; every public return value is in bits.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import log_ndtr, ndtr

from .errors import (
    AbsoluteContinuityError,
    DomainError,
    OrderError,
    UnsupportedKindError,
)
from .numerics import LN2, QuadratureSpec, integrate

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class Gaussian:
    """Normal law with mean mu and standard deviation sigma."""

    mu: float
    sigma: float

    def __post_init__(self) -> None:
        if not self.sigma > 0.0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")

    def log_density(self, u):
        z = (np.asarray(u, dtype=float) - self.mu) / self.sigma
        return -0.5 * z * z - math.log(self.sigma) - _HALF_LOG_2PI

    def density(self, u):
        return np.exp(self.log_density(u))

    def cdf(self, u):
        return ndtr((np.asarray(u, dtype=float) - self.mu) / self.sigma)

    def log_cdf(self, u):
        return log_ndtr((np.asarray(u, dtype=float) - self.mu) / self.sigma)

    def log_sf(self, u):
        return log_ndtr(-(np.asarray(u, dtype=float) - self.mu) / self.sigma)

    def sample(self, rng: np.random.Generator, n: int | None = None):
        z = rng.standard_normal() if n is None else rng.standard_normal(n)
        return self.mu + self.sigma * z


@dataclass(frozen=True)
class Laplace:
    """Laplace law with location theta and scale lam (variance 2*lam**2)."""

    theta: float
    lam: float

    def __post_init__(self) -> None:
        if not self.lam > 0.0:
            raise DomainError(f"lam must be positive, got {self.lam}")

    def log_density(self, u):
        z = np.abs(np.asarray(u, dtype=float) - self.theta) / self.lam
        return -z - math.log(2.0 * self.lam)

    def density(self, u):
        return np.exp(self.log_density(u))

    def cdf(self, u):
        z = (np.asarray(u, dtype=float) - self.theta) / self.lam
        return np.where(z <= 0.0, 0.5 * np.exp(z), 1.0 - 0.5 * np.exp(-z))

    def log_cdf(self, u):
        z = (np.asarray(u, dtype=float) - self.theta) / self.lam
        with np.errstate(over="ignore"):
            return np.where(
                z <= 0.0, math.log(0.5) + z, np.log1p(-0.5 * np.exp(-np.maximum(z, 0.0)))
            )

    def log_sf(self, u):
        z = (np.asarray(u, dtype=float) - self.theta) / self.lam
        with np.errstate(over="ignore"):
            return np.where(
                z >= 0.0, math.log(0.5) - z, np.log1p(-0.5 * np.exp(np.minimum(z, 0.0)))
            )

    def sample(self, rng: np.random.Generator, n: int | None = None):
        # inverse CDF; the 1-2|u| term is floored to keep endpoint draws finite
        u = rng.random() if n is None else rng.random(n)
        c = np.asarray(u, dtype=float) - 0.5
        mag = np.maximum(1.0 - 2.0 * np.abs(c), 5e-324)
        x = self.theta - self.lam * np.sign(c) * np.log(mag)
        return float(x) if n is None else x


@dataclass(frozen=True)
class Finite:
    """Discrete law on support indices 0..len(probs)-1."""

    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        p = np.asarray(self.probs, dtype=float)
        if p.size == 0 or np.any(p < 0.0):
            raise DomainError("probabilities must be nonnegative and nonempty")
        if abs(float(p.sum()) - 1.0) > 1e-12:
            raise DomainError(f"probabilities sum to {p.sum()}, not 1")
        object.__setattr__(self, "probs", tuple(float(x) for x in p))

    def log_density(self, i):
        idx = np.asarray(i, dtype=int)
        p = np.asarray(self.probs)[idx]
        with np.errstate(divide="ignore"):
            return np.log(p)

    def density(self, i):
        return np.asarray(self.probs)[np.asarray(i, dtype=int)]

    def cdf(self, u):
        raise UnsupportedKindError("cdf is not defined for finite laws")

    def sample(self, rng: np.random.Generator, n: int | None = None):
        cum = np.cumsum(self.probs)
        u = rng.random() if n is None else rng.random(n)
        idx = np.searchsorted(cum, u, side="right")
        idx = np.minimum(idx, len(self.probs) - 1)
        return int(idx) if n is None else idx


Distribution = Union[Gaussian, Laplace, Finite]


def parse_distribution(text: str) -> Distribution:
    """Parse CLI syntax: normal:mu,sigma | laplace:theta,lambda | finite:p1,p2,..."""
    kind, _, args = text.partition(":")
    kind = kind.strip().lower()
    try:
        values = [float(v) for v in args.split(",")] if args else []
    except ValueError as exc:
        raise DomainError(f"cannot parse distribution {text!r}") from exc
    if kind == "normal":
        if len(values) != 2:
            raise DomainError("normal takes exactly mu,sigma")
        return Gaussian(values[0], values[1])
    if kind == "laplace":
        if len(values) != 2:
            raise DomainError("laplace takes exactly theta,lambda")
        return Laplace(values[0], values[1])
    if kind == "finite":
        return Finite(tuple(values))
    raise DomainError(f"unknown distribution kind {kind!r}")


@dataclass(frozen=True)
class DistributionPair:
    """A target/reference pair (P, Q) of the same kind with P << Q."""

    p: Distribution
    q: Distribution

    def __post_init__(self) -> None:
        if type(self.p) is not type(self.q):
            raise UnsupportedKindError(
                f"pair kinds differ: {type(self.p).__name__} vs {type(self.q).__name__}"
            )
        if isinstance(self.p, Finite):
            if len(self.p.probs) != len(self.q.probs):
                raise UnsupportedKindError("finite supports differ in size")
            for pi, qi in zip(self.p.probs, self.q.probs):
                if qi == 0.0 and pi > 0.0:
                    raise AbsoluteContinuityError(
                        "P is not absolutely continuous w.r.t. Q"
                    )

    @property
    def is_finite_kind(self) -> bool:
        return isinstance(self.p, Finite)

    @property
    def is_identical(self) -> bool:
        return self.p == self.q

    def mutually_absolutely_continuous(self) -> bool:
        if not self.is_finite_kind:
            return True
        return all(
            not (pi == 0.0 and qi > 0.0)
            for pi, qi in zip(self.p.probs, self.q.probs)
        )

    def log_ratio(self, u):
        """Natural log of dP/dQ at u (index for finite kinds)."""
        if self.is_finite_kind:
            idx = np.asarray(u, dtype=int)
            qv = np.asarray(self.q.probs)[idx]
            if np.any(qv == 0.0):
                raise AbsoluteContinuityError("point outside the support of Q")
        return self.p.log_density(u) - self.q.log_density(u)

    def log2_ratio(self, u):
        return self.log_ratio(u) / LN2

    def ratio_monotonicity(self) -> str:
        """Analytic monotonicity of u -> dP/dQ(u) for continuous kinds.

        One of "constant", "nonincreasing", "nondecreasing", "none".
        Detected from the parameters, never numerically.
        """
        if self.is_finite_kind:
            raise UnsupportedKindError("monotonicity applies to continuous kinds")
        if self.is_identical:
            return "constant"
        p, q = self.p, self.q
        if isinstance(p, Gaussian):
            if p.sigma != q.sigma:
                return "none"
            if p.mu == q.mu:
                return "constant"
            return "nonincreasing" if p.mu < q.mu else "nondecreasing"
        if p.lam != q.lam:
            return "none"
        if p.theta == q.theta:
            return "constant"
        return "nonincreasing" if p.theta < q.theta else "nondecreasing"

    def log_ratio_sup(self) -> float:
        """Natural log of sup_u dP/dQ(u); may be +inf."""
        p, q = self.p, self.q
        if self.is_finite_kind:
            vals = [
                math.log(pi / qi)
                for pi, qi in zip(p.probs, q.probs)
                if pi > 0.0 and qi > 0.0
            ]
            return max(vals) if vals else -math.inf
        if isinstance(p, Gaussian):
            if p.sigma > q.sigma:
                return math.inf
            if p.sigma == q.sigma:
                if p.mu == q.mu:
                    return 0.0
                return math.inf
            # log r is concave quadratic; maximize analytically
            a = 0.5 * (1.0 / q.sigma**2 - 1.0 / p.sigma**2)
            b = p.mu / p.sigma**2 - q.mu / q.sigma**2
            x = -b / (2.0 * a)
            return float(self.log_ratio(x))
        if p.lam > q.lam:
            return math.inf
        if p.lam == q.lam and p.theta != q.theta:
            return abs(p.theta - q.theta) / p.lam
        # lam_p < lam_q: both tails decay, maximum at a kink
        return float(max(self.log_ratio(p.theta), self.log_ratio(q.theta)))


def _gaussian_renyi_nats(p: Gaussian, q: Gaussian, a: float) -> float:
    s2 = a * q.sigma**2 + (1.0 - a) * p.sigma**2
    if s2 <= 0.0:
        return math.inf
    d = (
        math.log(q.sigma / p.sigma)
        + math.log(q.sigma**2 / s2) / (2.0 * (a - 1.0))
        + 0.5 * a * (p.mu - q.mu) ** 2 / s2
    )
    return d


def _sinhc(h: float) -> float:
    if abs(h) < 1e-8:
        return 1.0 + h * h / 6.0
    return math.sinh(h) / h


def _laplace_renyi_nats(p: Laplace, q: Laplace, a: float) -> float:
    l1, l2 = p.lam, q.lam
    if a * l2 + (1.0 - a) * l1 <= 0.0:
        return math.inf
    if l1 == l2:
        # equal scales: exact form with no parametrization singularity
        delta = abs(p.theta - q.theta) / l1
        h = (a - 0.5) * delta
        if abs(h) <= 30.0:
            log_m = math.log(math.cosh(h) + 0.5 * delta * _sinhc(h))
        else:
            # cosh/sinh collapse to exp(|h|)/2 beyond double precision
            log_m = abs(h) - LN2 + math.log1p(0.5 * delta / abs(h))
        return (-0.5 * delta + log_m) / (a - 1.0)
    singular = l1 / (l1 + l2)
    if abs(a - singular) < 1e-9:
        # removable singularity of the closed form; evaluate nearby and flag
        warnings.warn(
            f"Renyi order {a} sits on the removable singularity of the "
            f"Laplace closed form; evaluating at {a} +- 1e-6",
            UserWarning,
            stacklevel=3,
        )
        lo = _laplace_renyi_nats(p, q, singular - 1e-6)
        hi = _laplace_renyi_nats(p, q, singular + 1e-6)
        return 0.5 * (lo + hi)
    dtheta = abs(p.theta - q.theta)
    g = (a / l1) * math.exp(-(1.0 - a) * dtheta / l2) - (
        (1.0 - a) / l2
    ) * math.exp(-a * dtheta / l1)
    ratio = l1 * l2**2 * g / (a**2 * l2**2 - (1.0 - a) ** 2 * l1**2)
    return math.log(l2 / l1) + math.log(ratio) / (a - 1.0)


def _finite_renyi_nats(p: Finite, q: Finite, a: float) -> float:
    total = 0.0
    for pi, qi in zip(p.probs, q.probs):
        if pi > 0.0:
            total += pi**a * qi ** (1.0 - a)
    return math.log(total) / (a - 1.0)


def _numeric_renyi_bits(
    pair: DistributionPair, a: float, spec: QuadratureSpec | None
) -> float:
    p, q = pair.p, pair.q

    def integrand(x: float) -> float:
        lp = float(p.log_density(x))
        lq = float(q.log_density(x))
        return math.exp(a * lp + (1.0 - a) * lq)

    value = integrate(integrand, -math.inf, math.inf, spec)
    return math.log(value) / ((a - 1.0) * LN2)


def renyi_divergence(
    pair: DistributionPair,
    order: float,
    spec: QuadratureSpec | None = None,
    force_numeric: bool = False,
) -> float:
    """Renyi divergence D_order(P||Q) in bits; +inf when divergent.

    Closed forms for all three kinds; ``force_numeric`` integrates
    q * (dP/dQ)**order by quadrature instead (continuous kinds), for
    cross-checking.
    """
    if not order > 0.0:
        raise OrderError(f"divergence order must be positive, got {order}")
    if order == 1.0:
        return kl_divergence(pair, spec)
    if force_numeric and not pair.is_finite_kind:
        return _numeric_renyi_bits(pair, order, spec)
    p, q = pair.p, pair.q
    if isinstance(p, Gaussian):
        nats = _gaussian_renyi_nats(p, q, order)
    elif isinstance(p, Laplace):
        nats = _laplace_renyi_nats(p, q, order)
    else:
        nats = _finite_renyi_nats(p, q, order)
    return nats / LN2 if math.isfinite(nats) else nats


def kl_divergence(pair: DistributionPair, spec: QuadratureSpec | None = None) -> float:
    """Kullback-Leibler divergence D(P||Q) in bits."""
    p, q = pair.p, pair.q
    if isinstance(p, Gaussian):
        nats = (
            math.log(q.sigma / p.sigma)
            + (p.sigma**2 + (p.mu - q.mu) ** 2) / (2.0 * q.sigma**2)
            - 0.5
        )
    elif isinstance(p, Laplace):
        dtheta = abs(p.theta - q.theta)
        nats = (
            math.log(q.lam / p.lam)
            + (p.lam * math.exp(-dtheta / p.lam) + dtheta) / q.lam
            - 1.0
        )
    else:
        nats = 0.0
        for pi, qi in zip(p.probs, q.probs):
            if pi > 0.0:
                nats += pi * math.log(pi / qi)
    return nats / LN2


def log2_density_ratio(pair: DistributionPair, u) -> float:
    """log2 of dP/dQ at u (support index for finite kinds)."""
    return float(pair.log2_ratio(u))
