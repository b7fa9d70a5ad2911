"""Integer code-length functions and exponential-cost / entropy evaluation.

Only length assignments are materialized, never concrete codewords:
every quantity of interest (Kraft sums, the order-t cost, entropy
brackets) depends on lengths alone.  Cost evaluation happens in the
log2 domain because 2**(t * n_k) overflows doubles long before the
sums themselves become unwieldy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import (
    DomainError,
    LengthTableError,
    OrderError,
    UnboundedTailError,
)
from .numerics import LN2, log2_sum_exp
from .pfr import IndexPmf

#: Tail mass at or below this level is treated as renormalization dust
#: (floating-point residue of an exact pmf), not as genuine tail.
_DUST_TAIL = 1e-12


@dataclass(frozen=True)
class PowerLaw:
    """Prefix code with n_k = ceil((1+eps) log2 k + 1 + log2(1 + 1/eps))."""

    epsilon: float

    def __post_init__(self) -> None:
        if not self.epsilon > 0.0:
            raise DomainError("epsilon must be positive")

    def lengths(self, k: np.ndarray) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        c = 1.0 + math.log2(1.0 + 1.0 / self.epsilon)
        return np.ceil((1.0 + self.epsilon) * np.log2(k) + c)


@dataclass(frozen=True)
class Universal:
    """Prefix code with n_k = ceil(log2 k + (1+eps) log2 log2(k+1) + 1 + log2(ln2/eps + 3/2))."""

    epsilon: float

    def __post_init__(self) -> None:
        if not self.epsilon > 0.0:
            raise DomainError("epsilon must be positive")

    def lengths(self, k: np.ndarray) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        c = 1.0 + math.log2(LN2 / self.epsilon + 1.5)
        return np.ceil(
            np.log2(k) + (1.0 + self.epsilon) * np.log2(np.log2(k + 1.0)) + c
        )


@dataclass(frozen=True)
class OneToOne:
    """Injective (not uniquely decodable) code: n_k = floor(log2(k+1))."""

    def lengths(self, k: np.ndarray) -> np.ndarray:
        return np.floor(np.log2(np.asarray(k, dtype=float) + 1.0))


@dataclass(frozen=True)
class CustomLengths:
    """Explicit length table for k = 1..len(table)."""

    table: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.table) == 0 or any(n < 1 for n in self.table):
            raise DomainError("length table must be nonempty with positive entries")

    def lengths(self, k: np.ndarray) -> np.ndarray:
        idx = np.asarray(k, dtype=np.int64) - 1
        if np.any(idx < 0) or np.any(idx >= len(self.table)):
            raise LengthTableError(
                f"index outside the custom table of size {len(self.table)}"
            )
        return np.asarray(self.table, dtype=float)[idx]


LengthFunction = Union[PowerLaw, Universal, OneToOne, CustomLengths]


def length(lf: LengthFunction, k: int) -> int:
    """Codeword length for index k >= 1."""
    if k < 1:
        raise DomainError("k must be >= 1")
    return int(lf.lengths(np.array([k]))[0])


def lengths(lf: LengthFunction, ks) -> np.ndarray:
    ks = np.asarray(ks)
    if np.any(ks < 1):
        raise DomainError("indices must be >= 1")
    return lf.lengths(ks)


def parse_length_function(text: str) -> LengthFunction:
    """Parse CLI syntax: powerlaw:eps | universal:eps | onetoone | custom:@table.csv"""
    kind, _, arg = text.partition(":")
    kind = kind.strip().lower()
    if kind == "powerlaw":
        return PowerLaw(float(arg))
    if kind == "universal":
        return Universal(float(arg))
    if kind == "onetoone":
        return OneToOne()
    if kind == "custom":
        if not arg.startswith("@"):
            raise DomainError("custom takes @<csv path> with rows k,n_k")
        entries: dict[int, int] = {}
        with open(arg[1:], "r", newline="") as f:
            for line in f:
                line = line.strip()
                if not line or line.lower().startswith("k"):
                    continue
                kk, _, nn = line.partition(",")
                entries[int(kk)] = int(nn)
        if sorted(entries) != list(range(1, len(entries) + 1)):
            raise DomainError("custom table must cover k = 1..N contiguously")
        return CustomLengths(tuple(entries[i] for i in range(1, len(entries) + 1)))
    raise DomainError(f"unknown length function {text!r}")


def kraft_sum(lf: LengthFunction, n_terms: int) -> tuple[float, float]:
    """(partial, tail_bound): sum of 2**-n_k for k <= n_terms plus an analytic
    bound on the remaining series.

    Tail bounds come from integral comparison of the un-ceiled length
    formulas; the one-to-one code's series diverges (tail bound +inf) and
    a custom table has no tail at all.
    """
    if n_terms < 1:
        raise DomainError("n_terms must be >= 1")
    if isinstance(lf, CustomLengths):
        upto = min(n_terms, len(lf.table))
        partial = float(np.exp2(-lf.lengths(np.arange(1, upto + 1))).sum())
        return partial, 0.0
    ks = np.arange(1, n_terms + 1, dtype=np.int64)
    partial = float(np.exp2(-lf.lengths(ks).astype(float)).sum())
    if isinstance(lf, PowerLaw):
        e = lf.epsilon
        tail = n_terms ** (-e) / (2.0 * (1.0 + e))
    elif isinstance(lf, Universal):
        e = lf.epsilon
        l2n = math.log2(max(n_terms, 2))
        tail = LN2 * l2n ** (-e) / (2.0 * (LN2 + 1.5 * e))
    else:
        tail = math.inf
    return partial, tail


@dataclass(frozen=True)
class CampbellCost:
    """Order-t cost of a truncated pmf: point value plus a bracket for the
    untruncated cost."""

    value: float
    lower: float
    upper: float


def campbell_cost(
    pmf: IndexPmf,
    lf: LengthFunction,
    t: float,
    tail_length: int | None = None,
) -> CampbellCost:
    """(1/t) log2 sum p(k) 2**(t n_k) over the truncated pmf.

    The truncated value is itself a lower bound on the untruncated cost.
    The upper bound additionally charges the tail mass at ``tail_length``
    bits per symbol; with positive tail mass and no ceiling there is no
    finite upper bound and the call fails.
    """
    if not t > 0.0:
        raise DomainError("t must be positive")
    ks = np.arange(1, pmf.n_max + 1, dtype=np.int64)
    ns = lf.lengths(ks).astype(float)
    with np.errstate(divide="ignore"):
        logp = np.log2(pmf.probs)
    terms = logp + t * ns
    value = log2_sum_exp(terms[np.isfinite(terms)]) / t
    if pmf.tail_mass <= _DUST_TAIL:
        return CampbellCost(value, value, value)
    if tail_length is None:
        raise UnboundedTailError(
            "pmf has positive tail mass; supply tail_length to bound the cost"
        )
    tail_term = math.log2(pmf.tail_mass) + t * float(tail_length)
    upper = log2_sum_exp(np.append(terms[np.isfinite(terms)], tail_term)) / t
    return CampbellCost(value, value, upper)


def _tail_power_sum_bound(pmf: IndexPmf, alpha: float) -> float:
    """Upper bound on sum_{k > n_max} P(K=k)**alpha.

    Monotonicity makes each checkpoint block at most (block width) times
    the leading checkpoint probability to the alpha; the remainder past
    the last checkpoint M combines Holder's inequality with a stored
    moment bound:  sum p^a <= (E[K^r 1{K>M}])^a (sum_{k>M} k^-s)^(1-a),
    s = r a / (1-a) > 1.
    """
    cert = pmf.tail_certificate
    if cert is None or not cert.checkpoints:
        return math.inf
    ks = [pmf.n_max] + [k for k, _ in cert.checkpoints]
    ps = [float(pmf.probs[-1])] + [p for _, p in cert.checkpoints]
    total = 0.0
    for (ka, pa), kb in zip(zip(ks, ps), ks[1:]):
        if kb > ka and pa > 0.0:
            total += (kb - ka) * pa**alpha
    m = ks[-1]
    log2m = math.log2(m)
    best = math.inf
    for r, log2_moment in cert.moment_log2_bounds:
        s = r * alpha / (1.0 - alpha)
        if s <= 1.0 + 1e-9:
            continue
        log2_rem = alpha * log2_moment + (1.0 - alpha) * (
            (1.0 - s) * log2m - math.log2(s - 1.0)
        )
        best = min(best, log2_rem)
    if not math.isfinite(best):
        return math.inf
    return total + 2.0**best


def renyi_entropy(pmf: IndexPmf, alpha: float) -> tuple[float, float]:
    """Bracket [lower, upper] for the order-alpha entropy of the full law.

    The truncated power sum gives the lower end exactly; the upper end
    adds a certified bound on the tail power sum (infinite when the pmf
    carries tail mass but no certificate data).
    """
    if not 0.0 < alpha < 1.0:
        raise OrderError(f"alpha must lie in (0, 1), got {alpha}")
    p = pmf.probs[pmf.probs > 0.0]
    head = float(np.sum(p**alpha))
    lower = math.log2(head) / (1.0 - alpha)
    if pmf.tail_mass <= _DUST_TAIL:
        return lower, lower
    tail = _tail_power_sum_bound(pmf, alpha)
    if not math.isfinite(tail):
        return lower, math.inf
    upper = math.log2(head + tail) / (1.0 - alpha)
    return lower, upper


def empirical_campbell_cost(
    samples: Sequence[int] | np.ndarray,
    lf: LengthFunction,
    t: float,
) -> float:
    """Plug-in cost estimate from observed indices."""
    if not t > 0.0:
        raise DomainError("t must be positive")
    ks = np.asarray(samples, dtype=np.int64)
    if ks.size == 0:
        raise DomainError("samples must be nonempty")
    values, counts = np.unique(ks, return_counts=True)
    ns = lf.lengths(values).astype(float)
    terms = np.log2(counts / ks.size) + t * ns
    return log2_sum_exp(terms) / t


def campbell_optimal_lengths(pmf: IndexPmf, alpha: float) -> CustomLengths:
    """Length table achieving cost within one bit of the entropy.

    Classical escort construction: n_k = ceil(-log2 w_k) for the escort
    weights w_k = p_k**alpha / sum p**alpha.  Zero-probability indices
    (which never occur) get a sentinel length.
    """
    if not 0.0 < alpha < 1.0:
        raise OrderError(f"alpha must lie in (0, 1), got {alpha}")
    p = np.asarray(pmf.probs, dtype=float)
    pos = p > 0.0
    escort = np.zeros_like(p)
    escort[pos] = p[pos] ** alpha
    escort[pos] /= escort[pos].sum()
    table = np.full(len(p), 64, dtype=np.int64)
    table[pos] = np.maximum(np.ceil(-np.log2(escort[pos])), 1.0).astype(np.int64)
    return CustomLengths(tuple(int(n) for n in table))
