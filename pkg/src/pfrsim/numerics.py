"""Adaptive quadrature, scalar minimization, and log-domain arithmetic.

Everything downstream (density ratios, index distributions, cost bounds)
funnels its numerical work through this module.  Quadrature is adaptive
Gauss-Kronrod (G7/K15) with bisection; infinite intervals are mapped to
finite ones by rational transforms, so no arbitrary truncation points
appear anywhere.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, NonConvergenceError, NonFiniteError

LN2 = math.log(2.0)
LOG2E = 1.0 / LN2


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and budget for adaptive integration.

    Convergence requires the accumulated error estimate to drop below
    ``max(abs_tol, rel_tol * |integral|)`` before ``max_subdivisions``
    panels exist.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 2000

    def __post_init__(self) -> None:
        if not (self.abs_tol > 0.0 and self.rel_tol > 0.0):
            raise DomainError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class MinimizeSpec:
    """Search interval and budget for scalar minimization."""

    lo: float
    hi: float
    grid_points: int = 200
    refine_iters: int = 60
    tol: float = 1e-9

    def __post_init__(self) -> None:
        if not (0.0 < self.lo < self.hi):
            raise DomainError("require 0 < lo < hi")
        if self.grid_points < 2:
            raise DomainError("grid_points must be >= 2")


# Gauss-Kronrod 7/15 abscissae and weights on [-1, 1] (QUADPACK dqk15).
_XGK = np.array(
    [
        0.9914553711208126,
        0.9491079123427585,
        0.8648644233597691,
        0.7415311855993945,
        0.5860872354676911,
        0.4058451513773972,
        0.2077849550078985,
        0.0,
    ]
)
_WGK = np.array(
    [
        0.0229353220105292,
        0.0630920926299786,
        0.1047900103222502,
        0.1406532597155259,
        0.1690047266392679,
        0.1903505780647854,
        0.2044329400752989,
        0.2094821410847278,
    ]
)
# Gauss-7 weights, attached to _XGK indices 1, 3, 5 and the centre node.
_WG = np.array(
    [
        0.1294849661688697,
        0.2797053914892767,
        0.3818300505051189,
        0.4179591836734694,
    ]
)

# All 15 Kronrod nodes/weights on [-1, 1], centre listed once.
_NODES15 = np.concatenate([-_XGK[:7], _XGK[7:8], _XGK[6::-1]])
_WEIGHTS15 = np.concatenate([_WGK[:7], _WGK[7:8], _WGK[6::-1]])


def _identity_transform(lo: float, hi: float):
    def phi(t: np.ndarray) -> np.ndarray:
        return t

    def jac(t: np.ndarray) -> np.ndarray:
        return np.ones_like(t)

    return phi, jac, lo, hi


def _transform(lo: float, hi: float):
    """Map (lo, hi) to a finite parameter interval; returns (phi, jacobian, a, b)."""
    lo_inf = math.isinf(lo)
    hi_inf = math.isinf(hi)
    if not lo_inf and not hi_inf:
        return _identity_transform(lo, hi)
    if lo_inf and hi_inf:
        # x = t / (1 - t^2) on t in (-1, 1)
        def phi(t):
            return t / (1.0 - t * t)

        def jac(t):
            s = 1.0 - t * t
            return (1.0 + t * t) / (s * s)

        return phi, jac, -1.0, 1.0
    if hi_inf:
        # x = lo + t / (1 - t) on t in (0, 1)
        def phi(t):
            return lo + t / (1.0 - t)

        def jac(t):
            s = 1.0 - t
            return 1.0 / (s * s)

        return phi, jac, 0.0, 1.0

    # x = hi - t / (1 - t) on t in (0, 1); orientation absorbed into the jacobian
    def phi(t):
        return hi - t / (1.0 - t)

    def jac(t):
        s = 1.0 - t
        return 1.0 / (s * s)

    return phi, jac, 0.0, 1.0


def _panel_rule(g: Callable[[np.ndarray], np.ndarray], a: float, b: float):
    """Apply G7/K15 to g on [a, b]; returns (kronrod, error_estimate)."""
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    t = c + h * _NODES15
    y = g(t)
    if not np.all(np.isfinite(y)):
        bad = t[~np.isfinite(y)][0]
        raise NonFiniteError(f"integrand non-finite at parameter {bad!r}")
    k15 = h * float(np.dot(_WEIGHTS15, y))
    # Gauss points sit at indices 1,3,5,7(centre),9,11,13 of the 15-node layout.
    g7 = h * float(
        _WG[0] * (y[1] + y[13])
        + _WG[1] * (y[3] + y[11])
        + _WG[2] * (y[5] + y[9])
        + _WG[3] * y[7]
    )
    return k15, abs(k15 - g7)


_SEED_PANELS = 8


def _adaptive_panels(
    g: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    spec: QuadratureSpec,
):
    """Adaptively bisect [a, b]; returns (value, error, breakpoints)."""
    edges = np.linspace(a, b, _SEED_PANELS + 1)
    heap = []  # (-error, lo, hi, value)
    total_val = 0.0
    total_err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, e = _panel_rule(g, lo, hi)
        heapq.heappush(heap, (-e, lo, hi, v))
        total_val += v
        total_err += e

    while total_err > max(spec.abs_tol, spec.rel_tol * abs(total_val)):
        if len(heap) >= spec.max_subdivisions:
            raise NonConvergenceError(
                f"quadrature error {total_err:.3e} above tolerance after "
                f"{len(heap)} panels"
            )
        neg_e, lo, hi, v = heapq.heappop(heap)
        total_err += neg_e  # neg_e == -e
        total_val -= v
        mid = 0.5 * (lo + hi)
        for p, q in ((lo, mid), (mid, hi)):
            pv, pe = _panel_rule(g, p, q)
            heapq.heappush(heap, (-pe, p, q, pv))
            total_val += pv
            total_err += pe

    breaks = sorted({lo for _, lo, _, _ in heap} | {b})
    return total_val, total_err, breaks


def integrate(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    spec: QuadratureSpec | None = None,
) -> float:
    """Integrate f over (lo, hi); either endpoint may be infinite."""
    spec = spec or QuadratureSpec()
    if not lo < hi:
        raise DomainError(f"require lo < hi, got ({lo}, {hi})")
    phi, jac, a, b = _transform(lo, hi)
    fv = np.vectorize(f, otypes=[float])

    def g(t: np.ndarray) -> np.ndarray:
        return fv(phi(t)) * jac(t)

    value, _, _ = _adaptive_panels(g, a, b, spec)
    return value


def quadrature_grid(
    fs: Sequence[Callable[[float], float]],
    lo: float,
    hi: float,
    spec: QuadratureSpec | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Build one node/weight grid adequate for every pilot integrand in fs.

    Runs the adaptive subdivision separately per pilot, merges the panel
    breakpoints, and lays K15 nodes on each merged panel.  For any g of
    comparable difficulty, ``sum(w * g(x))`` then approximates the integral
    of g over (lo, hi).  Nodes are returned in the original coordinates,
    weights include the interval-transform jacobian.
    """
    spec = spec or QuadratureSpec()
    if not lo < hi:
        raise DomainError(f"require lo < hi, got ({lo}, {hi})")
    phi, jac, a, b = _transform(lo, hi)

    breakpoints: set[float] = {a, b}
    for f in fs:
        fv = np.vectorize(f, otypes=[float])

        def g(t: np.ndarray) -> np.ndarray:
            return fv(phi(t)) * jac(t)

        _, _, breaks = _adaptive_panels(g, a, b, spec)
        breakpoints.update(breaks)

    edges = np.array(sorted(breakpoints))
    centers = 0.5 * (edges[:-1] + edges[1:])
    halfwidths = 0.5 * (edges[1:] - edges[:-1])
    t = (centers[:, None] + halfwidths[:, None] * _NODES15[None, :]).ravel()
    w = (halfwidths[:, None] * _WEIGHTS15[None, :]).ravel()
    x = phi(t)
    w = w * jac(t)
    order = np.argsort(x)
    return x[order], w[order]


_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def minimize_scalar(
    f: Callable[[float], float],
    spec: MinimizeSpec,
) -> tuple[float, float]:
    """Coarse grid scan followed by golden-section refinement.

    Returns the best probed point, so the result is a certified upper
    bound on min f even when f is multimodal.  Values of +inf are treated
    as valid "infinitely bad" probes (divergent bounds rely on this); NaN
    raises.
    """

    def probe(x: float) -> float:
        y = f(x)
        if math.isnan(y) or y == -math.inf:
            raise NonFiniteError(f"objective non-finite at {x!r}")
        return y

    xs = np.linspace(spec.lo, spec.hi, spec.grid_points)
    ys = [probe(float(x)) for x in xs]
    i = int(np.argmin(ys))
    best_x, best_y = float(xs[i]), ys[i]

    a = float(xs[max(i - 1, 0)])
    b = float(xs[min(i + 1, len(xs) - 1)])
    if b > a:
        c = b - _INV_GOLDEN * (b - a)
        d = a + _INV_GOLDEN * (b - a)
        fc, fd = probe(c), probe(d)
        for _ in range(spec.refine_iters):
            if abs(b - a) < spec.tol:
                break
            if fc < fd:
                b, d, fd = d, c, fc
                c = b - _INV_GOLDEN * (b - a)
                fc = probe(c)
            else:
                a, c, fc = c, d, fd
                d = a + _INV_GOLDEN * (b - a)
                fd = probe(d)
        for x, y in ((c, fc), (d, fd)):
            if y < best_y:
                best_x, best_y = x, y
    return best_x, best_y


def log_gamma(x: float) -> float:
    """Natural log of the gamma function for x > 0."""
    if not x > 0.0:
        raise DomainError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def log2_sum_exp(values) -> float:
    """log2(sum(2**v)) evaluated without overflow; -inf entries drop out."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return -math.inf
    m = float(np.max(arr))
    if m == -math.inf:
        return -math.inf
    if m == math.inf:
        return math.inf
    return m + math.log2(float(np.sum(np.exp2(arr - m))))
