"""Numerical integration: adaptive scalar quadrature, fixed-node rules, power-law tails."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy import integrate as _sp_integrate
from scipy import special


class NonConvergenceError(ArithmeticError):
    """Adaptive quadrature stopped before reaching the requested tolerance."""

    def __init__(self, message, value=math.nan, error=math.inf, evals=0):
        super().__init__(f"{message} (partial value {value:.6g}, error estimate {error:.3g}, "
                         f"{evals} evaluations)")
        self.value = value
        self.error = error
        self.evals = evals


@dataclass(frozen=True)
class QuadSpec:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-13
    max_evals: int = 200_000
    tail_mass: float = 1e-10  # Gaussian-tail truncation threshold for exp(-pi lam r^2)

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not (0 < self.tail_mass < 1):
            raise ValueError("tail_mass must lie in (0, 1)")
        if self.max_evals < 21:
            raise ValueError("max_evals too small for one Gauss-Kronrod panel")

    def inner(self, factor=0.1):
        """Spec for a nested inner level: tolerances tightened by ``factor``."""
        return replace(self, rel_tol=self.rel_tol * factor, abs_tol=self.abs_tol * factor)


class QuadResult(NamedTuple):
    value: float
    error: float
    evals: int


def integrate(f, a, b=math.inf, spec=QuadSpec(), points=None):
    """Adaptive Gauss-Kronrod integral of a scalar function over [a, b].

    ``b = inf`` maps the half line onto [0, 1) with ``x = a + t/(1-t)``.
    Raises ``NonConvergenceError`` when the error estimate misses the
    tolerance or the evaluation budget is spent.
    """
    a = float(a)
    b = float(b)
    if b == a:
        return QuadResult(0.0, 0.0, 0)
    if b < a:
        res = integrate(f, b, a, spec, points)
        return QuadResult(-res.value, res.error, res.evals)
    if math.isinf(b):
        def g(t):
            if t >= 1.0:
                return 0.0
            one_minus = 1.0 - t
            return f(a + t / one_minus) / (one_minus * one_minus)

        pts = None
        if points:
            pts = [(p - a) / (1.0 + p - a) for p in points if p > a]
        return integrate(g, 0.0, 1.0, spec, pts)
    limit = max(1, spec.max_evals // 42)
    kwargs = dict(epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=limit, full_output=1)
    if points:
        inside = sorted(p for p in points if a < p < b)
        if inside:
            kwargs["points"] = inside
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _sp_integrate.IntegrationWarning)
        out = _sp_integrate.quad(f, a, b, **kwargs)
    value, error, info = out[0], out[1], out[2]
    evals = int(info.get("neval", 0))
    # a fourth element (warning message) appears only when quad flags a problem
    flagged = len(out) > 3
    target = max(spec.abs_tol, spec.rel_tol * abs(value))
    if not math.isfinite(value):
        raise NonConvergenceError("non-finite integral", value, error, evals)
    if evals > spec.max_evals or (flagged and error > target):
        raise NonConvergenceError("quadrature did not converge", value, error, evals)
    return QuadResult(float(value), float(error), evals)


def truncation_radius(density, tail_mass=1e-10):
    """Radius beyond which exp(-pi density r^2) has dropped below ``tail_mass``."""
    if density <= 0:
        return math.inf
    return math.sqrt(-math.log(tail_mass) / (math.pi * density))


def gauss_legendre(n):
    """Nodes/weights of the n-point Gauss-Legendre rule on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def composite_rule(breaks, n):
    """Gauss-Legendre nodes and weights on consecutive panels between ``breaks``."""
    x, w = gauss_legendre(n)
    breaks = np.asarray(breaks, dtype=float)
    lo, hi = breaks[:-1, None], breaks[1:, None]
    nodes = lo + (hi - lo) * x
    weights = (hi - lo) * w
    return nodes.ravel(), weights.ravel()


def power_tail(lower, K, alpha, m):
    """Closed form of  int_lower^inf v^m / (1 + K v^alpha) dv  for alpha > m + 1.

    Vectorized over ``lower`` and ``K``; ``K = inf`` gives 0.
    """
    lower = np.asarray(lower, dtype=float)
    K = np.asarray(K, dtype=float)
    p = alpha - m - 1.0
    if p <= 0:
        raise ValueError("integral diverges unless alpha > m + 1")
    lower, K = np.broadcast_arrays(lower, K)
    out = np.zeros(lower.shape)
    ok = np.isfinite(K) & (K > 0)
    if not np.any(ok):
        return out
    A = lower[ok]
    k = K[ok]
    b = p / alpha
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        t = k * A ** alpha  # z = -1/t
        res = np.empty_like(A)
        big = t >= 1.0
        # large t: direct series-friendly argument in (-1, 0]
        tb = t[big]
        res[big] = A[big] ** (-p) / (k[big] * p) * special.hyp2f1(1.0, b, 1.0 + b, -1.0 / tb)
        # small t: whole half line minus the head [0, A], both well conditioned
        small = ~big
        ts = t[small]
        c = (m + 1.0) / alpha
        whole = k[small] ** (-c) * math.pi / (alpha * math.sin(math.pi * c))
        head = A[small] ** (m + 1.0) / (m + 1.0) * special.hyp2f1(1.0, c, 1.0 + c, -ts)
        res[small] = whole - head
    out[ok] = res
    return out


__all__ = [
    "QuadSpec", "QuadResult", "NonConvergenceError", "integrate", "truncation_radius",
    "gauss_legendre", "composite_rule", "power_tail",
]
