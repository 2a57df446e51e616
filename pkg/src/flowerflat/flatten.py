"""Escape-time functions, flattening functionals and coboundaries.

A Lipschitz f can be flattened on a flower F exactly when, for every
discontinuity x of the selector, the integral of f' against the
escape-time density e_x = sum_n chi(tau^n I_x) vanishes.  All integrals
here are exact finite sums of f-increments over the iterated-selector
images; the only approximation is the truncation of the geometric tail,
which carries a rigorous uniform bound reported with every value.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .circle import Arc, EPS, StepFunction, lift, reduce, step_sum
from .flower import Discontinuity, Flower, PreImageSelector


def tail_bound(K: float, N: int, base_length: float = 1.0) -> float:
    """L1 bound on sum_{n>N} of the iterated-image lengths."""
    return base_length * K ** (-(N + 1)) / (1.0 - 1.0 / K)


def default_depth(lipschitz: float, K: float, target: float = 1e-10) -> int:
    """Smallest N whose truncation certificate drops below ``target``."""
    N = 0
    while lipschitz * tail_bound(K, N) > target:
        N += 1
        if N > 10000:
            raise ValueError("tail bound does not reach target")
    return N


@dataclass
class EscapeFunction:
    """Truncated escape-time density e_x^(N) = sum_{n<=N} chi(tau^n I_x)."""

    terms: List[List[Arc]]
    truncation_depth: int
    tail_bound_l1: float

    def to_step(self) -> StepFunction:
        return step_sum(StepFunction.indicator(a)
                        for level in self.terms for a in level)

    def eval_int(self, t: float, tol: float = 0.0) -> int:
        return sum(a.contains(t, tol)
                   for level in self.terms for a in level)

    def eval_many(self, xs: np.ndarray) -> np.ndarray:
        """Vectorized evaluation (arc endpoints resolved to the closed side)."""
        starts, ends = [], []
        for level in self.terms:
            for a in level:
                if a.left <= a.right:
                    starts.append(a.left)
                    ends.append(a.right)
                else:
                    starts.extend((a.left, 0.0))
                    ends.extend((1.0, a.right))
        starts = np.sort(np.asarray(starts))
        ends = np.sort(np.asarray(ends))
        xs = np.asarray(xs)
        return (np.searchsorted(starts, xs, side="right")
                - np.searchsorted(ends, xs, side="left"))


def escape_function(sel: PreImageSelector, disc: Discontinuity,
                    N: int) -> EscapeFunction:
    if N < 0:
        raise ValueError("N must be >= 0")
    K = sel.flower.map.expansion_constant
    levels = sel.push_levels(disc.I, N)
    return EscapeFunction(levels, N, tail_bound(K, N, disc.I.length))


def escape_time_direct(F: Flower, t: float, cap: int = 1000):
    """First exit time of the forward orbit from a 1-flower, or None if the
    orbit stays inside for ``cap`` steps."""
    if F.p != 1:
        raise ValueError("escape time is defined for 1-flowers")
    x = reduce(t)
    for n in range(cap):
        if not F.petals[0].contains(x):
            return n
        x = F.map.apply(x)
    return None


def functional(sel: PreImageSelector, disc: Discontinuity, f,
               N: int) -> Tuple[float, float]:
    """Truncated flattening functional: integral of f' against e_x.

    Returns (value, error_bound); the bound is the rigorous geometric-tail
    certificate, uniform over all flowers with the same map.
    """
    value = 0.0
    arcs = [(disc.I.left, disc.I.right)]
    for n in range(N + 1):
        if n > 0:
            arcs = sel.push_once(arcs)
        value += sum(f.eval(r) - f.eval(l) for l, r in arcs)
    K = sel.flower.map.expansion_constant
    err = f.lipschitz_constant() * tail_bound(K, N, disc.I.length)
    return value, err


def functional_dual(sel: PreImageSelector, disc: Discontinuity, f,
                    N: int) -> Tuple[float, float]:
    """Same functional computed over the complementary arc J_x."""
    value = 0.0
    arcs = [(disc.J.left, disc.J.right)]
    for n in range(N + 1):
        if n > 0:
            arcs = sel.push_once(arcs)
        value += sum(f.eval(r) - f.eval(l) for l, r in arcs)
    K = sel.flower.map.expansion_constant
    err = f.lipschitz_constant() * tail_bound(K, N, disc.J.length)
    return value, err


class Coboundary:
    """Truncated transfer function phi with phi' = sum_{n=1..N} (f o tau^n)'.

    phi is anchored to 0 at ``anchor`` and carries a uniform truncation
    certificate ``error_bound``; the flattening coboundary is
    g = phi - phi o T.
    """

    def __init__(self, sel: PreImageSelector, f, depth: int,
                 anchor: float = None):
        if depth < 1:
            raise ValueError("depth must be >= 1")
        self.selector = sel
        self.f = f
        self.depth = depth
        self.anchor = (sel.flower.petals[0].left if anchor is None
                       else reduce(anchor))
        K = sel.flower.map.expansion_constant
        self.error_bound = f.lipschitz_constant() * tail_bound(K, depth)

    def _segment_integral(self, u: float, v: float) -> float:
        """integral over [u, v] of sum_{n=1..N} (f o tau^n)', computed by
        pushing the arc through the selector and summing f-increments."""
        total = 0.0
        arcs = [(u, v)]
        f = self.f
        push = self.selector.push_once
        for _ in range(self.depth):
            arcs = push(arcs)
            total += sum(f.eval(r) - f.eval(l) for l, r in arcs)
        return total

    def eval_many(self, xs: Sequence[float]) -> np.ndarray:
        """phi at many points; cost is shared along the sorted traversal
        from the anchor, so batches are cheap."""
        base = self.anchor
        lifted = [(lift(base, x), i) for i, x in enumerate(xs)]
        lifted.sort()
        out = np.empty(len(lifted))
        pos = base
        acc = 0.0
        for u, i in lifted:
            if u - pos > EPS:
                acc += self._segment_integral(reduce(pos), reduce(u))
                pos = u
            out[i] = acc
        return out

    def eval(self, x: float) -> float:
        return float(self.eval_many([x])[0])

    def coboundary_many(self, xs: Sequence[float]) -> np.ndarray:
        """g = phi - phi o T at many points (error bound: 2*error_bound)."""
        T = self.selector.flower.map
        xs = list(xs)
        images = [T.apply(x) for x in xs]
        vals = self.eval_many(xs + images)
        n = len(xs)
        return vals[:n] - vals[n:]


def build_coboundary(sel: PreImageSelector, f, N: int,
                     anchor: float = None) -> Coboundary:
    return Coboundary(sel, f, N, anchor)


def flattened_values(f, cob: Coboundary, points: Sequence[float]
                     ) -> np.ndarray:
    """(f + phi - phi o T) at the given points."""
    g = cob.coboundary_many(points)
    return np.asarray([f.eval(x) for x in points]) + g


def petal_samples(F: Flower, samples_per_petal: int) -> List[float]:
    pts = []
    for petal in F.petals:
        for t in np.linspace(0.0, petal.length, samples_per_petal):
            pts.append(reduce(petal.left + t))
    return pts


def is_flat(f, cob: Coboundary, F: Flower, samples: int = 64,
            tol: float = 1e-8) -> Tuple[bool, float, float]:
    """Check that f + phi - phi o T is constant on the flower.

    Returns (flat, witnessed_constant, max_deviation); ``flat`` is true
    when the deviation stays below tol plus the truncation certificates.
    """
    if samples < 2:
        raise ValueError("need at least 2 samples per petal")
    pts = petal_samples(F, samples)
    vals = flattened_values(f, cob, pts)
    constant = float(np.mean(vals))
    max_dev = float(np.max(np.abs(vals - constant)))
    certified = tol + 4.0 * cob.error_bound
    return max_dev <= certified, constant, max_dev


def normal_form_check(f, alpha_estimate: float, samples: int = 4096,
                      tol: float = 1e-9) -> bool:
    """True iff max f <= alpha_estimate + tol on a sample grid refined by
    the function's own breakpoints (if any)."""
    grid = [i / samples for i in range(samples)]
    grid.extend(getattr(f, "breakpoints", ()))
    top = max(f.eval(x) for x in grid)
    return top <= alpha_estimate + tol
