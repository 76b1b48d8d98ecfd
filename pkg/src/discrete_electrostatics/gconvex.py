"""G-convexity of rational-log external fields on one or two intervals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import (
    DensePolynomial,
    Interval,
    IntervalSystem,
    RationalFieldSpec,
    capacity,
    distinct,
    real_roots,
    sample_grid,
)

ENDPOINT_TOL = 1e-9


@dataclass
class IntervalFinding:
    interval: Interval
    positive: bool = True
    decreasing: bool = True
    left_ok: bool = True
    right_ok: bool = True
    witnesses: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.positive and self.decreasing and self.left_ok and self.right_ok


@dataclass
class GConvexReport:
    findings: list[IntervalFinding]

    @property
    def is_gconvex(self) -> bool:
        return all(f.ok for f in self.findings)

    def __bool__(self) -> bool:
        return self.is_gconvex

    def summary(self) -> str:
        lines = []
        for f in self.findings:
            state = "ok" if f.ok else "; ".join(f.witnesses)
            lines.append(f"{f.interval}: {state}")
        return "\n".join(lines)


def zeros_and_poles(A: DensePolynomial, S: DensePolynomial, tol: float = 1e-7) -> tuple[list[float], list[float]]:
    """Real zeros and poles of S/A after cancelling common roots."""
    zeros = real_roots(S)
    poles = real_roots(A)
    kept = []
    for z in zeros:
        for i, p in enumerate(poles):
            if abs(z - p) <= tol * max(1.0, abs(z)):
                poles.pop(i)
                break
        else:
            kept.append(z)
    return distinct(kept, tol), distinct(poles, tol)


def _limit_ratio(A: DensePolynomial, S: DensePolynomial, sign: int) -> float:
    """lim (S/A)(x) as x -> sign * infinity."""
    k = S.degree - A.degree
    q = S.lead / A.lead
    if k < 0:
        return 0.0
    if k == 0:
        return q
    return math.copysign(math.inf, q * (sign ** k))


def _vanishes(p: DensePolynomial, x: float) -> bool:
    # scale by sum |c_k| max(1, |x|)^k so the test does not depend on where x sits
    scale = p.abs_eval(max(1.0, abs(x)))
    return scale == 0.0 or abs(p(x)) <= ENDPOINT_TOL * scale


def _check_interval(fld: RationalFieldSpec, iv: Interval) -> IntervalFinding:
    A, S, _ = fld.reduced
    out = IntervalFinding(iv)
    zeros, poles = zeros_and_poles(A, S)
    specials = zeros + poles

    for r in specials:
        if iv.contains(r):
            out.positive = False
            out.witnesses.append(f"{'zero' if r in zeros else 'pole'} of 1+B/A at x={r:.12g} inside")

    D = S.derivative() * A - S * A.derivative()
    droots = [r for r in distinct(real_roots(D)) if iv.contains(r)]
    grid = sample_grid(iv, 2048, specials + droots)
    # one point strictly between consecutive roots of D certifies its sign there
    cuts = [iv.lo] + droots + [iv.hi]
    mids = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        if math.isfinite(a) and math.isfinite(b):
            mids.append(0.5 * (a + b))
        elif math.isfinite(a):
            mids.append(a + 1.0 + abs(a))
        else:
            mids.append(b - 1.0 - abs(b))
    pts = np.concatenate([grid, np.array([m for m in mids if iv.contains(m)])])

    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = S(pts) / A(pts)
    bad = ~(ratio > 0)
    if bad.any():
        out.positive = False
        out.witnesses.append(f"1+B/A <= 0 at x={float(pts[bad][0]):.12g}")

    if D.is_zero():
        out.decreasing = False
        out.witnesses.append("1+B/A is constant")
    else:
        scale = S.derivative().abs_eval(pts) * A.abs_eval(pts) + S.abs_eval(pts) * A.derivative().abs_eval(pts)
        up = D(pts) > 1e-12 * scale
        if up.any():
            out.decreasing = False
            out.witnesses.append(f"1+B/A increases at x={float(pts[up][0]):.12g}")

    if math.isfinite(iv.lo):
        if not _vanishes(A, iv.lo):
            out.left_ok = False
            out.witnesses.append(f"A({iv.lo:g}) != 0")
    else:
        lim = _limit_ratio(A, S, -1)
        if not lim > 1.0:
            out.left_ok = False
            out.witnesses.append(f"limit of 1+B/A at -inf is {lim:g}, not in (1, inf]")

    if math.isfinite(iv.hi):
        if not _vanishes(S, iv.hi):
            out.right_ok = False
            out.witnesses.append(f"(A+B)({iv.hi:g}) != 0")
    else:
        lim = _limit_ratio(A, S, +1)
        if not 0.0 <= lim < 1.0:
            out.right_ok = False
            out.witnesses.append(f"limit of 1+B/A at +inf is {lim:g}, not in [0, 1)")
    return out


def check_gconvex(field: RationalFieldSpec) -> GConvexReport:
    return GConvexReport([_check_interval(field, iv) for iv in field.domain.intervals])


def max_charges(field: RationalFieldSpec):
    """Cap on the number of charges: an int (or inf) per interval.

    Returns a bare value for a one-interval domain and a tuple otherwise.
    """
    caps = tuple(capacity(iv, field.h) for iv in field.domain.intervals)
    return caps[0] if len(caps) == 1 else caps


def is_symmetric(field: RationalFieldSpec, center: float, intervals: Sequence[Interval] | None = None,
                 tol: float = 1e-9) -> bool:
    """F_phi(center + s) == -F_phi(center - s) on samples of the upper interval."""
    from .electrostatics import external_force

    ivs = intervals if intervals is not None else field.domain.intervals
    upper = max(ivs, key=lambda iv: iv.lo)
    for x in sample_grid(upper, 64):
        x = float(x)
        mirror = 2.0 * center - x
        try:
            fp, fm = external_force(field, x), external_force(field, mirror)
        except ValueError:
            return False
        if abs(fp + fm) > tol * max(1.0, abs(fp)):
            return False
    return True


def enumerate_gconvex_windows(A: DensePolynomial, B: DensePolynomial, h: float) -> list[IntervalSystem]:
    """Maximal G-convex intervals of (1/2h) log(1 + B/A), then mirror pairs.

    Candidates are the gaps between consecutive real zeros/poles of 1 + B/A;
    two-interval systems are formed only from pairs of bounded windows placed
    symmetrically about a center around which the field is odd.
    """
    S = A + B
    zeros, poles = zeros_and_poles(A, S)
    crit = distinct(zeros + poles)
    edges = [-math.inf] + crit + [math.inf]
    windows = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if math.isinf(lo) and math.isinf(hi):
            continue
        iv = Interval(lo, hi)
        probe = RationalFieldSpec(A, B, h, IntervalSystem((iv,)), strict=False)
        if check_gconvex(probe):
            windows.append(iv)
    out = [IntervalSystem((iv,)) for iv in windows]
    bounded = [iv for iv in windows if iv.bounded]
    for i, w1 in enumerate(bounded):
        for w2 in bounded[i + 1:]:
            tol = 1e-9 * max(1.0, abs(w1.lo), abs(w2.hi))
            if abs((w1.lo + w2.hi) - (w1.hi + w2.lo)) > tol:
                continue
            center = 0.5 * (w1.hi + w2.lo)
            probe = RationalFieldSpec(A, B, h, IntervalSystem((w1, w2)), strict=False)
            if is_symmetric(probe, center):
                out.append(IntervalSystem((w1, w2)))
    return out
