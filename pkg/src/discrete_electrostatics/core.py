"""Shared vocabulary: dense polynomials, intervals, rational-log fields and
charge configurations.

All objects here are immutable after construction.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly


class DomainError(ValueError):
    """A quantity was requested outside the set where it is defined."""


class NotGConvexError(ValueError):
    """An operation that needs a G-convex field was handed one that is not."""


class InfeasibleError(ValueError):
    """The requested number of charges cannot be placed with gaps > h."""


# --------------------------------------------------------------------------
# polynomials
# --------------------------------------------------------------------------


def _trim(coeffs: Iterable[float]) -> tuple[float, ...]:
    c = [float(v) for v in coeffs]
    while c and c[-1] == 0.0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class DensePolynomial:
    """Real polynomial stored as ascending coefficients.

    The zero polynomial has ``coeffs == ()`` and degree -1.
    """

    coeffs: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _trim(self.coeffs))

    # construction helpers
    @classmethod
    def from_roots(cls, roots: Iterable[float], lead: float = 1.0) -> "DensePolynomial":
        roots = list(roots)
        if not roots:
            return cls((lead,))
        return cls(lead * npoly.polyfromroots(roots))

    @classmethod
    def product(cls, *factors: Sequence[float]) -> "DensePolynomial":
        """Product of polynomials given as ascending coefficient sequences."""
        out = np.array([1.0])
        for f in factors:
            out = npoly.polymul(out, np.asarray(f, dtype=float))
        return cls(out)

    @classmethod
    def x(cls) -> "DensePolynomial":
        return cls((0.0, 1.0))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lead(self) -> float:
        return self.coeffs[-1] if self.coeffs else 0.0

    def is_zero(self) -> bool:
        return not self.coeffs

    def __call__(self, x):
        return poly_eval(self, x)

    def abs_eval(self, x):
        """Sum of |c_k| |x|^k, the natural scale for evaluation error."""
        ax = abs(x) if np.isscalar(x) else np.abs(x)
        acc = 0.0 * ax
        for c in reversed(self.coeffs):
            acc = acc * ax + abs(c)
        return acc

    def _array(self) -> np.ndarray:
        return np.array(self.coeffs if self.coeffs else (0.0,), dtype=float)

    def __add__(self, other: "DensePolynomial") -> "DensePolynomial":
        return DensePolynomial(npoly.polyadd(self._array(), other._array()))

    def __sub__(self, other: "DensePolynomial") -> "DensePolynomial":
        return DensePolynomial(npoly.polysub(self._array(), other._array()))

    def __neg__(self) -> "DensePolynomial":
        return DensePolynomial(tuple(-c for c in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, DensePolynomial):
            return DensePolynomial(npoly.polymul(self._array(), other._array()))
        return DensePolynomial(tuple(float(other) * c for c in self.coeffs))

    __rmul__ = __mul__

    def divmod(self, other: "DensePolynomial") -> tuple["DensePolynomial", "DensePolynomial"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        q, r = npoly.polydiv(self._array(), other._array())
        return DensePolynomial(q), DensePolynomial(r)

    def derivative(self) -> "DensePolynomial":
        return DensePolynomial(tuple(k * c for k, c in enumerate(self.coeffs))[1:])

    def shift(self, s: float) -> "DensePolynomial":
        """Coefficients of p(x + s)."""
        n = len(self.coeffs)
        out = [0.0] * n
        for k, c in enumerate(self.coeffs):
            # c (x+s)^k = c sum_i binom(k,i) s^(k-i) x^i
            for i in range(k + 1):
                out[i] += c * math.comb(k, i) * s ** (k - i)
        return DensePolynomial(out)

    def coeff_norm(self) -> float:
        return float(sum(abs(c) for c in self.coeffs))

    def real_roots(self, imag_tol: float = 1e-7) -> list[float]:
        """Real roots with multiplicity, ascending."""
        return real_roots(self, imag_tol)

    def __repr__(self) -> str:
        return f"DensePolynomial({list(self.coeffs)})"


def poly_eval(p: DensePolynomial, x):
    """Horner evaluation; accepts scalars or numpy arrays."""
    if not p.coeffs:
        return 0.0 * x
    acc = p.coeffs[-1] + 0.0 * x
    for c in reversed(p.coeffs[:-1]):
        acc = acc * x + c
    return acc


def real_roots(p: DensePolynomial, imag_tol: float = 1e-7) -> list[float]:
    """Real roots of p (with multiplicity) via the companion matrix.

    Roots whose imaginary part is small relative to their modulus are taken
    as real; these arise from repeated real roots split by rounding. Each is
    polished with a few Newton steps when the derivative is not tiny.
    """
    if p.degree < 1:
        return []
    if p.degree == 1:
        return [-p.coeffs[0] / p.coeffs[1]]
    raw = np.roots(p.coeffs[::-1])
    dp = p.derivative()
    out = []
    for z in raw:
        if abs(z.imag) > imag_tol * max(1.0, abs(z)):
            continue
        r = float(z.real)
        for _ in range(3):
            d = dp(r)
            if d == 0.0 or abs(d) < 1e-8 * p.abs_eval(r) / max(1.0, abs(r)):
                break
            step = p(r) / d
            if not math.isfinite(step) or abs(step) > 1e-6 * max(1.0, abs(r)):
                break
            r -= step
        out.append(r)
    return sorted(out)


def cancel_common_roots(A: DensePolynomial, S: DensePolynomial,
                        tol: float = 1e-7) -> tuple[DensePolynomial, DensePolynomial]:
    """Divide A and S by (x - r) for every real root r they share.

    The quotient S/A is unchanged, but evaluating it no longer cancels two
    small numbers next to a shared root.
    """
    for r in real_roots(A):
        if S.degree < 1 or A.degree < 1:
            break
        if not any(abs(r - t) <= tol * max(1.0, abs(r)) for t in real_roots(S)):
            continue
        factor = DensePolynomial((-r, 1.0))
        A, _ = A.divmod(factor)
        S, _ = S.divmod(factor)
    return A, S


def distinct(values: Iterable[float], tol: float = 1e-7) -> list[float]:
    """Sorted values with near-duplicates (relative tol) merged by averaging."""
    vals = sorted(values)
    groups: list[list[float]] = []
    for v in vals:
        if groups and abs(v - groups[-1][-1]) <= tol * max(1.0, abs(v)):
            groups[-1].append(v)
        else:
            groups.append([v])
    return [sum(g) / len(g) for g in groups]


# --------------------------------------------------------------------------
# intervals
# --------------------------------------------------------------------------

ENDPOINT_TOL = 1e-12


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi) or not lo < hi:
            raise ValueError(f"need lo < hi, got ({lo}, {hi})")
        if math.isinf(lo) and math.isinf(hi):
            raise ValueError("at most one endpoint may be infinite")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        """Strict membership; points within 1e-12 of an endpoint are outside."""
        if math.isfinite(self.lo) and x - self.lo <= ENDPOINT_TOL * max(1.0, abs(self.lo)):
            return False
        if math.isfinite(self.hi) and self.hi - x <= ENDPOINT_TOL * max(1.0, abs(self.hi)):
            return False
        return True

    def reference_point(self) -> float:
        """Anchor where the external potential is set to zero."""
        if self.bounded:
            return 0.5 * (self.lo + self.hi)
        if math.isfinite(self.lo):
            return self.lo + 1.0
        return self.hi - 1.0

    def __str__(self) -> str:
        return f"({self.lo:g}, {self.hi:g})"


def capacity(interval: Interval, h: float) -> float:
    """Largest number of charges with gaps > h inside the open interval."""
    if not interval.bounded:
        return math.inf
    ratio = interval.length / h
    nearest = round(ratio)
    if abs(ratio - nearest) <= 1e-12 * max(1.0, ratio):
        return int(nearest)
    return int(math.ceil(ratio))


@dataclass(frozen=True)
class IntervalSystem:
    """One interval, or two disjoint ordered intervals, with optional counts."""

    intervals: tuple[Interval, ...]
    counts: tuple[int, ...] | None = None

    def __post_init__(self):
        ivs = tuple(self.intervals)
        if not 1 <= len(ivs) <= 2:
            raise ValueError("an interval system has one or two intervals")
        if len(ivs) == 2 and not ivs[0].hi <= ivs[1].lo:
            raise ValueError("intervals must be disjoint and ordered")
        object.__setattr__(self, "intervals", ivs)
        if self.counts is not None:
            counts = tuple(int(c) for c in self.counts)
            if len(counts) != len(ivs) or any(c < 0 for c in counts):
                raise ValueError("one non-negative count per interval")
            object.__setattr__(self, "counts", counts)

    @classmethod
    def single(cls, lo: float, hi: float) -> "IntervalSystem":
        return cls((Interval(lo, hi),))

    @classmethod
    def pair(cls, first: tuple[float, float], second: tuple[float, float]) -> "IntervalSystem":
        return cls((Interval(*first), Interval(*second)))

    def with_counts(self, *counts: int) -> "IntervalSystem":
        return IntervalSystem(self.intervals, tuple(counts))

    def locate(self, x: float) -> int | None:
        for i, iv in enumerate(self.intervals):
            if iv.contains(x):
                return i
        return None

    def check_counts(self, h: float) -> None:
        if self.counts is None:
            return
        for iv, m in zip(self.intervals, self.counts):
            if m > capacity(iv, h):
                raise InfeasibleError(f"{m} charges do not fit in {iv} with gaps > {h}")

    def __str__(self) -> str:
        return " U ".join(str(iv) for iv in self.intervals)


# --------------------------------------------------------------------------
# external fields
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RationalFieldSpec:
    """External field with force (1/2h) log(1 + B/A) on ``domain``.

    With ``strict=True`` (default) construction checks positivity of
    (A+B)/A on a dense grid of each interval and the absence of shared
    real roots of A and B inside the domain.
    """

    A: DensePolynomial
    B: DensePolynomial
    h: float
    domain: IntervalSystem
    strict: bool = field(default=True, compare=False)

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("h must be positive")
        if self.A.is_zero():
            raise ValueError("A must be nonzero")
        if self.strict:
            problems = field_problems(self)
            if problems:
                raise DomainError("; ".join(problems))

    @property
    def S(self) -> DensePolynomial:
        """A + B, the numerator of the ratio 1 + B/A."""
        return self.A + self.B

    @functools.cached_property
    def reduced(self) -> tuple[DensePolynomial, DensePolynomial, DensePolynomial]:
        """(A, A+B, B) with shared real roots of A and A+B cancelled; the
        original polynomials when there is nothing to cancel."""
        A, S = cancel_common_roots(self.A, self.S)
        if A.degree == self.A.degree:
            return self.A, self.S, self.B
        return A, S, S - A

    def ratio(self, x):
        A, S, _ = self.reduced
        return S(x) / A(x)

    def with_domain(self, domain: IntervalSystem, strict: bool = False) -> "RationalFieldSpec":
        return RationalFieldSpec(self.A, self.B, self.h, domain, strict=strict)

    def scaled(self, lam: float) -> "RationalFieldSpec":
        return RationalFieldSpec(lam * self.A, lam * self.B, self.h, self.domain, strict=False)


def sample_grid(iv: Interval, count: int = 2048, extra: Iterable[float] = ()) -> np.ndarray:
    """Interior sample points, clustered toward finite endpoints and refined
    around the given special points (roots/poles) that lie inside."""
    s = (np.arange(count) + 0.5) / count
    if iv.bounded:
        # cosine spacing clusters at both ends
        pts = iv.lo + iv.length * 0.5 * (1.0 - np.cos(np.pi * s))
    else:
        scale = 1.0 + max([abs(v) for v in extra if math.isfinite(v)] + [abs(e) for e in (iv.lo, iv.hi) if math.isfinite(e)])
        t = np.tan(0.5 * np.pi * s) * scale
        pts = iv.lo + t if math.isfinite(iv.lo) else iv.hi - t
    refine = []
    for r in extra:
        if iv.contains(r):
            off = np.geomspace(1e-9, 1e-2, 16) * max(1.0, abs(r))
            refine.extend(r - off)
            refine.extend(r + off)
    if refine:
        pts = np.concatenate([pts, refine])
    pts = np.array([p for p in np.unique(pts) if iv.contains(float(p))])
    return pts


def field_problems(fld: RationalFieldSpec) -> list[str]:
    """Violations of the field invariants (empty when the field is valid)."""
    problems = []
    ra, rs = real_roots(fld.reduced[0]), real_roots(fld.reduced[1])
    shared = [r for r in real_roots(fld.A) if any(abs(r - s) <= 1e-9 * max(1.0, abs(r)) for s in real_roots(fld.B))]
    for iv in fld.domain.intervals:
        for r in shared:
            if iv.contains(r):
                problems.append(f"A and B share the root {r:.12g} inside {iv}")
        grid = sample_grid(iv, 2048, ra + rs)
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = fld.ratio(grid)
        bad = ~(vals > 0)
        if bad.any():
            problems.append(f"1 + B/A is not positive on {iv} (e.g. at x={float(grid[bad][0]):.12g})")
    try:
        fld.domain.check_counts(fld.h)
    except InfeasibleError as exc:
        problems.append(str(exc))
    return problems


# --------------------------------------------------------------------------
# configurations
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ChargeConfiguration:
    points: tuple[float, ...]
    h: float

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(float(p) for p in self.points))
        if not self.h > 0:
            raise ValueError("h must be positive")

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, j):
        return self.points[j]

    def as_array(self) -> np.ndarray:
        return np.array(self.points)

    def gaps(self) -> np.ndarray:
        return np.diff(self.as_array())

    def min_gap(self) -> float:
        return float(self.gaps().min()) if len(self.points) > 1 else math.inf


class ValidityReport(NamedTuple):
    ok: bool
    problem: str | None = None
    index: int | None = None

    def __bool__(self) -> bool:
        return self.ok


def validate_configuration(cfg: ChargeConfiguration, system: IntervalSystem) -> ValidityReport:
    """First violated constraint of a configuration, or a passing report."""
    pts = cfg.points
    for j in range(len(pts) - 1):
        gap = pts[j + 1] - pts[j]
        if not gap > cfg.h:
            return ValidityReport(False, f"gap {gap:.12g} <= h between points {j} and {j + 1}", j)
    tally = [0] * len(system.intervals)
    for j, x in enumerate(pts):
        where = system.locate(x)
        if where is None:
            return ValidityReport(False, f"point {x:.12g} is outside {system}", j)
        tally[where] += 1
    if system.counts is not None and tuple(tally) != system.counts:
        return ValidityReport(False, f"counts {tuple(tally)} differ from required {system.counts}")
    return ValidityReport(True)
