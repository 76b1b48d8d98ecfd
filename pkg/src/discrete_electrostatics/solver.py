"""Equilibrium distributions by cyclic one-charge (or mirror-pair) relaxation.

Each step frees one charge, keeps the others fixed and moves it to the unique
zero of the net force between its neighbours. For a G-convex field that net
force is strictly decreasing there and runs from +inf to -inf (or to finite
limits of opposite sign at an infinite end), so every step is a bracketed
1-D root find and lowers the energy.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .core import (
    ChargeConfiguration,
    InfeasibleError,
    Interval,
    NotGConvexError,
    RationalFieldSpec,
    capacity,
    validate_configuration,
)
from .electrostatics import energy, energy_hessian, external_force, total_forces
from .gconvex import check_gconvex, is_symmetric


@dataclass(frozen=True)
class SolverOptions:
    force_tolerance: float = 1e-11
    max_sweeps: int = 100_000
    bracket_shrink: float = 1e-13
    unbounded_box: float | None = None
    record_energy: bool = True

    def __post_init__(self):
        if not self.force_tolerance > 0:
            raise ValueError("force_tolerance must be positive")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be at least 1")


@dataclass(frozen=True)
class SolverResult:
    configuration: ChargeConfiguration
    sweeps: int
    final_max_force: float
    energy_trace: tuple[float, ...]
    converged: bool
    last_movement: float = math.nan
    box: tuple[float, float] | None = None
    diagnostics: tuple[str, ...] = ()

    @property
    def points(self) -> np.ndarray:
        return self.configuration.as_array()

    def to_dict(self) -> dict:
        return {
            "points": list(self.configuration.points),
            "h": self.configuration.h,
            "sweeps": self.sweeps,
            "final_max_force": self.final_max_force,
            "converged": self.converged,
            "last_movement": self.last_movement,
            "energy_trace": list(self.energy_trace),
            "box": list(self.box) if self.box else None,
            "diagnostics": list(self.diagnostics),
        }


@functools.lru_cache(maxsize=256)
def _gconvex_summary(fld: RationalFieldSpec) -> str | None:
    report = check_gconvex(fld)
    return None if report.is_gconvex else report.summary()


def require_gconvex(fld: RationalFieldSpec) -> None:
    problem = _gconvex_summary(fld)
    if problem is not None:
        raise NotGConvexError(f"field is not G-convex on {fld.domain}:\n{problem}")


# --------------------------------------------------------------------------
# single placement
# --------------------------------------------------------------------------


class _Bracket:
    """Finds the zero of a decreasing function on an open slot."""

    def __init__(self, f: Callable[[float], float], slot: Interval, shrink: float, box0: float):
        self.f = f
        self.slot = slot
        self.shrink = shrink
        self.box0 = box0
        self.reach: float | None = None

    def _inner(self, end: float, direction: int) -> tuple[float, float] | None:
        # step off a finite singular end; move closer while the sign is wrong
        eps = self.shrink * max(1.0, abs(end))
        tiny = math.ulp(end) * 2.0
        while True:
            x = end + direction * eps
            fx = self.f(x)
            if (fx > 0) if direction > 0 else (fx < 0):
                return x, fx
            if eps <= tiny:
                return None
            eps = max(eps / 16.0, tiny)

    def _outer(self, base: float, direction: int) -> tuple[float, float]:
        width = self.box0
        while True:
            x = base + direction * width
            fx = self.f(x)
            if (fx < 0) if direction > 0 else (fx > 0):
                self.reach = x
                return x, fx
            width *= 2.0
            if width > 1e15:
                raise RuntimeError("no sign change found on an unbounded slot")

    def solve(self) -> float:
        lo, hi = self.slot.lo, self.slot.hi
        if math.isfinite(lo):
            left = self._inner(lo, +1)
            if left is None:
                return lo + math.ulp(lo) * 2.0
        else:
            left = self._outer(hi, -1)
        if math.isfinite(hi):
            right = self._inner(hi, -1)
            if right is None:
                return hi - math.ulp(hi) * 2.0
        else:
            right = self._outer(lo, +1)
        a, b = left[0], right[0]
        if left[1] == 0.0:
            return a
        if right[1] == 0.0:
            return b
        return brentq(self.f, a, b, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=2000)


def _net_force_fn(fld: RationalFieldSpec, others: Sequence[float], extra: Callable[[float], float] | None = None):
    h = fld.h
    others = tuple(others)

    def f(x: float) -> float:
        s = external_force(fld, x)
        for xk in others:
            s += math.atanh(h / (x - xk)) / h
        if extra is not None:
            s += extra(x)
        return s

    return f


def _still(pts: Sequence[float]) -> float:
    """Movement below which a sweep counts as stagnant: a few ulps of the coordinates."""
    return 8.0 * np.finfo(float).eps * max(1.0, max(abs(v) for v in pts))


def _place(fld: RationalFieldSpec, others: Sequence[float], slot: Interval, opts: SolverOptions,
           box0: float, extra=None) -> tuple[float, float | None]:
    br = _Bracket(_net_force_fn(fld, others, extra), slot, opts.bracket_shrink, box0)
    return br.solve(), br.reach


def place_single(fixed: ChargeConfiguration, field: RationalFieldSpec, slot: Interval,
                 opts: SolverOptions | None = None) -> float:
    """Equilibrium position of one free charge in ``slot`` with ``fixed`` held."""
    opts = opts or SolverOptions()
    require_gconvex(field)
    box0 = opts.unbounded_box or 2.0 * (len(fixed) * field.h + 1.0)
    x, _ = _place(field, fixed.points, slot, opts, box0)
    return x


# --------------------------------------------------------------------------
# initial configurations
# --------------------------------------------------------------------------


def _spread(iv: Interval, n: int, h: float) -> list[float]:
    L = iv.length
    if n == 0:
        return []
    gap = L / (n + 1)
    if gap > 1.25 * h:
        return [iv.lo + k * gap for k in range(1, n + 1)]
    slack = L - (n - 1) * h
    g = h + slack / (n + 1)
    t = slack / (n + 1)
    return [iv.lo + t + k * g for k in range(n)]


def default_initial(fld: RationalFieldSpec, counts: Sequence[int], opts: SolverOptions | None = None) -> list[float]:
    opts = opts or SolverOptions()
    h = fld.h
    pts: list[float] = []
    for iv, m in zip(fld.domain.intervals, counts):
        if iv.bounded:
            pts.extend(_spread(iv, m, h))
            continue
        if m == 0:
            continue
        zero, _ = _place(fld, (), iv, opts, 2.0 * (h + 1.0))
        g = 1.25 * h
        start = zero - 0.5 * (m - 1) * g
        if math.isfinite(iv.lo):
            start = max(start, iv.lo + 0.5 * h)
        else:
            end = min(start + (m - 1) * g, iv.hi - 0.5 * h)
            start = end - (m - 1) * g
        pts.extend(start + k * g for k in range(m))
    return pts


def _resolve_counts(fld: RationalFieldSpec, n) -> tuple[int, ...]:
    k = len(fld.domain.intervals)
    if isinstance(n, (int, np.integer)):
        if k == 1:
            return (int(n),)
        if fld.domain.counts is not None and sum(fld.domain.counts) == n:
            return fld.domain.counts
        raise ValueError("a two-interval domain needs per-interval counts (n1, n2)")
    counts = tuple(int(c) for c in n)
    if len(counts) != k:
        raise ValueError(f"expected {k} counts, got {len(counts)}")
    return counts


def _feasibility(fld: RationalFieldSpec, counts: Sequence[int]) -> list[str]:
    notes = []
    for iv, m in zip(fld.domain.intervals, counts):
        cap = capacity(iv, fld.h)
        if m > cap:
            raise InfeasibleError(f"{m} charges exceed the capacity {cap} of {iv} for h={fld.h}")
        if iv.bounded and m == cap:
            notes.append(f"{m} charges equal the packing bound ceil(L/h) on {iv}")
    return notes


# --------------------------------------------------------------------------
# cyclic relaxation
# --------------------------------------------------------------------------


def _finish(pts, fld, sweeps, trace, converged, movement, reach, notes):
    cfg = ChargeConfiguration(tuple(pts), fld.h)
    fmax = float(np.abs(total_forces(pts, fld, fld.h)).max()) if len(pts) else 0.0
    box = None
    if reach is not None:
        ends = [iv for iv in fld.domain.intervals if not iv.bounded]
        iv = ends[0]
        box = (iv.lo, reach) if math.isfinite(iv.lo) else (reach, iv.hi)
    return SolverResult(cfg, sweeps, fmax, tuple(trace), converged, movement, box, tuple(notes))


def solve_equilibrium(field: RationalFieldSpec, n, opts: SolverOptions | None = None,
                      init: ChargeConfiguration | Sequence[float] | None = None) -> SolverResult:
    """Equilibrium of ``n`` unit charges (``(n1, n2)`` on two intervals).

    Sweeps j = 1..n, moving charge j to its equilibrium between the already
    updated left neighbour and the not yet updated right neighbour, until
    the largest net force is at most ``opts.force_tolerance``.
    """
    opts = opts or SolverOptions()
    fld = field
    require_gconvex(fld)
    counts = _resolve_counts(fld, n)
    notes = _feasibility(fld, counts)
    total = sum(counts)
    h = fld.h
    system = fld.domain.with_counts(*counts)

    if init is None:
        pts = default_initial(fld, counts, opts)
    else:
        pts = list(init.points if isinstance(init, ChargeConfiguration) else init)
    rep = validate_configuration(ChargeConfiguration(tuple(pts), h), system)
    if not rep:
        raise ValueError(f"invalid initial configuration: {rep.problem}")
    if total == 0:
        return SolverResult(ChargeConfiguration((), h), 0, 0.0, (), True, 0.0, None, tuple(notes))

    owner = [system.locate(x) for x in pts]
    box0 = opts.unbounded_box or 2.0 * (total * h + 1.0)
    trace: list[float] = []
    reach = None
    movement = math.inf
    converged = False
    sweeps = 0
    for sweeps in range(1, opts.max_sweeps + 1):
        movement = 0.0
        for j in range(total):
            iv = fld.domain.intervals[owner[j]]
            lo = max(iv.lo, pts[j - 1] + h) if j > 0 else iv.lo
            hi = min(iv.hi, pts[j + 1] - h) if j < total - 1 else iv.hi
            others = pts[:j] + pts[j + 1:]
            x, r = _place(fld, others, Interval(lo, hi), opts, box0)
            if r is not None:
                reach = r if reach is None or abs(r) > abs(reach) else reach
            movement = max(movement, abs(x - pts[j]))
            pts[j] = x
        gaps = np.diff(pts)
        if len(gaps) and not (gaps > h).all():
            raise RuntimeError(f"gap constraint violated after sweep {sweeps}")
        if opts.record_energy:
            trace.append(energy(ChargeConfiguration(tuple(pts), h), fld))
        fmax = float(np.abs(total_forces(pts, fld, h)).max())
        if fmax <= opts.force_tolerance:
            converged = True
            break
        if movement <= _still(pts):
            notes.append(f"stagnated at max force {fmax:.3e}: a full sweep moved no charge by more than a few ulps")
            break
    if not converged and sweeps >= opts.max_sweeps:
        notes.append(f"max_sweeps={opts.max_sweeps} reached")
    return _finish(pts, fld, sweeps, trace, converged, movement, reach, notes)


def solve_equilibrium_symmetric_pairs(field: RationalFieldSpec, n_pairs: int, center: float | None = None,
                                      opts: SolverOptions | None = None,
                                      init: Sequence[float] | None = None) -> SolverResult:
    """(n, n)-equilibrium on a mirror-symmetric two-interval field, moving
    mirror pairs (x, 2c - x) together.

    ``init`` optionally gives the n starting points of the upper interval.
    """
    opts = opts or SolverOptions()
    fld = field
    require_gconvex(fld)
    if len(fld.domain.intervals) != 2:
        raise ValueError("the mirror-pair method needs a two-interval domain")
    lower, upper = fld.domain.intervals
    if center is None:
        center = 0.5 * (lower.hi + upper.lo)
    tol = 1e-9 * max(1.0, abs(center))
    if abs(lower.lo - (2 * center - upper.hi)) > tol or abs(lower.hi - (2 * center - upper.lo)) > tol:
        raise ValueError(f"domain {fld.domain} is not symmetric about {center}")
    if not is_symmetric(fld, center):
        raise ValueError(f"external field is not odd about {center}")
    notes = _feasibility(fld, (n_pairs, n_pairs))
    h = fld.h
    n = n_pairs
    up = list(init) if init is not None else _spread(upper, n, h)
    if len(up) != n:
        raise ValueError(f"expected {n} initial points")

    def mirror_pull(x: float) -> float:
        return math.atanh(h / (2.0 * x - 2.0 * center)) / h

    def assemble() -> list[float]:
        return sorted([2.0 * center - x for x in up] + up)

    rep = validate_configuration(ChargeConfiguration(tuple(assemble()), h), fld.domain.with_counts(n, n))
    if not rep:
        raise ValueError(f"invalid initial configuration: {rep.problem}")
    if n == 0:
        return SolverResult(ChargeConfiguration((), h), 0, 0.0, (), True, 0.0, None, tuple(notes))

    trace: list[float] = []
    directions: list[set] = [set() for _ in range(n)]
    nonmonotone = 0
    converged = False
    movement = math.inf
    sweeps = 0
    for sweeps in range(1, opts.max_sweeps + 1):
        movement = 0.0
        for j in range(n):
            lo = max(upper.lo, up[j - 1] + h if j > 0 else -math.inf, center + 0.5 * h)
            hi = min(upper.hi, up[j + 1] - h) if j < n - 1 else upper.hi
            others = up[:j] + up[j + 1:] + [2.0 * center - x for i, x in enumerate(up) if i != j]
            slot = Interval(lo, hi)
            f = _net_force_fn(fld, others, mirror_pull)
            probe = np.linspace(lo, hi, 10)[1:-1]
            vals = [f(float(p)) for p in probe]
            if any(b > a for a, b in zip(vals, vals[1:])):
                nonmonotone += 1
            x, _ = _place(fld, others, slot, opts, 1.0, mirror_pull)
            step = x - up[j]
            if step != 0.0:
                directions[j].add(step > 0)
            movement = max(movement, abs(step))
            up[j] = x
        pts = assemble()
        gaps = np.diff(pts)
        if len(gaps) and not (gaps > h).all():
            raise RuntimeError(f"gap constraint violated after sweep {sweeps}")
        if opts.record_energy:
            trace.append(energy(ChargeConfiguration(tuple(pts), h), fld))
        fmax = float(np.abs(total_forces(pts, fld, h)).max())
        if fmax <= opts.force_tolerance:
            converged = True
            break
        if movement <= _still(up):
            notes.append(f"stagnated at max force {fmax:.3e}")
            break
    if nonmonotone:
        notes.append(f"pair force not monotone on {nonmonotone} sampled brackets")
    if any(len(d) > 1 for d in directions):
        notes.append("non-monotone movement: some charge changed direction between sweeps")
    else:
        notes.append("monotone movement: every charge moved in one direction throughout")
    if not converged and sweeps >= opts.max_sweeps:
        notes.append(f"max_sweeps={opts.max_sweeps} reached")
    return _finish(assemble(), fld, sweeps, trace, converged, movement, None, notes)


# --------------------------------------------------------------------------
# independent minimality check
# --------------------------------------------------------------------------


@dataclass
class FlowReport:
    refused: bool
    reason: str | None = None
    min_eigenvalue: float = math.nan
    eigenvalues: tuple[float, ...] = ()
    perturbations: int = 0
    all_increase: bool = False
    smallest_increase: float = math.nan

    @property
    def ok(self) -> bool:
        return not self.refused and self.min_eigenvalue > 0 and self.all_increase


def gradient_flow_check(field: RationalFieldSpec, result: SolverResult, perturbations: int = 20,
                        magnitude: float = 1e-4, seed: int = 0) -> FlowReport:
    """Check that a converged result is a strict local minimum of the energy:
    positive definite finite-difference Hessian and higher energy at random
    feasible perturbations."""
    if _gconvex_summary(field) is not None:
        return FlowReport(True, "field is not G-convex")
    if not result.converged:
        return FlowReport(True, "result did not converge")
    cfg = result.configuration
    H = energy_hessian(cfg, field)
    eig = np.linalg.eigvalsh(H)
    e0 = energy(cfg, field)
    rng = np.random.default_rng(seed)
    x = cfg.as_array()
    system = field.domain
    counts = tuple(sum(1 for v in x if system.locate(v) == i) for i in range(len(system.intervals)))
    system = system.with_counts(*counts)
    rises = []
    while len(rises) < perturbations:
        trial = ChargeConfiguration(x + rng.uniform(-magnitude, magnitude, size=x.size), cfg.h)
        if not validate_configuration(trial, system):
            continue
        rises.append(energy(trial, field) - e0)
    return FlowReport(
        False,
        None,
        float(eig.min()),
        tuple(float(v) for v in eig),
        perturbations,
        all(r > 0 for r in rises),
        float(min(rises)),
    )
