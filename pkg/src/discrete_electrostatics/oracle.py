"""Independent checks for the solver: brute-force grid minimization of the
energy for a handful of charges, interlacing, and parameter sweeps that
compare external forces before comparing roots."""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
from scipy import integrate
from scipy.optimize import minimize_scalar

from .core import ChargeConfiguration, InfeasibleError, Interval, RationalFieldSpec, capacity, sample_grid
from .electrostatics import energy, external_force, field_potential, pair_potential
from .families import FamilySpec, domain_of, field_of, positive_half, solve_family
from .solver import solve_equilibrium

DEFAULT_RESOLUTION = {1: 1000, 2: 400, 3: 120}


def _pair_potential_vec(d: np.ndarray, h: float) -> np.ndarray:
    """pair_potential for an array of distances d >= h (contact value at d == h)."""
    d = np.asarray(d, dtype=float)
    out = np.full(d.shape, -math.log(2.0 * h))
    far = d > h
    df = d[far]
    out[far] = -df * np.arctanh(h / df) / h - 0.5 * (np.log(df - h) + np.log(df + h))
    return out


def _oracle_box(field: RationalFieldSpec, n: int) -> Interval:
    iv = field.domain.intervals[0]
    if iv.bounded:
        return iv
    # clip the unbounded end at 1.5 times the extent of the solver's answer
    pts = solve_equilibrium(field, n).points
    if math.isfinite(iv.lo):
        return Interval(iv.lo, iv.lo + 1.5 * (pts[-1] - iv.lo) + field.h)
    return Interval(iv.hi - 1.5 * (iv.hi - pts[0]) - field.h, iv.hi)


def _potential_on_grid(field: RationalFieldSpec, grid: np.ndarray) -> np.ndarray:
    phi = np.empty(len(grid))
    phi[0] = field_potential(field, float(grid[0]))
    for i in range(1, len(grid)):
        step, _ = integrate.quad(lambda t: -external_force(field, t), grid[i - 1], grid[i],
                                 epsabs=1e-14, epsrel=1e-13)
        phi[i] = phi[i - 1] + step
    return phi


def _polish(field: RationalFieldSpec, pts: list[float], box: Interval, rounds: int = 25) -> list[float]:
    """Cyclic 1-D minimization of the energy, one coordinate at a time."""
    h = field.h
    n = len(pts)
    for _ in range(rounds):
        moved = 0.0
        for j in range(n):
            lo = pts[j - 1] + h if j > 0 else box.lo
            hi = pts[j + 1] - h if j < n - 1 else box.hi
            pad = 1e-12 * max(1.0, abs(lo), abs(hi))
            lo, hi = lo + pad, hi - pad
            if not lo < hi:
                continue
            others = pts[:j] + pts[j + 1:]
            base = pts[j]

            def e(x: float) -> float:
                s = 2.0 * sum(pair_potential(x, y, h) for y in others)
                return s + 2.0 * integrate.quad(lambda t: -external_force(field, t), base, x,
                                                epsabs=1e-15, epsrel=1e-13)[0]

            with warnings.catch_warnings():
                # log-singular endpoints slow quad down but do not spoil the comparison
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                res = minimize_scalar(e, bounds=(lo, hi), method="bounded", options={"xatol": 1e-11})
            if res.fun < e(base):
                moved = max(moved, abs(res.x - base))
                pts[j] = float(res.x)
        if moved < 1e-10:
            break
    return pts


def grid_minimize(field: RationalFieldSpec, n: int, resolution: int | None = None,
                  box: tuple[float, float] | None = None, polish: bool = True) -> ChargeConfiguration:
    """Global energy minimizer of n <= 3 charges on a one-interval domain by
    exhaustive search of a uniform grid, then coordinate-descent polish.

    Unbounded domains are clipped to 1.5 times the solver's extent unless
    ``box`` is given.
    """
    if not 1 <= n <= 3:
        raise ValueError("grid_minimize handles 1 to 3 charges")
    if len(field.domain.intervals) != 1:
        raise ValueError("grid_minimize works on one-interval domains")
    h = field.h
    dom = field.domain.intervals[0]
    if n > capacity(dom, h):
        raise InfeasibleError(f"{n} charges do not fit in {dom}")
    iv = Interval(*box) if box is not None else _oracle_box(field, n)
    if iv.lo < dom.lo or iv.hi > dom.hi:
        raise ValueError(f"box {iv} leaves the domain {dom}")
    res = resolution or DEFAULT_RESOLUTION[n]
    step = iv.length / res
    grid = iv.lo + (np.arange(res) + 0.5) * step
    phi = _potential_on_grid(field, grid)
    gap = h / step
    # pair potential as a function of the index offset
    offsets = np.arange(res)
    V = np.full(res, np.inf)
    ok = offsets > gap * (1.0 + 1e-12)
    V[ok] = _pair_potential_vec(offsets[ok] * step, h)

    if n == 1:
        idx = (int(np.argmin(phi)),)
    elif n == 2:
        E = 2.0 * V[np.abs(offsets[None, :] - offsets[:, None])] + 2.0 * (phi[:, None] + phi[None, :])
        E[np.tril_indices(res)] = np.inf
        idx = np.unravel_index(int(np.argmin(E)), E.shape)
    else:
        best, idx = np.inf, None
        k = offsets
        for i in range(res):
            j = k[:, None]
            kk = k[None, :]
            valid = (j > i) & (kk > j)
            if not valid.any():
                continue
            E = (2.0 * (V[np.clip(j - i, 0, res - 1)] + V[np.clip(kk - j, 0, res - 1)] + V[np.clip(kk - i, 0, res - 1)])
                 + 2.0 * (phi[i] + phi[j] + phi[kk]))
            E = np.where(valid, E, np.inf)
            m = int(np.argmin(E))
            if E.flat[m] < best:
                best = E.flat[m]
                idx = (i,) + np.unravel_index(m, E.shape)
        if idx is None:
            raise InfeasibleError("no feasible grid triple")
    pts = [float(grid[i]) for i in idx]
    if not np.all(np.isfinite([V[abs(a - b)] for a in idx for b in idx if a != b] or [0.0])):
        raise InfeasibleError("grid too coarse for the exclusion radius")
    if polish:
        pts = _polish(field, pts, iv)
    return ChargeConfiguration(tuple(pts), h)


def interlacing_check(lower: ChargeConfiguration | Sequence[float],
                      upper: ChargeConfiguration | Sequence[float]) -> bool:
    """upper_0 < lower_0 < upper_1 < ... < lower_{n-1} < upper_n."""
    lo = list(lower)
    up = list(upper)
    if len(up) != len(lo) + 1:
        raise ValueError(f"need |upper| = |lower| + 1, got {len(up)} and {len(lo)}")
    merged = [v for pair in zip(up, lo) for v in pair] + [up[-1]]
    return all(a < b for a, b in zip(merged, merged[1:]))


# --------------------------------------------------------------------------
# parameter sweeps
# --------------------------------------------------------------------------


@dataclass
class SweepEntry:
    first: str
    second: str
    force_relation: str  # "<", ">" or "none"
    endpoints_ok: bool
    hypothesis_established: bool
    ordering: str  # "increasing", "decreasing" or "mixed"
    consistent: bool
    roots_first: list[float]
    roots_second: list[float]


@dataclass
class SweepReport:
    entries: list[SweepEntry]

    @property
    def hypotheses_established(self) -> bool:
        return all(e.hypothesis_established for e in self.entries)

    @property
    def ok(self) -> bool:
        """Every established hypothesis is followed by the predicted ordering."""
        return all(e.consistent for e in self.entries if e.hypothesis_established)

    @property
    def ordering(self) -> str:
        kinds = {e.ordering for e in self.entries}
        return kinds.pop() if len(kinds) == 1 else "mixed"

    def to_dict(self) -> dict:
        return {
            "entries": [asdict(e) for e in self.entries],
            "hypotheses_established": self.hypotheses_established,
            "ok": self.ok,
            "ordering": self.ordering,
        }


def _upper_interval(spec: FamilySpec) -> Interval:
    return domain_of(spec).intervals[-1]


def compare_forces(s1: FamilySpec, s2: FamilySpec, samples: int = 512) -> tuple[str, bool]:
    """Pointwise relation of the two external forces on the common part of
    the (upper) domain intervals, and whether the endpoints are ordered the
    same way."""
    f1, f2 = field_of(s1), field_of(s2)
    i1, i2 = _upper_interval(s1), _upper_interval(s2)
    lo, hi = max(i1.lo, i2.lo), min(i1.hi, i2.hi)
    if not lo < hi:
        return "none", False
    grid = sample_grid(Interval(lo, hi), samples)
    less = more = True
    for x in grid:
        try:
            a, b = external_force(f1, float(x)), external_force(f2, float(x))
        except ValueError:
            continue
        if not (math.isfinite(a) and math.isfinite(b)):
            continue
        less &= a < b
        more &= a > b
    relation = "<" if less else ">" if more else "none"
    if relation == "<":
        ends = i1.lo <= i2.lo and i1.hi <= i2.hi
    elif relation == ">":
        ends = i1.lo >= i2.lo and i1.hi >= i2.hi
    else:
        ends = False
    return relation, ends


def _ordering(r1: Sequence[float], r2: Sequence[float]) -> str:
    if all(a < b for a, b in zip(r1, r2)):
        return "increasing"
    if all(a > b for a, b in zip(r1, r2)):
        return "decreasing"
    return "mixed"


def monotonicity_sweep(specs: Sequence[FamilySpec], roots: Sequence[Sequence[float]] | None = None) -> SweepReport:
    """Compare consecutive presets: first the external forces on a grid (the
    hypothesis), then the roots componentwise (the conclusion).

    ``roots`` may supply precomputed equilibria, one list per spec; on the
    quadratic lattice only the upper-interval roots are compared.
    """
    if len(specs) < 2:
        raise ValueError("a sweep needs at least two presets")
    if roots is None:
        roots = [solve_family(s).points for s in specs]
    halves = [positive_half(s, r) for s, r in zip(specs, roots)]
    entries = []
    for k in range(len(specs) - 1):
        s1, s2 = specs[k], specs[k + 1]
        relation, ends = compare_forces(s1, s2)
        established = relation != "none" and ends
        order = _ordering(halves[k], halves[k + 1])
        predicted = {"<": "increasing", ">": "decreasing"}.get(relation)
        entries.append(SweepEntry(
            s1.label(), s2.label(), relation, ends, established, order, order == predicted,
            [float(v) for v in halves[k]], [float(v) for v in halves[k + 1]],
        ))
    return SweepReport(entries)
