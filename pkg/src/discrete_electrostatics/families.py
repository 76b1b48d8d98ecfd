"""Presets for Charlier, Krawtchouk, Meixner, Hahn, Dual Hahn and Racah
polynomials: difference-equation coefficients, domains, hypergeometric
values, weights and a sign-change root oracle on the lattice."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np
from scipy.optimize import brentq

from .core import DensePolynomial, Interval, IntervalSystem, RationalFieldSpec, capacity
from .solver import SolverOptions, SolverResult, solve_equilibrium, solve_equilibrium_symmetric_pairs

FAMILIES = ("charlier", "krawtchouk", "meixner", "hahn", "dual_hahn", "racah")

# parameter names per family, in the usual order
PARAMETERS = {
    "charlier": ("a",),
    "krawtchouk": ("p", "N"),
    "meixner": ("beta", "c"),
    "hahn": ("alpha", "beta", "N"),
    "dual_hahn": ("gamma", "delta", "N"),
    "racah": ("alpha", "beta", "gamma", "delta"),
}

STANDARD = "standard"


class FamilyError(ValueError):
    pass


def _is_int(v: float) -> bool:
    return float(v).is_integer()


# Hahn G-convex windows: (row, test, interval)
def _hahn_rows(al: float, be: float, N: float):
    return [
        (1, N > 0 and al > -1 and be > -1, (0.0, N)),
        (2, N > 0 and al <= -N - 1 and be <= -N - 1, (0.0, N)),
        (3, N > 0 and -N - 1 <= al < -1 and be <= -N - 1, (0.0, -al - 1)),
        (4, N > 0 and al <= -N - 1 and -N - 1 <= be < -1, (N + be + 1, N)),
        (5, N > 0 and al >= -N - 1 and be >= -N - 1 and al + be < -N - 2, (N + be + 1, -al - 1)),
        (6, N < 0 and al < -1 and al + be > -N - 2, (0.0, -al - 1)),
        (7, N < 0 and al + be > -N - 2 and be < -1, (N + be + 1, N)),
        (8, N < 0 and al > -1 and be > -1 and al + be < -N - 2, (N + be + 1, -al - 1)),
    ]


def hahn_row(alpha: float, beta: float, N: float) -> tuple[int, tuple[float, float]]:
    for row, ok, iv in _hahn_rows(alpha, beta, N):
        if ok:
            return row, iv
    raise FamilyError(f"Hahn parameters alpha={alpha}, beta={beta}, N={N} match no G-convex regime")


@dataclass(frozen=True)
class FamilySpec:
    """One member of a family: parameters, degree n and regime tag.

    Build instances with the family functions (``charlier(a, n)`` etc.) or
    ``make_family``; they validate the parameters and fill in the regime.
    """

    family: str
    params: tuple[tuple[str, float], ...]
    n: int
    regime: str = STANDARD

    def __getitem__(self, name: str) -> float:
        for k, v in self.params:
            if k == name:
                return v
        raise KeyError(name)

    def as_dict(self) -> dict:
        return dict(self.params)

    @property
    def standard(self) -> bool:
        return self.regime == STANDARD

    @property
    def quadratic(self) -> bool:
        return self.family in ("dual_hahn", "racah")

    def replace(self, **changes) -> "FamilySpec":
        vals = self.as_dict()
        n = changes.pop("n", self.n)
        vals.update(changes)
        return make_family(self.family, n, **vals)

    def label(self) -> str:
        inner = ", ".join(f"{k}={v:g}" for k, v in self.params)
        return f"{self.family}({inner}; n={self.n})"


def make_family(family: str, n: int, **params: float) -> FamilySpec:
    family = family.lower().replace("-", "_")
    if family not in FAMILIES:
        raise FamilyError(f"unknown family {family!r}")
    names = PARAMETERS[family]
    if family == "racah" and "alpha" not in params and "N" in params:
        params["alpha"] = -float(params.pop("N")) - 1.0
    missing = [k for k in names if k not in params]
    extra = [k for k in params if k not in names]
    if missing or extra:
        raise FamilyError(f"{family} takes parameters {names}; missing {missing}, unexpected {extra}")
    if int(n) != n or n < 0:
        raise FamilyError(f"degree must be a non-negative integer, got {n}")
    vals = {k: float(params[k]) for k in names}
    regime = _regime(family, vals, int(n))
    return FamilySpec(family, tuple((k, vals[k]) for k in names), int(n), regime)


def _regime(family: str, v: dict, n: int) -> str:
    if family == "charlier":
        if not v["a"] > 0:
            raise FamilyError("Charlier needs a > 0")
        return STANDARD
    if family == "krawtchouk":
        p, N = v["p"], v["N"]
        if not 0 < p < 1 or not _is_int(N) or N < 1 or n > N:
            raise FamilyError("Krawtchouk needs 0 < p < 1, integer N >= 1 and n <= N")
        return STANDARD
    if family == "meixner":
        be, c = v["beta"], v["c"]
        if be > 0 and 0 < c < 1:
            return STANDARD
        if be > 0 and c > 1:
            return "c>1"
        if be < 0 and c < 0:
            return "c<0,beta<0"
        raise FamilyError(f"Meixner beta={be}, c={c} is not a supported regime")
    if family == "hahn":
        al, be, N = v["alpha"], v["beta"], v["N"]
        row, (lo, hi) = hahn_row(al, be, N)
        if n > capacity(Interval(lo, hi), 1.0):
            raise FamilyError(f"n={n} charges do not fit in ({lo:g}, {hi:g})")
        if row == 1 and _is_int(N):
            return STANDARD
        return f"row{row}"
    if family == "dual_hahn":
        g, d, N = v["gamma"], v["delta"], v["N"]
        if g < 0 or d < 0 or not _is_int(N) or N < 1 or n > N:
            raise FamilyError("Dual Hahn needs gamma, delta >= 0, integer N >= 1 and n <= N")
        return STANDARD
    # racah
    al, be, g, d = v["alpha"], v["beta"], v["gamma"], v["delta"]
    N = -al - 1
    if not _is_int(N) or N < 1 or g < 0 or d < 0 or not be > g + N or n > N:
        raise FamilyError("Racah is supported for alpha = -N-1 (integer N >= 1), gamma, delta >= 0, "
                          "beta > gamma + N and n <= N")
    return STANDARD


def charlier(a: float, n: int) -> FamilySpec:
    return make_family("charlier", n, a=a)


def krawtchouk(p: float, N: int, n: int) -> FamilySpec:
    return make_family("krawtchouk", n, p=p, N=N)


def meixner(beta: float, c: float, n: int) -> FamilySpec:
    return make_family("meixner", n, beta=beta, c=c)


def hahn(alpha: float, beta: float, N: float, n: int) -> FamilySpec:
    return make_family("hahn", n, alpha=alpha, beta=beta, N=N)


def dual_hahn(gamma: float, delta: float, N: int, n: int) -> FamilySpec:
    return make_family("dual_hahn", n, gamma=gamma, delta=delta, N=N)


def racah(N: int, beta: float, gamma: float, delta: float, n: int) -> FamilySpec:
    """Racah with alpha = -N - 1, the positive-measure regime implemented here."""
    return make_family("racah", n, alpha=-N - 1, beta=beta, gamma=gamma, delta=delta)


# --------------------------------------------------------------------------
# lattice and coefficients
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Lattice:
    kind: str  # "uniform" or "quadratic"
    shift: float = 0.0  # lambda(x) = x (x + shift) on the quadratic lattice

    def lam(self, x):
        return x if self.kind == "uniform" else x * (x + self.shift)

    @property
    def center(self) -> float:
        return -0.5 * self.shift

    def separation_hypothesis(self) -> bool:
        """shift >= 1/2, required for root separation on the quadratic lattice."""
        return self.kind == "uniform" or self.shift >= 0.5


def lattice_of(spec: FamilySpec) -> Lattice:
    if spec.quadratic:
        return Lattice("quadratic", spec["gamma"] + spec["delta"] + 1.0)
    return Lattice("uniform")


def _lin(root_shift: float, slope: float = 1.0) -> tuple[float, float]:
    # slope * x + root_shift
    return (root_shift, slope)


def coefficients(spec: FamilySpec) -> tuple[DensePolynomial, DensePolynomial]:
    """(A, B) of A Delta Nabla y + B Delta y + C y = 0 with h = 1."""
    v = spec.as_dict()
    P = DensePolynomial
    f = spec.family
    if f == "charlier":
        return P((0.0, 1.0)), P((v["a"], -1.0))
    if f == "krawtchouk":
        p, N = v["p"], v["N"]
        return P((0.0, 1.0 - p)), P((p * N, -1.0))
    if f == "meixner":
        be, c = v["beta"], v["c"]
        return P((0.0, 1.0)), P((c * be, c - 1.0))
    if f == "hahn":
        al, be, N = v["alpha"], v["beta"], v["N"]
        return P.product((0.0, 1.0), _lin(-be - N - 1)), P((-(al + 1) * N, al + be + 2))
    g, d = v["gamma"], v["delta"]
    if f == "dual_hahn":
        N = v["N"]
        A = P.product((0.0, 1.0), _lin(g + d + N + 1), _lin(d), _lin(g + d + 2, 2.0))
        S = P.product(_lin(g + 1), _lin(g + d + 1), (N, -1.0), _lin(g + d, 2.0))
        return A, S - A
    al, be = v["alpha"], v["beta"]
    A = P.product((0.0, 1.0), _lin(-be + g), _lin(d), _lin(-al + g + d), _lin(g + d + 2, 2.0))
    S = P.product(_lin(al + 1), _lin(g + 1), _lin(be + d + 1), _lin(g + d + 1), _lin(g + d, 2.0))
    return A, S - A


def domain_of(spec: FamilySpec) -> IntervalSystem:
    v = spec.as_dict()
    f = spec.family
    if f == "charlier":
        return IntervalSystem.single(0.0, math.inf)
    if f == "krawtchouk":
        return IntervalSystem.single(0.0, v["N"])
    if f == "meixner":
        if spec.regime == STANDARD:
            return IntervalSystem.single(0.0, math.inf)
        if spec.regime == "c>1":
            return IntervalSystem.single(-math.inf, -v["beta"])
        return IntervalSystem.single(0.0, -v["beta"])
    if f == "hahn":
        _, (lo, hi) = hahn_row(v["alpha"], v["beta"], v["N"])
        return IntervalSystem.single(lo, hi)
    g, d = v["gamma"], v["delta"]
    N = v["N"] if f == "dual_hahn" else -v["alpha"] - 1
    return IntervalSystem(
        (Interval(-g - d - N - 1, -g - d - 1), Interval(0.0, N)), (spec.n, spec.n)
    )


def field_of(spec: FamilySpec, h: float = 1.0) -> RationalFieldSpec:
    A, B = coefficients(spec)
    return RationalFieldSpec(A, B, h, domain_of(spec))


def lattice_factor(spec: FamilySpec) -> DensePolynomial:
    """(2x+g+d)(2x+g+d+1)(2x+g+d+2) on the quadratic lattice, 1 otherwise."""
    if not spec.quadratic:
        return DensePolynomial((1.0,))
    s = spec["gamma"] + spec["delta"]
    return DensePolynomial.product(_lin(s, 2.0), _lin(s + 1, 2.0), _lin(s + 2, 2.0))


def eigen_term(spec: FamilySpec) -> DensePolynomial:
    """The exact C(x) for which the family polynomial solves the equation
    with the coefficients returned by ``coefficients``."""
    n = spec.n
    f = spec.family
    if f in ("charlier", "krawtchouk"):
        lam = float(n)
    elif f == "meixner":
        lam = n * (1.0 - spec["c"])
    elif f == "hahn":
        lam = -n * (n + spec["alpha"] + spec["beta"] + 1.0)
    elif f == "dual_hahn":
        lam = float(n)
    else:
        lam = -n * (n + spec["alpha"] + spec["beta"] + 1.0)
    return lam * lattice_factor(spec)


def nominal_term(spec: FamilySpec) -> DensePolynomial:
    """C normalized as n (uniform lattice) or n times the lattice factor, the
    form usually quoted for all six families. It coincides with
    ``eigen_term`` only for Charlier, Krawtchouk and Dual Hahn."""
    return float(spec.n) * lattice_factor(spec)


# --------------------------------------------------------------------------
# hypergeometric values
# --------------------------------------------------------------------------


def _hyp_parameters(spec: FamilySpec, x: float) -> tuple[list[float], list[float], float]:
    n = spec.n
    v = spec.as_dict()
    f = spec.family
    if f == "charlier":
        return [-n, -x], [], -1.0 / v["a"]
    if f == "krawtchouk":
        return [-n, -x], [-v["N"]], 1.0 / v["p"]
    if f == "meixner":
        return [-n, -x], [v["beta"]], 1.0 - 1.0 / v["c"]
    if f == "hahn":
        al, be, N = v["alpha"], v["beta"], v["N"]
        return [-n, n + al + be + 1, -x], [al + 1, -N], 1.0
    g, d = v["gamma"], v["delta"]
    if f == "dual_hahn":
        return [-n, -x, x + g + d + 1], [g + 1, -v["N"]], 1.0
    al, be = v["alpha"], v["beta"]
    return [-n, n + al + be + 1, -x, x + g + d + 1], [al + 1, be + d + 1, g + 1], 1.0


def _hyp_sum(spec: FamilySpec, x: float) -> tuple[float, float]:
    num, den, z = _hyp_parameters(spec, x)
    term = 1.0
    total = 1.0
    scale = 1.0
    for k in range(spec.n):
        r = z / (k + 1)
        for a in num:
            r *= a + k
        for b in den:
            if b + k == 0:
                raise FamilyError(f"denominator Pochhammer vanishes at k={k} for {spec.label()}")
            r /= b + k
        term *= r
        total += term
        scale += abs(term)
    return total, scale


def hyp_eval(spec: FamilySpec, x: float) -> float:
    """Terminating hypergeometric representation of the family polynomial.

    On the quadratic lattice ``x`` is the lattice variable, so this returns
    the polynomial evaluated at lambda(x).
    """
    return _hyp_sum(spec, x)[0]


# --------------------------------------------------------------------------
# weights and orthogonality
# --------------------------------------------------------------------------


def _poch(a: float, k: int) -> float:
    out = 1.0
    for i in range(k):
        out *= a + i
    return out


def _support_size(spec: FamilySpec) -> float:
    f = spec.family
    if f in ("charlier", "meixner"):
        return math.inf
    if f == "racah":
        return -spec["alpha"] - 1
    return spec["N"]


def weight_closed_form(spec: FamilySpec, j: int) -> float:
    v = spec.as_dict()
    f = spec.family
    if f == "charlier":
        return math.exp(j * math.log(v["a"]) - math.lgamma(j + 1))
    if f == "krawtchouk":
        p, N = v["p"], int(v["N"])
        return math.comb(N, j) * p ** j * (1 - p) ** (N - j)
    if f == "meixner":
        be, c = v["beta"], v["c"]
        return math.exp(math.lgamma(be + j) - math.lgamma(be) - math.lgamma(j + 1) + j * math.log(c))
    if f == "hahn":
        al, be, N = v["alpha"], v["beta"], v["N"]
        lg = math.lgamma
        return math.exp(lg(al + j + 1) - lg(j + 1) - lg(al + 1) + lg(be + N - j + 1) - lg(N - j + 1) - lg(be + 1))
    g, d = v["gamma"], v["delta"]
    if f == "dual_hahn":
        N = v["N"]
        return ((-1) ** j * _poch(-N, j) * _poch(g + 1, j) * (2 * j + g + d + 1)
                / (math.factorial(j) * _poch(j + g + d + 1, int(N) + 1) * _poch(d + 1, j)))
    al, be = v["alpha"], v["beta"]
    s = g + d
    return (_poch(al + 1, j) * _poch(be + d + 1, j) * _poch(g + 1, j) * _poch(s + 1, j) * _poch((s + 3) / 2, j)
            / (math.factorial(j) * _poch(-al + s + 1, j) * _poch(-be + g + 1, j) * _poch(d + 1, j)
               * _poch((s + 1) / 2, j)))


def weight(spec: FamilySpec, j: int) -> float:
    """Weight at node j from the Pearson recursion w(k) = (A+B)(k-1) w(k-1) / A(k).

    The product is accumulated in log space and scaled to the closed-form
    value at j = 0. On the quadratic lattice the orthogonality weight is the
    Pearson solution times the lattice factor.
    """
    size = _support_size(spec)
    if j < 0 or j > size or int(j) != j:
        raise FamilyError(f"node {j} is outside the support of {spec.label()}")
    A, B = coefficients(spec)
    S = A + B
    logw = 0.0
    sign = 1.0
    for k in range(1, j + 1):
        num, den = S(k - 1.0), A(float(k))
        sign *= math.copysign(1.0, num) * math.copysign(1.0, den)
        logw += math.log(abs(num)) - math.log(abs(den))
    w = weight_closed_form(spec, 0) * sign * math.exp(logw)
    if spec.quadratic:
        P = lattice_factor(spec)
        w *= P(float(j)) / P(0.0)
    return w


def nodes(spec: FamilySpec) -> Iterator[int]:
    size = _support_size(spec)
    j = 0
    while j <= size:
        yield j
        j += 1


def orthogonality_residual(spec: FamilySpec, tail_run: int = 30) -> float:
    """max_k |sum_j p(xi_j) xi_j^k w_j| / sum_j |p(xi_j) xi_j^k| w_j over k < n."""
    if not spec.standard:
        raise FamilyError("orthogonality is only claimed for standard (positive-measure) parameters")
    n = spec.n
    if n == 0:
        return 0.0
    lat = lattice_of(spec)
    signed = np.zeros(n)
    absolute = np.zeros(n)
    quiet = 0
    for j in nodes(spec):
        xi = lat.lam(float(j))
        terms = hyp_eval(spec, float(j)) * weight(spec, j) * xi ** np.arange(n)
        signed += terms
        absolute += np.abs(terms)
        if math.isinf(_support_size(spec)):
            small = np.all(np.abs(terms) < 1e-16 * np.maximum(absolute, 1e-300))
            quiet = quiet + 1 if small else 0
            if quiet >= tail_run:
                break
            if j > 100_000:
                raise RuntimeError("orthogonality sum did not settle")
    return float(np.max(np.abs(signed) / absolute))


# --------------------------------------------------------------------------
# lattice root oracle
# --------------------------------------------------------------------------


def _scan_roots(f: Callable[[float], tuple[float, float]], start: float, step: float, count: int,
                limit: float, budget: int = 200_000) -> list[float]:
    """Roots of f along start, start+step, ... up to ``limit``; stop after ``count``."""
    roots: list[float] = []
    prev_x, prev_v = None, None
    x = start
    for _ in range(budget):
        if (step > 0 and x > limit) or (step < 0 and x < limit):
            break
        v, scale = f(x)
        if abs(v) <= 1e-14 * scale:
            roots.append(x)
            prev_x, prev_v = None, None
        else:
            if prev_v is not None and (prev_v > 0) != (v > 0):
                a, b = sorted((prev_x, x))
                roots.append(brentq(lambda t: f(t)[0], a, b, xtol=1e-13, rtol=4 * np.finfo(float).eps))
            prev_x, prev_v = x, v
        if len(roots) >= count:
            break
        x += step
    return sorted(roots)


def lattice_root_oracle(spec: FamilySpec, allow_nonstandard: bool = False) -> list[float]:
    """Roots from sign changes of the hypergeometric sum between lattice nodes.

    Consecutive roots are more than one unit apart, so unit steps isolate
    them. On the quadratic lattice the 2n roots in x are returned (the n in
    the upper interval and their mirror images).
    """
    if not spec.standard and not allow_nonstandard:
        raise FamilyError("the lattice oracle is for standard regimes; pass allow_nonstandard=True")
    n = spec.n
    if n == 0:
        return []
    f = lambda t: _hyp_sum(spec, t)  # noqa: E731
    dom = domain_of(spec)
    iv = dom.intervals[-1]
    if math.isfinite(iv.lo):
        roots = _scan_roots(f, iv.lo, 1.0, n, iv.hi)
    else:
        roots = _scan_roots(f, iv.hi, -1.0, n, iv.lo)
    roots = [r for r in roots if iv.contains(r)]
    if len(roots) < n and math.isfinite(iv.hi) and math.isfinite(iv.lo):
        # the last cell may be shorter than a unit step
        roots = [r for r in _scan_roots(f, iv.lo, 0.5, n, iv.hi) if iv.contains(r)]
        if len(roots) < n:
            roots = [r for r in _scan_roots(f, iv.hi, -0.5, n, iv.lo) if iv.contains(r)]
    if len(roots) != n:
        raise FamilyError(f"found {len(roots)} of {n} roots for {spec.label()}")
    if spec.quadratic:
        c2 = -lattice_of(spec).shift
        roots = sorted([c2 - r for r in roots] + roots)
    return roots


def lambda_roots(spec: FamilySpec) -> list[float]:
    """The n roots in the lattice variable lambda (quadratic lattice only)."""
    if not spec.quadratic:
        raise FamilyError(f"{spec.family} lives on the uniform lattice")
    lat = lattice_of(spec)
    xs = lattice_root_oracle(spec)
    return [float(lat.lam(x)) for x in xs[spec.n:]]


def solve_family(spec: FamilySpec, opts: SolverOptions | None = None, h: float = 1.0,
                 init=None) -> SolverResult:
    """Equilibrium for a preset; quadratic-lattice families use mirror pairs."""
    fld = field_of(spec, h)
    if spec.quadratic:
        return solve_equilibrium_symmetric_pairs(fld, spec.n, lattice_of(spec).center, opts, init)
    return solve_equilibrium(fld, spec.n, opts, init)


def positive_half(spec: FamilySpec, points) -> list[float]:
    """Roots in the upper interval for quadratic-lattice families, all roots otherwise."""
    pts = list(points)
    return pts[len(pts) // 2:] if spec.quadratic else pts


# --------------------------------------------------------------------------
# external field as fixed charges
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FixedCharge:
    location: float
    size: float
    radius: float

    def force(self, y: float) -> float:
        d = y - self.location
        return self.size / (2.0 * self.radius) * math.log((d + self.radius) / (d - self.radius))


@dataclass(frozen=True)
class FieldDecomposition:
    charges: tuple[FixedCharge, ...]
    constant: float

    def force(self, y: float) -> float:
        return self.constant + sum(c.force(y) for c in self.charges)


def field_decomposition(spec: FamilySpec, h: float = 1.0) -> FieldDecomposition:
    """Fixed charges (location, size, exclusion radius) plus a constant force
    reproducing the external force of Meixner and Hahn fields."""
    if spec.family == "meixner" and spec.standard:
        be, c = spec["beta"], spec["c"]
        r = be / 2.0
        return FieldDecomposition((FixedCharge(-r, r / h, r),), math.log(c) / (2.0 * h))
    if spec.family == "hahn" and spec.regime in (STANDARD, "row1"):
        al, be, N = spec["alpha"], spec["beta"], spec["N"]
        r1, r2 = (al + 1) / 2.0, (be + 1) / 2.0
        return FieldDecomposition((FixedCharge(-r1, r1 / h, r1), FixedCharge(N + r2, r2 / h, r2)), 0.0)
    raise FamilyError(f"no fixed-charge decomposition for {spec.label()}")
