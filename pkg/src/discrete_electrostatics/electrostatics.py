"""Forces, potentials and energy of unit charges with exclusion radius h.

A charge at ``x`` pushes a charge at ``y`` (|y - x| > h) with

    F_x(y) = (1/2h) log((y - x + h) / (y - x - h)) = atanh(h / (y - x)) / h

and the external field contributes F_phi(x) = (1/2h) log(1 + B(x)/A(x)).
Pass ``field=None`` to the energy helpers for a field-free system.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np
from scipy import integrate

from .core import ChargeConfiguration, DomainError, Interval, RationalFieldSpec


class ForceEvaluation(NamedTuple):
    value: float
    defined: bool


def _pair(d: float, h: float) -> float:
    # atanh keeps full precision for |d| >> h, where the log quotient is ~1
    return math.atanh(h / d) / h


def pair_force(x: float, y: float, h: float) -> ForceEvaluation:
    """Force exerted by a unit charge at x on a unit charge at y."""
    if not h > 0:
        raise ValueError("h must be positive")
    d = y - x
    if abs(d) <= h:
        return ForceEvaluation(math.nan, False)
    return ForceEvaluation(_pair(d, h), True)


def log_force(x: float, y: float) -> float:
    """Classical logarithmic-potential force 1/(y - x)."""
    return 1.0 / (y - x)


def pair_potential(x: float, y: float, h: float) -> float:
    """Potential at y of a unit charge at x; defined for |y - x| >= h.

    At contact (|y - x| = h) the expression has the finite limit -log(2h).
    """
    d = abs(y - x)
    if d < h:
        raise DomainError(f"|y - x| = {d} is inside the exclusion radius {h}")
    if d == h:
        return -math.log(2.0 * h)
    if d < 2.0 * h:
        # same value written as -((d+h) log(d+h) - (d-h) log(d-h)) / 2h, which
        # avoids cancelling two large logarithms of d - h near contact
        return -((d + h) * math.log(d + h) - (d - h) * math.log(d - h)) / (2.0 * h)
    return -d * math.atanh(h / d) / h - 0.5 * (math.log(d - h) + math.log(d + h))


def log_potential(x: float, y: float) -> float:
    return -math.log(abs(y - x))


def external_force(field: RationalFieldSpec, x: float) -> float:
    A, _, B = field.reduced
    a = A(x)
    if a == 0.0:
        raise DomainError(f"A vanishes at x={x}")
    q = B(x) / a
    if not q > -1.0:
        raise DomainError(f"1 + B/A = {1.0 + q} is not positive at x={x}")
    return math.log1p(q) / (2.0 * field.h)


def _interval_of(field: RationalFieldSpec, x: float) -> Interval:
    for iv in field.domain.intervals:
        if iv.lo <= x <= iv.hi:
            return iv
    raise DomainError(f"x={x} is outside the field domain {field.domain}")


def external_potential(field: RationalFieldSpec, x0: float, x1: float) -> float:
    """phi(x1) - phi(x0), integrating -F_phi adaptively.

    Both points must lie in the closure of one domain interval; logarithmic
    singularities at finite endpoints are integrable and handled by QUADPACK's
    extrapolation.
    """
    if x0 == x1:
        return 0.0
    if _interval_of(field, x0) is not _interval_of(field, x1):
        raise DomainError("x0 and x1 lie in different domain intervals")
    val, _ = integrate.quad(
        lambda t: -external_force(field, t), x0, x1, epsabs=1e-13, epsrel=1e-13, limit=200
    )
    return val


def field_potential(field: RationalFieldSpec, x: float) -> float:
    """phi(x) anchored to zero at the reference point of x's interval."""
    iv = _interval_of(field, x)
    return external_potential(field, iv.reference_point(), x)


def total_forces(points: Sequence[float], field: RationalFieldSpec | None, h: float) -> np.ndarray:
    """Net force on every charge (pairwise plus external)."""
    pts = list(points)
    out = np.zeros(len(pts))
    for j, xj in enumerate(pts):
        s = external_force(field, xj) if field is not None else 0.0
        for k, xk in enumerate(pts):
            if k != j:
                d = xj - xk
                if abs(d) <= h:
                    raise DomainError(f"charges {k} and {j} are within the exclusion radius")
                s += _pair(d, h)
        out[j] = s
    return out


def total_force(cfg: ChargeConfiguration, field: RationalFieldSpec | None, j: int) -> float:
    pts = cfg.points
    xj = pts[j]
    s = external_force(field, xj) if field is not None else 0.0
    for k, xk in enumerate(pts):
        if k != j:
            ev = pair_force(xk, xj, cfg.h)
            if not ev.defined:
                raise DomainError(f"charges {k} and {j} are within the exclusion radius")
            s += ev.value
    return s


def pair_energy(points: Sequence[float], h: float) -> float:
    """Sum of V_{x_k}(x_j) over ordered pairs j != k."""
    pts = list(points)
    s = 0.0
    for j in range(len(pts)):
        for k in range(j + 1, len(pts)):
            s += 2.0 * pair_potential(pts[j], pts[k], h)
    return s


def energy(cfg: ChargeConfiguration, field: RationalFieldSpec | None = None) -> float:
    e = pair_energy(cfg.points, cfg.h)
    if field is not None:
        e += 2.0 * sum(field_potential(field, x) for x in cfg.points)
    return e


def energy_gradient(cfg: ChargeConfiguration, field: RationalFieldSpec | None = None) -> np.ndarray:
    """dE/dx_j = -2 (net force on charge j)."""
    return -2.0 * total_forces(cfg.points, field, cfg.h)


def energy_hessian(cfg: ChargeConfiguration, field: RationalFieldSpec | None = None,
                   step: float = 1e-6) -> np.ndarray:
    """Hessian of the energy by central differences of the analytic gradient."""
    x = cfg.as_array()
    n = len(x)
    H = np.zeros((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = step * max(1.0, abs(x[j]))
        gp = energy_gradient(ChargeConfiguration(x + e, cfg.h), field)
        gm = energy_gradient(ChargeConfiguration(x - e, cfg.h), field)
        H[:, j] = (gp - gm) / (2.0 * e[j])
    return 0.5 * (H + H.T)
