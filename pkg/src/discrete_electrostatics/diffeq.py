"""Forward/backward differences of polynomials and the link between critical
distributions and polynomial solutions of

    A Delta_h Nabla_h y + B Delta_h y + C y = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ChargeConfiguration, DensePolynomial, RationalFieldSpec
from .electrostatics import total_forces

MAX_DEGREE = 20


class NotASolutionError(ValueError):
    """A Delta Nabla p + B Delta p is not a polynomial multiple of p."""

    def __init__(self, remainder_norm: float, scale: float):
        self.remainder_norm = remainder_norm
        self.scale = scale
        super().__init__(f"remainder norm {remainder_norm:.3e} relative to dividend norm {scale:.3e}")


def delta(p: DensePolynomial, h: float) -> DensePolynomial:
    """p(x + h) - p(x)."""
    if not h > 0:
        raise ValueError("h must be positive")
    return p.shift(h) - p


def nabla(p: DensePolynomial, h: float) -> DensePolynomial:
    """p(x) - p(x - h)."""
    if not h > 0:
        raise ValueError("h must be positive")
    return p - p.shift(-h)


def second_difference(p: DensePolynomial, h: float) -> DensePolynomial:
    """Delta_h Nabla_h p = p(x + h) - 2 p(x) + p(x - h)."""
    return p.shift(h) - 2.0 * p + p.shift(-h)


def operator_image(A: DensePolynomial, B: DensePolynomial, p: DensePolynomial, h: float) -> DensePolynomial:
    return A * second_difference(p, h) + B * delta(p, h)


def infer_C(A: DensePolynomial, B: DensePolynomial, p: DensePolynomial, h: float,
            rtol: float = 1e-8) -> DensePolynomial:
    """The C with A Delta Nabla p + B Delta p + C p = 0, if it exists.

    Raises NotASolutionError when the image is not divisible by p.
    """
    if p.degree > MAX_DEGREE:
        raise ValueError(f"degree {p.degree} exceeds the supported maximum {MAX_DEGREE}")
    if p.degree < 0:
        raise ValueError("p must be nonzero")
    image = operator_image(A, B, p, h)
    scale = max(image.coeff_norm(), np.finfo(float).tiny)
    q, r = image.divmod(p)
    rn = r.coeff_norm()
    if rn > rtol * scale:
        raise NotASolutionError(rn, scale)
    return -q


@dataclass
class CriticalityReport:
    residuals: np.ndarray
    max_residual: float
    max_force: float
    kappa: float

    def __bool__(self) -> bool:
        return bool(self.max_residual < 1e-8)


def verify_critical(cfg: ChargeConfiguration, field: RationalFieldSpec) -> CriticalityReport:
    """Residual of the difference equation at each point of ``cfg``.

    With p = prod (x - x_j), r_j = |A(p(x_j+h) - 2 p(x_j) + p(x_j-h)) + B(p(x_j+h) - p(x_j))|
    / |A(x_j) p(x_j+h)|; p is evaluated in product form, so p(x_j) = 0 exactly.
    ``kappa`` = max 2h (1 + B/A)(x_j) is the factor linking r_j to the net
    force for small forces, r_j ~ kappa |F_j|.
    """
    pts = cfg.points
    h = field.h
    res = np.zeros(len(pts))
    kappa = 0.0
    for j, xj in enumerate(pts):
        plus = math.prod(xj + h - xk for xk in pts)
        minus = math.prod(xj - h - xk for xk in pts)
        a, b = field.A(xj), field.B(xj)
        res[j] = abs(a * (plus + minus) + b * plus) / abs(a * plus)
        kappa = max(kappa, 2.0 * h * (a + b) / a)
    forces = total_forces(pts, field, h) if len(pts) else np.zeros(0)
    return CriticalityReport(
        res,
        float(res.max()) if len(pts) else 0.0,
        float(np.abs(forces).max()) if len(pts) else 0.0,
        kappa,
    )


def leading_coefficient_identity(A: DensePolynomial, B: DensePolynomial, n: int, h: float = 1.0) -> float:
    """Constant C forced by matching the x^n coefficient when deg A <= 2, deg B <= 1.

    Delta Nabla x^n = n(n-1) h^2 x^(n-2) + ..., Delta x^n = n h x^(n-1) + ...
    """
    if A.degree > 2 or B.degree > 1:
        raise ValueError("needs deg A <= 2 and deg B <= 1")
    a2 = A.coeffs[2] if A.degree == 2 else 0.0
    b1 = B.coeffs[1] if B.degree >= 1 else 0.0
    return -(a2 * n * (n - 1) * h * h + b1 * n * h) + 0.0
