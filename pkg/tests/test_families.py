import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discrete_electrostatics import families as fam
from discrete_electrostatics.electrostatics import external_force

SQ5 = math.sqrt(5.0)


def test_field_examples():
    fld = fam.field_of(fam.charlier(2.0, 1))
    assert fld.A.coeffs == (0.0, 1.0) and fld.B.coeffs == (2.0, -1.0)
    assert fld.domain.intervals[0].lo == 0.0 and math.isinf(fld.domain.intervals[0].hi)

    fld = fam.field_of(fam.krawtchouk(0.3, 10, 1))
    assert np.allclose(fld.A.coeffs, (0.0, 0.7)) and np.allclose(fld.B.coeffs, (3.0, -1.0))
    assert (fld.domain.intervals[0].lo, fld.domain.intervals[0].hi) == (0.0, 10.0)

    fld = fam.field_of(fam.dual_hahn(1.0, 2.0, 8, 1))
    (lo1, hi1), (lo2, hi2) = [(iv.lo, iv.hi) for iv in fld.domain.intervals]
    assert (lo1, hi1, lo2, hi2) == (-12.0, -4.0, 0.0, 8.0)


def test_hahn_coefficients_match_product_forms():
    al, be, N = 1.0, 2.0, 10.0
    A, B = fam.coefficients(fam.hahn(al, be, N, 1))
    for x in (0.3, 4.1, 9.7):
        assert math.isclose(A(x), x * (x - be - N - 1))
        assert math.isclose((A + B)(x), (x + al + 1) * (x - N))


def test_racah_coefficients_match_product_forms():
    spec = fam.racah(8, 12.0, 1.0, 1.0, 1)
    al, be, g, d = spec["alpha"], spec["beta"], spec["gamma"], spec["delta"]
    A, B = fam.coefficients(spec)
    for x in (0.5, 3.3, 7.1):
        assert math.isclose(A(x), x * (x - be + g) * (x + d) * (x - al + g + d) * (2 * x + g + d + 2))
        S = (x + al + 1) * (x + g + 1) * (x + be + d + 1) * (x + g + d + 1) * (2 * x + g + d)
        assert math.isclose((A + B)(x), S)


@pytest.mark.parametrize("bad", [
    lambda: fam.charlier(-1.0, 2),
    lambda: fam.krawtchouk(1.2, 10, 2),
    lambda: fam.krawtchouk(0.5, 10.5, 2),
    lambda: fam.krawtchouk(0.5, 4, 5),
    lambda: fam.meixner(2.0, 1.0, 2),
    lambda: fam.meixner(-2.0, 0.5, 2),
    lambda: fam.hahn(0.5, 0.5, 4, 7),
    lambda: fam.dual_hahn(-1.0, 0.0, 5, 2),
    lambda: fam.racah(8, 5.0, 1.0, 1.0, 2),
    lambda: fam.make_family("legendre", 2, a=1.0),
    lambda: fam.make_family("charlier", 2, a=1.0, p=0.5),
    lambda: fam.make_family("charlier", 1.5, a=1.0),
])
def test_invalid_parameters(bad):
    with pytest.raises(fam.FamilyError):
        bad()


def test_regimes():
    assert fam.meixner(2.0, 0.5, 1).standard
    assert fam.meixner(2.0, 2.0, 1).regime == "c>1"
    assert fam.meixner(-6.5, -0.5, 1).regime == "c<0,beta<0"
    assert fam.hahn(-12.0, -12.0, 10, 2).regime == "row2"
    assert fam.hahn(1.0, 2.0, 10.5, 2).regime == "row1"


def test_lattice():
    lat = fam.lattice_of(fam.dual_hahn(1.0, 2.0, 8, 1))
    assert lat.kind == "quadratic" and lat.shift == 4.0 and lat.center == -2.0
    assert lat.lam(2.0) == 12.0 and lat.separation_hypothesis()
    assert fam.lattice_of(fam.charlier(1.0, 1)).lam(3.0) == 3.0


def test_hyp_eval_examples():
    assert fam.hyp_eval(fam.charlier(1.0, 2), 0.0) == 1.0
    assert abs(fam.hyp_eval(fam.charlier(1.0, 2), (3 + SQ5) / 2)) < 1e-12
    assert fam.hyp_eval(fam.hahn(0.0, 0.0, 10, 1), 5.0) == 0.0


def test_hyp_eval_degenerate_denominator():
    # Hahn with alpha = -2: (alpha+1)_k vanishes at k = 1 before the sum terminates.
    # The validated constructor already rejects it (3 charges do not fit in (0, 1)).
    with pytest.raises(fam.FamilyError):
        fam.hahn(-2.0, -12.0, 10, 3)
    spec = fam.FamilySpec("hahn", (("alpha", -2.0), ("beta", -12.0), ("N", 10.0)), 3, "row3")
    with pytest.raises(fam.FamilyError):
        fam.hyp_eval(spec, 1.5)


def test_charlier_explicit_polynomial():
    # C_2(x; a) = 1 - 2x/a + x(x-1)/a^2
    a = 2.5
    spec = fam.charlier(a, 2)
    for x in (0.0, 1.7, 4.2):
        assert math.isclose(fam.hyp_eval(spec, x), 1 - 2 * x / a + x * (x - 1) / a ** 2, rel_tol=1e-13, abs_tol=1e-15)


def test_weight_examples():
    assert math.isclose(fam.weight(fam.charlier(2.0, 1), 3), 4.0 / 3.0, rel_tol=1e-14)
    assert math.isclose(fam.weight(fam.krawtchouk(0.5, 4, 1), 2), 0.375, rel_tol=1e-14)
    spec = fam.meixner(1.5, 0.3, 1)
    for j in range(11):
        assert math.isclose(fam.weight(spec, j), fam.weight_closed_form(spec, j), rel_tol=1e-12)


def test_weight_pearson_matches_closed_forms(preset):
    top = 12 if math.isinf(fam._support_size(preset)) else int(fam._support_size(preset))
    for j in range(top + 1):
        assert math.isclose(fam.weight(preset, j), fam.weight_closed_form(preset, j), rel_tol=1e-10)


def test_weight_outside_support():
    with pytest.raises(fam.FamilyError):
        fam.weight(fam.krawtchouk(0.5, 4, 1), 5)
    with pytest.raises(fam.FamilyError):
        fam.weight(fam.charlier(1.0, 1), -1)


def test_orthogonality_examples():
    assert fam.orthogonality_residual(fam.charlier(1.0, 2)) < 1e-10
    assert fam.orthogonality_residual(fam.krawtchouk(0.4, 12, 4)) < 1e-10
    assert fam.orthogonality_residual(fam.dual_hahn(1.0, 2.0, 8, 3)) < 1e-9


def test_orthogonality_all_presets(preset):
    assert fam.orthogonality_residual(preset) < 1e-9


def test_orthogonality_negative_control():
    # the degree-2 polynomial is not orthogonal with respect to a different weight
    good = fam.charlier(1.0, 2)
    other = fam.charlier(1.5, 2)
    lat = fam.lattice_of(good)
    s = sum(fam.hyp_eval(good, j) * fam.weight(other, j) * lat.lam(j) for j in range(60))
    assert abs(s) > 1e-3


def test_orthogonality_refuses_nonstandard():
    with pytest.raises(fam.FamilyError):
        fam.orthogonality_residual(fam.meixner(2.0, 2.0, 2))


def test_oracle_examples():
    r = fam.lattice_root_oracle(fam.charlier(1.0, 2))
    assert np.allclose(r, [(3 - SQ5) / 2, (3 + SQ5) / 2], atol=1e-9, rtol=0)
    assert fam.lattice_root_oracle(fam.hahn(0.0, 0.0, 10, 1)) == [5.0]
    r = np.array(fam.lattice_root_oracle(fam.krawtchouk(0.5, 5, 5)))
    assert np.allclose(r + r[::-1], 5.0, atol=1e-9)


def test_oracle_quadratic_lattice():
    spec = fam.dual_hahn(1.0, 2.0, 8, 3)
    x = np.array(fam.lattice_root_oracle(spec))
    assert len(x) == 6 and np.allclose(x + x[::-1], -4.0, atol=1e-10)
    lam = fam.lambda_roots(spec)
    assert np.allclose(lam, x[3:] * (x[3:] + 4.0))
    for v in x[3:]:
        assert abs(fam.hyp_eval(spec, v)) < 1e-10


def test_oracle_refuses_nonstandard_by_default():
    with pytest.raises(fam.FamilyError):
        fam.lattice_root_oracle(fam.meixner(2.0, 2.0, 2))
    roots = fam.lattice_root_oracle(fam.meixner(2.0, 2.0, 2), allow_nonstandard=True)
    assert all(r < -2.0 for r in roots)


def test_separation_of_oracle_roots(preset):
    x = np.array(fam.lattice_root_oracle(preset))
    assert len(x) == (2 * preset.n if preset.quadratic else preset.n)
    assert np.all(np.diff(x) > 1.0)


def test_solver_matches_oracle(preset):
    x = fam.solve_family(preset).points
    assert np.max(np.abs(x - fam.lattice_root_oracle(preset))) < 1e-8


def test_decomposition_examples():
    d = fam.field_decomposition(fam.meixner(2.0, 0.5, 1))
    (c,) = d.charges
    assert (c.location, c.size, c.radius) == (-1.0, 1.0, 1.0)
    assert math.isclose(d.constant, 0.5 * math.log(0.5))

    d = fam.field_decomposition(fam.hahn(1.0, 2.0, 10, 1))
    locs = sorted((c.location, c.size, c.radius) for c in d.charges)
    assert locs == [(-1.0, 1.0, 1.0), (11.5, 1.5, 1.5)]
    assert d.constant == 0.0


@pytest.mark.parametrize("spec", [fam.meixner(2.0, 0.5, 1), fam.meixner(0.7, 0.9, 1), fam.hahn(1.0, 2.0, 10, 1),
                                  fam.hahn(-0.5, 3.5, 7, 1)], ids=str)
def test_decomposition_reproduces_force(spec):
    fld = fam.field_of(spec)
    d = fam.field_decomposition(spec)
    iv = fld.domain.intervals[0]
    hi = iv.hi if iv.bounded else 30.0
    for y in np.linspace(iv.lo, hi, 102)[1:-1]:
        assert abs(d.force(y) - external_force(fld, y)) < 1e-12


@pytest.mark.parametrize("spec", [fam.charlier(1.0, 1), fam.krawtchouk(0.3, 10, 1), fam.dual_hahn(1, 1, 4, 1)], ids=str)
def test_decomposition_unsupported(spec):
    with pytest.raises(fam.FamilyError):
        fam.field_decomposition(spec)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 8.0), st.integers(1, 6))
def test_charlier_random_roots_solver_agree(a, n):
    spec = fam.charlier(a, n)
    x = fam.solve_family(spec).points
    assert np.max(np.abs(x - fam.lattice_root_oracle(spec))) < 1e-8
    assert np.all(np.diff(x) > 1.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(-0.9, 5.0), st.floats(-0.9, 5.0), st.integers(4, 14), st.integers(1, 4))
def test_hahn_random_roots_solver_agree(al, be, N, n):
    spec = fam.hahn(al, be, N, min(n, N))
    x = fam.solve_family(spec).points
    assert np.max(np.abs(x - fam.lattice_root_oracle(spec))) < 1e-8


def test_hahn_sharper_bounds():
    # beta in [-N-1, -N): the least root exceeds N + beta + 1; alpha likewise for the greatest
    N = 10
    for al, be in ((-12.0, -10.5), (-10.5, -10.5), (-10.5, -12.0)):
        spec = fam.hahn(al, be, N, 3)
        x = fam.solve_family(spec).points
        if -N - 1 <= be < -N:
            assert x[0] > N + be + 1
        if -N - 1 <= al < -N:
            assert x[-1] < -al - 1


def test_replace_and_label():
    spec = fam.hahn(1.0, 2.0, 10, 3)
    assert spec.replace(n=2).n == 2 and spec.replace(beta=3.0)["beta"] == 3.0
    assert spec.label() == "hahn(alpha=1, beta=2, N=10; n=3)"
