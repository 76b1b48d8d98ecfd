import math

import pytest

from discrete_electrostatics import families as fam
from discrete_electrostatics.core import DensePolynomial, Interval, IntervalSystem, RationalFieldSpec
from discrete_electrostatics.gconvex import (
    check_gconvex,
    enumerate_gconvex_windows,
    is_symmetric,
    max_charges,
    zeros_and_poles,
)

# one admissible (alpha, beta, N) per row of the Hahn table
HAHN_ROWS = {
    1: (1.0, 2.0, 10.0),
    2: (-12.0, -12.0, 10.0),
    3: (-10.5, -12.0, 10.0),
    4: (-12.0, -10.5, 10.0),
    5: (-10.5, -10.5, 10.0),
    6: (-3.0, 4.0, -2.0),
    7: (4.0, -3.0, -2.0),
    8: (0.5, 0.5, -6.0),
}


def loose(spec, iv):
    A, B = fam.coefficients(spec)
    return RationalFieldSpec(A, B, 1.0, IntervalSystem((iv,)), strict=False)


def test_charlier_is_gconvex():
    rep = check_gconvex(fam.field_of(fam.charlier(2.0, 1)))
    assert rep.is_gconvex and bool(rep)
    assert rep.findings[0].right_ok


def test_hahn_standard_endpoints():
    rep = check_gconvex(fam.field_of(fam.hahn(1.0, 2.0, 10, 1)))
    assert rep.is_gconvex


def test_meixner_c_above_one():
    spec = fam.meixner(2.0, 2.0, 1)
    rep = check_gconvex(loose(spec, Interval(0.0, math.inf)))
    assert not rep
    # 2(x+2)/x decreases on (0, inf); it is the limit c = 2 at +inf that fails
    assert rep.findings[0].decreasing and not rep.findings[0].right_ok
    assert check_gconvex(loose(spec, Interval(-math.inf, -2.0)))


@pytest.mark.parametrize("row", sorted(HAHN_ROWS))
def test_hahn_rows_and_enlargements(row):
    al, be, N = HAHN_ROWS[row]
    found, (lo, hi) = fam.hahn_row(al, be, N)
    assert found == row
    spec = fam.hahn(al, be, N, 1)
    assert check_gconvex(loose(spec, Interval(lo, hi)))
    L = hi - lo
    assert not check_gconvex(loose(spec, Interval(lo, hi + 0.1 * L)))
    assert not check_gconvex(loose(spec, Interval(lo - 0.1 * L, hi)))


def test_scale_invariance():
    spec = fam.hahn(1.0, 2.0, 10, 1)
    fld = fam.field_of(spec)
    for lam in (1e-3, 0.5, 7.0, 1e4):
        assert check_gconvex(fld.scaled(lam)).is_gconvex


def test_standard_presets_are_gconvex(preset):
    assert check_gconvex(fam.field_of(preset)).is_gconvex


def test_positivity_failure_reports_witness():
    # 1 + B/A = (3 - x) / x changes sign at 3 inside (0, 5)
    fld = RationalFieldSpec(DensePolynomial((0.0, 1.0)), DensePolynomial((3.0, -2.0)), 1.0,
                            IntervalSystem.single(0.0, 5.0), strict=False)
    rep = check_gconvex(fld)
    assert not rep and not rep.findings[0].positive
    assert any("3" in w for w in rep.findings[0].witnesses)


def test_left_endpoint_must_be_root_of_a():
    fld = fam.field_of(fam.charlier(2.0, 1)).with_domain(IntervalSystem.single(0.5, math.inf))
    rep = check_gconvex(fld)
    assert not rep and not rep.findings[0].left_ok


def test_limit_condition_at_plus_infinity():
    # 1 + B/A -> 2 at +inf: not in [0, 1)
    A, B = DensePolynomial((0.0, 1.0)), DensePolynomial((1.0, 1.0))
    fld = RationalFieldSpec(A, B, 1.0, IntervalSystem.single(0.0, math.inf), strict=False)
    assert not check_gconvex(fld).findings[0].right_ok


def test_max_charges():
    def cap(lo, hi):
        return max_charges(fam.field_of(fam.charlier(2.0, 1)).with_domain(IntervalSystem.single(lo, hi)))

    assert cap(0.0, 10.0) == 10
    assert cap(0.0, 10.5) == 11
    assert cap(0.0, math.inf) == math.inf
    assert max_charges(fam.field_of(fam.dual_hahn(1.0, 2.0, 8, 1))) == (8, 8)


def test_zeros_and_poles_cancel_common_roots():
    A = DensePolynomial.from_roots([0.0, 4.0])
    S = DensePolynomial.from_roots([4.0, 9.0])
    zeros, poles = zeros_and_poles(A, S)
    assert zeros == pytest.approx([9.0]) and poles == pytest.approx([0.0])


def test_windows_hahn_rows_2_and_3():
    for row in (2, 3):
        al, be, N = HAHN_ROWS[row]
        A, B = fam.coefficients(fam.hahn(al, be, N, 1))
        _, (lo, hi) = fam.hahn_row(al, be, N)
        wins = enumerate_gconvex_windows(A, B, 1.0)
        spans = [(w.intervals[0].lo, w.intervals[0].hi) for w in wins if len(w.intervals) == 1]
        assert any(abs(a - lo) < 1e-9 and abs(b - hi) < 1e-9 for a, b in spans)


def test_windows_dual_hahn_pair():
    A, B = fam.coefficients(fam.dual_hahn(1.0, 1.0, 8, 1))
    wins = enumerate_gconvex_windows(A, B, 1.0)
    pairs = [w for w in wins if len(w.intervals) == 2]
    assert any(
        w.intervals[0].lo == pytest.approx(-11.0) and w.intervals[0].hi == pytest.approx(-3.0)
        and w.intervals[1].lo == pytest.approx(0.0) and w.intervals[1].hi == pytest.approx(8.0)
        for w in pairs
    )


def test_symmetry_detection():
    spec = fam.dual_hahn(1.0, 2.0, 8, 1)
    fld = fam.field_of(spec)
    assert is_symmetric(fld, -2.0)
    assert not is_symmetric(fld, -1.5)
