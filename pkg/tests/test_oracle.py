import math

import numpy as np
import pytest

from discrete_electrostatics import families as fam
from discrete_electrostatics.core import ChargeConfiguration, DensePolynomial, InfeasibleError, IntervalSystem, RationalFieldSpec
from discrete_electrostatics.oracle import compare_forces, grid_minimize, interlacing_check, monotonicity_sweep
from discrete_electrostatics.solver import solve_equilibrium

SQ5 = math.sqrt(5.0)


def test_grid_minimize_charlier_box():
    cfg = grid_minimize(fam.field_of(fam.charlier(1.0, 2)), 2, 600, box=(0.0, 6.0), polish=False)
    assert np.allclose(cfg.points, [(3 - SQ5) / 2, (3 + SQ5) / 2], atol=2 * 6 / 600, rtol=0)


def test_grid_minimize_hahn_single():
    cfg = grid_minimize(fam.field_of(fam.hahn(0.0, 0.0, 10, 1)), 1, 1000)
    assert abs(cfg.points[0] - 5.0) < 1e-6


def test_grid_minimize_symmetric_field():
    # Hahn with alpha = beta is symmetric about N/2
    cfg = grid_minimize(fam.field_of(fam.hahn(1.0, 1.0, 10, 2)), 2, 400, polish=False)
    cell = 10 / 400
    assert abs(cfg.points[0] + cfg.points[1] - 10.0) <= cell + 1e-12


@pytest.mark.parametrize("spec", [fam.charlier(2.0, 3), fam.krawtchouk(0.3, 10, 3), fam.meixner(1.5, 0.3, 2),
                                  fam.hahn(1.0, 2.0, 12, 3)], ids=str)
def test_grid_agrees_with_solver(spec):
    fld = fam.field_of(spec)
    res = solve_equilibrium(fld, spec.n)
    cfg = grid_minimize(fld, spec.n, polish=False)
    dom = fld.domain.intervals[0]
    span = dom.length if dom.bounded else None
    if span is None:
        hi = 1.5 * res.points[-1] + 1.0
        span = hi
    cell = span / {1: 1000, 2: 400, 3: 120}[spec.n]
    assert np.max(np.abs(np.array(cfg.points) - res.points)) <= 2 * cell


def test_grid_minimize_limits():
    fld = fam.field_of(fam.krawtchouk(0.5, 2, 1))
    with pytest.raises(ValueError):
        grid_minimize(fld, 4, 50)
    with pytest.raises(InfeasibleError):
        grid_minimize(fld, 3, 50)
    with pytest.raises(ValueError):
        grid_minimize(fam.field_of(fam.dual_hahn(1.0, 2.0, 8, 1)), 2, 50)


def test_interlacing_examples():
    lower = fam.solve_family(fam.charlier(2.0, 2)).points
    upper = fam.solve_family(fam.charlier(2.0, 3)).points
    assert interlacing_check(lower, upper)
    assert not interlacing_check(lower, upper + 10.0)
    lo = fam.lattice_root_oracle(fam.dual_hahn(1.0, 2.0, 8, 2))[2:]
    up = fam.lattice_root_oracle(fam.dual_hahn(1.0, 2.0, 8, 3))[3:]
    assert interlacing_check(lo, up)
    with pytest.raises(ValueError):
        interlacing_check([1.0, 2.0], [1.0, 2.0])


def test_interlacing_accepts_configurations():
    assert interlacing_check(ChargeConfiguration((1.5,), 1.0), ChargeConfiguration((0.5, 3.0), 1.0))


@pytest.mark.parametrize("make", [lambda n: fam.charlier(2.0, n), lambda n: fam.krawtchouk(0.4, 12, n),
                                  lambda n: fam.meixner(1.5, 0.3, n), lambda n: fam.hahn(1.0, 2.0, 12, n),
                                  lambda n: fam.dual_hahn(1.0, 2.0, 10, n), lambda n: fam.racah(9, 12.0, 1.0, 1.0, n)])
def test_interlacing_all_families(make):
    prev = None
    for n in range(1, 9):
        spec = make(n)
        x = fam.positive_half(spec, fam.solve_family(spec).points)
        if prev is not None:
            assert interlacing_check(prev, x)
        prev = x


def test_sweep_charlier_in_a():
    rep = monotonicity_sweep([fam.charlier(a, 4) for a in (1.0, 2.0, 4.0)])
    assert rep.ok and rep.hypotheses_established and rep.ordering == "increasing"


def test_sweep_hahn_in_beta():
    rep = monotonicity_sweep([fam.hahn(1.0, b, 10, 4) for b in (0.0, 1.0, 2.0)])
    assert rep.ok and rep.hypotheses_established and rep.ordering == "decreasing"


def test_cross_family_ordering():
    N, p, a, c, beta = 5, 0.1, 1.0, 0.5, 4.0
    assert c * beta > a > N * p / (1 - p)
    for n in range(1, 6):
        rep = monotonicity_sweep([fam.krawtchouk(p, N, n), fam.charlier(a, n), fam.meixner(beta, c, n)])
        assert rep.ok and rep.hypotheses_established and rep.ordering == "increasing"


def test_hypothesis_not_established_is_reported():
    # forces of these Hahn fields cross inside (0, 10): no pointwise comparison
    rep = monotonicity_sweep([fam.hahn(0.0, 0.0, 10, 2), fam.hahn(3.0, 3.0, 10, 2)])
    e = rep.entries[0]
    assert e.force_relation == "none" and not e.hypothesis_established
    assert e.ordering in ("increasing", "decreasing", "mixed")
    assert rep.ok  # nothing established, nothing contradicted


def test_compare_forces_endpoints():
    rel, ends = compare_forces(fam.krawtchouk(0.3, 8, 2), fam.krawtchouk(0.3, 10, 2))
    assert rel == "<" and ends


@pytest.mark.parametrize("row,param,values", [
    (1, "alpha", (0.0, 1.0, 2.0)), (1, "N", (8, 10, 12)), (1, "beta", (0.0, 1.0, 2.0)),
    (2, "beta", (-13.0, -12.5, -12.0)), (2, "alpha", (-13.0, -12.5, -12.0)),
    (3, "beta", (-13.0, -12.5, -12.0)), (4, "alpha", (-13.0, -12.5, -12.0)),
    (5, "alpha", (-10.8, -10.5, -10.2)),
])
def test_hahn_table_monotonicity(row, param, values):
    base = {1: (1.0, 2.0, 10), 2: (-12.0, -12.0, 10), 3: (-10.5, -12.0, 10), 4: (-12.0, -10.5, 10),
            5: (-10.5, -10.5, 10)}[row]
    specs = []
    for v in values:
        al, be, N = base
        kw = {"alpha": al, "beta": be, "N": N, param: v}
        spec = fam.hahn(kw["alpha"], kw["beta"], kw["N"], 2)
        assert fam.hahn_row(spec["alpha"], spec["beta"], spec["N"])[0] == row
        specs.append(spec)
    rep = monotonicity_sweep(specs)
    assert rep.hypotheses_established and rep.ok
    inc = {1: ("alpha", "N"), 2: ("beta", "N"), 3: ("beta", "N"), 4: ("beta", "N"), 5: ("beta", "N")}[row]
    assert rep.ordering == ("increasing" if param in inc else "decreasing")


def test_unbounded_oracle_box_is_interior():
    fld = RationalFieldSpec(DensePolynomial((0.0, 1.0)), DensePolynomial((3.0, -1.0)), 1.0,
                            IntervalSystem.single(0.0, math.inf))
    cfg = grid_minimize(fld, 2)
    res = solve_equilibrium(fld, 2)
    assert np.max(np.abs(np.array(cfg.points) - res.points)) < 1e-5
