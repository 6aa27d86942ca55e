import numpy as np
import pytest

from liact.algebra import (
    AlgebraElement,
    StructureConstants,
    bracket,
    check_antisymmetry,
    check_jacobi,
)
from liact.errors import DimensionError, ParityError
from liact.grassmann import EVEN, ODD, Supernumber


def affine():
    # [e1, e2] = e2 on a 2-dimensional even algebra
    return StructureConstants.from_brackets(2, (EVEN, EVEN), {(0, 1): {1: 1.0}})


def heisenberg():
    return StructureConstants.from_brackets(3, (EVEN,) * 3, {(0, 1): {2: 1.0}})


def sl2():
    # [H,E] = 2E, [H,F] = -2F, [E,F] = H with basis order (H, E, F)
    return StructureConstants.from_brackets(
        3, (EVEN,) * 3,
        {(0, 1): {1: 2.0}, (0, 2): {2: -2.0}, (1, 2): {0: 1.0}},
    )


def supertranslation():
    return StructureConstants.from_brackets(2, (EVEN, ODD), {(1, 1): {0: 2.0}})


def basis(sc, i, n_gen=0):
    coords = [1.0 if j == i else 0.0 for j in range(sc.dim)]
    return AlgebraElement.from_real(coords, n_gen)


def test_bracket_reads_tensor():
    sc = affine()
    out = bracket(sc, basis(sc, 0), basis(sc, 1))
    assert [c.body for c in out.coords] == [0.0, 1.0]
    back = bracket(sc, basis(sc, 1), basis(sc, 0))
    assert [c.body for c in back.coords] == [0.0, -1.0]


def test_even_self_bracket_vanishes():
    sc = sl2()
    x = AlgebraElement.from_real([0.3, -1.2, 0.7])
    assert bracket(sc, x, x).max_abs() == 0.0


def test_odd_odd_bracket_supertranslation():
    sc = supertranslation()
    d = basis(sc, 1, n_gen=2)
    out = bracket(sc, d, d)
    assert [c.body for c in out.coords] == [2.0, 0.0]


def test_bracket_with_odd_coefficients():
    # [tau1 D, tau2 D] = -tau1 tau2 [D, D] = -2 tau1 tau2 P
    sc = supertranslation()
    t1, t2 = Supernumber.generator(2, 0), Supernumber.generator(2, 1)
    x = AlgebraElement((Supernumber(2), t1))
    y = AlgebraElement((Supernumber(2), t2))
    out = bracket(sc, x, y)
    assert out.coords[0] == t1 * t2 * -2.0
    assert out.coords[1].is_zero()


def test_bracket_dimension_mismatch():
    with pytest.raises(DimensionError):
        bracket(affine(), basis(affine(), 0), AlgebraElement.from_real([1.0, 0, 0]))


def test_jacobi_residuals():
    assert check_jacobi(heisenberg()) == 0.0
    assert check_jacobi(StructureConstants.abelian(3)) == 0.0
    assert check_jacobi(sl2()) == 0.0
    assert check_jacobi(supertranslation()) == 0.0
    # Heisenberg-like tensor with extra entries that break Jacobi
    broken = StructureConstants.from_brackets(
        3, (EVEN,) * 3,
        {(0, 1): {2: 1.1}, (0, 2): {0: 1.0}, (1, 2): {1: 1.0}},
    )
    assert check_jacobi(broken) > 0.0


def test_antisymmetry_residuals():
    assert check_antisymmetry(sl2()) == 0.0
    assert check_antisymmetry(StructureConstants.abelian(2)) == 0.0
    c = np.zeros((2, 2, 2))
    c[0, 1, 0] = 1.0
    c[1, 0, 0] = 1.0
    bad = StructureConstants(2, (EVEN, EVEN), c)
    assert check_antisymmetry(bad) == 2.0


def test_parity_consistency_enforced():
    c = np.zeros((2, 2, 2))
    c[0, 1, 0] = 1.0  # even-odd bracket landing on an even element
    with pytest.raises(ParityError):
        StructureConstants(2, (EVEN, ODD), c)


def test_element_parity_classification():
    sc = supertranslation()
    assert basis(sc, 0, 2).parity_wrt(sc.parities) == EVEN
    d = basis(sc, 1, 2)
    assert d.parity_wrt(sc.parities) == ODD
    tau_d = AlgebraElement((Supernumber(2), Supernumber.generator(2, 0)))
    assert tau_d.parity_wrt(sc.parities) == EVEN


def test_graded_jacobi_on_random_even_elements():
    # bracket-level Jacobi oracle, independent of the tensor-level check
    rng = np.random.default_rng(5)
    for sc in (heisenberg(), sl2(), affine(), supertranslation()):
        assert check_jacobi(sc) <= 1e-12
        for _ in range(25):
            elems = []
            for _k in range(3):
                coords = []
                for eps in sc.parities:
                    if eps == EVEN:
                        coords.append(Supernumber.real(2, rng.uniform(-1, 1)))
                    else:
                        coords.append(Supernumber.generator(2, 0) * rng.uniform(-1, 1))
                elems.append(AlgebraElement(tuple(coords)))
            x, y, z = elems
            lhs = bracket(sc, x, bracket(sc, y, z))
            rhs1 = bracket(sc, bracket(sc, x, y), z)
            rhs2 = bracket(sc, y, bracket(sc, x, z))
            defect = lhs - rhs1 - rhs2
            assert defect.max_abs() <= 1e-10


def test_body_of_bracket_is_bracket_of_bodies():
    rng = np.random.default_rng(6)
    sc = sl2()
    for _ in range(20):
        x = AlgebraElement.from_real(rng.uniform(-1, 1, 3), 2)
        y = AlgebraElement.from_real(rng.uniform(-1, 1, 3), 2)
        full = bracket(sc, x, y).body()
        bodies = bracket(sc, AlgebraElement.from_real(x.body()),
                         AlgebraElement.from_real(y.body())).body()
        assert np.allclose(full, bodies, atol=1e-14)


def test_json_round_trip_fills_counterparts():
    sc = heisenberg()
    again = StructureConstants.from_json(sc.to_json())
    assert np.array_equal(again.c, sc.c)
    assert again.c[1, 0, 2] == -1.0
    with pytest.raises(ValueError):
        StructureConstants.from_json(
            {"dim": 1, "parities": ["even"],
             "brackets": [{"i": 0, "j": 0, "coeffs": {"0": True}}]}
        )
