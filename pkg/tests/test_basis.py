import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ratnet.basis import (Box, DegreeSpec, RationalApprox, Scheme, basis_matrix,
                          chebyshev_table, constant_rational, eval_basis, eval_rational,
                          index_set, n_terms, normalize_to_unit_box)
from ratnet.errors import DomainError, PoleError


def brute_index(degree, scheme):
    top = max(degree)
    out = []
    for a in itertools.product(*(range(top + 1) for _ in degree)):
        if scheme == "tensor" and all(ai <= n for ai, n in zip(a, degree)):
            out.append(a)
        if scheme == "total" and sum(a) <= top:
            out.append(a)
    return out


@given(st.lists(st.integers(0, 5), min_size=1, max_size=3), st.sampled_from(["tensor", "total"]))
def test_index_set_matches_enumeration(degree, scheme):
    idx = index_set(degree, scheme)
    assert sorted(idx) == sorted(brute_index(degree, scheme))
    assert len(set(idx)) == len(idx)
    # graded lexicographic order
    assert list(idx) == sorted(idx, key=lambda a: (sum(a), a))


def test_index_counts():
    assert n_terms((4,)) == 5
    assert n_terms((3, 3), "total") == math.comb(3 + 2, 2)
    assert n_terms((3, 2), "tensor") == 12
    assert n_terms((18, 18)) == 190
    assert index_set((2, 2))[:3] == ((0, 0), (0, 1), (1, 0))


def test_negative_degree_rejected():
    with pytest.raises(ValueError):
        index_set((-1,))
    with pytest.raises(ValueError):
        DegreeSpec.univariate(2, -1)


@given(st.floats(-1, 1), st.integers(0, 30))
def test_chebyshev_matches_trig_form(x, k):
    t = chebyshev_table(np.array([x]), k)[0]
    ref = np.cos(np.arange(k + 1) * np.arccos(x))
    assert np.allclose(t, ref, atol=1e-11)


def test_chebyshev_outside_unit_interval():
    x = np.array([1.5, -2.0, 3.0])
    t = chebyshev_table(x, 6)
    k = np.arange(7)
    ref = np.sign(x[:, None]) ** k * np.cosh(k * np.arccosh(np.abs(x[:, None])))
    assert np.allclose(t, ref, rtol=1e-12)


def test_basis_matrix_rejects_points_outside():
    with pytest.raises(DomainError):
        basis_matrix(np.array([[1.1]]), index_set((3,)))
    # tiny rounding overshoot is tolerated
    basis_matrix(np.array([[1 + 1e-12]]), index_set((3,)))


def test_bivariate_basis_is_product():
    pts = np.array([[0.3, -0.7], [0.9, 0.1]])
    idx = index_set((3, 3), "tensor")
    B = basis_matrix(pts, idx)
    for i, (a1, a2) in enumerate(idx):
        ref = np.cos(a1 * np.arccos(pts[:, 0])) * np.cos(a2 * np.arccos(pts[:, 1]))
        assert np.allclose(B[:, i], ref)
    assert np.allclose(eval_basis(pts[1], idx), B[1])


@given(st.floats(-50, 50), st.floats(0.1, 100), st.floats(0, 1))
def test_normalization_is_affine_onto_unit(lo, width, s):
    box = Box.interval(lo, lo + width)
    x = lo + s * width
    u = normalize_to_unit_box(np.array([lo, x, lo + width]), box)[:, 0]
    assert u[0] == -1.0 and u[2] == 1.0
    assert abs(u[1] - (2 * s - 1)) < 1e-9


def test_normalization_rejects_and_names_coordinate():
    box = Box((0.0, -20.0), (40.0, 19.84375))
    with pytest.raises(DomainError, match="coordinate 1"):
        normalize_to_unit_box(np.array([[1.0, 25.0]]), box)


def test_box_validation():
    with pytest.raises(ValueError):
        Box.interval(1.0, 1.0)
    with pytest.raises(ValueError):
        Box((0.0,), (1.0, 2.0))


def test_constant_rational_and_degree_labels():
    spec = DegreeSpec.univariate(5, 4)
    r = constant_rational(2.5, spec, Box.interval(-1, 1))
    assert np.allclose(r(np.linspace(-1, 1, 7)), 2.5)
    assert spec.n_params == 11
    assert spec.label() == "(5,4)"
    assert DegreeSpec.uniform(10, 10).label() == "(10,10)/total"


def test_pole_error():
    # q(x) = T1(x) = x vanishes at 0
    r = RationalApprox([1.0, 0.0], [0.0, 1.0], DegreeSpec.univariate(1, 1), Box.interval(-1, 1))
    assert eval_rational(r, 0.5) == pytest.approx(2.0)
    with pytest.raises(PoleError) as info:
        r(np.array([0.5, 0.0]))
    assert info.value.point[0] == 0.0


def test_coefficient_length_checked():
    with pytest.raises(ValueError):
        RationalApprox([1.0], [1.0, 0.0], DegreeSpec.univariate(1, 1), Box.interval(-1, 1))


finite = st.floats(-1e6, 1e6, allow_nan=False)


@given(st.lists(finite, min_size=6, max_size=6), st.lists(finite, min_size=3, max_size=3))
def test_json_round_trip_is_exact(a, b):
    spec = DegreeSpec.uniform(2, 1, dim=2)
    r = RationalApprox(a, b, spec, Box((0.0, -20.0), (40.0, 19.84375)))
    back = RationalApprox.from_json(r.to_json())
    assert np.array_equal(back.num_coeffs, r.num_coeffs)
    assert np.array_equal(back.den_coeffs, r.den_coeffs)
    assert back.spec == r.spec and back.box == r.box
    assert set(json.loads(r.to_json())) == {"box", "scheme", "num_degree", "den_degree",
                                            "num_coeffs", "den_coeffs"}


def test_evaluation_in_raw_domain():
    # r = x on [0, 40]: p = T0 + T1 in the unit variable times 20
    box = Box.interval(0.0, 40.0)
    r = RationalApprox([20.0, 20.0], [1.0], DegreeSpec.univariate(1, 0), box)
    assert np.allclose(r(np.array([0.0, 10.0, 40.0])), [0.0, 10.0, 40.0])
    with pytest.raises(DomainError):
        r(np.array([41.0]))


def test_scheme_enum():
    assert Scheme("tensor") is Scheme.TENSOR
    assert DegreeSpec((2, 2), (1, 1), "tensor").num_index == index_set((2, 2), Scheme.TENSOR)
