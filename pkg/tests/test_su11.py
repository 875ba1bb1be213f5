from __future__ import annotations

import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lacunary_su11.errors import DomainError, InvalidInputError
from lacunary_su11.su11 import (
    IDENTITY,
    CoefficientPair,
    SU11Matrix,
    factor_at,
    from_f,
    make_coefficient,
    mul,
    op_norm,
    rho,
    rho_arrays,
    rho_explicit,
)

angle = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


def element(r: float, th: float, th2: float) -> SU11Matrix:
    return SU11Matrix(math.sqrt(1 + r * r) * cmath.exp(2j * math.pi * th2), r * cmath.exp(2j * math.pi * th))


elements = st.builds(element, st.floats(0.0, 5.0), angle, angle)


def test_make_coefficient_examples():
    c = make_coefficient(0.75)
    assert c.A == 1.25
    assert c.F == 0.6
    assert make_coefficient(0).A == 1.0
    assert make_coefficient(3 + 4j).A == pytest.approx(math.sqrt(26), rel=1e-15)


@given(st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False))
def test_make_coefficient_invariant(B):
    c = make_coefficient(B)
    assert c.A > 0
    assert abs(c.A ** 2 - abs(c.B) ** 2 - 1) <= 1e-12 * c.A ** 2


@given(st.floats(0, 0.999999), angle)
def test_from_f_roundtrip(r, th):
    F = r * cmath.exp(2j * math.pi * th)
    c = from_f(F)
    assert abs(c.F - F) <= 1e-15 * max(1, abs(F)) + 1e-16
    assert abs(c.A ** 2 - abs(c.B) ** 2 - 1) <= 1e-12 * c.A ** 2


def test_from_f_near_boundary_matches_high_precision():
    with mpmath.workdps(50):
        F = mpmath.mpf(0.999999)
        A_ref = 1 / mpmath.sqrt(1 - F * F)
    c = from_f(0.999999)
    assert abs(c.A - float(A_ref)) <= 1e-12 * float(A_ref)


@pytest.mark.parametrize("F", [1.0, 1j, 2.0, -1.0000001])
def test_from_f_rejects_outside_disk(F):
    with pytest.raises(DomainError):
        from_f(F)


@pytest.mark.parametrize("bad", [math.nan, math.inf, complex(math.nan, 0)])
def test_non_finite_rejected(bad):
    with pytest.raises(InvalidInputError):
        make_coefficient(bad)
    with pytest.raises(InvalidInputError):
        from_f(bad)


def test_pair_constructor_checks_invariant():
    with pytest.raises(DomainError):
        CoefficientPair(1.0, 0.5)
    with pytest.raises(DomainError):
        CoefficientPair(-1.0, 0.0)


def test_identity_and_inverse():
    G = element(0.7, 0.1, 0.3)
    assert rho(IDENTITY, IDENTITY) == 0.0
    P = mul(G, G.inverse())
    assert abs(P.a - 1) < 1e-14 and abs(P.b) < 1e-14
    assert G.determinant() == pytest.approx(1.0, abs=1e-14)


@settings(max_examples=200)
@given(elements, elements, elements)
def test_multiplication_associative_and_closed(G1, G2, G3):
    L = mul(mul(G1, G2), G3)
    R = mul(G1, mul(G2, G3))
    scale = 1 + abs(L.a)
    assert abs(L.a - R.a) < 1e-12 * scale ** 2 and abs(L.b - R.b) < 1e-12 * scale ** 2
    assert abs(L.determinant() - 1) < 1e-11 * scale ** 2
    M = G1.as_array() @ G2.as_array()
    P = mul(G1, G2)
    assert np.allclose(M, P.as_array(), rtol=1e-13, atol=1e-13)


@given(elements, elements)
def test_op_norm_matches_numpy(G1, G2):
    Q = G1.as_array() - G2.as_array()
    assert op_norm(Q) == pytest.approx(np.linalg.norm(Q, 2), rel=1e-10, abs=1e-12)


@given(elements, elements)
def test_rho_forms_agree(G1, G2):
    Q = mul(G1.inverse(), G2)
    assert rho(G1, G2) == pytest.approx(rho_explicit(Q), rel=1e-10, abs=1e-12)
    vec = rho_arrays(np.complex128(G1.a), np.complex128(G1.b), np.complex128(G2.a), np.complex128(G2.b))
    assert float(vec) == pytest.approx(rho(G1, G2), rel=1e-10, abs=1e-12)


@given(elements, elements, elements)
def test_rho_left_invariant(G1, G2, G3):
    assert rho(mul(G3, G1), mul(G3, G2)) == pytest.approx(rho(G1, G2), abs=1e-9)


@given(elements, elements)
def test_rho_symmetric(G1, G2):
    assert rho(G1, G2) == pytest.approx(rho(G2, G1), rel=1e-10, abs=1e-12)


def test_factor_phase_reduced_for_large_frequency():
    c = make_coefficient(0.5)
    # m t is an integer: the phase must be exactly 0 even for huge m
    G = factor_at(c, 3 ** 30, 1.0)
    assert G.b == pytest.approx(0.5, abs=1e-15)
    G = factor_at(c, 2, 0.25)
    assert G.b == pytest.approx(-0.5, abs=1e-15)


@pytest.mark.parametrize("B,A", [(0, 1.0), (0.75, 1.25), (4j / 3, 5 / 3)])
def test_coefficient_examples(B, A):
    assert make_coefficient(B).A == pytest.approx(A, rel=1e-15)


def test_from_f_examples():
    assert from_f(0) == CoefficientPair(1.0, 0j)
    c = from_f(0.6)
    assert c.A == pytest.approx(1.25, rel=1e-15) and c.B == pytest.approx(0.75, rel=1e-15)


def test_factor_examples():
    c = make_coefficient(0.75)
    assert factor_at(make_coefficient(0), 7, 0.3) == SU11Matrix(1 + 0j, 0j)
    G = factor_at(c, 1, 0.0)
    assert (G.a, G.b) == (1.25, 0.75)
    assert factor_at(c, 1, 0.25).b == pytest.approx(0.75j, abs=1e-15)


def test_product_examples():
    G = factor_at(make_coefficient(0.75), 1, 0.0)
    assert mul(G, IDENTITY) == G and mul(IDENTITY, G) == G
    P = mul(G, G)
    assert P.a == pytest.approx(34 / 16) and P.b == pytest.approx(30 / 16)
    assert P.determinant() == pytest.approx(1.0, abs=1e-14)


def test_op_norm_and_rho_examples():
    assert op_norm(np.eye(2)) == pytest.approx(1.0)
    assert op_norm(np.zeros((2, 2))) == 0.0
    assert op_norm([[0.25, 0.75], [0.75, 0.25]]) == pytest.approx(1.0)
    G = SU11Matrix(1.25, 0.75)
    assert rho(G, G) == 0.0
    assert rho(IDENTITY, G) == pytest.approx(math.log(2), rel=1e-15)
    with pytest.raises(InvalidInputError):
        op_norm(np.eye(3))
