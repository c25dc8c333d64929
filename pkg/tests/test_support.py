import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from stochsir.errors import DomainError, SigmaTwoZero
from stochsir.params import EXAMPLE_1, EXAMPLE_2, SirParams, c1, c2
from stochsir.support import (
    SupportKind,
    bracket_fields,
    compute_cstar,
    compute_dstar,
    control_g,
    control_h,
    drift_bound,
    dstar_closed_form_r1,
    generator_LU,
    generator_LU_expanded,
    lie_bracket_rank,
    lyapunov_U,
    minimize_psi,
    p_star_upper,
    psi,
    support_boundary,
    support_contains,
    support_spec,
)

EX2_PSTAR = 0.5 * min(2 * 1 / 1, 2 * 4 / 1)


def test_psi_example1_closed_form():
    # r = 1: psi(u) = beta*u**2 - (c1 + c2)*u + alpha
    assert psi(EXAMPLE_1, 1.0) == pytest.approx(4 - 14 + 20)
    assert psi(EXAMPLE_1, 1.75) == pytest.approx(7.75)


def test_psi_domain():
    with pytest.raises(DomainError):
        psi(EXAMPLE_1, 0.0)
    with pytest.raises(SigmaTwoZero):
        compute_dstar(SirParams(1, 1, 1, 0, 0, 1, 0))


def test_psi_diverges_for_negative_r():
    assert psi(EXAMPLE_2, 1e-6) < -1e6


def test_dstar_examples():
    assert compute_dstar(EXAMPLE_1) == pytest.approx(7.75, abs=1e-9)
    assert minimize_psi(EXAMPLE_1).argmin == pytest.approx(1.75, rel=1e-6)
    assert compute_dstar(EXAMPLE_2) == -math.inf
    assert compute_cstar(EXAMPLE_1) == pytest.approx(1.9375, abs=1e-9)
    assert compute_cstar(EXAMPLE_2) is None


def test_dstar_r_above_one_capped_at_zero():
    p = SirParams(20, 4, 1, 10, 1, sigma1=1, sigma2=-2)  # r = 2
    assert compute_dstar(p) <= 0
    assert compute_cstar(p) is None


@st.composite
def r1_params(draw):
    s = draw(st.floats(0.1, 2.0))
    return SirParams(draw(st.floats(0.5, 30)), draw(st.floats(0.1, 10)), draw(st.floats(0.1, 5)),
                     draw(st.floats(0, 5)), draw(st.floats(0, 5)), s, -s)


@given(r1_params())
def test_dstar_r1_matches_vertex(p):
    assert compute_dstar(p) == pytest.approx(dstar_closed_form_r1(p), rel=1e-8, abs=1e-8)


@st.composite
def r_in_unit(draw):
    s1 = draw(st.floats(0.3, 2.0))
    r = draw(st.floats(0.1, 1.0))
    return SirParams(draw(st.floats(0.5, 30)), draw(st.floats(0.1, 10)), draw(st.floats(0.1, 5)),
                     draw(st.floats(0, 5)), draw(st.floats(0, 5)), s1, -r * s1)


@settings(max_examples=40, deadline=None)
@given(r_in_unit())
def test_dstar_matches_brute_force(p):
    u = np.geomspace(1e-6, 1e6, 400_001)
    brute = float(np.min(psi(p, u)))
    got = compute_dstar(p)
    assert got <= brute + 1e-9 * max(1, abs(brute))
    assert got == pytest.approx(brute, rel=1e-6, abs=1e-6)


def test_support_spec_and_membership():
    spec = support_spec(EXAMPLE_1)
    assert spec.kind is SupportKind.BARRIER_REGION
    assert support_contains(spec, 1.0, 1.9375)
    assert not support_contains(spec, 1.0, 1.9)
    got = support_contains(spec, np.array([1.0, 2.0]), np.array([1.0, 1.0]))
    assert got.tolist() == [False, True]
    assert support_boundary(spec, np.array([1.0]))[0] == pytest.approx(1.9375)
    full = support_spec(EXAMPLE_2)
    assert full.kind is SupportKind.FULL_QUADRANT
    assert support_contains(full, 1e-9, 1e-9)
    with pytest.raises(DomainError):
        support_boundary(full, [1.0])


def test_h_nonnegative_on_barrier():
    # on z = d*/(beta r) the bracket psi(u) - beta*r*z = psi(u) - d* >= 0
    p = EXAMPLE_1
    z = compute_cstar(p)
    u = np.geomspace(1e-3, 1e3, 2001)
    assert np.all(control_h(p, u, z) >= -1e-9)


@given(st.floats(0.01, 100), st.floats(0.01, 100))
def test_h_identity(u, z):
    p = EXAMPLE_1
    r = 1.0
    expected = u ** (-r) * z * (psi(p, u) - p.beta * r * z)
    assert control_h(p, u, z) == pytest.approx(expected, rel=1e-9, abs=1e-9)


def test_h_matches_ito_derivative():
    # z = u**r * v; d/dt of z along the noise-free Stratonovich drift
    u, v, al, be, k1, k2, r = sp.symbols("u v alpha beta c1 c2 r", positive=True)
    du = al - be * u * v - k1 * u
    dv = be * u * v - k2 * v
    z = u**r * v
    dz = sp.diff(z, u) * du + sp.diff(z, v) * dv
    p = SirParams(7, 3, 1, 1, 2, sigma1=1, sigma2=-0.5)
    subs = {al: p.alpha, be: p.beta, k1: c1(p), k2: c2(p), r: 0.5}
    for uu, vv in [(0.3, 2.0), (1.5, 0.7), (4.0, 4.0)]:
        ref = float(dz.subs(subs).subs({u: uu, v: vv}))
        zz = uu**0.5 * vv
        assert control_h(p, uu, zz) == pytest.approx(ref, rel=1e-10)


def test_g_form():
    p = EXAMPLE_1
    assert control_g(p, 1.0, 1.0) == pytest.approx(20 - 1.5 - 4)
    with pytest.raises(DomainError):
        control_g(p, -1.0, 1.0)


def _sympy_brackets():
    x, y, al, be, k1, k2, r = sp.symbols("x y alpha beta c1 c2 r")
    A = sp.Matrix([al - be * x * y - k1 * x, be * x * y - k2 * y])
    C = sp.Matrix([x, -r * y])

    def br(X, Y):
        return Y.jacobian([x, y]) * X - X.jacobian([x, y]) * Y

    D = br(A, C)
    E = br(C, D)
    F = br(C, E)
    f = sp.lambdify((x, y, al, be, k1, k2, r), [C, D, E, F])
    return f


BRACKETS = _sympy_brackets()


@st.composite
def noisy_params(draw):
    s2 = draw(st.floats(0.05, 3.0)) * draw(st.sampled_from([-1, 1]))
    return SirParams(draw(st.floats(0.1, 30)), draw(st.floats(0.1, 10)), draw(st.floats(0.1, 5)),
                     draw(st.floats(0, 5)), draw(st.floats(0, 5)), draw(st.floats(0.05, 3.0)), s2)


@settings(max_examples=60)
@given(noisy_params(), st.floats(0.01, 50), st.floats(0.01, 50))
def test_bracket_fields_match_symbolic(p, x, y):
    ref = BRACKETS(x, y, p.alpha, p.beta, c1(p), c2(p), -p.sigma2 / p.sigma1)
    got = bracket_fields(p, x, y)
    for a, b in zip((got.C, got.D, got.E, got.F), ref):
        # large r makes F cancel-prone; the exact identity is checked symbolically below
        np.testing.assert_allclose(a, np.asarray(b, dtype=float).ravel(), rtol=1e-8, atol=1e-10)


def test_bracket_closed_forms_exact():
    x, y, al, be, k1, k2, r = sp.symbols("x y alpha beta c1 c2 r")
    A = sp.Matrix([al - be * x * y - k1 * x, be * x * y - k2 * y])
    C = sp.Matrix([x, -r * y])

    def br(X, Y):
        return Y.jacobian([x, y]) * X - X.jacobian([x, y]) * Y

    D = br(A, C)
    E = br(C, D)
    F = br(C, E)
    bxy = be * x * y
    assert sp.simplify(D - sp.Matrix([al - r * bxy, -bxy])) == sp.zeros(2, 1)
    assert sp.simplify(E - sp.Matrix([-al + r**2 * bxy, -bxy])) == sp.zeros(2, 1)
    assert sp.simplify(F - sp.Matrix([al - r**3 * bxy, -bxy])) == sp.zeros(2, 1)


@given(noisy_params(), st.floats(0.01, 50), st.floats(0.01, 50))
def test_bracket_rank_two(p, x, y):
    assert lie_bracket_rank(p, x, y).rank == 2


def test_bracket_rank_domain():
    with pytest.raises(DomainError):
        lie_bracket_rank(EXAMPLE_1, 0.0, 1.0)


def _sympy_generator(p, q):
    u, v = sp.symbols("u v", positive=True)
    U = (u + v) ** (1 + q) + u ** (-q / 2)
    bu = p.alpha - p.beta * u * v - p.mu * u
    bv = p.beta * u * v - p.removal * v
    su, sv = p.sigma1 * u, p.sigma2 * v
    LU = (
        sp.diff(U, u) * bu + sp.diff(U, v) * bv
        + sp.Rational(1, 2) * (sp.diff(U, u, 2) * su**2 + 2 * sp.diff(U, u, v) * su * sv
                               + sp.diff(U, v, 2) * sv**2)
    )
    return sp.lambdify((u, v), LU)


@pytest.mark.parametrize("params", [EXAMPLE_1, EXAMPLE_2, SirParams(5, 1, 2, 0.5, 1, 0.8, 1.3)])
def test_generator_matches_symbolic(params):
    q = 0.5 * p_star_upper(params)
    ref = _sympy_generator(params, q)
    rng = np.random.default_rng(3)
    for u, v in rng.uniform(0.05, 40, size=(25, 2)):
        want = ref(u, v)
        assert generator_LU(params, q, u, v) == pytest.approx(want, rel=1e-10)
        assert generator_LU_expanded(params, q, u, v) == pytest.approx(want, rel=1e-9)


def test_p_star_domain():
    with pytest.raises(DomainError):
        lyapunov_U(EXAMPLE_2, p_star_upper(EXAMPLE_2), 1.0, 1.0)


def test_drift_bound_finite_and_grid_consistent():
    db = drift_bound(EXAMPLE_2, EX2_PSTAR)
    assert db.k1 > 0 and math.isfinite(db.k2)
    u, v = db.argmax
    at = generator_LU(EXAMPLE_2, EX2_PSTAR, u, v) + db.k1 * lyapunov_U(EXAMPLE_2, EX2_PSTAR, u, v)
    assert at == pytest.approx(db.k2)
    # far from the origin the drift term wins
    assert generator_LU(EXAMPLE_2, EX2_PSTAR, 1e3, 1e3) < 0
