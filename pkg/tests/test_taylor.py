import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jetcalc.taylor import (TaylorContext, TaylorScalar, derive, expand,
                            eval_expr, finite_difference_check, parse_expr,
                            partial)


def test_constant_expansion():
    t = expand("7", [0.3, 0.4], 3)
    assert t.coeffs[0] == 7.0
    assert np.all(t.coeffs[1:] == 0.0)


def test_geometric_series():
    t = expand("(/ 1 (+ 1 (* x1 x1)))", [0.0], 4)
    assert np.allclose(t.coeffs, [1, 0, -1, 0, 1], atol=1e-14)


def test_exp_series():
    t = expand("(exp x1)", [0.0], 3)
    assert np.allclose(t.coeffs, [1, 1, 0.5, 1 / 6], atol=1e-15)


def test_derive_power():
    t = expand("(* x1 x1)", [0.0], 3)
    d = derive(t, 0)
    assert np.allclose(d.coeffs, [0, 2, 0], atol=1e-15)


def test_derive_sin_matches_cos():
    s = derive(expand("(sin x1)", [0.0], 5), 0)
    c = expand("(cos x1)", [0.0], 4)
    assert np.allclose(s.coeffs, c.coeffs, atol=1e-14)


def test_mixed_partials_commute():
    t = expand("(* x1 x2)", [0.1, -0.2], 3)
    assert partial(t, (1, 1)) == pytest.approx(1.0)
    a = derive(derive(t, 0), 1)
    b = derive(derive(t, 1), 0)
    assert np.allclose(a.coeffs, b.coeffs)


def test_partial_geometric():
    t = expand("(/ 1 (+ 1 (* x1 x1)))", [0.0], 4)
    assert partial(t, (2,)) == pytest.approx(-2.0)
    assert partial(expand("5", [0.0], 3), (2,)) == 0.0


def test_partial_monomial_normalisation():
    # x^3 / 3! has unit third partial
    t = expand("(* 0.16666666666666666 (* x1 (* x1 x1)))", [0.0], 4)
    assert partial(t, (3,)) == pytest.approx(1.0, abs=1e-12)


def test_partial_degree_guard():
    t = expand("(exp x1)", [0.0], 2)
    with pytest.raises(ValueError):
        partial(t, (3,))


def test_fd_smooth_polynomial():
    assert finite_difference_check(
        "(+ (* x1 (* x1 x2)) (* x2 x2))", [0.3, -0.2], (1, 1), 1e-4) < 1e-6


def test_fd_linear_exact():
    assert finite_difference_check("(+ (* 2 x1) x2)", [0.1, 0.2], (1, 0),
                                   1e-3) < 1e-10


def test_fd_third_order():
    assert finite_difference_check("(sin x1)", [0.0], (3,), 1e-3) < 1e-6


def test_reciprocal_requires_nonzero():
    with pytest.raises(ZeroDivisionError):
        expand("(/ 1 x1)", [0.0], 3)


def test_parser_rejects_garbage():
    for bad in ("(+ 1", "())", "(frob x1)", "(+ 1 2))"):
        with pytest.raises(ValueError):
            parse_expr(bad)


def test_eval_expr_matches_expansion_value():
    e = "(* (exp (* 0.3 x1)) (cos x2))"
    pt = [0.4, -0.7]
    assert eval_expr(e, pt) == pytest.approx(expand(e, pt, 2).value)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6), st.integers(0, 10 ** 6))
def test_ring_distributive(sa, sb, sc):
    ctx = TaylorContext(2, 4)
    rng = np.random.default_rng([sa, sb, sc])

    def rand():
        return TaylorScalar(ctx, 4, rng.uniform(-1, 1, ctx.size(4)))

    a, b, c = rand(), rand(), rand()
    lhs = (a + b) * c
    rhs = a * c + b * c
    assert np.allclose(lhs.coeffs, rhs.coeffs, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_leibniz_exact_on_truncations(seed):
    ctx = TaylorContext(2, 5)
    rng = np.random.default_rng(seed)
    a = TaylorScalar(ctx, 5, rng.uniform(-1, 1, ctx.size(5)))
    b = TaylorScalar(ctx, 5, rng.uniform(-1, 1, ctx.size(5)))
    lhs = derive(a * b, 1)
    rhs = derive(a, 1) * b + a * derive(b, 1)
    assert np.allclose(lhs.coeffs, rhs.coeffs, atol=1e-12)


def test_chain_rule_composition():
    inner = expand("(sin x1)", [0.3], 6)
    outer = expand("(exp x1)", [inner.value], 6)
    direct = expand("(exp (sin x1))", [0.3], 6)
    assert np.allclose(outer.compose_args([inner]).coeffs, direct.coeffs,
                       atol=1e-12)


def test_same_seed_reproducible_context():
    c1 = TaylorContext(3, 4)
    c2 = TaylorContext(3, 4)
    assert c1.indices == c2.indices
