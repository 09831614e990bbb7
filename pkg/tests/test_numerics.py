"""Precision contexts, the constant vocabulary, and exact rounding."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pslq_eps.numerics import (
    MIN_DIGITS,
    PrecisionContext,
    UnsupportedConstantError,
    eval_constant,
    nearest_int,
    real_to_str,
    str_to_real,
    with_precision,
)

PI_50 = "3.1415926535897932384626433832795028841971693993751"
LN2_50 = "0.69314718055994530941723212145817656807550013436025"


def test_context_rejects_meaningless_precision():
    for bad in (9, 0, -5, 10.5, "40"):
        with pytest.raises(ValueError):
            PrecisionContext(bad)
    assert with_precision(MIN_DIGITS).digits == MIN_DIGITS


def test_contexts_are_independent_objects():
    a, b = with_precision(30), with_precision(80)
    x = a.real(1) / 3
    y = b.real(1) / 3
    # each value carries its own context's precision
    assert abs(x - y) > a.real(10) ** -35
    assert with_precision(30) == with_precision(30)
    assert with_precision(30) != with_precision(31)


def test_real_coercion_paths():
    ctx = with_precision(40)
    assert ctx.real("  0.5 ") == ctx.real(0.5) == ctx.real(1) / 2
    with pytest.raises(ValueError):
        ctx.real("not-a-number")


def test_eval_constant_known_prefixes():
    ctx = with_precision(50)
    assert ctx.mp.nstr(eval_constant("pi", ctx), 50) == PI_50
    assert ctx.mp.nstr(eval_constant("ln2", ctx), 50) == LN2_50


def test_eval_constant_roots_against_power_oracle():
    # raising the result back to the d-th power must recover the radicand
    ctx = with_precision(60)
    tol = ctx.real(10) ** -58
    assert abs(eval_constant("sqrt(2)", ctx) ** 2 - 2) < tol
    assert abs(eval_constant("sqrt(17)", ctx) ** 2 - 17) < tol
    assert abs(eval_constant("nthroot(3,5)", ctx) ** 5 - 3) < tol
    assert abs(eval_constant("nthroot(2,7)", ctx) ** 7 - 2) < tol
    assert str(eval_constant("nthroot(3,5)", with_precision(50))).startswith(
        "1.2457309396"
    )


def test_eval_constant_rejects_junk():
    ctx = with_precision(20)
    for bad in ("e", "phi", "sqrt(1)", "sqrt(-4)", "nthroot(0,3)", "pi2", "ln3"):
        with pytest.raises(UnsupportedConstantError):
            eval_constant(bad, ctx)


def test_cross_precision_agreement():
    # a higher-precision evaluation agrees with a lower one in the leading digits
    lo, hi = with_precision(30), with_precision(120)
    for name in ("pi", "ln2", "sqrt(2)", "nthroot(3,5)"):
        a = eval_constant(name, lo)
        b = eval_constant(name, hi)
        assert abs(a - lo.real(b)) < abs(a) * lo.real(10) ** -(lo.digits - 2)


def test_nearest_int_ties_round_up():
    ctx = with_precision(30)
    assert nearest_int(ctx.real("2.5")) == 3
    assert nearest_int(ctx.real("-2.5")) == -2
    assert nearest_int(ctx.real("0.5")) == 1
    assert nearest_int(ctx.real("-0.5")) == 0
    assert nearest_int(2.5) == 3
    assert nearest_int(-2.5) == -2
    assert nearest_int(7) == 7
    assert isinstance(nearest_int(ctx.real(3)), int)


def test_nearest_int_is_exact_beyond_working_precision():
    # the rounding happens on the raw binary value, not a re-rounded copy
    ctx = with_precision(15)
    big = ctx.real(2) ** 100  # exactly representable in binary at any precision
    assert nearest_int(big) == 2**100
    assert nearest_int(-big) == -(2**100)


@settings(max_examples=200, deadline=None)
@given(
    k=st.integers(min_value=-(10**12), max_value=10**12),
    num=st.integers(min_value=-499, max_value=499),
)
def test_nearest_int_recovers_center(k, num):
    ctx = with_precision(40)
    x = ctx.real(k) + ctx.real(num) / 1000
    assert nearest_int(x) == k


def test_serialization_round_trip():
    ctx = with_precision(45)
    for s in ("0.125", "-3.75e-20", "123456.789", "1e40"):
        x = ctx.real(s)
        text = real_to_str(x)
        assert text.endswith("@45")
        assert "e" in text
        back = str_to_real(text, ctx)
        assert abs(back - x) <= abs(x) * ctx.real(10) ** -(ctx.digits - 2)


def test_str_to_real_infers_precision_from_suffix():
    x = str_to_real("1.2345678901234567890123456789e0@30")
    assert x.context.dps >= 30


def test_eps_is_one_ulp_of_unity():
    ctx = with_precision(25)
    assert ctx.eps == ctx.real(10) ** -25
