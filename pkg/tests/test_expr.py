import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from emholder.exceptions import EvalError, ParseError
from emholder.expr import BinOp, Call, Neg, Num, Var, evaluate, parse


class TestParse:
    def test_negated_product_shape(self):
        ast = parse("-sin(x)*cos(x)^3")
        assert ast == Neg(BinOp("*", Call("sin", Var()), BinOp("^", Call("cos", Var()), Num(3.0))))

    def test_power_right_associative(self):
        assert evaluate(parse("2^3^2"), 0.0) == 512.0

    def test_unbalanced_paren_offset(self):
        with pytest.raises(ParseError) as err:
            parse("cos(x")
        assert err.value.offset == 5

    def test_unknown_identifier(self):
        with pytest.raises(ParseError):
            parse("sinh(x)")

    def test_implicit_multiplication_rejected(self):
        with pytest.raises(ParseError):
            parse("2 x")

    def test_numbers(self):
        assert evaluate(parse("1.5e-3 + .25"), 0.0) == 1.5e-3 + 0.25

    @given(st.text(max_size=40))
    @settings(max_examples=300)
    def test_parse_is_total(self, source):
        # every input yields an AST or a positioned ParseError, never a crash
        try:
            parse(source)
        except ParseError as err:
            assert 0 <= err.offset <= len(source)


class TestEvaluate:
    def test_drift_at_zero(self):
        assert evaluate(parse("-sin(x)*cos(x)^3"), 0.0) == 0.0

    def test_diffusion_at_zero(self):
        assert evaluate(parse("cos(x)^2"), 0.0) == 1.0

    def test_matches_composed_host_functions(self):
        got = evaluate(parse("-sin(x)*cos(x)^3"), 1.0)
        expected = -(np.sin(np.float64(1.0)) * np.power(np.cos(np.float64(1.0)), 3.0))
        assert got == expected

    def test_vectorized(self):
        xs = np.linspace(-1.0, 1.0, 7)
        got = evaluate(parse("cos(x)^2"), xs)
        assert np.array_equal(got, np.power(np.cos(xs), 2.0))

    def test_domain_error_raises(self):
        with pytest.raises(EvalError):
            evaluate(parse("log(x)"), -1.0)
        with pytest.raises(EvalError):
            evaluate(parse("1/x"), 0.0)

    def test_round_trip_against_hand_built_asts(self):
        corpus = [
            ("x", Var()),
            ("-x", Neg(Var())),
            ("x+1", BinOp("+", Var(), Num(1.0))),
            ("x-2*x", BinOp("-", Var(), BinOp("*", Num(2.0), Var()))),
            ("x/4", BinOp("/", Var(), Num(4.0))),
            ("x^2", BinOp("^", Var(), Num(2.0))),
            ("sin(x)", Call("sin", Var())),
            ("cos(x)", Call("cos", Var())),
            ("tan(x)", Call("tan", Var())),
            ("exp(x)", Call("exp", Var())),
            ("abs(x)", Call("abs", Var())),
            ("sqrt(abs(x))", Call("sqrt", Call("abs", Var()))),
            ("arctan(x)", Call("arctan", Var())),
            ("sin(x)*cos(x)", BinOp("*", Call("sin", Var()), Call("cos", Var()))),
            ("-(x+1)", Neg(BinOp("+", Var(), Num(1.0)))),
            ("2^x", BinOp("^", Num(2.0), Var())),
            ("x*x+x", BinOp("+", BinOp("*", Var(), Var()), Var())),
            ("exp(-x^2)", Call("exp", Neg(BinOp("^", Var(), Num(2.0))))),
            ("1e2*x", BinOp("*", Num(100.0), Var())),
            ("sin(x)^2+cos(x)^2", BinOp("+", BinOp("^", Call("sin", Var()), Num(2.0)),
                                        BinOp("^", Call("cos", Var()), Num(2.0)))),
        ]
        rng = np.random.default_rng(0)
        xs = rng.uniform(-3.0, 3.0, 100)
        for source, hand_ast in corpus:
            parsed = parse(source)
            assert parsed == hand_ast, source
            for x in xs:
                assert evaluate(parsed, float(x)) == evaluate(hand_ast, float(x))
