from __future__ import annotations

import pytest

from tmc_forge import corpus
from tmc_forge.lang import (
    CONS, PAIR, Annotated, Block, BlockDet, Bool, Call, Def, Eq, Fnptr, Idx, If, Int, Let,
    Load, Loc, ParseError, Program, Store, Tag, UnknownAnnotation, Unit, Var, WfFailure,
    check_wf_source, parse_expr, parse_file, parse_program, print_expr, print_program,
    require_wf, subst, walk,
)


class TestParse:
    def test_identity_function(self):
        p = parse_program("fun id x = x")
        assert p.defs == {"id": Def("x", Var("x"), False)}

    def test_cons_sugar(self):
        assert parse_expr("x :: xs") == Block(CONS, Var("x"), Var("xs"))

    def test_pair_and_list_literals(self):
        assert parse_expr("(true, ())") == Block(PAIR, Bool(True), Unit())
        assert parse_expr("[]") == Unit()
        assert parse_expr("_?") == Unit()

    def test_cons_is_right_associative(self):
        assert parse_expr("a :: b :: []") == Block(CONS, Var("a"), Block(CONS, Var("b"), Unit()))

    def test_values(self):
        assert parse_expr("#Leaf") == Tag("Leaf")
        assert parse_expr("&f") == Fnptr("f")
        assert parse_expr("2") == Idx(2)
        assert parse_expr("-7", ints=True) == Int(-7)
        assert parse_expr("1", ints=True) == Int(1)

    def test_sequence_is_a_let(self):
        e = parse_expr("x.[1] <- true; x")
        assert isinstance(e, Let)
        assert e.bound == Store(Var("x"), Idx(1), Bool(True))
        assert e.body == Var("x")

    def test_match_desugars_to_one_eq_one_if_two_loads(self):
        e = parse_expr("match l with [] -> () | x :: xs -> xs end")
        nodes = list(walk(e))
        assert sum(isinstance(n, Eq) for n in nodes) == 1
        assert sum(isinstance(n, If) for n in nodes) == 1
        loads = [n for n in nodes if isinstance(n, Load)]
        assert sorted(n.index.value for n in loads) == [1, 2]

    def test_pair_parameter(self):
        p = parse_program("fun fst (a, b) = a")
        d = p.defs["fst"]
        assert isinstance(d.body, Let)
        assert Load(Var(d.param), Idx(1)) in list(walk(d.body))

    def test_tmc_attribute_and_call_annotations(self):
        p = parse_program("@tmc\nfun f x = (f(x)[@tailcall], f(x)[@tailcall false])")
        d = p.defs["f"]
        assert d.annotated_tmc
        assert d.body.first == Annotated(Call(Fnptr("f"), Var("x")), True)
        assert d.body.second.tailcall is False

    def test_unknown_annotation(self):
        with pytest.raises(UnknownAnnotation):
            parse_program("fun f x = f(x)[@inline]")

    def test_parse_error_reports_position(self):
        with pytest.raises(ParseError) as info:
            parse_program("fun f x =\n  let y = in y")
        assert "2:" in str(info.value)

    def test_comments_and_directives(self):
        p, directives = parse_file("(* hello *)\n(*! check f($xs) *)\nfun f x = x")
        assert "f" in p.defs
        assert directives == ["check f($xs)"]

    def test_integer_extension_header(self):
        p = parse_program("@ints\nfun inc x = x + 1")
        assert p.ints

    def test_call_through_a_variable(self):
        e = parse_expr("let g = &f in g(x)(y)")
        assert e.body == Call(Call(Var("g"), Var("x")), Var("y"))

    def test_unbound_name_is_a_direct_call(self):
        assert parse_expr("f(x)") == Call(Fnptr("f"), Var("x"))


class TestRoundTrip:
    @pytest.mark.parametrize("name", corpus.names())
    def test_corpus_round_trip(self, name):
        p = corpus.load(name).program
        assert parse_program(print_program(p)) == p

    def test_expression_round_trip(self):
        for text in ["block #A (x.[0], y.[2] <- z)", "if a == b then (a, b) else []",
                     "let x = f(y) in x :: g(x)", "x + 2 * y"]:
            e = parse_expr(text, ints=True)
            assert parse_expr(print_expr(e, ints=True), ints=True) == e


class TestSubst:
    def test_variable(self):
        assert subst(Var("x"), "x", Bool(True)) == Bool(True)

    def test_shadowing(self):
        e = Let("x", Var("x"), Var("x"))
        assert subst(e, "x", Idx(1)) == Let("x", Idx(1), Var("x"))

    def test_if(self):
        e = If(Var("x"), Var("y"), Var("x"))
        assert subst(e, "x", Bool(False)) == If(Bool(False), Var("y"), Bool(False))

    def test_absent_variable_is_identity(self):
        e = parse_expr("let y = z in y :: z")
        assert subst(e, "x", Unit()) == e


class TestWellFormedness:
    def test_map_is_well_formed(self):
        assert check_wf_source(corpus.load("map").program) == []

    def test_block_det_rejected(self):
        p = Program({"f": Def("x", BlockDet(CONS, Var("x"), Unit()))})
        assert [e.kind for e in check_wf_source(p)] == ["DetBlockInSource"]

    def test_location_rejected(self):
        p = Program({"f": Def("x", Loc(0))})
        assert [e.kind for e in check_wf_source(p)] == ["LocInSource"]

    def test_undefined_function(self):
        errors = check_wf_source(parse_program("fun f x = g(x)"))
        assert [(e.kind, e.detail) for e in errors] == [("UndefinedFunction", "g")]

    def test_unbound_variable(self):
        errors = check_wf_source(parse_program("fun f x = y"))
        assert [(e.kind, e.detail) for e in errors] == [("UnboundVariable", "y")]

    def test_integers_need_the_extension(self):
        p = Program({"f": Def("x", Int(1))})
        assert [e.kind for e in check_wf_source(p)] == ["IntWithoutExtension"]

    def test_require_wf_raises(self):
        with pytest.raises(WfFailure):
            require_wf(parse_program("fun f x = y"))
