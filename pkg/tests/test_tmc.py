from __future__ import annotations

import warnings

import pytest

from helpers import alpha_eq
from tmc_forge import corpus
from tmc_forge.lang import (
    Call, Fnptr, Let, Store, at_path, check_wf_source, parse_expr, parse_program, print_program,
    walk,
)
from tmc_forge.refine import Verdict, check_program_refinement
from tmc_forge.semantics import Conv, Stuck, Timeout, behaviors, observable
from tmc_forge.tmc import (
    AMBIGUITY_MESSAGE, AmbiguityError, Position, TmcWarning, classify_contexts, plan_renaming,
    transform_program,
)

DUP_STEP = """
let x = y.[1] in
let xs = y.[2] in
let dst2 = x :: _? in
let u = dst.[idx] <- x :: dst2 in
dup.dps((dst2, 2), xs)
"""

DUP_STEP_NAIVE = """
let x = y.[1] in
let xs = y.[2] in
let dst1 = x :: _? in
let u1 = dst.[idx] <- dst1 in
let dst2 = x :: _? in
let u2 = dst1.[2] <- dst2 in
dup.dps((dst2, 2), xs)
"""


def cons_branch(p, name):
    """The non-empty branch of a definition built from a list ``match``."""
    body = p.defs[name].body
    while not hasattr(body, "orelse"):
        body = body.body
    return body.orelse


def dest_bindings(e) -> int:
    return sum(isinstance(n, Let) and n.name.startswith("dst") for n in walk(e))


class TestContexts:
    def test_positions(self):
        e = parse_expr("let a = f(x) in if g(a) == true then h(a) else (k(a), l(a))")
        positions = {at_path(e, path).fn.name: pos for path, pos in classify_contexts(e).items()}
        assert positions == {"f": Position.NEITHER, "g": Position.NEITHER, "h": Position.TAIL,
                             "k": Position.TMC_ONLY, "l": Position.TMC_ONLY}

    def test_annotation_is_transparent(self):
        e = parse_expr("(x, f(x)[@tailcall])")
        assert list(classify_contexts(e).values()) == [Position.TMC_ONLY]

    def test_map_recursive_call(self):
        body = corpus.load("map").program.defs["map"].body
        pos = {at_path(body, p).fn: v for p, v in classify_contexts(body).items()}
        assert pos[Fnptr("map")] is Position.TMC_ONLY


class TestRenaming:
    def test_only_annotated_functions(self):
        xi = plan_renaming(corpus.load("map").program)
        assert xi.map == {"map": "map.dps"}

    def test_collision_avoided(self):
        p = parse_program("@tmc\nfun f x = (x, f(x))\nfun f.dps x = x")
        assert plan_renaming(p).map == {"f": "f.dps2"}


class TestMap:
    def test_two_functions_with_dps_variant(self):
        t = transform_program(corpus.load("map").program)
        assert set(t.defs) == {"not_fn", "map", "map.dps"}
        assert not any(d.annotated_tmc for d in t.defs.values())
        assert check_wf_source(t) == []

    def test_dps_call_is_in_tail_position(self):
        t = transform_program(corpus.load("map").program)
        body = t.defs["map.dps"].body
        calls = {at_path(body, p).fn: pos for p, pos in classify_contexts(body).items()}
        assert calls[Fnptr("map.dps")] is Position.TAIL

    def test_direct_version_writes_result_into_fresh_cell(self):
        t = transform_program(corpus.load("map").program)
        step = cons_branch(t, "map")
        assert sum(isinstance(n, Store) for n in walk(step)) == 0
        assert any(isinstance(n, Call) and n.fn == Fnptr("map.dps") for n in walk(step))


class TestCompression:
    def test_dup_compressed_shape(self):
        t = transform_program(corpus.load("dup").program)
        assert alpha_eq(parse_expr(DUP_STEP), cons_branch(t, "dup.dps"))
        assert dest_bindings(cons_branch(t, "dup.dps")) == 1

    def test_dup_naive_shape(self):
        t = transform_program(corpus.load("dup").program, compression=False)
        assert alpha_eq(parse_expr(DUP_STEP_NAIVE), cons_branch(t, "dup.dps"))
        assert dest_bindings(cons_branch(t, "dup.dps")) == 2

    def test_effectful_sibling_is_bound_in_place(self):
        p = parse_program("""
            fun fail u = u.[1]
            fun loop u = loop(u)
            @tmc
            fun f xs = match xs with [] -> [] | x :: xs -> fail(x) :: (loop(()); f(xs)) end
        """)
        call = parse_expr("f(true :: [])")
        with_c = behaviors(transform_program(p), call, budget=2_000)
        without = behaviors(transform_program(p, compression=False), call, budget=2_000)
        assert {observable(b) for b in with_c} == {observable(b) for b in without} == {("stuck",)}
        assert any(isinstance(b, Stuck) for b in behaviors(p, call, budget=2_000))

    def test_if_reifies_the_stack(self):
        p = parse_program("""
            @tmc
            fun f xs = match xs with
                [] -> []
              | x :: xs -> true :: false :: (if x then #A :: f(xs) else #B :: f(xs))
            end
        """)
        t = transform_program(p)
        assert check_program_refinement(p, t, [("f", parse_expr(s)) for s in
                                               ["[]", "true :: []", "false :: true :: []"]]).ok


class TestAmbiguity:
    def test_tree_map_is_ambiguous(self):
        with pytest.raises(AmbiguityError) as info:
            transform_program(corpus.load("tree_map").program)
        err = info.value
        assert AMBIGUITY_MESSAGE in str(err)
        assert "may be TMC-transformed" in str(err)
        assert len(err.sites) == 2
        assert {s.pos for s in err.sites} == {(12, 21), (12, 41)}

    def test_tailcall_attribute_resolves(self):
        t = transform_program(corpus.load("tree_map_tailcall").program)
        assert "tree_map.dps" in t.defs

    def test_tailcall_false_removes_a_candidate(self):
        p = parse_program("@tmc\nfun f x = if x == () then () else (f(x.[2])[@tailcall false], f(x.[2]))")
        t = transform_program(p)
        assert "f.dps" in t.defs

    def test_allow_both_sides(self):
        p = corpus.load("tree_map").program
        t = transform_program(p, allow_both_sides=True)
        suite = corpus.load("tree_map").directives.suite(range(0, 4))
        assert check_program_refinement(p, t, suite).ok


class TestWarnings:
    def test_useless_tailcall_annotation_warns(self):
        p = parse_program("@tmc\nfun f x = let y = f(x)[@tailcall] in y")
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            transform_program(p)
        assert any(issubclass(w.category, TmcWarning) for w in caught)

    def test_annotations_erased(self):
        t = transform_program(corpus.load("tree_map_tailcall").program)
        text = print_program(t)
        assert "[@tailcall" not in text and "@tmc" not in text


@pytest.mark.parametrize("name", corpus.REFINEMENT_CORPUS)
def test_corpus_refines(name):
    entry = corpus.load(name)
    t = transform_program(entry.program)
    report = check_program_refinement(entry.program, t, entry.directives.suite(range(0, 4)))
    assert report.verdict is Verdict.REFINES, report.summary()


def test_transform_preserves_results_on_long_list():
    p = corpus.load("map").program
    t = transform_program(p)
    xs = "true :: false :: true :: true :: []"
    call = parse_expr(f"map(&not_fn, {xs})")
    assert behaviors(p, call) == behaviors(t, call)
    assert not any(isinstance(b, Timeout) for b in behaviors(t, call))
    assert all(isinstance(b, Conv) for b in behaviors(t, call))
