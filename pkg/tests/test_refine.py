from __future__ import annotations

import json

import pytest

from tmc_forge import corpus
from tmc_forge.lang import Bool, Call, Fnptr, Tag, Unit, parse_expr, parse_program
from tmc_forge.refine import (
    Bijection, CallTemplate, Directives, IllFormedInput, Observation, Verdict, build_suite,
    check_program_refinement, check_refinement, list_literal, parse_sizes, sample_lists, similar,
    tree_literal,
)
from tmc_forge.semantics import Heap, alloc_list
from tmc_forge.tmc import transform_program

SOURCE = parse_program("fun f x = (x, x)")


class TestBijection:
    def test_grows_injectively(self):
        b = Bijection()
        assert b.relate(1, 10)
        assert b.relate(1, 10)
        assert not b.relate(1, 11)
        assert not b.relate(2, 10)
        assert b.is_injective() and len(b) == 1


class TestSimilarity:
    def test_primitive_values(self):
        h = Heap()
        assert similar("deep", h, Bool(True), h, Bool(True))
        assert not similar("deep", h, Bool(True), h, Tag("A"))

    def test_deep_lists(self):
        hs, ht = Heap(), Heap()
        ht.alloc(Tag("junk"), Unit(), Unit())
        a = alloc_list(hs, [Bool(True), Bool(False)])
        b = alloc_list(ht, [Bool(True), Bool(False)])
        c = alloc_list(ht, [Bool(True), Bool(True)])
        assert similar(Observation.DEEP, hs, a, ht, b)
        assert not similar(Observation.DEEP, hs, a, ht, c)

    def test_shallow_relates_any_locations(self):
        hs, ht = Heap(), Heap()
        a = alloc_list(hs, [Bool(True)])
        c = alloc_list(ht, [Bool(False)])
        assert similar(Observation.SHALLOW, hs, a, ht, c)
        assert not similar(Observation.SHALLOW, hs, a, ht, Unit())

    def test_sharing_must_match(self):
        # source: a pair of two distinct cells; target: one cell shared twice
        hs, ht = Heap(), Heap()
        c1 = hs.alloc(Tag("C"), Unit(), Unit())
        c2 = hs.alloc(Tag("C"), Unit(), Unit())
        s = hs.alloc(Tag("PAIR"), c1, c2)
        d = ht.alloc(Tag("C"), Unit(), Unit())
        t = ht.alloc(Tag("PAIR"), d, d)
        assert not similar("deep", hs, s, ht, t)

    def test_cycles(self):
        hs, ht = Heap(), Heap()
        a = hs.alloc(Tag("A"), Unit(), Unit())
        hs.blocks[a.id][2] = a
        b = ht.alloc(Tag("A"), Unit(), Unit())
        ht.blocks[b.id][2] = b
        assert similar("deep", hs, a, ht, b)


class TestCheck:
    def test_identity_refines(self):
        r = check_refinement(SOURCE, SOURCE, "f", parse_expr("true"))
        assert r.verdict is Verdict.REFINES and r.ok

    def test_wrong_value_is_a_violation(self):
        target = parse_program("fun f x = (x, false)")
        r = check_refinement(SOURCE, target, "f", parse_expr("true"))
        assert r.verdict is Verdict.VIOLATION
        assert r.replay_bits == ()
        assert "Violation" in r.summary()

    def test_shallow_observation_ignores_contents(self):
        target = parse_program("fun f x = (x, false)")
        r = check_refinement(SOURCE, target, "f", parse_expr("true"), obs=Observation.SHALLOW)
        assert r.verdict is Verdict.REFINES

    def test_stuck_target_matched_by_stuck_source(self):
        src = parse_program("fun f x = x.[1]")
        tgt = parse_program("fun f x = let y = x.[2] in x.[1]")
        assert check_refinement(src, tgt, "f", parse_expr("true")).ok

    def test_stuck_target_against_converging_source(self):
        tgt = parse_program("fun f x = x.[1]")
        assert check_refinement(SOURCE, tgt, "f", parse_expr("true")).verdict is Verdict.VIOLATION

    def test_target_nondeterminism_must_be_covered(self):
        src = parse_program("fun f r = let u = r.[1] <- #A in r.[1]")
        tgt = parse_program("fun f r = let u = block #P (r.[1] <- #A, r.[1] <- #B) in r.[1]")
        r = check_refinement(src, tgt, "f", parse_expr("(#X, #Y)"))
        assert r.verdict is Verdict.VIOLATION
        assert r.replay_bits == (0,)

    def test_source_nondeterminism_is_existential(self):
        src = parse_program("fun f r = let u = block #P (r.[1] <- #A, r.[1] <- #B) in r.[1]")
        tgt = parse_program("fun f r = let u = r.[1] <- #A in r.[1]")
        assert check_refinement(src, tgt, "f", parse_expr("(#X, #Y)")).ok

    def test_timeouts_are_inconclusive(self):
        src = parse_program("fun f x = x")
        tgt = parse_program("fun f x = f(x)")
        r = check_refinement(src, tgt, "f", parse_expr("true"), budget=100)
        assert r.verdict is Verdict.INCONCLUSIVE and r.timeouts == 1

    def test_source_timeout_blocks_violation_claim(self):
        src = parse_program("fun f x = if x then f(x) else x")
        tgt = parse_program("fun f x = ()")
        r = check_refinement(src, tgt, "f", parse_expr("true"), budget=100)
        assert r.verdict is Verdict.INCONCLUSIVE

    def test_ill_formed_input(self):
        with pytest.raises(IllFormedInput):
            check_refinement(SOURCE, SOURCE, "f", parse_expr("x"))
        with pytest.raises(IllFormedInput):
            check_refinement(SOURCE, SOURCE, "g", parse_expr("true"))
        with pytest.raises(IllFormedInput):
            check_refinement(SOURCE, SOURCE, "f", parse_expr("block #A (&nope, ())"))

    def test_json_schema(self):
        r = check_refinement(SOURCE, SOURCE, "f", parse_expr("true"))
        d = json.loads(json.dumps(r.as_dict()))
        assert {"verdict", "schedules", "stats_source", "stats_target", "replay"} <= set(d)
        assert d["stats_source"]["allocations_by_tag"] == {"PAIR": 1}

    def test_program_report_stops_at_first_violation(self):
        target = parse_program("fun f x = (x, false)")
        suite = [("f", parse_expr(v)) for v in ["false", "true", "()"]]
        report = check_program_refinement(SOURCE, target, suite)
        assert report.verdict is Verdict.VIOLATION
        assert len(report.reports) == 2
        assert report.first_violation.arg == parse_expr("true")
        assert "sampled" in report.summary()

    def test_ill_formed_suite_rejected_up_front(self):
        with pytest.raises(IllFormedInput):
            check_program_refinement(SOURCE, SOURCE, [("f", parse_expr("y"))])

    def test_merge_sort_corpus(self):
        entry = corpus.load("merge")
        t = transform_program(entry.program)
        assert check_program_refinement(entry.program, t, entry.directives.suite(range(4))).ok


class TestInputs:
    def test_parse_sizes(self):
        assert parse_sizes("0..6") == range(0, 7)
        assert parse_sizes("3") == range(3, 4)

    def test_samples_are_deterministic_and_distinct(self):
        a = sample_lists(4, "mixed", 3, seed=1)
        assert a == sample_lists(4, "mixed", 3, seed=1)
        assert len(a) == 3 and len({tuple(x) for x in a}) == 3
        assert sample_lists(0, "bool", 5) == [[]]

    def test_tree_literal(self):
        t = tree_literal([Bool(True), Bool(False)])
        assert t.tag == "NODE" and t.first.tag == "LEAF"

    def test_build_suite(self):
        suite = build_suite(CallTemplate("f($xs)"), range(3), "bool", 2)
        assert [fn for fn, _ in suite] == ["f"] * 5
        assert suite[0][1] == list_literal([])

    def test_two_placeholders_get_different_samples(self):
        suite = build_suite(CallTemplate("g($a, $b)"), [3], "bool", 2)
        (_, arg), _ = suite
        assert arg.first != arg.second

    def test_directives(self):
        d = Directives.parse(["check f($xs)", "bench f($xs)", "elems tag", "shape tree"])
        assert d.elems == "tag" and d.shape == "tree"
        assert len(d.suite(range(2), samples=1)) == 2
        with pytest.raises(ValueError):
            Directives.parse(["frobnicate"])

    def test_template_must_be_a_call(self):
        with pytest.raises(ValueError):
            CallTemplate("$xs").instantiate({"$xs": Unit()})

    def test_direct_call_parsing(self):
        fn, arg = CallTemplate("f(true)").instantiate({})
        assert Call(Fnptr(fn), arg) == parse_expr("f(true)")
