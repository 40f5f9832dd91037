from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from sabotage import sabotaged_transform
from tmc_forge import corpus
from tmc_forge.lang import check_wf_source, parse_expr, parse_program, print_program, program_size
from tmc_forge.refine import (
    Counterexample, GenConfig, Verdict, check_refinement, format_replay, fuzz, fuzz_suite,
    gen_program, list_literal, parse_replay, read_replay, shrink,
)
from tmc_forge.semantics import Stuck


class TestGenerator:
    def test_deterministic(self):
        assert gen_program(7) == gen_program(7)
        assert gen_program(7) != gen_program(8)

    def test_main_is_annotated(self):
        for seed in range(20):
            assert gen_program(seed).defs["main"].annotated_tmc

    def test_single_function_config(self):
        assert set(gen_program(3, GenConfig(max_fns=1)).defs) == {"main"}

    def test_suite(self):
        suite = fuzz_suite(range(3), samples=2)
        assert len(suite) == 5
        assert all(fn == "main" for fn, _ in suite)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10_000))
def test_generated_programs_are_well_formed_and_round_trip(seed):
    p = gen_program(seed)
    assert check_wf_source(p) == []
    assert parse_program(print_program(p)) == p


class TestFuzz:
    def test_small_run_is_clean(self):
        result = fuzz(range(20), sizes=range(4))
        assert result.ok, result.summary()
        assert result.seeds == 20 and result.total_calls > 0
        assert result.convergence > 0.9

    def test_merge(self):
        a, b = fuzz(range(2), sizes=range(2)), fuzz(range(2, 4), sizes=range(2))
        m = a.merge(b)
        assert m.seeds == 4 and m.total_calls == a.total_calls + b.total_calls

    def test_sabotage_is_caught_and_shrunk(self, tmp_path):
        result = fuzz(range(10), sizes=range(4), make_target=sabotaged_transform,
                      replay_dir=tmp_path)
        assert result.violations
        for seed, cex, path in result.violations:
            assert cex.size <= 15, print_program(cex.program)
            replay = read_replay(path)
            again = check_refinement(replay.source, replay.target, replay.fn, replay.arg)
            assert again.verdict is Verdict.VIOLATION


class TestShrink:
    def test_long_list_shrinks_to_the_shortest_failing_input(self):
        # The first cell is built by the direct version, so two cells are
        # needed before the broken destination-passing code runs.
        entry = corpus.load("map")
        xs = list_literal([parse_expr("true")] * 6)
        arg = parse_expr("(&not_fn, $xs)", placeholders={"$xs": xs})
        cex = shrink(Counterexample(entry.program, "map", arg), sabotaged_transform)
        assert cex.arg == parse_expr("(&not_fn, true :: true :: [])")
        assert cex.size < program_size(entry.program)
        assert cex.bits == ()
        again = check_refinement(cex.program, sabotaged_transform(cex.program), cex.fn, cex.arg)
        assert again.verdict is Verdict.VIOLATION

    def test_non_violation_is_returned_unchanged(self):
        p = parse_program("@tmc\nfun main xs = xs")
        cex = Counterexample(p, "main", parse_expr("true"))
        assert shrink(cex, lambda q: q) is cex


class TestReplayFormat:
    def test_round_trip(self):
        src = parse_program("fun f r = let u = block #P (r.[1] <- #A, r.[1] <- #B) in r.[1]")
        tgt = parse_program("fun f r = r.[2]")
        cex = Counterexample(src, "f", parse_expr("(#X, #Y)"), bits=(1, 0))
        replay = parse_replay(format_replay(cex, tgt))
        assert (replay.source, replay.target, replay.fn, replay.bits) == (src, tgt, "f", (1, 0))
        assert replay.arg == cex.arg
        b, _ = replay.run_target()
        assert not isinstance(b, Stuck)

    def test_rejects_garbage(self):
        with pytest.raises(ValueError):
            parse_replay("hello")
