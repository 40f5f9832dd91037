"""``tmc-forge``: command-line front end.

Exit codes: 0 on success, 1 on a refinement violation, an ambiguity or an
ill-formed program, 2 on usage and parse errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import corpus
from .lang import (
    Call, Fnptr, ParseError, WfFailure, at_path, check_wf_source, parse_expr, print_expr,
    print_program,
)
from .refine import (
    Directives, FuzzResult, GenConfig, IllFormedInput, Observation, Verdict, build_suite,
    check_program_refinement, check_refinement, fuzz, parse_sizes, read_replay, write_replay,
)
from .refine.fuzz import Counterexample
from .refine.inputs import CallTemplate, SHAPES, sample_lists
from .semantics import Conv, Heap, Scheduler, behaviors, build_value, run, show
from .tmc import AmbiguityError, classify_contexts, transform_program
from .variants import InlinePolicy, aps_transform, inline_transform

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- helpers


def _load(path: str) -> corpus.CorpusEntry:
    """Read a ``.dl`` file; ``corpus/NAME.dl`` falls back to the bundled corpus."""
    file = Path(path)
    if file.exists():
        return corpus.load_text(file.read_text(encoding="utf-8"), file.stem)
    name = file.stem
    if file.suffix in ("", ".dl") and name in corpus.names():
        return corpus.load(name)
    raise UsageError(f"no such file: {path}")


def _require_wf(entry: corpus.CorpusEntry):
    errors = check_wf_source(entry.program)
    if errors:
        raise WfFailure(errors)
    return entry.program


def _make_target(args):
    """The program transformation selected by ``--pass`` and its options."""
    kind = getattr(args, "pass_", "tmc")
    if kind == "tmc":
        return lambda p: transform_program(p, compression=not args.no_compression,
                                           allow_both_sides=args.allow_both_sides)
    if kind == "inline":
        def inline(p):
            fns = args.inline.split(",") if args.inline else list(p.defs)
            return inline_transform(p, InlinePolicy(args.depth, frozenset(fns)))
        return inline
    if kind == "aps":
        return lambda p: aps_transform(p, affine=args.affine)
    raise UsageError(f"unknown pass {kind}")


def _scheduler(text: str) -> Scheduler:
    if text in ("left", "right"):
        return Scheduler(text)
    kind, _, value = text.partition(":")
    if kind == "seeded" and value.lstrip("-").isdigit():
        return Scheduler.seeded(int(value))
    if kind == "bits" and set(value) <= {"0", "1"}:
        return Scheduler.enumerate(value)
    raise UsageError(f"bad scheduler {text!r}; use left, right, seeded:N or bits:0101")


def _call(text: str, ints: bool) -> tuple:
    e = parse_expr(text, ints=ints)
    if not (isinstance(e, Call) and isinstance(e.fn, Fnptr)):
        raise UsageError(f"expected a call f(arg), got {text!r}")
    return e


def _emit_warnings(caught):
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)


def _add_pass_options(sp, default="tmc"):
    sp.add_argument("--pass", dest="pass_", choices=("tmc", "inline", "aps"), default=default)
    sp.add_argument("--no-compression", action="store_true",
                    help="tmc: do not merge constructor frames into one destination")
    sp.add_argument("--allow-both-sides", action="store_true",
                    help="tmc: let a block with calls in both fields use both")
    sp.add_argument("--depth", type=int, default=1, help="inline: nesting depth")
    sp.add_argument("--inline", default="", help="inline: comma-separated functions (default all)")
    sp.add_argument("--affine", action="store_true", help="aps: also accumulate products")


# ---------------------------------------------------------------- commands


def cmd_parse(args) -> int:
    entry = _load(args.file)
    program = _require_wf(entry)
    sys.stdout.write(print_program(program))
    return EXIT_OK


def cmd_transform(args) -> int:
    program = _require_wf(_load(args.file))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        out = _make_target(args)(program)
    _emit_warnings(caught)
    sys.stdout.write(print_program(out))
    return EXIT_OK


def cmd_run(args) -> int:
    program = _require_wf(_load(args.file))
    call = _call(args.call, program.ints)
    trace = None
    if args.trace:
        def trace(step, rule, m):
            print(json.dumps({"step": step, "rule": rule, "frames": len(m.stack),
                              "blocks": len(m.heap)}))
    behavior, stats = run(program, call, _scheduler(args.scheduler), args.budget, trace=trace)
    print(_describe(behavior, program.ints))
    print(json.dumps(stats.as_dict(), sort_keys=True))
    return EXIT_OK


def _describe(b, ints: bool) -> str:
    if isinstance(b, Conv):
        return f"Conv {show(b.heap, b.value, ints)}"
    return repr(b)


def cmd_behaviors(args) -> int:
    program = _require_wf(_load(args.file))
    call = _call(args.call, program.ints)
    found = behaviors(program, call, args.budget, args.choice_cap)
    for line in sorted(_describe(b, program.ints) for b in found):
        print(line)
    return EXIT_OK


def _suite(args, entry, program):
    sizes = parse_sizes(args.sizes)
    if args.call:
        template = CallTemplate(args.call, program.ints)
        return build_suite(template, sizes, args.elems or entry.directives.elems,
                           args.samples, args.seed, entry.directives.shape)
    if not entry.directives.checks:
        raise UsageError(f"{args.file} has no check directive; pass --call")
    d = entry.directives
    if args.elems:
        d = Directives(d.checks, d.benches, args.elems, d.shape)
    return d.suite(sizes, args.samples, args.seed)


def cmd_check(args) -> int:
    obs = Observation.SHALLOW if args.shallow else Observation.DEEP
    if args.replay:
        return _check_replay(args, obs)
    if not args.file:
        raise UsageError("check needs a program file or --replay")
    entry = _load(args.file)
    program = _require_wf(entry)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        target = _make_target(args)(program)
    _emit_warnings(caught)
    report = check_program_refinement(program, target, _suite(args, entry, program),
                                      args.budget, args.choice_cap, obs)
    if args.json:
        for r in report.reports:
            print(json.dumps(r.as_dict(), sort_keys=True))
    else:
        for r in report.reports:
            print(r.summary())
        print(report.summary())
    bad = report.first_violation
    if bad is not None and args.save_replay:
        cex = Counterexample(program, bad.fn, bad.arg, tuple(bad.replay_bits or ()), obs, target)
        write_replay(args.save_replay, cex, target)
        print(f"replay written to {args.save_replay}", file=sys.stderr)
    return EXIT_FAIL if report.verdict is Verdict.VIOLATION else EXIT_OK


def _check_replay(args, obs) -> int:
    replay = read_replay(args.replay)
    obs = replay.obs if not args.shallow else obs
    report = check_refinement(replay.source, replay.target, replay.fn, replay.arg,
                              args.budget, args.choice_cap, obs)
    behavior, _ = replay.run_target(args.budget)
    bits = "".join(map(str, replay.bits)) or "(none)"
    if args.json:
        print(json.dumps(report.as_dict(), sort_keys=True))
    else:
        print(f"replayed target schedule {bits}: {_describe(behavior, replay.target.ints)}")
        print(report.summary())
    return EXIT_FAIL if report.verdict is Verdict.VIOLATION else EXIT_OK


def _fuzz_chunk(job) -> FuzzResult:
    seeds, sizes, samples, budget, cap, replay_dir = job
    return fuzz(seeds, GenConfig(), sizes, samples, None, budget, cap, replay_dir)


def cmd_fuzz(args) -> int:
    seeds = list(parse_sizes(args.seeds))
    sizes = parse_sizes(args.sizes)
    replay_dir = Path(args.replay_dir) if args.replay_dir else None
    jobs = max(1, args.jobs)
    chunks = [seeds[i::jobs] for i in range(jobs)]
    work = [(c, sizes, args.samples, args.budget, args.choice_cap, replay_dir) for c in chunks if c]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if jobs == 1:
            results = [_fuzz_chunk(w) for w in work]
        else:
            with ProcessPoolExecutor(jobs) as pool:
                results = list(pool.map(_fuzz_chunk, work))
    total = FuzzResult()
    for r in results:
        total = total.merge(r)
    for seed, cex, path in sorted(total.violations, key=lambda v: v[0]):
        where = f", replay {path}" if path else ""
        print(f"violation: seed {seed}, {cex.size} source nodes{where}")
    print(total.summary())
    print(f"convergence: {total.converged_calls}/{total.total_calls} calls")
    return EXIT_FAIL if total.violations else EXIT_OK


def _bench_sizes(text: str) -> list:
    if "," in text or ".." not in text:
        return [int(x) for x in text.split(",")]
    return list(parse_sizes(text))


def cmd_bench(args) -> int:
    entry = _load(args.file)
    program = _require_wf(entry)
    target = _make_target(args)(program)
    templates = entry.directives.benches or entry.directives.checks
    if args.call:
        templates = [CallTemplate(args.call, program.ints)]
    if not templates:
        raise UsageError(f"{args.file} has no bench directive; pass --call")
    make = SHAPES[entry.directives.shape]
    print("call\tsize\tframes_source\tframes_target\tallocs_source\tallocs_target")
    for template in templates:
        for n in _bench_sizes(args.sizes):
            items = sample_lists(n, entry.directives.elems, 1)[0]
            row = []
            for p in (program, target):
                heap = Heap()  # inputs are pre-built so only the call itself is measured
                values = {name: build_value(heap, make(items)) for name in template.placeholders}
                fn, arg = CallTemplate(template.text, program.ints).instantiate(values)
                behavior, stats = run(p, Call(Fnptr(fn), arg), Scheduler(), args.budget, heap)
                row.append(stats)
            name = template.text
            print(f"{name}\t{n}\t{row[0].max_frames}\t{row[1].max_frames}"
                  f"\t{row[0].allocations}\t{row[1].allocations}")
    return EXIT_OK


def cmd_contexts(args) -> int:
    program = _require_wf(_load(args.file))
    for name, d in program.defs.items():
        if args.fn and name != args.fn:
            continue
        for path, pos in sorted(classify_contexts(d.body).items()):
            call = at_path(d.body, path)
            where = f"line {call.pos[0]}, column {call.pos[1]}" if call.pos else f"path {list(path)}"
            callee = call.fn.name if isinstance(call.fn, Fnptr) else print_expr(call.fn, program.ints)
            print(f"{name}: call to {callee} at {where}: {pos.value}")
    return EXIT_OK


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tmc-forge", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("parse", help="parse, check well-formedness and pretty-print")
    sp.add_argument("file")
    sp.set_defaults(func=cmd_parse)

    sp = sub.add_parser("transform", help="print the transformed program")
    sp.add_argument("file")
    _add_pass_options(sp)
    sp.set_defaults(func=cmd_transform)

    sp = sub.add_parser("run", help="run one call under one scheduler")
    sp.add_argument("file")
    sp.add_argument("call", help='e.g. "map(&not_fn, true :: [])"')
    sp.add_argument("--scheduler", default="left", help="left, right, seeded:N or bits:0101")
    sp.add_argument("--budget", type=int, default=100_000)
    sp.add_argument("--trace", action="store_true", help="one JSON record per step")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("behaviors", help="all behaviors of one call over every schedule")
    sp.add_argument("file")
    sp.add_argument("call")
    sp.add_argument("--budget", type=int, default=50_000)
    sp.add_argument("--choice-cap", type=int, default=16)
    sp.set_defaults(func=cmd_behaviors)

    sp = sub.add_parser("check", help="bounded refinement check of a transformation")
    sp.add_argument("file", nargs="?")
    _add_pass_options(sp)
    sp.add_argument("--sizes", default="0..6")
    sp.add_argument("--samples", type=int, default=2, help="input lists per size")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--elems", choices=("bool", "tag", "mixed", "int"))
    sp.add_argument("--call", help="call template overriding the file's check directives")
    sp.add_argument("--budget", type=int, default=50_000)
    sp.add_argument("--choice-cap", type=int, default=16)
    sp.add_argument("--shallow", action="store_true", help="shallow observation")
    sp.add_argument("--json", action="store_true", help="one JSON report per call")
    sp.add_argument("--replay", help="re-check a replay file instead of a program")
    sp.add_argument("--save-replay", help="write a replay file for the first violation")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("fuzz", help="differential fuzzing of the TMC transformation")
    sp.add_argument("--seeds", default="0..99")
    sp.add_argument("--sizes", default="0..4")
    sp.add_argument("--samples", type=int, default=2)
    sp.add_argument("--budget", type=int, default=50_000)
    sp.add_argument("--choice-cap", type=int, default=16)
    sp.add_argument("--replay-dir", default="replays")
    sp.add_argument("--jobs", type=int, default=1, help="worker processes")
    sp.set_defaults(func=cmd_fuzz)

    sp = sub.add_parser("bench", help="stack depth and allocations, source vs transformed")
    sp.add_argument("file")
    _add_pass_options(sp)
    sp.add_argument("--sizes", default="10,100,1000")
    sp.add_argument("--call", help="call template overriding the file's bench directives")
    sp.add_argument("--budget", type=int, default=10_000_000)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("contexts", help="classify every call site")
    sp.add_argument("file")
    sp.add_argument("--fn", help="only this function")
    sp.set_defaults(func=cmd_contexts)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors itself
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, IllFormedInput, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AmbiguityError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_FAIL
    except WfFailure as exc:
        print(f"ill-formed program: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
