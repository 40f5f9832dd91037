"""Generated-input properties of the syntax, substitution and similarity."""

from __future__ import annotations

from hypothesis import given, settings, strategies as st

from tmc_forge.lang import Block, Bool, Int, Let, Tag, Unit, Var, free_vars, parse_expr, print_expr
from tmc_forge.lang.names import subst
from tmc_forge.refine import similar
from tmc_forge.semantics import Heap, build_value, eq_val, shape

ATOMS = st.one_of(
    st.just(Unit()),
    st.booleans().map(Bool),
    st.sampled_from(["A", "B", "LEAF"]).map(Tag),
    st.integers(-50, 50).map(Int),
)


def literals(atoms=ATOMS):
    return st.recursive(
        atoms,
        lambda kids: st.builds(Block, st.sampled_from(["PAIR", "CONS", "NODE"]), kids, kids),
        max_leaves=12,
    )


def exprs():
    """Small expressions over a few variable names, including binders."""
    names = st.sampled_from(["x", "y", "z"])
    leaves = st.one_of(ATOMS, names.map(Var))
    return st.recursive(
        leaves,
        lambda kids: st.one_of(
            st.builds(Block, st.sampled_from(["PAIR", "CONS"]), kids, kids),
            st.builds(Let, names, kids, kids),
        ),
        max_leaves=10,
    )


@settings(max_examples=150, deadline=None)
@given(literals())
def test_literal_round_trip(e):
    assert parse_expr(print_expr(e, ints=True), ints=True) == e


@settings(max_examples=150, deadline=None)
@given(exprs())
def test_expression_round_trip(e):
    assert parse_expr(print_expr(e, ints=True), ints=True) == e


@settings(max_examples=150, deadline=None)
@given(exprs(), st.sampled_from(["x", "y", "z"]), ATOMS)
def test_subst_is_idempotent(e, x, v):
    once = subst(e, x, v)
    assert subst(once, x, v) == once
    assert x not in free_vars(once)


@settings(max_examples=150, deadline=None)
@given(literals(), literals())
def test_deep_similarity_agrees_with_shape(a, b):
    hs, ht = Heap(), Heap()
    ht.alloc(Tag("pad"), Unit(), Unit())  # different location numbering on the right
    va, vb = build_value(hs, a), build_value(ht, b)
    related = bool(similar("deep", hs, va, ht, vb))
    assert related == (shape(hs, va) == shape(ht, vb)) == (a == b)


@given(ATOMS)
def test_eq_val_reflexive(v):
    assert eq_val(v, v)
