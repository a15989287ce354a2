import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mogi.interp import measure
from mogi.minilang import pretty_print
from mogi.operators import EditSpace
from mogi.patch import (
    CacheClass, CacheMethod, Copy, Delete, Patch, PatchSyntaxError, Replace, apply, parse_patch,
    read_patch, serialize, write_patch,
)

from conftest import GOLDEN


def test_empty_patch_leaves_program_unchanged(corpus):
    for b in corpus.values():
        rep = apply(Patch(), b.program)
        assert rep.validity_stage == "typechecked" and rep.noop_edits == []
        assert rep.program == b.program
        assert measure(rep.program, b.fixtures) == measure(b.program, b.fixtures)


def test_input_program_is_not_mutated(corpus):
    b = corpus["B2"]
    before = pretty_print(b.program)
    apply(parse_patch("DELETE program.mini:6\nCACHE_METHOD program.mini:10"), b.program)
    assert pretty_print(b.program) == before


def test_edit_on_deleted_node_is_noop(corpus):
    p = corpus["B1"].program
    rep = apply(Patch((Delete(2), Replace(2, 6))), p)
    assert rep.noop_edits == [1]
    assert rep.ok


def test_missing_and_wrong_kind_targets_are_noops(corpus):
    p = corpus["B2"].program
    rep = apply(Patch((Delete(999), CacheMethod(9), Copy(1, 6, 0), Delete(10))), p)
    # 999 absent; 9 is a statement not a call; 6 is not a block; 10 is a call
    assert rep.noop_edits == [0, 1, 2, 3]
    assert rep.program == p


def test_copy_then_delete_golden(corpus):
    p = corpus["B2"].program
    rep = apply(read_patch(GOLDEN / "copy_delete.patch"), p)
    assert rep.ok and rep.noop_edits == []
    assert pretty_print(rep.program) == (GOLDEN / "copy_delete.expected").read_text()


def test_copy_index_is_clamped(corpus):
    p = corpus["B1"].program
    far = apply(Patch((Copy(6, 1, 99),)), p).program
    end = apply(Patch((Copy(6, 1, 3),)), p).program
    assert far == end


def test_copies_are_not_addressable(corpus):
    p = corpus["B1"].program
    rep = apply(Patch((Copy(6, 1, 0), Delete(6))), p)
    # the copy survives: deleting id 6 removes only the original
    text = pretty_print(rep.program)
    assert text.count("count = 0;") == 1
    assert text.index("count = 0;") < text.index("items = alloc(24);")


def test_deleting_a_used_declaration_fails_typecheck(corpus):
    rep = apply(Patch((Delete(9),)), corpus["B2"].program)
    assert rep.validity_stage == "failed" and not rep.ok
    assert "undeclared" in rep.error


def test_serialize_examples():
    assert serialize(Patch()) == ""
    assert serialize(Patch((Delete(608),), "a.mini")) == "DELETE a.mini:608"
    p = Patch((Copy(1, 2, 3), Replace(4, 5), CacheMethod(6), CacheClass(7)), "a.mini")
    assert serialize(p).splitlines() == [
        "COPY a.mini:1 -> a.mini:2:3", "REPLACE a.mini:4 -> a.mini:5",
        "CACHE_METHOD a.mini:6", "CACHE_CLASS a.mini:7",
    ]


@pytest.mark.parametrize("text, line", [
    ("DELETE a.mini:1\nDELET a.mini:2", 2),
    ("COPY a.mini:1 -> a.mini:2", 1),
    ("DELETE a.mini:1\n\nDELETE b.mini:2", 3),
    ("REPLACE a.mini:x -> a.mini:2", 1),
])
def test_parse_errors_name_the_line(text, line):
    with pytest.raises(PatchSyntaxError) as ei:
        parse_patch(text)
    assert ei.value.line == line


def test_patch_file_round_trip(tmp_path):
    p = Patch((Delete(3), Copy(1, 0, 2)), "x.mini")
    write_patch(p, tmp_path / "p.patch")
    assert (tmp_path / "p.patch").read_text() == serialize(p) + "\n"
    assert read_patch(tmp_path / "p.patch") == p


edits = st.one_of(
    st.builds(Delete, st.integers(0, 10**6)),
    st.builds(Copy, st.integers(0, 10**6), st.integers(0, 10**6), st.integers(0, 10**6)),
    st.builds(Replace, st.integers(0, 10**6), st.integers(0, 10**6)),
    st.builds(CacheMethod, st.integers(0, 10**6)),
    st.builds(CacheClass, st.integers(0, 10**6)),
)
files = st.from_regex(r"[A-Za-z_][A-Za-z0-9_.]{0,12}\.mini", fullmatch=True)


@given(st.lists(edits, max_size=8), files)
def test_serialize_parse_round_trip(es, file):
    p = Patch(tuple(es), file)
    text = serialize(p)
    back = parse_patch(text)
    assert back.edits == p.edits
    if es:  # the empty patch serializes to "" and carries no file name
        assert back.file == file
    assert serialize(parse_patch(text)) == text


def _random_patch(space, rng, n):
    return Patch(tuple(space.draw(rng) for _ in range(n)))


@given(st.sampled_from(["B1", "B2", "B3", "B4", "B5", "B6"]), st.integers(0, 2**32))
def test_sequential_semantics(corpus, name, seed):
    b = corpus[name]
    rng = random.Random(seed)
    space = EditSpace(b.program)
    e1, e2 = space.draw(rng), space.draw(rng)
    first = apply(Patch((e1,)), b.program)
    both = apply(Patch((e1, e2)), b.program)
    if not first.ok or not both.ok:
        return
    second = apply(Patch((e2,)), first.program)
    if second.ok:
        assert pretty_print(second.program) == pretty_print(both.program)


@given(st.sampled_from(["B1", "B2", "B3", "B4", "B5", "B6"]), st.integers(0, 2**32))
def test_noop_closure(corpus, name, seed):
    b = corpus[name]
    patch = _random_patch(EditSpace(b.program), random.Random(seed), 2)
    base = apply(patch, b.program)
    more = apply(Patch(patch.edits + (Delete(10**6),)), b.program)
    assert base.validity_stage == more.validity_stage
    assert pretty_print(base.program) == pretty_print(more.program)
