"""Smoke test for the coalg_py extension module. Run with python3 or pytest."""

import json

import coalg_py
from coalg_py import Coalgebra, DomainError


def test_two_cycle_collapses_to_a_loop():
    c = Coalgebra("P(Id)", ["{@1}", "{@0}"])
    assert len(c) == 2
    w = c.wp()
    assert len(w) == 1
    assert w.digest() == "P(Id) | 1 | {@0}"
    assert c.well_founded_part() == (False, [None, None], 0)
    try:
        c.digest()
    except DomainError:
        pass
    else:
        raise AssertionError("digest of a non-well-pointed coalgebra must fail")


def test_binary_tree_folds_and_expands():
    c = Coalgebra("Id*Id+{leaf}", ["inj 0 (@1, @2)", "inj 1 leaf", "inj 0 (@1, @1)"])
    assert c.fold("size") == ["5", "1", "3"]
    assert c.fold("depth") == ["2", "0", "1"]
    assert c.is_strongly_extensional()
    assert len(c.tree_expansion().splitlines()) == 5
    back = Coalgebra.parse(c.to_text())
    assert back == c
    assert json.loads(c.to_json())["states"] == 3
    assert c.to_dot().startswith("digraph coalgebra")


def test_enumeration_and_adapters():
    mu = coalg_py.enumerate_wp("Id*Id+{leaf}", 3, only_well_founded=True)
    assert len(mu) == 5
    assert coalg_py.normalize_stream("ab(abab)^w") == "(ab)^w"
    three = coalg_py.numeral_picture(3)
    assert len(three) == 4
    assert coalg_py.hf_collapse(three) == "{{},{{}},{{},{{}}}}"
    assert coalg_py.hf_collapse(coalg_py.hf_picture("{{{}}}")) == "{{{}}}"


def test_bad_input_raises_value_error():
    try:
        Coalgebra("P(Id", [])
    except ValueError:
        pass
    else:
        raise AssertionError("malformed functor must fail")


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_"):
            fn()
            print("ok", name)
