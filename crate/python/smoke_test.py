"""Smoke test for the `cattsa` extension module.

Build and install it first:

    pip install maturin
    pip install --no-build-isolation -e crates/python

then run `python python/smoke_test.py` (or `pytest python/`).
"""

import cattsa

SOURCE = """
coh comp (x : *) (y : *) (f : x -> y) (z : *) (g : y -> z) : x -> z
coh id1 (x : *) (y : *) (f : x -> y) : f -> f

def left (p : *) (q : *) (a : p -> q) (r : *) (b : q -> r) (s : *) (c : r -> s) : p -> s
  := comp [comp [a, b], c]
def right (p : *) (q : *) (a : p -> q) (r : *) (b : q -> r) (s : *) (c : r -> s) : p -> s
  := comp [a, comp [b, c]]
def loop (p : *) (q : *) (a : p -> q) (r : *) (b : q -> r) (s : *) (c : r -> s)
  : comp [comp [a, b], c] -> comp [a, comp [b, c]]
  := id1 [comp [comp [a, b], c]]
"""

CHAIN = "(p : *) (q : *) (a : p -> q) (r : *) (b : q -> r) (s : *) (c : r -> s)"


def test_environment_checks_in_both_modes():
    sa = cattsa.Environment(SOURCE)
    assert [err for _, err in sa.outcomes] == [None] * 5
    catt = cattsa.Environment(SOURCE, mode="catt")
    assert catt.outcomes[-1][1] is not None
    assert "loop" not in catt.names()


def test_bracketings_normalize_to_the_unbiased_composite():
    env = cattsa.Environment(SOURCE)
    left, right = env.term("left"), env.term("right")
    assert left != right
    assert left.convertible(right)
    nf, steps = left.normal_form_traced()
    assert steps and steps[0][0] == "insertion"
    assert nf == right.normal_form()
    assert nf == cattsa.Context(CHAIN).unbiased_term()
    assert nf.sd() < left.sd()


def test_terms_over_contexts():
    env = cattsa.Environment(SOURCE)
    ctx = cattsa.Context(CHAIN)
    t = ctx.term("comp [a, comp [b, c]]", env)
    assert t == env.term("right")
    ty = t.infer(ctx)
    assert str(ty) == "p -> s"
    assert t.check(ctx, ty, mode="catt")
    assert t.dim(ctx) == 1


def test_trees_and_insertion():
    assert [len(cattsa.trees(n)) for n in (1, 3, 5, 7)] == [1, 1, 2, 5]
    outer = cattsa.Tree.parse("[x [f] y [g] z]").context()
    inner = cattsa.Context("(a : *) (b : *) (p : a -> b) (c : *) (q : b -> c)")
    ins = cattsa.insert(outer, "g", inner)
    assert str(ins.context.tree()) == "[x [f] a [p] b [q] c]"
    assert dict((v, str(t)) for v, t in ins.kappa)["f"] == "f"
    assert ins.path == [1]
    assert outer.boundary("-").names() == ["x"]


def test_ordinals():
    w = cattsa.Ordinal.omega_pow(1)
    one = cattsa.Ordinal([1])
    assert str(w + one + w) == "ω·2 ⊞ 1"
    assert one < w and w + one == one + w


def test_errors():
    try:
        cattsa.Context("(x : *) (y : *)").unbiased_type()
    except cattsa.CattError as e:
        assert "pasting" in str(e)
    else:
        raise AssertionError("expected CattError")
    try:
        cattsa.Environment("coh c (x : *) : x ->")
    except cattsa.CattError:
        pass
    else:
        raise AssertionError("expected CattError")


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_"):
            fn()
            print(f"ok {name}")
