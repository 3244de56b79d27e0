import itertools
import random

import pytest

from ibgsolve import Lasso, accepts_prefix, afa_accepts
from ibgsolve.ltlf import (
    Always,
    And,
    Atom,
    Eventually,
    LFalse,
    LTrue,
    LtlfSyntaxError,
    Next,
    Not,
    Or,
    Release,
    Until,
    WeakNext,
    compile_to_afa,
    format_formula,
    holds,
    nnf,
    parse,
)

import corpus

LEAVES = [LTrue(), LFalse(), Atom(0, "a"), Atom(0, "b"), Atom(1, "c"), Atom(1, "d")]
UNARY = [Not, Next, WeakNext, Eventually, Always]
BINARY = [Until, Release, lambda l, r: And((l, r)), lambda l, r: Or((l, r))]


def formulas_up_to(depth):
    if depth == 1:
        return list(LEAVES)
    smaller = formulas_up_to(depth - 1)
    out = list(smaller)
    for f in smaller:
        for op in UNARY:
            out.append(op(f))
    for l in smaller:
        for r in smaller:
            for op in BINARY:
                out.append(op(l, r))
    return list(dict.fromkeys(out))


def all_words(alphabet, max_len):
    letters = list(alphabet.letters())
    words = [[]]
    for n in range(1, max_len + 1):
        words.extend(list(w) for w in itertools.product(letters, repeat=n))
    return words


# ---------------------------------------------------------------------------
# parsing


def test_parse_eventually_conjunction():
    assert parse("F(p0=a & p1=c)") == Eventually(And((Atom(0, "a"), Atom(1, "c"))))


def test_parse_until():
    assert parse("p0=a U p0=b") == Until(Atom(0, "a"), Atom(0, "b"))


def test_parse_error_position():
    with pytest.raises(LtlfSyntaxError) as err:
        parse("G(")
    assert err.value.offset == 2


def test_parse_precedence():
    # unary > U/R > & > |
    f = parse("p0=a | p0=b & X p1=c U p1=d")
    assert f == Or((Atom(0, "a"), And((Atom(0, "b"), Until(Next(Atom(1, "c")), Atom(1, "d"))))))


def test_parse_until_right_associative():
    f = parse("p0=a U p0=b U p1=c")
    assert f == Until(Atom(0, "a"), Until(Atom(0, "b"), Atom(1, "c")))


def test_parse_keywords_and_parens():
    assert parse("true U (false R N p0=a)") == Until(
        LTrue(), Release(LFalse(), WeakNext(Atom(0, "a")))
    )


def test_parse_unknown_channel(alphabet):
    with pytest.raises(LtlfSyntaxError):
        parse("p7=a", alphabet)


def test_parse_unknown_symbol(alphabet):
    with pytest.raises(LtlfSyntaxError):
        parse("p0=zzz", alphabet)


def test_parse_trailing_garbage():
    with pytest.raises(LtlfSyntaxError):
        parse("p0=a )")


def test_format_parse_round_trip():
    rng = random.Random(3)
    pool = formulas_up_to(2)
    for f in rng.sample(pool, 40):
        assert parse(format_formula(f)) == f


# ---------------------------------------------------------------------------
# normal form


def test_nnf_rewrites_eventually_always():
    assert nnf(Eventually(Atom(0, "a"))) == Until(LTrue(), Atom(0, "a"))
    assert nnf(Always(Atom(0, "a"))) == Release(LFalse(), Atom(0, "a"))


def test_nnf_pushes_negation_to_atoms():
    f = nnf(Not(Until(Atom(0, "a"), Next(Atom(1, "c")))))
    assert f == Release(Not(Atom(0, "a")), WeakNext(Not(Atom(1, "c"))))


def test_nnf_preserves_semantics(alphabet):
    rng = random.Random(9)
    pool = formulas_up_to(2)
    words = all_words(alphabet, 3)
    for f in rng.sample(pool, 60):
        g = nnf(f)
        for w in rng.sample(words, 25):
            assert holds(f, w, alphabet) == holds(g, w, alphabet)


# ---------------------------------------------------------------------------
# compilation


def test_compiled_eventually_on_lasso(alphabet):
    afa = compile_to_afa(parse("F(p0=a & p1=c)", alphabet), alphabet)
    assert accepts_prefix(afa, Lasso((), (alphabet.letter(("a", "c")),)))
    assert not accepts_prefix(afa, Lasso((), (alphabet.letter(("b", "d")),)))


def test_compiled_always(alphabet):
    afa = compile_to_afa(parse("G(p0=a)", alphabet), alphabet)
    a_letter = alphabet.letter(("a", "c"))
    b_letter = alphabet.letter(("b", "c"))
    for n in range(1, 6):
        assert afa_accepts(afa, [a_letter] * n)
        assert not afa_accepts(afa, [a_letter] * n + [b_letter])
    assert accepts_prefix(afa, Lasso((), (a_letter,)))


def test_compiled_true_accepts_everything(alphabet):
    afa = compile_to_afa(parse("true", alphabet), alphabet)
    assert afa_accepts(afa, [])
    rng = random.Random(2)
    for _ in range(10):
        assert afa_accepts(afa, corpus.random_word(rng, alphabet))


def test_compiled_empty_word_convention(alphabet):
    # the empty word satisfies exactly weak-next, release (G included), true
    cases = {
        "true": True,
        "false": False,
        "p0=a": False,
        "N p0=a": True,
        "X p0=a": False,
        "G p0=a": True,
        "F p0=a": False,
        "p0=a U p1=c": False,
        "p0=a R p1=c": True,
        "!(X p0=a)": True,
        "!(N p0=a)": False,
    }
    for text, expected in cases.items():
        f = parse(text, alphabet)
        afa = compile_to_afa(f, alphabet)
        assert afa_accepts(afa, []) == expected, text
        assert holds(f, [], alphabet) == expected, text


def test_compiled_state_count_bound(alphabet):
    from ibgsolve.ltlf import _subformulas

    for f in formulas_up_to(2):
        g = nnf(f)
        subs = []
        _subformulas(g, subs)
        afa = compile_to_afa(f, alphabet)
        assert afa.n_states <= len(subs) + 1


def test_compiled_small_eventually_afa(alphabet):
    afa = compile_to_afa(parse("F(p0=a & p1=c)", alphabet), alphabet)
    assert afa.n_states <= 4


def test_compiled_atom_alphabet_mismatch(alphabet):
    with pytest.raises(ValueError):
        compile_to_afa(Atom(5, "a"), alphabet)
    with pytest.raises(ValueError):
        compile_to_afa(Atom(0, "nope"), alphabet)


def test_compiled_only_reads_referenced_channels(alphabet):
    afa = compile_to_afa(parse("G(p0=a)", alphabet), alphabet)
    assert afa.mask.agents == (0,)


def test_compiled_matches_evaluator_exhaustive_depth2(alphabet):
    words = all_words(alphabet, 4)
    for f in formulas_up_to(2):
        afa = compile_to_afa(f, alphabet)
        for w in words:
            assert afa_accepts(afa, w) == holds(f, w, alphabet), format_formula(f)


def test_compiled_matches_evaluator_sampled_depth3(alphabet):
    rng = random.Random(71)
    pool = formulas_up_to(3)
    sample = rng.sample(pool, 400)
    words = [corpus.random_word(rng, alphabet, 6) for _ in range(12)]
    for f in sample:
        afa = compile_to_afa(f, alphabet)
        for w in words:
            assert afa_accepts(afa, w) == holds(f, w, alphabet), format_formula(f)
