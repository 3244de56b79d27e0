"""Finite-trace temporal formulas: parsing, semantics, and compilation to AFA.

Atoms test one agent channel against one of its symbols ("p0=a").  The
grammar has unary ! X N F G, binary U R & |, parentheses, and the keywords
true/false, with precedence unary > U/R > & > | and right-associative U/R.

Empty-word convention: the empty trace satisfies exactly the formulas whose
normal form starts with a weak next or a release (G included) or is the
constant true.  Negation therefore does not commute with satisfaction on the
empty trace; `holds` implements the matching case table explicitly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence, Union

from .alphabet import ChannelMask, Letter, ProductAlphabet
from .automata import Afa, BoolFormula, FAtom, FFalse, FTrue, f_and, f_or


@dataclass(frozen=True)
class LTrue:
    pass


@dataclass(frozen=True)
class LFalse:
    pass


@dataclass(frozen=True)
class Atom:
    agent: int
    symbol: str


@dataclass(frozen=True)
class Not:
    arg: "LtlfFormula"


@dataclass(frozen=True)
class And:
    args: tuple["LtlfFormula", ...]


@dataclass(frozen=True)
class Or:
    args: tuple["LtlfFormula", ...]


@dataclass(frozen=True)
class Next:
    arg: "LtlfFormula"


@dataclass(frozen=True)
class WeakNext:
    arg: "LtlfFormula"


@dataclass(frozen=True)
class Until:
    left: "LtlfFormula"
    right: "LtlfFormula"


@dataclass(frozen=True)
class Release:
    left: "LtlfFormula"
    right: "LtlfFormula"


@dataclass(frozen=True)
class Eventually:
    arg: "LtlfFormula"


@dataclass(frozen=True)
class Always:
    arg: "LtlfFormula"


LtlfFormula = Union[
    LTrue, LFalse, Atom, Not, And, Or, Next, WeakNext, Until, Release, Eventually, Always
]


def format_formula(f: LtlfFormula) -> str:
    match f:
        case LTrue():
            return "true"
        case LFalse():
            return "false"
        case Atom(agent, symbol):
            return f"p{agent}={symbol}"
        case Not(g):
            return f"!({format_formula(g)})"
        case And(args):
            return "(" + " & ".join(format_formula(a) for a in args) + ")"
        case Or(args):
            return "(" + " | ".join(format_formula(a) for a in args) + ")"
        case Next(g):
            return f"X({format_formula(g)})"
        case WeakNext(g):
            return f"N({format_formula(g)})"
        case Until(l, r):
            return f"({format_formula(l)} U {format_formula(r)})"
        case Release(l, r):
            return f"({format_formula(l)} R {format_formula(r)})"
        case Eventually(g):
            return f"F({format_formula(g)})"
        case Always(g):
            return f"G({format_formula(g)})"
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Parser.


class LtlfSyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


_TOKEN_RE = re.compile(r"[()&|!=]|[A-Za-z0-9_]+|\S")
_KEYWORDS = {"true", "false", "X", "N", "F", "G", "U", "R"}
_ATOM_RE = re.compile(r"p(\d+)$")


class _Parser:
    def __init__(self, text: str, alphabet: ProductAlphabet | None):
        self.text = text
        self.alphabet = alphabet
        self.tokens = [(m.group(0), m.start()) for m in _TOKEN_RE.finditer(text)]
        self.pos = 0

    def _peek(self) -> tuple[str, int]:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos]
        return ("", len(self.text))

    def _next(self) -> tuple[str, int]:
        tok = self._peek()
        self.pos += 1
        return tok

    def _expect(self, token: str):
        got, offset = self._next()
        if got != token:
            raise LtlfSyntaxError(f"expected {token!r}, found {got!r}" if got else f"expected {token!r}", offset)

    def parse(self) -> LtlfFormula:
        f = self.parse_or()
        tok, offset = self._peek()
        if tok:
            raise LtlfSyntaxError(f"unexpected {tok!r}", offset)
        return f

    def parse_or(self) -> LtlfFormula:
        args = [self.parse_and()]
        while self._peek()[0] == "|":
            self._next()
            args.append(self.parse_and())
        return args[0] if len(args) == 1 else Or(tuple(args))

    def parse_and(self) -> LtlfFormula:
        args = [self.parse_until()]
        while self._peek()[0] == "&":
            self._next()
            args.append(self.parse_until())
        return args[0] if len(args) == 1 else And(tuple(args))

    def parse_until(self) -> LtlfFormula:
        left = self.parse_unary()
        tok, _ = self._peek()
        if tok == "U":
            self._next()
            return Until(left, self.parse_until())
        if tok == "R":
            self._next()
            return Release(left, self.parse_until())
        return left

    def parse_unary(self) -> LtlfFormula:
        tok, offset = self._peek()
        if tok == "!":
            self._next()
            return Not(self.parse_unary())
        if tok == "X":
            self._next()
            return Next(self.parse_unary())
        if tok == "N":
            self._next()
            return WeakNext(self.parse_unary())
        if tok == "F":
            self._next()
            return Eventually(self.parse_unary())
        if tok == "G":
            self._next()
            return Always(self.parse_unary())
        return self.parse_primary()

    def parse_primary(self) -> LtlfFormula:
        tok, offset = self._next()
        if tok == "(":
            f = self.parse_or()
            self._expect(")")
            return f
        if tok == "true":
            return LTrue()
        if tok == "false":
            return LFalse()
        m = _ATOM_RE.match(tok) if tok else None
        if m:
            self._expect("=")
            sym, sym_offset = self._next()
            if not sym or not re.fullmatch(r"[A-Za-z0-9_]+", sym):
                raise LtlfSyntaxError("expected a symbol", sym_offset)
            agent = int(m.group(1))
            if self.alphabet is not None:
                if agent >= self.alphabet.k:
                    raise LtlfSyntaxError(f"unknown channel p{agent}", offset)
                if sym not in self.alphabet.channels[agent]:
                    raise LtlfSyntaxError(f"unknown symbol {sym!r} on channel {agent}", sym_offset)
            return Atom(agent, sym)
        if not tok:
            raise LtlfSyntaxError("unexpected end of formula", offset)
        raise LtlfSyntaxError(f"unexpected {tok!r}", offset)


def parse(text: str, alphabet: ProductAlphabet | None = None) -> LtlfFormula:
    """Parse a formula; with an alphabet, atoms are checked against it."""
    return _Parser(text, alphabet).parse()


# ---------------------------------------------------------------------------
# Negation normal form.  F and G are rewritten into U and R.


def nnf(f: LtlfFormula) -> LtlfFormula:
    match f:
        case LTrue() | LFalse() | Atom(_, _):
            return f
        case Not(g):
            return _nnf_neg(g)
        case And(args):
            return And(tuple(nnf(a) for a in args))
        case Or(args):
            return Or(tuple(nnf(a) for a in args))
        case Next(g):
            return Next(nnf(g))
        case WeakNext(g):
            return WeakNext(nnf(g))
        case Until(l, r):
            return Until(nnf(l), nnf(r))
        case Release(l, r):
            return Release(nnf(l), nnf(r))
        case Eventually(g):
            return Until(LTrue(), nnf(g))
        case Always(g):
            return Release(LFalse(), nnf(g))
    raise TypeError(f"not a formula: {f!r}")


def _nnf_neg(f: LtlfFormula) -> LtlfFormula:
    match f:
        case LTrue():
            return LFalse()
        case LFalse():
            return LTrue()
        case Atom(_, _):
            return Not(f)
        case Not(g):
            return nnf(g)
        case And(args):
            return Or(tuple(_nnf_neg(a) for a in args))
        case Or(args):
            return And(tuple(_nnf_neg(a) for a in args))
        case Next(g):
            return WeakNext(_nnf_neg(g))
        case WeakNext(g):
            return Next(_nnf_neg(g))
        case Until(l, r):
            return Release(_nnf_neg(l), _nnf_neg(r))
        case Release(l, r):
            return Until(_nnf_neg(l), _nnf_neg(r))
        case Eventually(g):
            return Release(LFalse(), _nnf_neg(g))
        case Always(g):
            return Until(LTrue(), _nnf_neg(g))
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Direct recursive semantics.  This is the oracle the compiled automata are
# tested against, so it must not go through nnf or compile_to_afa; negation
# is handled by a dual recursion instead of rewriting.
#
# Suffix boundaries follow the empty-word convention uniformly: whenever a
# next-step obligation runs off the end of the word it is judged by the
# empty-word table of the obligation itself.  A consequence of the expansion
# laws is that strong and weak next agree on nonempty words and differ only
# on the empty word.


def holds(f: LtlfFormula, word: Sequence[Letter], alphabet: ProductAlphabet) -> bool:
    n = len(word)

    def sat(g: LtlfFormula, i: int) -> bool:
        if i == n:
            return _empty_word_sat(g)
        match g:
            case LTrue():
                return True
            case LFalse():
                return False
            case Atom(agent, symbol):
                return alphabet.channels[agent][word[i][agent]] == symbol
            case Not(h):
                return neg(h, i)
            case And(args):
                return all(sat(a, i) for a in args)
            case Or(args):
                return any(sat(a, i) for a in args)
            case Next(h) | WeakNext(h):
                return sat(h, i + 1)
            case Until(l, r):
                return sat(r, i) or (sat(l, i) and sat(g, i + 1))
            case Release(l, r):
                return sat(r, i) and (sat(l, i) or sat(g, i + 1))
            case Eventually(h):
                return sat(h, i) or sat(g, i + 1)
            case Always(h):
                return sat(h, i) and sat(g, i + 1)
        raise TypeError(f"not a formula: {g!r}")

    def neg(g: LtlfFormula, i: int) -> bool:
        if i == n:
            return _empty_word_neg(g)
        match g:
            case LTrue():
                return False
            case LFalse():
                return True
            case Atom(agent, symbol):
                return alphabet.channels[agent][word[i][agent]] != symbol
            case Not(h):
                return sat(h, i)
            case And(args):
                return any(neg(a, i) for a in args)
            case Or(args):
                return all(neg(a, i) for a in args)
            case Next(h) | WeakNext(h):
                return neg(h, i + 1)
            case Until(l, r):
                return neg(r, i) and (neg(l, i) or neg(g, i + 1))
            case Release(l, r):
                return neg(r, i) or (neg(l, i) and neg(g, i + 1))
            case Eventually(h):
                return neg(h, i) and neg(g, i + 1)
            case Always(h):
                return neg(h, i) or neg(g, i + 1)
        raise TypeError(f"not a formula: {g!r}")

    return sat(f, 0)


def _empty_word_sat(f: LtlfFormula) -> bool:
    # Mirrors the accepting-state rule of compile_to_afa on the normal form.
    match f:
        case LTrue() | WeakNext(_) | Release(_, _) | Always(_):
            return True
        case Not(g):
            return _empty_word_neg(g)
        case _:
            return False


def _empty_word_neg(f: LtlfFormula) -> bool:
    match f:
        case LFalse() | Next(_) | Until(_, _) | Eventually(_):
            return True
        case Not(g):
            return _empty_word_sat(g)
        case _:
            return False


# ---------------------------------------------------------------------------
# Compilation: formula-as-state alternating automaton.


def _subformulas(f: LtlfFormula, acc: list[LtlfFormula]) -> None:
    if f in acc:
        return
    acc.append(f)
    match f:
        case Not(g) | Next(g) | WeakNext(g) | Eventually(g) | Always(g):
            _subformulas(g, acc)
        case And(args) | Or(args):
            for a in args:
                _subformulas(a, acc)
        case Until(l, r) | Release(l, r):
            _subformulas(l, acc)
            _subformulas(r, acc)
        case _:
            pass


def referenced_channels(f: LtlfFormula) -> set[int]:
    acc: list[LtlfFormula] = []
    _subformulas(f, acc)
    return {g.agent for g in acc if isinstance(g, Atom)}


def compile_to_afa(formula: LtlfFormula, alphabet: ProductAlphabet) -> Afa:
    """Compile to an AFA whose finite-word language is the formula's.

    Formula-as-state construction over the normal form's subformulas (plus a
    true sink), following the standard expansion laws; only states reachable
    through the transition formulas are materialized, so the state count is
    at most the number of distinct subformulas plus one.  Accepting states
    are those discharged at the end of a word: weak-next states, release
    states, and the sink.  The automaton only reads the channels the formula
    mentions.
    """
    f = nnf(formula)
    for agent in sorted(referenced_channels(f)):
        if agent >= alphabet.k:
            raise ValueError(f"formula references channel p{agent}, alphabet has {alphabet.k}")
    all_subs: list[LtlfFormula] = []
    _subformulas(f, all_subs)
    for g in all_subs:
        if isinstance(g, Atom) and g.symbol not in alphabet.channels[g.agent]:
            raise ValueError(f"formula references unknown symbol {g.symbol!r} on channel {g.agent}")

    mask = ChannelMask.of(referenced_channels(f))
    channel_pos = {agent: i for i, agent in enumerate(mask.agents)}
    rls = list(alphabet.restricted_letters(mask))

    states: list[LtlfFormula] = []
    index: dict[LtlfFormula, int] = {}

    def intern(g: LtlfFormula) -> int:
        if g not in index:
            index[g] = len(states)
            states.append(g)
        return index[g]

    def delta_of(g: LtlfFormula, rl: Letter) -> BoolFormula:
        match g:
            case LTrue():
                return FTrue()
            case LFalse():
                return FFalse()
            case Atom(agent, symbol):
                picked = alphabet.channels[agent][rl[channel_pos[agent]]]
                return FTrue() if picked == symbol else FFalse()
            case Not(Atom(agent, symbol)):
                picked = alphabet.channels[agent][rl[channel_pos[agent]]]
                return FFalse() if picked == symbol else FTrue()
            case And(args):
                return f_and(delta_of(a, rl) for a in args)
            case Or(args):
                return f_or(delta_of(a, rl) for a in args)
            case Next(h) | WeakNext(h):
                return FAtom(intern(h))
            case Until(l, r):
                return f_or([delta_of(r, rl), f_and([delta_of(l, rl), FAtom(intern(g))])])
            case Release(l, r):
                return f_and([delta_of(r, rl), f_or([delta_of(l, rl), FAtom(intern(g))])])
        raise ValueError(f"formula not in normal form: {format_formula(g)}")

    delta: dict[tuple[int, Letter], BoolFormula] = {}
    intern(f)
    done = 0
    while done < len(states):
        g = states[done]
        qid = index[g]
        for rl in rls:
            delta[qid, rl] = delta_of(g, rl)
        done += 1

    accepting = frozenset(
        index[g] for g in states if isinstance(g, (WeakNext, Release)) or g == LTrue()
    )
    names = tuple(format_formula(g) for g in states)
    return Afa(alphabet, mask, names, index[f], accepting, delta)
