"""Brute-force equilibrium checks at desk scale.

Everything here reimplements the decision procedures by explicit-state
search, independent of the safety-game and product constructions, so the
two code paths can be differential-tested against each other.  Searches are
bounded; exceeding a bound raises OracleOverflow rather than ever returning
a wrong answer.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

from .alphabet import ChannelMask, Letter, UltimatelyPeriodicWord, project
from .automata import Dfa, GoalAutomaton, Nfa, formula_atoms, formula_eval
from .game import Ibg, MooreMachine, StrategyProfile


class OracleOverflow(RuntimeError):
    pass


@dataclass(frozen=True)
class OracleConfig:
    max_states: int | None = None  # per-search cap on explored states; None = space size + 1
    memory: int = 1
    max_profiles: int = 20_000

    def __post_init__(self):
        if self.max_states is not None and self.max_states <= 0:
            raise ValueError("max_states must be positive")
        if self.memory < 0:
            raise ValueError("memory must be nonnegative")
        if self.max_profiles <= 0:
            raise ValueError("max_profiles must be positive")


# ---------------------------------------------------------------------------
# Standalone goal evaluation.  Configurations: a DFA state, an NFA state
# set, or for AFAs an antichain of obligation sets (all satisfying models,
# supersets discarded, which is sound because formulas are positive).


def _start_config(goal: GoalAutomaton):
    if isinstance(goal, Dfa):
        return goal.initial
    if isinstance(goal, Nfa):
        return frozenset((goal.initial,))
    return frozenset((frozenset((goal.initial,)),))


def _all_models(formulas: list) -> list[frozenset[int]]:
    atoms: set[int] = set()
    for f in formulas:
        atoms |= formula_atoms(f)
    ordered = sorted(atoms)
    out = []
    for bits in itertools.product((False, True), repeat=len(ordered)):
        s = frozenset(a for a, b in zip(ordered, bits) if b)
        if all(formula_eval(f, s) for f in formulas):
            out.append(s)
    return out


def _antichain(sets: list[frozenset[int]]) -> frozenset[frozenset[int]]:
    kept = []
    for s in sorted(sets, key=len):
        if not any(m <= s for m in kept):
            kept.append(s)
    return frozenset(kept)


def _step_config(goal: GoalAutomaton, config, letter: Letter):
    rl = project(letter, goal.mask)
    if isinstance(goal, Dfa):
        return goal.delta[config, rl]
    if isinstance(goal, Nfa):
        return goal.step_set(config, rl)
    successors = []
    for obligations in config:
        successors.extend(_all_models([goal.delta[q, rl] for q in sorted(obligations)]))
    return _antichain(successors)


def _config_accepts(goal: GoalAutomaton, config) -> bool:
    if isinstance(goal, Dfa):
        return config in goal.accepting
    if isinstance(goal, Nfa):
        return bool(config & goal.accepting)
    return any(obligations <= goal.accepting for obligations in config)


def _goal_satisfied_on_lasso(goal: GoalAutomaton, lasso: UltimatelyPeriodicWord, budget: int) -> bool:
    config = _start_config(goal)
    t = 0
    seen = set()
    while True:
        if _config_accepts(goal, config):
            return True
        key = (lasso.position(t), config)
        if key in seen:
            return False
        if len(seen) >= budget:
            raise OracleOverflow(f"goal evaluation exceeded {budget} configurations")
        seen.add(key)
        config = _step_config(goal, config, lasso.at(t))
        t += 1


# ---------------------------------------------------------------------------
# Direct machine simulation (never the product construction).


def _machine_outputs(machines: tuple[MooreMachine, ...], states: tuple[int, ...]) -> Letter:
    return tuple(m.output[s] for m, s in zip(machines, states))


def _machine_steps(machines: tuple[MooreMachine, ...], states: tuple[int, ...], letter: Letter) -> tuple[int, ...]:
    return tuple(m.step(s, letter) for m, s in zip(machines, states))


def _simulated_primary_lasso(profile: StrategyProfile, budget: int) -> UltimatelyPeriodicWord:
    machines = profile.machines
    states = tuple(m.initial for m in machines)
    seen: dict[tuple[int, ...], int] = {}
    letters: list[Letter] = []
    while states not in seen:
        if len(letters) >= budget:
            raise OracleOverflow(f"primary-trace simulation exceeded {budget} steps")
        seen[states] = len(letters)
        letter = _machine_outputs(machines, states)
        letters.append(letter)
        states = _machine_steps(machines, states, letter)
    start = seen[states]
    return UltimatelyPeriodicWord(tuple(letters[:start]), tuple(letters[start:]))


def _machine_space(profile: StrategyProfile) -> int:
    n = 1
    for m in profile.machines:
        n *= m.n_states
    return n


def _config_space(goal: GoalAutomaton) -> int:
    if isinstance(goal, Dfa):
        return goal.n_states
    if isinstance(goal, Nfa):
        return 2 ** goal.n_states
    return 2 ** (2 ** goal.n_states)


def oracle_verify(
    game: Ibg,
    winners: frozenset[int] | set[int],
    profile: StrategyProfile,
    config: OracleConfig | None = None,
) -> bool:
    """Equilibrium check from first principles.

    First the primary trace is obtained by simulating the machines step by
    step and the winning set is compared against `winners`.  Then, for every
    losing agent, the deviation tree is searched breadth-first: at each step
    that agent may emit any of its symbols while everyone else emits their
    machine output.  Acceptance only counts on branches that have already
    differed from the machine output at least once, so the primary trace
    itself is excluded.
    """
    config = config or OracleConfig()
    winners = frozenset(winners)
    if not all(0 <= i < game.k for i in winners):
        raise ValueError("winners contain an unknown agent")
    machines = profile.machines
    machine_space = _machine_space(profile)

    budget = config.max_states if config.max_states is not None else machine_space + 1
    lasso = _simulated_primary_lasso(profile, budget)

    for i in game.agents:
        goal = game.goals[i]
        budget = (
            config.max_states
            if config.max_states is not None
            else _config_space(goal) * lasso.span + 1
        )
        if _goal_satisfied_on_lasso(goal, lasso, budget) != (i in winners):
            return False

    for j in game.agents:
        if j in winners:
            continue
        goal = game.goals[j]
        budget = (
            config.max_states
            if config.max_states is not None
            else 2 * _config_space(goal) * machine_space + 1
        )
        start = (_start_config(goal), tuple(m.initial for m in machines), False)
        seen = {start}
        frontier = [start]
        while frontier:
            nxt_frontier = []
            for goal_config, states, deviated in frontier:
                outputs = _machine_outputs(machines, states)
                for c in range(len(game.alphabet.channels[j])):
                    letter = outputs[:j] + (c,) + outputs[j + 1:]
                    now_deviated = deviated or c != outputs[j]
                    goal2 = _step_config(goal, goal_config, letter)
                    if now_deviated and _config_accepts(goal, goal2):
                        return False
                    state = (goal2, _machine_steps(machines, states, letter), now_deviated)
                    if state not in seen:
                        if len(seen) >= budget:
                            raise OracleOverflow(f"deviation search for agent {j} exceeded {budget} states")
                        seen.add(state)
                        nxt_frontier.append(state)
            frontier = nxt_frontier
    return True


# ---------------------------------------------------------------------------
# Profile enumeration: the completeness frontier for one-sided realizability.


def profile_count(game: Ibg, memory: int) -> int:
    if memory == 0:
        return game.alphabet.size()
    n_states = game.alphabet.size() + 1
    total = 1
    for i in game.agents:
        total *= len(game.alphabet.channels[i]) ** n_states
    return total


def _constant_machine(game: Ibg, agent: int, symbol: int) -> MooreMachine:
    empty = ChannelMask.of(())
    return MooreMachine(
        owner=agent,
        alphabet=game.alphabet,
        mask=empty,
        names=("s",),
        initial=0,
        output=(symbol,),
        trans={(0, ()): 0},
    )


def _last_letter_machine(game: Ibg, agent: int, table: tuple[int, ...]) -> MooreMachine:
    alphabet = game.alphabet
    letters = list(alphabet.letters())
    names = ("init",) + tuple(alphabet.format(letter) for letter in letters)
    full = alphabet.full_mask()
    trans = {
        (s, letter): 1 + t
        for s in range(len(letters) + 1)
        for t, letter in enumerate(letters)
    }
    return MooreMachine(agent, alphabet, full, names, 0, table, trans)


def enumerate_profiles(game: Ibg, memory: int = 1) -> Iterator[StrategyProfile]:
    """All memory-0 (constant) or memory-1 (last observed letter) profiles,
    in lexicographic order of the per-agent output tables."""
    if memory == 0:
        for picks in itertools.product(*(range(len(c)) for c in game.alphabet.channels)):
            yield StrategyProfile(
                tuple(_constant_machine(game, i, picks[i]) for i in game.agents)
            )
        return
    if memory != 1:
        raise ValueError("only memory 0 and 1 enumeration is supported")
    n_states = game.alphabet.size() + 1
    per_agent = [
        list(itertools.product(range(len(game.alphabet.channels[i])), repeat=n_states))
        for i in game.agents
    ]
    for tables in itertools.product(*per_agent):
        yield StrategyProfile(
            tuple(_last_letter_machine(game, i, tables[i]) for i in game.agents)
        )


@dataclass
class OneSidedResult:
    status: str  # "found-witness" or "unknown"
    witness: StrategyProfile | None
    profiles_checked: int
    truncated: bool
    overflowed: bool


def oracle_realizable_onesided(
    game: Ibg,
    winners: frozenset[int] | set[int],
    config: OracleConfig | None = None,
) -> OneSidedResult:
    """Search the enumeration for a verified equilibrium.

    Sound but deliberately incomplete: "unknown" never means unrealizable,
    only that no bounded-memory witness was found within the budget.
    """
    config = config or OracleConfig()
    winners = frozenset(winners)
    truncated = profile_count(game, config.memory) > config.max_profiles
    overflowed = False
    checked = 0
    for profile in enumerate_profiles(game, config.memory):
        if checked >= config.max_profiles:
            break
        checked += 1
        try:
            if oracle_verify(game, winners, profile, config):
                return OneSidedResult("found-witness", profile, checked, truncated, overflowed)
        except OracleOverflow:
            overflowed = True
    return OneSidedResult("unknown", None, checked, truncated, overflowed)
