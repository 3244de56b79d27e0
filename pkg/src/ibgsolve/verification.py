"""Check whether a given strategy profile is an equilibrium for a winning set.

The profile's machines are multiplied into one global transducer; each
agent's goal is then checked separately against it.  Winners need their
goal to accept on the primary trace (a reachability query on the goal/
transducer product, which has no input alphabet because every edge consumes
the profile's own output).  Losing agents need the opposite: the product
must never reach the deviator's winning region of the profile-constrained
deviation game, otherwise the agent either already wins on the primary
trace or can escape unilaterally.

Goal kinds: DFAs and NFAs are used directly (the product is relational for
NFAs); AFAs are converted to NFAs only, never determinized, which avoids a
second exponential blowup.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Union

from .alphabet import Letter, project
from .automata import Afa, Dfa, GoalAutomaton, Nfa, afa_to_nfa
from .game import GlobalMoore, Ibg, StrategyProfile, product_profile
from .safety import Arena, SafetyInstance, SafetyResult, solve_safety

QueryGoal = Union[Dfa, Nfa]


def _goal_successors(goal: QueryGoal, q: int, letter: Letter) -> tuple[int, ...]:
    rl = project(letter, goal.mask)
    if isinstance(goal, Dfa):
        return (goal.delta[q, rl],)
    return goal.successors.get((q, rl), ())


def i_query(goal: QueryGoal, g: GlobalMoore) -> tuple[bool, tuple[Letter, ...] | None]:
    """Does the goal accept a finite prefix of the primary trace?

    BFS over goal-state/machine-state pairs where each step consumes the
    machine's own output; passes iff an accepting goal state is reachable,
    returning the shortest accepted prefix.
    """
    start = (goal.initial, g.initial)
    parent: dict[tuple[int, int], tuple[tuple[int, int], Letter]] = {}
    seen = {start}
    queue: deque[tuple[int, int]] = deque([start])
    while queue:
        q, s = queue.popleft()
        if q in goal.accepting:
            path: list[Letter] = []
            v = (q, s)
            while v != start:
                v, letter = parent[v]
                path.append(letter)
            path.reverse()
            return True, tuple(path)
        letter = g.gamma[s]
        s2 = g.trans[s, letter]
        for q2 in _goal_successors(goal, q, letter):
            if (q2, s2) not in seen:
                seen.add((q2, s2))
                parent[q2, s2] = ((q, s), letter)
                queue.append((q2, s2))
    return False, None


@dataclass
class ProfileDeviationGame:
    """Deviation game hard-wired to the profile: the coalition has no
    discretion, it always commits the transducer's output, so solving is a
    reachability question for the deviator."""

    agent: int
    arena: Arena
    v0_index: dict[tuple[int, int], int]
    v0_vertices: list[tuple[int, int]]
    accepting_v0: frozenset[int]
    edge_letter: dict[tuple[int, int], Letter]
    result: SafetyResult

    @property
    def size(self) -> int:
        return self.arena.n


def build_profile_deviation_game(goal: QueryGoal, g: GlobalMoore, agent: int) -> ProfileDeviationGame:
    alphabet = g.alphabet
    agent_symbols = range(len(alphabet.channels[agent]))

    v0_index: dict[tuple[int, int], int] = {}
    v0_vertices: list[tuple[int, int]] = []
    pending: deque[tuple[int, int]] = deque()

    def intern(q: int, s: int) -> int:
        if (q, s) not in v0_index:
            v0_index[q, s] = len(v0_vertices)
            v0_vertices.append((q, s))
            pending.append((q, s))
        return v0_index[q, s]

    intern(goal.initial, g.initial)
    v1_of: dict[int, int] = {}
    n_v1 = 0
    v1_edges: list[tuple[int, list[tuple[int, Letter]]]] = []
    while pending:
        q, s = pending.popleft()
        vid = v0_index[q, s]
        if q in goal.accepting:
            continue
        committed = g.gamma[s]
        targets: list[tuple[int, Letter]] = []
        for c in agent_symbols:
            letter = committed[:agent] + (c,) + committed[agent + 1:]
            s2 = g.trans[s, letter]
            for q2 in _goal_successors(goal, q, letter):
                targets.append((intern(q2, s2), letter))
        v1_of[vid] = n_v1
        v1_edges.append((vid, targets))
        n_v1 += 1

    n0 = len(v0_vertices)
    n = n0 + n_v1
    owner = [0] * n0 + [1] * n_v1
    succ: list[list[int]] = [[] for _ in range(n)]
    labels = [f"q={goal.names[q]} s={s}" for q, s in v0_vertices]
    edge_letter: dict[tuple[int, int], Letter] = {}
    for v1_pos, (v0_id, targets) in enumerate(v1_edges):
        v1_id = n0 + v1_pos
        labels.append(labels[v0_id] + " committed")
        succ[v0_id].append(v1_id)
        for target, letter in sorted(targets):
            succ[v1_id].append(target)
            edge_letter.setdefault((v1_id, target), letter)
    arena = Arena(tuple(owner), tuple(tuple(s) for s in succ), tuple(labels))
    accepting_v0 = frozenset(
        v0_index[q, s] for (q, s) in v0_vertices if q in goal.accepting
    )
    safe = frozenset(v for v in range(n) if v not in accepting_v0)
    result = solve_safety(SafetyInstance(arena, safe))
    return ProfileDeviationGame(agent, arena, v0_index, v0_vertices, accepting_v0, edge_letter, result)


@dataclass
class Violation:
    kind: str  # "primary-trace" or "deviant-trace"
    prefix: tuple[Letter, ...]
    escape: tuple[Letter, ...]


def j_query(goal: QueryGoal, g: GlobalMoore, agent: int) -> tuple[bool, Violation | None, ProfileDeviationGame]:
    """Passes iff the primary trace never enters the deviator's winning
    region.  On failure the violation is classified: if the goal accepts a
    prefix of the primary trace outright, that prefix is the violating
    object; otherwise the earliest winning-region entry is returned with a
    concrete escape path for the deviator."""
    dev = build_profile_deviation_game(goal, g, agent)
    win1 = dev.result.win1
    start = (goal.initial, g.initial)
    parent: dict[tuple[int, int], tuple[tuple[int, int], Letter]] = {}
    seen = {start}
    queue: deque[tuple[int, int]] = deque([start])
    first_breach: tuple[int, int] | None = None
    first_accepting: tuple[int, int] | None = None
    while queue and first_accepting is None:
        q, s = queue.popleft()
        if first_breach is None and dev.v0_index[q, s] in win1:
            first_breach = (q, s)
        if q in goal.accepting:
            first_accepting = (q, s)
            break
        letter = g.gamma[s]
        s2 = g.trans[s, letter]
        for q2 in _goal_successors(goal, q, letter):
            if (q2, s2) not in seen:
                seen.add((q2, s2))
                parent[q2, s2] = ((q, s), letter)
                queue.append((q2, s2))
    if first_breach is None:
        return True, None, dev

    def path_to(vertex: tuple[int, int]) -> tuple[Letter, ...]:
        out: list[Letter] = []
        v = vertex
        while v != start:
            v, letter = parent[v]
            out.append(letter)
        out.reverse()
        return tuple(out)

    if first_accepting is not None:
        return False, Violation("primary-trace", path_to(first_accepting), ()), dev
    escape = _escape_path(dev, dev.v0_index[first_breach])
    return False, Violation("deviant-trace", path_to(first_breach), escape), dev


def _escape_path(dev: ProfileDeviationGame, source: int) -> tuple[Letter, ...]:
    """Letters the deviator forces from a winning vertex to goal acceptance.

    The coalition's moves are fixed, so any arena path is realizable and
    BFS suffices; letters live on the agent-1 edges."""
    parent: dict[int, int] = {}
    seen = {source}
    queue: deque[int] = deque([source])
    target = None
    while queue:
        v = queue.popleft()
        if v in dev.accepting_v0:
            target = v
            break
        for w in dev.arena.succ[v]:
            if w not in seen:
                seen.add(w)
                parent[w] = v
                queue.append(w)
    if target is None:
        raise RuntimeError("winning deviation vertex has no path to acceptance")
    vertices = [target]
    while vertices[-1] != source:
        vertices.append(parent[vertices[-1]])
    vertices.reverse()
    letters = []
    for v, w in zip(vertices, vertices[1:]):
        if dev.arena.owner[v] == 1:
            letters.append(dev.edge_letter[v, w])
    return tuple(letters)


@dataclass
class QueryResult:
    agent: int
    passed: bool
    path: tuple[Letter, ...] | None = None
    violation: Violation | None = None


@dataclass
class VerificationReport:
    winners: frozenset[int]
    is_equilibrium: bool
    winner_results: dict[int, QueryResult]
    loser_results: dict[int, QueryResult]
    stats: dict[str, object]


def query_goal(goal: GoalAutomaton) -> QueryGoal:
    """DFA and NFA goals are queried directly; AFAs via their obligation NFA."""
    if isinstance(goal, Afa):
        return afa_to_nfa(goal)
    return goal


def verify(game: Ibg, winners: frozenset[int] | set[int], profile: StrategyProfile) -> VerificationReport:
    """Is the profile an equilibrium whose winning set is exactly `winners`?"""
    winners = frozenset(winners)
    if not all(0 <= i < game.k for i in winners):
        raise ValueError(f"winners {sorted(winners)} contain an unknown agent (k={game.k})")
    if len(profile.machines) != game.k:
        raise ValueError(f"profile has {len(profile.machines)} machines for {game.k} agents")
    if profile.alphabet != game.alphabet:
        raise ValueError("profile and game disagree on the alphabet")
    g = product_profile(profile)
    goals = [query_goal(goal) for goal in game.goals]
    winner_results: dict[int, QueryResult] = {}
    loser_results: dict[int, QueryResult] = {}
    dev_sizes: dict[int, int] = {}
    for i in sorted(winners):
        passed, path = i_query(goals[i], g)
        winner_results[i] = QueryResult(i, passed, path=path)
    for j in game.agents:
        if j in winners:
            continue
        passed, violation, dev = j_query(goals[j], g, j)
        loser_results[j] = QueryResult(j, passed, violation=violation)
        dev_sizes[j] = dev.size
    ok = all(r.passed for r in winner_results.values()) and all(
        r.passed for r in loser_results.values()
    )
    stats = {
        "profile_states": g.n_states,
        "deviation_arena_sizes": dev_sizes,
    }
    return VerificationReport(winners, ok, winner_results, loser_results, stats)
