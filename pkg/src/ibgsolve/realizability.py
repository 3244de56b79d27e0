"""Decide whether a Nash equilibrium with a prescribed winning set exists.

The pipeline: convert every goal to a DFA, solve one deviation safety game
per losing agent, build the product Buchi automaton that tracks all goals
plus the set of still-unsatisfied winners, prune its transitions by the
deviation games' winning regions, and test the result for nonemptiness.  A
nonempty automaton yields a lasso, from which a witness profile is built:
replay the lasso while everyone conforms, switch to the relevant deviation
game's positional strategy after a unilateral deviation by a losing agent.
"""

from __future__ import annotations

from dataclasses import dataclass

from .alphabet import ChannelMask, Letter, ProductAlphabet, UltimatelyPeriodicWord, project
from .automata import Afa, Dfa, GoalAutomaton, Nfa, afa_to_dfa, determinize
from .game import Ibg, MooreMachine, StrategyProfile
from .safety import Arena, SafetyInstance, SafetyResult, solve_safety


def goal_as_dfa(goal: GoalAutomaton) -> Dfa:
    if isinstance(goal, Dfa):
        return goal
    if isinstance(goal, Nfa):
        return determinize(goal)
    if isinstance(goal, Afa):
        return afa_to_dfa(goal)
    raise TypeError(f"not a goal automaton: {goal!r}")


@dataclass
class DeviationGame:
    """Safety game for one potential deviator.

    Agent 0 is the coalition of everyone else: from a goal state q it
    commits to a letter, then the deviator may replace its own channel
    before the goal steps.  The coalition must keep the goal out of its
    accepting set; accepting goal states are unsafe and blocked.  Agent-1
    vertices are keyed on the letter restricted to the goal's mask plus the
    deviator's channel, which merges letters the game cannot distinguish.
    """

    agent: int
    goal: Dfa
    keys: ChannelMask
    arena: Arena
    v0_index: dict[int, int]
    v1_index: dict[tuple[int, Letter], int]
    v1_vertices: list[tuple[int, Letter]]
    result: SafetyResult

    @property
    def size(self) -> int:
        return self.arena.n

    def v0_in_win0(self, q: int) -> bool:
        return self.v0_index[q] in self.result.win0

    def v1_in_win0(self, q: int, letter: Letter) -> bool:
        return self.v1_index[q, project(letter, self.keys)] in self.result.win0

    def strategy_letter(self, q: int) -> Letter:
        """Expand the positional choice at a winning coalition vertex into a
        concrete full letter (unconstrained channels take symbol 0)."""
        chosen = self.result.strategy0[self.v0_index[q]]
        _, rl = self.v1_vertices[chosen - len(self.v0_index)]
        letter = [0] * self.goal.alphabet.k
        for pos, channel in enumerate(self.keys.agents):
            letter[channel] = rl[pos]
        return tuple(letter)


def build_deviation_game(game: Ibg, agent: int, goal_dfa: Dfa) -> DeviationGame:
    """Build and solve the deviation game for one agent's goal DFA."""
    alphabet = game.alphabet
    keys = goal_dfa.mask.union((agent,))
    n_goal = goal_dfa.n_states
    key_letters = list(alphabet.restricted_letters(keys))
    key_pos = {channel: i for i, channel in enumerate(keys.agents)}
    goal_positions = [key_pos[c] for c in goal_dfa.mask.agents]
    agent_pos = key_pos[agent]
    agent_symbols = range(len(alphabet.channels[agent]))

    v0_index = {q: q for q in range(n_goal)}
    v1_vertices = [(q, rl) for q in range(n_goal) if q not in goal_dfa.accepting for rl in key_letters]
    v1_index = {vertex: n_goal + i for i, vertex in enumerate(v1_vertices)}

    n = n_goal + len(v1_vertices)
    owner = [0] * n_goal + [1] * len(v1_vertices)
    succ: list[list[int]] = [[] for _ in range(n)]
    labels = [f"q={goal_dfa.names[q]}" for q in range(n_goal)]
    for (q, rl), vid in v1_index.items():
        labels.append(f"q={goal_dfa.names[q]} committed={alphabet.format(rl, keys)}")
        succ[q].append(vid)
        for c in agent_symbols:
            deviated = rl[:agent_pos] + (c,) + rl[agent_pos + 1:]
            target = goal_dfa.delta[q, tuple(deviated[p] for p in goal_positions)]
            succ[vid].append(target)
    arena = Arena(tuple(owner), tuple(tuple(s) for s in succ), tuple(labels))
    safe = frozenset(v for v in range(n) if not (v < n_goal and v in goal_dfa.accepting))
    result = solve_safety(SafetyInstance(arena, safe))
    return DeviationGame(agent, goal_dfa, keys, arena, v0_index, v1_index, v1_vertices, result)


# ---------------------------------------------------------------------------
# Product Buchi automaton over all goal DFAs plus the pending winner set.


ProductState = tuple[tuple[int, ...], frozenset[int]]


@dataclass
class ProductBuchi:
    """Deterministic Buchi automaton accepting words on which exactly the
    prescribed winners' goals are satisfied.

    The second state component is the set of winners whose goals are still
    pending; it only shrinks and the empty set is absorbing.  Transitions
    that would let a losing agent's goal accept are undefined.  A refined
    automaton additionally drops transitions that leave some deviation
    game's coalition winning region.
    """

    alphabet: ProductAlphabet
    winners: frozenset[int]
    goal_dfas: tuple[Dfa, ...]
    states: list[ProductState]
    initial: int | None
    trans: dict[tuple[int, Letter], int]
    accepting: frozenset[int]
    refined: bool

    @property
    def n_states(self) -> int:
        return len(self.states)


def _build_product(
    goal_dfas: tuple[Dfa, ...],
    winners: frozenset[int],
    alphabet: ProductAlphabet,
    deviation_games: dict[int, DeviationGame] | None,
) -> ProductBuchi:
    refined = deviation_games is not None
    k = len(goal_dfas)
    losers = [j for j in range(k) if j not in winners]
    # A goal accepting the empty prefix is satisfied on every trace: winners
    # start already satisfied, a losing agent makes the instance empty.
    empty = ProductBuchi(alphabet, winners, goal_dfas, [], None, {}, frozenset(), refined)
    for j in losers:
        if goal_dfas[j].initial in goal_dfas[j].accepting:
            return empty
    if refined:
        for j in losers:
            if not deviation_games[j].v0_in_win0(goal_dfas[j].initial):
                return empty
    pending0 = frozenset(
        i for i in winners if goal_dfas[i].initial not in goal_dfas[i].accepting
    )
    start: ProductState = (tuple(d.initial for d in goal_dfas), pending0)
    index: dict[ProductState, int] = {start: 0}
    states: list[ProductState] = [start]
    trans: dict[tuple[int, Letter], int] = {}
    i = 0
    while i < len(states):
        qs, pending = states[i]
        for letter in alphabet.letters():
            nxt = tuple(d.delta[q, project(letter, d.mask)] for d, q in zip(goal_dfas, qs))
            if any(nxt[j] in goal_dfas[j].accepting for j in losers):
                continue
            if refined and not all(
                deviation_games[j].v1_in_win0(qs[j], letter) for j in losers
            ):
                continue
            nxt_pending = pending - frozenset(
                i2 for i2 in pending if nxt[i2] in goal_dfas[i2].accepting
            )
            state = (nxt, nxt_pending)
            if state not in index:
                index[state] = len(states)
                states.append(state)
            trans[i, letter] = index[state]
        i += 1
    accepting = frozenset(i for i, (_, pending) in enumerate(states) if not pending)
    return ProductBuchi(alphabet, winners, goal_dfas, states, 0, trans, accepting, refined)


def build_product_buchi(game: Ibg, winners: frozenset[int], goal_dfas: tuple[Dfa, ...]) -> ProductBuchi:
    return _build_product(goal_dfas, winners, game.alphabet, None)


def refine(ab: ProductBuchi, deviation_games: dict[int, DeviationGame]) -> ProductBuchi:
    """Keep only transitions whose committed letter sits in every losing
    agent's coalition winning region; rebuilt reachable-only."""
    return _build_product(ab.goal_dfas, ab.winners, ab.alphabet, deviation_games)


def _tarjan_cyclic(n: int, succ: list[list[int]]) -> list[bool]:
    """Which vertices lie on some cycle (nontrivial SCC or self-loop)."""
    index_of = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    cyclic = [False] * n
    counter = 0
    for root in range(n):
        if index_of[root] != -1:
            continue
        work = [(root, iter(succ[root]))]
        index_of[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if index_of[w] == -1:
                    index_of[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter(succ[w])))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index_of[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index_of[v]:
                component = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    component.append(w)
                    if w == v:
                        break
                if len(component) > 1:
                    for w in component:
                        cyclic[w] = True
                elif v in succ[v]:
                    cyclic[v] = True
    return cyclic


def buchi_nonempty(ab: ProductBuchi) -> UltimatelyPeriodicWord | None:
    """Return an accepted lasso, or None when the language is empty.

    The pending set is absorbing at empty, so every state reachable from an
    accepting state is accepting; nonemptiness reduces to finding a
    reachable accepting state that lies on a cycle.  The witness uses BFS
    both for the stem and the cycle, breaking ties by lowest letter index.
    """
    if ab.initial is None:
        return None
    n = ab.n_states
    letters = list(ab.alphabet.letters())
    succ: list[list[int]] = [[] for _ in range(n)]
    for (v, _), w in ab.trans.items():
        succ[v].append(w)
    succ = [sorted(set(s)) for s in succ]

    order = [ab.initial]
    parent: dict[int, tuple[int, Letter]] = {}
    seen = {ab.initial}
    i = 0
    while i < len(order):
        v = order[i]
        for letter in letters:
            w = ab.trans.get((v, letter))
            if w is not None and w not in seen:
                seen.add(w)
                parent[w] = (v, letter)
                order.append(w)
        i += 1

    cyclic = _tarjan_cyclic(n, succ)
    target = next((v for v in order if v in ab.accepting and cyclic[v]), None)
    if target is None:
        return None

    stem: list[Letter] = []
    v = target
    while v != ab.initial:
        v, letter = parent[v]
        stem.append(letter)
    stem.reverse()

    # Shortest cycle through the target, again lowest letter first.
    cycle_parent: dict[int, tuple[int, Letter]] = {}
    frontier = [target]
    reached_back = False
    visited = set()
    while frontier and not reached_back:
        nxt_frontier = []
        for v in frontier:
            for letter in letters:
                w = ab.trans.get((v, letter))
                if w is None:
                    continue
                if w == target:
                    cycle_parent[target] = (v, letter)
                    reached_back = True
                    break
                if w not in visited:
                    visited.add(w)
                    cycle_parent[w] = (v, letter)
                    nxt_frontier.append(w)
            if reached_back:
                break
        frontier = nxt_frontier
    loop: list[Letter] = []
    v = target
    while True:
        p, letter = cycle_parent[v]
        loop.append(letter)
        v = p
        if v == target:
            break
    loop.reverse()
    return UltimatelyPeriodicWord(tuple(stem), tuple(loop))


# ---------------------------------------------------------------------------
# Witness extraction and the top-level decision procedure.


@dataclass
class RealizabilityStats:
    goal_dfa_states: tuple[int, ...]
    deviation_arena_sizes: dict[int, int]
    product_states: int
    product_transitions: int


@dataclass
class RealizabilityVerdict:
    winners: frozenset[int]
    realizable: bool
    lasso: UltimatelyPeriodicWord | None
    witness: StrategyProfile | None
    stats: RealizabilityStats
    deviation_games: dict[int, DeviationGame]


def _replay_lasso(ab: ProductBuchi, lasso: UltimatelyPeriodicWord) -> list[int]:
    """Product states visited at each lasso position; sanity-checks that the
    lasso really is accepted by the refined automaton."""
    span = lasso.span
    states = [ab.initial]
    for t in range(span):
        state = ab.trans.get((states[-1], lasso.at(t)))
        if state is None:
            raise RuntimeError("witness lasso left the refined automaton")
        states.append(state)
    if states[span] != states[len(lasso.prefix)]:
        raise RuntimeError("witness lasso period does not close a cycle")
    if states[len(lasso.prefix)] not in ab.accepting:
        raise RuntimeError("witness lasso cycle misses the accepting set")
    return states


def extract_witness(
    game: Ibg,
    winners: frozenset[int],
    lasso: UltimatelyPeriodicWord,
    refined: ProductBuchi,
    deviation_games: dict[int, DeviationGame],
) -> StrategyProfile:
    """Build one Moore machine per agent realizing the equilibrium.

    Mode A replays the lasso while the observed history matches it.  On the
    first letter deviating in exactly one losing agent's channel, mode B
    tracks that agent's deviation game with the coalition's positional
    strategy.  Any other divergence falls through to mode C, a fixed
    constant output.
    """
    alphabet = game.alphabet
    prod_states = _replay_lasso(refined, lasso)
    span = lasso.span
    wrap = len(lasso.prefix)
    goal_dfas = refined.goal_dfas
    losers = [j for j in range(alphabet.k) if j not in winners]

    def next_pos(p: int) -> int:
        return p + 1 if p + 1 < span else wrap

    ModeState = tuple
    start: ModeState = ("A", 0)
    index: dict[ModeState, int] = {start: 0}
    states: list[ModeState] = [start]
    outputs: list[Letter] = []
    trans: dict[tuple[int, Letter], int] = {}

    def intern(state: ModeState) -> int:
        if state not in index:
            index[state] = len(states)
            states.append(state)
        return index[state]

    i = 0
    while i < len(states):
        state = states[i]
        if state[0] == "A":
            expected = lasso.at(state[1])
        elif state[0] == "B":
            expected = deviation_games[state[1]].strategy_letter(state[2])
        else:
            expected = tuple(0 for _ in range(alphabet.k))
        outputs.append(expected)
        for letter in alphabet.letters():
            diff = [c for c in range(alphabet.k) if letter[c] != expected[c]]
            if state[0] == "A":
                p = state[1]
                if not diff:
                    nxt: ModeState = ("A", next_pos(p))
                elif len(diff) == 1 and diff[0] in losers:
                    j = diff[0]
                    q = prod_states[p]
                    goal_state = refined.states[q][0][j]
                    landed = goal_dfas[j].delta[goal_state, project(letter, goal_dfas[j].mask)]
                    nxt = ("B", j, landed)
                else:
                    nxt = ("C",)
            elif state[0] == "B":
                j, q = state[1], state[2]
                if all(c == j for c in diff):
                    landed = goal_dfas[j].delta[q, project(letter, goal_dfas[j].mask)]
                    nxt = ("B", j, landed)
                else:
                    nxt = ("C",)
            else:
                nxt = ("C",)
            trans[i, letter] = intern(nxt)
        i += 1

    def state_name(state: ModeState) -> str:
        if state[0] == "A":
            return f"replay{state[1]}"
        if state[0] == "B":
            return f"escape{state[1]}_{goal_dfas[state[1]].names[state[2]]}"
        return "default"

    names = tuple(state_name(s) for s in states)
    full = alphabet.full_mask()
    machines = []
    for agent in game.agents:
        machines.append(
            MooreMachine(
                owner=agent,
                alphabet=alphabet,
                mask=full,
                names=names,
                initial=0,
                output=tuple(out[agent] for out in outputs),
                trans=dict(trans),
            )
        )
    return StrategyProfile(tuple(machines))


def realizable(game: Ibg, winners: frozenset[int] | set[int]) -> RealizabilityVerdict:
    """Decide whether an equilibrium with exactly this winning set exists."""
    winners = frozenset(winners)
    if not all(0 <= i < game.k for i in winners):
        raise ValueError(f"winners {sorted(winners)} contain an unknown agent (k={game.k})")
    goal_dfas = tuple(goal_as_dfa(goal) for goal in game.goals)
    deviation_games = {
        j: build_deviation_game(game, j, goal_dfas[j])
        for j in game.agents
        if j not in winners
    }
    refined = _build_product(goal_dfas, winners, game.alphabet, deviation_games)
    lasso = buchi_nonempty(refined)
    witness = None
    if lasso is not None:
        witness = extract_witness(game, winners, lasso, refined, deviation_games)
    stats = RealizabilityStats(
        goal_dfa_states=tuple(d.n_states for d in goal_dfas),
        deviation_arena_sizes={j: g.size for j, g in sorted(deviation_games.items())},
        product_states=refined.n_states,
        product_transitions=len(refined.trans),
    )
    return RealizabilityVerdict(winners, lasso is not None, lasso, witness, stats, deviation_games)
