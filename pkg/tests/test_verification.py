import random

import pytest

from ibgsolve import (
    Dfa,
    Ibg,
    StrategyProfile,
    as_afa,
    as_nfa,
    build_profile_deviation_game,
    i_query,
    j_query,
    oracle_verify,
    product_profile,
    query_goal,
    verify,
)
from ibgsolve.alphabet import project

import corpus


@pytest.fixture
def const_ac(ev_game):
    return corpus.constant_profile(ev_game, ("a", "c"))


# ---------------------------------------------------------------------------
# i-queries


def test_i_query_pass_with_shortest_path(ev_game, const_ac):
    g = product_profile(const_ac)
    passed, path = i_query(ev_game.goals[0], g)
    assert passed
    assert len(path) == 1


def test_i_query_fail(ev_game, const_ac):
    g = product_profile(const_ac)
    passed, path = i_query(ev_game.goals[1], g)
    assert not passed
    assert path is None


def test_i_query_accepting_initial_state(ev_game, const_ac):
    goal = ev_game.goals[0]
    eager = Dfa(goal.alphabet, goal.mask, goal.names, goal.initial,
                goal.accepting | {goal.initial}, goal.delta)
    g = product_profile(const_ac)
    passed, path = i_query(eager, g)
    assert passed
    assert path == ()


def test_i_query_matches_prefix_acceptance():
    from ibgsolve import accepts_prefix, primary_trace

    rng = random.Random(211)
    for _ in range(150):
        game = corpus.random_game(rng)
        profile = corpus.random_profile(rng, game)
        g = product_profile(profile)
        trace = primary_trace(g)
        for goal in game.goals:
            passed, _ = i_query(query_goal(goal), g)
            assert passed == accepts_prefix(goal, trace)


# ---------------------------------------------------------------------------
# profile deviation games and j-queries


def test_profile_deviation_game_no_accepting_states(ev_game, const_ac):
    goal = ev_game.goals[1]
    hollow = Dfa(goal.alphabet, goal.mask, goal.names, goal.initial, frozenset(), goal.delta)
    g = product_profile(const_ac)
    dev = build_profile_deviation_game(hollow, g, 1)
    reachable_v0 = set(dev.v0_index.values())
    assert not (dev.result.win1 & reachable_v0)


def test_profile_deviation_game_mp_initial_breach(mp_game):
    profile = corpus.constant_profile(mp_game, ("a", "c"))
    g = product_profile(profile)
    dev = build_profile_deviation_game(mp_game.goals[1], g, 1)
    assert dev.v0_index[mp_game.goals[1].initial, g.initial] in dev.result.win1


def test_profile_deviation_game_ev_initial_safe(ev_game, const_ac):
    g = product_profile(const_ac)
    dev = build_profile_deviation_game(ev_game.goals[1], g, 1)
    assert dev.v0_index[ev_game.goals[1].initial, g.initial] in dev.result.win0


def test_profile_deviation_game_accepting_states_lose(ev_game, const_ac):
    g = product_profile(const_ac)
    dev = build_profile_deviation_game(ev_game.goals[0], g, 0)
    for (q, s), vid in dev.v0_index.items():
        if q in ev_game.goals[0].accepting:
            assert vid in dev.result.win1


def test_j_query_mp_deviant_violation(mp_game):
    profile = corpus.constant_profile(mp_game, ("a", "c"))
    g = product_profile(profile)
    passed, violation, _ = j_query(mp_game.goals[1], g, 1)
    assert not passed
    assert violation.kind == "deviant-trace"
    assert violation.prefix == ()
    assert len(violation.escape) == 1


def test_j_query_ev_passes(ev_game, const_ac):
    g = product_profile(const_ac)
    passed, violation, _ = j_query(ev_game.goals[1], g, 1)
    assert passed
    assert violation is None


def test_j_query_empty_language_always_passes(ev_game, const_ac):
    goal = ev_game.goals[1]
    hollow = Dfa(goal.alphabet, goal.mask, goal.names, goal.initial, frozenset(), goal.delta)
    g = product_profile(const_ac)
    passed, _, _ = j_query(hollow, g, 1)
    assert passed


def test_j_query_primary_trace_violation(ev_game):
    # constant (b,c) satisfies agent 1's goal on the primary trace itself
    profile = corpus.constant_profile(ev_game, ("b", "c"))
    g = product_profile(profile)
    passed, violation, _ = j_query(ev_game.goals[1], g, 1)
    assert not passed
    assert violation.kind == "primary-trace"
    assert len(violation.prefix) == 1
    assert violation.escape == ()


def replay_escape(game, profile, agent, violation):
    """Mechanical replay: escape letters must match the machines off the
    deviating channel and drive the goal into acceptance."""
    from ibgsolve.automata import Nfa

    goal = query_goal(game.goals[agent])
    machines = profile.machines
    states = [m.initial for m in machines]
    current = {goal.initial}
    for letter in violation.prefix:
        outputs = tuple(m.output[s] for m, s in zip(machines, states))
        assert letter == outputs
        nxt = set()
        for q in current:
            if isinstance(goal, Nfa):
                nxt.update(goal.successors.get((q, project(letter, goal.mask)), ()))
            else:
                nxt.add(goal.delta[q, project(letter, goal.mask)])
        current = nxt
        states = [m.step(s, letter) for m, s in zip(machines, states)]
    accepted = bool(current & goal.accepting)
    for letter in violation.escape:
        outputs = tuple(m.output[s] for m, s in zip(machines, states))
        assert all(letter[c] == outputs[c] for c in range(game.k) if c != agent)
        nxt = set()
        for q in current:
            if isinstance(goal, Nfa):
                nxt.update(goal.successors.get((q, project(letter, goal.mask)), ()))
            else:
                nxt.add(goal.delta[q, project(letter, goal.mask)])
        current = nxt
        states = [m.step(s, letter) for m, s in zip(machines, states)]
        if current & goal.accepting:
            accepted = True
    assert accepted


def test_violations_replay_to_acceptance():
    rng = random.Random(223)
    replayed = {"primary-trace": 0, "deviant-trace": 0}
    for _ in range(300):
        game = corpus.random_game(rng)
        profile = corpus.random_profile(rng, game)
        winners = frozenset(i for i in game.agents if rng.random() < 0.4)
        report = verify(game, winners, profile)
        for j, result in report.loser_results.items():
            if result.violation is not None:
                replay_escape(game, profile, j, result.violation)
                replayed[result.violation.kind] += 1
    assert replayed["primary-trace"] > 10
    assert replayed["deviant-trace"] > 10


# ---------------------------------------------------------------------------
# verify


def test_verify_ev_constant_is_equilibrium_for_0(ev_game, const_ac):
    report = verify(ev_game, frozenset({0}), const_ac)
    assert report.is_equilibrium
    assert report.winner_results[0].passed
    assert report.loser_results[1].passed


def test_verify_ev_constant_not_equilibrium_for_01(ev_game, const_ac):
    report = verify(ev_game, frozenset({0, 1}), const_ac)
    assert not report.is_equilibrium
    assert not report.winner_results[1].passed


def test_verify_empty_winners_empty_goals(alphabet, ev_game):
    hollow = tuple(
        Dfa(g.alphabet, g.mask, g.names, g.initial, frozenset(), g.delta) for g in ev_game.goals
    )
    game = Ibg(alphabet, hollow)
    rng = random.Random(227)
    for _ in range(10):
        profile = corpus.random_profile(rng, game)
        assert verify(game, frozenset(), profile).is_equilibrium


def test_verify_rejects_wrong_profile_shape(ev_game, const_ac):
    with pytest.raises(ValueError):
        verify(ev_game, frozenset({0}), StrategyProfile((const_ac.machines[0],)))


def test_verify_rejects_alphabet_mismatch(ev_game):
    other_game = corpus.random_game(random.Random(229), max_k=2)
    profile = corpus.random_profile(random.Random(229), other_game)
    if other_game.alphabet != ev_game.alphabet:
        with pytest.raises(ValueError):
            verify(ev_game, frozenset(), profile)


def test_report_answer_consistent_with_queries():
    rng = random.Random(233)
    for _ in range(120):
        game = corpus.random_game(rng)
        profile = corpus.random_profile(rng, game)
        winners = frozenset(i for i in game.agents if rng.random() < 0.5)
        report = verify(game, winners, profile)
        expected = all(r.passed for r in report.winner_results.values()) and all(
            r.passed for r in report.loser_results.values()
        )
        assert report.is_equilibrium == expected


def test_verify_agrees_with_oracle():
    rng = random.Random(239)
    for _ in range(250):
        game = corpus.random_game(rng)
        profile = corpus.random_profile(rng, game)
        winners = frozenset(i for i in game.agents if rng.random() < 0.5)
        assert verify(game, winners, profile).is_equilibrium == oracle_verify(
            game, winners, profile
        )


def test_verify_kind_invariant():
    rng = random.Random(241)
    for _ in range(60):
        game = corpus.random_game(rng, kinds="dfa")
        profile = corpus.random_profile(rng, game)
        winners = frozenset(i for i in game.agents if rng.random() < 0.5)
        base = verify(game, winners, profile).is_equilibrium
        nfa_game = Ibg(game.alphabet, tuple(as_nfa(g) for g in game.goals))
        afa_game = Ibg(game.alphabet, tuple(as_afa(g) for g in game.goals))
        assert verify(nfa_game, winners, profile).is_equilibrium == base
        assert verify(afa_game, winners, profile).is_equilibrium == base
