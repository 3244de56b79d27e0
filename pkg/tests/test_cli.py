import json
import re

from ibgsolve import verify
from ibgsolve.cli import main
from ibgsolve.formats import load_automaton_file, load_profile

import corpus


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def record_of(out):
    body = out[out.index("{"):]
    return json.loads(body)


def strip_wall_time(out):
    return re.sub(r'"wall_time_s": [0-9.e-]+', '"wall_time_s": X', out)


def test_realizable_mp_empty_winners(capsys, games_dir):
    code, out, _ = run_cli(capsys, "realizable", str(games_dir / "mp.json"), "--winners", "")
    assert code == 1
    assert out.startswith("UNREALIZABLE")
    assert record_of(out)["verdict"] == "UNREALIZABLE"


def test_realizable_ev_writes_verifying_witness(capsys, games_dir, tmp_path, ev_game):
    witness_path = tmp_path / "witness.json"
    code, out, _ = run_cli(
        capsys, "realizable", str(games_dir / "ev.json"),
        "--winners", "0", "--witness", str(witness_path),
    )
    assert code == 0
    assert out.startswith("REALIZABLE")
    with open(witness_path) as fh:
        profile = load_profile(json.load(fh), ev_game.alphabet)
    assert verify(ev_game, frozenset({0}), profile).is_equilibrium


def test_realizable_bad_winner_exits_2(capsys, games_dir):
    code, _, err = run_cli(capsys, "realizable", str(games_dir / "ev.json"), "--winners", "7")
    assert code == 2
    assert "7" in err


def test_realizable_malformed_game_exits_2(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"version": "ibg-game-1", "agents": [], "junk": 1}')
    code, _, err = run_cli(capsys, "realizable", str(bad), "--winners", "")
    assert code == 2
    assert "junk" in err


def test_realizable_stats_include_goal_sizes(capsys, games_dir):
    code, out, _ = run_cli(
        capsys, "realizable", str(games_dir / "ev.json"), "--winners", "0", "--stats"
    )
    assert code == 0
    stats = record_of(out)["stats"]
    assert stats["goal_dfa_states"] == [2, 2]
    assert "deviation_arena_sizes" in stats
    assert stats["product_states"] > 0


def test_realizable_dump_arenas(capsys, games_dir, tmp_path):
    dump = tmp_path / "arenas.txt"
    code, _, _ = run_cli(
        capsys, "realizable", str(games_dir / "ev.json"),
        "--winners", "0", "--dump-arenas", str(dump),
    )
    assert code == 0
    text = dump.read_text()
    assert "# deviation game, agent 1" in text
    assert re.search(r"^edge \d+ \d+$", text, re.M)


def test_verify_ev_constant(capsys, games_dir):
    code, out, _ = run_cli(
        capsys, "verify", str(games_dir / "ev.json"), str(games_dir / "ev_profile_ac.json"),
        "--winners", "0",
    )
    assert code == 0
    assert out.startswith("IS-W-NE")
    record = record_of(out)
    assert record["queries"]["0"]["passed"] is True
    assert record["queries"]["1"]["passed"] is True


def test_verify_failure_reports_query(capsys, games_dir):
    code, out, _ = run_cli(
        capsys, "verify", str(games_dir / "ev.json"), str(games_dir / "ev_profile_ac.json"),
        "--winners", "0,1",
    )
    assert code == 1
    record = record_of(out)
    assert record["verdict"] == "NOT-W-NE"
    assert record["queries"]["1"]["passed"] is False


def test_verify_explain_includes_paths(capsys, games_dir):
    code, out, _ = run_cli(
        capsys, "verify", str(games_dir / "mp.json"), str(games_dir / "ev_profile_ac.json"),
        "--winners", "0", "--explain",
    )
    assert code == 1
    record = record_of(out)
    entry = record["queries"]["1"]
    assert entry["violation"] == "deviant-trace"
    assert entry["escape"] == [["a", "d"]]


def test_verify_wrong_profile_exits_2(capsys, games_dir, tmp_path):
    bad = tmp_path / "profile.json"
    bad.write_text('{"version": "ibg-profile-1", "machines": []}')
    code, _, err = run_cli(
        capsys, "verify", str(games_dir / "ev.json"), str(bad), "--winners", "0"
    )
    assert code == 2
    assert "machines" in err


def test_determinism_modulo_wall_time(capsys, games_dir):
    _, out1, _ = run_cli(capsys, "realizable", str(games_dir / "ev.json"), "--winners", "0", "--stats")
    _, out2, _ = run_cli(capsys, "realizable", str(games_dir / "ev.json"), "--winners", "0", "--stats")
    assert strip_wall_time(out1) == strip_wall_time(out2)


def test_convert_determinize(capsys, tmp_path, alphabet):
    from ibgsolve.formats import dump_json, save_automaton_file

    nfa = corpus.nth_from_end_nfa(alphabet, 3)
    src = tmp_path / "in.json"
    dst = tmp_path / "out.json"
    src.write_text(dump_json(save_automaton_file(nfa)))
    code, out, _ = run_cli(capsys, "convert", "--determinize", str(src), str(dst))
    assert code == 0
    _, dfa = load_automaton_file(json.loads(dst.read_text()))
    assert dfa.n_states == 4  # 2^(3-1) reachable subsets
    code2, _, _ = run_cli(capsys, "convert", "--determinize", str(dst), str(tmp_path / "x.json"))
    assert code2 == 2  # determinize expects an nfa


def test_convert_afa2nfa(capsys, tmp_path, ev_game):
    from ibgsolve import as_afa
    from ibgsolve.formats import dump_json, save_automaton_file

    src = tmp_path / "in.json"
    dst = tmp_path / "out.json"
    src.write_text(dump_json(save_automaton_file(as_afa(ev_game.goals[0]))))
    code, _, _ = run_cli(capsys, "convert", "--afa2nfa", str(src), str(dst))
    assert code == 0
    _, nfa = load_automaton_file(json.loads(dst.read_text()))
    assert nfa.n_states <= ev_game.goals[0].n_states + 1


def test_convert_ltlf2afa(capsys, tmp_path):
    src = tmp_path / "alphabet.json"
    dst = tmp_path / "out.json"
    src.write_text(json.dumps({
        "version": "ibg-automaton-1",
        "channels": [["a", "b"], ["c", "d"]],
    }))
    code, out, _ = run_cli(capsys, "convert", "--ltlf2afa", "F(p0=a & p1=c)", str(src), str(dst))
    assert code == 0
    _, afa = load_automaton_file(json.loads(dst.read_text()))
    assert afa.n_states <= 4


def test_convert_round_trip_stability(capsys, tmp_path, alphabet):
    from ibgsolve.formats import dump_json, save_automaton_file

    nfa = corpus.nth_from_end_nfa(alphabet, 2)
    src = tmp_path / "in.json"
    mid = tmp_path / "mid.json"
    src.write_text(dump_json(save_automaton_file(nfa)))
    run_cli(capsys, "convert", "--determinize", str(src), str(mid))
    first = mid.read_text()
    run_cli(capsys, "convert", "--determinize", str(src), str(mid))
    assert mid.read_text() == first


def test_oracle_verify_cli(capsys, games_dir):
    code, out, _ = run_cli(
        capsys, "oracle", "verify", str(games_dir / "ev.json"),
        str(games_dir / "ev_profile_ac.json"), "--winners", "0",
    )
    assert code == 0
    assert record_of(out)["verdict"] == "IS-W-NE"


def test_oracle_verify_cli_overflow(capsys, games_dir):
    code, out, _ = run_cli(
        capsys, "oracle", "verify", str(games_dir / "ev.json"),
        str(games_dir / "ev_profile_ac.json"), "--winners", "0", "--budget", "1",
    )
    assert code == 2
    assert record_of(out)["verdict"] == "ORACLE-OVERFLOW"


def test_oracle_onesided_cli(capsys, games_dir):
    code, out, _ = run_cli(
        capsys, "oracle", "realizable-onesided", str(games_dir / "mp.json"),
        "--winners", "0,1",
    )
    assert code == 1
    assert record_of(out)["verdict"] == "UNKNOWN"
    code, out, _ = run_cli(
        capsys, "oracle", "realizable-onesided", str(games_dir / "ev.json"),
        "--winners", "0",
    )
    assert code == 0
    record = record_of(out)
    assert record["verdict"] == "FOUND-WITNESS"
    assert "witness" in record
