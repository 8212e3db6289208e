import json
from importlib import resources

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import naive_mb_winner, naive_orientation_winner

from tourgame.game_core import Board, ExplicitFamily, Outcome, Player, new_game, play_out
from tourgame.orientation import OrientationState, play_orientation
from tourgame.potential import MakerPotential, es_criterion
from tourgame.solver import (
    GOLDEN_MB,
    GOLDEN_OR,
    MBSolver,
    OrientationSolver,
    SolverRefusal,
    golden_values,
    mb_descriptor,
    optimal_adversary,
    solve_mb,
    solve_orientation,
)
from tourgame.tournament import Tournament


def game(size, sets, a=1, b=1):
    return new_game(Board.abstract(size), ExplicitFamily(sets), a, b)


def test_examples():
    assert solve_mb(game(3, [[0]])).winner is Outcome.MAKER_WIN
    for size in (2, 3, 6):
        assert solve_mb(game(size, [[0, 1]])).winner is Outcome.BREAKER_WIN
    res = solve_mb(game(3, [[0, 1], [0, 2]]))
    assert res.winner is Outcome.MAKER_WIN and res.move.elements == (0,)


def test_refusal_above_limit():
    with pytest.raises(SolverRefusal):
        solve_mb(game(25, [[0, 1]]))
    assert solve_mb(game(25, [[0, 1]]), limit=30).winner is Outcome.BREAKER_WIN
    with pytest.raises(SolverRefusal):
        solve_mb(game(11, [[0, 1]]), allow_underclaim=True)
    with pytest.raises(SolverRefusal):
        solve_orientation(OrientationState(7, Tournament.cyclic3()))


def test_golden_file_matches_fresh_solutions():
    stored = json.loads(resources.files("tourgame").joinpath("data/golden.json").read_text())
    assert stored == golden_values()


@pytest.mark.parametrize("size,a,b,sets", GOLDEN_MB)
def test_golden_mb_against_naive(size, a, b, sets):
    stored = json.loads(resources.files("tourgame").joinpath("data/golden.json").read_text())
    naive = naive_mb_winner(size, sets, a, b)
    assert stored[mb_descriptor(size, a, b, sets)] == ("MakerWin" if naive else "BreakerWin")


@pytest.mark.parametrize("n,goal", [g for g in GOLDEN_OR if g[0] <= 4])
def test_golden_orientation_against_naive(n, goal):
    stored = json.loads(resources.files("tourgame").joinpath("data/golden.json").read_text())
    naive = naive_orientation_winner(n, Tournament.named(goal))
    assert stored[f"or:n={n};goal={goal}"] == ("MakerWin" if naive else "BreakerWin")


small_games = st.integers(2, 8).flatmap(
    lambda size: st.tuples(
        st.just(size),
        st.lists(st.frozensets(st.integers(0, size - 1), min_size=1, max_size=4), max_size=6),
        st.integers(1, 2),
        st.integers(1, 2),
    )
)


@given(small_games)
def test_solver_modes_agree_with_naive(params):
    size, sets, a, b = params
    expected = naive_mb_winner(size, sets, a, b)
    for canonical in (True, False):
        res = solve_mb(game(size, sets, a, b), canonical=canonical)
        assert res.maker_wins == expected


@given(small_games)
def test_underclaiming_never_changes_the_value(params):
    size, sets, a, b = params
    full = solve_mb(game(size, sets, a, b)).maker_wins
    under = solve_mb(game(size, sets, a, b), allow_underclaim=True).maker_wins
    assert full == under == naive_mb_winner(size, sets, a, b, underclaim=True)


@given(small_games, st.integers(0, 2**32))
def test_relabelling_invariance(params, seed):
    size, sets, a, b = params
    perm = np.random.default_rng(seed).permutation(size).tolist()
    relabelled = [frozenset(perm[e] for e in s) for s in sets]
    first = solve_mb(game(size, sets, a, b))
    again = solve_mb(game(size, relabelled, a, b))
    assert first.winner is again.winner
    assert solve_mb(game(size, sets, a, b)).nodes == first.nodes


@given(small_games)
def test_es_criterion_implies_breaker_win(params):
    size, sets, a, b = params
    if es_criterion(sets, a, b).verdict:
        assert solve_mb(game(size, sets, a, b)).winner is Outcome.BREAKER_WIN


def test_mid_game_positions():
    # {0,1} is dead after Breaker takes 1; Breaker then answers on {2,3}
    state = game(5, [[0, 1], [2, 3]])
    state.apply_move(Player.MAKER, [0]).apply_move(Player.BREAKER, [1])
    assert solve_mb(state).winner is Outcome.BREAKER_WIN
    assert solve_mb(state, canonical=False).winner is Outcome.BREAKER_WIN

    state = game(5, [[0, 1], [0, 2], [3, 4]])
    state.apply_move(Player.MAKER, [0]).apply_move(Player.BREAKER, [3])
    res = solve_mb(state)
    assert res.winner is Outcome.MAKER_WIN and res.move.elements in ((1,), (2,))


def test_optimal_adversaries_reproduce_the_value():
    for size, a, b, sets in GOLDEN_MB:
        fam = ExplicitFamily(sets)
        solver = MBSolver(fam, a, b)
        expected = solver.solve(new_game(Board.abstract(size), fam, a, b)).winner
        t = play_out(new_game(Board.abstract(size), fam, a, b), optimal_adversary(solver), optimal_adversary(solver))
        assert t.outcome is expected


def test_potential_maker_still_wins_two_sets():
    fam = ExplicitFamily([[0, 1], [0, 2]])
    breaker = optimal_adversary(MBSolver(fam), randomize=True)
    for seed in range(10):
        t = play_out(new_game(Board.abstract(3), fam), MakerPotential(), breaker, seed=seed)
        assert t.outcome is Outcome.MAKER_WIN


def test_orientation_examples():
    assert solve_orientation(OrientationState(2, Tournament.transitive(2))).winner is Outcome.MAKER_WIN
    assert solve_orientation(OrientationState(3, Tournament.transitive(4))).winner is Outcome.BREAKER_WIN
    res = solve_orientation(OrientationState(3, Tournament.cyclic3()))
    assert res.winner is Outcome.BREAKER_WIN


@pytest.mark.parametrize("goal", [Tournament.cyclic3(), Tournament.transitive(3)])
def test_orientation_against_naive_mid_game(goal):
    rng = np.random.default_rng(0)
    solver = OrientationSolver(goal, 4)
    for _ in range(5):
        s = OrientationState(4, goal)
        for _ in range(int(rng.integers(0, 4))):
            free = s.unoriented()
            u, v = s.board.pairs[free[int(rng.integers(len(free)))]]
            s.apply(s.turn, (u, v) if rng.integers(2) else (v, u))
        assert solver.solve(s).maker_wins == naive_from(s, goal)


def naive_from(s, goal):
    import itertools
    from functools import lru_cache

    from tourgame.tournament import Digraph, naive_contains_copy

    edges = list(itertools.combinations(range(s.n), 2))

    @lru_cache(maxsize=None)
    def value(arcs: frozenset, maker_turn: bool) -> bool:
        done = {tuple(sorted(a)) for a in arcs}
        free = [e for e in edges if e not in done]
        if not free:
            return naive_contains_copy(Digraph.from_arcs(s.n, sorted(arcs)), goal)
        kids = (value(arcs | {arc}, not maker_turn) for u, v in free for arc in ((u, v), (v, u)))
        return any(kids) if maker_turn else all(kids)

    return value(frozenset(s.arcs.values()), s.turn is Player.MAKER)


def test_orientation_adversaries_reproduce_the_value():
    for n, name in GOLDEN_OR:
        goal = Tournament.named(name)
        solver = OrientationSolver(goal, n)
        expected = solver.solve(OrientationState(n, goal)).winner
        s = play_orientation(n, goal, optimal_adversary(solver), optimal_adversary(solver), seed=1)
        assert s.history.outcome is expected


def test_solve_result_record():
    rec = solve_mb(game(3, [[0, 1], [0, 2]])).to_record()
    assert rec["winner"] == "MakerWin" and rec["move"] == [0] and rec["nodes"] > 0
