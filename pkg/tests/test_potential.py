import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tourgame.bounds import T_F
from tourgame.game_core import Board, ExplicitFamily, Player, UnsupportedOperation, WinningFamily, new_game
from tourgame.log2real import Log2Real
from tourgame.orientation import TournamentCopyFamily
from tourgame.potential import (
    AliveSetView,
    ESBreaker,
    NoCandidate,
    awwc_check,
    es_breaker_move,
    es_criterion,
    maker_potential_move,
    potential_T,
)
from tourgame.tournament import Tournament, implicit_transversal_clique_family, Partition


def view_of(sets, size, maker=(), breaker=()):
    state = new_game(Board.abstract(size), ExplicitFamily(sets))
    for e in maker:
        state._claim(e, 1)
    for e in breaker:
        state._claim(e, 2)
    return AliveSetView.of(state)


def test_potential_examples():
    assert float(potential_T([[0, 1, 2], [1, 2, 3], [2, 3, 4], [0, 3, 4]])) == pytest.approx(0.5)
    assert potential_T([]).is_zero
    family = implicit_transversal_clique_family(Partition.balanced(192, 3))
    assert potential_T(family).log2 == pytest.approx(15.0, abs=1e-12)
    assert potential_T(family).isclose(T_F(192, 3))


def test_potential_needs_analytic_count():
    class Opaque(WinningFamily):
        pass

    with pytest.raises(UnsupportedOperation):
        potential_T(Opaque())


@given(st.lists(st.frozensets(st.integers(0, 30), max_size=12), max_size=40))
def test_potential_matches_exact_fraction(sets):
    exact = sum((Fraction(1, 2 ** len(s)) for s in set(sets)), Fraction(0))
    got = potential_T(ExplicitFamily(sets))
    if exact == 0:
        assert got.is_zero
    else:
        assert got.isclose(Log2Real.of(exact), 1e-9)


def test_es_criterion_examples():
    four = [[0, 1, 2], [3, 4, 5], [6, 7, 8], [9, 10, 11]]
    cert = es_criterion(four, 1, 1)
    assert float(cert.lhs) == pytest.approx(0.5) and not cert.verdict
    cert = es_criterion(four[:3], 1, 1)
    assert float(cert.lhs) == pytest.approx(0.375) and cert.verdict
    h = TournamentCopyFamily(Tournament.transitive(34), 256)
    cert = es_criterion(h, 2, 1, use_upper_bound=True)
    assert cert.lhs.log2 == pytest.approx(272 - 280.5, abs=1e-9)
    assert cert.verdict


@given(st.lists(st.frozensets(st.integers(0, 15), min_size=1, max_size=8), max_size=20), st.integers(1, 3), st.integers(1, 3))
def test_es_sum_matches_float_sum(sets, a, b):
    uniq = set(sets)
    expected = sum((1 + b) ** (-len(s) / a) for s in uniq)
    got = es_criterion(list(uniq), a, b)
    assert float(got.lhs) == pytest.approx(expected, rel=1e-9)
    assert got.verdict == (expected < 1 / (1 + b) and not math.isclose(expected, 1 / (1 + b), rel_tol=1e-12))


def test_es_breaker_move_examples():
    view = view_of([[0, 1], [2, 3]], 4, maker=[0])
    assert es_breaker_move(view, 1, 1) == 1
    assert es_breaker_move(view, 1, 1, lambda e: e != 1) == 2
    dead = view_of([[0, 1], [2, 3]], 5, breaker=[0, 2])
    assert es_breaker_move(dead, 1, 1) == 1
    with pytest.raises(NoCandidate):
        es_breaker_move(view, 1, 1, lambda e: False)


def test_maker_potential_move_examples():
    assert maker_potential_move(view_of([[0, 1]], 2)) == 0
    assert maker_potential_move(view_of([[0, 1], [0, 2], [3, 4]], 5)) == 0
    assert maker_potential_move(view_of([[0, 1], [2, 3]], 5, breaker=[0, 3])) == 1


def test_conflict_refinement_kills_sets():
    state = new_game(Board.ordered_pairs(3), ExplicitFamily([[0, 2]]), 2, 1)
    board = state.board
    rev = [board.element_of(v, u) for u, v in board.pairs]
    state._claim(rev[0], 1)
    view = AliveSetView.of(state, conflicts=rev)
    assert view.dead_count() == 1


@given(st.lists(st.frozensets(st.integers(0, 11), min_size=1, max_size=5), min_size=1, max_size=12), st.integers(0, 2**32))
def test_view_bookkeeping_and_es_never_revives(sets, seed):
    size = 12
    family = ExplicitFamily(sets)
    state = new_game(Board.abstract(size), family, 1, 1)
    rng = np.random.default_rng(seed)
    breaker = ESBreaker()
    dead = 0
    while not state.is_over:
        if state.turn is Player.MAKER:
            free = state.unclaimed_elements()
            state.apply_move(Player.MAKER, [free[int(rng.integers(len(free)))]])
        else:
            state.apply_move(Player.BREAKER, breaker(state))
        view = AliveSetView.of(state)
        mk, br = state.maker_elements(), state.breaker_elements()
        for i, s in enumerate(view.sets):
            assert view.dead[i] == bool(set(s) & br)
            assert view.needs[i] == len(s) - len(set(s) & mk)
        assert view.dead_count() >= dead
        dead = view.dead_count()


def test_awwc_examples():
    T = T_F(192, 3)
    cert = awwc_check(12288, T, 4, Log2Real.of(27) * T)
    assert float(cert.lhs) == pytest.approx(2**15 / 12288)
    assert not cert.verdict and float(cert.rhs) >= 4
    assert awwc_check(1, Log2Real.of(10), 4, Log2Real.zero()).verdict
    with pytest.raises(ValueError):
        awwc_check(1, Log2Real.of(10), 1, Log2Real.zero())


@given(st.floats(-50, 50), st.floats(-50, 50), st.floats(0, 30), st.integers(2, 6))
def test_awwc_monotone_in_cluster_bound(t_f, c1, bump, p):
    small = awwc_check(1, Log2Real(t_f), p, Log2Real(c1))
    large = awwc_check(1, Log2Real(t_f), p, Log2Real(c1 + bump))
    assert not (large.verdict and not small.verdict)


@given(st.lists(st.frozensets(st.integers(0, 20), max_size=10), max_size=30))
def test_exact_mode_agrees(sets):
    from tourgame.potential import potential_exact

    exact = potential_exact(ExplicitFamily(sets))
    approx = potential_T(ExplicitFamily(sets))
    assert (exact == 0 and approx.is_zero) or approx.isclose(Log2Real.of(exact), 1e-9)
