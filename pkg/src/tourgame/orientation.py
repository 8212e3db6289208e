"""The orientation game Or(T_k) and its auxiliary (2:1) game on ordered pairs.

In the auxiliary game the board is every ordered pair ``(u, v)`` of
vertices, Maker claims two elements per round, Breaker one, and the winning
sets are the arc sets of copies of ``T_k``.  A Breaker strategy there becomes
an OBreaker strategy by simulation: every arc of the orientation game is a
Maker element of the auxiliary game, and when Breaker claims ``(x, y)``,
OBreaker directs the edge as ``(y, x)``, which Maker then owns in the
auxiliary game.  Two invariants hold after each of Maker's auxiliary rounds:

(i)  Breaker owns ``(u, v)`` only if Maker owns ``(v, u)``;
(ii) the arc ``u -> v`` exists in the orientation game iff Maker owns ``(u, v)``.
"""

from __future__ import annotations

import itertools
import json
import math

import numpy as np

from .game_core import (
    BREAKER,
    MAKER,
    Board,
    ExplicitFamily,
    GameState,
    MoveRecord,
    Outcome,
    Player,
    Transcript,
    WinningFamily,
    as_move,
)
from .log2real import Log2Real
from .potential import Certificate, ESBreaker
from .tournament import Digraph, Tournament, contains_copy

EXPLICIT_LIMIT = 10**7


class InvariantViolation(AssertionError):
    """The simulation broke invariant (i) or (ii); always a defect, never an outcome."""

    def __init__(self, message: str, trace: list[dict]):
        super().__init__(message + "\n" + dump_dual_trace(trace))
        self.trace = trace


# ---------------------------------------------------------------------------
# Orientation game state
# ---------------------------------------------------------------------------


class OrientationState:
    """Both players direct edges of ``K_n``; OMaker moves first."""

    def __init__(self, n: int, goal: Tournament | None = None, seed: int = 0):
        self.n = n
        self.goal = goal
        self.board = Board.complete_graph(n)
        self.arcs: dict[int, tuple[int, int]] = {}
        self.owner: dict[int, Player] = {}
        self.turn = Player.MAKER
        self.round = 1
        header = {"board": "orientation", "n": n, "seed": seed}
        if goal is not None:
            header.update(k=goal.k, goal=goal.arcs())
        self.history = Transcript(header)

    def edge(self, u: int, v: int) -> int:
        return self.board.element_of(u, v)

    def is_oriented(self, u: int, v: int) -> bool:
        return self.edge(u, v) in self.arcs

    def unoriented(self) -> list[int]:
        return [e for e in range(self.board.size) if e not in self.arcs]

    @property
    def is_over(self) -> bool:
        return len(self.arcs) == self.board.size

    def digraph(self) -> Digraph:
        return Digraph.from_arcs(self.n, self.arcs.values())

    def apply(self, player: Player, arc: tuple[int, int]) -> OrientationState:
        u, v = int(arc[0]), int(arc[1])
        if player is not self.turn:
            raise ValueError(f"it is {self.turn.name}'s turn, not {player.name}'s")
        if u == v or not (0 <= u < self.n and 0 <= v < self.n):
            raise ValueError(f"({u}, {v}) is not an edge of K_{self.n}")
        e = self.edge(u, v)
        if e in self.arcs:
            raise ValueError(f"edge {{{u}, {v}}} is already directed as {self.arcs[e]}")
        self.arcs[e] = (u, v)
        self.owner[e] = player
        self.history.records.append(MoveRecord(self.round, player, (e,), ((u, v),)))
        if player is Player.MAKER:
            self.turn = Player.BREAKER
        else:
            self.turn = Player.MAKER
            self.round += 1
        return self

    def outcome(self) -> Outcome:
        if not self.is_over:
            return Outcome.INCOMPLETE
        if self.goal is None:
            raise ValueError("no goal tournament to judge the game")
        return Outcome.MAKER_WIN if contains_copy(self.digraph(), self.goal) else Outcome.BREAKER_WIN


def or_apply(state: OrientationState, player: Player, arc: tuple[int, int]) -> OrientationState:
    return state.apply(player, arc)


def replay_orientation(transcript: Transcript) -> OrientationState:
    h = transcript.header
    goal = Tournament.from_arcs(h["k"], h["goal"]) if "goal" in h else None
    state = OrientationState(h["n"], goal, h.get("seed", 0))
    for rec in transcript.records:
        if rec.orientation is None:
            raise ValueError("orientation transcripts need an orientation on every record")
        state.apply(rec.player, rec.orientation[0])
    return state


# ---------------------------------------------------------------------------
# Auxiliary game family
# ---------------------------------------------------------------------------


class TournamentCopyFamily(WinningFamily):
    """Arc sets of copies of ``goal`` over the ordered-pairs board, described analytically."""

    def __init__(self, goal: Tournament, n: int):
        self.goal = goal
        self.n = n
        self.uniform_size = goal.k * (goal.k - 1) // 2

    def count(self) -> Log2Real:
        if self.goal.k > self.n:
            return Log2Real.zero()
        if self.goal.k == 1:
            return Log2Real.one()  # every copy has the same (empty) arc set
        labelled = math.perm(self.n, self.goal.k)
        return Log2Real.of(labelled) / self.goal.automorphism_count()

    def count_upper(self) -> Log2Real:
        """The cruder ``n**k``."""
        if self.goal.k > self.n:
            return Log2Real.zero()
        return Log2Real(self.goal.k * math.log2(self.n))

    def __contains__(self, candidate) -> bool:
        board = Board.ordered_pairs(self.n)
        arcs = [board.pairs[e] for e in candidate]
        verts = sorted({v for a in arcs for v in a})
        if len(arcs) != self.uniform_size or len(verts) != self.goal.k:
            return False
        return contains_copy(Digraph.from_arcs(self.n, arcs), self.goal)

    def maker_contains(self, state: GameState) -> bool:
        arcs = [state.board.pairs[e] for e in state.maker_elements()]
        return contains_copy(Digraph.from_arcs(self.n, arcs), self.goal)


def copy_sets(goal: Tournament, n: int, board: Board | None = None):
    board = board or Board.ordered_pairs(n)
    garcs = goal.arcs()
    for phi in itertools.permutations(range(n), goal.k):
        yield frozenset(board.element_of(phi[u], phi[v]) for u, v in garcs)


def build_H_family(
    goal: Tournament, n: int, explicit_limit: int = EXPLICIT_LIMIT, analytic: bool = True
) -> WinningFamily:
    """Copies of ``goal`` as sets of ordered pairs; explicit when ``n**k`` is small.

    Above the limit the family is analytic (counts and containment only), or
    an error when ``analytic`` is off.
    """
    if goal.k > n:
        return ExplicitFamily([])
    if n**goal.k <= explicit_limit:
        return ExplicitFamily(copy_sets(goal, n))
    if not analytic:
        raise ValueError(f"n**k = {n}**{goal.k} exceeds the explicit limit {explicit_limit}")
    return TournamentCopyFamily(goal, n)


def reverse_table(board: Board) -> list[int]:
    return [board.element_of(v, u) for u, v in board.pairs]


def obreaker_certificate(n: int, k: int) -> Certificate:
    """``n**k * 2**(-k(k-1)/4) <= 1/2``: Breaker wins the auxiliary game for every ``T_k``."""
    half = Log2Real.of(0.5)
    if k > n:
        lhs = Log2Real.zero()
    else:
        lhs = Log2Real(k * math.log2(n) - k * (k - 1) / 4)
    return Certificate("obreaker", lhs <= half, lhs, half, {"n": n, "k": k, "a": 2, "b": 1})


# ---------------------------------------------------------------------------
# OBreaker from an auxiliary-game Breaker
# ---------------------------------------------------------------------------


def dump_dual_trace(trace: list[dict]) -> str:
    return "\n".join(json.dumps(step, sort_keys=True) for step in trace)


class WrappedOBreaker:
    """OBreaker strategy simulating the auxiliary (2:1) game alongside Or(goal).

    Maker's auxiliary round is ``{(y, x), (u, v)}``: the reverse of Breaker's
    previous claim (OBreaker's arc) followed by OMaker's new arc.  The reverse
    element is owed from the moment OBreaker plays it and is counted as
    Maker's when the invariants are checked.  ``breaker_core`` is restricted
    to pairs whose edge is still undirected.
    """

    def __init__(self, goal: Tournament, n: int, breaker_core=None, check: bool = True):
        self.goal = goal
        self.n = n
        self.board = Board.ordered_pairs(n)
        self.family = build_H_family(goal, n)
        if not self.family.explicit:
            raise ValueError("the simulated auxiliary game needs an explicit family (small n)")
        self.rev = reverse_table(self.board)
        self.core = breaker_core if breaker_core is not None else ESBreaker(conflicts=self.rev)
        self.check = check
        self.h = GameState(self.board, self.family, 2, 1, play_to_end=True, meta={"k": goal.k})
        self.pending: list[int] = []
        self.trace: list[dict] = []
        self._seen = 0
        self.violations = 0
        self.finished = False

    def _catch_up(self, state: OrientationState) -> None:
        """Feed OMaker arcs recorded since the last call into the auxiliary game."""
        new = state.history.records[self._seen :]
        self._seen = len(state.history.records)
        for rec in new:
            if rec.player is Player.BREAKER:
                continue
            u, v = rec.orientation[0]
            elems = self.pending + [self.board.element_of(u, v)]
            self.h.apply_move(Player.MAKER, elems)
            self.trace.append({"or": ["M", [u, v]], "h_maker": elems})
            self.pending = []

    def __call__(self, state: OrientationState, rng=None) -> tuple[int, int]:
        self._catch_up(state)

        def undirected(e: int) -> bool:
            x, y = self.board.pairs[e]
            return not state.is_oriented(x, y)

        move = as_move(self.core(self.h, rng, candidate_filter=undirected))
        (claim,) = move.elements
        self.h.apply_move(Player.BREAKER, [claim])
        x, y = self.board.pairs[claim]
        self.pending = [self.rev[claim]]
        self.trace.append({"h_breaker": claim, "pair": [x, y], "or": ["B", [y, x]]})
        self._seen += 1  # our own arc is recorded by the driver after we return
        if self.check:
            self._check(state, extra_arc=(y, x))
        return (y, x)

    def finish(self, state: OrientationState) -> None:
        if self.finished:
            return
        self._catch_up(state)
        if self.pending:
            self.h.apply_move(Player.MAKER, self.pending)
            self.trace.append({"h_maker": self.pending})
            self.pending = []
        self.finished = True
        if self.check:
            self._check(state)

    def _check(self, state: OrientationState, extra_arc=None) -> None:
        owner = self.h.owner
        maker = {e for e, o in enumerate(owner) if o == MAKER} | set(self.pending)
        for e, o in enumerate(owner):
            if o == BREAKER and self.rev[e] not in maker:
                self.violations += 1
                raise InvariantViolation(f"(i) broken: Breaker owns {self.board.pairs[e]}", self.trace)
        arcs = {self.board.element_of(u, v) for u, v in state.arcs.values()}
        if extra_arc is not None:
            arcs.add(self.board.element_of(*extra_arc))
        if arcs != maker:
            self.violations += 1
            diff = sorted(self.board.pairs[e] for e in arcs ^ maker)
            raise InvariantViolation(f"(ii) broken on pairs {diff}", self.trace)


def obreaker_from_breaker(goal: Tournament, n: int, breaker_core=None) -> WrappedOBreaker:
    return WrappedOBreaker(goal, n, breaker_core)


# ---------------------------------------------------------------------------
# Playouts
# ---------------------------------------------------------------------------


def random_orienter(state: OrientationState, rng: np.random.Generator) -> tuple[int, int]:
    free = state.unoriented()
    u, v = state.board.pairs[free[int(rng.integers(len(free)))]]
    return (u, v) if rng.integers(2) == 0 else (v, u)


def play_orientation(
    n: int,
    goal: Tournament,
    omaker,
    obreaker,
    seed: int = 0,
) -> OrientationState:
    """Play Or(goal, n) to the end; finish hooks run before the outcome is recorded."""
    rng = np.random.default_rng(seed & 0xFFFFFFFFFFFFFFFF)
    state = OrientationState(n, goal, seed)
    while not state.is_over:
        strat = omaker if state.turn is Player.MAKER else obreaker
        state.apply(state.turn, strat(state, rng))
    for strat in (omaker, obreaker):
        finish = getattr(strat, "finish", None)
        if finish is not None:
            finish(state)
    state.history.outcome = state.outcome()
    return state
