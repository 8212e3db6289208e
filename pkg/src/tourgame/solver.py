"""Exact minimax for tiny Maker-Breaker and orientation games.

Both solvers search element by element: a round of ``a`` claims is ``a``
consecutive plies by the same player, with a within-round counter in the
position.  Positions are stored in a transposition table that lives as long
as the solver object, so repeated queries along one game are cheap.

Keys come in two flavours.  ``canonical=True`` (default) keys a position by
what still matters: the remaining needs of every live winning set with
supersets dropped, the number of unclaimed elements that lie in no live set,
the player to move and the within-round counter.  Two positions with the same
reduced key have the same value.  ``canonical=False`` keys by the raw
ownership vectors and searches every element individually; it exists to
cross-check the reduced search.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .game_core import BREAKER, MAKER, GameState, Move, Outcome, Player
from .orientation import OrientationState
from .tournament import Tournament

MB_LIMIT = 24
ORIENTATION_LIMIT = 15
UNDERCLAIM_LIMIT = 10


class SolverRefusal(RuntimeError):
    """The instance is larger than the configured limit."""


@dataclass
class SolveResult:
    winner: Outcome
    move: Move | tuple[int, int] | None
    nodes: int
    hits: int
    stores: int

    @property
    def maker_wins(self) -> bool:
        return self.winner is Outcome.MAKER_WIN

    def to_record(self) -> dict:
        move = self.move
        if isinstance(move, Move):
            move = list(move.elements)
        elif move is not None:
            move = list(move)
        return {
            "type": "solve",
            "winner": self.winner.value,
            "move": move,
            "nodes": self.nodes,
            "hits": self.hits,
            "stores": self.stores,
        }


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _minimal(masks) -> tuple[int, ...]:
    """Drop duplicates and proper supersets; sorted for a stable key."""
    out: list[int] = []
    for m in sorted(set(masks), key=lambda x: (x.bit_count(), x)):
        if not any(o & m == o for o in out):
            out.append(m)
    return tuple(sorted(out))


# ---------------------------------------------------------------------------
# Maker-Breaker
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _MBPos:
    sets: tuple[int, ...]  # remaining needs of live sets
    free: int  # unclaimed elements tracked individually
    dummies: int  # unclaimed elements tracked only by count
    turn: Player
    done: int  # claims already made this round
    maker: int = 0  # ownership masks, raw mode only
    breaker: int = 0

    @property
    def unclaimed(self) -> int:
        return self.free.bit_count() + self.dummies


class MBSolver:
    """Exact solver for one explicit family and bias.

    By default Maker claims exactly ``min(a, free)`` elements per round.
    ``allow_underclaim=True`` also lets her stop early (including claiming
    nothing); it is only accepted on boards of at most ``UNDERCLAIM_LIMIT``
    unclaimed elements.
    """

    def __init__(
        self,
        family,
        a: int = 1,
        b: int = 1,
        limit: int = MB_LIMIT,
        allow_underclaim: bool = False,
        canonical: bool = True,
    ):
        self.masks = tuple(sum(1 << e for e in s) for s in family.sets())
        self.a, self.b = a, b
        self.limit = limit
        self.allow_underclaim = allow_underclaim
        self.canonical = canonical
        self.table: dict = {}
        self.nodes = self.hits = 0

    # -- positions -----------------------------------------------------------
    def root(self, state: GameState) -> _MBPos:
        maker = breaker = free = 0
        for e, o in enumerate(state.owner):
            if o == MAKER:
                maker |= 1 << e
            elif o == BREAKER:
                breaker |= 1 << e
            else:
                free |= 1 << e
        if free.bit_count() > self.limit:
            raise SolverRefusal(f"{free.bit_count()} unclaimed elements exceed the limit {self.limit}")
        if self.allow_underclaim and free.bit_count() > UNDERCLAIM_LIMIT:
            raise SolverRefusal(f"underclaim search is limited to {UNDERCLAIM_LIMIT} unclaimed elements")
        sets = [m & ~maker for m in self.masks if not m & breaker]
        return self._make(sets, free, 0, state.turn, 0, maker, breaker)

    def _make(self, sets, free, dummies, turn, done, maker, breaker) -> _MBPos:
        if not self.canonical:
            return _MBPos(tuple(sorted(set(sets))), free, 0, turn, done, maker, breaker)
        sets = _minimal(sets)
        relevant = 0
        for m in sets:
            relevant |= m
        dummies += (free & ~relevant).bit_count()
        return _MBPos(sets, relevant, dummies, turn, done)

    def _key(self, pos: _MBPos):
        if self.canonical:
            return (pos.sets, pos.dummies, pos.turn, pos.done)
        return (pos.maker, pos.breaker, pos.turn, pos.done)

    def _quota(self, pos: _MBPos) -> int:
        return self.a if pos.turn is Player.MAKER else self.b

    def _child(self, pos: _MBPos, e: int | None) -> _MBPos:
        """Claim ``e`` (``None`` claims a dummy); ``e == -1`` ends Maker's round early."""
        if e == -1:
            return _MBPos(pos.sets, pos.free, pos.dummies, Player.BREAKER, 0, pos.maker, pos.breaker)
        free, dummies = pos.free, pos.dummies
        bit = 0
        if e is None:
            dummies -= 1
        else:
            bit = 1 << e
            free &= ~bit
        if pos.turn is Player.MAKER:
            sets = [m & ~bit for m in pos.sets]
            maker, breaker = pos.maker | bit, pos.breaker
        else:
            sets = [m for m in pos.sets if not m & bit]
            maker, breaker = pos.maker, pos.breaker | bit
        done = pos.done + 1
        turn = pos.turn
        if done == self._quota(pos) or (free.bit_count() + dummies) == 0:
            turn, done = turn.other, 0
        return self._make(sets, free, dummies, turn, done, maker, breaker)

    def moves(self, pos: _MBPos) -> list:
        out: list = list(_bits(pos.free))
        if pos.dummies:
            out.append(None)
        if pos.turn is Player.MAKER and self.allow_underclaim:
            out.append(-1)
        return out

    # -- search --------------------------------------------------------------
    def _terminal(self, pos: _MBPos) -> bool | None:
        if any(m == 0 for m in pos.sets):
            return True
        if not pos.sets or pos.unclaimed == 0:
            return False
        if pos.turn is Player.MAKER:
            # a live set needing no more than the rest of her round is hers
            room = min(self.a - pos.done, pos.unclaimed)
            if any(m.bit_count() <= room for m in pos.sets):
                return True
        return None

    def maker_wins(self, pos: _MBPos) -> bool:
        self.nodes += 1
        t = self._terminal(pos)
        if t is not None:
            return t
        key = self._key(pos)
        hit = self.table.get(key)
        if hit is not None:
            self.hits += 1
            return hit
        if pos.turn is Player.MAKER:
            value = any(self.maker_wins(self._child(pos, e)) for e in self.moves(pos))
        else:
            value = all(self.maker_wins(self._child(pos, e)) for e in self.moves(pos))
        self.table[key] = value
        return value

    def _pick(self, pos: _MBPos, rng=None):
        """A value-preserving element for the player to move (random among them with ``rng``)."""
        want = pos.turn is Player.MAKER
        moves = self.moves(pos)
        good = [e for e in moves if self.maker_wins(self._child(pos, e)) == want]
        pool = good or moves
        if rng is None:
            return pool[0]
        return pool[int(rng.integers(len(pool)))]

    def principal_round(self, state: GameState, rng=None) -> Move:
        """One full round for the player to move, built ply by ply."""
        pos = self.root(state)
        player = pos.turn
        remaining = sorted(state.unclaimed_elements())
        quota = min(self.a if player is Player.MAKER else self.b, len(remaining))
        picks: list[int] = []
        while len(picks) < quota and pos.turn is player:
            t = self._terminal(pos)
            if t is None:
                e = self._pick(pos, rng)
                if e == -1:
                    break
            elif t and player is Player.MAKER and pos.sets:
                need = min(pos.sets, key=lambda m: (m.bit_count(), m))
                e = next(_bits(need)) if need else None
            else:
                e = None
            if e is None:
                e = next(x for x in remaining if x not in picks and not (pos.free >> x) & 1) \
                    if pos.dummies else next(x for x in remaining if x not in picks)
            picks.append(e)
            pos = self._child(pos, e if (pos.free >> e) & 1 else None)
        return Move(tuple(picks))

    def solve(self, state: GameState) -> SolveResult:
        if state.maker_wins():
            return SolveResult(Outcome.MAKER_WIN, None, 0, 0, len(self.table))
        if state.unclaimed == 0:
            return SolveResult(Outcome.BREAKER_WIN, None, 0, 0, len(self.table))
        nodes0, hits0 = self.nodes, self.hits
        pos = self.root(state)
        won = self.maker_wins(pos)
        move = self.principal_round(state)
        winner = Outcome.MAKER_WIN if won else Outcome.BREAKER_WIN
        return SolveResult(winner, move, self.nodes - nodes0, self.hits - hits0, len(self.table))


def solve_mb(state: GameState, limit: int = MB_LIMIT, allow_underclaim: bool = False, canonical: bool = True) -> SolveResult:
    solver = MBSolver(state.family, state.a, state.b, limit, allow_underclaim, canonical)
    return solver.solve(state)


# ---------------------------------------------------------------------------
# Orientation game
# ---------------------------------------------------------------------------


class OrientationSolver:
    """Exact solver for Or(goal) on ``K_n``.

    Element ``2e + d`` means edge ``e = {i < j}`` directed ``i -> j`` (d=0) or
    ``j -> i`` (d=1).  A copy of the goal is a set of such elements; orienting
    an edge the other way kills every copy that needed it.  Who orients an edge
    does not matter for the final digraph.
    """

    def __init__(self, goal: Tournament, n: int, limit: int = ORIENTATION_LIMIT):
        self.goal = goal
        self.n = n
        self.limit = limit
        self.pairs = list(itertools.combinations(range(n), 2))
        index = {p: e for e, p in enumerate(self.pairs)}
        copies = set()
        if goal.k <= n:
            garcs = goal.arcs()
            for phi in itertools.permutations(range(n), goal.k):
                mask = 0
                for u, v in garcs:
                    x, y = phi[u], phi[v]
                    mask |= 1 << (2 * index[(min(x, y), max(x, y))] + (x > y))
                copies.add(mask)
        self.copies = tuple(sorted(copies))
        self.table: dict = {}
        self.nodes = self.hits = 0

    def root(self, state: OrientationState):
        if state.n != self.n:
            raise ValueError(f"solver built for n={self.n}, state has n={state.n}")
        free = len(self.pairs) - len(state.arcs)
        if free > self.limit:
            raise SolverRefusal(f"{free} undirected edges exceed the limit {self.limit}")
        taken = 0
        for e, (u, v) in state.arcs.items():
            taken |= 1 << (2 * e + (u > v))
        sets = [m & ~taken for m in self.copies if not any(taken >> (x ^ 1) & 1 for x in _bits(m))]
        return self._make(sets, free, state.turn)

    @staticmethod
    def _make(sets, free_edges: int, turn: Player):
        """``(live copies, undirected edges outside them, turn)``."""
        sets = _minimal(sets)
        return (sets, free_edges - _edge_mask(sets).bit_count(), turn)

    def moves(self, pos) -> list:
        sets, dummies, _ = pos
        out: list = []
        for e in _bits(_edge_mask(sets)):
            out += [2 * e, 2 * e + 1]
        if dummies:
            out.append(None)
        return out

    def _child(self, pos, x):
        sets, dummies, turn = pos
        if x is None:
            return (sets, dummies - 1, turn.other)
        bit, other = 1 << x, 1 << (x ^ 1)
        new = [m & ~bit for m in sets if not m & other]
        free = dummies + _edge_mask(sets).bit_count() - 1
        return self._make(new, free, turn.other)

    def maker_wins(self, pos) -> bool:
        self.nodes += 1
        sets, dummies, turn = pos
        if any(m == 0 for m in sets):
            return True
        if not sets:
            return False
        if turn is Player.MAKER and any(m.bit_count() == 1 for m in sets):
            return True
        hit = self.table.get(pos)
        if hit is not None:
            self.hits += 1
            return hit
        kids = (self.maker_wins(self._child(pos, x)) for x in self.moves(pos))
        value = any(kids) if turn is Player.MAKER else all(kids)
        self.table[pos] = value
        return value

    def _pick(self, pos, rng=None):
        want = pos[2] is Player.MAKER
        moves = self.moves(pos)
        good = [x for x in moves if self.maker_wins(self._child(pos, x)) == want]
        pool = good or moves
        if rng is None:
            return pool[0]
        return pool[int(rng.integers(len(pool)))]

    def principal_arc(self, state: OrientationState, rng=None) -> tuple[int, int]:
        pos = self.root(state)
        x = self._pick(pos, rng)
        if x is None:
            # any undirected edge outside every live copy
            live = _edge_mask(pos[0])
            for e in state.unoriented():
                if not (live >> e) & 1:
                    return self.pairs[e]
            raise AssertionError("dummy move without a dummy edge")
        i, j = self.pairs[x >> 1]
        return (j, i) if x & 1 else (i, j)

    def solve(self, state: OrientationState) -> SolveResult:
        nodes0, hits0 = self.nodes, self.hits
        pos = self.root(state)
        won = self.maker_wins(pos)
        move = self.principal_arc(state) if not state.is_over else None
        winner = Outcome.MAKER_WIN if won else Outcome.BREAKER_WIN
        return SolveResult(winner, move, self.nodes - nodes0, self.hits - hits0, len(self.table))


def _edge_mask(sets) -> int:
    """Bit ``e`` set for each edge touched by a live copy."""
    out = 0
    for m in sets:
        for x in _bits(m):
            out |= 1 << (x >> 1)
    return out


def solve_orientation(state: OrientationState, goal: Tournament | None = None, limit: int = ORIENTATION_LIMIT) -> SolveResult:
    goal = goal or state.goal
    if goal is None:
        raise ValueError("a goal tournament is required")
    return OrientationSolver(goal, state.n, limit).solve(state)


# ---------------------------------------------------------------------------
# Optimal adversaries
# ---------------------------------------------------------------------------


def optimal_adversary(solver, randomize: bool = False):
    """Strategy playing a value-preserving move at every position.

    With ``randomize`` the move is drawn uniformly from the value-preserving
    ones using the playout's generator.
    """
    if isinstance(solver, OrientationSolver):

        def orient(state: OrientationState, rng: np.random.Generator | None = None):
            return solver.principal_arc(state, rng if randomize else None)

        return orient

    def claim(state: GameState, rng: np.random.Generator | None = None) -> Move:
        return solver.principal_round(state, rng if randomize else None)

    return claim


# ---------------------------------------------------------------------------
# Golden values
# ---------------------------------------------------------------------------

GOLDEN_MB = [
    (3, 1, 1, [[0]]),
    (3, 1, 1, [[0, 1]]),
    (3, 1, 1, [[0, 1], [0, 2]]),
    (5, 1, 1, [[0, 1], [1, 2], [2, 3], [3, 4]]),
    (6, 1, 1, [[0, 1, 2], [3, 4, 5], [0, 3], [1, 4]]),
    (6, 2, 1, [[0, 1, 2], [2, 3, 4], [4, 5, 0]]),
    (7, 1, 2, [[0, 1], [0, 2], [1, 2]]),
    (9, 1, 1, [[0, 1, 2], [3, 4, 5], [6, 7, 8], [0, 3, 6], [1, 4, 7], [2, 5, 8], [0, 4, 8], [2, 4, 6]]),
]
GOLDEN_OR = [(n, goal) for goal in ("transitive:2", "transitive:3", "cyclic:3") for n in range(2, 6)]


def mb_descriptor(size: int, a: int, b: int, sets) -> str:
    body = "|".join(",".join(map(str, s)) for s in sets)
    return f"mb:size={size};a={a};b={b};sets={body}"


def golden_values() -> dict[str, str]:
    """Solve every golden instance from scratch: descriptor -> winner."""
    from .game_core import Board, ExplicitFamily, new_game

    out: dict[str, str] = {}
    for size, a, b, sets in GOLDEN_MB:
        state = new_game(Board.abstract(size), ExplicitFamily(sets), a, b)
        out[mb_descriptor(size, a, b, sets)] = solve_mb(state).winner.value
    for n, goal in GOLDEN_OR:
        g = Tournament.named(goal)
        out[f"or:n={n};goal={goal}"] = solve_orientation(OrientationState(n, g), g).winner.value
    return out
