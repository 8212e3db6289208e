"""Boards, winning families and the biased Maker-Breaker game state machine.

Element numbering is fixed per board kind so that transcripts are
reproducible:

* ``complete-graph-edges(n)``: pairs ``(i, j)`` with ``i < j`` in
  lexicographic order.
* ``ordered-pairs(n)``: pairs ``(u, v)`` with ``u != v`` in lexicographic
  order, so ``(u, v)`` has id ``u*(n-1) + v - (v > u)``.
* ``reduced-k-partite``: the lexicographic ``(i, j)``, ``i < j`` pairs whose
  endpoints lie in different partition classes.
* ``abstract(size)``: plain elements ``0..size-1``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Callable, Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from .log2real import Log2Real

UNCLAIMED, MAKER, BREAKER = 0, 1, 2


class Player(str, Enum):
    MAKER = "M"
    BREAKER = "B"

    @property
    def other(self) -> Player:
        return Player.BREAKER if self is Player.MAKER else Player.MAKER


class Outcome(str, Enum):
    MAKER_WIN = "MakerWin"
    BREAKER_WIN = "BreakerWin"
    INCOMPLETE = "Incomplete"


class IllegalMove(ValueError):
    """A move rejected by :meth:`GameState.apply_move`; the state is untouched."""


class PlayoutError(RuntimeError):
    """A strategy produced an illegal move during :func:`play_out`."""

    def __init__(self, message: str, record_index: int, player: Player, move):
        super().__init__(f"record {record_index} ({player.value}): {message}; move={move!r}")
        self.record_index = record_index
        self.player = player
        self.move = move


class UnsupportedOperation(TypeError):
    pass


# ---------------------------------------------------------------------------
# Boards
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Board:
    kind: str
    size: int
    n: int | None = None
    class_of: tuple[int, ...] | None = None
    pairs: tuple[tuple[int, int], ...] = ()

    @classmethod
    def abstract(cls, size: int) -> Board:
        if size < 0:
            raise ValueError("board size must be nonnegative")
        return cls("abstract", size)

    @classmethod
    def complete_graph(cls, n: int) -> Board:
        pairs = tuple(itertools.combinations(range(n), 2))
        return cls("complete-graph-edges", len(pairs), n=n, pairs=pairs)

    @classmethod
    def ordered_pairs(cls, n: int) -> Board:
        pairs = tuple((u, v) for u in range(n) for v in range(n) if u != v)
        return cls("ordered-pairs", len(pairs), n=n, pairs=pairs)

    @classmethod
    def reduced(cls, class_of: Sequence[int]) -> Board:
        class_of = tuple(class_of)
        n = len(class_of)
        pairs = tuple(
            (i, j) for i, j in itertools.combinations(range(n), 2) if class_of[i] != class_of[j]
        )
        return cls("reduced-k-partite", len(pairs), n=n, class_of=class_of, pairs=pairs)

    @classmethod
    def from_header(cls, header: dict) -> Board:
        kind = header["board"]
        if kind == "abstract":
            return cls.abstract(header["size"])
        if kind == "complete-graph-edges":
            return cls.complete_graph(header["n"])
        if kind == "ordered-pairs":
            return cls.ordered_pairs(header["n"])
        if kind == "reduced-k-partite":
            return cls.reduced(header["class_of"])
        raise ValueError(f"unknown board kind {kind!r}")

    @property
    def k(self) -> int | None:
        return None if self.class_of is None else len(set(self.class_of))

    @property
    def is_graph(self) -> bool:
        return self.kind != "abstract"

    @cached_property
    def index(self) -> dict[tuple[int, int], int]:
        idx = {p: e for e, p in enumerate(self.pairs)}
        if self.kind != "ordered-pairs":
            idx.update({(v, u): e for (u, v), e in list(idx.items())})
        return idx

    def element_of(self, u: int, v: int) -> int:
        try:
            return self.index[(u, v)]
        except KeyError:
            raise KeyError(f"pair ({u}, {v}) is not on the {self.kind} board") from None

    def header(self) -> dict:
        h: dict = {"board": self.kind, "size": self.size}
        if self.n is not None:
            h["n"] = self.n
        if self.class_of is not None:
            h["k"] = self.k
            h["class_of"] = list(self.class_of)
        return h


# ---------------------------------------------------------------------------
# Winning families
# ---------------------------------------------------------------------------


class WinningFamily:
    """Hypergraph of winning sets over a board.

    Subclasses either list their sets (:class:`ExplicitFamily`) or describe
    them implicitly through a membership test, an enumerator, analytic
    counting and a Maker-containment check.
    """

    explicit: bool = False
    oriented: bool = False
    uniform_size: int | None = None

    def sets(self) -> Iterator[frozenset[int]]:
        raise UnsupportedOperation(f"{type(self).__name__} cannot enumerate its sets")

    def __contains__(self, candidate) -> bool:
        raise NotImplementedError

    def count(self) -> Log2Real:
        raise UnsupportedOperation(f"{type(self).__name__} has no analytic count")

    def potential(self) -> Log2Real:
        """``sum(2**-|H|)`` over the family."""
        if self.uniform_size is None:
            raise UnsupportedOperation(f"{type(self).__name__} has no analytic potential")
        return self.count() * Log2Real.pow2(-self.uniform_size)

    def maker_contains(self, state: GameState) -> bool:
        maker = state.maker_elements()
        return any(s <= maker for s in self.sets())

    def validate(self, board: Board) -> None:
        """Raise ValueError if a set leaves the board (implicit families trust their builder)."""


class ExplicitFamily(WinningFamily):
    explicit = True

    def __init__(self, sets: Iterable[Iterable[int]]):
        seen: dict[frozenset[int], None] = {}
        for s in sets:
            seen.setdefault(frozenset(s), None)
        self._sets: tuple[frozenset[int], ...] = tuple(seen)
        sizes = {len(s) for s in self._sets}
        self.uniform_size = sizes.pop() if len(sizes) == 1 else None

    def __len__(self) -> int:
        return len(self._sets)

    def __getitem__(self, i: int) -> frozenset[int]:
        return self._sets[i]

    def __contains__(self, candidate) -> bool:
        return frozenset(candidate) in self._set_index

    def __repr__(self) -> str:
        return f"ExplicitFamily({[sorted(s) for s in self._sets]})"

    @cached_property
    def _set_index(self) -> dict[frozenset[int], int]:
        return {s: i for i, s in enumerate(self._sets)}

    @cached_property
    def members_of(self) -> dict[int, tuple[int, ...]]:
        """element -> indices of the sets containing it."""
        acc: dict[int, list[int]] = {}
        for i, s in enumerate(self._sets):
            for e in s:
                acc.setdefault(e, []).append(i)
        return {e: tuple(v) for e, v in acc.items()}

    def sets(self) -> Iterator[frozenset[int]]:
        return iter(self._sets)

    def count(self) -> Log2Real:
        return Log2Real.of(len(self._sets))

    def potential(self) -> Log2Real:
        total = Log2Real.zero()
        for s in self._sets:
            total = total + Log2Real.pow2(-len(s))
        return total

    def validate(self, board: Board) -> None:
        for s in self._sets:
            bad = [e for e in s if not 0 <= e < board.size]
            if bad:
                raise ValueError(f"winning set {sorted(s)} has elements {bad} outside the board")


# ---------------------------------------------------------------------------
# Transcripts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MoveRecord:
    round: int
    player: Player
    elements: tuple[int, ...]
    orientation: tuple[tuple[int, int], ...] | None = None

    def to_json(self) -> dict:
        rec = {
            "type": "move",
            "round": self.round,
            "player": self.player.value,
            "elements": list(self.elements),
        }
        if self.orientation is not None:
            rec["orientation"] = [list(a) for a in self.orientation]
        return rec

    @classmethod
    def from_json(cls, rec: dict) -> MoveRecord:
        orient = rec.get("orientation")
        return cls(
            round=int(rec["round"]),
            player=Player(rec["player"]),
            elements=tuple(int(e) for e in rec["elements"]),
            orientation=None if orient is None else tuple((int(u), int(v)) for u, v in orient),
        )


@dataclass
class Transcript:
    header: dict
    records: list[MoveRecord] = field(default_factory=list)
    outcome: Outcome = Outcome.INCOMPLETE

    @property
    def seed(self) -> int:
        return int(self.header.get("seed", 0))

    def to_jsonl(self) -> str:
        lines = [json.dumps({"type": "header", **self.header}, sort_keys=True)]
        lines += [json.dumps(r.to_json(), sort_keys=True) for r in self.records]
        lines.append(json.dumps({"type": "outcome", "outcome": self.outcome.value}))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> Transcript:
        header: dict | None = None
        records: list[MoveRecord] = []
        outcome = Outcome.INCOMPLETE
        for line in text.splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            kind = rec.pop("type", None)
            if kind == "header":
                header = rec
            elif kind == "move":
                records.append(MoveRecord.from_json(rec))
            elif kind == "outcome":
                outcome = Outcome(rec["outcome"])
            else:
                raise ValueError(f"unknown transcript record type {kind!r}")
        if header is None:
            raise ValueError("transcript has no header record")
        return cls(header, records, outcome)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Transcript):
            return NotImplemented
        return self.to_jsonl() == other.to_jsonl()


# ---------------------------------------------------------------------------
# Game state
# ---------------------------------------------------------------------------


class Move(NamedTuple):
    elements: tuple[int, ...]
    orientation: tuple[tuple[int, int], ...] | None = None


def as_move(raw) -> Move:
    if isinstance(raw, Move):
        return raw
    if isinstance(raw, (int, np.integer)):
        return Move((int(raw),))
    return Move(tuple(int(e) for e in raw))


class GameState:
    """Ownership of every board element in an ``(a:b)`` Maker-Breaker game.

    Maker moves first.  A Maker move may claim anywhere from zero to ``a``
    elements and always ends her round; Breaker then claims exactly ``b``
    elements (fewer only when fewer remain).  Ownership marks are write-once.
    """

    def __init__(
        self,
        board: Board,
        family: WinningFamily,
        a: int = 1,
        b: int = 1,
        seed: int = 0,
        meta: dict | None = None,
        record: bool = True,
        play_to_end: bool = False,
    ):
        if a < 1 or b < 1:
            raise ValueError(f"bias must be positive, got ({a}:{b})")
        family.validate(board)
        self.board = board
        self.family = family
        self.a = a
        self.b = b
        self.owner = bytearray(board.size)
        self.unclaimed = board.size
        self.turn = Player.MAKER
        self.round = 1
        self.arcs: dict[int, tuple[int, int]] = {}
        self.history: Transcript | None = (
            Transcript({**board.header(), "a": a, "b": b, "seed": seed, **(meta or {})})
            if record
            else None
        )
        self.play_to_end = play_to_end
        self._hits: list[int] | None = [0] * len(family) if family.explicit else None
        self._maker_won = family.explicit and any(len(s) == 0 for s in family.sets())

    @classmethod
    def from_ownership(
        cls,
        board: Board,
        family: WinningFamily,
        maker: Iterable[int],
        breaker: Iterable[int],
        a: int = 1,
        b: int = 1,
    ) -> GameState:
        """A Maker-to-move position with no transcript (used for projections)."""
        state = cls(board, family, a, b, record=False)
        for owner, elems in ((MAKER, maker), (BREAKER, breaker)):
            for e in elems:
                state._claim(int(e), owner)
        return state

    def copy(self) -> GameState:
        other = object.__new__(GameState)
        other.__dict__.update(self.__dict__)
        other.owner = bytearray(self.owner)
        other.arcs = dict(self.arcs)
        other._hits = None if self._hits is None else list(self._hits)
        if self.history is not None:
            other.history = Transcript(dict(self.history.header), list(self.history.records))
        return other

    # -- queries ------------------------------------------------------------
    def maker_elements(self) -> frozenset[int]:
        return frozenset(i for i, o in enumerate(self.owner) if o == MAKER)

    def breaker_elements(self) -> frozenset[int]:
        return frozenset(i for i, o in enumerate(self.owner) if o == BREAKER)

    def unclaimed_elements(self) -> list[int]:
        return [i for i, o in enumerate(self.owner) if o == UNCLAIMED]

    def counts(self) -> tuple[int, int, int]:
        """(#Maker, #Breaker, #Unclaimed)."""
        m = self.owner.count(MAKER)
        return m, self.board.size - m - self.unclaimed, self.unclaimed

    def maker_wins(self) -> bool:
        if self._hits is not None:
            return self._maker_won
        return self.family.maker_contains(self)

    @property
    def is_over(self) -> bool:
        return self.unclaimed == 0 or (self._maker_won and not self.play_to_end)

    def outcome(self) -> Outcome:
        if self.maker_wins():
            return Outcome.MAKER_WIN
        if self.unclaimed == 0:
            return Outcome.BREAKER_WIN
        return Outcome.INCOMPLETE

    def required_claims(self, player: Player) -> tuple[int, int]:
        """(min, max) number of elements ``player`` may claim now."""
        if player is Player.MAKER:
            return 0, min(self.a, self.unclaimed)
        need = min(self.b, self.unclaimed)
        return need, need

    # -- moves --------------------------------------------------------------
    def check_move(self, player: Player, move: Move) -> None:
        if self.is_over:
            raise IllegalMove("the game is over")
        if player is not self.turn:
            raise IllegalMove(f"it is {self.turn.name}'s turn, not {player.name}'s")
        elems = move.elements
        if len(set(elems)) != len(elems):
            raise IllegalMove(f"repeated elements in {elems}")
        lo, hi = self.required_claims(player)
        if len(elems) > hi:
            raise IllegalMove(f"{player.name} may claim at most {hi} elements, got {len(elems)}")
        if len(elems) < lo:
            raise IllegalMove(f"{player.name} must claim {lo} elements, got {len(elems)}")
        for e in elems:
            if not 0 <= e < self.board.size:
                raise IllegalMove(f"element {e} is not on the board")
            if self.owner[e] != UNCLAIMED:
                raise IllegalMove(f"element {e} is already claimed")
        if move.orientation is not None:
            if self.board.kind not in ("complete-graph-edges", "reduced-k-partite"):
                raise IllegalMove(f"orientations are not allowed on a {self.board.kind} board")
            if len(move.orientation) != len(elems):
                raise IllegalMove("one orientation per claimed element is required")
            for e, (u, v) in zip(elems, move.orientation):
                if tuple(sorted((u, v))) != self.board.pairs[e]:
                    raise IllegalMove(f"orientation ({u}, {v}) does not match element {e}")

    def apply_move(self, player: Player, elements, orientation=None) -> GameState:
        move = as_move(elements)
        if orientation is not None:
            move = Move(move.elements, tuple((int(u), int(v)) for u, v in orientation))
        self.check_move(player, move)
        mark = MAKER if player is Player.MAKER else BREAKER
        for e in move.elements:
            self._claim(e, mark)
        if move.orientation is not None:
            for e, arc in zip(move.elements, move.orientation):
                self.arcs[e] = (int(arc[0]), int(arc[1]))
        if self.history is not None:
            self.history.records.append(
                MoveRecord(self.round, player, tuple(move.elements), move.orientation)
            )
        if player is Player.MAKER:
            self.turn = Player.BREAKER
        else:
            self.turn = Player.MAKER
            self.round += 1
        return self

    def _claim(self, e: int, mark: int) -> None:
        self.owner[e] = mark
        self.unclaimed -= 1
        if mark == MAKER and self._hits is not None:
            fam = self.family
            for s in fam.members_of.get(e, ()):
                self._hits[s] += 1
                if self._hits[s] == len(fam[s]):
                    self._maker_won = True


def new_game(board: Board, family: WinningFamily, a: int = 1, b: int = 1, seed: int = 0, **meta) -> GameState:
    return GameState(board, family, a, b, seed=seed, meta=meta or None)


def maker_wins(state: GameState) -> bool:
    return state.maker_wins()


def replay(
    transcript: Transcript, family: WinningFamily, board: Board | None = None, play_to_end: bool = False
) -> GameState:
    """Rebuild the final state by applying every record from the empty state."""
    h = transcript.header
    board = board or Board.from_header(h)
    state = GameState(board, family, h.get("a", 1), h.get("b", 1), seed=h.get("seed", 0), play_to_end=play_to_end)
    extra = {k: v for k, v in h.items() if k not in state.history.header}
    state.history.header.update(extra)
    for i, rec in enumerate(transcript.records):
        if rec.round != state.round:
            raise IllegalMove(f"record {i} claims round {rec.round}, state is in round {state.round}")
        state.apply_move(rec.player, rec.elements, rec.orientation)
    return state


# ---------------------------------------------------------------------------
# Playout driver
# ---------------------------------------------------------------------------

Strategy = Callable[[GameState, np.random.Generator], object]


def play_out(
    state: GameState,
    maker_strategy: Strategy,
    breaker_strategy: Strategy,
    seed: int = 0,
) -> Transcript:
    """Drive the game to completion and return its transcript.

    Both strategies share one generator seeded from ``seed``.  Explicit
    families stop the game as soon as Maker completes a set; implicit ones are
    judged when the board is exhausted.
    """
    rng = np.random.default_rng(seed & 0xFFFFFFFFFFFFFFFF)
    if state.history is not None:
        state.history.header["seed"] = seed
    while not state.is_over:
        player = state.turn
        strat = maker_strategy if player is Player.MAKER else breaker_strategy
        raw = strat(state, rng)
        move = as_move(raw)
        try:
            state.apply_move(player, move)
        except IllegalMove as exc:
            index = len(state.history.records) if state.history is not None else -1
            raise PlayoutError(str(exc), index, player, move) from exc
    for strat in (maker_strategy, breaker_strategy):
        finish = getattr(strat, "finish", None)
        if finish is not None:
            finish(state)
    transcript = state.history if state.history is not None else Transcript(state.board.header())
    transcript.outcome = state.outcome()
    return transcript


def random_strategy(state: GameState, rng: np.random.Generator) -> Move:
    """Claim a uniformly random allotment; orient graph edges uniformly too."""
    free = state.unclaimed_elements()
    _, hi = state.required_claims(state.turn)
    picks = [free[i] for i in rng.choice(len(free), size=hi, replace=False)] if hi else []
    if state.family.oriented:
        orient = []
        for e in picks:
            u, v = state.board.pairs[e]
            orient.append((u, v) if rng.integers(2) == 0 else (v, u))
        return Move(tuple(picks), tuple(orient))
    return Move(tuple(picks))
