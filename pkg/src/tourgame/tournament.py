"""Tournaments, digraphs and the reduction from the tournament game to a clique game.

Maker splits ``V(K_n)`` into ``k`` balanced classes and identifies class
``i`` with goal vertex ``u_i``.  Every cross edge she claims is oriented the
way the goal orients the corresponding class pair, so owning a transversal
``k``-clique (one vertex per class) gives her a copy of the goal.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import _embed
from .game_core import (
    MAKER,
    BREAKER,
    Board,
    GameState,
    Move,
    WinningFamily,
    as_move,
)
from .log2real import Log2Real

MAX_CANONICAL_K = 8
MAX_ENUMERATE_K = 6


class ReductionError(RuntimeError):
    """An inner strategy produced a move the reduction cannot translate."""


# ---------------------------------------------------------------------------
# Tournaments
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _pair_index(k: int) -> dict[tuple[int, int], int]:
    return {p: i for i, p in enumerate(itertools.combinations(range(k), 2))}


@lru_cache(maxsize=None)
def _perm_tables(k: int) -> tuple[np.ndarray, np.ndarray]:
    """For every permutation: source pair and flip bit of each relabelled pair."""
    pairs = list(itertools.combinations(range(k), 2))
    index = _pair_index(k)
    perms = list(itertools.permutations(range(k)))
    src = np.empty((len(perms), len(pairs)), dtype=np.int64)
    flip = np.empty((len(perms), len(pairs)), dtype=np.int64)
    for p, perm in enumerate(perms):
        inv = [0] * k
        for i, x in enumerate(perm):
            inv[x] = i
        for q, (x, y) in enumerate(pairs):
            i, j = inv[x], inv[y]
            if i < j:
                src[p, q], flip[p, q] = index[(i, j)], 0
            else:
                src[p, q], flip[p, q] = index[(j, i)], 1
    return src, flip


def _code_bits(code: int, m: int) -> np.ndarray:
    return (code >> np.arange(m, dtype=np.int64)) & 1


def _relabelled_codes(code: int, k: int) -> np.ndarray:
    m = k * (k - 1) // 2
    if m == 0:
        return np.zeros(1, dtype=np.int64)
    src, flip = _perm_tables(k)
    bits = _code_bits(code, m)[src] ^ flip
    return bits @ (np.int64(1) << np.arange(m, dtype=np.int64))


@dataclass(frozen=True)
class Tournament:
    """A tournament on vertices ``0..k-1``.

    ``code`` holds one bit per pair ``(i, j)``, ``i < j``, in lexicographic
    order; a set bit means the arc ``i -> j``.
    """

    k: int
    code: int

    @classmethod
    def from_arcs(cls, k: int, arcs: Iterable[tuple[int, int]]) -> Tournament:
        index = _pair_index(k)
        code, seen = 0, set()
        for u, v in arcs:
            if u == v or not (0 <= u < k and 0 <= v < k):
                raise ValueError(f"invalid arc ({u}, {v}) for k={k}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"pair {key} oriented twice")
            seen.add(key)
            if u < v:
                code |= 1 << index[key]
        if len(seen) != len(index):
            missing = sorted(set(index) - seen)
            raise ValueError(f"pairs {missing} are not oriented")
        return cls(k, code)

    @classmethod
    def transitive(cls, k: int) -> Tournament:
        return cls(k, (1 << (k * (k - 1) // 2)) - 1)

    @classmethod
    def cyclic3(cls) -> Tournament:
        return cls.from_arcs(3, [(0, 1), (1, 2), (2, 0)])

    @classmethod
    def random(cls, k: int, rng: np.random.Generator) -> Tournament:
        m = k * (k - 1) // 2
        bits = rng.integers(0, 2, size=m)
        return cls(k, int(sum(int(b) << i for i, b in enumerate(bits))))

    @classmethod
    def named(cls, spec: str) -> Tournament:
        """Parse ``transitive:k`` or ``cyclic:3``."""
        name, _, arg = spec.partition(":")
        if name == "transitive":
            return cls.transitive(int(arg))
        if name == "cyclic" and arg in ("", "3"):
            return cls.cyclic3()
        raise ValueError(f"unknown tournament name {spec!r}")

    def has_arc(self, u: int, v: int) -> bool:
        if u < v:
            return bool(self.code >> _pair_index(self.k)[(u, v)] & 1)
        return not (self.code >> _pair_index(self.k)[(v, u)] & 1)

    def arcs(self) -> list[tuple[int, int]]:
        return [
            (i, j) if self.code >> q & 1 else (j, i)
            for q, (i, j) in enumerate(itertools.combinations(range(self.k), 2))
        ]

    def out_degrees(self) -> list[int]:
        deg = [0] * self.k
        for u, _ in self.arcs():
            deg[u] += 1
        return deg

    def relabel(self, perm: Sequence[int]) -> Tournament:
        """Vertex ``i`` becomes ``perm[i]``."""
        return Tournament.from_arcs(self.k, [(perm[u], perm[v]) for u, v in self.arcs()])

    def canonical_form(self) -> Tournament:
        """Minimum code over all relabellings (exact; k <= 8)."""
        if self.k > MAX_CANONICAL_K:
            raise ValueError(f"canonical form is only supported for k <= {MAX_CANONICAL_K}")
        return Tournament(self.k, int(_relabelled_codes(self.code, self.k).min()))

    def automorphism_count(self) -> int:
        if self.code == Tournament.transitive(self.k).code:
            return 1
        if self.k > MAX_CANONICAL_K:
            raise ValueError(f"automorphisms are only counted for k <= {MAX_CANONICAL_K}")
        return int((_relabelled_codes(self.code, self.k) == self.code).sum())

    def is_transitive(self) -> bool:
        return sorted(self.out_degrees()) == list(range(self.k))

    def to_text(self) -> str:
        return "\n".join([str(self.k)] + [f"{u} {v}" for u, v in self.arcs()]) + "\n"

    @classmethod
    def from_text(cls, text: str) -> Tournament:
        lines = [ln.split() for ln in text.splitlines() if ln.strip()]
        if not lines or len(lines[0]) != 1:
            raise ValueError("tournament text must start with a line holding k")
        k = int(lines[0][0])
        arcs = []
        for parts in lines[1:]:
            if len(parts) != 2:
                raise ValueError(f"bad arc line {' '.join(parts)!r}")
            arcs.append((int(parts[0]), int(parts[1])))
        return cls.from_arcs(k, arcs)


def load_goal(spec: str) -> Tournament:
    """A built-in name (``transitive:k``, ``cyclic:3``) or a tournament text file."""
    try:
        return Tournament.named(spec)
    except ValueError:
        with open(spec) as fh:
            return Tournament.from_text(fh.read())


def enumerate_tournaments(k: int) -> list[Tournament]:
    """One canonical representative per isomorphism class, by ascending code."""
    if k > MAX_ENUMERATE_K:
        raise ValueError(f"enumeration is only supported for k <= {MAX_ENUMERATE_K}")
    m = k * (k - 1) // 2
    seen = np.zeros(1 << m, dtype=bool)
    reps = []
    for code in range(1 << m):
        if seen[code]:
            continue
        seen[_relabelled_codes(code, k)] = True
        reps.append(Tournament(k, code))
    return reps


# ---------------------------------------------------------------------------
# Digraphs and containment
# ---------------------------------------------------------------------------


class Digraph:
    """A loopless digraph on ``0..n-1`` kept as parallel tail/head arrays."""

    def __init__(self, n: int, tails, heads):
        self.n = n
        self.tails = np.asarray(tails, dtype=np.int64)
        self.heads = np.asarray(heads, dtype=np.int64)
        if np.any(self.tails == self.heads):
            raise ValueError("digraphs here have no self-loops")

    @classmethod
    def from_arcs(cls, n: int, arcs: Iterable[tuple[int, int]]) -> Digraph:
        arcs = list(arcs)
        return cls(n, [u for u, _ in arcs], [v for _, v in arcs])

    def arcs(self) -> set[tuple[int, int]]:
        return set(zip(self.tails.tolist(), self.heads.tolist()))

    def __len__(self) -> int:
        return len(self.tails)

    def neighbour_table(self) -> np.ndarray:
        return np.stack(
            [
                _embed.bitset_rows(self.n, self.tails, self.heads),
                _embed.bitset_rows(self.n, self.heads, self.tails),
            ]
        )


def _pattern_order(k: int, arcs: Sequence[tuple[int, int]]) -> list[int]:
    out = [0] * k
    inn = [0] * k
    for u, v in arcs:
        out[u] += 1
        inn[v] += 1
    return sorted(range(k), key=lambda x: (-(out[x] + inn[x]), -out[x], x))


def find_copy(d: Digraph, goal: Tournament | Digraph) -> dict[int, int] | None:
    """An injective map of goal vertices into ``d`` carrying arcs to arcs.

    Goal vertices are placed in order of descending total (then out-) degree;
    host vertices whose out- or in-degree falls short of the goal vertex's
    are pruned from its domain before the search.
    """
    if isinstance(goal, Tournament):
        k, garcs = goal.k, goal.arcs()
    else:
        k, garcs = goal.n, sorted(goal.arcs())
    if k > d.n:
        return None
    if k == 0:
        return {}
    order = _pattern_order(k, garcs)
    pos = {x: i for i, x in enumerate(order)}
    rel = np.full((k, k), -1, dtype=np.int64)
    gout = [0] * k
    gin = [0] * k
    for u, v in garcs:
        gout[u] += 1
        gin[v] += 1
        i, j = pos[u], pos[v]
        if i < j:
            rel[i, j] = 0
        else:
            rel[j, i] = 1
    hout = np.bincount(d.tails, minlength=d.n)
    hin = np.bincount(d.heads, minlength=d.n)
    domain = np.zeros((k, _embed.words(d.n)), dtype=np.uint64)
    for i, x in enumerate(order):
        ok = np.nonzero((hout >= gout[x]) & (hin >= gin[x]))[0]
        domain[i] = _embed.vertex_mask(d.n, ok.tolist())
    placed = _embed.find_embedding(d.neighbour_table(), rel, domain)
    if placed is None:
        return None
    return {order[i]: v for i, v in enumerate(placed)}


def contains_copy(d: Digraph, goal: Tournament | Digraph) -> bool:
    return find_copy(d, goal) is not None


def naive_contains_copy(d: Digraph, goal: Tournament) -> bool:
    """All-injections oracle; only for tiny hosts."""
    arcs = d.arcs()
    garcs = goal.arcs()
    return any(
        all((phi[u], phi[v]) in arcs for u, v in garcs)
        for phi in itertools.permutations(range(d.n), goal.k)
    )


# ---------------------------------------------------------------------------
# Partitions and clique families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Partition:
    n: int
    k: int
    class_of: tuple[int, ...]

    @classmethod
    def balanced(cls, n: int, k: int) -> Partition:
        """Contiguous classes; the first ``n % k`` get the extra vertex."""
        if not 1 <= k <= n:
            raise ValueError(f"need 1 <= k <= n, got n={n}, k={k}")
        q, r = divmod(n, k)
        class_of: list[int] = []
        for c in range(k):
            class_of += [c] * (q + (c < r))
        return cls(n, k, tuple(class_of))

    def classes(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.k)]
        for v, c in enumerate(self.class_of):
            out[c].append(v)
        return out

    def sizes(self) -> list[int]:
        return [len(c) for c in self.classes()]


def make_reduced_board(n: int, k: int) -> tuple[Board, Partition]:
    if k > n:
        raise ValueError(f"k={k} exceeds n={n}")
    if k < 2:
        raise ValueError("the reduced board needs k >= 2")
    part = Partition.balanced(n, k)
    return Board.reduced(part.class_of), part


class CliqueFamily(WinningFamily):
    """Edge sets of ``k``-cliques: transversal ones on a reduced board, all of them on ``K_n``."""

    def __init__(self, board: Board, k: int):
        if board.kind not in ("reduced-k-partite", "complete-graph-edges"):
            raise ValueError(f"clique families live on graph boards, not {board.kind}")
        self.board = board
        self.k = k
        self.transversal = board.kind == "reduced-k-partite"
        if self.transversal and board.k != k:
            raise ValueError(f"board has {board.k} classes but k={k}")
        self.uniform_size = k * (k - 1) // 2
        if self.transversal:
            self._classes: list[list[int]] = [[] for _ in range(k)]
            for v, c in enumerate(board.class_of):
                self._classes[c].append(v)

    def vertex_sets(self) -> Iterable[tuple[int, ...]]:
        if self.transversal:
            return itertools.product(*self._classes)
        return itertools.combinations(range(self.board.n), self.k)

    def edge_set(self, vertices: Sequence[int]) -> frozenset[int]:
        idx = self.board.index
        return frozenset(idx[(u, v)] for u, v in itertools.combinations(vertices, 2))

    def sets(self):
        for vs in self.vertex_sets():
            yield self.edge_set(vs)

    def count(self) -> Log2Real:
        if self.transversal:
            return Log2Real.of(math.prod(len(c) for c in self._classes))
        return Log2Real.of(math.comb(self.board.n, self.k))

    def __contains__(self, candidate) -> bool:
        elems = frozenset(candidate)
        if len(elems) != self.uniform_size:
            return False
        try:
            verts = sorted({v for e in elems for v in self.board.pairs[e]})
        except (IndexError, TypeError):
            return False
        if len(verts) != self.k:
            return False
        if self.transversal and len({self.board.class_of[v] for v in verts}) != self.k:
            return False
        return self.edge_set(verts) == elems

    def find_clique(self, elements: Iterable[int]) -> tuple[int, ...] | None:
        """Vertices of a family clique whose edges all lie in ``elements``."""
        n, k = self.board.n, self.k
        if k == 1:
            return (0,) if n else None
        us, vs = [], []
        for e in elements:
            u, v = self.board.pairs[e]
            us.append(u)
            vs.append(v)
        us_a, vs_a = np.asarray(us, dtype=np.int64), np.asarray(vs, dtype=np.int64)
        if self.transversal:
            adj = _embed.bitset_rows(n, np.r_[us_a, vs_a], np.r_[vs_a, us_a])
            nbr = np.stack([adj, adj])
            degree = np.bincount(np.r_[us_a, vs_a], minlength=n)
            domain = np.stack(
                [_embed.vertex_mask(n, [v for v in cls if degree[v] >= k - 1]) for cls in self._classes]
            )
        else:
            # upper neighbours only: each clique is found once, in increasing order
            up = _embed.bitset_rows(n, np.minimum(us_a, vs_a), np.maximum(us_a, vs_a))
            nbr = np.stack([up, up])
            degree = np.bincount(np.r_[us_a, vs_a], minlength=n)
            domain = np.tile(_embed.vertex_mask(n, np.nonzero(degree >= k - 1)[0].tolist()), (k, 1))
        rel = np.zeros((k, k), dtype=np.int64)
        return _embed.find_embedding(nbr, rel, domain)

    def maker_contains(self, state: GameState) -> bool:
        return self.find_clique(state.maker_elements()) is not None


def implicit_transversal_clique_family(partition: Partition) -> CliqueFamily:
    return CliqueFamily(Board.reduced(partition.class_of), partition.k)


class TournamentGoalFamily(WinningFamily):
    """Win condition of the tournament game: Maker's digraph holds a copy of ``goal``."""

    oriented = True

    def __init__(self, goal: Tournament, n: int):
        self.goal = goal
        self.n = n
        self.uniform_size = goal.k * (goal.k - 1) // 2

    def __contains__(self, candidate) -> bool:
        return False

    def maker_digraph(self, state: GameState) -> Digraph:
        return Digraph.from_arcs(
            self.n, [arc for e, arc in state.arcs.items() if state.owner[e] == MAKER]
        )

    def maker_contains(self, state: GameState) -> bool:
        return contains_copy(self.maker_digraph(state), self.goal)


def tournament_game(n: int, goal: Tournament, seed: int = 0) -> GameState:
    """A fresh (1:1) tournament game on ``K_n``."""
    return GameState(
        Board.complete_graph(n), TournamentGoalFamily(goal, n), 1, 1, seed=seed, meta={"k": goal.k}
    )


# ---------------------------------------------------------------------------
# Maker strategy wrappers
# ---------------------------------------------------------------------------


class MakerTournamentWrapper:
    """Turn a Maker strategy for the reduced clique game into one for the tournament game.

    The inner strategy sees the projection of the current position onto the
    reduced board (Maker to move).  Once the reduced board is exhausted the
    wrapper claims the smallest free edge, oriented low to high.
    """

    def __init__(self, goal: Tournament, partition: Partition, inner):
        if goal.k != partition.k:
            raise ValueError("goal and partition disagree on k")
        self.goal = goal
        self.partition = partition
        self.inner = inner
        self.board = Board.reduced(partition.class_of)
        self.family = CliqueFamily(self.board, partition.k)
        self._outer_ids: list[int] | None = None

    def inner_state(self, state: GameState) -> GameState:
        if self._outer_ids is None:
            self._outer_ids = [state.board.element_of(u, v) for u, v in self.board.pairs]
        maker, breaker = [], []
        for r, e in enumerate(self._outer_ids):
            o = state.owner[e]
            if o == MAKER:
                maker.append(r)
            elif o == BREAKER:
                breaker.append(r)
        return GameState.from_ownership(self.board, self.family, maker, breaker, state.a, 1)

    def orient(self, u: int, v: int) -> tuple[int, int]:
        cu, cv = self.partition.class_of[u], self.partition.class_of[v]
        if cu == cv:
            raise ReductionError(f"pair ({u}, {v}) lies inside class {cu}")
        return (u, v) if self.goal.has_arc(cu, cv) else (v, u)

    def __call__(self, state: GameState, rng) -> Move:
        inner = self.inner_state(state)
        if inner.unclaimed == 0:
            e = min(state.unclaimed_elements())
            return Move((e,), (state.board.pairs[e],))
        chosen = as_move(self.inner(inner, rng)).elements
        elems, orient = [], []
        for r in chosen:
            if not 0 <= r < self.board.size:
                raise ReductionError(f"inner strategy chose {r}, not a cross pair of the partition")
            u, v = self.board.pairs[r]
            elems.append(self._outer_ids[r])
            orient.append(self.orient(u, v))
        return Move(tuple(elems), tuple(orient))


def maker_tournament_wrapper(goal: Tournament, partition: Partition, inner) -> MakerTournamentWrapper:
    return MakerTournamentWrapper(goal, partition, inner)


def orientation_consistent(state: GameState, goal: Tournament, partition: Partition) -> bool:
    """Every Maker cross arc follows the goal's arc between the two classes."""
    for e, (u, v) in state.arcs.items():
        if state.owner[e] != MAKER:
            continue
        cu, cv = partition.class_of[u], partition.class_of[v]
        if cu != cv and not goal.has_arc(cu, cv):
            return False
    return True


def transitive_strategy_wrapper(inner, k: int):
    """Orient every edge the inner ``k``-clique strategy claims from lower to higher index.

    The inner strategy sees the position as a plain clique game on ``K_n``.
    Only the transitive goal is guaranteed: a clique on ``v_1 < ... < v_k``
    becomes the transitive tournament on those vertices.
    """
    family_cache: dict[int, CliqueFamily] = {}

    def strategy(state: GameState, rng) -> Move:
        fam = family_cache.get(id(state.board))
        if fam is None:
            fam = family_cache[id(state.board)] = CliqueFamily(state.board, k)
        projected = GameState.from_ownership(
            state.board, fam, state.maker_elements(), state.breaker_elements(), state.a, state.b
        )
        elems = as_move(inner(projected, rng)).elements
        return Move(elems, tuple(state.board.pairs[e] for e in elems))

    return strategy
