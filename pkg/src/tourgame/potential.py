"""Potential functions, the biased Erdos-Selfridge Breaker and the weak-win criteria."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .game_core import (
    BREAKER,
    MAKER,
    UNCLAIMED,
    ExplicitFamily,
    GameState,
    Move,
    WinningFamily,
)
from .log2real import Log2Real

# Potentials closer than this (relative) are ties, broken by smallest id.
_TIE_RTOL = 1e-12


class NoCandidate(LookupError):
    """No unclaimed element passes the candidate filter."""


@dataclass
class Certificate:
    """Outcome of a numeric criterion, with both sides in log2 form."""

    name: str
    verdict: bool
    lhs: Log2Real
    rhs: Log2Real
    inputs: dict = field(default_factory=dict)

    @property
    def margin_log2(self) -> float:
        """log2(rhs / lhs); positive when lhs is the smaller side."""
        return self.rhs.log2 - self.lhs.log2

    def to_record(self) -> dict:
        return {
            "type": "certificate",
            "criterion": self.name,
            **self.inputs,
            "lhs": self.lhs.to_record(),
            "rhs": self.rhs.to_record(),
            "verdict": self.verdict,
        }


def _as_family(family) -> WinningFamily:
    if isinstance(family, WinningFamily):
        return family
    return ExplicitFamily(family)


def potential_T(family) -> Log2Real:
    """``sum(2**-|H|)``; implicit families must supply an analytic potential."""
    return _as_family(family).potential()


EXACT_SET_LIMIT = 10**4


def potential_exact(family) -> Fraction:
    """Exact rational ``sum(2**-|H|)`` for explicit families below ``EXACT_SET_LIMIT`` sets."""
    family = _as_family(family)
    if not family.explicit or len(family) >= EXACT_SET_LIMIT:
        raise ValueError(f"exact mode needs an explicit family with fewer than {EXACT_SET_LIMIT} sets")
    return sum((Fraction(1, 1 << len(s)) for s in family.sets()), Fraction(0))


def es_sum(family, a: int, b: int, use_upper_bound: bool = False) -> Log2Real:
    """``sum((1+b)**(-|F|/a))`` over the family."""
    family = _as_family(family)
    step = math.log2(1 + b) / a
    if family.explicit:
        total = Log2Real.zero()
        for s in family.sets():
            total = total + Log2Real.pow2(-len(s) * step)
        return total
    if family.uniform_size is None:
        raise TypeError("implicit families need a uniform set size for the criterion")
    count = family.count_upper() if use_upper_bound else family.count()
    return count * Log2Real.pow2(-family.uniform_size * step)


def es_criterion(family, a: int = 1, b: int = 1, use_upper_bound: bool = False) -> Certificate:
    """Breaker-win certificate: the sum must be strictly below ``1/(1+b)``."""
    total = es_sum(family, a, b, use_upper_bound)
    threshold = Log2Real.of(1) / (1 + b)
    return Certificate("erdos-selfridge", total < threshold, total, threshold, {"a": a, "b": b})


def awwc_check(board_size, T_F: Log2Real, p: int, T_F2p_upper: Log2Real) -> Certificate:
    """Maker-win certificate ``T(F)/|X| > p + 4p * T(F_2^p)**(1/p)``.

    ``T_F2p_upper`` only has to bound the cluster potential from above, which
    can only make the right side larger, so a true verdict stays sound.
    """
    if p < 2:
        raise ValueError(f"cluster order p must be >= 2, got {p}")
    lhs = Log2Real.of(T_F) / Log2Real.of(board_size)
    rhs = Log2Real.of(p) + Log2Real.of(4 * p) * Log2Real.of(T_F2p_upper) ** (1.0 / p)
    return Certificate("advanced-weak-win", lhs > rhs, lhs, rhs, {"p": p})


# ---------------------------------------------------------------------------
# Alive-set bookkeeping and greedy moves
# ---------------------------------------------------------------------------


class AliveSetView:
    """Which winning sets Breaker has not yet touched, and how much Maker still needs.

    ``conflicts`` optionally maps an element to another one whose Maker
    ownership also kills every set containing it (the reverse of an ordered
    pair, for the auxiliary orientation game).
    """

    def __init__(self, family: WinningFamily, board_size: int, conflicts=None):
        self.sets = [tuple(sorted(s)) for s in family.sets()]
        self.members_of: list[list[int]] = [[] for _ in range(board_size)]
        for i, s in enumerate(self.sets):
            for e in s:
                self.members_of[e].append(i)
        self.needs = [len(s) for s in self.sets]
        self.dead = [False] * len(self.sets)
        self.owner = bytearray(board_size)
        self.conflicts = conflicts

    @classmethod
    def of(cls, state: GameState, conflicts=None) -> AliveSetView:
        view = cls(state.family, state.board.size, conflicts)
        view.sync(state)
        return view

    def sync(self, state: GameState) -> AliveSetView:
        mine = np.frombuffer(self.owner, dtype=np.uint8)
        theirs = np.frombuffer(state.owner, dtype=np.uint8)
        for e in np.nonzero(mine != theirs)[0].tolist():
            if mine[e] != UNCLAIMED:
                raise ValueError(f"element {e} changed owner; views only follow forward play")
            self.mark(e, int(theirs[e]))
        return self

    def mark(self, e: int, who: int) -> None:
        self.owner[e] = who
        if who == MAKER:
            for s in self.members_of[e]:
                self.needs[s] -= 1
            if self.conflicts is not None:
                c = self.conflicts[e]
                if c is not None:
                    for s in self.members_of[c]:
                        self.dead[s] = True
        elif who == BREAKER:
            for s in self.members_of[e]:
                self.dead[s] = True

    def copy(self) -> AliveSetView:
        other = object.__new__(AliveSetView)
        other.__dict__.update(self.__dict__)
        other.needs = list(self.needs)
        other.dead = list(self.dead)
        other.owner = bytearray(self.owner)
        return other

    def alive(self) -> list[int]:
        return [i for i, d in enumerate(self.dead) if not d]

    def dead_count(self) -> int:
        return sum(self.dead)

    def unclaimed(self) -> list[int]:
        return [e for e, o in enumerate(self.owner) if o == UNCLAIMED]

    def element_potential(self, e: int, weight: Callable[[int], float]) -> float:
        return sum(weight(self.needs[s]) for s in self.members_of[e] if not self.dead[s])

    def argmax(self, weight: Callable[[int], float], candidate_filter=None) -> int:
        best, best_val = None, -1.0
        for e, o in enumerate(self.owner):
            if o != UNCLAIMED or (candidate_filter is not None and not candidate_filter(e)):
                continue
            val = self.element_potential(e, weight)
            if best is None or (val > best_val and not math.isclose(val, best_val, rel_tol=_TIE_RTOL)):
                best, best_val = e, val
        if best is None:
            raise NoCandidate("no unclaimed element passes the candidate filter")
        return best


def es_breaker_move(view: AliveSetView, a: int, b: int, candidate_filter=None) -> int:
    """Unclaimed element maximising ``sum((1+b)**(-needs/a))`` over alive sets through it."""
    base = 1.0 + b
    return view.argmax(lambda need: base ** (-need / a), candidate_filter)


def maker_potential_move(view: AliveSetView, candidate_filter=None) -> int:
    """Unclaimed element maximising ``sum(2**-needs)`` over alive sets through it."""
    return view.argmax(lambda need: 2.0 ** -need, candidate_filter)


class _ViewStrategy:
    def __init__(self, conflicts=None, candidate_filter=None):
        self.conflicts = conflicts
        self.candidate_filter = candidate_filter
        self._view: AliveSetView | None = None
        self._state_id: int | None = None

    def view_for(self, state: GameState) -> AliveSetView:
        if self._view is not None and self._state_id == id(state) and state.history is not None:
            try:
                return self._view.sync(state)
            except ValueError:
                pass
        self._view = AliveSetView(state.family, state.board.size, self.conflicts)
        self._state_id = id(state)
        return self._view.sync(state)


class ESBreaker(_ViewStrategy):
    """Breaker picks his ``b`` elements one at a time by the potential rule."""

    def __call__(self, state: GameState, rng=None, candidate_filter=None) -> Move:
        view = self.view_for(state).copy()
        flt = candidate_filter or self.candidate_filter
        _, count = state.required_claims(state.turn)
        picks = []
        for _ in range(count):
            e = es_breaker_move(view, state.a, state.b, flt)
            view.mark(e, BREAKER)
            picks.append(e)
        return Move(tuple(picks))


class MakerPotential(_ViewStrategy):
    """Maker claims her ``a`` elements one at a time by the ``2**-needs`` rule."""

    def __call__(self, state: GameState, rng=None) -> Move:
        view = self.view_for(state).copy()
        _, count = state.required_claims(state.turn)
        picks = []
        for _ in range(count):
            e = maker_potential_move(view, self.candidate_filter)
            view.mark(e, MAKER)
            picks.append(e)
        return Move(tuple(picks))
