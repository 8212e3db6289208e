"""RandomMaker against RandomBreaker, and threshold estimates over a range of ``k``.

Trial ``i`` of a configuration with seed ``s`` draws everything from
``numpy.random.default_rng(s + i)``: a uniform permutation of the board (the
claim order, Maker at even positions) followed by one orientation bit per
element.  Outcomes are judged once, on the final position.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binomtest

from .game_core import Board, MoveRecord, Outcome, Player, Transcript
from .log2real import Log2Real
from .tournament import CliqueFamily, Digraph, Tournament, contains_copy, make_reduced_board

VARIANTS = ("random-tournament", "random-reduced-clique", "random-orientation")
JOBS_ENV = "TOURGAME_JOBS"
_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class TrialConfig:
    variant: str
    n: int
    k: int
    trials: int = 1
    seed: int = 0
    goal: Tournament | None = None  # defaults to the transitive T_k

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; choose from {VARIANTS}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.k < 1 or self.n < 1:
            raise ValueError("n and k must be positive")
        if self.goal is not None and self.goal.k != self.k:
            raise ValueError(f"goal has {self.goal.k} vertices, expected k={self.k}")

    @property
    def goal_tournament(self) -> Tournament:
        return self.goal if self.goal is not None else Tournament.transitive(self.k)

    def trial_seed(self, index: int) -> int:
        return (self.seed + index) & _SEED_MASK

    def board(self) -> Board:
        if self.variant == "random-reduced-clique":
            return make_reduced_board(self.n, self.k)[0]
        return Board.complete_graph(self.n)


@dataclass
class TrialResult:
    outcome: Outcome
    transcript: Transcript | None = None


def random_playout(config: TrialConfig, trial_index: int, board: Board | None = None, record: bool = False) -> TrialResult:
    """One uniformly random game played to exhaustion and judged at the end."""
    if config.variant == "random-reduced-clique" and config.k > config.n:
        return TrialResult(Outcome.BREAKER_WIN, None)
    board = board or config.board()
    rng = np.random.default_rng(config.trial_seed(trial_index))
    order = rng.permutation(board.size)
    flips = rng.integers(0, 2, size=board.size).astype(bool)
    pairs = np.asarray(board.pairs, dtype=np.int64).reshape(-1, 2)
    tails = np.where(flips, pairs[:, 1], pairs[:, 0])
    heads = np.where(flips, pairs[:, 0], pairs[:, 1])
    maker = order[0::2]

    if config.variant == "random-reduced-clique":
        won = CliqueFamily(board, config.k).find_clique(maker.tolist()) is not None
    else:
        mine = maker if config.variant == "random-tournament" else order
        won = contains_copy(Digraph(config.n, tails[mine], heads[mine]), config.goal_tournament)
    outcome = Outcome.MAKER_WIN if won else Outcome.BREAKER_WIN

    transcript = None
    if record:
        header = {"board": board.kind, "n": config.n, "k": config.k, "a": 1, "b": 1,
                  "seed": config.trial_seed(trial_index), "variant": config.variant}
        transcript = Transcript(header)
        oriented = config.variant != "random-reduced-clique"
        for i, e in enumerate(order.tolist()):
            orient = ((int(tails[e]), int(heads[e])),) if oriented else None
            player = Player.MAKER if i % 2 == 0 else Player.BREAKER
            transcript.records.append(MoveRecord(i // 2 + 1, player, (e,), orient))
        transcript.outcome = outcome
    return TrialResult(outcome, transcript)


def _wins_for(config: TrialConfig, indices: range) -> int:
    board = config.board() if not (config.variant == "random-reduced-clique" and config.k > config.n) else None
    return sum(random_playout(config, i, board).outcome is Outcome.MAKER_WIN for i in indices)


def run_trials(config: TrialConfig, jobs: int | None = None) -> int:
    """Number of RandomMaker wins over ``config.trials`` trials."""
    jobs = jobs or int(os.environ.get(JOBS_ENV, "1"))
    if jobs <= 1 or config.trials < 2 * jobs:
        return _wins_for(config, range(config.trials))
    chunks = [range(i, config.trials, jobs) for i in range(jobs)]
    with ProcessPoolExecutor(jobs) as pool:
        return sum(pool.map(_wins_for, [config] * jobs, chunks))


# ---------------------------------------------------------------------------
# Expectations and thresholds
# ---------------------------------------------------------------------------


def expected_transversal_cliques(n, k: int) -> Log2Real:
    """``(n/k)**k * 2**(-C(k,2))``; the ``1 + o(1)`` factor is dropped."""
    if k < 1:
        raise ValueError("k must be >= 1")
    lg_n = Log2Real.of(n).log2
    return Log2Real(k * (lg_n - math.log2(k)) - k * (k - 1) / 2)


def expectation_crossing(n, k_max: int = 256) -> int:
    """Smallest ``k`` at which the expected transversal clique count drops below one."""
    for k in range(1, k_max + 1):
        if expected_transversal_cliques(n, k) < 1:
            return k
    raise ValueError(f"expectation stays >= 1 up to k={k_max}")


def wilson_interval(wins: int, trials: int) -> tuple[float, float]:
    ci = binomtest(wins, trials).proportion_ci(0.95, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass
class ThresholdEstimate:
    variant: str
    n: int
    trials: int
    seed: int
    ks: list[int]
    wins: list[int]
    intervals: list[tuple[float, float]] = field(default_factory=list)

    def __post_init__(self):
        if not self.intervals:
            self.intervals = [wilson_interval(w, self.trials) for w in self.wins]

    @property
    def frequencies(self) -> list[float]:
        return [w / self.trials for w in self.wins]

    @property
    def crossing_k(self) -> int | None:
        """Smallest ``k`` with frequency below 1/2, if some earlier ``k`` is at or above it."""
        freqs = self.frequencies
        for i, f in enumerate(freqs):
            if f < 0.5:
                return self.ks[i] if i > 0 else None
        return None

    @property
    def unreliable(self) -> bool:
        """True when no crossing exists or a Wilson interval next to it still contains 1/2."""
        k = self.crossing_k
        if k is None:
            return True
        i = self.ks.index(k)
        return any(lo <= 0.5 <= hi for lo, hi in self.intervals[i - 1 : i + 1])

    def monotone_violations(self, z: float = 3.0) -> list[int]:
        """``k`` values whose frequency exceeds the previous one by more than ``z`` standard errors."""
        bad = []
        freqs = self.frequencies
        for i in range(1, len(freqs)):
            p0, p1 = freqs[i - 1], freqs[i]
            se = math.sqrt((p0 * (1 - p0) + p1 * (1 - p1)) / self.trials)
            if p1 - p0 > z * se and p1 > p0:
                bad.append(self.ks[i])
        return bad

    def to_records(self) -> list[dict]:
        rows = [
            {"type": "threshold-k", "variant": self.variant, "n": self.n, "k": k, "wins": w,
             "trials": self.trials, "frequency": w / self.trials, "lower": lo, "upper": hi}
            for k, w, (lo, hi) in zip(self.ks, self.wins, self.intervals)
        ]
        rows.append({"type": "threshold", "variant": self.variant, "n": self.n, "trials": self.trials,
                     "seed": self.seed, "crossing_k": self.crossing_k, "unreliable": self.unreliable})
        return rows

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "wins", "trials", "frequency", "lower", "upper"])
            for k, w, (lo, hi) in zip(self.ks, self.wins, self.intervals):
                writer.writerow([k, w, self.trials, w / self.trials, lo, hi])


def estimate_threshold(
    variant: str,
    n: int,
    k_range: range,
    trials: int,
    seed: int = 0,
    goal_for=None,
    jobs: int | None = None,
) -> ThresholdEstimate:
    """Raw win frequencies for each ``k``; every ``k`` reuses the same seed.

    ``goal_for(k)`` may supply the goal tournament (transitive by default).
    """
    ks = list(k_range)
    wins = []
    for k in ks:
        goal = goal_for(k) if goal_for is not None else None
        wins.append(run_trials(TrialConfig(variant, n, k, trials, seed, goal), jobs))
    return ThresholdEstimate(variant, n, trials, seed, ks, wins)
