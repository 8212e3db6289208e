"""Command-line entry point: ``tourgame <subcommand> ...``.

Every subcommand writes JSON lines to standard output (or ``--output``).
Exit codes: 0 success, 2 bad arguments or failed preconditions, 3 solver refusal.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import bounds, potential, random_games, solver
from .game_core import Board, ExplicitFamily, Player, new_game, play_out, random_strategy
from .log2real import Log2Real
from .orientation import (
    build_H_family,
    obreaker_certificate,
    obreaker_from_breaker,
    play_orientation,
    random_orienter,
    reverse_table,
)
from .tournament import (
    CliqueFamily,
    Tournament,
    enumerate_tournaments,
    load_goal,
    make_reduced_board,
    maker_tournament_wrapper,
    tournament_game,
)

EXIT_OK, EXIT_USAGE, EXIT_REFUSED = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


class UsageError(ValueError):
    pass


def _k_range(text: str) -> range:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise argparse.ArgumentTypeError("k-range must look like LO:HI")
    lo_i, hi_i = int(lo), int(hi)
    if lo_i > hi_i or lo_i < 1:
        raise argparse.ArgumentTypeError(f"empty or invalid k-range {text!r}")
    return range(lo_i, hi_i + 1)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tourgame", description="Tournament and orientation Maker-Breaker games.")
    p.add_argument("--output", "-o", help="write records here instead of stdout")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("bounds", help="known bounds on k_cl, k_t, k_o, k_u at n")
    b.add_argument("--n", type=int, required=True)

    c = sub.add_parser("criterion", help="certificate arithmetic")
    c.add_argument("--couple-k", type=int, help="evaluate at n = k 2^((k+9)/2)")
    c.add_argument("--n", type=int)
    c.add_argument("--k", type=int)
    c.add_argument("--p", type=int, default=4)
    c.add_argument("--mode", choices=("lemma", "triple_sum"), default="lemma")
    c.add_argument("--scan", type=int, metavar="K_MAX", help="scan the coupling up to K_MAX")
    c.add_argument("--g-scan", type=int, metavar="K_MAX", help="scan g_j <= 1 up to K_MAX")
    c.add_argument("--breaker", action="store_true", help="Breaker bound n^k 2^(-k(k-1)/4) <= 1/2")

    pl = sub.add_parser("play", help="one playout, printed as a transcript")
    pl.add_argument("--game", choices=("tournament", "reduced-clique", "orientation", "aux"), required=True)
    pl.add_argument("--n", type=int, required=True)
    pl.add_argument("--k", type=int)
    pl.add_argument("--goal", default=None, help="goal file, or transitive:k / cyclic:3")
    pl.add_argument("--maker", choices=("random", "potential", "optimal"), default="random")
    pl.add_argument("--breaker", choices=("random", "es", "optimal"), default="random")
    pl.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("simulate", help="random-vs-random threshold estimate")
    s.add_argument("--variant", choices=random_games.VARIANTS, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k-range", type=_k_range, required=True)
    s.add_argument("--trials", type=int, default=200)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--goal", default=None, help="goal name; default transitive:k for each k")
    s.add_argument("--jobs", type=int, default=None)
    s.add_argument("--csv", help="also write per-k rows as CSV")

    so = sub.add_parser("solve", help="exact solution of a tiny instance")
    so.add_argument("--game", choices=("mb", "orientation"), default="mb")
    so.add_argument("--size", type=int, help="abstract board size (mb)")
    so.add_argument("--sets", help="winning sets like '0,1|0,2' (mb)")
    so.add_argument("--a", type=int, default=1)
    so.add_argument("--b", type=int, default=1)
    so.add_argument("--n", type=int)
    so.add_argument("--goal")
    so.add_argument("--limit", type=int)
    so.add_argument("--golden", metavar="PATH", help="regenerate the golden-value file at PATH")

    e = sub.add_parser("enumerate", help="tournaments on k vertices up to isomorphism")
    e.add_argument("--k", type=int, required=True)
    e.add_argument("--list", action="store_true", help="also print every representative")
    return p


def _need(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.command} needs {' '.join(missing)}")


def _goal(spec: str | None, k: int | None) -> Tournament:
    if spec is None:
        if k is None:
            raise UsageError("give --goal or --k")
        return Tournament.transitive(k)
    return load_goal(spec)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_bounds(args):
    yield bounds.known_bounds_report(args.n)


def cmd_criterion(args):
    if args.scan is not None:
        scan = bounds.scan_certificate(args.scan, args.mode)
        yield {"type": "certificate-scan", "mode": args.mode, "k_max": args.scan, "k_star": scan.k_star,
               "decreasing_from_k_star": scan.k_star is not None and scan.decreasing_from(scan.k_star)}
        return
    if args.g_scan is not None:
        gs = bounds.g_scan(args.g_scan)
        yield {"type": "g-scan", "k_max": gs.k_max, "K0": gs.K0, "failing": gs.failing()}
        return
    if args.breaker:
        _need(args, "n", "k")
        yield obreaker_certificate(args.n, args.k).to_record()
        return
    k = args.couple_k if args.couple_k is not None else args.k
    if k is not None and k < 3:
        raise UsageError("the corollary needs k >= 3")
    if args.couple_k is not None:
        n = bounds.coupled_n(k)
        rec = bounds.certificate_record(n, k, args.p, args.mode)
        rec["n_floor"] = bounds.coupled_n_int(k)
    else:
        _need(args, "n", "k")
        k, n = args.k, args.n
        rec = bounds.certificate_record(n, k, args.p, args.mode)
    ratio = bounds.corollary_ratio(n, k, args.mode)
    rec.update(type="corollary_ratio", ratio=ratio.to_record(), verdict=bool(ratio < 1))
    yield rec


def _play_mb(args):
    if args.game == "tournament":
        goal = _goal(args.goal, args.k)
        state = tournament_game(args.n, goal, args.seed)
        if args.maker == "potential":
            _, part = make_reduced_board(args.n, goal.k)
            maker = maker_tournament_wrapper(goal, part, potential.MakerPotential())
        elif args.maker == "random":
            maker = random_strategy
        else:
            raise UsageError("the tournament game has no exact solver at this size; use random or potential")
        if args.breaker != "random":
            raise UsageError("the tournament game supports --breaker random only")
        return state, maker, random_strategy
    if args.game == "reduced-clique":
        _need(args, "k")
        board, _ = make_reduced_board(args.n, args.k)
        family = CliqueFamily(board, args.k)
        state = new_game(board, family, 1, 1, args.seed, k=args.k)
    else:  # aux: the (2:1) game on ordered pairs
        goal = _goal(args.goal, args.k)
        board = Board.ordered_pairs(args.n)
        family = build_H_family(goal, args.n)
        state = new_game(board, family, 2, 1, args.seed, k=goal.k)
    strategies = {
        "random": random_strategy,
        "potential": potential.MakerPotential(),
        "es": potential.ESBreaker(reverse_table(board) if args.game == "aux" else None),
    }
    if "optimal" in (args.maker, args.breaker):
        sol = solver.MBSolver(state.family, state.a, state.b, **_limit(args))
        sol.root(state)  # refuses oversized boards before play starts
        strategies["optimal"] = solver.optimal_adversary(sol)
    return state, strategies[args.maker], strategies[args.breaker]


def _limit(args) -> dict:
    return {"limit": args.limit} if getattr(args, "limit", None) else {}


def cmd_play(args):
    if args.game == "orientation":
        goal = _goal(args.goal, args.k)
        if args.maker == "optimal" or args.breaker == "optimal":
            sol = solver.OrientationSolver(goal, args.n)
        omaker = {"random": random_orienter}.get(args.maker)
        if args.maker == "optimal":
            omaker = solver.optimal_adversary(sol)
        if omaker is None:
            raise UsageError("OMaker may be random or optimal")
        if args.breaker == "es":
            obreaker = obreaker_from_breaker(goal, args.n)
        elif args.breaker == "optimal":
            obreaker = solver.optimal_adversary(sol)
        else:
            obreaker = random_orienter
        state = play_orientation(args.n, goal, omaker, obreaker, args.seed)
        yield from _transcript_lines(state.history)
        return
    state, maker, breaker = _play_mb(args)
    yield from _transcript_lines(play_out(state, maker, breaker, args.seed))


def _transcript_lines(transcript):
    for line in transcript.to_jsonl().splitlines():
        yield json.loads(line)


def cmd_simulate(args):
    goal_for = None
    if args.goal is not None:
        fixed = load_goal(args.goal)
        goal_for = lambda k: fixed  # noqa: E731
        if any(k != fixed.k for k in args.k_range):
            raise UsageError("a fixed --goal needs a one-value --k-range")
    est = random_games.estimate_threshold(args.variant, args.n, args.k_range, args.trials, args.seed, goal_for, args.jobs)
    if args.csv:
        est.write_csv(args.csv)
    yield from est.to_records()


def cmd_solve(args):
    if args.golden:
        values = solver.golden_values()
        Path(args.golden).write_text(json.dumps(values, indent=1, sort_keys=True) + "\n")
        yield {"type": "golden", "path": args.golden, "instances": len(values)}
        return
    if args.game == "orientation":
        _need(args, "n", "goal")
        goal = load_goal(args.goal)
        from .orientation import OrientationState

        sol = solver.OrientationSolver(goal, args.n, **_limit(args))
        res = sol.solve(OrientationState(args.n, goal))
        yield {**res.to_record(), "game": "orientation", "n": args.n, "goal": args.goal}
        return
    _need(args, "size", "sets")
    sets = [[int(x) for x in part.split(",") if x] for part in args.sets.split("|")] if args.sets else []
    state = new_game(Board.abstract(args.size), ExplicitFamily(sets), args.a, args.b)
    res = solver.MBSolver(state.family, args.a, args.b, **_limit(args)).solve(state)
    yield {**res.to_record(), "game": "mb", "instance": solver.mb_descriptor(args.size, args.a, args.b, sets)}


def cmd_enumerate(args):
    reps = enumerate_tournaments(args.k)
    c, _ = bounds.tournament_count_lower(args.k)
    yield {"type": "enumeration", "k": args.k, "count": len(reps), "c_k": c.to_record(),
           "at_least_ceil_c_k": len(reps) >= math.ceil(float(c) - 1e-12)}
    if args.list:
        for t in reps:
            yield {"type": "tournament", "k": t.k, "arcs": t.arcs()}


COMMANDS = {
    "bounds": cmd_bounds,
    "criterion": cmd_criterion,
    "play": cmd_play,
    "simulate": cmd_simulate,
    "solve": cmd_solve,
    "enumerate": cmd_enumerate,
}


def _jsonable(obj):
    if isinstance(obj, Log2Real):
        return obj.to_record()
    if isinstance(obj, Player):
        return obj.value
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def run(argv: list[str] | None = None, out=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"tourgame: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    sink = out
    try:
        records = list(COMMANDS[args.command](args))
    except solver.SolverRefusal as exc:
        print(f"tourgame: solver refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except (UsageError, ValueError) as exc:
        print(f"tourgame: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = "".join(json.dumps(r, sort_keys=True, default=_jsonable) + "\n" for r in records)
    if args.output:
        Path(args.output).write_text(text)
    else:
        (sink or sys.stdout).write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
