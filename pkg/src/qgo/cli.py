"""Command-line interface: batch workflows and the live game service."""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

from . import analytics, kifu, rules
from .selfplay import run_selfplay
from .source import (CoincidenceConfig, SimulatedBitSource, StateParams,
                     extract_bits, generate_timetags, parse_bit_script,
                     read_tags, visibility, write_tags)


def _parse_delays(text: str) -> dict[int, int]:
    delays = {}
    for item in text.split(","):
        if not item.strip():
            continue
        ch, _, value = item.partition(":")
        delays[int(ch)] = int(value)
    return delays


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qgo",
        description="Quantum Go: self-play, replay, randomness analytics, "
                    "tag pipelines and the live game service.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("selfplay", help="run seeded bot-vs-bot games")
    p.add_argument("--games", type=int, default=1)
    p.add_argument("--size", type=int, default=19)
    p.add_argument("--komi", type=float, default=0.0)
    p.add_argument("--theta", type=float, default=math.pi / 4)
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-moves", type=int, default=None)
    p.add_argument("--out", type=Path, default=None,
                   help="directory for kifus and report CSVs")

    p = sub.add_parser("replay", help="verify a kifu against the engine")
    p.add_argument("kifu", type=Path)
    p.add_argument("--render", action="store_true", help="print the final board")

    p = sub.add_parser("analyze-bits", help="autocorrelation of a bit stream")
    p.add_argument("--bits", type=Path, default=None, help="bit script file")
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--noise-hh", type=float, default=0.0)
    p.add_argument("--noise-vv", type=float, default=0.0)
    p.add_argument("--n", type=int, default=200000, help="simulated sample size")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-lag", "--maxlag", dest="max_lag", type=int, default=10000)
    p.add_argument("--exact", action="store_true", help="two-mean exact form")
    p.add_argument("--out", type=Path, default=None, help="correlogram CSV path")

    p = sub.add_parser("gen-tags", help="synthesize a four-channel tag stream")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--noise-hh", type=float, default=0.0)
    p.add_argument("--noise-vv", type=float, default=0.0)
    p.add_argument("--pair-rate", type=float, default=1e6)
    p.add_argument("--dark-rate", type=float, default=0.0)
    p.add_argument("--jitter", type=float, default=0.0)
    p.add_argument("--duration", type=float, required=True, help="seconds")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True,
                   help=".bin (packed) or .csv output")

    p = sub.add_parser("extract", help="coincidence extraction over a tag file")
    p.add_argument("--tags", type=Path, required=True)
    p.add_argument("--window", type=int, default=2, help="ns")
    p.add_argument("--delays", type=str, default="", help="e.g. 1:0,2:5")
    p.add_argument("--out", type=Path, default=None, help="bit script output")

    p = sub.add_parser("ais", help="AIS trace of a kifu")
    p.add_argument("kifu", type=Path)
    p.add_argument("--out", type=Path, default=None, help="trace CSV path")

    p = sub.add_parser("bounds", help="complexity bounds for a board size")
    p.add_argument("--size", type=int, required=True)

    p = sub.add_parser("tree", help="exhaustive game-tree node counts")
    p.add_argument("--size", type=int, default=3)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--variant", choices=("classical", "quantum"), default="quantum")
    p.add_argument("--node-limit", type=int, default=10 ** 8)

    p = sub.add_parser("serve", help="start the live game service")
    p.add_argument("--host", default=os.environ.get("QGO_HOST", "127.0.0.1"))
    p.add_argument("--port", type=int, default=int(os.environ.get("QGO_PORT", "8642")))
    p.add_argument("--persist-dir", type=Path,
                   default=os.environ.get("QGO_PERSIST_DIR"))
    p.add_argument("--theta", type=float, default=math.pi / 4,
                   help="default entangled-state angle for new sessions")
    p.add_argument("--phi", type=float, default=0.0)
    return parser


def cmd_selfplay(args) -> int:
    config = rules.BoardConfig(size=args.size, komi=args.komi,
                               theta=args.theta, phi=args.phi)
    report, kifus = run_selfplay(config, args.games, args.seed,
                                 max_moves=args.max_moves)
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        for i, k in enumerate(kifus):
            kifu.save(k, args.out / f"game_{i:04d}.kifu")
        report.write_csv(args.out)
    print(report.summary_text())
    return 0


def cmd_replay(args) -> int:
    k = kifu.load(args.kifu)
    state = kifu.replay(k)
    print(f"{args.kifu}: {len(k.moves)} moves replayed, no divergence")
    if k.result is not None:
        winner, margin = k.result
        label = "draw" if winner == "draw" else f"{winner}+{margin:g}"
        print(f"result verified: {label}")
    if args.render:
        print(kifu.render_board(state))
    return 0


def cmd_analyze_bits(args) -> int:
    if args.bits is not None:
        bits = parse_bit_script(args.bits.read_text())
        origin = str(args.bits)
    else:
        theta = args.theta if args.theta is not None else math.pi / 4
        params = StateParams(theta=theta, phi=args.phi,
                             noise_hh=args.noise_hh, noise_vv=args.noise_vv)
        source = SimulatedBitSource(params, args.seed)
        bits = source.take(args.n)
        origin = f"simulated theta={theta:g} seed={args.seed}"
    corr = analytics.autocorrelation(bits, args.max_lag, exact=args.exact)
    if args.out is not None:
        corr.to_csv(args.out)
        print(f"correlogram written to {args.out}")
    print(f"bits: {origin}")
    print(f"N = {corr.n}, lags 1..{args.max_lag}")
    print(f"confidence bound = {corr.confidence_bound:.4f}")
    print(f"proportion within bound = {corr.proportion_within:.4%}")
    return 0


def cmd_gen_tags(args) -> int:
    params = StateParams(theta=args.theta, phi=args.phi,
                         noise_hh=args.noise_hh, noise_vv=args.noise_vv,
                         pair_rate=args.pair_rate, dark_rate=args.dark_rate,
                         jitter=args.jitter)
    tags = generate_timetags(params, args.duration, args.seed)
    write_tags(args.out, tags)
    print(f"{len(tags)} tags written to {args.out}")
    return 0


def cmd_extract(args) -> int:
    tags = read_tags(args.tags)
    config = CoincidenceConfig(window=args.window, delays=_parse_delays(args.delays))
    bits, counts = extract_bits(tags, config)
    print(f"coincidences: HV={counts.n_hv} VH={counts.n_vh} "
          f"HH={counts.n_hh} VV={counts.n_vv}")
    print(f"bits kept: {len(bits)}, discarded: {counts.n_hh + counts.n_vv}")
    if counts.total:
        print(f"visibility = {visibility(counts):.4f}")
    if args.out is not None:
        args.out.write_text("".join(str(b) for b in bits) + "\n")
        print(f"bit script written to {args.out}")
    return 0


def cmd_ais(args) -> int:
    k = kifu.load(args.kifu)
    trace = analytics.ais_trace(k)
    if args.out is not None:
        trace.to_csv(args.out)
        print(f"trace written to {args.out}")
    preview = ", ".join(f"S^{n}={trace.s_at(n):.2f}"
                        for n in range(1, min(trace.moves + 2, 6)))
    print(f"{args.kifu}: {trace.moves} moves, {preview}")
    print(f"mean AIS = {trace.mean_s():.3f}")
    return 0


def cmd_bounds(args) -> int:
    max_ais, info_sets = analytics.ais_bounds(args.size)
    cells = args.size * args.size
    print(f"board {args.size}x{args.size}")
    print(f"max AIS = 2^{cells // 8} = {max_ais}")
    print(f"information sets = 3^{cells} = {info_sets}")
    return 0


def cmd_tree(args) -> int:
    config = rules.BoardConfig(size=args.size)
    counts = analytics.enumerate_game_tree(config, args.depth, args.variant,
                                           node_limit=args.node_limit)
    print(f"{args.variant} {args.size}x{args.size}, depths 1..{args.depth}")
    for depth, count in enumerate(counts, start=1):
        print(f"depth {depth}: {count}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import ServerSettings, create_app

    settings = ServerSettings(persist_dir=args.persist_dir,
                              default_theta=args.theta, default_phi=args.phi)
    app = create_app(settings)
    print(f"qgo service on ws://{args.host}:{args.port}/ws "
          f"(persist: {args.persist_dir or 'disabled'})")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


COMMANDS = {
    "selfplay": cmd_selfplay,
    "replay": cmd_replay,
    "analyze-bits": cmd_analyze_bits,
    "gen-tags": cmd_gen_tags,
    "extract": cmd_extract,
    "ais": cmd_ais,
    "bounds": cmd_bounds,
    "tree": cmd_tree,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ValueError, OSError, analytics.TreeSizeGuardError,
            kifu.KifuParseError, kifu.ReplayDivergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
