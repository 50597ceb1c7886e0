"""Command-line interface.

    lerpa <command> [options]

Commands: learn, coward, tune, mas, adapt, solve, bluff, layout,
selftest. Every experiment writes one CSV (plus helper CSVs where
noted) and a PNG figure beside it; `layout` prints the observation bit
map and `selftest` runs the internal consistency battery.

Options may also come from a config file of `key=value` lines (same
names as the long flags, hyphens as underscores); explicit command-line
flags win over the file.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .cards import InputError
from .encoding import layout_table
from .experiments import (
    DEFAULT_HANDS,
    DEFAULT_WINDOW,
    ExperimentConfig,
    fmt_cell,
    run_adapt,
    run_bluff,
    run_coward,
    run_learn,
    run_mas,
    run_selftest,
    run_solve,
    run_tune,
    write_rows,
    write_series_csv,
)
from .table import load_predealt, write_session_csv

EXPERIMENTS = ("learn", "coward", "tune", "mas", "adapt", "solve", "bluff")

# Commands that replay a fixed deal free the agents immediately instead
# of forcing 200 knocks first; otherwise nothing could ever fold.
PREDEALT_COURAGE_DEFAULT = 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lerpa",
        description="Lerpa learning laboratory: self-play experiments on a "
                    "trick-taking betting game.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "learn": "one learning agent vs three random agents",
        "coward": "the learn matchup without forced early play",
        "tune": "four learners with competing parameter combos",
        "mas": "learning vs randoms compared with mutual learning",
        "adapt": "decision timelines on a repeated fixed deal",
        "solve": "equilibrium search on a repeated fixed deal",
        "bluff": "chase-out detection on a repeated fixed deal",
        "layout": "print the observation bit layout",
        "selftest": "run internal consistency checks",
    }
    for name in EXPERIMENTS + ("layout", "selftest"):
        cmd = sub.add_parser(name, help=helps[name])
        _add_options(cmd)
    return parser


def _add_options(cmd: argparse.ArgumentParser) -> None:
    cmd.add_argument("--hands", type=int, default=None,
                     help="hands (or repeats) to play")
    cmd.add_argument("--seed", type=int, default=None, help="root random seed")
    cmd.add_argument("--alpha", type=float, default=None, help="learning rate")
    cmd.add_argument("--lambda", dest="lam", type=float, default=None,
                     help="eligibility trace decay")
    cmd.add_argument("--epsilon", type=float, default=None,
                     help="exploration probability")
    cmd.add_argument("--courage", type=int, default=None,
                     help="hands of forced knocking for a fresh agent")
    cmd.add_argument("--window", type=int, default=None,
                     help="smoothing window (equilibrium window for solve)")
    cmd.add_argument("--predealt", type=Path, default=None,
                     help="path to a 5-line pre-dealt hand file")
    cmd.add_argument("--k", type=int, default=None,
                     help="bluff re-entry window in hands")
    cmd.add_argument("--out", type=Path, default=None, help="output CSV path")
    cmd.add_argument("--config", type=Path, default=None,
                     help="key=value config file; flags override it")
    cmd.add_argument("--fold-update", choices=("on", "off"), default=None,
                     help="apply the terminal update on folded hands")
    cmd.add_argument("--knock-epsilon", choices=("on", "off"), default=None,
                     help="apply epsilon exploration to the knock decision")
    cmd.add_argument("--clamp", choices=("on", "off"), default=None,
                     help="clip network outputs into [0,1] before scoring")
    cmd.add_argument("--smoothing", choices=("block", "sliding"), default=None,
                     help="series smoothing mode")
    cmd.add_argument("--no-plot", action="store_true",
                     help="skip the PNG figure next to the CSV")


def _read_config_file(path: Path) -> dict[str, str]:
    if not path.exists():
        raise InputError(f"config file not found: {path}")
    values: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise InputError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


_ON_OFF = {"on": True, "off": False}


def _resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    name = args.command
    file_values: dict[str, str] = {}
    if args.config is not None:
        file_values = _read_config_file(args.config)

    def pick(flag: str, cast, fallback):
        cli = getattr(args, flag, None)
        if cli is not None:
            return cli
        if flag in file_values:
            try:
                return cast(file_values[flag])
            except (KeyError, ValueError) as exc:
                raise InputError(f"bad config value for {flag}: "
                                 f"{file_values[flag]!r}") from exc
        return fallback

    def to_bool(value, fallback: bool | None) -> bool | None:
        if value is None:
            return fallback
        if isinstance(value, bool):
            return value
        if value not in _ON_OFF:
            raise InputError(f"expected on/off, got {value!r}")
        return _ON_OFF[value]

    courage_default = PREDEALT_COURAGE_DEFAULT if name in ("adapt", "solve", "bluff") \
        else (0 if name == "coward" else 200)
    config = ExperimentConfig(
        name=name,
        hands=pick("hands", int, DEFAULT_HANDS.get(name, 1000)),
        seed=pick("seed", int, 0),
        alpha=pick("alpha", float, 0.1),
        lam=pick("lam", float, 0.1),
        epsilon=pick("epsilon", float, 0.01),
        courage=pick("courage", int, courage_default),
        window=pick("window", int, DEFAULT_WINDOW.get(name, 1)),
        k=pick("k", int, 5),
        out=pick("out", Path, None),
        predealt_path=pick("predealt", Path, None),
        fold_update=to_bool(pick("fold_update", str, None), None),
        epsilon_at_knock=to_bool(pick("knock_epsilon", str, None), True),
        clamp_outputs=to_bool(pick("clamp", str, None), False),
        smoothing=pick("smoothing", str, "block"),
        plot=not args.no_plot,
    )
    return config


def _out_path(config: ExperimentConfig) -> Path:
    return config.out if config.out is not None else Path(f"lerpa_{config.name}.csv")


def _require_predealt(config: ExperimentConfig):
    if config.predealt_path is None:
        raise InputError(f"{config.name} needs --predealt PATH")
    return load_predealt(config.predealt_path)


def _cmd_learn(config: ExperimentConfig) -> int:
    _, series = run_learn(config)
    out = _out_path(config)
    write_series_csv(out, "block" if config.smoothing == "block" else "hand", series)
    if config.plot:
        from . import plotting
        plotting.plot_series(series, plotting.figure_path(out),
                             "chips per hand vs three random agents",
                             f"{config.smoothing} of {config.window} hands",
                             "mean chips per hand")
    print(f"learn: {config.hands} hands, seed {config.seed} -> {out}")
    return 0


def _cmd_coward(config: ExperimentConfig) -> int:
    _, series = run_coward(config)
    out = _out_path(config)
    write_series_csv(out, "block" if config.smoothing == "block" else "hand", [series])
    if config.plot:
        from . import plotting
        plotting.plot_series([series], plotting.figure_path(out),
                             f"fold rate with courage={config.courage}",
                             f"{config.smoothing} of {config.window} hands",
                             "fold rate")
    print(f"coward: {config.hands} hands, seed {config.seed} -> {out}")
    return 0


def _cmd_tune(config: ExperimentConfig) -> int:
    _, series, ranking = run_tune(config)
    out = _out_path(config)
    write_series_csv(out, "block" if config.smoothing == "block" else "hand", series)
    ranking_path = out.with_name(out.stem + "_ranking.csv")
    write_rows(ranking_path,
               ["rank", "combo", "alpha", "lambda", "epsilon", "final_chips"],
               [[e.rank, e.label, fmt_cell(e.alpha), fmt_cell(e.lam),
                 fmt_cell(e.epsilon), e.final_chips] for e in ranking])
    if config.plot:
        from . import plotting
        plotting.plot_series(series, plotting.figure_path(out),
                             "competing parameter combinations",
                             f"{config.smoothing} of {config.window} hands",
                             "mean chips per hand")
    print(f"tune: {config.hands} hands, seed {config.seed} -> {out}")
    for entry in ranking:
        print(f"  #{entry.rank} {entry.label}: alpha={entry.alpha} "
              f"lambda={entry.lam} epsilon={entry.epsilon} "
              f"chips={entry.final_chips}")
    return 0


def _cmd_mas(config: ExperimentConfig) -> int:
    _, _, rows = run_mas(config)
    out = _out_path(config)
    write_rows(out, ["agent", "setting", "final_200_return"],
                [[r.agent, r.setting, r.final_return] for r in rows])
    if config.plot:
        from . import plotting
        plotting.plot_bars([r.agent for r in rows],
                           [r.final_return for r in rows],
                           plotting.figure_path(out),
                           "returns over the final 200 hands",
                           "chips")
    print(f"mas: 2 x {config.hands} hands, seed {config.seed} -> {out}")
    return 0


def _cmd_adapt(config: ExperimentConfig) -> int:
    spec = _require_predealt(config)
    log = run_adapt(config, spec)
    out = _out_path(config)
    rows = []
    for i, rec in enumerate(log.records):
        for seat in range(4):
            s1 = rec.stage1_by_seat()[seat]
            rows.append([i, seat, log.agent_ids[seat], s1.kind, int(s1.forced),
                         int(s1.exploratory), rec.deltas[seat]])
    write_rows(out, ["repeat", "seat", "agent", "stage1", "forced", "explore",
                      "delta"], rows)
    write_session_csv(log, out.with_name(out.stem + "_hands.csv"))
    if config.plot:
        from . import plotting
        plotting.plot_decision_timeline(log, plotting.figure_path(out),
                                        "stage-1 decisions on a repeated deal")
    print(f"adapt: {config.hands} repeats, seed {config.seed} -> {out}")
    return 0


def _cmd_solve(config: ExperimentConfig) -> int:
    spec = _require_predealt(config)
    log, index = run_solve(config, spec)
    out = _out_path(config)
    write_rows(out, ["equilibrium_index", "window", "repeats", "converged"],
                [["" if index is None else index, config.window, config.hands,
                  int(index is not None)]])
    write_session_csv(log, out.with_name(out.stem + "_hands.csv"))
    if config.plot:
        from . import plotting
        plotting.plot_cumulative(log, plotting.figure_path(out),
                                 "repeated deal until play stabilises",
                                 equilibrium=index)
    state = "none" if index is None else f"index {index}"
    print(f"solve: {config.hands} repeats, window {config.window}, "
          f"equilibrium {state} -> {out}")
    return 0


def _cmd_bluff(config: ExperimentConfig) -> int:
    spec = _require_predealt(config)
    log, events = run_bluff(config, spec)
    out = _out_path(config)
    write_rows(out,
                ["bluffer_seat", "bluffer", "victim_seat", "victim",
                 "epoch_index", "switch_index", "reentry_index"],
                [[e.bluffer, log.agent_ids[e.bluffer], e.victim,
                  log.agent_ids[e.victim], e.epoch_index, e.switch_index,
                  e.reentry_index] for e in events])
    write_session_csv(log, out.with_name(out.stem + "_hands.csv"))
    if config.plot:
        from . import plotting
        plotting.plot_decision_timeline(log, plotting.figure_path(out),
                                        "chase-out events on a repeated deal",
                                        events=events)
    print(f"bluff: {config.hands} repeats, k={config.k}, "
          f"{len(events)} event(s) -> {out}")
    return 0


def _cmd_layout(config: ExperimentConfig) -> int:
    text = layout_table()
    if config.out is not None:
        config.out.write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def _cmd_selftest(config: ExperimentConfig) -> int:
    ok, checks = run_selftest()
    for check in checks:
        print(check.line())
    print("selftest", "PASS" if ok else "FAIL")
    return 0 if ok else 1


_DISPATCH = {
    "learn": _cmd_learn,
    "coward": _cmd_coward,
    "tune": _cmd_tune,
    "mas": _cmd_mas,
    "adapt": _cmd_adapt,
    "solve": _cmd_solve,
    "bluff": _cmd_bluff,
    "layout": _cmd_layout,
    "selftest": _cmd_selftest,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _resolve_config(args)
        return _DISPATCH[args.command](config)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
