"""The codonsoup command line."""

import json
import logging
import sys
from abc import abstractmethod
from argparse import ArgumentParser, ArgumentTypeError, Namespace
from pathlib import Path
from typing import override

from .analytics import EventKind
from .config import PRESETS, SimulationConfig, load_config, load_preset, set_path
from .command import Command
from .engine import RunObserver, Simulation
from .exceptions import (
    ConfigException,
    OutputException,
    ParserException,
    SeedStrandException,
    SnapshotException,
)
from .experiments import SweepAxis, calibrate_brownian, sweep, write_sweep
from .invariants import verify_run
from .parser import Parser
from .render import RenderSpec, render_svg
from .snapshot import RunDirectory, load_snapshot, summarize

logger = logging.getLogger(__name__)


def _event_kind(value: str) -> EventKind:
    try:
        return EventKind(value)
    except ValueError:
        raise ConfigException(f"unknown event kind {value!r}, want one of {[str(k) for k in EventKind]}") from None


def _positive_int(value: str) -> int:
    try:
        n = int(value)
    except ValueError:
        raise ArgumentTypeError(f"want a positive integer, got {value!r}") from None
    if n <= 0:
        raise ArgumentTypeError(f"want a positive integer, got {value!r}")
    return n


def _seeds(args: Namespace) -> list[int]:
    if args.seed_list:
        return [int(s) for s in args.seed_list.split(",")]
    return list(range(args.first_seed, args.first_seed + args.seeds))


def _add_seed_range(parser: ArgumentParser, seeds: int) -> None:
    parser.add_argument("--seeds", action="store", type=int, default=seeds, help="number of rng seeds per cell")
    parser.add_argument("--first-seed", action="store", type=int, default=1, help="first rng seed")
    parser.add_argument("--seed-list", action="store", type=str, help="comma separated rng seeds")


def _write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise OutputException(str(path), e.strerror or "cannot write") from None


class SimulationCommand(Command):
    """A command configured by a preset, a config file and overrides."""

    @classmethod
    def register_config(cls, parser: ArgumentParser) -> None:
        parser.add_argument("--preset", action="store", choices=sorted(PRESETS), default="seeded")
        parser.add_argument("--config", action="store", type=str, help="JSON config laid over the preset")
        parser.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override one config key, tables as key.colour, repeatable",
        )
        parser.add_argument("--seed", action="store", type=int, help="rng seed")
        parser.add_argument("--steps", action="store", type=int, help="step budget")

    @classmethod
    def register_intervals(cls, parser: ArgumentParser) -> None:
        parser.add_argument("--out", action="store", type=str, required=True, help="output directory")
        parser.add_argument("--snapshot-every", action="store", type=int)
        parser.add_argument("--metrics-every", action="store", type=int)

    @staticmethod
    def overrides(cfg: SimulationConfig, args: Namespace) -> SimulationConfig:
        for item in getattr(args, "set", []) or []:
            key, sep, value = item.partition("=")
            if not sep:
                raise ConfigException(f"override {item!r}, want KEY=VALUE")
            cfg = set_path(cfg, key.strip(), value.strip())
        scalars = {
            "rng_seed": getattr(args, "seed", None),
            "max_steps": getattr(args, "steps", None),
            "snapshot_every": getattr(args, "snapshot_every", None),
            "metrics_every": getattr(args, "metrics_every", None),
        }
        for key, value in scalars.items():
            if value is not None:
                cfg = set_path(cfg, key, value)
        return cfg

    def config(self, args: Namespace) -> SimulationConfig:
        cfg = load_preset(args.preset)
        if args.config:
            cfg = load_config(args.config, base=cfg)
        return self.overrides(cfg, args)

    @abstractmethod
    def run(self, args: Namespace) -> int:  # noqa
        pass


class _Progress(RunObserver):
    def on_finish(self, result) -> None:  # noqa
        print(json.dumps(summarize(result), sort_keys=True))


class RunCommand(SimulationCommand):
    @override
    @staticmethod
    def name() -> str:  # noqa
        return "run"

    @override
    @classmethod
    def help(cls) -> str:  # noqa
        return "run a simulation, writing snapshots, events and metrics"

    @override
    @classmethod
    def register(cls, parser: ArgumentParser) -> None:  # noqa
        cls.register_config(parser)
        cls.register_intervals(parser)
        parser.add_argument("--stop-on", action="store", type=str, help="stop at the first event of this kind")
        parser.add_argument("--stop-on-bits", action="store", type=str, help="only stop on events with these bits")

    @override
    def run(self, args: Namespace) -> int:  # noqa
        cfg = self.config(args)
        if args.stop_on:
            cfg = cfg.with_overrides(stop_on=_event_kind(args.stop_on))
        if args.stop_on_bits:
            cfg = set_path(cfg, "stop_on_bits", args.stop_on_bits)
        out = RunDirectory(args.out)
        try:
            Simulation(cfg, observers=[out, _Progress()]).run()
        finally:
            out.close()
        return 0


class RenderCommand(Command):
    @override
    @staticmethod
    def name() -> str:  # noqa
        return "render"

    @override
    @classmethod
    def help(cls) -> str:  # noqa
        return "draw a snapshot as SVG"

    @override
    @classmethod
    def register(cls, parser: ArgumentParser) -> None:  # noqa
        parser.add_argument("snapshot", action="store", type=str)
        parser.add_argument("--out", action="store", type=str, help="SVG file, stdout when omitted")
        parser.add_argument(
            "--width", action="store", type=_positive_int, default=RenderSpec().canvas_width, help="pixels"
        )

    @override
    def run(self, args: Namespace) -> int:  # noqa
        state, cfg = load_snapshot(args.snapshot)
        svg = render_svg(state.codons, cfg.bounds, RenderSpec(canvas_width=args.width), cfg.geometry)
        if args.out:
            _write_text(Path(args.out), svg)
        else:
            sys.stdout.write(svg)
        return 0


class ReplayCommand(SimulationCommand):
    @override
    @staticmethod
    def name() -> str:  # noqa
        return "replay"

    @override
    @classmethod
    def help(cls) -> str:  # noqa
        return "continue a run from one of its snapshots"

    @override
    @classmethod
    def register(cls, parser: ArgumentParser) -> None:  # noqa
        parser.add_argument("snapshot", action="store", type=str)
        parser.add_argument("--steps", action="store", type=int, required=True, help="steps to run")
        cls.register_intervals(parser)

    @override
    def run(self, args: Namespace) -> int:  # noqa
        state, cfg = load_snapshot(args.snapshot)
        cfg = self.overrides(cfg, args)
        out = RunDirectory(args.out)
        try:
            Simulation(cfg, state=state, observers=[out, _Progress()]).run(args.steps)
        finally:
            out.close()
        return 0


class SweepCommand(SimulationCommand):
    @override
    @staticmethod
    def name() -> str:  # noqa
        return "sweep"

    @override
    @classmethod
    def help(cls) -> str:  # noqa
        return "time the first event of a kind over a grid of parameters"

    @override
    @classmethod
    def register(cls, parser: ArgumentParser) -> None:  # noqa
        cls.register_config(parser)
        parser.add_argument(
            "--axis",
            action="append",
            required=True,
            metavar="KEY[+KEY]=V1,V2",
            help="a swept parameter, repeatable",
        )
        parser.add_argument("--stop-on", action="store", type=str, default=str(EventKind.SPONTANEOUS_DIMER))
        parser.add_argument("--stop-on-bits", action="store", type=str)
        _add_seed_range(parser, 10)
        parser.add_argument("--out", action="store", type=str, help="directory for sweep.csv")

    @override
    def run(self, args: Namespace) -> int:  # noqa
        cfg = self.config(args)
        axes = [SweepAxis.parse(a) for a in args.axis]
        cells = sweep(cfg, axes, _seeds(args), _event_kind(args.stop_on), args.stop_on_bits)
        write_sweep(axes, cells, sys.stdout)
        if args.out:
            path = Path(args.out) / "sweep.csv"
            try:
                path.parent.mkdir(parents=True, exist_ok=True)
                with path.open("w", encoding="utf-8", newline="") as f:
                    write_sweep(axes, cells, f)
            except OSError as e:
                raise OutputException(str(path), e.strerror or "cannot write") from None
        return 0


class VerifyCommand(SimulationCommand):
    @override
    @staticmethod
    def name() -> str:  # noqa
        return "verify"

    @override
    @classmethod
    def help(cls) -> str:  # noqa
        return "check the model invariants on a short simulation"

    @override
    @classmethod
    def register(cls, parser: ArgumentParser) -> None:  # noqa
        cls.register_config(parser)
        parser.add_argument("--contacts-every", action="store", type=int, default=50)

    @override
    def run(self, args: Namespace) -> int:  # noqa
        cfg = self.config(args).with_overrides(stop_on=None, snapshot_every=0)
        steps = args.steps if args.steps is not None else 2000
        report = verify_run(cfg, steps, contacts_every=args.contacts_every)
        for v in report.violations:
            print(v)
        print(f"{report.steps} steps, {len(report.violations)} violations")
        return 0 if report.ok else 1


class CalibrateCommand(SimulationCommand):
    @override
    @staticmethod
    def name() -> str:  # noqa
        return "calibrate"

    @override
    @classmethod
    def help(cls) -> str:  # noqa
        return "search the brownian amplitude at which the seed replicates"

    @override
    @classmethod
    def register(cls, parser: ArgumentParser) -> None:  # noqa
        cls.register_config(parser)
        _add_seed_range(parser, 10)
        parser.add_argument("--threshold", action="store", type=float, default=0.8, help="wanted success fraction")
        parser.add_argument("--low", action="store", type=float, default=0.01)
        parser.add_argument("--high", action="store", type=float, default=2.0)
        parser.add_argument("--rounds", action="store", type=int, default=5, help="bisection rounds")

    @override
    def run(self, args: Namespace) -> int:  # noqa
        cfg = self.config(args)
        result = calibrate_brownian(
            cfg,
            _seeds(args),
            budget=cfg.max_steps,
            threshold=args.threshold,
            low=args.low,
            high=args.high,
            rounds=args.rounds,
        )
        for t in result.trials:
            print(f"{t.linear_amplitude}\t{t.angular_amplitude}\t{t.success}")
        print(
            json.dumps(
                {
                    "brownian_linear_amplitude": result.linear_amplitude,
                    "brownian_angular_amplitude": result.angular_amplitude,
                    "success": result.success,
                    "passed": result.passed,
                },
                sort_keys=True,
            )
        )
        return 0 if result.passed else 1


COMMANDS: tuple[type[Command], ...] = (
    RunCommand,
    RenderCommand,
    ReplayCommand,
    SweepCommand,
    VerifyCommand,
    CalibrateCommand,
)


def new_parser(prog: str = "codonsoup") -> Parser:
    """Return the parser with every subcommand registered."""
    p = Parser(prog=prog, description="A soup of self-replicating codons.")
    p.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug logs")
    for c in COMMANDS:
        p.add_command_class(c)
    return p


def _setup_logging(argv: list[str]) -> None:
    verbose = 0
    for a in argv:
        if a in ("-v", "--verbose"):
            verbose += 1
        elif a.startswith("-v") and set(a[1:]) == {"v"}:
            verbose += len(a) - 1
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(asctime)s %(levelname)s %(name)s %(message)s")


def main(argv: list[str] | None = None) -> int:
    """Run the command line, returning the exit code."""
    args = sys.argv[1:] if argv is None else argv
    _setup_logging(args)
    try:
        return new_parser().run(args)
    except (ParserException, ConfigException, SeedStrandException) as e:
        print(f"codonsoup: {e}", file=sys.stderr)
        return 1
    except (SnapshotException, OutputException) as e:
        print(f"codonsoup: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"codonsoup: {e.filename}: {e.strerror}", file=sys.stderr)
        return 2
