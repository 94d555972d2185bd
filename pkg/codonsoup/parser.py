""":class: `argparse.ArgumentParser` extensions for subcommand."""

import sys
from argparse import ArgumentParser, Namespace
from typing import IO, Callable, NoReturn, override

from .command import Command, CommandRegistry
from .exceptions import NoDefaultRunException, NoSubcommandsException, ParserException

DefaultRun = Callable[[ArgumentParser, list[str] | None, Namespace | None], int]


class HelpCommand(Command):
    """Default help command."""

    @override
    @staticmethod
    def name() -> str:  # noqa
        return "help"

    @override
    @classmethod
    def help(cls) -> str:  # noqa
        return "show help and exit"

    @override
    def run(self, _) -> int:  # noqa
        return 0

    @override
    @classmethod
    def register(cls, parser: ArgumentParser) -> None:  # noqa
        parser.add_argument("subcommand", nargs="?")


def default_run_print_help(
    parser: ArgumentParser,
    args: list[str] | None = None,
    namespace: Namespace | None = None,
) -> int:
    """Print help of `parser`."""
    parser.print_help()
    return 0


class Parser(ArgumentParser):
    """An ArgumentParser using :class: `Command`, whose `run` returns an exit code."""

    __registry: CommandRegistry
    __subparsers: dict[str, ArgumentParser]
    __default_run: DefaultRun | None
    __registered: bool

    def __init__(
        self,
        add_help=False,
        default_run: DefaultRun | None = default_run_print_help,
        *args,
        **kwargs,
    ):  # noqa
        """
        Return a new `Parser`.

        :add_help: add `-h/--help` option.
        :default_run: set default_run function. This has the same effect as overriding `default_run`.
        """
        kwargs["add_help"] = add_help
        super().__init__(*args, **kwargs)
        self.__default_run = default_run
        self.__registry = CommandRegistry()
        self.__subparsers = {}
        self.__registered = False
        self.add_command_class(HelpCommand)

    def error(self, message: str) -> NoReturn:  # noqa
        # avoid exiting directly on parse_args error
        raise ParserException(message)

    def add_command_class(self, command_class: type) -> None:
        """
        Append a subcommand.

        :param command_class: a concrete subclass of :class: `Command`
        """
        if self.__registered:
            raise ParserException("commands are already registered")
        self.__registry.add(command_class)

    def _register_commands(self) -> None:
        if self.__registered:
            return
        names = self.__registry.keys()
        if not names:
            raise NoSubcommandsException()
        sp = self.add_subparsers(dest="command")
        for command_name in names:
            c = self.__registry.get(command_name)
            if not c:
                raise NoSubcommandsException(command_name)
            self.__subparsers[command_name] = c.register_parser(sp)
        self.__registered = True

    def run(self, args: list[str] | None = None, namespace: Namespace | None = None) -> int:
        """
        Parse arguments and try to execute subcommand.

        :param args: (optional) string list to be parsed
        :param namespace: (optional) object to be assigned attributes
        :return: exit code, 1 when the arguments do not parse
        """
        parsed = self.parse_args(args=args, namespace=namespace)
        if parsed is None:
            return 1
        if not parsed.command:
            return self.default_run(args=args, namespace=namespace)
        if parsed.command == HelpCommand.name():
            return self._help(parsed.subcommand)
        c = self.__registry.get_instance(parsed.command)
        if not c:
            raise NoSubcommandsException(parsed.command)
        return c.run(parsed)

    def _help(self, subcommand: str | None) -> int:
        if not subcommand:
            self.print_help()
            return 0
        subparser = self.__subparsers.get(subcommand)
        if not subparser:
            print(f"unknown command: {subcommand}", file=sys.stderr)
            self.print_help(file=sys.stderr)
            return 1
        subparser.print_help()
        print()
        print(self.__registry.get(subcommand).help())  # type: ignore[union-attr]
        return 0

    def default_run(self, args: list[str] | None = None, namespace: Namespace | None = None) -> int:
        """
        Execute a process when no subcommand specified.

        You can override this if you also want to run without subcommand name.

        :param args: (optional) string list to be parsed
        :param namespace: (optional) object to be assigned attributes
        """
        if self.__default_run:
            return self.__default_run(self, args, namespace)
        raise NoDefaultRunException()

    def parse_args(self, args=None, namespace=None):  # type: ignore[override] # noqa
        self._register_commands()
        try:
            return super().parse_args(args=args, namespace=namespace)
        except ParserException as e:
            self.on_parse_exception(exc=e, file=sys.stderr)
            return None

    def on_parse_exception(self, exc: Exception, file: IO[str] | None = None) -> None:
        """
        Execute on parse exception.

        :param exc: raised exception on parse
        :param file: output stream
        """
        print(exc, file=file)
        self.print_help(file=file)
