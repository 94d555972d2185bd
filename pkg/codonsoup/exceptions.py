"""Set of codonsoup's exceptions."""


class CodonsoupException(Exception):
    """Root of all exceptions raised by codonsoup."""


class ConfigException(CodonsoupException):
    """An invalid simulation config."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None):  # noqa
        self.message = message
        self.key = key
        self.line = line
        super().__init__(self.__format())

    def __format(self) -> str:
        where = []
        if self.key:
            where.append(f"key {self.key}")
        if self.line is not None:
            where.append(f"line {self.line}")
        if not where:
            return self.message
        return f"{', '.join(where)}: {self.message}"


class SeedStrandException(CodonsoupException):
    """A seed strand that cannot be encoded or placed."""


class SnapshotException(CodonsoupException):
    """A snapshot document that cannot be read."""


class OutputException(CodonsoupException):
    """An IO failure while reading or writing simulation artifacts."""

    def __init__(self, path: str, reason: str):  # noqa
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")


class ParserException(CodonsoupException):
    """An exception occurred in :class: `Parser`."""


class NoSubcommandsException(ParserException):
    """An exception when :class: `Parser` without subcommands run."""


class NoDefaultRunException(ParserException):
    """An exception when :class: `Parser` without default run implementation."""
