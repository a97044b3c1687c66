"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid user-supplied configuration or arguments."""


class NumericalError(ArithmeticError):
    """A numerical procedure could not produce a meaningful result."""


class FieldFormatError(ValueError):
    """A field-set directory does not match the on-disk format."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
