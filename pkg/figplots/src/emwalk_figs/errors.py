class RenderError(Exception):
    """Base class for rendering failures."""


class MissingFile(RenderError):
    """A referenced spec or CSV file does not exist."""


class SchemaMismatch(RenderError):
    """The input does not match the documented experiment CSV layout."""
