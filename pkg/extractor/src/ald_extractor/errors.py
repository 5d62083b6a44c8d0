"""Errors raised by the extractor."""


class ExtractorError(Exception):
    """Base class."""


class UnknownModel(ExtractorError):
    """Requested model is not in the registry."""


class HeadNotFound(ExtractorError):
    """The model has no single final linear layer to export."""


class IndexOutOfRange(ExtractorError):
    """A selection references neurons beyond the model head width."""


class ShapeMismatch(ExtractorError):
    """A weight matrix does not match the model head shape."""


class BadContainer(ExtractorError):
    """An ALDW file is malformed."""
