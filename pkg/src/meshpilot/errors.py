"""Exception hierarchy shared across the package."""


class MeshPilotError(Exception):
    """Base class for all package errors."""


class ConfigError(MeshPilotError, ValueError):
    """Invalid configuration or precondition on construction parameters."""


class InvalidActionError(MeshPilotError):
    """Action is not a member of the valid action set for the mesh."""


class StaleActionError(MeshPilotError):
    """Update action issued with no pending update to consume."""


class NoCleanChannelError(MeshPilotError):
    """Every channel is jammed; no switch target exists."""


class CorpusFormatError(MeshPilotError):
    """Malformed corpus file."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class AlignmentSizeError(MeshPilotError, ValueError):
    """Token sequences too long for exhaustive alignment search."""


class BackendError(MeshPilotError):
    """Base class for chat backend failures."""


class BackendUnavailable(BackendError):
    """Remote backend still failing after all retries."""


class ProtocolError(BackendError):
    """Remote backend replied with something that is not a chat completion."""


class ReplayMissError(BackendError, KeyError):
    """Scripted replay table has no response for the requested step."""
