"""Exception taxonomy shared across the package.

Two broad families matter to callers: ValidationFailure (bad input, bad state,
bad model output) and ProviderFailure (the completion provider or its fixture
store let us down). The CLI maps these onto exit codes, everything else is an
internal error.
"""

from __future__ import annotations


class MeetingFlowError(Exception):
    """Base class for every error this package raises on purpose."""


class ValidationFailure(MeetingFlowError):
    """Input, state, or model output failed a documented check."""


class ProviderFailure(MeetingFlowError):
    """The completion provider (live endpoint or fixture store) failed."""


# --- validation family -----------------------------------------------------

class InvariantViolation(ValidationFailure):
    """A constructor-level invariant was violated (empty text, bad range)."""


class ParseFailure(ValidationFailure):
    """Model output could not be turned into the requested structure.

    ``code`` is a stable machine-readable tag for the kind of failure;
    pipeline code uses it to decide whether an exhausted retry loop should
    surface as a domain error (duplicate names, bad cardinality) or stay a
    plain structured-output failure.
    """

    def __init__(self, reason: str, code: str | None = None):
        super().__init__(reason)
        self.reason = reason
        self.code = code


class PlanInvalid(ValidationFailure):
    """A generated plan still violated validation after its retry cycle."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class ToolInvalid(ValidationFailure):
    """A generated focus tool violated its constraints after retries."""


class LayoutInvalid(ValidationFailure):
    """A generated layout set violated its constraints after retries."""


class PreconditionViolation(ValidationFailure):
    """An operation was invoked while its stated precondition did not hold."""


class IncompleteSelection(ValidationFailure):
    """A focus response did not cover the feature list exactly."""

    def __init__(self, missing: list[str], unknown: list[str]):
        detail = []
        if missing:
            detail.append("missing: " + ", ".join(missing))
        if unknown:
            detail.append("unknown: " + ", ".join(unknown))
        super().__init__("selection does not cover the feature list (%s)" % "; ".join(detail))
        self.missing = missing
        self.unknown = unknown


class UnknownParticipant(ValidationFailure):
    """The acting participant is not a member of the session."""


class InsufficientResponses(ValidationFailure):
    """Divergence needs at least two submitted responses."""


class ScriptExhausted(ValidationFailure):
    """A scripted classifier ran past the end of its verdict list."""


class CountOutOfRange(ValidationFailure):
    """Tiling was asked for a pane count outside 1..5."""


class ProposalAlreadyOpen(ValidationFailure):
    """A transition proposal is already open for this session."""


class ProposalNotOpen(ValidationFailure):
    """No open proposal matches the request."""


class DeadlinePassed(ValidationFailure):
    """The proposal's abort window has already elapsed."""


class LifecycleViolation(ValidationFailure):
    """The command is not valid in the session's current lifecycle state."""


class PermissionDenied(ValidationFailure):
    """The acting participant lacks the privilege for this command."""


class ProtocolError(ValidationFailure):
    """A wire message was malformed or of an unknown type."""


class UnknownSession(ValidationFailure):
    """A message addressed a session id this engine does not hold."""


class GapDetected(ValidationFailure):
    """An event log's sequence numbers are not gapless from 1."""

    def __init__(self, expected: int, found: int):
        super().__init__(f"event log gap: expected seq {expected}, found {found}")
        self.expected = expected
        self.found = found


class UnknownEventKind(ValidationFailure):
    """An event log contains a kind this engine does not know."""


class ScenarioInvalid(ValidationFailure):
    """A scenario script failed schema or referential checks."""


class ConfigInvalid(ValidationFailure):
    """A configuration file or provider configuration is unusable."""


# --- provider family --------------------------------------------------------

class ProviderUnavailable(ProviderFailure):
    """Live endpoint unreachable or rejected us, after transport retries."""


class FixtureMissing(ProviderFailure):
    """Replay mode found no fixture for the request fingerprint."""

    def __init__(self, fingerprint: str, path=None):
        super().__init__(f"no recorded fixture for request {fingerprint}")
        self.fingerprint = fingerprint
        self.path = path


class StructuredOutputExhausted(ProviderFailure):
    """Every attempt at a structured completion failed to parse.

    Carries one reason per failed attempt, in order, plus the final
    ParseFailure for callers that branch on its code.
    """

    def __init__(self, reasons: list[str], last_failure: ParseFailure | None = None):
        super().__init__(
            "structured output failed after %d attempt(s): %s"
            % (len(reasons), " | ".join(reasons))
        )
        self.reasons = reasons
        self.last_failure = last_failure
