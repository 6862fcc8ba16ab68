"""Exception types shared across the package."""


class CovacastError(Exception):
    """Base class for all covacast errors."""


# --- series / splitting ---

class RangeOutOfBounds(CovacastError):
    pass


class OverlappingRanges(CovacastError):
    pass


class HorizonTooLarge(CovacastError):
    pass


class FrequencyGap(CovacastError):
    pass


# --- covariates ---

class RatioOutOfRange(CovacastError):
    pass


# --- prompt rendering ---

class MissingCovariates(CovacastError):
    pass


class CovariateMisaligned(CovacastError):
    pass


class MissingKnowledgeText(CovacastError):
    pass


class NonFiniteValue(CovacastError):
    pass


# --- backends ---

class BackendUnavailable(CovacastError):
    pass


class AuthMissing(CovacastError):
    pass


class MalformedResponse(CovacastError):
    pass


class UnparseablePrompt(CovacastError):
    pass


# --- reply parsing ---

class ParseError(CovacastError):
    """Base for forecast-extraction failures; triggers the retry-once policy."""


class NoNumbersFound(ParseError):
    pass


class NonFiniteToken(ParseError):
    pass


class CountMismatch(ParseError):
    def __init__(self, found: int, expected: int):
        super().__init__(f"found {found} numbers, expected {expected}")
        self.found = found
        self.expected = expected


# --- metrics ---

class LengthMismatch(CovacastError):
    pass


class EmptyInput(CovacastError):
    pass


# --- baselines ---

class HistoryTooShort(CovacastError):
    pass


class InsufficientData(CovacastError):
    pass


# --- experiment orchestration ---

class SampleTooSmall(CovacastError):
    pass


class EmptyRecordSet(CovacastError):
    pass


class AllTasksFailed(CovacastError):
    pass


# --- ingest / config / reporting ---

class MissingColumn(CovacastError):
    pass


class UnparseableTimestamp(CovacastError):
    pass


class NonNumericValue(CovacastError):
    pass


class ConfigError(CovacastError):
    pass


class EmptyLog(CovacastError):
    pass
