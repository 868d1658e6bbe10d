class ToolkitError(Exception):
    """Base class for every failure the toolkit reports to its callers."""


class ConfigurationError(ToolkitError):
    pass


class ParseFailureError(ToolkitError):

    def __init__(self, message, line_numbers=()):
        super().__init__(message)
        self.line_numbers = tuple(line_numbers)


class EmptyCorpusError(ToolkitError):
    pass


class BalanceFailureError(ToolkitError):

    def __init__(self, message, language_id):
        super().__init__(message)
        self.language_id = language_id


class NetworkError(ToolkitError):

    retriable = True

    def __init__(self, message, page_index):
        super().__init__(message)
        self.page_index = page_index


class VocabularyUnderflowError(ToolkitError):
    pass


class EmptyVocabularyError(ToolkitError):
    pass


class UnknownTokenError(ToolkitError, KeyError):

    def __init__(self, token, language_id=None):
        where = f" in space '{language_id}'" if language_id else ""
        super().__init__(f"token '{token}' cannot be resolved{where}")
        self.token = token

    def __str__(self):
        return self.args[0]


class EmbeddingFormatError(ToolkitError):

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class InsufficientAnchorsError(ToolkitError):
    pass


class NumericError(ToolkitError):
    pass


class EmptyEvaluationError(ToolkitError):
    pass


class RunFailureError(ToolkitError):

    def __init__(self, message, run_index):
        super().__init__(f"run {run_index} failed: {message}")
        self.run_index = run_index


class DegenerateVarianceError(ToolkitError):
    pass


class ConsistencyError(ToolkitError):
    pass
