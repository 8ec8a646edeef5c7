class BTStrataError(Exception):
    pass


class PrecisionExhausted(BTStrataError):
    pass


class FeasibilityExceeded(BTStrataError):
    pass


class NotAVertex(BTStrataError):
    def __init__(self, msg, failed=None):
        super().__init__(msg)
        self.failed = failed


class OddIndexViolation(BTStrataError):
    pass


class NotContained(BTStrataError):
    pass


class InvalidTypeRange(BTStrataError):
    pass


class SearchExhausted(BTStrataError):
    pass


class InvalidSignatureParameters(BTStrataError):
    pass


class SignatureMismatch(BTStrataError):
    pass


class NonSupersingularPattern(BTStrataError):
    pass


class DescentFailure(BTStrataError):
    pass


class NotMinimalRep(BTStrataError):
    pass


class InvalidParameters(BTStrataError):
    pass
