"""Exception types shared across the pipeline."""


class GeyserError(Exception):
    """Base class for all pipeline errors."""


class MissingColumn(GeyserError):
    pass


class EmptyResult(GeyserError):
    """Every record was removed by the filter rules."""


class UnresolvableEnd(GeyserError):
    def __init__(self, indices):
        self.indices = list(indices)
        super().__init__(f"records without end or duration at indices {self.indices}")


class DegenerateDesign(GeyserError):
    pass


class EmptyInput(GeyserError):
    pass


class MismatchedActuals(GeyserError):
    pass


class NoMatches(GeyserError):
    pass


class NetworkError(GeyserError):
    pass


class HttpStatusError(GeyserError):
    def __init__(self, status, url):
        self.status = status
        self.url = url
        super().__init__(f"HTTP {status} from {url}")


class NonConvergenceWarning(RuntimeWarning):
    """No multistart run met the convergence criteria within the iteration cap."""
