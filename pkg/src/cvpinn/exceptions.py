"""Error types shared across the package."""


class TruncationError(RuntimeError):
    """A state lost too much norm to the Fock cutoff to be trusted.

    Raised whenever a squared norm falls below the 0.99 guard; carries the
    offending norm and, where known, the input that produced it.
    """

    def __init__(self, message, norm=None, x=None):
        super().__init__(message)
        self.norm = norm
        self.x = x


class DivergenceError(RuntimeError):
    """Training produced a non-finite loss or gradient.

    Carries the optimizer iteration (1-based) at which the run blew up.
    """

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration
