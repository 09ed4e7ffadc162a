"""Exception types shared across the package."""


class InputError(ValueError):
    """Invalid user input: bad shapes, labels, files, flags or parameters."""


class ConvergenceError(RuntimeError):
    """A solver ran out of iterations before reaching its tolerance.

    Carries the diagnostic that measures how far from optimal the solver
    stopped (max KKT violation for the SVM, duality-gap estimate for the
    SVDD, gradient norm for logistic regression) and, when available, the
    partially trained model.
    """

    def __init__(self, message, diagnostic=None, model=None):
        super().__init__(message)
        self.diagnostic = diagnostic
        self.model = model
