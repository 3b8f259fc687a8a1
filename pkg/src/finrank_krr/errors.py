"""Exception types raised by the library."""


class DomainError(ValueError):
    """Input point lies outside the kernel's input space."""


class RankBudgetError(ValueError):
    """Requested rank exceeds what a kernel family implements."""


class IllPosedError(ValueError):
    """Ridgeless fit with a rank-deficient kernel matrix.

    Pass ``min_norm=True`` to ``fit`` to get the minimum-norm interpolant.
    """


class SingularityError(ValueError):
    """``I + Delta + lam * Lambda^{-1}`` is singular (only possible at lam = 0)."""


class OracleMisuseError(ValueError):
    """A noiseless-only oracle received a fit on noisy labels."""


class DivergenceError(ValueError):
    """A bound is undefined at the given arguments (e.g. Bach's at lam = 0)."""


class ConditioningWarning(UserWarning):
    """Estimated condition number of the dual system exceeds 1e12."""
