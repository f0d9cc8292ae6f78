class BudgetExceeded(RuntimeError):
    """A search gave up because it hit its configured cap; no answer is implied."""
