import numpy as np

from metamargin.losses import ScoringFunction


class TableScorer(ScoringFunction):
    """Test scorer: x[0] indexes a fixed table of score vectors."""

    def __init__(self, table, b=None):
        self.table = np.asarray(table, dtype=np.float64)
        self.b = float(b) if b is not None else float(np.abs(self.table).max() or 1.0)

    def scores(self, x):
        return self.table[int(np.asarray(x).flat[0])]


class ConstantScorer(ScoringFunction):
    """All classes score the same constant value."""

    def __init__(self, k, value=0.0, b=1.0):
        self.k = k
        self.value = float(value)
        self.b = float(b)

    def scores(self, x):
        return np.full(self.k, self.value)
