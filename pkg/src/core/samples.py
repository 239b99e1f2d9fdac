from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from src.utils.errors import InputDataError


class Label(str, Enum):
    SIGNAL = "signal"
    NOISE = "noise"


@dataclass(frozen=True, eq=False)
class PValueSample:
    """
    A set of p-values with their original positions.

    values are kept in input order; sorted_values / sort_permutation give the
    ranked view (stable sort, so tied p-values keep their input order).
    is_signal is the optional ground truth, aligned with values.
    """

    values: np.ndarray
    is_signal: Optional[np.ndarray] = None
    _sorted: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise InputDataError(f"p-values must be one-dimensional, got shape {values.shape}")
        bad = np.flatnonzero(np.isnan(values) | (values < 0.0) | (values > 1.0))
        if bad.size:
            raise InputDataError(
                f"p-value at index {int(bad[0])} is outside [0, 1]: {values[bad[0]]!r}"
            )
        object.__setattr__(self, "values", values)

        if self.is_signal is not None:
            labels = np.asarray(self.is_signal, dtype=bool)
            if labels.shape != values.shape:
                raise InputDataError(
                    f"labels length {labels.size} does not match {values.size} p-values"
                )
            object.__setattr__(self, "is_signal", labels)

        object.__setattr__(self, "_sorted", np.argsort(values, kind="stable"))

    @classmethod
    def from_labels(cls, values: Sequence[float], labels: Sequence[Label]) -> "PValueSample":
        return cls(np.asarray(values, dtype=float), np.array([Label(l) == Label.SIGNAL for l in labels]))

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def has_labels(self) -> bool:
        return self.is_signal is not None

    @property
    def sort_permutation(self) -> np.ndarray:
        """rank (0-based) -> original index."""
        return self._sorted

    @cached_property
    def sorted_values(self) -> np.ndarray:
        return self.values[self._sorted]

    @cached_property
    def sorted_is_signal(self) -> np.ndarray:
        if self.is_signal is None:
            raise InputDataError("This operation needs signal/noise labels")
        return self.is_signal[self._sorted]

    @property
    def n_signals(self) -> int:
        if self.is_signal is None:
            raise InputDataError("This operation needs signal/noise labels")
        return int(self.is_signal.sum())
