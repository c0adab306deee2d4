"""Noncommutative rational functions on the row-ball: realizations, Sarason
outer functions, Fejér–Riesz factorization and a truncated Fock-space oracle."""

from .errors import (
    CapExceeded,
    Indeterminate,
    InnerSymbol,
    NCRatError,
    NotContractive,
    NotHermitian,
    NotPositive,
    NotPure,
    SingularAtZero,
    SingularPencil,
)
from .freecore import FreeSeries, OrderExceeded, Word
from .realize import DescriptorRealization, FMRealization

__version__ = "0.1.0"

__all__ = [
    "FreeSeries",
    "Word",
    "FMRealization",
    "DescriptorRealization",
    "NCRatError",
    "OrderExceeded",
    "SingularPencil",
    "SingularAtZero",
    "NotPure",
    "Indeterminate",
    "NotContractive",
    "NotPositive",
    "InnerSymbol",
    "NotHermitian",
    "CapExceeded",
]
