"""Univariate power-consumption forecasting toolkit.

From-scratch LSTM/BLSTM forecasters trained under expanding-window
time-series cross-validation, evaluated on holdout months, and compared
across datasets with Friedman/Nemenyi rank tests.
"""

from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
