"""Benchmarks for the fairness of missing-data imputation.

Inject missingness under MCAR/MAR/MNAR mechanisms, impute with classical
methods, and measure how imputation and downstream prediction errors differ
between sensitive groups.
"""

from .amputation import MaskedDataset, MechanismSpec, ampute, mechanism, missing_probability
from .data import Dataset, GroupView, Schema, group_partition, load_csv, normalize_columns, split_train_test
from .imputers import IMPUTERS, ImputedDataset, impute
from .metrics import eod, iapd, imputation_metrics, msie, red, variance_baselines

__version__ = "0.1.0"
