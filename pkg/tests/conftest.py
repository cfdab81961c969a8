import numpy as np
import pytest

from fairimpute.amputation import mask_dataset
from fairimpute.data import Dataset

_CRITERIA = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(number, title, passed, detail)``."""

    def record(number, title, passed, detail=""):
        _CRITERIA.append((number, title, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(_CRITERIA, key=lambda c: c[0]):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number}. {title}: {detail}")


def make_masked(values, mask, sensitive_col=None, majority_value=1.0, response_col=None, names=None):
    values = np.asarray(values, dtype=float)
    names = names or [f"c{j}" for j in range(values.shape[1])]
    ds = Dataset(values, names, sensitive_col=sensitive_col, majority_value=majority_value,
                 response_col=response_col)
    return mask_dataset(ds, mask)


def random_masked(rng, n=None, p=None, with_group=True, missing=0.2):
    """Random dataset with a binary group column last and MCAR holes in the features."""
    n = n or int(rng.integers(8, 31))
    p = p or int(rng.integers(2, 6))
    feats = rng.normal(size=(n, p))
    if with_group:
        a = np.zeros(n)
        a[rng.permutation(n)[: max(2, n // 2)]] = 1.0
        values = np.column_stack([feats, a])
    else:
        values = feats
    mask = np.ones(values.shape, dtype=int)
    hide = rng.random((n, p)) < missing
    # keep at least one observed donor per group in every column
    for j in range(p):
        if with_group:
            for g in (0.0, 1.0):
                rows = np.flatnonzero(values[:, -1] == g)
                hide[rows[0], j] = False
        else:
            hide[0, j] = False
    mask[:, :p] = np.where(hide, 0, 1)
    return make_masked(values, mask, sensitive_col=p if with_group else None)
