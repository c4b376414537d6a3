import sys
from fractions import Fraction

import pytest

from dirlat.metric import Metric


def make_metric(rows, depot=0, s=None, t=None, symmetric=False):
    return Metric(tuple(tuple(Fraction(v) for v in r) for r in rows), depot, s, t, symmetric)


def uniform(n, value=1, **kw):
    return make_metric([[0 if i == j else value for j in range(n)] for i in range(n)], **kw)


@pytest.fixture
def tri():
    # r=0, a=1, b=2 with c(r,a)=c(a,b)=1, c(r,b)=2
    return make_metric([[0, 1, 2], [1, 0, 1], [2, 1, 0]], 0, 0, 2, True)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
