import sys
import os

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_criteria = []


def pytest_configure(config):
    config.addinivalue_line('markers', 'criterion(n, title): acceptance criterion')


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker('criterion')
    if mark is None:
        return
    if rep.when == 'call' or (rep.when == 'setup' and not rep.passed):
        detail = dict(item.user_properties).get('detail', '')
        _criteria.append((mark.args[0], mark.args[1], rep.passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section('acceptance criteria')
    for n, title, ok, detail in sorted(_criteria):
        line = 'criterion {:>2} {}: {}'.format(n, 'PASS' if ok else 'FAIL', title)
        if detail:
            line += ' ({})'.format(detail)
        terminalreporter.write_line(line)
