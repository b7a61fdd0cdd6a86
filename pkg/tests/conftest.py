import contextlib

import pytest

_RESULTS = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Context manager that records one PASS/FAIL line per acceptance criterion."""
    results = request.config.stash.setdefault(_RESULTS, [])

    @contextlib.contextmanager
    def check(number, title):
        info = {}
        try:
            yield info
        except AssertionError:
            status = "FAIL"
            raise
        else:
            status = "PASS"
        finally:
            line = f"{status} criterion {number:>2}: {title}"
            if info.get("detail"):
                line += f" [{info['detail']}]"
            results.append((number, line))
            print(line)

    return check


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_RESULTS, [])
    if not results:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for _, line in sorted(results):
        terminalreporter.write_line(line)
