import pytest


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "acceptance(num, title): criterion covered by an acceptance test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    tr = item.config.pluginmanager.getplugin("terminalreporter")
    if tr is None:
        return
    status = "PASS" if report.passed else "FAIL"
    num, title = marker.args
    tr.write_line(f"acceptance criterion {num} ({title}): {status}")
