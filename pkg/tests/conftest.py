import pytest

_CRITERIA: list[tuple[str, bool, str]] = []


class _Criterion:
    def __init__(self, label):
        self.label = label
        self.detail = ""

    def check(self, ok: bool, detail: str = "") -> None:
        self.detail = detail
        _CRITERIA.append((self.label, bool(ok), detail))
        assert ok, f"{self.label}: {detail}"


@pytest.fixture
def criterion(request):
    marker = request.node.get_closest_marker("criterion")
    label = marker.args[0] if marker else request.node.name
    return _Criterion(label)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion label")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in _CRITERIA:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
