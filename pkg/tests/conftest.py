import pytest

VERDICTS = pytest.StashKey[list]()


@pytest.hookimpl(wrapper=True, tryfirst=True)
def pytest_runtest_makereport(item, call):
    rep = yield
    setattr(item, f"rep_{rep.when}", rep)
    return rep


class Verdict:
    def __init__(self):
        self.number = None
        self.title = ""
        self.details: list[str] = []

    def __call__(self, number: int, title: str):
        self.number, self.title = number, title

    def note(self, text: str):
        self.details.append(text)


@pytest.fixture
def verdict(request, capsys):
    """Prints one PASS/FAIL line for the acceptance criterion a test covers."""
    v = Verdict()
    yield v
    rep = getattr(request.node, "rep_call", None)
    status = "PASS" if rep is not None and rep.passed else "FAIL"
    line = f"criterion {v.number}: {status}  {v.title}"
    if v.details:
        line += " (" + "; ".join(v.details) + ")"
    request.config.stash.setdefault(VERDICTS, []).append((v.number, line))
    with capsys.disabled():
        print("\n" + line)


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
