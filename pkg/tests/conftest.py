import pytest

from connect4lab.qlearning import TrainingSchedule, save_qtable, train
from connect4lab.rng import derive

DESK_LABEL = "QLearning-10k"
DESK_SCHEDULE = TrainingSchedule(total_games=10_000, expert_games=2000)


@pytest.fixture(scope="session")
def desk_qtable(tmp_path_factory):
    """The desk-scale Q-agent (10k games per seat, first 2000 against the expert), saved to disk."""
    trained = train(DESK_SCHEDULE, rng=derive(7, "train", DESK_LABEL))
    path = tmp_path_factory.mktemp("qtables") / f"{DESK_LABEL}.qtable"
    save_qtable(trained.qtable, path)
    return trained, path


@pytest.fixture(scope="session")
def selfplay_qtable():
    """A 10k-game Q-agent trained by pure self-play, no expert games."""
    return train(TrainingSchedule(total_games=10_000), rng=derive(0, "self"))


# acceptance summary: one line per criterion at the end of the run

_ACCEPTANCE: dict[int, tuple[str, str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "measured")
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        status = "PASS" if rep.passed else "FAIL"
        prev = _ACCEPTANCE.get(number)
        if prev is None or prev[0] == "PASS":
            _ACCEPTANCE[number] = (status, title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        status, title, detail = _ACCEPTANCE[number]
        line = f"[{status}] criterion {number:>2}: {title}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
